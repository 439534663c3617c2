//! Complex edge weights and the tolerance-uniqued weight table.
//!
//! Every weight stored in a decision-diagram node lives in a [`WeightTable`]
//! and is referred to by a [`WeightRef`]. Two values that agree within the
//! table's tolerance (componentwise) resolve to the same handle, so comparing
//! node successors reduces to comparing integers.
//!
//! Lookup buckets have width `2 * eps` on each axis. A stored value is
//! registered in every bucket its `eps`-box overlaps (at most four), so a
//! query only has to probe the bucket containing the query point.

use rustc_hash::FxHashMap;
use smallvec::SmallVec;

use crate::error::{Error, Result};

pub type Complex = num_complex::Complex64;

pub const DEFAULT_TOLERANCE: f64 = 1e-10;

/// Componentwise uniquing tolerance for complex weights.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Tolerance(f64);

impl Tolerance {
    pub fn new(eps: f64) -> Result<Self> {
        if eps.is_finite() && eps > 0.0 {
            Ok(Tolerance(eps))
        } else {
            Err(Error::InvalidTolerance(eps))
        }
    }

    #[inline]
    pub fn eps(self) -> f64 {
        self.0
    }

    /// Both components within `eps` of zero.
    #[inline]
    pub fn is_zero(self, c: Complex) -> bool {
        c.re.abs() <= self.0 && c.im.abs() <= self.0
    }

    #[inline]
    pub fn approx_eq(self, a: Complex, b: Complex) -> bool {
        (a.re - b.re).abs() <= self.0 && (a.im - b.im).abs() <= self.0
    }
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance(DEFAULT_TOLERANCE)
    }
}

/// Handle to a canonical complex value in a [`WeightTable`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct WeightRef(u32);

impl WeightRef {
    pub const ZERO: WeightRef = WeightRef(0);
    pub const ONE: WeightRef = WeightRef(1);

    #[inline]
    pub fn is_zero(self) -> bool {
        self == Self::ZERO
    }

    #[inline]
    pub fn is_one(self) -> bool {
        self == Self::ONE
    }

    #[inline]
    pub(crate) fn index(self) -> usize {
        self.0 as usize
    }
}

/// Arithmetic applied by [`WeightTable::apply`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WeightOp {
    Add,
    Mul,
    Conj,
    Neg,
}

type BucketKey = (i64, i64);

#[derive(Debug, Clone)]
pub struct WeightTable {
    tol: Tolerance,
    values: Vec<Complex>,
    live: Vec<bool>,
    pins: Vec<u32>,
    free: Vec<u32>,
    buckets: FxHashMap<BucketKey, SmallVec<[u32; 2]>>,
}

impl WeightTable {
    pub fn new(tol: Tolerance) -> Self {
        WeightTable {
            tol,
            values: vec![Complex::new(0.0, 0.0), Complex::new(1.0, 0.0)],
            live: vec![true, true],
            pins: vec![0, 0],
            free: Vec::new(),
            buckets: FxHashMap::default(),
        }
    }

    #[inline]
    pub fn tolerance(&self) -> Tolerance {
        self.tol
    }

    /// Resolved value of a handle.
    #[inline]
    pub fn value(&self, w: WeightRef) -> Complex {
        self.values[w.index()]
    }

    /// Number of live stored values, including ZERO and ONE.
    pub fn len(&self) -> usize {
        self.values.len() - self.free.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Canonical handle for `c`, inserting it when no stored value lies
    /// within tolerance.
    pub fn canonical(&mut self, c: Complex) -> Result<WeightRef> {
        if !(c.re.is_finite() && c.im.is_finite()) {
            return Err(Error::NonFinite { re: c.re, im: c.im });
        }
        Ok(self.intern(c))
    }

    /// Like [`canonical`](Self::canonical) for values already known finite.
    pub(crate) fn intern(&mut self, c: Complex) -> WeightRef {
        debug_assert!(c.re.is_finite() && c.im.is_finite(), "non-finite weight {c}");
        let eps = self.tol.eps();
        if c.re.abs() <= eps && c.im.abs() <= eps {
            return WeightRef::ZERO;
        }
        if (c.re - 1.0).abs() <= eps && c.im.abs() <= eps {
            return WeightRef::ONE;
        }
        if let Some(hit) = self.probe(c) {
            return hit;
        }
        self.insert(c)
    }

    fn probe(&self, c: Complex) -> Option<WeightRef> {
        let slots = self.buckets.get(&self.home(c))?;
        let mut best: Option<(f64, u32)> = None;
        for &idx in slots {
            let v = self.values[idx as usize];
            if self.tol.approx_eq(v, c) {
                let d = (v - c).norm_sqr();
                if !matches!(best, Some((bd, bi)) if bd < d || (bd == d && bi < idx)) {
                    best = Some((d, idx));
                }
            }
        }
        best.map(|(_, idx)| WeightRef(idx))
    }

    fn insert(&mut self, c: Complex) -> WeightRef {
        let idx = match self.free.pop() {
            Some(idx) => {
                self.values[idx as usize] = c;
                self.live[idx as usize] = true;
                self.pins[idx as usize] = 0;
                idx
            }
            None => {
                self.values.push(c);
                self.live.push(true);
                self.pins.push(0);
                (self.values.len() - 1) as u32
            }
        };
        for key in self.covered(c) {
            self.buckets.entry(key).or_default().push(idx);
        }
        WeightRef(idx)
    }

    #[inline]
    fn width(&self) -> f64 {
        2.0 * self.tol.eps()
    }

    #[inline]
    fn home(&self, c: Complex) -> BucketKey {
        let w = self.width();
        ((c.re / w).floor() as i64, (c.im / w).floor() as i64)
    }

    /// Buckets overlapped by the `eps`-box around `c`.
    fn covered(&self, c: Complex) -> SmallVec<[BucketKey; 4]> {
        let w = self.width();
        let eps = self.tol.eps();
        let span = |x: f64| {
            let lo = ((x - eps) / w).floor() as i64;
            let hi = ((x + eps) / w).floor() as i64;
            lo..=hi
        };
        let mut keys = SmallVec::new();
        for kr in span(c.re) {
            for ki in span(c.im) {
                keys.push((kr, ki));
            }
        }
        keys
    }

    /// Exact complex arithmetic on resolved values, re-canonicalized.
    pub fn apply(&mut self, op: WeightOp, a: WeightRef, b: WeightRef) -> WeightRef {
        let (x, y) = (self.value(a), self.value(b));
        let r = match op {
            WeightOp::Add => x + y,
            WeightOp::Mul => x * y,
            WeightOp::Conj => x.conj(),
            WeightOp::Neg => -x,
        };
        self.intern(r)
    }

    pub fn add(&mut self, a: WeightRef, b: WeightRef) -> WeightRef {
        self.apply(WeightOp::Add, a, b)
    }

    pub fn mul(&mut self, a: WeightRef, b: WeightRef) -> WeightRef {
        if a.is_zero() || b.is_zero() {
            return WeightRef::ZERO;
        }
        if a.is_one() {
            return b;
        }
        if b.is_one() {
            return a;
        }
        self.apply(WeightOp::Mul, a, b)
    }

    pub fn conj(&mut self, a: WeightRef) -> WeightRef {
        self.apply(WeightOp::Conj, a, a)
    }

    pub fn neg(&mut self, a: WeightRef) -> WeightRef {
        self.apply(WeightOp::Neg, a, a)
    }

    pub fn abs2(&self, a: WeightRef) -> f64 {
        self.value(a).norm_sqr()
    }

    pub(crate) fn pin(&mut self, w: WeightRef) {
        self.pins[w.index()] += 1;
    }

    pub(crate) fn unpin(&mut self, w: WeightRef) {
        let p = &mut self.pins[w.index()];
        debug_assert!(*p > 0, "unpinning unpinned weight");
        *p = p.saturating_sub(1);
    }

    /// Drop every value that is neither pinned nor flagged in `used`.
    /// Returns the number of values released.
    pub(crate) fn sweep(&mut self, used: &[bool]) -> usize {
        let mut freed = 0;
        for idx in 2..self.values.len() {
            if !self.live[idx] || self.pins[idx] > 0 || used.get(idx).copied().unwrap_or(false) {
                continue;
            }
            let c = self.values[idx];
            for key in self.covered(c) {
                if let Some(slots) = self.buckets.get_mut(&key) {
                    slots.retain(|s| *s as usize != idx);
                    if slots.is_empty() {
                        self.buckets.remove(&key);
                    }
                }
            }
            self.live[idx] = false;
            self.free.push(idx as u32);
            freed += 1;
        }
        freed
    }

    pub(crate) fn capacity(&self) -> usize {
        self.values.len()
    }
}

impl Default for WeightTable {
    fn default() -> Self {
        Self::new(Tolerance::default())
    }
}
