//! Operator diagrams for gates and observables.
//!
//! Gates are spliced together from identity chains and local blocks, so no
//! constructor ever touches a `2^L x 2^L` matrix.

use std::fmt;
use std::str::FromStr;

use crate::dd::{MatEdge, Manager, NodeId, REdge};
use crate::error::{Error, Result};
use crate::numerics::Complex;

/// Largest site count [`Manager::operator_to_dense`] will expand.
pub const DENSE_EXPORT_CAP: usize = 12;

pub type Matrix2 = [[Complex; 2]; 2];

/// An operator on `sites` two-level systems.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OperatorDD {
    pub root: MatEdge,
    pub sites: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

const O: Complex = Complex::new(0.0, 0.0);
const ONE: Complex = Complex::new(1.0, 0.0);
const I: Complex = Complex::new(0.0, 1.0);

impl Pauli {
    pub fn matrix(self) -> Matrix2 {
        match self {
            Pauli::I => [[ONE, O], [O, ONE]],
            Pauli::X => [[O, ONE], [ONE, O]],
            Pauli::Y => [[O, -I], [I, O]],
            Pauli::Z => [[ONE, O], [O, -ONE]],
        }
    }
}

/// `Rz(theta) = diag(e^{-i theta/2}, e^{i theta/2})`.
pub fn rz_matrix(theta: f64) -> Matrix2 {
    let h = theta / 2.0;
    [[Complex::from_polar(1.0, -h), O], [O, Complex::from_polar(1.0, h)]]
}

/// A gate of a Trotter circuit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Gate {
    /// `exp(-i theta/2 P (x) P)` on two distinct sites, `P` one of X, Y, Z.
    Rotation2 { axis: Pauli, theta: f64, sites: [usize; 2] },
    Rz { theta: f64, site: usize },
    Single { matrix: Matrix2, site: usize },
}

impl Gate {
    pub fn rxx(theta: f64, a: usize, b: usize) -> Gate {
        Gate::Rotation2 { axis: Pauli::X, theta, sites: [a, b] }
    }

    pub fn ryy(theta: f64, a: usize, b: usize) -> Gate {
        Gate::Rotation2 { axis: Pauli::Y, theta, sites: [a, b] }
    }

    pub fn rzz(theta: f64, a: usize, b: usize) -> Gate {
        Gate::Rotation2 { axis: Pauli::Z, theta, sites: [a, b] }
    }

    pub fn rz(theta: f64, site: usize) -> Gate {
        Gate::Rz { theta, site }
    }

    pub fn pauli(p: Pauli, site: usize) -> Gate {
        Gate::Single { matrix: p.matrix(), site }
    }

    pub fn sites(&self) -> Vec<usize> {
        match *self {
            Gate::Rotation2 { sites, .. } => sites.to_vec(),
            Gate::Rz { site, .. } | Gate::Single { site, .. } => vec![site],
        }
    }

    /// The 2x2 matrix of a single-site gate.
    pub fn local_matrix(&self) -> Option<Matrix2> {
        match *self {
            Gate::Rz { theta, .. } => Some(rz_matrix(theta)),
            Gate::Single { matrix, .. } => Some(matrix),
            Gate::Rotation2 { .. } => None,
        }
    }

    pub fn validate(&self, sites: usize) -> Result<()> {
        for s in self.sites() {
            if s >= sites {
                return Err(Error::InvalidSite { site: s, sites });
            }
        }
        if let Gate::Rotation2 { sites: [a, b], axis, theta } = *self {
            if a == b {
                return Err(Error::CoincidentTargets(a));
            }
            if axis == Pauli::I {
                return Err(Error::InvalidModel("two-site rotation axis must be X, Y or Z".into()));
            }
            if !theta.is_finite() {
                return Err(Error::NonFinite { re: theta, im: 0.0 });
            }
        }
        if let Gate::Rz { theta, .. } = *self {
            if !theta.is_finite() {
                return Err(Error::NonFinite { re: theta, im: 0.0 });
            }
        }
        Ok(())
    }
}

/// Observables evaluated along a time evolution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ObservableSpec {
    Sz(usize),
    SxSx(usize, usize),
}

impl ObservableSpec {
    pub fn sites(&self) -> Vec<usize> {
        match *self {
            ObservableSpec::Sz(i) => vec![i],
            ObservableSpec::SxSx(i, j) => vec![i, j],
        }
    }

    pub fn validate(&self, sites: usize) -> Result<()> {
        for s in self.sites() {
            if s >= sites {
                return Err(Error::InvalidSite { site: s, sites });
            }
        }
        match *self {
            ObservableSpec::SxSx(i, j) if i == j => Err(Error::CoincidentTargets(i)),
            _ => Ok(()),
        }
    }

    /// Pauli string as `(site, pauli)` pairs.
    pub fn paulis(&self) -> Vec<(usize, Pauli)> {
        match *self {
            ObservableSpec::Sz(i) => vec![(i, Pauli::Z)],
            ObservableSpec::SxSx(i, j) => vec![(i, Pauli::X), (j, Pauli::X)],
        }
    }
}

impl fmt::Display for ObservableSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ObservableSpec::Sz(i) => write!(f, "sz({i})"),
            ObservableSpec::SxSx(i, j) => write!(f, "sxsx({i},{j})"),
        }
    }
}

impl FromStr for ObservableSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let err = || Error::Parse { what: "observable", input: s.to_string() };
        let t: String = s.chars().filter(|c| !c.is_whitespace()).collect::<String>().to_ascii_lowercase();
        let (name, rest) = t.split_once('(').ok_or_else(err)?;
        let args = rest.strip_suffix(')').ok_or_else(err)?;
        let nums: Vec<usize> = args
            .split(',')
            .map(|a| a.parse::<usize>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| err())?;
        match (name, nums.as_slice()) {
            ("sz", [i]) => Ok(ObservableSpec::Sz(*i)),
            ("sxsx", [i, j]) => Ok(ObservableSpec::SxSx(*i, *j)),
            _ => Err(err()),
        }
    }
}

fn check_sites(sites: usize) -> Result<()> {
    if sites == 0 {
        Err(Error::TooFewSites { sites, min: 1 })
    } else {
        Ok(())
    }
}

impl Manager {
    pub fn identity_op(&mut self, sites: usize) -> Result<OperatorDD> {
        check_sites(sites)?;
        Ok(OperatorDD { root: self.identity(sites), sites })
    }

    /// Put `inner` (spanning levels below `from`) under identity wrappers up
    /// to the top level `sites - 1`.
    fn wrap_identity(&mut self, mut e: REdge, from: usize, sites: usize) -> REdge {
        for level in from..sites {
            e = self.make_mnode(level as u32, [e, REdge::ZERO, REdge::ZERO, e]);
        }
        e
    }

    fn identity_raw(&mut self, sites: usize) -> REdge {
        let e = self.identity(sites);
        REdge { node: e.node, w: ONE }
    }

    fn local_block(&mut self, u: &Matrix2, level: usize, below: REdge) -> REdge {
        let q = [u[0][0], u[0][1], u[1][0], u[1][1]].map(|w| if w == O { REdge::ZERO } else { below.scaled(w) });
        self.make_mnode(level as u32, q)
    }

    /// `I (x) ... (x) U (x) ... (x) I` with `U` acting on `target`.
    pub fn single_site_op(&mut self, u: &Matrix2, target: usize, sites: usize) -> Result<OperatorDD> {
        check_sites(sites)?;
        if target >= sites {
            return Err(Error::InvalidSite { site: target, sites });
        }
        if let Some(c) = u.iter().flatten().find(|c| !(c.re.is_finite() && c.im.is_finite())) {
            return Err(Error::NonFinite { re: c.re, im: c.im });
        }
        let below = self.identity_raw(target);
        let e = self.local_block(u, target, below);
        let e = self.wrap_identity(e, target + 1, sites);
        Ok(OperatorDD { root: self.finish_m(e), sites })
    }

    /// Tensor product of single-site Paulis, identity elsewhere.
    pub fn pauli_string(&mut self, paulis: &[(usize, Pauli)], sites: usize) -> Result<OperatorDD> {
        check_sites(sites)?;
        let mut at = vec![Pauli::I; sites];
        for &(s, p) in paulis {
            if s >= sites {
                return Err(Error::InvalidSite { site: s, sites });
            }
            at[s] = p;
        }
        let mut e = REdge { node: NodeId::TERMINAL, w: ONE };
        for (level, p) in at.iter().enumerate() {
            e = self.local_block(&p.matrix(), level, e);
        }
        Ok(OperatorDD { root: self.finish_m(e), sites })
    }

    /// `cos(theta/2) I - i sin(theta/2) P_a P_b` for sites `a != b`.
    pub fn two_site_rotation(&mut self, axis: Pauli, theta: f64, a: usize, b: usize, sites: usize) -> Result<OperatorDD> {
        check_sites(sites)?;
        Gate::Rotation2 { axis, theta, sites: [a, b] }.validate(sites)?;
        let (lo, hi) = (a.min(b), a.max(b));
        let p = axis.matrix();
        let id = Pauli::I.matrix();

        let below = self.identity_raw(lo);
        let mut e_i = self.local_block(&id, lo, below);
        let mut e_p = self.local_block(&p, lo, below);
        for level in lo + 1..hi {
            e_i = self.make_mnode(level as u32, [e_i, REdge::ZERO, REdge::ZERO, e_i]);
            e_p = self.make_mnode(level as u32, [e_p, REdge::ZERO, REdge::ZERO, e_p]);
        }

        let c = Complex::new((theta / 2.0).cos(), 0.0);
        let s = Complex::new(0.0, -(theta / 2.0).sin());
        let mut quads = [REdge::ZERO; 4];
        for r in 0..2 {
            for col in 0..2 {
                let ti = c * id[r][col];
                let tp = s * p[r][col];
                let ei = if ti == O { REdge::ZERO } else { e_i.scaled(ti) };
                let ep = if tp == O { REdge::ZERO } else { e_p.scaled(tp) };
                quads[2 * r + col] = match (ti == O, tp == O) {
                    (true, _) => ep,
                    (_, true) => ei,
                    _ => self.add_m_raw(ei, ep),
                };
            }
        }
        let top = self.make_mnode(hi as u32, quads);
        let e = self.wrap_identity(top, hi + 1, sites);
        Ok(OperatorDD { root: self.finish_m(e), sites })
    }

    pub fn gate_op(&mut self, gate: &Gate, sites: usize) -> Result<OperatorDD> {
        check_sites(sites)?;
        gate.validate(sites)?;
        match *gate {
            Gate::Rotation2 { axis, theta, sites: [a, b] } => self.two_site_rotation(axis, theta, a, b, sites),
            Gate::Rz { theta, site } => self.single_site_op(&rz_matrix(theta), site, sites),
            Gate::Single { matrix, site } => self.single_site_op(&matrix, site, sites),
        }
    }

    /// Hermitian operator for an observable.
    pub fn observable(&mut self, obs: &ObservableSpec, sites: usize) -> Result<OperatorDD> {
        check_sites(sites)?;
        obs.validate(sites)?;
        self.pauli_string(&obs.paulis(), sites)
    }

    /// Matrix entry `<row|op|col>`.
    pub fn operator_entry(&self, op: &OperatorDD, row: u64, col: u64) -> Result<Complex> {
        for index in [row, col] {
            if op.sites < 64 && index >> op.sites != 0 {
                return Err(Error::IndexOutOfRange { index, sites: op.sites });
            }
        }
        let mut acc = self.weight(op.root.weight);
        let mut node = op.root.node;
        let mut level = op.sites;
        while !node.is_terminal() {
            level -= 1;
            let bit = |x: u64| if level >= 64 { 0 } else { ((x >> level) & 1) as usize };
            let e = self.mnodes[node.index()].succ[2 * bit(row) + bit(col)];
            if e.is_zero() {
                return Ok(O);
            }
            acc *= self.weight(e.weight);
            node = e.node;
        }
        Ok(acc)
    }

    /// Dense row-major matrix of an operator.
    pub fn operator_to_dense(&self, op: &OperatorDD) -> Result<Vec<Vec<Complex>>> {
        if op.sites > DENSE_EXPORT_CAP {
            return Err(Error::OverDenseCap { sites: op.sites, cap: DENSE_EXPORT_CAP });
        }
        let n = 1usize << op.sites;
        let mut out = vec![vec![O; n]; n];
        let w = self.weight(op.root.weight);
        self.fill_dense_matrix(op.root.node, w, 0, 0, n, &mut out);
        Ok(out)
    }

    fn fill_dense_matrix(&self, node: NodeId, w: Complex, r0: usize, c0: usize, n: usize, out: &mut [Vec<Complex>]) {
        if w == O {
            return;
        }
        if node.is_terminal() {
            out[r0][c0] = w;
            return;
        }
        let half = n / 2;
        let succ = self.mnodes[node.index()].succ;
        for (k, e) in succ.iter().enumerate() {
            if !e.is_zero() {
                let (r, c) = (k / 2, k % 2);
                self.fill_dense_matrix(e.node, w * self.weight(e.weight), r0 + r * half, c0 + c * half, half, out);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2};

    fn close(a: Complex, b: Complex) -> bool {
        (a - b).norm() < 1e-12
    }

    #[test]
    fn rxx_half_pi_two_sites() {
        let mut m = Manager::default();
        let op = m.two_site_rotation(Pauli::X, FRAC_PI_2, 0, 1, 2).unwrap();
        assert_eq!(m.node_count(op.root), 3);
        assert!(close(m.weight(op.root.weight), Complex::new(FRAC_1_SQRT_2, 0.0)));
        let top = m.matrix_successors(op.root.node);
        let w = top.map(|e| m.weight(e.weight));
        assert!(close(w[0], ONE) && close(w[1], -I) && close(w[2], -I) && close(w[3], ONE));
        m.check_invariants().unwrap();
    }

    #[test]
    fn rz_single_site_root_weight() {
        let mut m = Manager::default();
        let theta = 0.7;
        let op = m.single_site_op(&rz_matrix(theta), 0, 1).unwrap();
        assert_eq!(m.node_count(op.root), 1);
        assert!(close(m.weight(op.root.weight), Complex::from_polar(1.0, -theta / 2.0)));
        let s = m.matrix_successors(op.root.node);
        assert!(s[0].weight.is_one());
        assert!(close(m.weight(s[3].weight), Complex::from_polar(1.0, theta)));
    }

    #[test]
    fn pauli_x_is_antidiagonal() {
        let mut m = Manager::default();
        let op = m.single_site_op(&Pauli::X.matrix(), 0, 1).unwrap();
        let s = m.matrix_successors(op.root.node);
        assert!(s[0].is_zero() && s[3].is_zero());
        assert!(s[1].weight.is_one() && s[2].weight.is_one());
    }

    #[test]
    fn zero_angle_rotation_is_identity() {
        let mut m = Manager::default();
        for axis in [Pauli::X, Pauli::Y, Pauli::Z] {
            let op = m.two_site_rotation(axis, 0.0, 1, 4, 6).unwrap();
            assert_eq!(op.root, m.identity(6));
            assert_eq!(m.node_count(op.root), 6);
        }
    }

    #[test]
    fn rejects_bad_targets() {
        let mut m = Manager::default();
        assert_eq!(m.two_site_rotation(Pauli::X, 1.0, 2, 2, 4), Err(Error::CoincidentTargets(2)));
        assert!(m.single_site_op(&Pauli::Z.matrix(), 4, 4).is_err());
        assert!(m.observable(&ObservableSpec::SxSx(1, 1), 3).is_err());
    }

    #[test]
    fn observable_grammar_round_trips() {
        for s in ["sz(3)", "sxsx(0,4)"] {
            let o: ObservableSpec = s.parse().unwrap();
            assert_eq!(o.to_string(), s);
        }
        assert_eq!("SxSx( 1 , 2 )".parse::<ObservableSpec>().unwrap(), ObservableSpec::SxSx(1, 2));
        for bad in ["sz", "sz()", "sz(1,2)", "sy(0)", "sxsx(0)", "sz(-1)"] {
            assert!(bad.parse::<ObservableSpec>().is_err(), "{bad}");
        }
    }

    #[test]
    fn long_range_correlator_within_bound() {
        let mut m = Manager::default();
        let op = m.observable(&ObservableSpec::SxSx(0, 4), 5).unwrap();
        assert!(m.node_count(op.root) <= 17);
        let sz = m.observable(&ObservableSpec::Sz(0), 1).unwrap();
        let d = m.operator_to_dense(&sz).unwrap();
        assert!(close(d[0][0], ONE) && close(d[1][1], -ONE) && d[0][1] == O);
    }
}
