//! Construction and inspection of state diagrams.

use crate::dd::{Manager, NodeId, REdge, VecEdge};
use crate::error::{Error, Result};
use crate::numerics::Complex;

/// Largest site count [`Manager::state_to_dense`] will expand.
pub const DENSE_EXPORT_CAP: usize = 24;

/// A state on `sites` two-level systems. Site `sites - 1` is the top level
/// and the most significant bit of a basis index.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StateDD {
    pub root: VecEdge,
    pub sites: usize,
}

fn bit_of(index: u64, level: usize) -> usize {
    if level >= 64 {
        0
    } else {
        ((index >> level) & 1) as usize
    }
}

impl Manager {
    /// Computational basis state. `bits` is in ket order, so `bits[0]` is
    /// the value of the top site.
    pub fn basis_state(&mut self, bits: &[u8]) -> Result<StateDD> {
        if bits.is_empty() {
            return Err(Error::TooFewSites { sites: 0, min: 1 });
        }
        if let Some(&b) = bits.iter().find(|&&b| b > 1) {
            return Err(Error::InvalidBit(b));
        }
        let one = Complex::new(1.0, 0.0);
        let mut e = REdge { node: NodeId::TERMINAL, w: one };
        for (level, &b) in bits.iter().rev().enumerate() {
            let mut succ = [REdge::ZERO; 2];
            succ[b as usize] = e;
            e = self.make_vnode(level as u32, succ);
        }
        let root = self.finish_v(e);
        Ok(StateDD { root, sites: bits.len() })
    }

    /// Basis state `|index>` on `sites` sites.
    pub fn basis_state_index(&mut self, sites: usize, index: u64) -> Result<StateDD> {
        if sites < 64 && index >> sites != 0 {
            return Err(Error::IndexOutOfRange { index, sites });
        }
        let bits: Vec<u8> = (0..sites).rev().map(|l| bit_of(index, l) as u8).collect();
        self.basis_state(&bits)
    }

    /// `|0...0>` on `sites` sites.
    pub fn zero_state(&mut self, sites: usize) -> Result<StateDD> {
        self.basis_state(&vec![0; sites])
    }

    /// Reduced diagram of a dense amplitude vector of length `2^L`. The
    /// global phase and norm are carried on the root edge.
    pub fn from_amplitudes(&mut self, amps: &[Complex]) -> Result<StateDD> {
        let n = amps.len();
        if n < 2 || !n.is_power_of_two() {
            return Err(Error::NotPowerOfTwo(n));
        }
        if let Some(c) = amps.iter().find(|c| !(c.re.is_finite() && c.im.is_finite())) {
            return Err(Error::NonFinite { re: c.re, im: c.im });
        }
        let sites = n.trailing_zeros() as usize;
        let e = self.build_from_slice(amps, sites - 1);
        if e.node.is_terminal() {
            return Err(Error::DegenerateState);
        }
        let root = self.finish_v(e);
        if root.is_zero() {
            return Err(Error::DegenerateState);
        }
        Ok(StateDD { root, sites })
    }

    fn build_from_slice(&mut self, amps: &[Complex], level: usize) -> REdge {
        let half = amps.len() / 2;
        let succ = if level == 0 {
            [
                REdge { node: NodeId::TERMINAL, w: amps[0] },
                REdge { node: NodeId::TERMINAL, w: amps[1] },
            ]
        } else {
            [
                self.build_from_slice(&amps[..half], level - 1),
                self.build_from_slice(&amps[half..], level - 1),
            ]
        };
        self.make_vnode(level as u32, succ)
    }

    /// `(|0...0> + |1...1>) / sqrt(2)`.
    pub fn ghz_state(&mut self, sites: usize) -> Result<StateDD> {
        if sites < 2 {
            return Err(Error::TooFewSites { sites, min: 2 });
        }
        let one = Complex::new(1.0, 0.0);
        let mut zeros = REdge { node: NodeId::TERMINAL, w: one };
        let mut ones = zeros;
        for level in 0..sites as u32 - 1 {
            zeros = self.make_vnode(level, [zeros, REdge::ZERO]);
            ones = self.make_vnode(level, [REdge::ZERO, ones]);
        }
        let h = Complex::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        let top = self.make_vnode(sites as u32 - 1, [zeros.scaled(h), ones.scaled(h)]);
        let root = self.finish_v(top);
        Ok(StateDD { root, sites })
    }

    /// Equal superposition of all single-excitation basis states.
    pub fn w_state(&mut self, sites: usize) -> Result<StateDD> {
        if sites < 2 {
            return Err(Error::TooFewSites { sites, min: 2 });
        }
        let one = Complex::new(1.0, 0.0);
        let term = REdge { node: NodeId::TERMINAL, w: one };
        // Unnormalized: `w` holds the sum of all single excitations below.
        let mut zeros = self.make_vnode(0, [term, REdge::ZERO]);
        let mut w = self.make_vnode(0, [REdge::ZERO, term]);
        for level in 1..sites as u32 {
            let next_w = self.make_vnode(level, [w, zeros]);
            zeros = self.make_vnode(level, [zeros, REdge::ZERO]);
            w = next_w;
        }
        let norm = (sites as f64).sqrt();
        let root = self.finish_v(w.scaled(Complex::new(1.0 / norm, 0.0)));
        Ok(StateDD { root, sites })
    }

    /// Amplitude of basis state `index`: the product of edge weights along
    /// its path.
    pub fn amplitude(&self, state: &StateDD, index: u64) -> Result<Complex> {
        if state.sites < 64 && index >> state.sites != 0 {
            return Err(Error::IndexOutOfRange { index, sites: state.sites });
        }
        let mut acc = self.weight(state.root.weight);
        let mut node = state.root.node;
        let mut level = state.sites;
        while !node.is_terminal() {
            if acc == Complex::new(0.0, 0.0) {
                break;
            }
            level -= 1;
            let e = self.vnodes[node.index()].succ[bit_of(index, level)];
            if e.is_zero() {
                return Ok(Complex::new(0.0, 0.0));
            }
            acc *= self.weight(e.weight);
            node = e.node;
        }
        Ok(acc)
    }

    /// Dense amplitude vector, index `i` holding `<i|state>`.
    pub fn state_to_dense(&self, state: &StateDD) -> Result<Vec<Complex>> {
        if state.sites > DENSE_EXPORT_CAP {
            return Err(Error::OverDenseCap { sites: state.sites, cap: DENSE_EXPORT_CAP });
        }
        let mut out = vec![Complex::new(0.0, 0.0); 1 << state.sites];
        let w = self.weight(state.root.weight);
        self.fill_dense(state.root.node, w, &mut out);
        Ok(out)
    }

    fn fill_dense(&self, node: NodeId, w: Complex, out: &mut [Complex]) {
        if w == Complex::new(0.0, 0.0) {
            return;
        }
        if node.is_terminal() {
            out[0] = w;
            return;
        }
        let half = out.len() / 2;
        let succ = self.vnodes[node.index()].succ;
        let (lo, hi) = out.split_at_mut(half);
        for (e, part) in succ.iter().zip([lo, hi]) {
            if !e.is_zero() {
                self.fill_dense(e.node, w * self.weight(e.weight), part);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn c(re: f64) -> Complex {
        Complex::new(re, 0.0)
    }

    fn example_vector() -> Vec<Complex> {
        let a = 1.0 / (2.0 * 2f64.sqrt());
        [a, a, 0.5, 0.0, a, a, 0.5, 0.0].map(c).to_vec()
    }

    #[test]
    fn single_site_zero_state() {
        let mut m = Manager::default();
        let s = m.basis_state(&[0]).unwrap();
        assert_eq!(m.node_count(s.root), 1);
        let succ = m.vector_successors(s.root.node);
        assert!(succ[0].weight.is_one());
        assert!(succ[1].is_zero());
        assert_eq!(m.amplitude(&s, 0).unwrap(), c(1.0));
    }

    #[test]
    fn three_site_example() {
        let mut m = Manager::default();
        let s = m.from_amplitudes(&example_vector()).unwrap();
        assert_eq!(m.node_count(s.root), 4);
        let top = m.vector_successors(s.root.node);
        for e in top {
            assert!((m.weight(e.weight) - c(FRAC_1_SQRT_2)).norm() < 1e-12);
        }
        assert_eq!(top[0].node, top[1].node);
        assert!((m.amplitude(&s, 0b010).unwrap() - c(0.5)).norm() < 1e-12);
        assert_eq!(m.amplitude(&s, 0b011).unwrap(), c(0.0));
        assert!(m.amplitude(&s, 8).is_err());
    }

    #[test]
    fn one_hot_matches_basis_state() {
        let mut m = Manager::default();
        let mut v = vec![c(0.0); 16];
        v[0b0101] = c(1.0);
        let a = m.from_amplitudes(&v).unwrap();
        let b = m.basis_state(&[0, 1, 0, 1]).unwrap();
        assert_eq!(a, b);
        assert_eq!(m.node_count(b.root), 4);
        assert_eq!(m.basis_state_index(4, 0b0101).unwrap(), b);
    }

    #[test]
    fn degenerate_inputs_rejected() {
        let mut m = Manager::default();
        assert_eq!(m.from_amplitudes(&[c(0.0); 8]), Err(Error::DegenerateState));
        assert_eq!(m.from_amplitudes(&[c(1.0); 3]), Err(Error::NotPowerOfTwo(3)));
        assert!(m.basis_state(&[0, 2]).is_err());
        assert!(m.ghz_state(1).is_err());
        assert!(m.basis_state_index(2, 4).is_err());
    }

    #[test]
    fn ghz_and_w_definitions() {
        let mut m = Manager::default();
        let g = m.ghz_state(2).unwrap();
        let d = m.state_to_dense(&g).unwrap();
        let h = FRAC_1_SQRT_2;
        for (x, y) in d.iter().zip([h, 0.0, 0.0, h]) {
            assert!((x - c(y)).norm() < 1e-12);
        }
        let w = m.w_state(3).unwrap();
        let d = m.state_to_dense(&w).unwrap();
        let t = 1.0 / 3f64.sqrt();
        for (x, y) in d.iter().zip([0.0, t, t, 0.0, t, 0.0, 0.0, 0.0]) {
            assert!((x - c(y)).norm() < 1e-12);
        }
        for l in 2..=16 {
            let g = m.ghz_state(l).unwrap();
            assert_eq!(m.node_count(g.root), 2 * l - 1);
            let w = m.w_state(l).unwrap();
            assert!(m.node_count(w.root) <= 2 * l);
        }
        m.check_invariants().unwrap();
    }
}
