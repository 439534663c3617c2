//! Kronecker product, addition, multiplication, inner product and
//! expectation values on diagrams.
//!
//! The recursions work on edges with unresolved complex weights and only
//! canonicalize when a node is stored or a result is handed back.

use rustc_hash::FxHashMap;

use crate::dd::{cache_put, Manager, NodeId, REdge};
use crate::error::{Error, Result};
use crate::numerics::Complex;
use crate::operator::OperatorDD;
use crate::state::StateDD;

/// Largest imaginary part tolerated in an expectation value.
pub const IMAG_RESIDUE_BOUND: f64 = 1e-8;

const ZERO: Complex = Complex::new(0.0, 0.0);
const ONE: Complex = Complex::new(1.0, 0.0);

fn same_sites(left: usize, right: usize) -> Result<()> {
    if left == right {
        Ok(())
    } else {
        Err(Error::SiteMismatch { left, right })
    }
}

impl Manager {
    #[inline]
    fn raw_zero(&self, w: Complex) -> bool {
        self.config.tolerance.is_zero(w)
    }

    pub(crate) fn add_v_raw(&mut self, a: REdge, b: REdge) -> REdge {
        if self.raw_zero(a.w) {
            return if self.raw_zero(b.w) { REdge::ZERO } else { b };
        }
        if self.raw_zero(b.w) {
            return a;
        }
        if a.node == b.node {
            let w = a.w + b.w;
            return if self.raw_zero(w) { REdge::ZERO } else { REdge { node: a.node, w } };
        }
        let (a, b) = if a.node < b.node { (a, b) } else { (b, a) };
        let rref = self.weights.intern(b.w / a.w);
        if rref.is_zero() {
            return a;
        }
        let key = (a.node, b.node, rref);
        if self.config.caching {
            if let Some(&res) = self.caches.add_v.get(&key) {
                return res.scaled(a.w);
            }
        }
        let r = self.weights.value(rref);
        let (sa, sb) = (self.vsucc_raw(a.node), self.vsucc_raw(b.node));
        let level = self.vnodes[a.node.index()].level;
        let c0 = self.add_v_raw(sa[0], sb[0].scaled(r));
        let c1 = self.add_v_raw(sa[1], sb[1].scaled(r));
        let res = self.make_vnode(level, [c0, c1]);
        if self.config.caching {
            cache_put(&mut self.caches.add_v, key, res);
        }
        res.scaled(a.w)
    }

    pub(crate) fn add_m_raw(&mut self, a: REdge, b: REdge) -> REdge {
        if self.raw_zero(a.w) {
            return if self.raw_zero(b.w) { REdge::ZERO } else { b };
        }
        if self.raw_zero(b.w) {
            return a;
        }
        if a.node == b.node {
            let w = a.w + b.w;
            return if self.raw_zero(w) { REdge::ZERO } else { REdge { node: a.node, w } };
        }
        let (a, b) = if a.node < b.node { (a, b) } else { (b, a) };
        let rref = self.weights.intern(b.w / a.w);
        if rref.is_zero() {
            return a;
        }
        let key = (a.node, b.node, rref);
        if self.config.caching {
            if let Some(&res) = self.caches.add_m.get(&key) {
                return res.scaled(a.w);
            }
        }
        let r = self.weights.value(rref);
        let (sa, sb) = (self.msucc_raw(a.node), self.msucc_raw(b.node));
        let level = self.mnodes[a.node.index()].level;
        let mut c = [REdge::ZERO; 4];
        for k in 0..4 {
            c[k] = self.add_m_raw(sa[k], sb[k].scaled(r));
        }
        let res = self.make_mnode(level, c);
        if self.config.caching {
            cache_put(&mut self.caches.add_m, key, res);
        }
        res.scaled(a.w)
    }

    pub(crate) fn mat_vec_raw(&mut self, m: REdge, v: REdge) -> REdge {
        if self.raw_zero(m.w) || self.raw_zero(v.w) {
            return REdge::ZERO;
        }
        let w = m.w * v.w;
        if m.node.is_terminal() {
            return REdge { node: NodeId::TERMINAL, w };
        }
        if self.mnodes[m.node.index()].ident {
            return REdge { node: v.node, w };
        }
        let key = (m.node, v.node);
        if self.config.caching {
            if let Some(&res) = self.caches.mat_vec.get(&key) {
                return res.scaled(w);
            }
        }
        let (ms, vs) = (self.msucc_raw(m.node), self.vsucc_raw(v.node));
        let level = self.mnodes[m.node.index()].level;
        let mut rows = [REdge::ZERO; 2];
        for (r, row) in rows.iter_mut().enumerate() {
            let x = self.mat_vec_raw(ms[2 * r], vs[0]);
            let y = self.mat_vec_raw(ms[2 * r + 1], vs[1]);
            *row = self.add_v_raw(x, y);
        }
        let res = self.make_vnode(level, rows);
        if self.config.caching {
            cache_put(&mut self.caches.mat_vec, key, res);
        }
        res.scaled(w)
    }

    pub(crate) fn mat_mat_raw(&mut self, a: REdge, b: REdge) -> REdge {
        if self.raw_zero(a.w) || self.raw_zero(b.w) {
            return REdge::ZERO;
        }
        let w = a.w * b.w;
        if a.node.is_terminal() {
            return REdge { node: b.node, w };
        }
        if self.mnodes[a.node.index()].ident {
            return REdge { node: b.node, w };
        }
        if self.mnodes[b.node.index()].ident {
            return REdge { node: a.node, w };
        }
        let key = (a.node, b.node);
        if self.config.caching {
            if let Some(&res) = self.caches.mat_mat.get(&key) {
                return res.scaled(w);
            }
        }
        let (sa, sb) = (self.msucc_raw(a.node), self.msucc_raw(b.node));
        let level = self.mnodes[a.node.index()].level;
        let mut c = [REdge::ZERO; 4];
        for r in 0..2 {
            for col in 0..2 {
                let x = self.mat_mat_raw(sa[2 * r], sb[col]);
                let y = self.mat_mat_raw(sa[2 * r + 1], sb[2 + col]);
                c[2 * r + col] = self.add_m_raw(x, y);
            }
        }
        let res = self.make_mnode(level, c);
        if self.config.caching {
            cache_put(&mut self.caches.mat_mat, key, res);
        }
        res.scaled(w)
    }

    /// `<a|b>` with the left operand conjugated.
    pub(crate) fn inner_raw(&mut self, a: REdge, b: REdge) -> Complex {
        if self.raw_zero(a.w) || self.raw_zero(b.w) {
            return ZERO;
        }
        let w = a.w.conj() * b.w;
        if a.node.is_terminal() {
            return w;
        }
        let key = (a.node, b.node);
        if self.config.caching {
            if let Some(&v) = self.caches.inner.get(&key) {
                return v * w;
            }
        }
        let (sa, sb) = (self.vsucc_raw(a.node), self.vsucc_raw(b.node));
        let v = self.inner_raw(sa[0], sb[0]) + self.inner_raw(sa[1], sb[1]);
        if self.config.caching {
            cache_put(&mut self.caches.inner, key, v);
        }
        v * w
    }

    fn kron_v_rec(&mut self, node: NodeId, b: NodeId, shift: u32, memo: &mut FxHashMap<NodeId, REdge>) -> REdge {
        if node.is_terminal() {
            return REdge { node: b, w: ONE };
        }
        if let Some(&r) = memo.get(&node) {
            return r;
        }
        let n = &self.vnodes[node.index()];
        let (succ, level) = (n.succ, n.level);
        let mut c = [REdge::ZERO; 2];
        for k in 0..2 {
            if !succ[k].is_zero() {
                let w = self.weights.value(succ[k].weight);
                c[k] = self.kron_v_rec(succ[k].node, b, shift, memo).scaled(w);
            }
        }
        let r = self.make_vnode(level + shift, c);
        memo.insert(node, r);
        r
    }

    fn kron_m_rec(&mut self, node: NodeId, b: NodeId, shift: u32, memo: &mut FxHashMap<NodeId, REdge>) -> REdge {
        if node.is_terminal() {
            return REdge { node: b, w: ONE };
        }
        if let Some(&r) = memo.get(&node) {
            return r;
        }
        let n = &self.mnodes[node.index()];
        let (succ, level) = (n.succ, n.level);
        let mut c = [REdge::ZERO; 4];
        for k in 0..4 {
            if !succ[k].is_zero() {
                let w = self.weights.value(succ[k].weight);
                c[k] = self.kron_m_rec(succ[k].node, b, shift, memo).scaled(w);
            }
        }
        let r = self.make_mnode(level + shift, c);
        memo.insert(node, r);
        r
    }

    /// `a (x) b`: `a` occupies the upper sites, `b` the lower ones. Runs in
    /// time linear in the size of `a`.
    pub fn kron_states(&mut self, a: &StateDD, b: &StateDD) -> StateDD {
        let sites = a.sites + b.sites;
        if a.root.is_zero() || b.root.is_zero() {
            return StateDD { root: crate::dd::VecEdge::ZERO, sites };
        }
        let mut memo = FxHashMap::default();
        let r = self.kron_v_rec(a.root.node, b.root.node, b.sites as u32, &mut memo);
        let w = self.weight(a.root.weight) * self.weight(b.root.weight);
        StateDD { root: self.finish_v(r.scaled(w)), sites }
    }

    /// Kronecker product on raw edges. The weight stays unresolved, so it
    /// may be far below the uniquing tolerance.
    pub(crate) fn kron_m_raw(&mut self, a: REdge, b: REdge, b_sites: usize) -> REdge {
        if a.w == ZERO || b.w == ZERO {
            return REdge::ZERO;
        }
        let mut memo = FxHashMap::default();
        let r = self.kron_m_rec(a.node, b.node, b_sites as u32, &mut memo);
        r.scaled(a.w * b.w)
    }

    pub fn kron_operators(&mut self, a: &OperatorDD, b: &OperatorDD) -> OperatorDD {
        let sites = a.sites + b.sites;
        if a.root.is_zero() || b.root.is_zero() {
            return OperatorDD { root: crate::dd::MatEdge::ZERO, sites };
        }
        let mut memo = FxHashMap::default();
        let r = self.kron_m_rec(a.root.node, b.root.node, b.sites as u32, &mut memo);
        let w = self.weight(a.root.weight) * self.weight(b.root.weight);
        OperatorDD { root: self.finish_m(r.scaled(w)), sites }
    }

    /// Entrywise sum. No global renormalization is applied.
    pub fn add_states(&mut self, a: &StateDD, b: &StateDD) -> Result<StateDD> {
        same_sites(a.sites, b.sites)?;
        let (ra, rb) = (self.rv(a), self.rv(b));
        let r = self.add_v_raw(ra, rb);
        Ok(StateDD { root: self.finish_v(r), sites: a.sites })
    }

    pub fn add_operators(&mut self, a: &OperatorDD, b: &OperatorDD) -> Result<OperatorDD> {
        same_sites(a.sites, b.sites)?;
        let (ra, rb) = (self.rm(a), self.rm(b));
        let r = self.add_m_raw(ra, rb);
        Ok(OperatorDD { root: self.finish_m(r), sites: a.sites })
    }

    pub fn scale_state(&mut self, s: &StateDD, c: Complex) -> StateDD {
        let r = self.rv(s).scaled(c);
        StateDD { root: self.finish_v(r), sites: s.sites }
    }

    pub fn mat_vec(&mut self, op: &OperatorDD, s: &StateDD) -> Result<StateDD> {
        same_sites(op.sites, s.sites)?;
        let (rm, rv) = (self.rm(op), self.rv(s));
        let r = self.mat_vec_raw(rm, rv);
        Ok(StateDD { root: self.finish_v(r), sites: s.sites })
    }

    pub fn mat_mat(&mut self, a: &OperatorDD, b: &OperatorDD) -> Result<OperatorDD> {
        same_sites(a.sites, b.sites)?;
        let (ra, rb) = (self.rm(a), self.rm(b));
        let r = self.mat_mat_raw(ra, rb);
        Ok(OperatorDD { root: self.finish_m(r), sites: a.sites })
    }

    pub fn inner_product(&mut self, a: &StateDD, b: &StateDD) -> Result<Complex> {
        same_sites(a.sites, b.sites)?;
        let (ra, rb) = (self.rv(a), self.rv(b));
        Ok(self.inner_raw(ra, rb))
    }

    pub fn norm(&mut self, s: &StateDD) -> f64 {
        let r = self.rv(s);
        self.inner_raw(r, r).re.max(0.0).sqrt()
    }

    /// `Re <psi|O|psi>`, failing when the imaginary part is not negligible.
    pub fn expectation(&mut self, psi: &StateDD, obs: &OperatorDD) -> Result<f64> {
        same_sites(psi.sites, obs.sites)?;
        let (rm, rv) = (self.rm(obs), self.rv(psi));
        let o_psi = self.mat_vec_raw(rm, rv);
        let v = self.inner_raw(rv, o_psi);
        if v.im.abs() >= IMAG_RESIDUE_BOUND {
            return Err(Error::ImaginaryResidue { real: v.re, imag: v.im });
        }
        Ok(v.re)
    }

    pub(crate) fn rv(&self, s: &StateDD) -> REdge {
        REdge { node: s.root.node, w: self.weight(s.root.weight) }
    }

    pub(crate) fn rm(&self, o: &OperatorDD) -> REdge {
        REdge { node: o.root.node, w: self.weight(o.root.weight) }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::Pauli;
    use crate::ObservableSpec;
    use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2};

    fn close(a: Complex, b: Complex) -> bool {
        (a - b).norm() < 1e-12
    }

    #[test]
    fn kron_of_basis_states() {
        let mut m = Manager::default();
        let z = m.basis_state(&[0]).unwrap();
        let o = m.basis_state(&[1]).unwrap();
        let k = m.kron_states(&z, &o);
        assert_eq!(k, m.basis_state(&[0, 1]).unwrap());
        let mut acc = z;
        for _ in 1..6 {
            acc = m.kron_states(&acc, &o);
        }
        assert_eq!(m.node_count(acc.root), 6);
    }

    #[test]
    fn add_zero_and_ghz() {
        let mut m = Manager::default();
        let a = m.basis_state(&[0, 0, 0]).unwrap();
        let zero = StateDD { root: crate::VecEdge::ZERO, sites: 3 };
        assert_eq!(m.add_states(&a, &zero).unwrap(), a);
        let b = m.basis_state(&[1, 1, 1]).unwrap();
        let sum = m.add_states(&a, &b).unwrap();
        let ghz = m.scale_state(&sum, Complex::new(FRAC_1_SQRT_2, 0.0));
        assert_eq!(ghz, m.ghz_state(3).unwrap());
    }

    #[test]
    fn matvec_examples() {
        let mut m = Manager::default();
        let s = m.zero_state(2).unwrap();
        let id = m.identity_op(2).unwrap();
        assert_eq!(m.mat_vec(&id, &s).unwrap(), s);

        let x = m.single_site_op(&Pauli::X.matrix(), 0, 1).unwrap();
        let z1 = m.basis_state(&[0]).unwrap();
        let r = m.mat_vec(&x, &z1).unwrap();
        assert_eq!(r, m.basis_state(&[1]).unwrap());

        let rxx = m.two_site_rotation(Pauli::X, FRAC_PI_2, 0, 1, 2).unwrap();
        let r = m.mat_vec(&rxx, &s).unwrap();
        let h = FRAC_1_SQRT_2;
        assert!(close(m.amplitude(&r, 0).unwrap(), Complex::new(h, 0.0)));
        assert!(close(m.amplitude(&r, 3).unwrap(), Complex::new(0.0, -h)));
        assert_eq!(m.amplitude(&r, 1).unwrap(), ZERO);
        assert!(m.mat_vec(&x, &s).is_err());
    }

    #[test]
    fn matmat_examples() {
        let mut m = Manager::default();
        let x = m.single_site_op(&Pauli::X.matrix(), 1, 3).unwrap();
        let id = m.identity_op(3).unwrap();
        assert_eq!(m.mat_mat(&id, &x).unwrap(), x);
        assert_eq!(m.mat_mat(&x, &x).unwrap(), id);
    }

    #[test]
    fn inner_products_and_expectations() {
        let mut m = Manager::default();
        let a = m.zero_state(4).unwrap();
        let b = m.basis_state(&[1, 1, 1, 1]).unwrap();
        assert!(close(m.inner_product(&a, &a).unwrap(), ONE));
        assert_eq!(m.inner_product(&a, &b).unwrap(), ZERO);

        let z = m.zero_state(1).unwrap();
        let sz = m.observable(&ObservableSpec::Sz(0), 1).unwrap();
        assert!((m.expectation(&z, &sz).unwrap() - 1.0).abs() < 1e-12);

        let g = m.ghz_state(2).unwrap();
        let xx = m.observable(&ObservableSpec::SxSx(0, 1), 2).unwrap();
        assert!((m.expectation(&g, &xx).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn non_hermitian_operand_is_reported() {
        let mut m = Manager::default();
        let i = Complex::new(0.0, 1.0);
        let op = m.single_site_op(&[[i, ZERO], [ZERO, i]], 0, 1).unwrap();
        let z = m.zero_state(1).unwrap();
        let err = m.expectation(&z, &op).unwrap_err();
        assert!(err.is_numeric_contract());
    }
}
