//! Node storage, unique tables, compute caches and garbage collection.
//!
//! Diagrams are quasi-reduced: every nonzero edge leaving a node at level `k`
//! points to a node at level `k - 1`, and edges leaving level 0 point to the
//! terminal. Zero sub-vectors and sub-matrices are zero stubs (an edge to the
//! terminal with weight [`WeightRef::ZERO`]).
//!
//! Vector and matrix nodes live in separate arenas, so a [`NodeId`] is only
//! meaningful together with the edge type that carries it.

use rustc_hash::{FxHashMap, FxHashSet};

use crate::error::{Error, Result};
use crate::numerics::{Complex, Tolerance, WeightRef, WeightTable};

pub mod dot;

pub const DEFAULT_GC_THRESHOLD: usize = 1 << 20;

/// Compute caches are dropped wholesale once they reach this many entries.
const CACHE_LIMIT: usize = 1 << 18;

const FREE_LEVEL: u32 = u32::MAX;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeId(pub(crate) u32);

impl NodeId {
    pub const TERMINAL: NodeId = NodeId(0);

    #[inline]
    pub fn is_terminal(self) -> bool {
        self.0 == 0
    }

    #[inline]
    pub(crate) fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct VecEdge {
    pub node: NodeId,
    pub weight: WeightRef,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct MatEdge {
    pub node: NodeId,
    pub weight: WeightRef,
}

macro_rules! edge_consts {
    ($t:ty) => {
        impl $t {
            pub const ZERO: Self = Self { node: NodeId::TERMINAL, weight: WeightRef::ZERO };
            pub const ONE: Self = Self { node: NodeId::TERMINAL, weight: WeightRef::ONE };

            #[inline]
            pub fn is_zero(self) -> bool {
                self.weight.is_zero()
            }
        }
    };
}
edge_consts!(VecEdge);
edge_consts!(MatEdge);

/// Root of either kind of diagram, for functions that accept both.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Root {
    Vector(VecEdge),
    Matrix(MatEdge),
}

impl From<VecEdge> for Root {
    fn from(e: VecEdge) -> Self {
        Root::Vector(e)
    }
}

impl From<MatEdge> for Root {
    fn from(e: MatEdge) -> Self {
        Root::Matrix(e)
    }
}

#[derive(Debug, Clone)]
pub(crate) struct VNode {
    pub succ: [VecEdge; 2],
    pub level: u32,
    rc: u32,
}

#[derive(Debug, Clone)]
pub(crate) struct MNode {
    pub succ: [MatEdge; 4],
    pub level: u32,
    rc: u32,
    /// The sub-matrix below this node is exactly the identity.
    pub ident: bool,
}

/// Edge with an unresolved complex weight, used inside recursive operations.
#[derive(Debug, Clone, Copy)]
pub(crate) struct REdge {
    pub node: NodeId,
    pub w: Complex,
}

impl REdge {
    pub const ZERO: REdge = REdge { node: NodeId::TERMINAL, w: Complex::new(0.0, 0.0) };

    #[inline]
    pub fn scaled(self, f: Complex) -> REdge {
        REdge { node: self.node, w: self.w * f }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Config {
    pub tolerance: Tolerance,
    /// Live-node count above which [`Manager::maybe_collect`] runs a collection.
    pub gc_threshold: usize,
    /// Enables the compute caches. Results are identical either way.
    pub caching: bool,
}

impl Default for Config {
    fn default() -> Self {
        Config { tolerance: Tolerance::default(), gc_threshold: DEFAULT_GC_THRESHOLD, caching: true }
    }
}

#[derive(Debug, Default, Clone, Copy, PartialEq, Eq)]
pub struct GcStats {
    pub vector_nodes_freed: usize,
    pub matrix_nodes_freed: usize,
    pub weights_freed: usize,
}

#[derive(Debug, Default)]
pub(crate) struct Caches {
    pub add_v: FxHashMap<(NodeId, NodeId, WeightRef), REdge>,
    pub add_m: FxHashMap<(NodeId, NodeId, WeightRef), REdge>,
    pub mat_vec: FxHashMap<(NodeId, NodeId), REdge>,
    pub mat_mat: FxHashMap<(NodeId, NodeId), REdge>,
    pub inner: FxHashMap<(NodeId, NodeId), Complex>,
}

impl Caches {
    fn clear(&mut self) {
        self.add_v.clear();
        self.add_m.clear();
        self.mat_vec.clear();
        self.mat_mat.clear();
        self.inner.clear();
    }
}

/// Insert into a compute cache, dropping its contents first when full.
#[inline]
pub(crate) fn cache_put<K: std::hash::Hash + Eq, V>(map: &mut FxHashMap<K, V>, k: K, v: V) {
    if map.len() >= CACHE_LIMIT {
        map.clear();
    }
    map.insert(k, v);
}

/// Simulation context owning every node, weight and cache.
#[derive(Debug)]
pub struct Manager {
    pub(crate) config: Config,
    pub(crate) weights: WeightTable,
    pub(crate) vnodes: Vec<VNode>,
    pub(crate) mnodes: Vec<MNode>,
    vfree: Vec<u32>,
    mfree: Vec<u32>,
    vtables: Vec<FxHashMap<[VecEdge; 2], NodeId>>,
    mtables: Vec<FxHashMap<[MatEdge; 4], NodeId>>,
    pub(crate) caches: Caches,
    /// `identities[k]` is the identity on `k + 1` sites.
    identities: Vec<MatEdge>,
}

impl Default for Manager {
    fn default() -> Self {
        Self::new(Config::default())
    }
}

impl Manager {
    pub fn new(config: Config) -> Self {
        let vterm = VNode { succ: [VecEdge::ZERO; 2], level: FREE_LEVEL, rc: 0 };
        let mterm = MNode { succ: [MatEdge::ZERO; 4], level: FREE_LEVEL, rc: 0, ident: false };
        Manager {
            config,
            weights: WeightTable::new(config.tolerance),
            vnodes: vec![vterm],
            mnodes: vec![mterm],
            vfree: Vec::new(),
            mfree: Vec::new(),
            vtables: Vec::new(),
            mtables: Vec::new(),
            caches: Caches::default(),
            identities: Vec::new(),
        }
    }

    pub fn config(&self) -> &Config {
        &self.config
    }

    #[inline]
    pub fn tolerance(&self) -> Tolerance {
        self.config.tolerance
    }

    pub fn weights(&self) -> &WeightTable {
        &self.weights
    }

    #[inline]
    pub fn weight(&self, w: WeightRef) -> Complex {
        self.weights.value(w)
    }

    pub fn canonical_weight(&mut self, c: Complex) -> Result<WeightRef> {
        self.weights.canonical(c)
    }

    /// Level of the node an edge points to, `None` for the terminal.
    pub fn vector_level(&self, e: VecEdge) -> Option<u32> {
        (!e.node.is_terminal()).then(|| self.vnodes[e.node.index()].level)
    }

    pub fn matrix_level(&self, e: MatEdge) -> Option<u32> {
        (!e.node.is_terminal()).then(|| self.mnodes[e.node.index()].level)
    }

    pub fn vector_successors(&self, node: NodeId) -> [VecEdge; 2] {
        self.vnodes[node.index()].succ
    }

    pub fn matrix_successors(&self, node: NodeId) -> [MatEdge; 4] {
        self.mnodes[node.index()].succ
    }

    pub fn is_identity(&self, e: MatEdge) -> bool {
        e.weight.is_one() && !e.node.is_terminal() && self.mnodes[e.node.index()].ident
    }

    // ---- normalization ----------------------------------------------------

    /// Normalize a pair of vector successors. Returns the factor pulled out
    /// and the normalized successors, whose squared magnitudes sum to one and
    /// whose leftmost nonzero weight is real and non-negative.
    pub fn normalize_vector(&mut self, e0: VecEdge, e1: VecEdge) -> Result<(WeightRef, VecEdge, VecEdge)> {
        let raw = [self.raw_v(e0), self.raw_v(e1)];
        let (common, succ) = self.normalize_v(raw).ok_or(Error::DegenerateNode)?;
        let c = self.weights.intern(common);
        Ok((c, succ[0], succ[1]))
    }

    /// Normalize four matrix successors by the leftmost weight of maximum
    /// magnitude, which becomes exactly ONE.
    pub fn normalize_matrix(&mut self, e: [MatEdge; 4]) -> Result<(WeightRef, [MatEdge; 4])> {
        let raw = e.map(|x| REdge { node: x.node, w: self.weights.value(x.weight) });
        let (common, succ) = self.normalize_m(raw).ok_or(Error::DegenerateNode)?;
        let c = self.weights.intern(common);
        Ok((c, succ))
    }

    fn raw_v(&self, e: VecEdge) -> REdge {
        REdge { node: e.node, w: self.weights.value(e.weight) }
    }

    fn normalize_v(&mut self, e: [REdge; 2]) -> Option<(Complex, [VecEdge; 2])> {
        let tol = self.config.tolerance;
        if tol.is_zero(e[0].w) && tol.is_zero(e[1].w) {
            return None;
        }
        let norm = (e[0].w.norm_sqr() + e[1].w.norm_sqr()).sqrt();
        let n = [e[0].w / norm, e[1].w / norm];
        let lead = usize::from(tol.is_zero(n[0]));
        let phase = n[lead] / n[lead].norm();
        let unphase = phase.conj();
        let mut succ = [VecEdge::ZERO; 2];
        for k in 0..2 {
            if tol.is_zero(n[k]) {
                continue;
            }
            let v = if k == lead { Complex::new(n[k].norm(), 0.0) } else { n[k] * unphase };
            let w = self.weights.intern(v);
            if !w.is_zero() {
                succ[k] = VecEdge { node: e[k].node, weight: w };
            }
        }
        Some((phase * norm, succ))
    }

    fn normalize_m(&mut self, e: [REdge; 4]) -> Option<(Complex, [MatEdge; 4])> {
        let tol = self.config.tolerance;
        if e.iter().all(|x| tol.is_zero(x.w)) {
            return None;
        }
        let mags = e.map(|x| x.w.norm());
        let max = mags.iter().copied().fold(0.0, f64::max);
        let cut = max * (1.0 - tol.eps());
        let lead = mags.iter().position(|&m| m >= cut).unwrap_or(0);
        let d = e[lead].w;
        let mut succ = [MatEdge::ZERO; 4];
        for k in 0..4 {
            if k == lead {
                succ[k] = MatEdge { node: e[k].node, weight: WeightRef::ONE };
                continue;
            }
            let q = e[k].w / d;
            if tol.is_zero(q) {
                continue;
            }
            let w = self.weights.intern(q);
            if !w.is_zero() {
                succ[k] = MatEdge { node: e[k].node, weight: w };
            }
        }
        Some((d, succ))
    }

    // ---- unique tables ----------------------------------------------------

    /// Canonical vector node for already-normalized successors.
    pub fn lookup_or_insert_vector(&mut self, level: u32, succ: [VecEdge; 2]) -> NodeId {
        debug_assert!(succ.iter().any(|e| !e.is_zero()), "all-zero vector node");
        let lvl = level as usize;
        if self.vtables.len() <= lvl {
            self.vtables.resize_with(lvl + 1, FxHashMap::default);
        }
        if let Some(&id) = self.vtables[lvl].get(&succ) {
            return id;
        }
        let node = VNode { succ, level, rc: 0 };
        let id = match self.vfree.pop() {
            Some(i) => {
                self.vnodes[i as usize] = node;
                NodeId(i)
            }
            None => {
                self.vnodes.push(node);
                NodeId((self.vnodes.len() - 1) as u32)
            }
        };
        self.vtables[lvl].insert(succ, id);
        id
    }

    /// Canonical matrix node for already-normalized successors.
    pub fn lookup_or_insert_matrix(&mut self, level: u32, succ: [MatEdge; 4]) -> NodeId {
        debug_assert!(succ.iter().any(|e| !e.is_zero()), "all-zero matrix node");
        let lvl = level as usize;
        if self.mtables.len() <= lvl {
            self.mtables.resize_with(lvl + 1, FxHashMap::default);
        }
        if let Some(&id) = self.mtables[lvl].get(&succ) {
            return id;
        }
        let ident = succ[0] == succ[3]
            && succ[0].weight.is_one()
            && succ[1].is_zero()
            && succ[2].is_zero()
            && (succ[0].node.is_terminal() || self.mnodes[succ[0].node.index()].ident);
        let node = MNode { succ, level, rc: 0, ident };
        let id = match self.mfree.pop() {
            Some(i) => {
                self.mnodes[i as usize] = node;
                NodeId(i)
            }
            None => {
                self.mnodes.push(node);
                NodeId((self.mnodes.len() - 1) as u32)
            }
        };
        self.mtables[lvl].insert(succ, id);
        id
    }

    /// Normalize and hash-cons a vector node.
    pub(crate) fn make_vnode(&mut self, level: u32, e: [REdge; 2]) -> REdge {
        match self.normalize_v(e) {
            None => REdge::ZERO,
            Some((common, succ)) => {
                let node = self.lookup_or_insert_vector(level, succ);
                REdge { node, w: common }
            }
        }
    }

    /// Normalize and hash-cons a matrix node.
    pub(crate) fn make_mnode(&mut self, level: u32, e: [REdge; 4]) -> REdge {
        match self.normalize_m(e) {
            None => REdge::ZERO,
            Some((common, succ)) => {
                let node = self.lookup_or_insert_matrix(level, succ);
                REdge { node, w: common }
            }
        }
    }

    /// Build a vector node from unnormalized successor edges.
    pub fn make_vector_node(&mut self, level: u32, succ: [VecEdge; 2]) -> VecEdge {
        let raw = succ.map(|e| self.raw_v(e));
        let r = self.make_vnode(level, raw);
        self.finish_v(r)
    }

    /// Build a matrix node from unnormalized successor edges.
    pub fn make_matrix_node(&mut self, level: u32, succ: [MatEdge; 4]) -> MatEdge {
        let raw = succ.map(|e| REdge { node: e.node, w: self.weights.value(e.weight) });
        let r = self.make_mnode(level, raw);
        self.finish_m(r)
    }

    /// Canonicalize the weight of a raw vector edge.
    pub(crate) fn finish_v(&mut self, r: REdge) -> VecEdge {
        let w = self.weights.intern(r.w);
        if w.is_zero() {
            VecEdge::ZERO
        } else {
            VecEdge { node: r.node, weight: w }
        }
    }

    pub(crate) fn finish_m(&mut self, r: REdge) -> MatEdge {
        let w = self.weights.intern(r.w);
        if w.is_zero() {
            MatEdge::ZERO
        } else {
            MatEdge { node: r.node, weight: w }
        }
    }

    #[inline]
    pub(crate) fn vsucc_raw(&self, node: NodeId) -> [REdge; 2] {
        let n = &self.vnodes[node.index()];
        [
            REdge { node: n.succ[0].node, w: self.weights.value(n.succ[0].weight) },
            REdge { node: n.succ[1].node, w: self.weights.value(n.succ[1].weight) },
        ]
    }

    #[inline]
    pub(crate) fn msucc_raw(&self, node: NodeId) -> [REdge; 4] {
        let n = &self.mnodes[node.index()];
        n.succ.map(|e| REdge { node: e.node, w: self.weights.value(e.weight) })
    }

    // ---- identities -------------------------------------------------------

    /// Identity operator on `sites` sites. Cached and permanently retained.
    pub fn identity(&mut self, sites: usize) -> MatEdge {
        if sites == 0 {
            return MatEdge::ONE;
        }
        while self.identities.len() < sites {
            let level = self.identities.len() as u32;
            let below = self.identities.last().copied().unwrap_or(MatEdge::ONE);
            let child = MatEdge { node: below.node, weight: WeightRef::ONE };
            let node = self.lookup_or_insert_matrix(level, [child, MatEdge::ZERO, MatEdge::ZERO, child]);
            let e = MatEdge { node, weight: WeightRef::ONE };
            self.retain(e);
            self.identities.push(e);
        }
        self.identities[sites - 1]
    }

    // ---- reference counting and collection ---------------------------------

    /// Protect a root edge (and everything below it) from collection.
    pub fn retain(&mut self, root: impl Into<Root>) {
        match root.into() {
            Root::Vector(e) => {
                self.weights.pin(e.weight);
                self.inc_v(e.node);
            }
            Root::Matrix(e) => {
                self.weights.pin(e.weight);
                self.inc_m(e.node);
            }
        }
    }

    /// Undo one [`retain`](Self::retain).
    pub fn release(&mut self, root: impl Into<Root>) {
        match root.into() {
            Root::Vector(e) => {
                self.weights.unpin(e.weight);
                self.dec_v(e.node);
            }
            Root::Matrix(e) => {
                self.weights.unpin(e.weight);
                self.dec_m(e.node);
            }
        }
    }

    fn inc_v(&mut self, id: NodeId) {
        let mut stack = vec![id];
        while let Some(id) = stack.pop() {
            if id.is_terminal() {
                continue;
            }
            let n = &mut self.vnodes[id.index()];
            n.rc += 1;
            if n.rc == 1 {
                stack.extend(n.succ.iter().map(|e| e.node));
            }
        }
    }

    fn dec_v(&mut self, id: NodeId) {
        let mut stack = vec![id];
        while let Some(id) = stack.pop() {
            if id.is_terminal() {
                continue;
            }
            let n = &mut self.vnodes[id.index()];
            debug_assert!(n.rc > 0, "releasing unreferenced vector node");
            n.rc -= 1;
            if n.rc == 0 {
                stack.extend(n.succ.iter().map(|e| e.node));
            }
        }
    }

    fn inc_m(&mut self, id: NodeId) {
        let mut stack = vec![id];
        while let Some(id) = stack.pop() {
            if id.is_terminal() {
                continue;
            }
            let n = &mut self.mnodes[id.index()];
            n.rc += 1;
            if n.rc == 1 {
                stack.extend(n.succ.iter().map(|e| e.node));
            }
        }
    }

    fn dec_m(&mut self, id: NodeId) {
        let mut stack = vec![id];
        while let Some(id) = stack.pop() {
            if id.is_terminal() {
                continue;
            }
            let n = &mut self.mnodes[id.index()];
            debug_assert!(n.rc > 0, "releasing unreferenced matrix node");
            n.rc -= 1;
            if n.rc == 0 {
                stack.extend(n.succ.iter().map(|e| e.node));
            }
        }
    }

    /// Number of nodes currently stored (live or awaiting collection).
    pub fn stored_nodes(&self) -> usize {
        (self.vnodes.len() - 1 - self.vfree.len()) + (self.mnodes.len() - 1 - self.mfree.len())
    }

    pub fn stored_vector_nodes(&self) -> usize {
        self.vnodes.len() - 1 - self.vfree.len()
    }

    pub fn stored_matrix_nodes(&self) -> usize {
        self.mnodes.len() - 1 - self.mfree.len()
    }

    /// Free every node not reachable from a retained root, drop unused
    /// weights and clear the compute caches. Unretained edges held by the
    /// caller are invalid afterwards.
    pub fn garbage_collect(&mut self) -> GcStats {
        let mut stats = GcStats::default();
        self.caches.clear();

        for table in &mut self.vtables {
            let vnodes = &self.vnodes;
            table.retain(|_, id| vnodes[id.index()].rc > 0);
        }
        for i in 1..self.vnodes.len() {
            let n = &mut self.vnodes[i];
            if n.level != FREE_LEVEL && n.rc == 0 {
                n.level = FREE_LEVEL;
                self.vfree.push(i as u32);
                stats.vector_nodes_freed += 1;
            }
        }
        for table in &mut self.mtables {
            let mnodes = &self.mnodes;
            table.retain(|_, id| mnodes[id.index()].rc > 0);
        }
        for i in 1..self.mnodes.len() {
            let n = &mut self.mnodes[i];
            if n.level != FREE_LEVEL && n.rc == 0 {
                n.level = FREE_LEVEL;
                self.mfree.push(i as u32);
                stats.matrix_nodes_freed += 1;
            }
        }

        let mut used = vec![false; self.weights.capacity()];
        for n in self.vnodes.iter().skip(1).filter(|n| n.level != FREE_LEVEL) {
            for e in &n.succ {
                used[e.weight.index()] = true;
            }
        }
        for n in self.mnodes.iter().skip(1).filter(|n| n.level != FREE_LEVEL) {
            for e in &n.succ {
                used[e.weight.index()] = true;
            }
        }
        stats.weights_freed = self.weights.sweep(&used);
        stats
    }

    /// Collect when the stored node count exceeds the configured threshold.
    pub fn maybe_collect(&mut self) -> Option<GcStats> {
        (self.stored_nodes() > self.config.gc_threshold).then(|| self.garbage_collect())
    }

    pub fn clear_caches(&mut self) {
        self.caches.clear();
    }

    // ---- inspection -------------------------------------------------------

    /// Number of distinct decision nodes reachable from a root, excluding
    /// the terminal.
    pub fn node_count(&self, root: impl Into<Root>) -> usize {
        match root.into() {
            Root::Vector(e) => self.reachable_vector(e).len(),
            Root::Matrix(e) => self.reachable_matrix(e).len(),
        }
    }

    /// Reachable vector nodes in depth-first preorder.
    pub(crate) fn reachable_vector(&self, e: VecEdge) -> Vec<NodeId> {
        let mut seen = FxHashSet::default();
        let mut order = Vec::new();
        let mut stack = vec![e.node];
        while let Some(id) = stack.pop() {
            if id.is_terminal() || !seen.insert(id) {
                continue;
            }
            order.push(id);
            let s = &self.vnodes[id.index()].succ;
            stack.extend(s.iter().rev().filter(|e| !e.is_zero()).map(|e| e.node));
        }
        order
    }

    pub(crate) fn reachable_matrix(&self, e: MatEdge) -> Vec<NodeId> {
        let mut seen = FxHashSet::default();
        let mut order = Vec::new();
        let mut stack = vec![e.node];
        while let Some(id) = stack.pop() {
            if id.is_terminal() || !seen.insert(id) {
                continue;
            }
            order.push(id);
            let s = &self.mnodes[id.index()].succ;
            stack.extend(s.iter().rev().filter(|e| !e.is_zero()).map(|e| e.node));
        }
        order
    }

    /// Scan every stored node and report the first violated structural
    /// invariant: canonicity, level ordering, or normalization.
    pub fn check_invariants(&self) -> std::result::Result<(), String> {
        let tol = self.config.tolerance;
        for (lvl, table) in self.vtables.iter().enumerate() {
            for (succ, id) in table {
                let n = &self.vnodes[id.index()];
                if n.succ != *succ || n.level as usize != lvl {
                    return Err(format!("vector table entry {id:?} disagrees with node"));
                }
            }
        }
        for (lvl, table) in self.mtables.iter().enumerate() {
            for (succ, id) in table {
                let n = &self.mnodes[id.index()];
                if n.succ != *succ || n.level as usize != lvl {
                    return Err(format!("matrix table entry {id:?} disagrees with node"));
                }
            }
        }
        let mut seen_v = FxHashSet::default();
        for (i, n) in self.vnodes.iter().enumerate().skip(1) {
            if n.level == FREE_LEVEL {
                continue;
            }
            if !seen_v.insert((n.level, n.succ)) {
                return Err(format!("duplicate vector node {i}"));
            }
            if self.vtables[n.level as usize].get(&n.succ) != Some(&NodeId(i as u32)) {
                return Err(format!("vector node {i} missing from unique table"));
            }
            let mut sum = 0.0;
            for e in &n.succ {
                sum += self.weights.abs2(e.weight);
                self.check_child_level(e.node, e.weight, n.level, true)?;
            }
            if (sum - 1.0).abs() > 4.0 * tol.eps() {
                return Err(format!("vector node {i} not normalized: {sum}"));
            }
            let lead = n.succ.iter().find(|e| !e.is_zero()).map(|e| self.weights.value(e.weight));
            match lead {
                Some(c) if c.im.abs() <= tol.eps() && c.re >= 0.0 => {}
                _ => return Err(format!("vector node {i} leading weight not real non-negative")),
            }
        }
        let mut seen_m = FxHashSet::default();
        for (i, n) in self.mnodes.iter().enumerate().skip(1) {
            if n.level == FREE_LEVEL {
                continue;
            }
            if !seen_m.insert((n.level, n.succ)) {
                return Err(format!("duplicate matrix node {i}"));
            }
            if self.mtables[n.level as usize].get(&n.succ) != Some(&NodeId(i as u32)) {
                return Err(format!("matrix node {i} missing from unique table"));
            }
            let mags: Vec<f64> = n.succ.iter().map(|e| self.weights.value(e.weight).norm()).collect();
            let lead = n.succ.iter().position(|e| e.weight.is_one());
            let Some(lead) = lead else {
                return Err(format!("matrix node {i} has no ONE weight"));
            };
            if mags[..lead].iter().any(|&m| m >= 1.0 - tol.eps()) {
                return Err(format!("matrix node {i} ONE is not the leftmost maximum"));
            }
            if mags.iter().any(|&m| m > 1.0 + tol.eps()) {
                return Err(format!("matrix node {i} has a weight above magnitude one"));
            }
            for e in &n.succ {
                self.check_child_level(e.node, e.weight, n.level, false)?;
            }
        }
        Ok(())
    }

    fn check_child_level(&self, child: NodeId, w: WeightRef, level: u32, vector: bool) -> std::result::Result<(), String> {
        if w.is_zero() {
            return if child.is_terminal() { Ok(()) } else { Err("zero stub not pointing to terminal".into()) };
        }
        let child_level = if child.is_terminal() {
            None
        } else if vector {
            Some(self.vnodes[child.index()].level)
        } else {
            Some(self.mnodes[child.index()].level)
        };
        let ok = match child_level {
            None => level == 0,
            Some(l) => l + 1 == level,
        };
        if ok {
            Ok(())
        } else {
            Err(format!("edge from level {level} skips to {child_level:?}"))
        }
    }
}
