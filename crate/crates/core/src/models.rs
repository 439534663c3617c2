//! Spin-chain Hamiltonians, first-order Trotter circuits and time evolution.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;

use crate::dd::{Manager, NodeId, REdge};
use crate::numerics::Complex;
use crate::error::{Error, Result};
use crate::operator::{Gate, ObservableSpec, OperatorDD, Pauli};
use crate::state::StateDD;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ModelFamily {
    /// `H = -J sum X X - g sum Z`
    Ising,
    /// `H = -J sum (X X + Y Y + Z Z) - h sum Z`
    Heisenberg,
    /// `H = -sum J_l X X` with Gaussian bond couplings.
    SpinGlass,
}

impl fmt::Display for ModelFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ModelFamily::Ising => "ising",
            ModelFamily::Heisenberg => "heisenberg",
            ModelFamily::SpinGlass => "spinglass",
        })
    }
}

impl FromStr for ModelFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "ising" => Ok(ModelFamily::Ising),
            "heisenberg" | "xxx" => Ok(ModelFamily::Heisenberg),
            "spinglass" | "spin-glass" | "spin_glass" => Ok(ModelFamily::SpinGlass),
            _ => Err(Error::Parse { what: "model family", input: s.to_string() }),
        }
    }
}

/// An open chain Hamiltonian. `field` is `g` for Ising and `h` for
/// Heisenberg; the spin glass ignores `coupling` and `field` and uses `bonds`.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelSpec {
    pub family: ModelFamily,
    pub sites: usize,
    pub coupling: f64,
    pub field: f64,
    pub bonds: Vec<f64>,
    pub seed: u64,
}

/// `sites - 1` couplings drawn from N(0, 1) by a ChaCha20 stream seeded
/// with `seed` (ziggurat sampling).
pub fn build_gaussian_bonds(sites: usize, seed: u64) -> Result<Vec<f64>> {
    if sites < 2 {
        return Err(Error::TooFewSites { sites, min: 2 });
    }
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    Ok((0..sites - 1).map(|_| rng.sample::<f64, _>(StandardNormal)).collect())
}

impl ModelSpec {
    pub fn ising(sites: usize, coupling: f64, field: f64) -> Self {
        ModelSpec { family: ModelFamily::Ising, sites, coupling, field, bonds: Vec::new(), seed: 0 }
    }

    pub fn heisenberg(sites: usize, coupling: f64, field: f64) -> Self {
        ModelSpec { family: ModelFamily::Heisenberg, sites, coupling, field, bonds: Vec::new(), seed: 0 }
    }

    pub fn spin_glass(sites: usize, seed: u64) -> Result<Self> {
        let bonds = build_gaussian_bonds(sites, seed)?;
        Ok(ModelSpec { family: ModelFamily::SpinGlass, sites, coupling: 0.0, field: 0.0, bonds, seed })
    }

    pub fn validate(&self) -> Result<()> {
        if self.sites < 2 {
            return Err(Error::TooFewSites { sites: self.sites, min: 2 });
        }
        if !(self.coupling.is_finite() && self.field.is_finite()) {
            return Err(Error::InvalidModel("coupling and field must be finite".into()));
        }
        if self.family == ModelFamily::SpinGlass {
            if self.bonds.len() != self.sites - 1 {
                return Err(Error::InvalidModel(format!(
                    "spin glass on {} sites needs {} bonds, got {}",
                    self.sites,
                    self.sites - 1,
                    self.bonds.len()
                )));
            }
            if self.bonds.iter().any(|b| !b.is_finite()) {
                return Err(Error::InvalidModel("bond couplings must be finite".into()));
            }
        }
        Ok(())
    }

    /// Coupling on bond `(l, l + 1)`.
    pub fn bond_coupling(&self, l: usize) -> f64 {
        match self.family {
            ModelFamily::SpinGlass => self.bonds[l],
            _ => self.coupling,
        }
    }

    /// Whether all Hamiltonian terms commute, making one Trotter step exact.
    pub fn terms_commute(&self) -> bool {
        match self.family {
            ModelFamily::SpinGlass => true,
            ModelFamily::Ising => self.field == 0.0 || self.coupling == 0.0,
            ModelFamily::Heisenberg => (self.sites == 2 && self.field == 0.0) || self.coupling == 0.0,
        }
    }

    /// Site in the middle of the chain, `floor((L - 1) / 2)`.
    pub fn center_site(&self) -> usize {
        (self.sites - 1) / 2
    }
}

/// One first-order Trotter step as an ordered gate list.
#[derive(Debug, Clone, PartialEq)]
pub struct TrotterCircuit {
    pub gates: Vec<Gate>,
    pub dt: f64,
    pub sites: usize,
}

fn bond_layer(gates: &mut Vec<Gate>, sites: usize, parity: usize, mut gate: impl FnMut(usize) -> Gate) {
    for l in (parity..sites - 1).step_by(2) {
        gates.push(gate(l));
    }
}

fn push_two_site_layers(gates: &mut Vec<Gate>, sites: usize, axis: Pauli, theta: impl Fn(usize) -> f64) {
    for parity in [0, 1] {
        bond_layer(gates, sites, parity, |l| Gate::Rotation2 { axis, theta: theta(l), sites: [l, l + 1] });
    }
}

/// Circuit with raw rotation angles: `theta_two` on every bond term and
/// `theta_single` on every field term. Used for redundancy landscapes.
pub fn circuit_from_angles(family: ModelFamily, sites: usize, theta_single: f64, theta_two: f64) -> Result<TrotterCircuit> {
    if sites < 2 {
        return Err(Error::TooFewSites { sites, min: 2 });
    }
    let mut gates = Vec::new();
    let axes: &[Pauli] = match family {
        ModelFamily::Ising => &[Pauli::X],
        ModelFamily::Heisenberg => &[Pauli::X, Pauli::Y, Pauli::Z],
        ModelFamily::SpinGlass => {
            return Err(Error::InvalidModel("the spin glass has no single-site angle".into()));
        }
    };
    for &axis in axes {
        push_two_site_layers(&mut gates, sites, axis, |_| theta_two);
    }
    gates.extend((0..sites).map(|s| Gate::rz(theta_single, s)));
    Ok(TrotterCircuit { gates, dt: f64::NAN, sites })
}

/// `U(dt)`: two-site layers on even bonds then odd bonds, then the field
/// layer. Rotation angles are `-2 J dt` and `-2 g dt` (or `-2 h dt`).
pub fn trotter_step_circuit(model: &ModelSpec, dt: f64) -> Result<TrotterCircuit> {
    model.validate()?;
    if !dt.is_finite() {
        return Err(Error::InvalidPlan(format!("time step must be finite, got {dt}")));
    }
    let sites = model.sites;
    let mut gates = Vec::new();
    match model.family {
        ModelFamily::Ising | ModelFamily::Heisenberg => {
            let axes: &[Pauli] =
                if model.family == ModelFamily::Ising { &[Pauli::X] } else { &[Pauli::X, Pauli::Y, Pauli::Z] };
            let theta = -2.0 * model.coupling * dt;
            for &axis in axes {
                push_two_site_layers(&mut gates, sites, axis, |_| theta);
            }
            let phi = -2.0 * model.field * dt;
            gates.extend((0..sites).map(|s| Gate::rz(phi, s)));
        }
        ModelFamily::SpinGlass => {
            push_two_site_layers(&mut gates, sites, Pauli::X, |l| -2.0 * model.bonds[l] * dt);
        }
    }
    Ok(TrotterCircuit { gates, dt, sites })
}

/// How a circuit is turned into diagram operations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ApplyStrategy {
    /// One matrix-vector product per gate.
    #[default]
    GateByGate,
    /// Runs of gates on disjoint neighbouring sites are merged into a
    /// single layer operator first.
    Layered,
}

/// Split a gate list into runs whose gates act on disjoint, contiguous
/// site ranges.
fn layers(gates: &[Gate]) -> Vec<&[Gate]> {
    let mut out = Vec::new();
    let mut start = 0;
    let mut used: Vec<usize> = Vec::new();
    for (i, g) in gates.iter().enumerate() {
        let s = g.sites();
        let contiguous = s.len() == 1 || s[0].abs_diff(s[1]) == 1;
        if !contiguous || s.iter().any(|x| used.contains(x)) {
            if i > start {
                out.push(&gates[start..i]);
            }
            start = i;
            used.clear();
        }
        used.extend(s);
        if !contiguous {
            out.push(&gates[i..i + 1]);
            start = i + 1;
            used.clear();
        }
    }
    if start < gates.len() {
        out.push(&gates[start..]);
    }
    out
}

impl Manager {
    /// Product operator of gates acting on disjoint contiguous sites.
    ///
    /// The root weight is a product of one normalization factor per gate and
    /// shrinks geometrically with the number of gates; on long chains it can
    /// drop below the uniquing tolerance and resolve to zero. Circuit
    /// application keeps it unresolved instead.
    pub fn layer_op(&mut self, gates: &[Gate], sites: usize) -> Result<OperatorDD> {
        let r = self.layer_op_raw(gates, sites)?;
        Ok(OperatorDD { root: self.finish_m(r), sites })
    }

    fn layer_op_raw(&mut self, gates: &[Gate], sites: usize) -> Result<REdge> {
        let mut blocks: Vec<(usize, usize, &Gate)> = Vec::with_capacity(gates.len());
        for g in gates {
            g.validate(sites)?;
            let s = g.sites();
            let lo = *s.iter().min().expect("gate has sites");
            let hi = *s.iter().max().expect("gate has sites");
            if hi - lo + 1 != s.len() {
                return Err(Error::InvalidPlan("layer gates must act on contiguous sites".into()));
            }
            blocks.push((lo, hi, g));
        }
        blocks.sort_by_key(|b| b.0);
        if blocks.windows(2).any(|w| w[0].1 >= w[1].0) {
            return Err(Error::InvalidPlan("layer gates overlap".into()));
        }
        let mut acc = REdge { node: NodeId::TERMINAL, w: Complex::new(1.0, 0.0) };
        let mut next = 0;
        for (lo, hi, g) in blocks {
            if lo > next {
                let id = self.identity_op(lo - next)?;
                let id = self.rm(&id);
                acc = self.kron_m_raw(id, acc, next);
            }
            let local = match *g {
                Gate::Rotation2 { axis, theta, .. } => self.two_site_rotation(axis, theta, 0, 1, 2)?,
                _ => self.gate_op(&shift_gate(g, lo), 1)?,
            };
            let local = self.rm(&local);
            acc = self.kron_m_raw(local, acc, lo);
            next = hi + 1;
        }
        if next < sites {
            let id = self.identity_op(sites - next)?;
            let id = self.rm(&id);
            acc = self.kron_m_raw(id, acc, next);
        }
        Ok(acc)
    }

    /// Apply a circuit gate by gate. Intermediate states are released and
    /// collection may run between gates, so any other diagram the caller
    /// keeps must be retained.
    pub fn apply_circuit(&mut self, s: &StateDD, c: &TrotterCircuit) -> Result<StateDD> {
        self.apply_circuit_with(s, c, ApplyStrategy::GateByGate)
    }

    pub fn apply_circuit_with(&mut self, s: &StateDD, c: &TrotterCircuit, strategy: ApplyStrategy) -> Result<StateDD> {
        if c.sites != s.sites {
            return Err(Error::SiteMismatch { left: c.sites, right: s.sites });
        }
        let groups: Vec<&[Gate]> = match strategy {
            ApplyStrategy::GateByGate => c.gates.chunks(1).collect(),
            ApplyStrategy::Layered => layers(&c.gates),
        };
        let mut cur = *s;
        self.retain(cur.root);
        for group in groups {
            let op = if group.len() == 1 {
                let op = self.gate_op(&group[0], s.sites)?;
                self.rm(&op)
            } else {
                self.layer_op_raw(group, s.sites)?
            };
            // Multiply with a unit root weight and fold the scalar in after,
            // so a tiny layer weight never meets the zero test on its own.
            let v = self.rv(&cur);
            let r = self.mat_vec_raw(REdge { node: op.node, w: Complex::new(1.0, 0.0) }, v);
            let next = StateDD { root: self.finish_v(r.scaled(op.w)), sites: s.sites };
            self.retain(next.root);
            self.release(cur.root);
            cur = next;
            self.maybe_collect();
        }
        self.release(cur.root);
        Ok(cur)
    }
}

fn shift_gate(g: &Gate, lo: usize) -> Gate {
    match *g {
        Gate::Rz { theta, site } => Gate::Rz { theta, site: site - lo },
        Gate::Single { matrix, site } => Gate::Single { matrix, site: site - lo },
        Gate::Rotation2 { axis, theta, sites } => Gate::Rotation2 { axis, theta, sites: sites.map(|s| s - lo) },
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EvolutionMode {
    /// Repeated application of `U(dt)`; sample after step `k` is at `t = k dt`.
    #[default]
    Stepwise,
    /// Each sample time `t_k = k dt` gets one Trotter step of size `t_k`
    /// applied to the initial state. Exact only for commuting terms.
    SingleStep,
}

impl fmt::Display for EvolutionMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EvolutionMode::Stepwise => "stepwise",
            EvolutionMode::SingleStep => "single-step",
        })
    }
}

impl FromStr for EvolutionMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "stepwise" => Ok(EvolutionMode::Stepwise),
            "single-step" | "singlestep" | "single_step" => Ok(EvolutionMode::SingleStep),
            _ => Err(Error::Parse { what: "evolution mode", input: s.to_string() }),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvolutionPlan {
    pub model: ModelSpec,
    pub dt: f64,
    pub n_steps: usize,
    pub observables: Vec<ObservableSpec>,
    pub sample_every: usize,
    pub mode: EvolutionMode,
    pub strategy: ApplyStrategy,
}

impl EvolutionPlan {
    pub fn new(model: ModelSpec, dt: f64, n_steps: usize) -> Self {
        EvolutionPlan {
            model,
            dt,
            n_steps,
            observables: Vec::new(),
            sample_every: 1,
            mode: EvolutionMode::Stepwise,
            strategy: ApplyStrategy::Layered,
        }
    }

    pub fn with_observables(mut self, obs: impl IntoIterator<Item = ObservableSpec>) -> Self {
        self.observables = obs.into_iter().collect();
        self
    }

    pub fn with_mode(mut self, mode: EvolutionMode) -> Self {
        self.mode = mode;
        self
    }

    pub fn validate(&self) -> Result<()> {
        self.model.validate()?;
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(Error::InvalidPlan(format!("time step must be positive, got {}", self.dt)));
        }
        if self.sample_every == 0 {
            return Err(Error::InvalidPlan("sample stride must be at least 1".into()));
        }
        for o in &self.observables {
            o.validate(self.model.sites)?;
        }
        Ok(())
    }

    /// Steps at which a sample is recorded, starting with step 0.
    pub fn sample_steps(&self) -> Vec<usize> {
        let mut steps: Vec<usize> = (0..=self.n_steps).step_by(self.sample_every).collect();
        if steps.last() != Some(&self.n_steps) {
            steps.push(self.n_steps);
        }
        steps
    }
}

/// Wall clock for sample timestamps. Reads zero where the platform has no
/// clock (`wasm32-unknown-unknown`).
#[derive(Debug, Clone, Copy)]
struct Stopwatch {
    #[cfg(not(all(target_arch = "wasm32", target_os = "unknown")))]
    start: std::time::Instant,
}

impl Stopwatch {
    fn start() -> Self {
        Stopwatch {
            #[cfg(not(all(target_arch = "wasm32", target_os = "unknown")))]
            start: std::time::Instant::now(),
        }
    }

    fn elapsed_ms(&self) -> f64 {
        #[cfg(not(all(target_arch = "wasm32", target_os = "unknown")))]
        return self.start.elapsed().as_secs_f64() * 1e3;
        #[cfg(all(target_arch = "wasm32", target_os = "unknown"))]
        return 0.0;
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub step: usize,
    pub t: f64,
    pub values: Vec<f64>,
    pub node_count: usize,
    /// Wall time since the evolution started.
    pub wall_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Evolution {
    pub samples: Vec<Sample>,
    pub warnings: Vec<String>,
}

impl Manager {
    /// Run a plan from `psi0`, recording observables and node counts.
    pub fn evolve(&mut self, plan: &EvolutionPlan, psi0: &StateDD) -> Result<Evolution> {
        plan.validate()?;
        if psi0.sites != plan.model.sites {
            return Err(Error::SiteMismatch { left: plan.model.sites, right: psi0.sites });
        }
        let mut out = Evolution::default();
        if plan.mode == EvolutionMode::SingleStep && !plan.model.terms_commute() {
            out.warnings.push(format!(
                "single-step mode on a non-commuting {} model: values carry Trotter error of one step of size t",
                plan.model.family
            ));
        }
        let start = Stopwatch::start();
        let sites = psi0.sites;
        let mut ops = Vec::with_capacity(plan.observables.len());
        for o in &plan.observables {
            let op = self.observable(o, sites)?;
            self.retain(op.root);
            ops.push(op);
        }
        self.retain(psi0.root);
        let result = self.run_plan(plan, psi0, &ops, start, &mut out);
        self.release(psi0.root);
        for op in &ops {
            self.release(op.root);
        }
        result.map(|_| out)
    }

    fn record(&mut self, step: usize, t: f64, s: &StateDD, ops: &[OperatorDD], start: Stopwatch) -> Result<Sample> {
        let mut values = Vec::with_capacity(ops.len());
        for op in ops {
            values.push(self.expectation(s, op)?);
        }
        let node_count = self.node_count(s.root);
        Ok(Sample { step, t, values, node_count, wall_ms: start.elapsed_ms() })
    }

    fn run_plan(
        &mut self,
        plan: &EvolutionPlan,
        psi0: &StateDD,
        ops: &[OperatorDD],
        start: Stopwatch,
        out: &mut Evolution,
    ) -> Result<()> {
        let steps = plan.sample_steps();
        match plan.mode {
            EvolutionMode::Stepwise => {
                let circuit = trotter_step_circuit(&plan.model, plan.dt)?;
                let mut cur = *psi0;
                self.retain(cur.root);
                let mut done = 0;
                let mut run = || -> Result<()> {
                    for &k in &steps {
                        while done < k {
                            let next = self.apply_circuit_with(&cur, &circuit, plan.strategy)?;
                            self.retain(next.root);
                            self.release(cur.root);
                            cur = next;
                            done += 1;
                        }
                        let sample = self.record(k, k as f64 * plan.dt, &cur, ops, start)?;
                        out.samples.push(sample);
                    }
                    Ok(())
                };
                let r = run();
                self.release(cur.root);
                r
            }
            EvolutionMode::SingleStep => {
                for &k in &steps {
                    let t = k as f64 * plan.dt;
                    let s = if k == 0 {
                        *psi0
                    } else {
                        let circuit = trotter_step_circuit(&plan.model, t)?;
                        self.apply_circuit_with(psi0, &circuit, plan.strategy)?
                    };
                    let sample = self.record(k, t, &s, ops, start)?;
                    out.samples.push(sample);
                    self.maybe_collect();
                }
                Ok(())
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ising_gate_order() {
        let c = trotter_step_circuit(&ModelSpec::ising(4, 1.0, 1.0), 0.1).unwrap();
        let sites: Vec<Vec<usize>> = c.gates.iter().map(|g| g.sites()).collect();
        assert_eq!(sites, vec![vec![0, 1], vec![2, 3], vec![1, 2], vec![0], vec![1], vec![2], vec![3]]);
        assert!(matches!(c.gates[0], Gate::Rotation2 { axis: Pauli::X, theta, .. } if (theta + 0.2).abs() < 1e-15));
        assert!(matches!(c.gates[3], Gate::Rz { theta, .. } if (theta + 0.2).abs() < 1e-15));
    }

    #[test]
    fn heisenberg_gate_counts() {
        let c = trotter_step_circuit(&ModelSpec::heisenberg(4, 1.0, 1.0), 0.1).unwrap();
        let two = c.gates.iter().filter(|g| g.sites().len() == 2).count();
        assert_eq!(two, 9);
        assert_eq!(c.gates.len() - two, 4);
    }

    #[test]
    fn bonds_are_deterministic() {
        assert_eq!(build_gaussian_bonds(10, 7).unwrap(), build_gaussian_bonds(10, 7).unwrap());
        assert_ne!(build_gaussian_bonds(10, 7).unwrap(), build_gaussian_bonds(10, 8).unwrap());
        assert_eq!(build_gaussian_bonds(2, 1).unwrap().len(), 1);
        let c = trotter_step_circuit(&ModelSpec::spin_glass(5, 3).unwrap(), 0.1).unwrap();
        assert_eq!(c.gates.len(), 4);
    }

    #[test]
    fn layers_split_on_overlap() {
        let c = trotter_step_circuit(&ModelSpec::ising(5, 1.0, 1.0), 0.1).unwrap();
        let l = layers(&c.gates);
        assert_eq!(l.iter().map(|x| x.len()).collect::<Vec<_>>(), vec![2, 3, 4]);
        let g = [Gate::rxx(0.1, 0, 3), Gate::rz(0.2, 1)];
        assert_eq!(layers(&g).len(), 2);
    }

    #[test]
    fn zero_dt_leaves_state_unchanged() {
        let mut m = Manager::default();
        let s = m.zero_state(4).unwrap();
        let c = trotter_step_circuit(&ModelSpec::heisenberg(4, 1.0, 1.0), 0.0).unwrap();
        assert_eq!(m.apply_circuit(&s, &c).unwrap(), s);
    }

    #[test]
    fn zero_steps_gives_initial_sample() {
        let mut m = Manager::default();
        let s = m.zero_state(3).unwrap();
        let plan = EvolutionPlan::new(ModelSpec::ising(3, 1.0, 1.0), 0.1, 0).with_observables([ObservableSpec::Sz(1)]);
        let ev = m.evolve(&plan, &s).unwrap();
        assert_eq!(ev.samples.len(), 1);
        assert_eq!(ev.samples[0].t, 0.0);
        assert!((ev.samples[0].values[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn single_step_warns_for_non_commuting_terms() {
        let mut m = Manager::default();
        let s = m.zero_state(3).unwrap();
        let plan = EvolutionPlan::new(ModelSpec::ising(3, 1.0, 1.0), 0.1, 2).with_mode(EvolutionMode::SingleStep);
        assert_eq!(m.evolve(&plan, &s).unwrap().warnings.len(), 1);
        let plan = EvolutionPlan::new(ModelSpec::spin_glass(3, 1).unwrap(), 0.1, 2).with_mode(EvolutionMode::SingleStep);
        assert!(m.evolve(&plan, &s).unwrap().warnings.is_empty());
    }

    #[test]
    fn sample_steps_include_last() {
        let mut p = EvolutionPlan::new(ModelSpec::ising(3, 1.0, 1.0), 0.1, 7);
        p.sample_every = 3;
        assert_eq!(p.sample_steps(), vec![0, 3, 6, 7]);
    }

    #[test]
    fn parse_names() {
        assert_eq!("Ising".parse::<ModelFamily>().unwrap(), ModelFamily::Ising);
        assert_eq!("spinglass".parse::<ModelFamily>().unwrap(), ModelFamily::SpinGlass);
        assert!("potts".parse::<ModelFamily>().is_err());
        assert_eq!("single-step".parse::<EvolutionMode>().unwrap(), EvolutionMode::SingleStep);
    }
}
