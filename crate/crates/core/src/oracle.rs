//! Dense statevector reference: gate application, Hamiltonian assembly and
//! exact evolution by Hermitian eigendecomposition.
//!
//! Basis index bit `s` is the value of site `s`, matching the diagrams.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};
use crate::models::{ModelFamily, ModelSpec, TrotterCircuit};
use crate::numerics::Complex;
use crate::operator::{Gate, Matrix2, ObservableSpec, Pauli};

pub const DEFAULT_DENSE_CAP: usize = 12;

const ZERO: Complex = Complex::new(0.0, 0.0);
const ONE: Complex = Complex::new(1.0, 0.0);

pub fn check_cap(sites: usize) -> Result<()> {
    if sites > DEFAULT_DENSE_CAP {
        Err(Error::OverDenseCap { sites, cap: DEFAULT_DENSE_CAP })
    } else {
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DenseState {
    pub amps: Vec<Complex>,
    pub sites: usize,
}

impl DenseState {
    pub fn new(amps: Vec<Complex>) -> Result<Self> {
        let n = amps.len();
        if n < 2 || !n.is_power_of_two() {
            return Err(Error::NotPowerOfTwo(n));
        }
        let sites = n.trailing_zeros() as usize;
        check_cap(sites)?;
        Ok(DenseState { amps, sites })
    }

    pub fn basis(sites: usize, index: usize) -> Result<Self> {
        check_cap(sites)?;
        if sites == 0 {
            return Err(Error::TooFewSites { sites, min: 1 });
        }
        if index >> sites != 0 {
            return Err(Error::IndexOutOfRange { index: index as u64, sites });
        }
        let mut amps = vec![ZERO; 1 << sites];
        amps[index] = ONE;
        Ok(DenseState { amps, sites })
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &DenseState) -> Result<Complex> {
        if self.sites != other.sites {
            return Err(Error::DimensionMismatch { left: self.amps.len(), right: other.amps.len() });
        }
        Ok(self.amps.iter().zip(&other.amps).map(|(a, b)| a.conj() * b).sum())
    }

    /// Largest componentwise distance to another state.
    pub fn max_diff(&self, other: &[Complex]) -> f64 {
        self.amps.iter().zip(other).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }

    /// Apply a 2x2 matrix to one site.
    pub fn apply_local(&mut self, u: &Matrix2, site: usize) {
        let bit = 1usize << site;
        for i in 0..self.amps.len() {
            if i & bit == 0 {
                let (a0, a1) = (self.amps[i], self.amps[i | bit]);
                self.amps[i] = u[0][0] * a0 + u[0][1] * a1;
                self.amps[i | bit] = u[1][0] * a0 + u[1][1] * a1;
            }
        }
    }

    /// `P_string |self>` for a Pauli string.
    pub fn apply_paulis(&self, paulis: &[(usize, Pauli)]) -> DenseState {
        let mut out = vec![ZERO; self.amps.len()];
        for (x, &a) in self.amps.iter().enumerate() {
            let (phase, y) = pauli_image(paulis, x);
            out[y] += phase * a;
        }
        DenseState { amps: out, sites: self.sites }
    }

    pub fn apply_gate(&mut self, gate: &Gate) -> Result<()> {
        gate.validate(self.sites)?;
        match *gate {
            Gate::Rotation2 { axis, theta, sites: [a, b] } => {
                let c = Complex::new((theta / 2.0).cos(), 0.0);
                let s = Complex::new(0.0, -(theta / 2.0).sin());
                let pp = self.apply_paulis(&[(a, axis), (b, axis)]);
                for (x, y) in self.amps.iter_mut().zip(&pp.amps) {
                    *x = c * *x + s * y;
                }
            }
            _ => {
                let u = gate.local_matrix().expect("single-site gate");
                self.apply_local(&u, gate.sites()[0]);
            }
        }
        Ok(())
    }

    /// Expectation of an observable, computed without forming its matrix.
    pub fn observable_expectation(&self, obs: &ObservableSpec) -> Result<f64> {
        obs.validate(self.sites)?;
        let p = self.apply_paulis(&obs.paulis());
        real_part(self.inner(&p)?)
    }
}

fn real_part(v: Complex) -> Result<f64> {
    if v.im.abs() >= crate::algebra::IMAG_RESIDUE_BOUND {
        Err(Error::ImaginaryResidue { real: v.re, imag: v.im })
    } else {
        Ok(v.re)
    }
}

/// Image of basis state `x` under a Pauli string: `P|x> = phase |y>`.
fn pauli_image(paulis: &[(usize, Pauli)], x: usize) -> (Complex, usize) {
    let mut phase = ONE;
    let mut y = x;
    for &(s, p) in paulis {
        let bit = (x >> s) & 1;
        match p {
            Pauli::I => {}
            Pauli::X => y ^= 1 << s,
            Pauli::Y => {
                y ^= 1 << s;
                phase *= if bit == 0 { Complex::new(0.0, 1.0) } else { Complex::new(0.0, -1.0) };
            }
            Pauli::Z => {
                if bit == 1 {
                    phase = -phase;
                }
            }
        }
    }
    (phase, y)
}

#[derive(Debug, Clone, PartialEq)]
pub struct DenseOperator {
    pub matrix: DMatrix<Complex>,
    pub sites: usize,
}

impl DenseOperator {
    pub fn zeros(sites: usize) -> Result<Self> {
        check_cap(sites)?;
        let n = 1 << sites;
        Ok(DenseOperator { matrix: DMatrix::zeros(n, n), sites })
    }

    pub fn from_rows(rows: &[Vec<Complex>]) -> Result<Self> {
        let n = rows.len();
        if n < 2 || !n.is_power_of_two() {
            return Err(Error::NotPowerOfTwo(n));
        }
        if let Some(r) = rows.iter().find(|r| r.len() != n) {
            return Err(Error::DimensionMismatch { left: n, right: r.len() });
        }
        let sites = n.trailing_zeros() as usize;
        check_cap(sites)?;
        Ok(DenseOperator { matrix: DMatrix::from_fn(n, n, |i, j| rows[i][j]), sites })
    }

    /// Add `coeff * P_string`.
    pub fn add_pauli_term(&mut self, coeff: f64, paulis: &[(usize, Pauli)]) {
        for x in 0..self.matrix.ncols() {
            let (phase, y) = pauli_image(paulis, x);
            self.matrix[(y, x)] += phase * coeff;
        }
    }

    /// Largest entry of `H - H^dagger`.
    pub fn hermiticity_defect(&self) -> f64 {
        let d = &self.matrix - self.matrix.adjoint();
        d.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    pub fn apply(&self, psi: &DenseState) -> Result<DenseState> {
        if psi.sites != self.sites {
            return Err(Error::DimensionMismatch { left: self.matrix.ncols(), right: psi.amps.len() });
        }
        let v = DVector::from_column_slice(&psi.amps);
        let r = &self.matrix * v;
        Ok(DenseState { amps: r.as_slice().to_vec(), sites: self.sites })
    }
}

/// Pauli string for an observable as a dense operator.
pub fn dense_observable(obs: &ObservableSpec, sites: usize) -> Result<DenseOperator> {
    obs.validate(sites)?;
    let mut op = DenseOperator::zeros(sites)?;
    op.add_pauli_term(1.0, &obs.paulis());
    Ok(op)
}

/// Hamiltonian of a model: `-J_l P P` on every bond and axis, `-field Z`
/// on every site.
pub fn dense_hamiltonian(model: &ModelSpec) -> Result<DenseOperator> {
    model.validate()?;
    let l = model.sites;
    let mut h = DenseOperator::zeros(l)?;
    let axes: &[Pauli] = match model.family {
        ModelFamily::Heisenberg => &[Pauli::X, Pauli::Y, Pauli::Z],
        _ => &[Pauli::X],
    };
    for b in 0..l - 1 {
        let j = model.bond_coupling(b);
        for &p in axes {
            h.add_pauli_term(-j, &[(b, p), (b + 1, p)]);
        }
    }
    if model.family != ModelFamily::SpinGlass {
        for s in 0..l {
            h.add_pauli_term(-model.field, &[(s, Pauli::Z)]);
        }
    }
    Ok(h)
}

pub fn dense_apply_circuit(psi: &DenseState, c: &TrotterCircuit) -> Result<DenseState> {
    if psi.sites != c.sites {
        return Err(Error::SiteMismatch { left: c.sites, right: psi.sites });
    }
    let mut out = psi.clone();
    for g in &c.gates {
        out.apply_gate(g)?;
    }
    Ok(out)
}

/// `Re <psi|O|psi>`.
pub fn dense_expectation(psi: &DenseState, o: &DenseOperator) -> Result<f64> {
    let o_psi = o.apply(psi)?;
    real_part(psi.inner(&o_psi)?)
}

/// Eigendecomposition of a Hermitian operator, reusable for many times `t`.
#[derive(Debug, Clone)]
pub struct SpectralPropagator {
    eigenvalues: Vec<f64>,
    eigenvectors: DMatrix<Complex>,
    sites: usize,
}

/// Allowed `|H - H^dagger|` entry before an operator counts as non-Hermitian.
const HERMITIAN_SLACK: f64 = 1e-12;

impl SpectralPropagator {
    pub fn new(h: &DenseOperator) -> Result<Self> {
        let defect = h.hermiticity_defect();
        if defect > HERMITIAN_SLACK {
            return Err(Error::NonHermitian(defect));
        }
        let eig = SymmetricEigen::new(h.matrix.clone());
        Ok(SpectralPropagator {
            eigenvalues: eig.eigenvalues.iter().copied().collect(),
            eigenvectors: eig.eigenvectors,
            sites: h.sites,
        })
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// `exp(-i H t) psi0`.
    pub fn evolve(&self, psi0: &DenseState, t: f64) -> Result<DenseState> {
        if psi0.sites != self.sites {
            return Err(Error::SiteMismatch { left: self.sites, right: psi0.sites });
        }
        let v = DVector::from_column_slice(&psi0.amps);
        let mut coeffs = self.eigenvectors.ad_mul(&v);
        for (c, &lambda) in coeffs.iter_mut().zip(&self.eigenvalues) {
            *c *= Complex::from_polar(1.0, -lambda * t);
        }
        let r = &self.eigenvectors * coeffs;
        Ok(DenseState { amps: r.as_slice().to_vec(), sites: self.sites })
    }
}

pub fn dense_exact_evolve(h: &DenseOperator, t: f64, psi0: &DenseState) -> Result<DenseState> {
    SpectralPropagator::new(h)?.evolve(psi0, t)
}
