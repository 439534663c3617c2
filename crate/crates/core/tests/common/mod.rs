#![allow(dead_code)]

use hamdd::models::ModelFamily;
use hamdd::{Complex, Gate, ModelSpec, TrotterCircuit};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Normalized random amplitudes; roughly one entry in `1/zero_rate` is
/// exactly zero so that zero stubs and sharing get exercised.
pub fn random_amps(rng: &mut ChaCha8Rng, sites: usize, zero_rate: u32) -> Vec<Complex> {
    let n = 1usize << sites;
    let mut v: Vec<Complex> = (0..n)
        .map(|_| {
            if zero_rate > 0 && rng.gen_ratio(1, zero_rate) {
                Complex::new(0.0, 0.0)
            } else {
                Complex::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
            }
        })
        .collect();
    if v.iter().all(|a| a.norm_sqr() == 0.0) {
        v[0] = Complex::new(1.0, 0.0);
    }
    let norm = v.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    v.iter_mut().for_each(|a| *a /= norm);
    v
}

pub fn max_diff(a: &[Complex], b: &[Complex]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

/// Max difference after aligning `b`'s global phase to `a`.
pub fn max_diff_up_to_phase(a: &[Complex], b: &[Complex]) -> f64 {
    let overlap: Complex = a.iter().zip(b).map(|(x, y)| y.conj() * x).sum();
    let phase = if overlap.norm() > 0.0 { overlap / overlap.norm() } else { Complex::new(1.0, 0.0) };
    let b: Vec<Complex> = b.iter().map(|y| y * phase).collect();
    max_diff(a, &b)
}

/// A random circuit built from whole Trotter steps of a random model.
pub fn random_trotter_circuit(rng: &mut ChaCha8Rng, max_sites: usize, max_steps: usize) -> (ModelSpec, TrotterCircuit, usize) {
    let sites = rng.gen_range(2..=max_sites);
    let family = [ModelFamily::Ising, ModelFamily::Heisenberg, ModelFamily::SpinGlass][rng.gen_range(0..3)];
    let model = match family {
        ModelFamily::Ising => ModelSpec::ising(sites, rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)),
        ModelFamily::Heisenberg => ModelSpec::heisenberg(sites, rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)),
        ModelFamily::SpinGlass => ModelSpec::spin_glass(sites, rng.gen()).unwrap(),
    };
    let dt = rng.gen_range(0.01..0.5);
    let steps = rng.gen_range(1..=max_steps);
    let circuit = hamdd::models::trotter_step_circuit(&model, dt).unwrap();
    (model, circuit, steps)
}

/// Random gate on random sites, including long-range pairs.
pub fn random_gate(rng: &mut ChaCha8Rng, sites: usize) -> Gate {
    let theta = rng.gen_range(-7.0..7.0);
    let a = rng.gen_range(0..sites);
    match rng.gen_range(0..4) {
        0 => Gate::rz(theta, a),
        k => {
            let mut b = rng.gen_range(0..sites - 1);
            if b >= a {
                b += 1;
            }
            match k {
                1 => Gate::rxx(theta, a, b),
                2 => Gate::ryy(theta, a, b),
                _ => Gate::rzz(theta, a, b),
            }
        }
    }
}
