mod common;

use common::{max_diff, max_diff_up_to_phase, random_amps, random_gate};
use hamdd::operator::rz_matrix;
use hamdd::oracle::DenseState;
use hamdd::{Complex, Gate, Manager, ObservableSpec, OperatorDD, Pauli};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

type Dense = Vec<Vec<Complex>>;

fn c(re: f64, im: f64) -> Complex {
    Complex::new(re, im)
}

fn matmul(a: &Dense, b: &Dense) -> Dense {
    let n = a.len();
    (0..n).map(|i| (0..n).map(|j| (0..n).map(|k| a[i][k] * b[k][j]).sum()).collect()).collect()
}

fn adjoint(a: &Dense) -> Dense {
    let n = a.len();
    (0..n).map(|i| (0..n).map(|j| a[j][i].conj()).collect()).collect()
}

fn max_entry_diff(a: &Dense, b: &Dense) -> f64 {
    a.iter().flatten().zip(b.iter().flatten()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

fn identity(n: usize) -> Dense {
    (0..n).map(|i| (0..n).map(|j| c(if i == j { 1.0 } else { 0.0 }, 0.0)).collect()).collect()
}

fn gate_dense(gate: &Gate, sites: usize) -> Dense {
    let n = 1 << sites;
    let mut cols = Vec::with_capacity(n);
    for j in 0..n {
        let mut psi = DenseState::basis(sites, j).unwrap();
        psi.apply_gate(gate).unwrap();
        cols.push(psi.amps);
    }
    (0..n).map(|i| (0..n).map(|j| cols[j][i]).collect()).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn inner_product_is_linear(seed in any::<u64>(), l in 1usize..=8) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut m = Manager::default();
        let a = m.from_amplitudes(&random_amps(&mut rng, l, 4)).unwrap();
        let b = m.from_amplitudes(&random_amps(&mut rng, l, 4)).unwrap();
        let cc = m.from_amplitudes(&random_amps(&mut rng, l, 4)).unwrap();
        let bc = m.add_states(&b, &cc).unwrap();
        let lhs = m.inner_product(&a, &bc).unwrap();
        let rhs = m.inner_product(&a, &b).unwrap() + m.inner_product(&a, &cc).unwrap();
        prop_assert!((lhs - rhs).norm() < 1e-10);
    }

    #[test]
    fn gates_preserve_the_norm(seed in any::<u64>(), l in 2usize..=8) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut m = Manager::default();
        let mut s = m.from_amplitudes(&random_amps(&mut rng, l, 3)).unwrap();
        for _ in 0..6 {
            let g = random_gate(&mut rng, l);
            let u = m.gate_op(&g, l).unwrap();
            s = m.mat_vec(&u, &s).unwrap();
            prop_assert!((m.norm(&s) - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn gate_bound_holds(seed in any::<u64>(), l in 2usize..=128) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut m = Manager::default();
        let g = random_gate(&mut rng, l);
        let u = m.gate_op(&g, l).unwrap();
        prop_assert!(m.node_count(u.root) <= 1 + 4 * (l - 1));
    }

    #[test]
    fn gates_match_dense_matrices(seed in any::<u64>(), l in 2usize..=5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut m = Manager::default();
        let g = random_gate(&mut rng, l);
        let u = m.gate_op(&g, l).unwrap();
        let got = m.operator_to_dense(&u).unwrap();
        prop_assert!(max_entry_diff(&got, &gate_dense(&g, l)) < 1e-12);
        let uu = matmul(&adjoint(&got), &got);
        prop_assert!(max_entry_diff(&uu, &identity(1 << l)) < 1e-10);
    }
}

#[test]
fn kron_factorizes() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut m = Manager::default();
    let va = random_amps(&mut rng, 2, 0);
    let vb = random_amps(&mut rng, 2, 0);
    let a = m.from_amplitudes(&va).unwrap();
    let b = m.from_amplitudes(&vb).unwrap();
    let k = m.kron_states(&a, &b);
    assert_eq!(k.sites, 4);
    let want: Vec<Complex> = va.iter().flat_map(|x| vb.iter().map(move |y| x * y)).collect();
    assert!(max_diff(&m.state_to_dense(&k).unwrap(), &want) < 1e-12);

    let z = m.basis_state(&[0]).unwrap();
    let o = m.basis_state(&[1]).unwrap();
    let zo = m.kron_states(&z, &o);
    assert_eq!(zo, m.basis_state(&[0, 1]).unwrap());

    let x = m.pauli_string(&[(0, Pauli::X)], 1).unwrap();
    let zz = m.pauli_string(&[(0, Pauli::Z)], 1).unwrap();
    let xz = m.kron_operators(&x, &zz);
    let direct = m.pauli_string(&[(1, Pauli::X), (0, Pauli::Z)], 2).unwrap();
    assert_eq!(xz, direct);
}

#[test]
fn add_and_inner_match_dense() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let mut m = Manager::default();
    for _ in 0..20 {
        let va = random_amps(&mut rng, 6, 4);
        let vb = random_amps(&mut rng, 6, 4);
        let a = m.from_amplitudes(&va).unwrap();
        let b = m.from_amplitudes(&vb).unwrap();
        let s = m.add_states(&a, &b).unwrap();
        let want: Vec<Complex> = va.iter().zip(&vb).map(|(x, y)| x + y).collect();
        assert!(max_diff(&m.state_to_dense(&s).unwrap(), &want) < 1e-11);
        let ip = m.inner_product(&a, &b).unwrap();
        let dense: Complex = va.iter().zip(&vb).map(|(x, y)| x.conj() * y).sum();
        assert!((ip - dense).norm() < 1e-11);
    }
    let a = m.zero_state(4).unwrap();
    let zero = hamdd::StateDD { root: hamdd::VecEdge::ZERO, sites: 4 };
    assert_eq!(m.add_states(&a, &zero).unwrap(), a);
    let b = m.basis_state(&[1; 4]).unwrap();
    assert_eq!(m.inner_product(&a, &a).unwrap(), c(1.0, 0.0));
    assert_eq!(m.inner_product(&a, &b).unwrap(), c(0.0, 0.0));
}

#[test]
fn mat_vec_basics() {
    let mut m = Manager::default();
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let psi = m.from_amplitudes(&random_amps(&mut rng, 5, 0)).unwrap();
    let id = m.identity_op(5).unwrap();
    assert_eq!(m.mat_vec(&id, &psi).unwrap(), psi);

    let x = m.pauli_string(&[(0, Pauli::X)], 1).unwrap();
    let zero = m.basis_state(&[0]).unwrap();
    assert_eq!(m.mat_vec(&x, &zero).unwrap(), m.basis_state(&[1]).unwrap());

    let rxx = m.gate_op(&Gate::rxx(std::f64::consts::FRAC_PI_2, 0, 1), 2).unwrap();
    let zz = m.zero_state(2).unwrap();
    let out = m.mat_vec(&rxx, &zz).unwrap();
    let out = m.state_to_dense(&out).unwrap();
    let h = 0.5f64.sqrt();
    assert!(max_diff(&out, &[c(h, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, -h)]) < 1e-12);

    assert!(m.mat_vec(&rxx, &psi).is_err());
}

#[test]
fn mat_mat_identities() {
    let mut m = Manager::default();
    let x = m.pauli_string(&[(2, Pauli::X)], 4).unwrap();
    let id = m.identity_op(4).unwrap();
    assert_eq!(m.mat_mat(&x, &x).unwrap(), id);
    let v = m.gate_op(&Gate::ryy(0.7, 3, 0), 4).unwrap();
    assert_eq!(m.mat_mat(&id, &v).unwrap(), v);
}

#[test]
fn rz_composes_up_to_phase() {
    let mut m = Manager::default();
    for (a, b) in [(0.3, 1.1), (-2.0, 5.0), (3.0, 3.5)] {
        let ra = m.single_site_op(&rz_matrix(a), 1, 3).unwrap();
        let rb = m.single_site_op(&rz_matrix(b), 1, 3).unwrap();
        let rab = m.single_site_op(&rz_matrix(a + b), 1, 3).unwrap();
        let prod = m.mat_mat(&ra, &rb).unwrap();
        let got: Vec<Complex> = m.operator_to_dense(&prod).unwrap().into_iter().flatten().collect();
        let want: Vec<Complex> = m.operator_to_dense(&rab).unwrap().into_iter().flatten().collect();
        assert!(max_diff_up_to_phase(&want, &got) < 1e-12);
    }
}

#[test]
fn rzz_matches_dense() {
    let mut m = Manager::default();
    for (a, b, l) in [(0, 1, 2), (0, 3, 4), (4, 1, 6)] {
        let g = Gate::rzz(1.234, a, b);
        let u = m.gate_op(&g, l).unwrap();
        assert!(max_entry_diff(&m.operator_to_dense(&u).unwrap(), &gate_dense(&g, l)) < 1e-12);
    }
}

#[test]
fn two_site_example_diagram() {
    let mut m = Manager::default();
    let u = m.gate_op(&Gate::rxx(std::f64::consts::FRAC_PI_2, 0, 1), 2).unwrap();
    assert_eq!(m.node_count(u.root), 3);
    assert!((m.weight(u.root.weight) - c(0.5f64.sqrt(), 0.0)).norm() < 1e-12);
    let top = m.matrix_successors(u.root.node);
    let ws: Vec<Complex> = top.iter().map(|e| m.weight(e.weight)).collect();
    let want = [c(1.0, 0.0), c(0.0, -1.0), c(0.0, -1.0), c(1.0, 0.0)];
    assert!(max_diff(&ws, &want) < 1e-12);
}

#[test]
fn expectation_values() {
    let mut m = Manager::default();
    let z = m.observable(&ObservableSpec::Sz(0), 1).unwrap();
    let zero = m.zero_state(1).unwrap();
    assert_eq!(m.expectation(&zero, &z).unwrap(), 1.0);

    let xx = m.observable(&ObservableSpec::SxSx(0, 1), 2).unwrap();
    let ghz = m.ghz_state(2).unwrap();
    assert!((m.expectation(&ghz, &xx).unwrap() - 1.0).abs() < 1e-12);

    let y = m.pauli_string(&[(0, Pauli::Y)], 1).unwrap();
    let x = m.pauli_string(&[(0, Pauli::X)], 1).unwrap();
    let xy: OperatorDD = m.mat_mat(&x, &y).unwrap();
    let err = m.expectation(&zero, &xy).unwrap_err();
    assert!(err.is_numeric_contract());
}
