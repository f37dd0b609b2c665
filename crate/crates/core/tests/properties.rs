use std::f64::consts::PI;

use proptest::prelude::*;

use witnesslab::algebra::{
    block_layout, classical_state, is_classical_state, random_algebra_element, BipartiteAlgebra, ClassicalStateWeights,
};
use witnesslab::linalg::{
    anticommutator, commutator, expectation, hermitian_eigensystem, partial_trace_a, partial_trace_b,
    partial_transpose, tensor, tensor_vec, ComplexMatrix, HermitianOperator, C64,
};
use witnesslab::states::{chi_state, random_density, random_pure_product, random_separable};
use witnesslab::verify::{check_entanglement_witness, see_saw_minimize, EwOptions};
use witnesslab::witnesses::{
    avr_asymmetric, avr_symmetric, bell_chsh, qubit_qw, qubit_qw_condition, random_dichotomic_settings,
    shifted_swap_factors, swap_operator, QubitQWParams, ShiftedSwapParams, Sign,
};

fn matrix(d: usize) -> impl Strategy<Value = ComplexMatrix> {
    prop::collection::vec(-1.0f64..1.0, 2 * d * d).prop_map(move |v| {
        let data = v.chunks(2).map(|c| C64::new(c[0], c[1])).collect();
        ComplexMatrix::from_vec(d, data).unwrap()
    })
}

fn hermitian(d: usize) -> impl Strategy<Value = HermitianOperator> {
    matrix(d).prop_map(|m| HermitianOperator::new((&m + &m.adjoint()).scale_real(0.5)).unwrap())
}

fn sized_hermitian() -> impl Strategy<Value = HermitianOperator> {
    (1usize..=6).prop_flat_map(hermitian)
}

fn bloch() -> impl Strategy<Value = [f64; 3]> {
    (0.0f64..=1.0, 0.0f64..PI, 0.0f64..(2.0 * PI))
        .prop_map(|(r, t, p)| [r * t.sin() * p.cos(), r * t.sin() * p.sin(), r * t.cos()])
}

fn algebra() -> impl Strategy<Value = BipartiteAlgebra> {
    (prop::collection::vec(1usize..=2, 1..=2), prop::collection::vec(1usize..=2, 1..=2))
        .prop_map(|(a, b)| BipartiteAlgebra::new(a, b).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn tensor_is_associative(a in matrix(2), b in matrix(2), c in matrix(3)) {
        let left = tensor(&tensor(&a, &b), &c);
        let right = tensor(&a, &tensor(&b, &c));
        prop_assert!(left.distance(&right) < 1e-14);
    }

    #[test]
    fn tensor_is_bilinear(a in matrix(2), a2 in matrix(2), b in matrix(3), s in -2.0f64..2.0) {
        let lhs = tensor(&(&a + &a2.scale_real(s)), &b);
        let rhs = &tensor(&a, &b) + &tensor(&a2, &b).scale_real(s);
        prop_assert!(lhs.distance(&rhs) < 1e-13);
    }

    #[test]
    fn tensor_mixed_product(a in matrix(2), b in matrix(2), c in matrix(2), e in matrix(2)) {
        let lhs = tensor(&a, &b).matmul(&tensor(&c, &e)).unwrap();
        let rhs = tensor(&a.matmul(&c).unwrap(), &b.matmul(&e).unwrap());
        prop_assert!(lhs.distance(&rhs) < 1e-13);
    }

    #[test]
    fn anticommutator_of_hermitians_is_hermitian(x in hermitian(4), y in hermitian(4)) {
        let anti = anticommutator(x.matrix(), y.matrix()).unwrap();
        prop_assert!(anti.hermiticity_deviation() < 1e-14);
        let comm = commutator(x.matrix(), y.matrix()).unwrap();
        prop_assert!((&comm + &comm.adjoint()).max_abs() < 1e-14);
    }

    #[test]
    fn eigensystem_reconstructs(h in sized_hermitian()) {
        let es = hermitian_eigensystem(&h);
        let scale = h.matrix().frobenius_norm().max(1.0);
        prop_assert!(es.reconstruct().distance(h.matrix()) < 1e-10 * scale);
        prop_assert!(es.values.windows(2).all(|w| w[0] <= w[1]));
        for (i, v) in es.vectors.iter().enumerate() {
            for (j, w) in es.vectors.iter().enumerate() {
                let ip = witnesslab::linalg::inner(v, w);
                let want = if i == j { 1.0 } else { 0.0 };
                prop_assert!((ip - C64::new(want, 0.0)).norm() < 1e-10);
            }
        }
        let trace: f64 = es.values.iter().sum();
        prop_assert!((trace - h.matrix().trace().re).abs() < 1e-10 * scale);
    }

    #[test]
    fn expectation_is_linear(x in hermitian(3), y in hermitian(3), s in -3.0f64..3.0, seed in any::<u64>()) {
        let rho = random_density(3, seed).unwrap();
        let sum = HermitianOperator::new(x.matrix() + &y.matrix().scale_real(s)).unwrap();
        let lhs = expectation(&rho, &sum).unwrap();
        let rhs = expectation(&rho, &x).unwrap() + s * expectation(&rho, &y).unwrap();
        prop_assert!((lhs - rhs).abs() < 1e-12);
    }

    #[test]
    fn expectation_bounded_by_spectrum(h in hermitian(4), seed in any::<u64>()) {
        let rho = random_density(4, seed).unwrap();
        let v = expectation(&rho, &h).unwrap();
        let es = hermitian_eigensystem(&h);
        prop_assert!(v >= es.values[0] - 1e-10 && v <= es.values[3] + 1e-10);
    }

    #[test]
    fn partial_operations(a in matrix(2), b in matrix(3)) {
        let ab = tensor(&a, &b);
        prop_assert!(partial_transpose(&partial_transpose(&ab, 2, 3).unwrap(), 2, 3).unwrap().distance(&ab) < 1e-15);
        prop_assert!(partial_transpose(&ab, 2, 3).unwrap().distance(&tensor(&a, &b.transpose())) < 1e-15);
        let tb = partial_trace_b(&ab, 2, 3).unwrap();
        prop_assert!(tb.distance(&a.scale(b.trace())) < 1e-13);
        let ta = partial_trace_a(&ab, 2, 3).unwrap();
        prop_assert!(ta.distance(&b.scale(a.trace())) < 1e-13);
    }

    #[test]
    fn separable_states_are_ppt(seed in any::<u64>(), n in 1usize..6) {
        let (rho, dec) = random_separable(2, 3, n, seed).unwrap();
        prop_assert!((dec.total_weight() - 1.0).abs() < 1e-12);
        prop_assert!(dec.to_density().matrix().distance(rho.matrix()) < 1e-12);
        let pt = HermitianOperator::new(partial_transpose(rho.matrix(), 2, 3).unwrap()).unwrap();
        prop_assert!(pt.min_eigenvalue() > -1e-12);
    }

    #[test]
    fn swap_exchanges_factors(a in prop::collection::vec(-1.0f64..1.0, 6), b in prop::collection::vec(-1.0f64..1.0, 6)) {
        let va: Vec<C64> = a.chunks(2).map(|c| C64::new(c[0], c[1])).collect();
        let vb: Vec<C64> = b.chunks(2).map(|c| C64::new(c[0], c[1])).collect();
        let s = swap_operator(3).unwrap();
        let swapped = s.matrix().apply(&tensor_vec(&va, &vb));
        let want = tensor_vec(&vb, &va);
        for (x, y) in swapped.iter().zip(&want) {
            prop_assert!((x - y).norm() < 1e-15);
        }
    }

    #[test]
    fn swap_is_an_ew_on_products(seed in any::<u64>(), d in 2usize..=3) {
        let (rho, _) = random_pure_product(d, d, seed).unwrap();
        prop_assert!(expectation(&rho, &swap_operator(d).unwrap()).unwrap() >= -1e-12);
    }

    #[test]
    fn chi_detection_dichotomy(t in 0.0f64..(2.0 * PI), phase in 0.0f64..(2.0 * PI)) {
        let a = C64::new(t.cos(), 0.0);
        let b = C64::from_polar(t.sin(), phase);
        let re_ab = (a.conj() * b).re;
        prop_assume!(re_ab.abs() > 1e-8);
        let v = expectation(&chi_state(a, b).unwrap(), &swap_operator(2).unwrap()).unwrap();
        prop_assert_eq!(v < 0.0, re_ab < 0.0);
    }

    #[test]
    fn classical_states_see_positive_anticommutators(
        alg in algebra(),
        raw in prop::collection::vec(0.01f64..1.0, 4),
        sx in any::<u64>(),
        sy in any::<u64>(),
    ) {
        let layout = block_layout(&alg);
        let total: f64 = raw[..layout.len()].iter().sum();
        let mut p = vec![vec![0.0; alg.blocks_b().len()]; alg.blocks_a().len()];
        for (slot, w) in layout.iter().zip(&raw) {
            p[slot.k][slot.l] = w / total;
        }
        let rho = classical_state(&alg, &ClassicalStateWeights { p }).unwrap();
        prop_assert!(is_classical_state(&rho, &alg).unwrap());
        let x = random_algebra_element(&alg, sx, true);
        let y = random_algebra_element(&alg, sy, true);
        let q = HermitianOperator::new(anticommutator(x.matrix(), y.matrix()).unwrap()).unwrap();
        prop_assert!(expectation(&rho, &q).unwrap() >= -1e-9);
    }

    #[test]
    fn commutative_algebras_have_positive_anticommutators(
        a in prop::collection::vec(Just(1usize), 1..=3),
        b in prop::collection::vec(Just(1usize), 1..=3),
        sx in any::<u64>(),
        sy in any::<u64>(),
    ) {
        let alg = BipartiteAlgebra::new(a, b).unwrap();
        let x = random_algebra_element(&alg, sx, true);
        let y = random_algebra_element(&alg, sy, true);
        let anti = anticommutator(x.matrix(), y.matrix()).unwrap();
        prop_assert!(commutator(x.matrix(), y.matrix()).unwrap().max_abs() < 1e-12);
        prop_assert!(HermitianOperator::new(anti).unwrap().min_eigenvalue() >= -1e-9);
    }

    #[test]
    fn qubit_closed_form(alpha in 0.1f64..3.0, beta in 0.1f64..3.0, u in bloch(), v in bloch()) {
        let p = QubitQWParams::new(alpha, beta, u, v).unwrap();
        let w = qubit_qw(&p);
        let es = hermitian_eigensystem(&w.q);
        prop_assert!((es.values[0] - w.lambda_minus).abs() < 1e-10);
        prop_assert!((es.values[1] - w.lambda_plus).abs() < 1e-10);
        prop_assert!(w.x.min_eigenvalue() >= -1e-12 && w.y.min_eigenvalue() >= -1e-12);
        if w.lambda_minus < 0.0 {
            let r = w.lambda_minus / w.lambda_plus;
            prop_assert!(r > -1.0 && r < 0.0);
        }
    }

    #[test]
    fn qubit_condition_matches_sign(u in 0.0f64..=1.0, v in 0.0f64..=1.0, theta in 0.0f64..=PI) {
        let p = QubitQWParams::from_lengths(1.0, 1.0, u, v, theta).unwrap();
        let (_, lm) = p.eigenvalues();
        prop_assume!(lm.abs() > 1e-8);
        prop_assert_eq!(qubit_qw_condition(u, v, theta), lm < 0.0);
    }

    #[test]
    fn avr_identities_hold(seed in any::<u64>(), da in 1usize..=3, db in 1usize..=3, minus in any::<bool>()) {
        let sign = if minus { Sign::Minus } else { Sign::Plus };
        let s = random_dichotomic_settings(da, db, sign, seed).unwrap();
        let e4 = bell_chsh(&s).matrix().scale_real(4.0);
        let asym = avr_asymmetric(&s).unwrap();
        prop_assert!(asym.q.matrix().distance(&(&e4 - &s.commutator_product())) < 1e-10);
        let sym = avr_symmetric(&s).unwrap();
        prop_assert!(sym.q.matrix().distance(&e4) < 1e-10);
    }

    #[test]
    fn shifted_swap_factors_are_positive(xi in 0.01f64..0.99, phi in 0.0f64..(2.0 * PI), d in 2usize..=4) {
        let f = shifted_swap_factors(&ShiftedSwapParams::new(xi, phi, d).unwrap()).unwrap();
        prop_assert!(f.residual < 1e-10);
        prop_assert!(f.x.min_eigenvalue() >= -1e-9 && f.y.min_eigenvalue() >= -1e-9);
    }

    #[test]
    fn see_saw_never_beats_the_spectrum(h in hermitian(4), seed in any::<u64>()) {
        let m = see_saw_minimize(&h, 2, 2, 4, seed).unwrap();
        prop_assert!(m.value >= h.min_eigenvalue() - 1e-10);
        let direct = expectation(&m.state(), &h).unwrap();
        prop_assert!((direct - m.value).abs() < 1e-10);
    }

    #[test]
    fn matrix_json_round_trip_is_exact(m in matrix(3)) {
        let back: ComplexMatrix = serde_json::from_str(&serde_json::to_string(&m).unwrap()).unwrap();
        prop_assert_eq!(back, m);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn ew_verdicts_are_reproducible(h in hermitian(4), seed in any::<u64>()) {
        let opts = EwOptions { restarts: 4, seed, ..EwOptions::default() };
        match (check_entanglement_witness(&h, 2, 2, &opts), check_entanglement_witness(&h, 2, 2, &opts)) {
            (Ok(a), Ok(b)) => prop_assert_eq!(a, b),
            (Err(a), Err(b)) => prop_assert_eq!(a, b),
            _ => prop_assert!(false, "nondeterministic outcome"),
        }
    }
}
