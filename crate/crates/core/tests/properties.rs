use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;

use ncval_qrf::grid::{build_translation_unitary, classical_translation, position_operator, GridBasis};
use ncval_qrf::ncvalue::{factor_rank, ncvalue_of, reexpress, star, state_factor_rank, uncertainty, FACTOR_TOL};
use ncval_qrf::qubit::{build_qubit_qrf_unitary, initial_layout, pushforward_table};
use ncval_qrf::report::{Check, ScenarioReport};
use ncval_qrf::statekit::{apply, make_state, tensor_states, BasisLayout, Factor, Operator, Role};
use ncval_qrf::C64;

fn complex() -> impl Strategy<Value = C64> {
    (-1.0..1.0f64, -1.0..1.0f64).prop_map(|(re, im)| C64::new(re, im))
}

fn vector(d: usize) -> impl Strategy<Value = Vec<C64>> {
    prop::collection::vec(complex(), d).prop_filter("nonzero", |v| v.iter().map(|z| z.norm_sqr()).sum::<f64>() > 1e-3)
}

fn hermitian(d: usize) -> impl Strategy<Value = DMatrix<C64>> {
    prop::collection::vec(complex(), d * d).prop_map(move |e| {
        let g = DMatrix::from_vec(d, d, e);
        (&g + g.adjoint()) * C64::new(0.5, 0.0)
    })
}

fn layout(frame: Role, d: usize) -> BasisLayout {
    BasisLayout::new(vec![Factor::frame(frame), Factor::indexed(Role::Generic, d)]).unwrap()
}

fn dim_and<T: std::fmt::Debug, S: Strategy<Value = T>>(f: impl Fn(usize) -> S) -> impl Strategy<Value = (usize, T)> {
    (2usize..=8).prop_flat_map(move |d| (Just(d), f(d)))
}

fn max_dev(a: &[C64], b: &[C64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn normalization_yields_unit_norm((d, v) in dim_and(vector)) {
        let s = make_state(layout(Role::A, d), DVector::from_vec(v), true).unwrap();
        prop_assert!((s.norm_sqr() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn tensor_is_outer_product(a in vector(2), b in vector(3)) {
        let la = BasisLayout::new(vec![Factor::frame(Role::A), Factor::indexed(Role::B, 2)]).unwrap();
        let lb = BasisLayout::new(vec![Factor::frame(Role::A), Factor::indexed(Role::C, 3)]).unwrap();
        let sa = make_state(la, DVector::from_vec(a), true).unwrap();
        let sb = make_state(lb, DVector::from_vec(b), true).unwrap();
        let t = tensor_states(&sa, &sb).unwrap();
        for i in 0..2 {
            for j in 0..3 {
                let want = sa.amplitudes()[i] * sb.amplitudes()[j];
                prop_assert!((t.amplitudes()[i * 3 + j] - want).norm() < 1e-15);
            }
        }
        prop_assert_eq!(state_factor_rank(&t, FACTOR_TOL).unwrap(), 1);
    }

    #[test]
    fn star_matches_product_expectation((d, (b, g, v)) in dim_and(|d| (hermitian(d), hermitian(d), vector(d)))) {
        let l = layout(Role::A, d);
        let s = make_state(l.clone(), DVector::from_vec(v), true).unwrap();
        let vb = ncvalue_of(&Operator::dense(l.clone(), b.clone()).unwrap(), &s).unwrap();
        let vg = ncvalue_of(&Operator::dense(l, g.clone()).unwrap(), &s).unwrap();
        let z = s.amplitudes();
        let direct = (z.adjoint() * (&b * &g) * z)[(0, 0)];
        prop_assert!((star(&vb, &vg, &s).unwrap().f - direct).norm() < 1e-10);
    }

    #[test]
    fn variance_is_v_norm((d, (b, v)) in dim_and(|d| (hermitian(d), vector(d)))) {
        let l = layout(Role::A, d);
        let s = make_state(l.clone(), DVector::from_vec(v), true).unwrap();
        let val = ncvalue_of(&Operator::dense(l, b.clone()).unwrap(), &s).unwrap();
        let z = s.amplitudes();
        let f2 = (z.adjoint() * (&b * &b) * z)[(0, 0)].re;
        prop_assert!((uncertainty(&val) - (f2 - val.f.re * val.f.re)).abs() < 1e-10);
        prop_assert!(val.f.im.abs() < 1e-12);
    }

    #[test]
    fn eigenvectors_have_zero_v((d, (b, pick)) in dim_and(|d| (hermitian(d), 0..d))) {
        let l = layout(Role::A, d);
        let e = b.clone().symmetric_eigen().eigenvectors.column(pick).into_owned();
        let s = make_state(l.clone(), e, true).unwrap();
        let val = ncvalue_of(&Operator::dense(l, b).unwrap(), &s).unwrap();
        prop_assert!(val.v.iter().all(|x| x.norm() < 1e-10));
    }

    #[test]
    fn expectation_survives_any_basis_change((d, (b, v, g)) in dim_and(|d| (hermitian(d), vector(d), prop::collection::vec(complex(), d * d)))) {
        let (l, l2) = (layout(Role::A, d), layout(Role::B, d));
        let u = DMatrix::from_vec(d, d, g).qr().q();
        let s = make_state(l.clone(), DVector::from_vec(v), true).unwrap();
        let uop = Operator::dense_map(l.clone(), l2.clone(), u.clone()).unwrap();
        let val = ncvalue_of(&Operator::dense(l, b.clone()).unwrap(), &s).unwrap();
        let re = reexpress(&val, &uop).unwrap();
        let moved = apply(&uop, &s).unwrap();
        let direct = ncvalue_of(&Operator::dense(l2, &u * &b * u.adjoint()).unwrap(), &moved).unwrap();
        prop_assert!(re.max_diff(&direct).unwrap() < 1e-10);
        prop_assert!((uncertainty(&re) - uncertainty(&val)).abs() < 1e-10);
    }

    #[test]
    fn product_states_have_rank_one(a in vector(3), b in vector(4)) {
        let data: Vec<C64> = a.iter().flat_map(|x| b.iter().map(move |y| x * y)).collect();
        prop_assert_eq!(factor_rank(&data, 3, 4, FACTOR_TOL).unwrap(), 1);
    }

    #[test]
    fn qubit_frame_change_preserves_values(v in vector(4), k in 0usize..6) {
        let l = initial_layout();
        let u = build_qubit_qrf_unitary(&l).unwrap();
        let s = make_state(l.clone(), DVector::from_vec(v), true).unwrap();
        let fin = apply(&u, &s).unwrap();
        let p = &pushforward_table(&l).unwrap()[k];
        let before = ncvalue_of(&p.source, &s).unwrap();
        let after = ncvalue_of(&p.image, &fin).unwrap();
        let back = reexpress(&after, &u.adjoint()).unwrap();
        prop_assert!(back.max_diff(&before).unwrap() < 1e-12);
        prop_assert!(max_dev(apply(&u.adjoint(), &fin).unwrap().amplitudes().as_slice(), s.amplitudes().as_slice()) < 1e-15);
    }

    #[test]
    fn translation_is_a_permutation(half in 1usize..6) {
        let g = GridBasis::new(2 * half, 1.0).unwrap();
        let u = build_translation_unitary(&g, &g.initial_layout()).unwrap();
        let mut p: Vec<usize> = u.as_permutation().unwrap().to_vec();
        p.sort_unstable();
        prop_assert_eq!(p, (0..4 * half * half).collect::<Vec<_>>());
    }

    #[test]
    fn labels_round_trip(half in 1usize..40, pick in 0usize..80, h in 0.1..3.0f64) {
        let g = GridBasis::new(2 * half, h).unwrap();
        let j = pick % (2 * half);
        prop_assert_eq!(g.index_of(g.label(j)).unwrap(), j);
    }

    #[test]
    fn classical_shift_moves_mean(shift in -6i64..=6, amps in prop::collection::vec(complex(), 5)) {
        // packet on sites 14..19 of a 32-site lattice never reaches the edge
        let g = GridBasis::new(32, 0.5).unwrap();
        let l = BasisLayout::new(vec![Factor::frame(Role::A), g.factor(Role::B)]).unwrap();
        let mut psi = vec![C64::new(0.0, 0.0); 32];
        psi[14..19].copy_from_slice(&amps);
        prop_assume!(psi.iter().map(|z| z.norm_sqr()).sum::<f64>() > 1e-3);
        let s = make_state(l.clone(), DVector::from_vec(psi), true).unwrap();
        let a = shift as f64 * g.h();
        let x = position_operator(&g, Role::B, &l).unwrap();
        let moved = apply(&classical_translation(&g, a, Role::B, &l).unwrap(), &s).unwrap();
        let (v0, v1) = (ncvalue_of(&x, &s).unwrap(), ncvalue_of(&x, &moved).unwrap());
        prop_assert!((v1.f.re - (v0.f.re - a)).abs() < 1e-10);
        prop_assert!((uncertainty(&v1) - uncertainty(&v0)).abs() < 1e-10);
    }

    #[test]
    fn report_json_round_trips(errs in prop::collection::vec(0.0..1.0f64, 0..6)) {
        let mut r: ScenarioReport = serde_json::from_str(&sample_report_json()).unwrap();
        r.checks = errs.iter().enumerate().map(|(i, e)| Check::new(format!("c{i}"), *e, 0.5)).collect();
        let back: ScenarioReport = serde_json::from_str(&r.to_json()).unwrap();
        prop_assert_eq!(&back, &r);
        prop_assert_eq!(r.to_csv_summary().lines().count(), errs.len() + 1);
    }
}

fn sample_report_json() -> String {
    let sc = ncval_qrf::qubit::QubitScenario::new(ncval_qrf::qubit::QubitCase::C, 0.8, 0.3, 0.0).unwrap();
    ncval_qrf::qubit::run_qubit_case(&sc).unwrap().to_json()
}
