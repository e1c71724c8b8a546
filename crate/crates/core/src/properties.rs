//! Randomized checks of the state, operator and propagator invariants.

use faer::Mat;
use proptest::prelude::*;

use crate::channel::ContactChannel;
use crate::linalg::C64;
use crate::propagator::{stroke_propagator, UNITARITY_TOL};
use crate::{
    coupled_hamiltonian, exact_propagator, gas_hamiltonian, partial_trace_bath, tensor_product, thermal_state,
    trace_distance, CouplingSpec, DensityOperator, FockBasis, ModeOperator, Modes, Operator, Spectrum, StateTolerance,
    StepRule, StiffnessSchedule, Temperature,
};

fn basis(n: usize) -> FockBasis {
    FockBasis::new(n).unwrap()
}

fn entries(len: usize) -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), len)
}

/// `A A^dagger / tr` from a square matrix of entries.
fn state_from(entries: &[(f64, f64)], dim: usize) -> Mat<C64> {
    let a = Mat::from_fn(dim, dim, |i, j| {
        let (re, im) = entries[i * dim + j];
        C64::new(re, im)
    });
    let m = &a * a.adjoint();
    let tr: f64 = (0..dim).map(|i| m[(i, i)].re).sum();
    Mat::from_fn(dim, dim, |i, j| m[(i, j)] / tr)
}

fn single(entries: &[(f64, f64)], n: usize) -> DensityOperator {
    DensityOperator::new(state_from(entries, n), basis(n), Modes::Single).unwrap()
}

fn loose() -> StateTolerance {
    StateTolerance { hermiticity: 1e-10, trace: 1e-8, negativity: 1e-8 }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn trace_distance_is_a_metric(a in entries(25), b in entries(25), c in entries(25)) {
        let (r, s, t) = (single(&a, 5), single(&b, 5), single(&c, 5));
        let rs = trace_distance(&r, &s).unwrap();
        prop_assert!((rs - trace_distance(&s, &r).unwrap()).abs() < 1e-13);
        prop_assert!(trace_distance(&r, &r).unwrap() < 1e-13);
        prop_assert!((0.0..=1.0 + 1e-12).contains(&rs));
        let via = trace_distance(&r, &t).unwrap() + trace_distance(&t, &s).unwrap();
        prop_assert!(rs <= via + 1e-12);
    }

    #[test]
    fn partial_trace_inverts_product_on_two_levels(a in entries(4), b in entries(4)) {
        let (gas, bath) = (single(&a, 2), single(&b, 2));
        let total = DensityOperator::product(&gas, &bath).unwrap();
        prop_assert!(total.validate(&StateTolerance::default()).is_ok());
        let back = partial_trace_bath(&total).unwrap();
        prop_assert!(trace_distance(&back, &gas).unwrap() < 1e-14);
    }

    // hand-written index arithmetic for a general two-qubit-sized state
    #[test]
    fn partial_trace_matches_index_oracle(a in entries(16)) {
        let m = state_from(&a, 4);
        let total = DensityOperator::new(m.clone(), basis(2), Modes::Pair).unwrap();
        let reduced = partial_trace_bath(&total).unwrap();
        for g in 0..2 {
            for h in 0..2 {
                let want = m[(2 * g, 2 * h)] + m[(2 * g + 1, 2 * h + 1)];
                prop_assert!((reduced.matrix()[(g, h)] - want).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn tensor_product_matches_kronecker_oracle(a in entries(4), b in entries(4)) {
        let op = |e: &[(f64, f64)]| {
            ModeOperator::from_matrix(Mat::from_fn(2, 2, |i, j| C64::new(e[2 * i + j].0, e[2 * i + j].1)), basis(2))
                .unwrap()
        };
        let (x, y) = (op(&a), op(&b));
        let k = tensor_product(&x, &y).unwrap();
        for (g1, b1, g2, b2) in (0..16).map(|i| (i >> 3 & 1, i >> 2 & 1, i >> 1 & 1, i & 1)) {
            let want = x.matrix()[(g1, g2)] * y.matrix()[(b1, b2)];
            prop_assert!((k.matrix()[(2 * g1 + b1, 2 * g2 + b2)] - want).norm() < 1e-15);
        }
    }

    #[test]
    fn exact_propagators_preserve_states(a in entries(64), alpha in 0.0..8.0f64, tau in 0.0..10.0f64) {
        let n = 8;
        let u = exact_propagator(&gas_hamiltonian(basis(n), alpha), tau).unwrap();
        prop_assert!(u.unitarity_defect() <= UNITARITY_TOL);
        let rho = single(&a, n);
        for evolved in [u.evolve(&rho).unwrap(), u.evolve_reversed(&rho).unwrap()] {
            prop_assert!(evolved.validate(&loose()).is_ok());
            prop_assert!((evolved.trace() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn stroke_propagators_are_unitary_and_preserve_states(
        a in entries(64),
        start in 0.0..8.0f64,
        end in 0.0..8.0f64,
        tau in 0.05..3.0f64,
    ) {
        let (n, b) = (8, basis(8));
        let schedule = StiffnessSchedule::new(start, end, tau).unwrap();
        let rule = StepRule::for_schedule(b, &schedule, 5.0).unwrap();
        let (u, _) = stroke_propagator(&schedule, b, &rule).unwrap();
        prop_assert!(u.unitarity_defect() <= UNITARITY_TOL, "{}", u.unitarity_defect());
        let evolved = u.evolve(&single(&a, n)).unwrap();
        prop_assert!(evolved.validate(&loose()).is_ok());
    }

    #[test]
    fn contact_channel_preserves_states(
        a in entries(16),
        alpha in 0.0..8.0f64,
        phi0 in -1.0..1.0f64,
        t_bath in 0.1..5.0f64,
        duration in 0.0..10.0f64,
    ) {
        let b = basis(4);
        let coupling = CouplingSpec::new(phi0, 1.0, 1.0).unwrap();
        let spectrum = Spectrum::new(&coupled_hamiltonian(b, alpha, &coupling).unwrap()).unwrap();
        let bath = thermal_state(&gas_hamiltonian(b, alpha), Temperature::new(t_bath).unwrap()).unwrap();
        let channel = ContactChannel::new(&spectrum, &bath, duration).unwrap();
        prop_assert!(channel.trace_defect() < 1e-12);
        let out = channel.apply(&single(&a, 4)).unwrap();
        prop_assert!(out.validate(&loose()).is_ok());
    }

    #[test]
    fn thermal_states_are_states(alpha in 0.0..8.0f64, t in 0.05..10.0f64) {
        let rho = thermal_state(&gas_hamiltonian(basis(12), alpha), Temperature::new(t).unwrap()).unwrap();
        prop_assert!(rho.validate(&StateTolerance::default()).is_ok());
    }
}
