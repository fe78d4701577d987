mod oracle;

use entbound::ascent::{ub_mixed, AscentConfig};
use entbound::bounds::{lb_ppt_fidelity, lower_bound, BoundOptions, LowerBoundMethod};
use entbound::tensor::{
    fidelity, negativity, partial_trace, partial_transpose, random_density_matrix,
    random_unit_vector, seeded_rng,
};
use entbound::{CMat, DensityMatrix, SubsystemLayout};
use num_complex::Complex64;
use proptest::prelude::*;

fn layout(dims: &[usize]) -> SubsystemLayout {
    SubsystemLayout::new(dims.to_vec()).unwrap()
}

/// A mixture of `terms` random product states on `dims`.
fn separable(dims: &[usize], terms: usize, seed: u64) -> DensityMatrix {
    let mut rng = seeded_rng(seed);
    let weights: Vec<f64> = (0..terms)
        .map(|k| 1.0 + (k as f64 * 0.37).sin().abs())
        .collect();
    let total: f64 = weights.iter().sum();
    let factors: Vec<Vec<_>> = (0..terms)
        .map(|_| {
            dims.iter()
                .map(|&d| random_unit_vector(d, &mut rng))
                .collect()
        })
        .collect();
    let w: Vec<f64> = weights.iter().map(|x| x / total).collect();
    DensityMatrix::new(oracle::product_mixture(&w, &factors), layout(dims)).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 12, ..ProptestConfig::default() })]

    #[test]
    fn separable_mixtures_have_no_entanglement(seed in 0u64..10_000, terms in 1usize..6) {
        let rho = separable(&[2, 3], terms, seed);
        let lb = lb_ppt_fidelity(&rho, 1e-8).unwrap();
        prop_assert!(lb.value <= 1e-6, "lower {}", lb.value);
        let (ub, _) = ub_mixed(&rho, &AscentConfig { restarts: 2, ..AscentConfig::mixed() }.with_seed(seed)).unwrap();
        prop_assert!(ub.value <= 1e-5, "upper {}", ub.value);
    }

    #[test]
    fn ppt_bound_is_exact_for_two_qubits(seed in 0u64..10_000, rank in 1usize..5) {
        let rho = random_density_matrix(&layout(&[2, 2]), rank, seed).unwrap();
        let exact = oracle::two_qubit_geometric(rho.matrix());
        let lb = lb_ppt_fidelity(&rho, 1e-8).unwrap();
        prop_assert!((lb.value - exact).abs() <= 1e-6, "lb {} exact {exact}", lb.value);
    }

    #[test]
    fn stronger_relaxations_never_lose(seed in 0u64..10_000) {
        let rho = random_density_matrix(&layout(&[2, 3]), 3, seed).unwrap();
        let opts = BoundOptions::default();
        let lb1 = lower_bound(&rho, LowerBoundMethod::PptFidelity, &opts).unwrap().value;
        let lb4 = lower_bound(&rho, LowerBoundMethod::PurityFull, &opts).unwrap().value;
        let (ub, _) = ub_mixed(&rho, &AscentConfig { restarts: 2, ..AscentConfig::mixed() }).unwrap();
        // a 2⊗3 system is also decided by PPT, so every bound meets the ascent
        prop_assert!(lb1 <= lb4 + 1e-7 && lb4 <= ub.value + 1e-6, "{lb1} {lb4} {}", ub.value);
        prop_assert!((lb1 - ub.value).abs() <= 1e-5);
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, ..ProptestConfig::default() })]

    #[test]
    fn fidelity_matches_the_oracle(seed in 0u64..100_000, r1 in 1usize..7, r2 in 1usize..7) {
        let l = layout(&[2, 3]);
        let a = random_density_matrix(&l, r1, seed).unwrap();
        let b = random_density_matrix(&l, r2, seed + 1).unwrap();
        let f = fidelity(&a, &b).unwrap();
        prop_assert!((0.0..=1.0 + 1e-12).contains(&f));
        prop_assert!((f - fidelity(&b, &a).unwrap()).abs() < 1e-9);
        prop_assert!((f - oracle::fidelity(a.matrix(), b.matrix())).abs() < 1e-7);
        prop_assert!((fidelity(&a, &a).unwrap() - 1.0).abs() < 1e-8);
    }

    #[test]
    fn partial_trace_keeps_a_state(seed in 0u64..100_000, rank in 1usize..13, keep in 0usize..3) {
        let rho = random_density_matrix(&layout(&[2, 3, 2]), rank, seed).unwrap();
        let red = partial_trace(&rho, &[keep]).unwrap();
        prop_assert!((red.matrix().trace().re - 1.0).abs() < 1e-12);
        prop_assert!(oracle::eigvalsh(red.matrix())[0] > -1e-12);
        // tracing everything but one site in two steps agrees with one step
        let others: Vec<usize> = (0..3).filter(|&s| s != keep).collect();
        let pair = partial_trace(&rho, &[keep.min(others[0]), keep.max(others[0])]).unwrap();
        let pos = if keep < others[0] { 0 } else { 1 };
        let twice = partial_trace(&pair, &[pos]).unwrap();
        prop_assert!((twice.matrix() - red.matrix()).norm() < 1e-12);
    }

    #[test]
    fn partial_transpose_matches_the_oracle(seed in 0u64..100_000, site in 0usize..2) {
        let rho = random_density_matrix(&layout(&[3, 2]), 4, seed).unwrap();
        let pt: CMat = partial_transpose(&rho, &[site]).unwrap();
        let reference = oracle::partial_transpose(rho.matrix(), &[3, 2], site);
        prop_assert!((&pt - &reference).norm() < 1e-14);
        let neg: f64 = oracle::eigvalsh(&reference).iter().filter(|&&x| x < 0.0).map(|x| -x).sum();
        prop_assert!((negativity(&rho, &[site]).unwrap() - neg).abs() < 1e-9);
        prop_assert!((pt.trace() - Complex64::new(1.0, 0.0)).norm() < 1e-12);
    }
}
