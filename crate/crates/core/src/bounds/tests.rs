use super::*;
use crate::ascent::AscentConfig;
use crate::tensor::linalg::eigvalsh;
use crate::tensor::{random_density_matrix, random_pure_state, CVec, SubsystemLayout};

const TOL: f64 = 1e-8;
const CLOSE: f64 = 2e-6;

fn cr(x: f64) -> num_complex::Complex64 {
    num_complex::Complex64::new(x, 0.0)
}

fn ket(dims: &[usize], amps: &[(usize, f64)]) -> PureState {
    let d: usize = dims.iter().product();
    let mut v = CVec::zeros(d);
    for &(i, a) in amps {
        v[i] = cr(a);
    }
    PureState::normalized(v, SubsystemLayout::new(dims.to_vec()).unwrap()).unwrap()
}

fn bell() -> DensityMatrix {
    ket(&[2, 2], &[(0, 1.0), (3, 1.0)]).to_density()
}

fn ghz3() -> DensityMatrix {
    ket(&[2, 2, 2], &[(0, 1.0), (7, 1.0)]).to_density()
}

fn werner(p: f64) -> DensityMatrix {
    let m = bell().matrix() * cr(p) + CMat::identity(4, 4) * cr((1.0 - p) / 4.0);
    DensityMatrix::new(m, SubsystemLayout::qubits(2)).unwrap()
}

/// Largest squared Schmidt coefficient from the singular values of the
/// reshaped amplitude matrix.
fn top_schmidt_weight(psi: &PureState) -> f64 {
    let dims = psi.layout().dims();
    let (da, db) = (dims[0], dims[1]);
    let m = CMat::from_fn(da, db, |i, j| psi.amplitudes()[i * db + j]);
    let s = m.singular_values();
    let top = s.iter().cloned().fold(0.0, f64::max);
    top * top
}

fn all_lbs(rho: &DensityMatrix) -> Vec<(String, f64)> {
    vec![
        ("lb1".into(), lb_ppt_fidelity(rho, TOL).unwrap().value),
        ("lb2k2".into(), lb_k_extension(rho, 2, TOL).unwrap().value),
        ("lb3".into(), lb_purity_reduced(rho, TOL).unwrap().value),
        ("lb4".into(), lb_purity_full(rho, TOL).unwrap().value),
    ]
}

#[test]
fn product_state_has_zero_bounds() {
    let rho = ket(&[2, 3], &[(4, 1.0)]).to_density();
    for (name, v) in all_lbs(&rho) {
        assert!(v.abs() < CLOSE, "{name}: {v}");
    }
}

#[test]
fn bell_state_bounds_equal_one_half() {
    for (name, v) in all_lbs(&bell()) {
        assert!((v - 0.5).abs() < CLOSE, "{name}: {v}");
    }
}

#[test]
fn maximally_mixed_state_is_unentangled() {
    let rho = DensityMatrix::maximally_mixed(SubsystemLayout::new(vec![2, 3]).unwrap());
    for (name, v) in all_lbs(&rho) {
        assert!(v.abs() < CLOSE, "{name}: {v}");
    }
}

#[test]
fn pure_two_qubit_bounds_match_schmidt_weight() {
    for seed in 0..3 {
        let psi = random_pure_state(&SubsystemLayout::qubits(2), seed);
        let oracle = 1.0 - top_schmidt_weight(&psi);
        let rho = psi.to_density();
        for (name, v) in all_lbs(&rho) {
            assert!(
                (v - oracle).abs() < 1e-5,
                "seed {seed} {name}: {v} vs {oracle}"
            );
        }
        assert!((exact_two_qubit(&rho).unwrap() - oracle).abs() < 1e-9);
    }
}

#[test]
fn ghz_lower_bound_is_one_half() {
    let rho = ghz3();
    let v = lb_ppt_fidelity(&rho, TOL).unwrap().value;
    assert!((v - 0.5).abs() < CLOSE, "{v}");
    let v = lb_purity_full(&rho, TOL).unwrap().value;
    assert!((v - 0.5).abs() < CLOSE, "{v}");
}

#[test]
fn first_order_extension_equals_ppt_bound() {
    let rho = random_density_matrix(&SubsystemLayout::new(vec![2, 3]).unwrap(), 3, 11).unwrap();
    let a = lb_ppt_fidelity(&rho, TOL).unwrap().value;
    let b = lb_k_extension(&rho, 1, TOL).unwrap().value;
    assert!((a - b).abs() < CLOSE, "{a} vs {b}");
}

#[test]
fn symmetric_reduction_leaves_extension_bound_unchanged() {
    let rho = random_density_matrix(&SubsystemLayout::qubits(2), 2, 5).unwrap();
    let sym = lb_k_extension_with(&rho, 3, &BoundOptions::with_tolerance(TOL)).unwrap();
    let full = lb_k_extension_with(
        &rho,
        3,
        &BoundOptions {
            symmetric_extension: false,
            ..BoundOptions::with_tolerance(TOL)
        },
    )
    .unwrap();
    assert!(
        (sym.value - full.value).abs() < CLOSE,
        "{} vs {}",
        sym.value,
        full.value
    );
}

#[test]
fn extension_hierarchy_is_monotone() {
    let rho = random_density_matrix(&SubsystemLayout::qubits(2), 2, 8).unwrap();
    let k1 = lb_k_extension(&rho, 1, TOL).unwrap().value;
    let k2 = lb_k_extension(&rho, 2, TOL).unwrap().value;
    let k3 = lb_k_extension(&rho, 3, TOL).unwrap().value;
    assert!(k2 >= k1 - CLOSE && k3 >= k2 - CLOSE, "{k1} {k2} {k3}");
}

#[test]
fn two_qubit_lower_bounds_are_tight() {
    // PPT equals separable for two qubits, so the PPT bound is the exact value.
    for p in [0.2, 1.0 / 3.0, 0.6, 0.9] {
        let rho = werner(p);
        let exact = exact_two_qubit(&rho).unwrap();
        let lb1 = lb_ppt_fidelity(&rho, TOL).unwrap().value;
        assert!((lb1 - exact).abs() < CLOSE, "p={p}: {lb1} vs {exact}");
    }
}

#[test]
fn exact_two_qubit_reference_values() {
    assert!(
        exact_two_qubit(&ket(&[2, 2], &[(0, 1.0)]).to_density())
            .unwrap()
            .abs()
            < 1e-12
    );
    // √(1 - C²) near C = 1 turns rounding of order 1e-16 into 1e-8
    assert!((exact_two_qubit(&bell()).unwrap() - 0.5).abs() < 1e-7);
    // Werner: C = max(0, (3p-1)/2)
    let p: f64 = 0.8;
    let c: f64 = (3.0 * p - 1.0) / 2.0;
    let expected = (1.0 - (1.0 - c * c).sqrt()) / 2.0;
    assert!((exact_two_qubit(&werner(p)).unwrap() - expected).abs() < 1e-12);
    assert!(exact_two_qubit(&werner(0.3)).unwrap().abs() < 1e-12);
    assert!(exact_two_qubit(&ghz3()).is_err());
}

#[test]
fn oversized_extension_is_a_capacity_error() {
    let rho = DensityMatrix::maximally_mixed(SubsystemLayout::new(vec![3, 3]).unwrap());
    match lb_k_extension(&rho, 5, TOL) {
        Err(Error::Capacity { required, cap }) => {
            assert_eq!(required, 3usize.pow(6));
            assert_eq!(cap, DEFAULT_DIMENSION_CAP);
        }
        other => panic!("expected capacity error, got {other:?}"),
    }
}

#[test]
fn lower_bound_method_names_round_trip() {
    for name in ["lb1", "lb2k2", "lb2k3", "lb3", "lb4"] {
        let m: LowerBoundMethod = name.parse().unwrap();
        assert_eq!(m.tag(), name);
    }
    assert!("lb2k0".parse::<LowerBoundMethod>().is_err());
    assert!("lb5".parse::<LowerBoundMethod>().is_err());
}

#[test]
fn pure_estimate_brackets_ghz() {
    let psi = ket(&[2, 2, 2], &[(0, 1.0), (7, 1.0)]);
    let est = pure_sdp_estimate(&psi, TOL).unwrap();
    assert!(est.value <= 0.5 + CLOSE);
    assert!(0.5 <= est.value + est.accuracy + CLOSE);
}

#[test]
fn estimate_brackets_random_state() {
    let rho = random_density_matrix(&SubsystemLayout::qubits(2), 2, 3).unwrap();
    let est = estimate(
        &rho,
        LowerBoundMethod::PptFidelity,
        &AscentConfig::mixed().with_seed(1),
    )
    .unwrap();
    assert!(est.lower.value <= est.upper.value + BRACKET_SLACK);
    let exact = exact_two_qubit(&rho).unwrap();
    assert!((est.lower.value - exact).abs() < CLOSE);
    assert!(
        (est.upper.value - exact).abs() < 1e-5,
        "{} vs {exact}",
        est.upper.value
    );
    let sigma = est.ensemble.density();
    let vals = eigvalsh(&sigma);
    assert!(vals.iter().all(|&v| v > -1e-10));
}
