use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::tensor::linalg::outer;
use crate::tensor::{CMat, CVec, DensityMatrix, PureState, SubsystemLayout};

fn cr(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

fn check_unit(name: &str, x: f64) -> Result<()> {
    if (0.0..=1.0).contains(&x) {
        Ok(())
    } else {
        Err(Error::usage(format!("{name} = {x} outside [0, 1]")))
    }
}

fn check_parties(n: usize) -> Result<()> {
    if n < 2 {
        return Err(Error::usage(format!("need at least 2 qubits, got {n}")));
    }
    Ok(())
}

/// The 3⊗3 family of PPT entangled states with parameter `a ∈ [0, 1]`.
pub fn horodecki_3x3(a: f64) -> Result<DensityMatrix> {
    check_unit("a", a)?;
    let mut m = CMat::zeros(9, 9);
    for i in 0..9 {
        m[(i, i)] = cr(a);
    }
    for &i in &[0, 4, 8] {
        for &j in &[0, 4, 8] {
            m[(i, j)] = cr(a);
        }
    }
    m[(6, 6)] = cr((1.0 + a) / 2.0);
    m[(8, 8)] = cr((1.0 + a) / 2.0);
    let off = (1.0 - a * a).max(0.0).sqrt() / 2.0;
    m[(6, 8)] = cr(off);
    m[(8, 6)] = cr(off);
    DensityMatrix::from_numeric(m / cr(8.0 * a + 1.0), SubsystemLayout::new(vec![3, 3])?)
}

/// `(|0…0⟩ + |1…1⟩)/√2` on `n` qubits.
pub fn ghz(n: usize) -> Result<PureState> {
    check_parties(n)?;
    let d = 1usize << n;
    let mut v = CVec::zeros(d);
    v[0] = cr(FRAC_1_SQRT_2);
    v[d - 1] = cr(FRAC_1_SQRT_2);
    PureState::new(v, SubsystemLayout::qubits(n))
}

/// Uniform superposition of the `n` single-excitation basis states.
pub fn w(n: usize) -> Result<PureState> {
    check_parties(n)?;
    let mut v = CVec::zeros(1 << n);
    let amp = cr(1.0 / (n as f64).sqrt());
    for k in 0..n {
        v[1 << k] = amp;
    }
    PureState::new(v, SubsystemLayout::qubits(n))
}

/// `p |GHZ⟩⟨GHZ| + (1 − p) |W⟩⟨W|`.
pub fn ghz_w_mixture(p: f64, n: usize) -> Result<DensityMatrix> {
    check_unit("p", p)?;
    let m = outer(ghz(n)?.amplitudes()) * cr(p) + outer(w(n)?.amplitudes()) * cr(1.0 - p);
    DensityMatrix::from_numeric(m, SubsystemLayout::qubits(n))
}

/// Members of the three-qubit XXX reference family: the low-temperature
/// limits at the three field regimes and the closed-form thermal state.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum XxxReference {
    /// Ground state at the critical field `h = 3/2`.
    CriticalField,
    /// Ground state for `0 < h < 3/2`.
    IntermediateField,
    /// Ground state at `h = 0`.
    ZeroField,
    /// Thermal state of the periodic three-site XXX model with coupling `j`
    /// (as passed to [`super::SpinModel::xxx`]) and field `h`.
    Thermal { beta: f64, h: f64, j: f64 },
}

impl std::str::FromStr for XxxReference {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "critical" => Ok(Self::CriticalField),
            "intermediate" => Ok(Self::IntermediateField),
            "zero-field" => Ok(Self::ZeroField),
            _ => Err(Error::usage(format!(
                "unknown reference state `{s}` (expected critical, intermediate, zero-field)"
            ))),
        }
    }
}

/// Places `block` on the one- or two-excitation subspace indices.
fn on_indices(idx: &[usize], block: &[[f64; 3]; 3], scale: f64) -> CMat {
    let mut m = CMat::zeros(8, 8);
    for (a, &i) in idx.iter().enumerate() {
        for (b, &j) in idx.iter().enumerate() {
            m[(i, j)] = cr(block[a][b] * scale);
        }
    }
    m
}

const CIRCULANT: [[f64; 3]; 3] = [[2.0, -1.0, -1.0], [-1.0, 2.0, -1.0], [-1.0, -1.0, 2.0]];
const ONE_EXCITATION: [usize; 3] = [1, 2, 4];
const TWO_EXCITATIONS: [usize; 3] = [3, 5, 6];

pub fn xxx_reference_state(which: XxxReference) -> Result<DensityMatrix> {
    let m = match which {
        XxxReference::CriticalField => {
            let mut m = on_indices(&TWO_EXCITATIONS, &CIRCULANT, 1.0 / 9.0);
            m[(7, 7)] = cr(1.0 / 3.0);
            m
        }
        XxxReference::IntermediateField => on_indices(&TWO_EXCITATIONS, &CIRCULANT, 1.0 / 6.0),
        XxxReference::ZeroField => {
            on_indices(&ONE_EXCITATION, &CIRCULANT, 1.0 / 12.0)
                + on_indices(&TWO_EXCITATIONS, &CIRCULANT, 1.0 / 12.0)
        }
        XxxReference::Thermal { beta, h, j } => xxx_thermal_closed_form(beta, h, j)?,
    };
    DensityMatrix::from_numeric(m, SubsystemLayout::qubits(3))
}

/// Closed form of the three-site periodic XXX thermal state. The formula is
/// written for the coupling of the opposite sign to the model preset, hence
/// `jf = -j`.
fn xxx_thermal_closed_form(beta: f64, h: f64, j: f64) -> Result<CMat> {
    if !(beta.is_finite() && beta >= 0.0 && h.is_finite() && j.is_finite()) {
        return Err(Error::usage(
            "closed-form thermal state needs finite β ≥ 0, h and J",
        ));
    }
    let jf = -j;
    let e3 = (3.0 * beta * jf).exp();
    let kappa = e3 - 1.0;
    let xi = 2.0 * e3 + 1.0;
    let e2h = (2.0 * beta * h).exp();
    let mu = (e2h + 1.0) * (e2h * e2h + 2.0 * e2h * e3 + 1.0);
    let block = |w: f64| {
        [
            [xi, -kappa, -kappa],
            [-kappa, xi, -kappa],
            [-kappa, -kappa, xi],
        ]
        .map(|r| r.map(|x| x * w))
    };
    let mut m = on_indices(&ONE_EXCITATION, &block(e2h), 1.0 / (3.0 * mu));
    m += on_indices(&TWO_EXCITATIONS, &block(e2h * e2h), 1.0 / (3.0 * mu));
    m[(0, 0)] = cr(1.0 / mu);
    m[(7, 7)] = cr(e2h.powi(3) / mu);
    if !m.iter().all(|z| z.re.is_finite()) {
        return Err(Error::usage(
            "closed-form thermal state overflows at these parameters",
        ));
    }
    Ok(m)
}

/// Separable state `(|011⟩⟨011| + |101⟩⟨101| + |110⟩⟨110|)/3`, which has
/// fidelity 2/3 with the intermediate-field ground state.
pub fn xxx_intermediate_witness() -> DensityMatrix {
    let mut m = CMat::zeros(8, 8);
    for &i in &TWO_EXCITATIONS {
        m[(i, i)] = cr(1.0 / 3.0);
    }
    DensityMatrix::from_numeric(m, SubsystemLayout::qubits(3)).expect("diagonal state is valid")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::linalg::eigvalsh;
    use crate::tensor::{fidelity, negativity};

    #[test]
    fn horodecki_endpoints() {
        let r0 = horodecki_3x3(0.0).unwrap();
        let m = r0.matrix();
        for i in 0..9 {
            for j in 0..9 {
                let expected = match (i, j) {
                    (6, 6) | (8, 8) | (6, 8) | (8, 6) => 0.5,
                    _ => 0.0,
                };
                assert!((m[(i, j)].re - expected).abs() < 1e-15, "({i},{j})");
            }
        }
        let r1 = horodecki_3x3(1.0).unwrap();
        assert!((r1.matrix()[(6, 8)].re).abs() < 1e-15);
        for i in 0..9 {
            assert!((r1.matrix()[(i, i)].re - 1.0 / 9.0).abs() < 1e-15);
        }
        assert!(horodecki_3x3(1.1).is_err());
    }

    #[test]
    fn horodecki_is_ppt() {
        for a in [0.1, 0.5, 0.9] {
            let rho = horodecki_3x3(a).unwrap();
            assert!(negativity(&rho, &[0]).unwrap() < 1e-12);
        }
    }

    #[test]
    fn ghz_and_w_amplitudes() {
        let g = ghz(3).unwrap();
        for (i, z) in g.amplitudes().iter().enumerate() {
            let expected = if i == 0 || i == 7 { FRAC_1_SQRT_2 } else { 0.0 };
            assert!((z.re - expected).abs() < 1e-15);
        }
        let v = w(3).unwrap();
        for (i, z) in v.amplitudes().iter().enumerate() {
            let expected = if [1, 2, 4].contains(&i) {
                1.0 / 3f64.sqrt()
            } else {
                0.0
            };
            assert!((z.re - expected).abs() < 1e-15);
        }
        assert!(ghz(1).is_err());
    }

    #[test]
    fn mixture_endpoints() {
        let m = ghz_w_mixture(1.0, 3).unwrap();
        assert_eq!(m.numerical_rank(), 1);
        assert!((m.matrix() - ghz(3).unwrap().to_density().matrix()).norm() < 1e-15);
        assert!(ghz_w_mixture(-0.1, 3).is_err());
    }

    #[test]
    fn reference_states_are_states() {
        for which in [
            XxxReference::CriticalField,
            XxxReference::IntermediateField,
            XxxReference::ZeroField,
        ] {
            let rho = xxx_reference_state(which).unwrap();
            assert!((rho.matrix().trace().re - 1.0).abs() < 1e-14);
            assert!(eigvalsh(rho.matrix()).min() > -1e-14);
        }
    }

    #[test]
    fn witness_fidelity_is_two_thirds() {
        let rho = xxx_reference_state(XxxReference::IntermediateField).unwrap();
        let f = fidelity(&rho, &xxx_intermediate_witness()).unwrap();
        assert!((f - 2.0 / 3.0).abs() < 1e-12, "{f}");
    }
}
