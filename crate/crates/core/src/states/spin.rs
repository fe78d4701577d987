use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tensor::linalg::{eigh, hermiticity_defect};
use crate::tensor::{CMat, DensityMatrix, SubsystemLayout};

/// Largest chain the dense constructors accept.
pub const MAX_SPINS: usize = 12;

/// Spin-½ chain with nearest-neighbour couplings
/// `H = ½ Σ_bonds (Jx σˣσˣ + Jy σʸσʸ + Jz σᶻσᶻ) + h Σ σᶻ`.
///
/// Site 0 is the most significant bit of the basis index and `|0⟩` has
/// `σᶻ = +1`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpinModel {
    pub n: usize,
    pub jx: f64,
    pub jy: f64,
    pub jz: f64,
    pub h: f64,
    /// Adds the bond `(n-1, 0)`.
    pub periodic: bool,
}

impl SpinModel {
    /// XX ring, `H = -(J/2) Σ (σˣσˣ + σʸσʸ)`.
    pub fn xx(n: usize, j: f64) -> Self {
        Self {
            n,
            jx: -j,
            jy: -j,
            jz: 0.0,
            h: 0.0,
            periodic: true,
        }
    }

    /// XXX ring in a field, `H = -(J/2) Σ (σˣσˣ + σʸσʸ + σᶻσᶻ) + h Σ σᶻ`.
    pub fn xxx(n: usize, j: f64, h: f64) -> Self {
        Self {
            n,
            jx: -j,
            jy: -j,
            jz: -j,
            h,
            periodic: true,
        }
    }

    /// Six-site XX ring in a field.
    pub fn hexagon(j: f64, h: f64) -> Self {
        Self {
            h,
            ..Self::xx(6, j)
        }
    }

    pub fn layout(&self) -> SubsystemLayout {
        SubsystemLayout::qubits(self.n)
    }

    pub fn bonds(&self) -> Vec<(usize, usize)> {
        let mut b: Vec<(usize, usize)> =
            (0..self.n.saturating_sub(1)).map(|i| (i, i + 1)).collect();
        if self.periodic && self.n >= 2 {
            b.push((self.n - 1, 0));
        }
        b
    }

    fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::usage(format!(
                "spin chain needs n ≥ 2, got {}",
                self.n
            )));
        }
        if self.n > MAX_SPINS {
            return Err(Error::Capacity {
                required: 1 << self.n,
                cap: 1 << MAX_SPINS,
            });
        }
        if ![self.jx, self.jy, self.jz, self.h]
            .iter()
            .all(|x| x.is_finite())
        {
            return Err(Error::usage("spin model parameters must be finite"));
        }
        Ok(())
    }
}

/// Dense Hamiltonian matrix of `model`, built directly in the computational
/// basis from bit flips.
pub fn hamiltonian(model: &SpinModel) -> Result<CMat> {
    model.validate()?;
    let n = model.n;
    let d = 1usize << n;
    let mask = |site: usize| 1usize << (n - 1 - site);
    let spin = |b: usize, site: usize| if b & mask(site) == 0 { 1.0 } else { -1.0 };
    let mut h = CMat::zeros(d, d);
    for b in 0..d {
        let mut diag = model.h * (0..n).map(|s| spin(b, s)).sum::<f64>();
        for &(i, j) in &model.bonds() {
            let (si, sj) = (spin(b, i), spin(b, j));
            diag += 0.5 * model.jz * si * sj;
            // σˣσˣ flips both bits with amplitude 1; σʸσʸ flips them with
            // amplitude (i s_i)(i s_j) = -s_i s_j.
            let flipped = b ^ mask(i) ^ mask(j);
            let amp = 0.5 * (model.jx - model.jy * si * sj);
            if amp != 0.0 {
                h[(flipped, b)] += Complex64::new(amp, 0.0);
            }
        }
        h[(b, b)] += Complex64::new(diag, 0.0);
    }
    Ok(h)
}

fn check_hermitian(h: &CMat, layout: &SubsystemLayout) -> Result<()> {
    if h.nrows() != h.ncols() || h.nrows() != layout.total() {
        return Err(Error::dim(format!(
            "{}×{} matrix for layout {layout}",
            h.nrows(),
            h.ncols()
        )));
    }
    let scale = h.norm().max(1.0);
    if hermiticity_defect(h) > 1e-12 * scale {
        return Err(Error::usage("thermal state needs a Hermitian matrix"));
    }
    Ok(())
}

/// `e^{-βH} / Z`, evaluated on the spectrum shifted by its minimum.
pub fn thermal_state(h: &CMat, beta: f64, layout: &SubsystemLayout) -> Result<DensityMatrix> {
    if !(beta.is_finite() && beta >= 0.0) {
        return Err(Error::usage(format!(
            "β must be finite and ≥ 0, got {beta}"
        )));
    }
    check_hermitian(h, layout)?;
    let (vals, vecs) = eigh(h);
    let emin = vals.min();
    let weights: Vec<f64> = vals.iter().map(|&e| (-beta * (e - emin)).exp()).collect();
    Ok(from_spectrum(&vecs, &weights, layout))
}

/// The β → ∞ limit: the normalized projector onto the lowest eigenspace.
/// Eigenvalues within `1e-10` of the spectral width of the minimum count
/// as degenerate.
pub fn ground_state(h: &CMat, layout: &SubsystemLayout) -> Result<DensityMatrix> {
    check_hermitian(h, layout)?;
    let (vals, vecs) = eigh(h);
    let (emin, emax) = (vals.min(), vals.max());
    let cut = 1e-10 * (emax - emin).max(1e-300);
    let weights: Vec<f64> = vals
        .iter()
        .map(|&e| if e - emin <= cut { 1.0 } else { 0.0 })
        .collect();
    Ok(from_spectrum(&vecs, &weights, layout))
}

fn from_spectrum(vecs: &CMat, weights: &[f64], layout: &SubsystemLayout) -> DensityMatrix {
    let z: f64 = weights.iter().sum();
    let mut scaled = vecs.clone();
    for (k, mut col) in scaled.column_iter_mut().enumerate() {
        col *= Complex64::new(weights[k] / z, 0.0);
    }
    let m = scaled * vecs.adjoint();
    DensityMatrix::from_numeric(m, layout.clone()).expect("Gibbs weights give a valid state")
}
