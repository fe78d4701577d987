use num_complex::Complex64;

use super::linalg::{self, hermiticity_defect, min_eigenvalue, trace};
use super::{CMat, CVec, SubsystemLayout, INVARIANT_TOL, PSD_TOL};
use crate::error::{Error, Result};

/// A normalized state vector on a factored Hilbert space.
#[derive(Clone, Debug, PartialEq)]
pub struct PureState {
    amplitudes: CVec,
    layout: SubsystemLayout,
}

impl PureState {
    pub fn new(amplitudes: CVec, layout: SubsystemLayout) -> Result<Self> {
        if amplitudes.len() != layout.total() {
            return Err(Error::dim(format!(
                "{} amplitudes for layout {layout}",
                amplitudes.len()
            )));
        }
        let norm = amplitudes.norm();
        if (norm - 1.0).abs() > INVARIANT_TOL {
            return Err(Error::invalid(format!("state norm {norm} != 1")));
        }
        Ok(Self { amplitudes, layout })
    }

    /// Normalizes `amplitudes` before validating.
    pub fn normalized(amplitudes: CVec, layout: SubsystemLayout) -> Result<Self> {
        let norm = amplitudes.norm();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::invalid("cannot normalize a zero vector"));
        }
        Self::new(amplitudes / Complex64::new(norm, 0.0), layout)
    }

    pub fn amplitudes(&self) -> &CVec {
        &self.amplitudes
    }

    pub fn layout(&self) -> &SubsystemLayout {
        &self.layout
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn to_density(&self) -> DensityMatrix {
        DensityMatrix {
            matrix: linalg::outer(&self.amplitudes),
            layout: self.layout.clone(),
        }
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &PureState) -> Complex64 {
        self.amplitudes.dotc(&other.amplitudes)
    }
}

/// Hermitian, positive semidefinite, unit-trace matrix with a layout.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    matrix: CMat,
    layout: SubsystemLayout,
}

impl DensityMatrix {
    /// Validates hermiticity (1e-12), trace (1e-12) and positivity (-1e-10).
    pub fn new(matrix: CMat, layout: SubsystemLayout) -> Result<Self> {
        Self::check(&matrix, &layout)?;
        Ok(Self { matrix, layout })
    }

    /// Symmetrizes and renormalizes the trace before validating; intended
    /// for matrices produced by floating-point pipelines.
    pub fn from_numeric(matrix: CMat, layout: SubsystemLayout) -> Result<Self> {
        let h = linalg::hermitian_part(&matrix);
        let tr = trace(&h).re;
        if !(tr > 0.0) {
            return Err(Error::invalid(format!("trace {tr} is not positive")));
        }
        Self::new(h / Complex64::new(tr, 0.0), layout)
    }

    pub(crate) fn new_unchecked(matrix: CMat, layout: SubsystemLayout) -> Self {
        Self { matrix, layout }
    }

    fn check(matrix: &CMat, layout: &SubsystemLayout) -> Result<()> {
        let n = matrix.nrows();
        if n != matrix.ncols() {
            return Err(Error::dim("density matrix must be square"));
        }
        if n != layout.total() {
            return Err(Error::dim(format!("{n}x{n} matrix for layout {layout}")));
        }
        let herm = hermiticity_defect(matrix);
        if herm > INVARIANT_TOL {
            return Err(Error::invalid(format!("not Hermitian (defect {herm:.3e})")));
        }
        let tr = trace(matrix).re;
        if (tr - 1.0).abs() > INVARIANT_TOL {
            return Err(Error::invalid(format!("trace {tr} != 1")));
        }
        let min = min_eigenvalue(matrix);
        if min < PSD_TOL {
            return Err(Error::invalid(format!("negative eigenvalue {min:.3e}")));
        }
        Ok(())
    }

    pub fn matrix(&self) -> &CMat {
        &self.matrix
    }

    pub fn layout(&self) -> &SubsystemLayout {
        &self.layout
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn into_matrix(self) -> CMat {
        self.matrix
    }

    /// Same matrix, different factorization of the same total dimension.
    pub fn with_layout(&self, layout: SubsystemLayout) -> Result<Self> {
        if layout.total() != self.dim() {
            return Err(Error::dim(format!(
                "layout {layout} for dimension {}",
                self.dim()
            )));
        }
        Ok(Self {
            matrix: self.matrix.clone(),
            layout,
        })
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        linalg::eigvalsh(&self.matrix).iter().copied().collect()
    }

    /// Number of eigenvalues above `1e-12 * λ_max`.
    pub fn numerical_rank(&self) -> usize {
        let ev = self.eigenvalues();
        let max = ev.last().copied().unwrap_or(0.0);
        ev.iter().filter(|&&x| x > RANK_THRESHOLD * max).count()
    }

    pub fn is_real(&self) -> bool {
        linalg::is_real(&self.matrix, 0.0)
    }

    /// `Tr(self · other)`.
    pub fn overlap(&self, other: &CMat) -> f64 {
        linalg::trace_product_re(&self.matrix, other)
    }

    pub fn maximally_mixed(layout: SubsystemLayout) -> Self {
        let d = layout.total();
        Self {
            matrix: CMat::identity(d, d) / Complex64::new(d as f64, 0.0),
            layout,
        }
    }
}

/// Relative eigenvalue cutoff used for numerical rank and purification.
pub const RANK_THRESHOLD: f64 = 1e-12;

/// `|φ₁⟩⊗…⊗|φₙ⟩` stored factor by factor.
#[derive(Clone, Debug, PartialEq)]
pub struct ProductState {
    factors: Vec<CVec>,
}

impl ProductState {
    pub fn new(factors: Vec<CVec>) -> Result<Self> {
        if factors.is_empty() {
            return Err(Error::usage("product state needs at least one factor"));
        }
        for (i, f) in factors.iter().enumerate() {
            if (f.norm() - 1.0).abs() > INVARIANT_TOL {
                return Err(Error::invalid(format!("factor {i} has norm {}", f.norm())));
            }
        }
        Ok(Self { factors })
    }

    pub(crate) fn new_unchecked(factors: Vec<CVec>) -> Self {
        Self { factors }
    }

    pub fn factors(&self) -> &[CVec] {
        &self.factors
    }

    pub fn layout(&self) -> SubsystemLayout {
        SubsystemLayout::with_trivial(self.factors.iter().map(|f| f.len()).collect())
    }

    /// Full state vector, first factor most significant.
    pub fn to_vector(&self) -> CVec {
        let mut v = self.factors[0].clone();
        for f in &self.factors[1..] {
            v = v.kronecker(f);
        }
        v
    }

    pub fn to_pure(&self) -> PureState {
        PureState {
            amplitudes: self.to_vector(),
            layout: self.layout(),
        }
    }
}
