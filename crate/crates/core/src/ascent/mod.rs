//! Upper bounds from explicit separable states: alternating ascent for pure
//! states and ensemble refinement for mixed states.

mod mixed;
mod product;

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

pub use mixed::{ub_mixed, ub_mixed_with_history, IterationRecord};
pub use product::closest_product_state;

use crate::error::{Error, Result};
use crate::tensor::linalg::outer;
use crate::tensor::{CMat, ProductState, PureState};

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AscentConfig {
    /// Stop once an iteration improves the fidelity (or overlap) by less.
    pub tolerance: f64,
    pub max_iterations: usize,
    pub restarts: usize,
    /// Number of ensemble members; `None` means `d²`.
    pub ensemble_size: Option<usize>,
    /// Alternating sweeps per member and outer iteration.
    pub inner_sweeps: usize,
    pub seed: u64,
    /// Append one JSON line per outer iteration to this file.
    #[serde(skip)]
    pub trace_path: Option<PathBuf>,
}

impl AscentConfig {
    pub fn pure() -> Self {
        Self {
            tolerance: 1e-10,
            max_iterations: 1000,
            restarts: 10,
            ensemble_size: None,
            inner_sweeps: 3,
            seed: 0,
            trace_path: None,
        }
    }

    pub fn mixed() -> Self {
        Self {
            restarts: 5,
            max_iterations: 3000,
            ..Self::pure()
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub(crate) fn validate(&self) -> Result<()> {
        if !(self.tolerance > 0.0) {
            return Err(Error::usage("ascent tolerance must be positive"));
        }
        if self.ensemble_size == Some(0) {
            return Err(Error::usage("ensemble size must be positive"));
        }
        Ok(())
    }
}

impl Default for AscentConfig {
    fn default() -> Self {
        Self::mixed()
    }
}

/// A weighted list of pure states.
#[derive(Clone, Debug)]
pub struct Ensemble {
    pub weights: Vec<f64>,
    pub states: Vec<PureState>,
}

impl Ensemble {
    pub fn density(&self) -> CMat {
        let n = self.states.first().map_or(0, |s| s.dim());
        let mut m = CMat::zeros(n, n);
        for (w, s) in self.weights.iter().zip(&self.states) {
            m += outer(s.amplitudes()) * num_complex::Complex64::new(*w, 0.0);
        }
        m
    }
}

/// A separable state written as a mixture of product states.
#[derive(Clone, Debug)]
pub struct ProductEnsemble {
    pub weights: Vec<f64>,
    pub members: Vec<ProductState>,
}

impl ProductEnsemble {
    pub fn to_ensemble(&self) -> Ensemble {
        Ensemble {
            weights: self.weights.clone(),
            states: self.members.iter().map(|p| p.to_pure()).collect(),
        }
    }

    pub fn density(&self) -> CMat {
        self.to_ensemble().density()
    }
}
