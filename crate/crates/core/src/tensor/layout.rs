use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Ordered local dimensions of a tensor-product Hilbert space.
///
/// Basis index convention: subsystem 0 is the most significant digit, so for
/// qubits `|100⟩` is index 4.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct SubsystemLayout {
    dims: Vec<usize>,
}

impl SubsystemLayout {
    /// Every local dimension must be at least 2.
    pub fn new(dims: Vec<usize>) -> Result<Self> {
        if dims.is_empty() {
            return Err(Error::usage("layout needs at least one subsystem"));
        }
        if let Some(d) = dims.iter().find(|&&d| d < 2) {
            return Err(Error::usage(format!("local dimension {d} < 2")));
        }
        Ok(Self { dims })
    }

    /// Layout that may contain one-dimensional factors (purification
    /// ancillas of pure inputs).
    pub(crate) fn with_trivial(dims: Vec<usize>) -> Self {
        debug_assert!(!dims.is_empty() && dims.iter().all(|&d| d >= 1));
        Self { dims }
    }

    pub fn qubits(n: usize) -> Self {
        Self { dims: vec![2; n] }
    }

    pub fn unfactored(dim: usize) -> Self {
        Self { dims: vec![dim] }
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn len(&self) -> usize {
        self.dims.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dims.is_empty()
    }

    pub fn total(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn dim(&self, i: usize) -> usize {
        self.dims[i]
    }

    pub fn check_indices(&self, idx: &[usize]) -> Result<()> {
        for &i in idx {
            if i >= self.dims.len() {
                return Err(Error::usage(format!(
                    "subsystem index {i} out of range for {} subsystems",
                    self.dims.len()
                )));
            }
        }
        Ok(())
    }

    /// Layout restricted to the listed subsystems, in ascending order.
    pub fn restrict(&self, keep: &[usize]) -> Self {
        let mut k = keep.to_vec();
        k.sort_unstable();
        k.dedup();
        Self::with_trivial(k.iter().map(|&i| self.dims[i]).collect())
    }

    pub fn prepend(&self, dim: usize) -> Self {
        let mut d = vec![dim];
        d.extend_from_slice(&self.dims);
        Self::with_trivial(d)
    }

    pub fn complement(&self, set: &[usize]) -> Vec<usize> {
        (0..self.len()).filter(|i| !set.contains(i)).collect()
    }
}

impl TryFrom<Vec<usize>> for SubsystemLayout {
    type Error = Error;
    fn try_from(v: Vec<usize>) -> Result<Self> {
        if v.is_empty() || v.contains(&0) {
            return Err(Error::usage("layout dimensions must be positive"));
        }
        Ok(Self::with_trivial(v))
    }
}

impl From<SubsystemLayout> for Vec<usize> {
    fn from(l: SubsystemLayout) -> Self {
        l.dims
    }
}

impl std::fmt::Display for SubsystemLayout {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let parts: Vec<String> = self.dims.iter().map(|d| d.to_string()).collect();
        write!(f, "{}", parts.join("⊗"))
    }
}

/// Digit arithmetic for mixed-radix basis indices.
#[derive(Clone, Debug)]
pub(crate) struct Radix {
    dims: Vec<usize>,
    strides: Vec<usize>,
}

impl Radix {
    pub fn new(dims: &[usize]) -> Self {
        let mut strides = vec![1; dims.len()];
        for i in (0..dims.len().saturating_sub(1)).rev() {
            strides[i] = strides[i + 1] * dims[i + 1];
        }
        Self {
            dims: dims.to_vec(),
            strides,
        }
    }

    pub fn total(&self) -> usize {
        self.dims.iter().product()
    }

    #[inline]
    pub fn digit(&self, index: usize, sys: usize) -> usize {
        (index / self.strides[sys]) % self.dims[sys]
    }

    /// Index with digit `sys` replaced by `value`.
    #[inline]
    pub fn with_digit(&self, index: usize, sys: usize, value: usize) -> usize {
        index - self.digit(index, sys) * self.strides[sys] + value * self.strides[sys]
    }

    /// Index over the subsystems in `subset` (ascending), built from `index`.
    #[inline]
    pub fn sub_index(&self, index: usize, subset: &[usize]) -> usize {
        let mut out = 0;
        for &s in subset {
            out = out * self.dims[s] + self.digit(index, s);
        }
        out
    }
}
