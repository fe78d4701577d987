use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::tensor::linalg::{identity, kron, max_abs_diff, pauli};
use crate::tensor::{CMat, DensityMatrix};

/// A single-site quantum channel given by its Kraus operators.
#[derive(Clone, Debug)]
pub struct KrausChannel {
    ops: Vec<CMat>,
}

impl KrausChannel {
    /// Checks that the operators are square, share a dimension and satisfy
    /// `Σ K†K = I` to within `1e-12`.
    pub fn new(ops: Vec<CMat>) -> Result<Self> {
        let d = ops
            .first()
            .ok_or_else(|| Error::usage("channel needs at least one Kraus operator"))?
            .nrows();
        if ops.iter().any(|k| k.nrows() != d || k.ncols() != d) {
            return Err(Error::dim(
                "Kraus operators must be square and of equal size",
            ));
        }
        let sum = ops
            .iter()
            .fold(CMat::zeros(d, d), |acc, k| acc + k.adjoint() * k);
        let defect = max_abs_diff(&sum, &identity(d));
        if defect > 1e-12 {
            return Err(Error::usage(format!(
                "Kraus operators are not trace preserving (defect {defect:.2e})"
            )));
        }
        Ok(Self { ops })
    }

    pub fn dim(&self) -> usize {
        self.ops[0].nrows()
    }

    pub fn kraus(&self) -> &[CMat] {
        &self.ops
    }
}

fn check_prob(name: &str, x: f64) -> Result<()> {
    if (0.0..=1.0).contains(&x) {
        Ok(())
    } else {
        Err(Error::usage(format!("{name} = {x} outside [0, 1]")))
    }
}

fn real2(a: f64, b: f64, c: f64, d: f64) -> CMat {
    CMat::from_row_slice(2, 2, &[a, b, c, d].map(|x| Complex64::new(x, 0.0)))
}

/// Amplitude damping with decay probability `q`.
pub fn amplitude_damping(q: f64) -> Result<KrausChannel> {
    check_prob("q", q)?;
    KrausChannel::new(vec![
        real2(1.0, 0.0, 0.0, (1.0 - q).sqrt()),
        real2(0.0, q.sqrt(), 0.0, 0.0),
    ])
}

/// Depolarizing channel `ρ ↦ (1 − p) ρ + p I/2`.
pub fn depolarizing(p: f64) -> Result<KrausChannel> {
    check_prob("p", p)?;
    let mut ops = vec![identity(2) * Complex64::new((1.0 - 0.75 * p).sqrt(), 0.0)];
    ops.extend((1..=3).map(|k| pauli(k) * Complex64::new((p / 4.0).sqrt(), 0.0)));
    KrausChannel::new(ops)
}

/// Applies `channel` independently to each subsystem in `sites`.
pub fn apply_local_channel(
    channel: &KrausChannel,
    rho: &DensityMatrix,
    sites: &[usize],
) -> Result<DensityMatrix> {
    let layout = rho.layout();
    layout.check_indices(sites)?;
    for &s in sites {
        if layout.dim(s) != channel.dim() {
            return Err(Error::dim(format!(
                "channel acts on dimension {} but subsystem {s} has dimension {}",
                channel.dim(),
                layout.dim(s)
            )));
        }
    }
    let mut m = rho.matrix().clone();
    let mut seen = Vec::new();
    for &s in sites {
        if seen.contains(&s) {
            continue;
        }
        seen.push(s);
        let before: usize = layout.dims()[..s].iter().product();
        let after: usize = layout.dims()[s + 1..].iter().product();
        let mut next = CMat::zeros(m.nrows(), m.ncols());
        for k in channel.kraus() {
            let full = kron(&kron(&identity(before), k), &identity(after));
            next += &full * &m * full.adjoint();
        }
        m = next;
    }
    DensityMatrix::from_numeric(m, layout.clone())
}
