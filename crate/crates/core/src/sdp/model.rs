//! Problem description: variable blocks, linear maps built from monomial entry
//! operations, PSD-image constraints and Hermitian equality constraints.

use num_complex::Complex64;
use serde::Serialize;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::tensor::linalg::{hermiticity_defect, is_real};
use crate::tensor::{CMat, INVARIANT_TOL};

/// Handle to a variable block inside one [`SdpProblem`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct VarId(pub(crate) usize);

impl VarId {
    pub fn index(self) -> usize {
        self.0
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Sense {
    Maximize,
    Minimize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum BlockKind {
    /// Hermitian `dim x dim` matrix.
    Hermitian { dim: usize },
    /// Unconstrained complex `rows x cols` matrix.
    General { rows: usize, cols: usize },
}

impl BlockKind {
    pub fn shape(&self) -> (usize, usize) {
        match *self {
            BlockKind::Hermitian { dim } => (dim, dim),
            BlockKind::General { rows, cols } => (rows, cols),
        }
    }
}

/// A map sending every matrix unit to a multiple of a single matrix unit (or
/// to zero). Chains of these express partial traces, partial transposes,
/// adjoints and block placement.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum EntryOp {
    PartialTranspose {
        dims: Vec<usize>,
        systems: Vec<usize>,
    },
    /// Keeps the listed subsystems (ascending); an empty list gives the 1x1 trace.
    PartialTrace {
        dims: Vec<usize>,
        keep: Vec<usize>,
    },
    Adjoint,
    /// Places the input at `(row, col)` inside a `rows x cols` zero matrix.
    Place {
        row: usize,
        col: usize,
        rows: usize,
        cols: usize,
    },
}

impl EntryOp {
    fn output_shape(&self, shape: (usize, usize)) -> Result<(usize, usize)> {
        match self {
            EntryOp::PartialTranspose { dims, systems } => {
                let total: usize = dims.iter().product();
                if shape != (total, total) {
                    return Err(Error::dim(format!(
                        "partial transpose over {dims:?} applied to {shape:?}"
                    )));
                }
                if systems.iter().any(|&s| s >= dims.len()) {
                    return Err(Error::usage(format!(
                        "transposed systems {systems:?} out of range"
                    )));
                }
                Ok(shape)
            }
            EntryOp::PartialTrace { dims, keep } => {
                let total: usize = dims.iter().product();
                if shape != (total, total) {
                    return Err(Error::dim(format!(
                        "partial trace over {dims:?} applied to {shape:?}"
                    )));
                }
                if keep.windows(2).any(|w| w[0] >= w[1]) || keep.iter().any(|&s| s >= dims.len()) {
                    return Err(Error::usage(format!(
                        "kept systems {keep:?} must be ascending and in range"
                    )));
                }
                let out: usize = keep.iter().map(|&s| dims[s]).product();
                Ok((out, out))
            }
            EntryOp::Adjoint => Ok((shape.1, shape.0)),
            EntryOp::Place {
                row,
                col,
                rows,
                cols,
            } => {
                if row + shape.0 > *rows || col + shape.1 > *cols {
                    return Err(Error::dim(format!(
                        "{shape:?} placed at ({row},{col}) overflows {rows}x{cols}"
                    )));
                }
                Ok((*rows, *cols))
            }
        }
    }
}

/// `coeff * ops[n-1](... ops[0](X))` for the variable block `X`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LinearTerm {
    pub var: VarId,
    pub coeff: f64,
    pub ops: Vec<EntryOp>,
}

impl LinearTerm {
    pub fn new(var: VarId) -> Self {
        Self {
            var,
            coeff: 1.0,
            ops: Vec::new(),
        }
    }

    pub fn scaled(mut self, coeff: f64) -> Self {
        self.coeff *= coeff;
        self
    }

    pub fn then(mut self, op: EntryOp) -> Self {
        self.ops.push(op);
        self
    }

    pub fn partial_transpose(self, dims: &[usize], systems: &[usize]) -> Self {
        self.then(EntryOp::PartialTranspose {
            dims: dims.to_vec(),
            systems: systems.to_vec(),
        })
    }

    pub fn partial_trace(self, dims: &[usize], keep: &[usize]) -> Self {
        self.then(EntryOp::PartialTrace {
            dims: dims.to_vec(),
            keep: keep.to_vec(),
        })
    }

    pub fn trace(self, dim: usize) -> Self {
        self.partial_trace(&[dim], &[])
    }

    pub fn adjoint(self) -> Self {
        self.then(EntryOp::Adjoint)
    }

    pub fn place(self, row: usize, col: usize, rows: usize, cols: usize) -> Self {
        self.then(EntryOp::Place {
            row,
            col,
            rows,
            cols,
        })
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Block {
    pub name: String,
    pub kind: BlockKind,
    /// Index permutations `p` under which the block is restricted to be
    /// invariant (`X[p[a], p[b]] = X[a, b]`). Empty means no restriction.
    pub symmetry: Vec<Vec<usize>>,
}

#[derive(Clone, Debug)]
pub struct PsdConstraint {
    pub dim: usize,
    pub constant: Option<CMat>,
    pub terms: Vec<LinearTerm>,
}

#[derive(Clone, Debug)]
pub struct Equality {
    pub terms: Vec<LinearTerm>,
    pub rhs: CMat,
}

/// A Hermitian semidefinite program over complex matrix blocks.
///
/// Objective: `sum_v Re Tr(C_v X_v)` (for a general `r x c` block `C_v` is `c x r`).
/// PSD constraints: `constant + sum terms ⪰ 0`. Equalities: `sum terms = rhs`.
/// Immutable once handed to the solver.
#[derive(Clone, Debug)]
pub struct SdpProblem {
    pub(crate) sense: Sense,
    pub(crate) blocks: Vec<Block>,
    pub(crate) objective: Vec<(VarId, CMat)>,
    pub(crate) psd: Vec<PsdConstraint>,
    pub(crate) equalities: Vec<Equality>,
}

impl SdpProblem {
    pub fn new(sense: Sense) -> Self {
        Self {
            sense,
            blocks: Vec::new(),
            objective: Vec::new(),
            psd: Vec::new(),
            equalities: Vec::new(),
        }
    }

    pub fn sense(&self) -> Sense {
        self.sense
    }

    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    pub fn psd_constraints(&self) -> &[PsdConstraint] {
        &self.psd
    }

    pub fn equalities(&self) -> &[Equality] {
        &self.equalities
    }

    fn push_block(&mut self, name: &str, kind: BlockKind) -> Result<VarId> {
        let (r, c) = kind.shape();
        if r == 0 || c == 0 {
            return Err(Error::usage(format!(
                "block `{name}` has an empty dimension"
            )));
        }
        self.blocks.push(Block {
            name: name.to_string(),
            kind,
            symmetry: Vec::new(),
        });
        Ok(VarId(self.blocks.len() - 1))
    }

    /// Adds a Hermitian block with no constraint attached.
    pub fn hermitian(&mut self, name: &str, dim: usize) -> Result<VarId> {
        self.push_block(name, BlockKind::Hermitian { dim })
    }

    /// Adds a Hermitian block together with the constraint `X ⪰ 0`.
    pub fn psd_hermitian(&mut self, name: &str, dim: usize) -> Result<VarId> {
        let v = self.hermitian(name, dim)?;
        self.add_psd(dim, None, vec![LinearTerm::new(v)])?;
        Ok(v)
    }

    pub fn general(&mut self, name: &str, rows: usize, cols: usize) -> Result<VarId> {
        self.push_block(name, BlockKind::General { rows, cols })
    }

    pub fn block_shape(&self, var: VarId) -> Result<(usize, usize)> {
        self.blocks
            .get(var.0)
            .map(|b| b.kind.shape())
            .ok_or_else(|| Error::usage(format!("unknown variable {}", var.0)))
    }

    /// Restricts a Hermitian block to matrices invariant under simultaneous
    /// row/column permutation by each of `perms`. The caller is responsible
    /// for the rest of the problem being invariant as well, otherwise the
    /// restriction changes the optimum.
    pub fn set_symmetry(&mut self, var: VarId, perms: Vec<Vec<usize>>) -> Result<()> {
        let (r, c) = self.block_shape(var)?;
        if r != c || !matches!(self.blocks[var.0].kind, BlockKind::Hermitian { .. }) {
            return Err(Error::usage("symmetry applies to Hermitian blocks only"));
        }
        for p in &perms {
            let mut seen = vec![false; r];
            if p.len() != r
                || p.iter()
                    .any(|&i| i >= r || std::mem::replace(&mut seen[i], true))
            {
                return Err(Error::usage(
                    "symmetry generator is not a permutation of the block indices",
                ));
            }
        }
        self.blocks[var.0].symmetry = perms;
        Ok(())
    }

    pub fn add_objective(&mut self, var: VarId, coeff: CMat) -> Result<()> {
        let (r, c) = self.block_shape(var)?;
        if coeff.shape() != (c, r) {
            return Err(Error::dim(format!(
                "objective coefficient {:?} for a {r}x{c} block",
                coeff.shape()
            )));
        }
        if matches!(self.blocks[var.0].kind, BlockKind::Hermitian { .. })
            && hermiticity_defect(&coeff) > INVARIANT_TOL
        {
            return Err(Error::usage(
                "objective coefficient of a Hermitian block must be Hermitian",
            ));
        }
        self.objective.push((var, coeff));
        Ok(())
    }

    fn image_shape(&self, terms: &[LinearTerm]) -> Result<(usize, usize)> {
        let mut shape = None;
        for t in terms {
            let mut s = self.block_shape(t.var)?;
            for op in &t.ops {
                s = op.output_shape(s)?;
            }
            match shape {
                None => shape = Some(s),
                Some(prev) if prev != s => {
                    return Err(Error::dim(format!(
                        "terms produce shapes {prev:?} and {s:?}"
                    )))
                }
                _ => {}
            }
        }
        shape.ok_or_else(|| Error::usage("constraint without terms"))
    }

    /// Requires `constant + sum(terms)` to be PSD. The image must be
    /// Hermitian for every value of the variables; this is checked when the
    /// problem is compiled.
    pub fn add_psd(
        &mut self,
        dim: usize,
        constant: Option<CMat>,
        terms: Vec<LinearTerm>,
    ) -> Result<()> {
        let shape = self.image_shape(&terms)?;
        if shape != (dim, dim) {
            return Err(Error::dim(format!(
                "PSD constraint of size {dim} has image {shape:?}"
            )));
        }
        if let Some(c) = &constant {
            if c.shape() != (dim, dim) {
                return Err(Error::dim("PSD constant has the wrong size"));
            }
            if hermiticity_defect(c) > INVARIANT_TOL {
                return Err(Error::usage("PSD constant must be Hermitian"));
            }
        }
        self.psd.push(PsdConstraint {
            dim,
            constant,
            terms,
        });
        Ok(())
    }

    pub fn add_equality(&mut self, terms: Vec<LinearTerm>, rhs: CMat) -> Result<()> {
        let shape = self.image_shape(&terms)?;
        if rhs.shape() != shape || shape.0 != shape.1 {
            return Err(Error::dim(format!(
                "equality image {shape:?} vs right-hand side {:?}",
                rhs.shape()
            )));
        }
        if hermiticity_defect(&rhs) > INVARIANT_TOL {
            return Err(Error::usage("equality right-hand side must be Hermitian"));
        }
        self.equalities.push(Equality { terms, rhs });
        Ok(())
    }

    /// True when every coefficient is real, so that a real optimum exists.
    pub fn is_real(&self) -> bool {
        let real = |m: &CMat| is_real(m, 0.0);
        self.objective.iter().all(|(_, c)| real(c))
            && self
                .psd
                .iter()
                .all(|p| p.constant.as_ref().is_none_or(real))
            && self.equalities.iter().all(|e| real(&e.rhs))
    }

    pub(crate) fn validate(&self) -> Result<()> {
        if self.blocks.is_empty() {
            return Err(Error::usage("problem has no variable blocks"));
        }
        Ok(())
    }

    /// Self-describing JSON dump for cross-checking with external solvers.
    pub fn to_json(&self) -> Value {
        fn mat(m: &CMat) -> Value {
            let rows = |f: fn(&Complex64) -> f64| -> Vec<Vec<f64>> {
                (0..m.nrows())
                    .map(|r| (0..m.ncols()).map(|c| f(&m[(r, c)])).collect())
                    .collect()
            };
            json!({ "re": rows(|z| z.re), "im": rows(|z| z.im) })
        }
        json!({
            "format": "entbound-sdp/1",
            "sense": self.sense,
            "objective_convention": "sum_v Re Tr(C_v X_v)",
            "blocks": self.blocks,
            "objective": self.objective.iter()
                .map(|(v, c)| json!({ "var": v.0, "coeff": mat(c) })).collect::<Vec<_>>(),
            "psd_constraints": self.psd.iter().map(|p| json!({
                "dim": p.dim,
                "constant": p.constant.as_ref().map(mat),
                "terms": p.terms,
            })).collect::<Vec<_>>(),
            "equalities": self.equalities.iter().map(|e| json!({
                "terms": e.terms,
                "rhs": mat(&e.rhs),
            })).collect::<Vec<_>>(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shape_checks() {
        let mut p = SdpProblem::new(Sense::Maximize);
        let x = p.psd_hermitian("x", 4).unwrap();
        let t = LinearTerm::new(x).partial_trace(&[2, 2], &[1]);
        assert!(p
            .add_equality(vec![t.clone()], CMat::identity(2, 2))
            .is_ok());
        assert!(p.add_equality(vec![t], CMat::identity(4, 4)).is_err());
        let bad = LinearTerm::new(x).partial_transpose(&[2, 3], &[0]);
        assert!(p.add_psd(4, None, vec![bad]).is_err());
        let y = p.general("y", 2, 4).unwrap();
        assert!(p.add_objective(y, CMat::zeros(4, 2)).is_ok());
        assert!(p.add_objective(y, CMat::zeros(2, 4)).is_err());
        let placed = LinearTerm::new(y).place(0, 3, 6, 6);
        assert!(p.add_psd(6, None, vec![placed]).is_err());
    }

    #[test]
    fn symmetry_generators_must_be_permutations() {
        let mut p = SdpProblem::new(Sense::Minimize);
        let x = p.hermitian("x", 3).unwrap();
        assert!(p.set_symmetry(x, vec![vec![1, 0, 2]]).is_ok());
        assert!(p.set_symmetry(x, vec![vec![1, 1, 2]]).is_err());
    }

    #[test]
    fn json_dump_lists_blocks() {
        let mut p = SdpProblem::new(Sense::Maximize);
        let x = p.psd_hermitian("sigma", 2).unwrap();
        p.add_objective(x, CMat::identity(2, 2)).unwrap();
        let v = p.to_json();
        assert_eq!(v["blocks"][0]["name"], "sigma");
        assert_eq!(v["psd_constraints"].as_array().unwrap().len(), 1);
    }
}
