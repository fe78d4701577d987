//! Lowering of an [`SdpProblem`] to a real symmetric SDP in coordinates.
//!
//! Each variable block is expanded in an orthonormal real basis of its
//! (possibly symmetry-restricted) matrix space. Every basis element is a
//! short list of matrix entries, so its image under the monomial maps of a
//! constraint is again a short entry list. The real problem solved is
//!
//! ```text
//! maximize  b·y   subject to  C_k - Σ_i y_i A_{k,i} ⪰ 0,   E y = f
//! ```
//!
//! When every coefficient is real only the conjugation-even coordinates are
//! kept and blocks stay at their natural size; otherwise each Hermitian
//! constraint block is replaced by its real embedding `[[Re, -Im], [Im, Re]]`.

use std::collections::HashMap;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::model::{Block, BlockKind, EntryOp, LinearTerm, SdpProblem, Sense};
use crate::error::{Error, Result};
use crate::tensor::layout::Radix;
use crate::tensor::linalg::real_eigh;
use crate::tensor::CMat;

type Entry = (usize, usize, Complex64);
/// A coordinate index with the entries it contributes to one block.
type RealTerms = Vec<(usize, Vec<(usize, usize, f64)>)>;

/// Compiled real-coordinate form of a problem.
#[derive(Clone, Debug)]
pub struct RealSdp {
    pub(crate) block_dims: Vec<usize>,
    pub(crate) constants: Vec<DMatrix<f64>>,
    /// For every block, the coordinates touching it with the entries of `A_{k,i}`.
    pub(crate) block_coords: Vec<RealTerms>,
    /// In complex mode, the same operators before embedding (empty otherwise).
    pub(crate) complex_coords: Vec<Vec<(usize, Vec<Entry>)>>,
    pub(crate) b: DVector<f64>,
    pub(crate) e: DMatrix<f64>,
    pub(crate) f: DVector<f64>,
    pub(crate) complex: bool,
    /// The equality system has no solution at all.
    pub(crate) inconsistent: bool,
    sense: Sense,
    var_shapes: Vec<(usize, usize)>,
    basis: Vec<(usize, Vec<Entry>)>,
}

impl RealSdp {
    pub fn num_coordinates(&self) -> usize {
        self.b.len()
    }

    pub fn num_equalities(&self) -> usize {
        self.f.len()
    }

    pub fn block_dims(&self) -> &[usize] {
        &self.block_dims
    }

    pub fn is_complex(&self) -> bool {
        self.complex
    }

    pub(crate) fn sense_sign(&self) -> f64 {
        match self.sense {
            Sense::Maximize => 1.0,
            Sense::Minimize => -1.0,
        }
    }

    /// Rebuilds the complex variable blocks from a coordinate vector.
    pub(crate) fn variables(&self, y: &DVector<f64>) -> Vec<CMat> {
        let mut out: Vec<CMat> = self
            .var_shapes
            .iter()
            .map(|&(r, c)| CMat::zeros(r, c))
            .collect();
        for (i, (v, entries)) in self.basis.iter().enumerate() {
            for &(r, c, z) in entries {
                out[*v][(r, c)] += z * y[i];
            }
        }
        out
    }
}

/// Real embedding `[[Re H, -Im H], [Im H, Re H]]` of a complex matrix.
pub fn embed_matrix(h: &CMat) -> DMatrix<f64> {
    let (r, c) = h.shape();
    DMatrix::from_fn(2 * r, 2 * c, |i, j| {
        let z = h[(i % r, j % c)];
        match (i < r, j < c) {
            (true, true) | (false, false) => z.re,
            (false, true) => z.im,
            (true, false) => -z.im,
        }
    })
}

/// Inverse of [`embed_matrix`] for matrices of the embedded form, averaging
/// the redundant copies.
pub fn unembed_matrix(m: &DMatrix<f64>) -> CMat {
    let r = m.nrows() / 2;
    let c = m.ncols() / 2;
    CMat::from_fn(r, c, |i, j| {
        Complex64::new(
            0.5 * (m[(i, j)] + m[(i + r, j + c)]),
            0.5 * (m[(i + r, j)] - m[(i, j + c)]),
        )
    })
}

enum CompiledOp {
    Transpose(Radix, Vec<usize>),
    Trace(Radix, Vec<usize>, Vec<usize>),
    Adjoint,
    Place(usize, usize),
}

impl CompiledOp {
    fn new(op: &EntryOp) -> Self {
        match op {
            EntryOp::PartialTranspose { dims, systems } => {
                CompiledOp::Transpose(Radix::new(dims), systems.clone())
            }
            EntryOp::PartialTrace { dims, keep } => {
                let traced = (0..dims.len()).filter(|s| !keep.contains(s)).collect();
                CompiledOp::Trace(Radix::new(dims), keep.clone(), traced)
            }
            EntryOp::Adjoint => CompiledOp::Adjoint,
            EntryOp::Place { row, col, .. } => CompiledOp::Place(*row, *col),
        }
    }

    fn apply(&self, (r, c, z): Entry) -> Option<Entry> {
        match self {
            CompiledOp::Transpose(radix, systems) => {
                let (mut r2, mut c2) = (r, c);
                for &s in systems {
                    let (dr, dc) = (radix.digit(r, s), radix.digit(c, s));
                    r2 = radix.with_digit(r2, s, dc);
                    c2 = radix.with_digit(c2, s, dr);
                }
                Some((r2, c2, z))
            }
            CompiledOp::Trace(radix, keep, traced) => traced
                .iter()
                .all(|&s| radix.digit(r, s) == radix.digit(c, s))
                .then(|| (radix.sub_index(r, keep), radix.sub_index(c, keep), z)),
            CompiledOp::Adjoint => Some((c, r, z.conj())),
            CompiledOp::Place(dr, dc) => Some((r + dr, c + dc, z)),
        }
    }
}

struct CompiledTerm {
    var: usize,
    coeff: f64,
    ops: Vec<CompiledOp>,
}

impl CompiledTerm {
    fn new(t: &LinearTerm) -> Self {
        Self {
            var: t.var.0,
            coeff: t.coeff,
            ops: t.ops.iter().map(CompiledOp::new).collect(),
        }
    }

    fn image(&self, entries: &[Entry], out: &mut Vec<Entry>) {
        'entry: for &e in entries {
            let mut cur = e;
            for op in &self.ops {
                match op.apply(cur) {
                    Some(next) => cur = next,
                    None => continue 'entry,
                }
            }
            out.push((cur.0, cur.1, cur.2 * self.coeff));
        }
    }
}

fn merge(mut entries: Vec<Entry>) -> Vec<Entry> {
    entries.sort_by_key(|&(r, c, _)| (r, c));
    let mut out: Vec<Entry> = Vec::with_capacity(entries.len());
    for (r, c, z) in entries {
        match out.last_mut() {
            Some(last) if last.0 == r && last.1 == c => last.2 += z,
            _ => out.push((r, c, z)),
        }
    }
    out.retain(|e| e.2.norm() > 1e-15);
    out
}

fn check_hermitian(entries: &[Entry], what: &str) -> Result<()> {
    for &(r, c, z) in entries {
        let mirror = entries
            .binary_search_by_key(&(c, r), |&(a, b, _)| (a, b))
            .map(|k| entries[k].2)
            .unwrap_or_default();
        if (mirror - z.conj()).norm() > 1e-12 {
            return Err(Error::usage(format!("{what} image is not Hermitian")));
        }
    }
    Ok(())
}

/// Orthonormal real basis of a block's matrix space as entry lists.
fn block_basis(block: &Block, real_only: bool) -> Vec<Vec<Entry>> {
    let one = Complex64::new(1.0, 0.0);
    let i = Complex64::new(0.0, 1.0);
    match block.kind {
        BlockKind::General { rows, cols } => {
            let mut out = Vec::new();
            for r in 0..rows {
                for c in 0..cols {
                    out.push(vec![(r, c, one)]);
                    if !real_only {
                        out.push(vec![(r, c, i)]);
                    }
                }
            }
            out
        }
        BlockKind::Hermitian { dim: n } => {
            let orbit = pair_orbits(n, &block.symmetry);
            let mut members: Vec<Vec<(usize, usize)>> =
                vec![Vec::new(); orbit.iter().max().map_or(0, |m| m + 1)];
            for a in 0..n {
                for b in 0..n {
                    members[orbit[a * n + b]].push((a, b));
                }
            }
            let mut out = Vec::new();
            let mut done = vec![false; members.len()];
            for (o, pairs) in members.iter().enumerate() {
                if done[o] {
                    continue;
                }
                done[o] = true;
                let (a, b) = pairs[0];
                let t = orbit[b * n + a];
                if t == o {
                    // closed under transposition: only a real symmetric part survives
                    let s = one / (pairs.len() as f64).sqrt();
                    out.push(pairs.iter().map(|&(a, b)| (a, b, s)).collect());
                } else {
                    done[t] = true;
                    let s = 1.0 / (2.0 * pairs.len() as f64).sqrt();
                    let re: Vec<Entry> = pairs
                        .iter()
                        .flat_map(|&(a, b)| [(a, b, one * s), (b, a, one * s)])
                        .collect();
                    out.push(re);
                    if !real_only {
                        let im: Vec<Entry> = pairs
                            .iter()
                            .flat_map(|&(a, b)| [(a, b, i * s), (b, a, -i * s)])
                            .collect();
                        out.push(im);
                    }
                }
            }
            out
        }
    }
}

/// Orbit label of each ordered index pair under the permutation group.
fn pair_orbits(n: usize, gens: &[Vec<usize>]) -> Vec<usize> {
    let mut label = vec![usize::MAX; n * n];
    let mut next = 0;
    let mut stack = Vec::new();
    for start in 0..n * n {
        if label[start] != usize::MAX {
            continue;
        }
        label[start] = next;
        stack.push(start);
        while let Some(p) = stack.pop() {
            let (a, b) = (p / n, p % n);
            for g in gens {
                let q = g[a] * n + g[b];
                if label[q] == usize::MAX {
                    label[q] = next;
                    stack.push(q);
                }
            }
        }
        next += 1;
    }
    label
}

/// Lowers `problem`. With `force_complex` the real embedding is used even
/// for real data.
pub fn compile(problem: &SdpProblem, force_complex: bool) -> Result<RealSdp> {
    problem.validate()?;
    let complex = force_complex || !problem.is_real();
    let mut basis: Vec<(usize, Vec<Entry>)> = Vec::new();
    for (v, block) in problem.blocks.iter().enumerate() {
        basis.extend(block_basis(block, !complex).into_iter().map(|e| (v, e)));
    }
    let m = basis.len();

    let sign = match problem.sense {
        Sense::Maximize => 1.0,
        Sense::Minimize => -1.0,
    };
    let mut b = DVector::zeros(m);
    for (v, coeff) in &problem.objective {
        for (i, (bv, entries)) in basis.iter().enumerate() {
            if *bv == v.0 {
                b[i] += sign
                    * entries
                        .iter()
                        .map(|&(r, c, z)| (coeff[(c, r)] * z).re)
                        .sum::<f64>();
            }
        }
    }

    let images = |terms: &[LinearTerm], i: usize| -> Vec<Entry> {
        let (v, entries) = &basis[i];
        let mut out = Vec::new();
        for t in terms.iter().filter(|t| t.var.0 == *v) {
            CompiledTerm::new(t).image(entries, &mut out);
        }
        merge(out)
    };

    let mut block_dims = Vec::new();
    let mut constants = Vec::new();
    let mut block_coords = Vec::new();
    let mut complex_coords = Vec::new();
    let mut touched = vec![false; m];
    for (k, con) in problem.psd.iter().enumerate() {
        let n = con.dim;
        let c0 = con.constant.clone().unwrap_or_else(|| CMat::zeros(n, n));
        let vars: Vec<usize> = con.terms.iter().map(|t| t.var.0).collect();
        let compiled: Vec<CompiledTerm> = con.terms.iter().map(CompiledTerm::new).collect();
        let mut coords = Vec::new();
        let mut ccoords = Vec::new();
        for (i, (v, entries)) in basis.iter().enumerate() {
            if !vars.contains(v) {
                continue;
            }
            let mut raw = Vec::new();
            for t in compiled.iter().filter(|t| t.var == *v) {
                t.image(entries, &mut raw);
            }
            let img = merge(raw);
            if img.is_empty() {
                continue;
            }
            check_hermitian(&img, &format!("PSD constraint {k}"))?;
            touched[i] = true;
            // A_{k,i} is minus the image, since S = C - Σ y_i A_i.
            if complex {
                ccoords.push((i, img.iter().map(|&(r, c, z)| (r, c, -z)).collect()));
            }
            let mut real = Vec::with_capacity(if complex { 4 * img.len() } else { img.len() });
            for (r, c, z) in img {
                if complex {
                    real.extend([
                        (r, c, -z.re),
                        (r + n, c + n, -z.re),
                        (r + n, c, -z.im),
                        (r, c + n, z.im),
                    ]);
                } else {
                    real.push((r, c, -z.re));
                }
            }
            real.retain(|e| e.2 != 0.0);
            coords.push((i, real));
        }
        if complex {
            block_dims.push(2 * n);
            constants.push(embed_matrix(&c0));
        } else {
            block_dims.push(n);
            constants.push(c0.map(|z| z.re));
        }
        block_coords.push(coords);
        complex_coords.push(ccoords);
    }
    if let Some(i) = touched.iter().position(|t| !t) {
        let name = &problem.blocks[basis[i].0].name;
        return Err(Error::usage(format!(
            "block `{name}` has a direction not constrained by any PSD constraint"
        )));
    }

    // Equalities: one real row per independent real component of the image.
    let mut rows: Vec<(usize, usize, usize, bool)> = Vec::new(); // (equality, a, b, imaginary)
    let mut row_index: Vec<HashMap<(usize, usize, bool), usize>> = Vec::new();
    for (j, eq) in problem.equalities.iter().enumerate() {
        let q = eq.rhs.nrows();
        let mut idx = HashMap::new();
        for a in 0..q {
            for bb in a..q {
                idx.insert((a, bb, false), rows.len());
                rows.push((j, a, bb, false));
                if a != bb && complex {
                    idx.insert((a, bb, true), rows.len());
                    rows.push((j, a, bb, true));
                }
            }
        }
        row_index.push(idx);
    }
    let p_raw = rows.len();
    let mut e_raw = DMatrix::<f64>::zeros(p_raw, m);
    let component = |z: Complex64, diag: bool, imag: bool| {
        if diag {
            z.re
        } else if imag {
            std::f64::consts::SQRT_2 * z.im
        } else {
            std::f64::consts::SQRT_2 * z.re
        }
    };
    for (j, eq) in problem.equalities.iter().enumerate() {
        for i in 0..m {
            let img = images(&eq.terms, i);
            if img.is_empty() {
                continue;
            }
            check_hermitian(&img, &format!("equality {j}"))?;
            for (r, c, z) in img {
                if r > c {
                    continue;
                }
                e_raw[(row_index[j][&(r, c, false)], i)] += component(z, r == c, false);
                if r != c && complex {
                    e_raw[(row_index[j][&(r, c, true)], i)] += component(z, false, true);
                }
            }
        }
    }
    let f_raw = DVector::from_iterator(
        p_raw,
        rows.iter()
            .map(|&(j, a, bb, imag)| component(problem.equalities[j].rhs[(a, bb)], a == bb, imag)),
    );
    let (e, f, consistent) = orthonormalize_rows(&e_raw, &f_raw);

    Ok(RealSdp {
        block_dims,
        constants,
        block_coords,
        complex_coords,
        b,
        e,
        f,
        complex,
        inconsistent: !consistent,
        sense: problem.sense,
        var_shapes: problem.blocks.iter().map(|bl| bl.kind.shape()).collect(),
        basis,
    })
}

/// Replaces `E y = f` by an equivalent system with orthonormal rows,
/// dropping dependent rows. The flag reports whether `f` lies in the range.
fn orthonormalize_rows(e: &DMatrix<f64>, f: &DVector<f64>) -> (DMatrix<f64>, DVector<f64>, bool) {
    let m = e.ncols();
    if e.nrows() == 0 {
        return (DMatrix::zeros(0, m), DVector::zeros(0), true);
    }
    let gram = e * e.transpose();
    let (vals, vecs) = real_eigh(&gram);
    let top = vals.iter().cloned().fold(0.0, f64::max);
    let keep: Vec<usize> = (0..vals.len())
        .filter(|&k| vals[k] > 1e-10 * top.max(1e-300))
        .collect();
    let mut u = DMatrix::zeros(e.nrows(), keep.len());
    for (col, &k) in keep.iter().enumerate() {
        u.set_column(col, &(vecs.column(k) / vals[k].sqrt()));
    }
    let e2 = u.transpose() * e;
    let f2 = u.transpose() * f;
    let proj = e * (e2.transpose() * &f2);
    let consistent = (f - proj).norm() <= 1e-9 * (1.0 + f.norm());
    (e2, f2, consistent)
}
