//! Infeasible-start primal-dual interior-point method with Nesterov-Todd
//! scaling and a Mehrotra predictor-corrector step.
//!
//! Works on the compiled real form `max b·y  s.t.  S = C - A*(y) ⪰ 0, E y = f`
//! together with its dual `min <C,X> + f·u  s.t.  A(X) + Eᵀu = b, X ⪰ 0`.

use faer::linalg::solvers::Solve;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::Serialize;

use super::compile::{compile, unembed_matrix, RealSdp};
use super::model::SdpProblem;
use crate::error::{Error, Result};
use crate::tensor::linalg::{real_eigvalsh, real_svd};
use crate::tensor::CMat;

pub const DEFAULT_TOLERANCE: f64 = 3e-8;
pub const DEFAULT_MAX_ITERATIONS: usize = 200;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveStatus {
    Optimal,
    MaxIterations,
    NumericalFailure,
    Infeasible,
}

impl SolveStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            SolveStatus::Optimal => "optimal",
            SolveStatus::MaxIterations => "max_iterations",
            SolveStatus::NumericalFailure => "numerical_failure",
            SolveStatus::Infeasible => "infeasible",
        }
    }
}

impl std::fmt::Display for SolveStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Debug)]
pub struct SolverOptions {
    pub tolerance: f64,
    pub max_iterations: usize,
    /// Use the real embedding even when all data are real.
    pub force_complex: bool,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            tolerance: DEFAULT_TOLERANCE,
            max_iterations: DEFAULT_MAX_ITERATIONS,
            force_complex: false,
        }
    }
}

impl SolverOptions {
    pub fn with_tolerance(tolerance: f64) -> Self {
        Self {
            tolerance,
            ..Self::default()
        }
    }
}

#[derive(Clone, Debug)]
pub struct SdpSolution {
    pub status: SolveStatus,
    /// Objective of the model problem at the returned iterate.
    pub objective_value: f64,
    /// Objective of the dual problem, a bound on the optimum at convergence.
    pub dual_value: f64,
    /// `|objective_value - dual_value| / max(1, |objective_value|, |dual_value|)`.
    pub duality_gap: f64,
    /// Relative violation of the model constraints (PSD-image definition and equalities).
    pub feasibility_residual: f64,
    /// Relative violation of the dual equality constraints.
    pub dual_residual: f64,
    pub iterations: usize,
    /// Values of the variable blocks, in declaration order.
    pub primal_blocks: Vec<CMat>,
}

/// Solves with default options apart from tolerance and iteration limit.
pub fn solve(problem: &SdpProblem, tolerance: f64, max_iterations: usize) -> Result<SdpSolution> {
    solve_with(
        problem,
        &SolverOptions {
            tolerance,
            max_iterations,
            ..SolverOptions::default()
        },
    )
}

pub fn solve_with(problem: &SdpProblem, opts: &SolverOptions) -> Result<SdpSolution> {
    if !(opts.tolerance > 0.0) {
        return Err(Error::usage("solver tolerance must be positive"));
    }
    let real = compile(problem, opts.force_complex)?;
    Ok(solve_compiled(&real, opts))
}

fn block_norm(blocks: &[DMatrix<f64>]) -> f64 {
    blocks.iter().map(|b| b.norm_squared()).sum::<f64>().sqrt()
}

fn inner(a: &[DMatrix<f64>], b: &[DMatrix<f64>]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x.dot(y)).sum()
}

fn symmetrize(m: &mut DMatrix<f64>) {
    let n = m.nrows();
    for i in 0..n {
        for j in (i + 1)..n {
            let v = 0.5 * (m[(i, j)] + m[(j, i)]);
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
}

/// Largest step `a` keeping `x + a dx` PSD, given the Cholesky factor of `x`.
fn max_step(lx: &DMatrix<f64>, dx: &DMatrix<f64>) -> f64 {
    let linv = lx
        .clone()
        .try_inverse()
        .unwrap_or_else(|| DMatrix::zeros(lx.nrows(), lx.ncols()));
    let mut t = &linv * dx * linv.transpose();
    symmetrize(&mut t);
    let lmin = real_eigvalsh(&t)
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min);
    if lmin >= 0.0 {
        f64::INFINITY
    } else {
        -1.0 / lmin
    }
}

struct Scaling {
    w: DMatrix<f64>,
    g: DMatrix<f64>,
    ginv: DMatrix<f64>,
    d: DVector<f64>,
    lx: DMatrix<f64>,
    ls: DMatrix<f64>,
}

fn nt_scaling(x: &DMatrix<f64>, s: &DMatrix<f64>) -> Option<Scaling> {
    let lx = x.clone().cholesky()?.l();
    let ls = s.clone().cholesky()?.l();
    let (_, d, v) = real_svd(&(ls.transpose() * &lx));
    if d.iter().any(|&x| !(x > 0.0)) {
        return None;
    }
    let mut g = &lx * &v;
    for (k, mut col) in g.column_iter_mut().enumerate() {
        col /= d[k].sqrt();
    }
    let mut w = &g * g.transpose();
    symmetrize(&mut w);
    // G^{-1} = D^{-1} Gᵀ S
    let mut ginv = g.transpose() * s;
    for (k, mut row) in ginv.row_iter_mut().enumerate() {
        row /= d[k];
    }
    Some(Scaling {
        w,
        g,
        ginv,
        d,
        lx,
        ls,
    })
}

/// Coordinate entries of one block, flattened for the Schur loop.
struct FlatBlock {
    coord: Vec<usize>,
    /// Entries of coordinate `coord[q]` are `start[q]..start[q + 1]`.
    start: Vec<usize>,
    rows: Vec<usize>,
    cols: Vec<usize>,
    /// Column-major offset `r + c n`.
    lin: Vec<usize>,
    vals: Vec<f64>,
    /// Complex-mode operators on the unembedded block, same layout.
    cstart: Vec<usize>,
    crows: Vec<usize>,
    ccols: Vec<usize>,
    clin: Vec<usize>,
    cvals: Vec<Complex64>,
}

struct Workspace<'a> {
    p: &'a RealSdp,
    flat: Vec<FlatBlock>,
}

impl<'a> Workspace<'a> {
    fn new(p: &'a RealSdp) -> Self {
        let flat = p
            .block_coords
            .iter()
            .zip(&p.block_dims)
            .map(|(coords, &n)| {
                let mut fb = FlatBlock {
                    coord: Vec::new(),
                    start: vec![0],
                    rows: Vec::new(),
                    cols: Vec::new(),
                    lin: Vec::new(),
                    vals: Vec::new(),
                    cstart: vec![0],
                    crows: Vec::new(),
                    ccols: Vec::new(),
                    clin: Vec::new(),
                    cvals: Vec::new(),
                };
                for (i, ent) in coords {
                    fb.coord.push(*i);
                    for &(r, c, v) in ent {
                        fb.rows.push(r);
                        fb.cols.push(c);
                        fb.lin.push(r + c * n);
                        fb.vals.push(v);
                    }
                    fb.start.push(fb.vals.len());
                }
                fb
            })
            .zip(
                p.complex_coords
                    .iter()
                    .chain(std::iter::repeat(&Vec::new())),
            )
            .zip(&p.block_dims)
            .map(|((mut fb, ccoords), &n2)| {
                let n = n2 / 2;
                for (_, ent) in ccoords {
                    for &(r, c, z) in ent {
                        fb.crows.push(r);
                        fb.ccols.push(c);
                        fb.clin.push(r + c * n);
                        fb.cvals.push(z);
                    }
                    fb.cstart.push(fb.cvals.len());
                }
                fb
            })
            .collect();
        Self { p, flat }
    }

    fn a_op(&self, x: &[DMatrix<f64>]) -> DVector<f64> {
        let mut out = DVector::zeros(self.p.b.len());
        for (k, fb) in self.flat.iter().enumerate() {
            let xd = x[k].as_slice();
            for (q, &i) in fb.coord.iter().enumerate() {
                out[i] += (fb.start[q]..fb.start[q + 1])
                    .map(|e| fb.vals[e] * xd[fb.lin[e]])
                    .sum::<f64>();
            }
        }
        out
    }

    fn at_op(&self, y: &DVector<f64>) -> Vec<DMatrix<f64>> {
        let mut out: Vec<DMatrix<f64>> = self
            .p
            .block_dims
            .iter()
            .map(|&n| DMatrix::zeros(n, n))
            .collect();
        for (k, fb) in self.flat.iter().enumerate() {
            let od = out[k].as_mut_slice();
            for (q, &i) in fb.coord.iter().enumerate() {
                let yi = y[i];
                if yi != 0.0 {
                    for e in fb.start[q]..fb.start[q + 1] {
                        od[fb.lin[e]] += yi * fb.vals[e];
                    }
                }
            }
        }
        out
    }

    /// Schur complement `M_ij = Σ_k <A_{k,i}, W_k A_{k,j} W_k>`.
    ///
    /// For each coordinate `P = W A_i W` is formed densely and then read at
    /// the entries of every later coordinate of the block. Block coordinate
    /// lists are ascending, so this fills the lower triangle, which is
    /// mirrored at the end.
    fn schur(&self, scal: &[Scaling]) -> DMatrix<f64> {
        let m = self.p.b.len();
        let mut mm = DMatrix::<f64>::zeros(m, m);
        for (k, fb) in self.flat.iter().enumerate() {
            if self.p.complex {
                self.schur_block_complex(fb, &scal[k].w, &mut mm);
                continue;
            }
            let n = scal[k].w.nrows();
            let wd = scal[k].w.as_slice();
            let mut pm = vec![0.0; n * n];
            let mut buf = CongruenceBuf::default();
            for (pos, &i) in fb.coord.iter().enumerate() {
                let span = fb.start[pos]..fb.start[pos + 1];
                congruence(
                    wd,
                    n,
                    &fb.rows[span.clone()],
                    &fb.cols[span.clone()],
                    &fb.vals[span],
                    &mut buf,
                    &mut pm,
                );
                let column = &mut mm.as_mut_slice()[i * m..(i + 1) * m];
                for q in pos..fb.coord.len() {
                    let val: f64 = (fb.start[q]..fb.start[q + 1])
                        .map(|e| fb.vals[e] * pm[fb.lin[e]])
                        .sum();
                    column[fb.coord[q]] += val;
                }
            }
        }
        for j in 0..m {
            for i in (j + 1)..m {
                mm[(j, i)] = mm[(i, j)];
            }
        }
        mm
    }

    /// Same contribution computed on the unembedded block: the embedding
    /// doubles real inner products, so `M_ij += 2 Re <A_i, W A_j W>` with
    /// complex `W` of half the size.
    fn schur_block_complex(
        &self,
        fb: &FlatBlock,
        w_embedded: &DMatrix<f64>,
        mm: &mut DMatrix<f64>,
    ) {
        let m = mm.nrows();
        let wc = unembed_matrix(w_embedded);
        let n = wc.nrows();
        let wd = wc.as_slice();
        let mut pm = vec![Complex64::new(0.0, 0.0); n * n];
        let mut buf = CongruenceBuf::default();
        for (pos, &i) in fb.coord.iter().enumerate() {
            let span = fb.cstart[pos]..fb.cstart[pos + 1];
            congruence(
                wd,
                n,
                &fb.crows[span.clone()],
                &fb.ccols[span.clone()],
                &fb.cvals[span],
                &mut buf,
                &mut pm,
            );
            let column = &mut mm.as_mut_slice()[i * m..(i + 1) * m];
            for q in pos..fb.coord.len() {
                let val: f64 = (fb.cstart[q]..fb.cstart[q + 1])
                    .map(|e| (fb.cvals[e].conj() * pm[fb.clin[e]]).re)
                    .sum();
                column[fb.coord[q]] += 2.0 * val;
            }
        }
    }
}

#[derive(Default)]
struct CongruenceBuf<T> {
    rows: Vec<usize>,
    t: Vec<T>,
}

/// Writes `P = W A W` into `pm` (column-major, `n × n`) for a sparse `A`
/// given by entry lists and a self-adjoint `W` given column-major. `T = A W`
/// is nonzero only on the distinct rows of `A`, so `P = W[:, rows] T[rows, :]`
/// costs `n²` per distinct row.
fn congruence<T>(
    wd: &[T],
    n: usize,
    rows: &[usize],
    cols: &[usize],
    vals: &[T],
    buf: &mut CongruenceBuf<T>,
    pm: &mut [T],
) where
    T: Copy + Default + PartialEq + std::ops::Mul<Output = T> + std::ops::AddAssign,
{
    let zero = T::default();
    buf.rows.clear();
    for &r in rows {
        if !buf.rows.contains(&r) {
            buf.rows.push(r);
        }
    }
    let nr = buf.rows.len();
    buf.t.clear();
    buf.t.resize(nr * n, zero);
    // T[ri, col] = Σ v W[c, col], stored row-major
    for ((&r, &c), &v) in rows.iter().zip(cols).zip(vals) {
        let ri = buf.rows.iter().position(|&x| x == r).unwrap_or(0);
        let trow = &mut buf.t[ri * n..(ri + 1) * n];
        for (col, dst) in trow.iter_mut().enumerate() {
            *dst += v * wd[c + col * n];
        }
    }
    for col in 0..n {
        let dst = &mut pm[col * n..(col + 1) * n];
        dst.iter_mut().for_each(|x| *x = zero);
        for (ri, &r) in buf.rows.iter().enumerate() {
            let a = buf.t[ri * n + col];
            if a != zero {
                for (d, &x) in dst.iter_mut().zip(&wd[r * n..(r + 1) * n]) {
                    *d += x * a;
                }
            }
        }
    }
}

struct Factored {
    mm: DMatrix<f64>,
    llt: faer::linalg::solvers::Llt<f64>,
    /// `M^{-1} Eᵀ` and the Cholesky factor of `E M^{-1} Eᵀ`.
    z: DMatrix<f64>,
    k: Option<nalgebra::Cholesky<f64, nalgebra::Dyn>>,
}

impl Factored {
    /// Factors `M`, adding a growing diagonal shift if the plain Cholesky
    /// breaks down.
    fn new(mm: DMatrix<f64>, e: &DMatrix<f64>) -> Option<Self> {
        let m = mm.nrows();
        let scale = (0..m).map(|i| mm[(i, i)]).fold(0.0, f64::max).max(1e-300);
        let mut reg = 0.0;
        for _ in 0..4 {
            let fm =
                faer::Mat::<f64>::from_fn(m, m, |i, j| mm[(i, j)] + if i == j { reg } else { 0.0 });
            if let Ok(llt) = fm.llt(faer::Side::Lower) {
                drop(fm);
                let mut f = Self {
                    mm,
                    llt,
                    z: DMatrix::zeros(m, 0),
                    k: None,
                };
                if e.nrows() > 0 {
                    f.z = f.solve_m(&e.transpose());
                    let mut kk = e * &f.z;
                    symmetrize(&mut kk);
                    f.k = Some(kk.cholesky()?);
                }
                return Some(f);
            }
            reg = if reg == 0.0 {
                1e-14 * scale
            } else {
                reg * 100.0
            };
        }
        None
    }

    fn solve_m(&self, rhs: &DMatrix<f64>) -> DMatrix<f64> {
        let mut x = faer::Mat::<f64>::from_fn(rhs.nrows(), rhs.ncols(), |i, j| rhs[(i, j)]);
        self.llt.solve_in_place(x.as_mut());
        DMatrix::from_fn(rhs.nrows(), rhs.ncols(), |i, j| x[(i, j)])
    }

    fn solve_once(
        &self,
        e: &DMatrix<f64>,
        h: &DVector<f64>,
        re: &DVector<f64>,
    ) -> (DVector<f64>, DVector<f64>) {
        let mh = self
            .solve_m(&DMatrix::from_column_slice(h.len(), 1, h.as_slice()))
            .column(0)
            .into_owned();
        match &self.k {
            None => (mh, DVector::zeros(0)),
            Some(k) => {
                let du = k.solve(&(e * &mh - re));
                let dy = mh - &self.z * &du;
                (dy, du)
            }
        }
    }

    /// Solves `[M Eᵀ; E 0] [dy; du] = [h; re]` with one step of iterative
    /// refinement against the unshifted `M`.
    fn solve(
        &self,
        e: &DMatrix<f64>,
        h: &DVector<f64>,
        re: &DVector<f64>,
    ) -> (DVector<f64>, DVector<f64>) {
        let (mut dy, mut du) = self.solve_once(e, h, re);
        let mut r1 = h - &self.mm * &dy;
        if e.nrows() > 0 {
            r1 -= e.transpose() * &du;
        }
        let r2 = re - e * &dy;
        let (cy, cu) = self.solve_once(e, &r1, &r2);
        dy += cy;
        if e.nrows() > 0 {
            du += cu;
        }
        (dy, du)
    }
}

struct Iterate {
    x: Vec<DMatrix<f64>>,
    s: Vec<DMatrix<f64>>,
    y: DVector<f64>,
    u: DVector<f64>,
}

struct Measures {
    pobj: f64,
    dobj: f64,
    gap: f64,
    rel_p: f64,
    rel_d: f64,
    rel_e: f64,
    mu: f64,
}

impl Measures {
    fn merit(&self) -> f64 {
        self.gap.max(self.rel_p).max(self.rel_d).max(self.rel_e)
    }
}

pub fn solve_compiled(p: &RealSdp, opts: &SolverOptions) -> SdpSolution {
    let sign = p.sense_sign();
    let m = p.b.len();
    let ws = Workspace::new(p);
    let total_n: usize = p.block_dims.iter().sum();

    let finish =
        |status: SolveStatus, it: &Iterate, meas: &Measures, iterations: usize| SdpSolution {
            status,
            objective_value: sign * meas.pobj,
            dual_value: sign * meas.dobj,
            duality_gap: meas.gap,
            feasibility_residual: meas.rel_d.max(meas.rel_e),
            dual_residual: meas.rel_p,
            iterations,
            primal_blocks: p.variables(&it.y),
        };

    let norm_b = p.b.norm();
    let norm_c = block_norm(&p.constants);
    let norm_f = p.f.norm();

    // Starting point in the style of SDPT3.
    let mut it = Iterate {
        x: Vec::new(),
        s: Vec::new(),
        y: DVector::zeros(m),
        u: DVector::zeros(p.f.len()),
    };
    for (k, &n) in p.block_dims.iter().enumerate() {
        let nf = n as f64;
        let mut xi: f64 = 10f64.max(nf.sqrt());
        let mut eta: f64 = 10f64.max(nf.sqrt()).max(p.constants[k].norm());
        for (i, ent) in &p.block_coords[k] {
            let an = ent.iter().map(|e| e.2 * e.2).sum::<f64>().sqrt();
            xi = xi.max(nf * (1.0 + p.b[*i].abs()) / (1.0 + an));
            eta = eta.max(an);
        }
        it.x.push(DMatrix::identity(n, n) * xi);
        it.s.push(DMatrix::identity(n, n) * eta);
    }

    let measure = |it: &Iterate| -> (Measures, DVector<f64>, Vec<DMatrix<f64>>, DVector<f64>) {
        let ax = ws.a_op(&it.x);
        let rp = &p.b - &ax - p.e.transpose() * &it.u;
        let aty = ws.at_op(&it.y);
        let rd: Vec<DMatrix<f64>> = (0..p.block_dims.len())
            .map(|k| &p.constants[k] - &aty[k] - &it.s[k])
            .collect();
        let re = &p.f - &p.e * &it.y;
        let pobj = p.b.dot(&it.y);
        let dobj = inner(&p.constants, &it.x) + p.f.dot(&it.u);
        let meas = Measures {
            pobj,
            dobj,
            gap: (dobj - pobj).abs() / 1f64.max(pobj.abs()).max(dobj.abs()),
            rel_p: rp.norm() / (1.0 + norm_b),
            rel_d: block_norm(&rd) / (1.0 + norm_c),
            rel_e: re.norm() / (1.0 + norm_f),
            mu: inner(&it.x, &it.s) / total_n as f64,
        };
        (meas, rp, rd, re)
    };

    if p.inconsistent {
        let (meas, ..) = measure(&it);
        return finish(SolveStatus::Infeasible, &it, &meas, 0);
    }

    let tol = opts.tolerance;
    let (mut meas, mut rp, mut rd, mut re) = measure(&it);
    let mut best: Option<(f64, Iterate, Measures, usize)> = None;
    let mut stalls = 0;
    let mut prev_merit = f64::INFINITY;

    log::debug!(
        "sdp: {} coordinates, {} equalities, blocks {:?}, {}",
        m,
        p.f.len(),
        p.block_dims,
        if p.complex { "complex" } else { "real" }
    );
    log::trace!(
        "{:>4} {:>14} {:>14} {:>9} {:>9} {:>9} {:>9} {:>6} {:>6}",
        "it",
        "primal",
        "dual",
        "gap",
        "p_inf",
        "d_inf",
        "mu",
        "a_p",
        "a_d"
    );

    for iter in 0..opts.max_iterations {
        if meas.gap <= tol && meas.rel_p <= tol && meas.rel_d <= tol && meas.rel_e <= tol {
            return finish(SolveStatus::Optimal, &it, &meas, iter);
        }
        // Farkas-type evidence that the model constraints admit no point.
        let axu = (&p.b - &rp).norm();
        if meas.dobj < -1e6 * (1.0 + norm_b + norm_c) && axu <= 1e-6 * meas.dobj.abs() {
            return finish(SolveStatus::Infeasible, &it, &meas, iter);
        }
        if meas.pobj > 1e10 * (1.0 + norm_b + norm_c) {
            return finish(SolveStatus::NumericalFailure, &it, &meas, iter);
        }

        let scal: Option<Vec<Scaling>> =
            it.x.iter()
                .zip(&it.s)
                .map(|(x, s)| nt_scaling(x, s))
                .collect();
        let Some(scal) = scal else {
            return fail(best, finish, it, meas, iter);
        };
        let mm = ws.schur(&scal);
        let Some(fac) = Factored::new(mm, &p.e) else {
            return fail(best, finish, it, meas, iter);
        };

        // Direction for a given complementarity right-hand side R_c (ΔX + WΔSW = R_c).
        let direction = |rc: &[DMatrix<f64>]| {
            let wrw: Vec<DMatrix<f64>> = (0..scal.len())
                .map(|k| &scal[k].w * &rd[k] * &scal[k].w)
                .collect();
            let tmp: Vec<DMatrix<f64>> = (0..scal.len()).map(|k| &rc[k] - &wrw[k]).collect();
            let h = &rp - ws.a_op(&tmp);
            let (dy, du) = fac.solve(&p.e, &h, &re);
            let atdy = ws.at_op(&dy);
            let ds: Vec<DMatrix<f64>> = (0..scal.len()).map(|k| &rd[k] - &atdy[k]).collect();
            let dx: Vec<DMatrix<f64>> = (0..scal.len())
                .map(|k| {
                    let mut v = &rc[k] - &scal[k].w * &ds[k] * &scal[k].w;
                    symmetrize(&mut v);
                    v
                })
                .collect();
            (dx, ds, dy, du)
        };
        let steps = |dx: &[DMatrix<f64>], ds: &[DMatrix<f64>]| {
            let ap = (0..scal.len())
                .map(|k| max_step(&scal[k].lx, &dx[k]))
                .fold(f64::INFINITY, f64::min);
            let ad = (0..scal.len())
                .map(|k| max_step(&scal[k].ls, &ds[k]))
                .fold(f64::INFINITY, f64::min);
            (ap, ad)
        };

        // Predictor.
        let rc_aff: Vec<DMatrix<f64>> = it.x.iter().map(|x| -x).collect();
        let (dx_a, ds_a, _, _) = direction(&rc_aff);
        let (ap_a, ad_a) = steps(&dx_a, &ds_a);
        let (ap_a, ad_a) = (ap_a.min(1.0), ad_a.min(1.0));
        let mut mu_aff = 0.0;
        for k in 0..scal.len() {
            mu_aff += (&it.x[k] + &dx_a[k] * ap_a).dot(&(&it.s[k] + &ds_a[k] * ad_a));
        }
        mu_aff /= total_n as f64;
        let expon = 1f64.max(3.0 * ap_a.min(ad_a).powi(2));
        let sigma = (mu_aff / meas.mu).max(0.0).powf(expon).min(1.0);

        // Corrector in the scaled space.
        let rc: Vec<DMatrix<f64>> = (0..scal.len())
            .map(|k| {
                let sc = &scal[k];
                let n = sc.d.len();
                let dxt = &sc.ginv * &dx_a[k] * sc.ginv.transpose();
                let dst = sc.g.transpose() * &ds_a[k] * &sc.g;
                let prod = &dxt * &dst;
                let mut hm = DMatrix::<f64>::zeros(n, n);
                for i in 0..n {
                    for j in 0..n {
                        let mut r = -(prod[(i, j)] + prod[(j, i)]);
                        if i == j {
                            r += 2.0 * sigma * meas.mu - 2.0 * sc.d[i] * sc.d[i];
                        }
                        hm[(i, j)] = r / (sc.d[i] + sc.d[j]);
                    }
                }
                let mut v = &sc.g * hm * sc.g.transpose();
                symmetrize(&mut v);
                v
            })
            .collect();
        let (dx, ds, dy, du) = direction(&rc);
        let (ap, ad) = steps(&dx, &ds);
        let gamma = 0.9 + 0.09 * ap_a.min(ad_a);
        let ap = (gamma * ap).min(1.0);
        let ad = (gamma * ad).min(1.0);

        for k in 0..scal.len() {
            it.x[k] += &dx[k] * ap;
            it.s[k] += &ds[k] * ad;
            symmetrize(&mut it.x[k]);
            symmetrize(&mut it.s[k]);
        }
        it.u += &du * ap;
        it.y += &dy * ad;

        (meas, rp, rd, re) = measure(&it);
        log::trace!(
            "{:>4} {:>14.8e} {:>14.8e} {:>9.2e} {:>9.2e} {:>9.2e} {:>9.2e} {:>6.3} {:>6.3}",
            iter + 1,
            sign * meas.pobj,
            sign * meas.dobj,
            meas.gap,
            meas.rel_p,
            meas.rel_d.max(meas.rel_e),
            meas.mu,
            ap,
            ad
        );

        let merit = meas.merit();
        if best.as_ref().is_none_or(|b| merit < b.0) {
            best = Some((
                merit,
                Iterate {
                    x: it.x.clone(),
                    s: it.s.clone(),
                    y: it.y.clone(),
                    u: it.u.clone(),
                },
                Measures { ..meas },
                iter + 1,
            ));
        }
        if ap.max(ad) < 1e-8 || merit > 0.99 * prev_merit && merit < 1e3 * tol {
            stalls += 1;
        } else {
            stalls = 0;
        }
        prev_merit = prev_merit.min(merit);
        if stalls >= 5 {
            return fail(best, finish, it, meas, iter + 1);
        }
    }
    let (meas, ..) = measure(&it);
    if meas.gap <= tol && meas.rel_p <= tol && meas.rel_d <= tol && meas.rel_e <= tol {
        return finish(SolveStatus::Optimal, &it, &meas, opts.max_iterations);
    }
    finish(SolveStatus::MaxIterations, &it, &meas, opts.max_iterations)
}

/// Returns the best iterate seen, flagged as a numerical failure.
fn fail(
    best: Option<(f64, Iterate, Measures, usize)>,
    finish: impl Fn(SolveStatus, &Iterate, &Measures, usize) -> SdpSolution,
    it: Iterate,
    meas: Measures,
    iter: usize,
) -> SdpSolution {
    match best {
        Some((_, bi, bm, _)) => {
            let mut sol = finish(SolveStatus::NumericalFailure, &bi, &bm, iter);
            sol.iterations = iter;
            sol
        }
        None => finish(SolveStatus::NumericalFailure, &it, &meas, iter),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sdp::model::{LinearTerm, Sense};
    use crate::tensor::linalg::{identity, min_eigenvalue, outer};
    use crate::tensor::{c, cr, partial_transpose_matrix, CVec};

    fn bell() -> CMat {
        let s = 0.5f64.sqrt();
        outer(&CVec::from_vec(vec![cr(s), cr(0.0), cr(0.0), cr(s)]))
    }

    /// max Tr(ρσ) over two-qubit PPT states.
    fn ppt_overlap(rho: &CMat, opts: &SolverOptions) -> SdpSolution {
        let mut p = SdpProblem::new(Sense::Maximize);
        let s = p.psd_hermitian("sigma", 4).unwrap();
        p.add_psd(
            4,
            None,
            vec![LinearTerm::new(s).partial_transpose(&[2, 2], &[1])],
        )
        .unwrap();
        p.add_equality(vec![LinearTerm::new(s).trace(4)], identity(1))
            .unwrap();
        p.add_objective(s, rho.clone()).unwrap();
        solve_with(&p, opts).unwrap()
    }

    #[test]
    fn trace_one_maximum() {
        let mut p = SdpProblem::new(Sense::Maximize);
        let x = p.psd_hermitian("x", 3).unwrap();
        p.add_equality(vec![LinearTerm::new(x).trace(3)], identity(1))
            .unwrap();
        p.add_objective(x, identity(3)).unwrap();
        let sol = solve(&p, 1e-9, 100).unwrap();
        assert_eq!(sol.status, SolveStatus::Optimal);
        assert!((sol.objective_value - 1.0).abs() < 1e-8);
    }

    #[test]
    fn bell_ppt_overlap_is_half() {
        let sol = ppt_overlap(&bell(), &SolverOptions::default());
        assert_eq!(sol.status, SolveStatus::Optimal);
        assert!((sol.objective_value - 0.5).abs() < 1e-7);
        assert!(sol.duality_gap <= DEFAULT_TOLERANCE);
        let sigma = &sol.primal_blocks[0];
        assert!(min_eigenvalue(sigma) > -1e-7);
        assert!(min_eigenvalue(&partial_transpose_matrix(sigma, &[2, 2], &[1])) > -1e-7);
    }

    #[test]
    fn embedded_and_real_modes_agree() {
        let real = ppt_overlap(
            &bell(),
            &SolverOptions {
                tolerance: 1e-10,
                ..Default::default()
            },
        );
        let emb = ppt_overlap(
            &bell(),
            &SolverOptions {
                tolerance: 1e-10,
                force_complex: true,
                ..Default::default()
            },
        );
        assert!((real.objective_value - emb.objective_value).abs() < 1e-9);
    }

    #[test]
    fn complex_data_is_handled() {
        // a Bell state with a relative phase has the same PPT overlap
        let s = 0.5f64.sqrt();
        let rho = outer(&CVec::from_vec(vec![cr(s), cr(0.0), cr(0.0), c(0.0, s)]));
        let sol = ppt_overlap(&rho, &SolverOptions::default());
        assert_eq!(sol.status, SolveStatus::Optimal);
        assert!((sol.objective_value - 0.5).abs() < 1e-7);
    }

    #[test]
    fn weak_duality_determinism_and_scaling() {
        let rho = bell() * cr(0.7) + identity(4) * cr(0.3 / 4.0);
        let opts = SolverOptions::default();
        let a = ppt_overlap(&rho, &opts);
        let b = ppt_overlap(&rho, &opts);
        assert!(a.objective_value <= a.dual_value + a.duality_gap);
        assert!((a.objective_value - b.objective_value).abs() <= 2.0 * opts.tolerance);
        let c3 = ppt_overlap(&(rho * cr(3.0)), &opts);
        assert!(
            (c3.objective_value - 3.0 * a.objective_value).abs() <= 10.0 * opts.tolerance * 3.0
        );
    }

    #[test]
    fn inconsistent_equalities_are_infeasible() {
        let mut p = SdpProblem::new(Sense::Maximize);
        let x = p.psd_hermitian("x", 2).unwrap();
        p.add_equality(vec![LinearTerm::new(x).trace(2)], identity(1))
            .unwrap();
        p.add_equality(vec![LinearTerm::new(x).trace(2)], identity(1) * cr(2.0))
            .unwrap();
        p.add_objective(x, identity(2)).unwrap();
        assert_eq!(solve(&p, 1e-8, 50).unwrap().status, SolveStatus::Infeasible);
    }

    #[test]
    fn empty_cone_intersection_is_infeasible() {
        // X ⪰ 0 with Tr X = -1
        let mut p = SdpProblem::new(Sense::Minimize);
        let x = p.psd_hermitian("x", 2).unwrap();
        p.add_equality(vec![LinearTerm::new(x).trace(2)], identity(1) * cr(-1.0))
            .unwrap();
        p.add_objective(x, identity(2)).unwrap();
        let sol = solve(&p, 1e-8, 200).unwrap();
        assert_eq!(sol.status, SolveStatus::Infeasible);
    }

    #[test]
    fn rejects_nonpositive_tolerance() {
        let mut p = SdpProblem::new(Sense::Maximize);
        let x = p.psd_hermitian("x", 2).unwrap();
        p.add_objective(x, identity(2)).unwrap();
        assert!(solve(&p, 0.0, 10).is_err());
    }
}
