//! SDP relaxations of the separable set giving lower bounds.

use std::time::Instant;

use super::{BoundOptions, BoundResult, Certificate, Direction, Method};
use crate::error::{Error, Result};
use crate::sdp::{root_fidelity_block, solve_with, LinearTerm, SdpProblem, Sense, SigmaRef, VarId};
use crate::tensor::linalg::{identity, outer};
use crate::tensor::{partial_trace_matrix, purify, CMat, DensityMatrix};

/// Subsystem sets to partially transpose. Trivial (dimension one) factors
/// are ignored and a transpose is skipped when its complement is already
/// listed, since both have the same spectrum.
pub(crate) fn ppt_sets(dims: &[usize], all_bipartitions: bool) -> Vec<Vec<usize>> {
    let parties: Vec<usize> = (0..dims.len()).filter(|&i| dims[i] > 1).collect();
    let p = parties.len();
    if p < 2 {
        return Vec::new();
    }
    if !all_bipartitions {
        if p == 2 {
            return vec![vec![parties[0]]];
        }
        return parties.iter().map(|&i| vec![i]).collect();
    }
    // one representative per bipartition: subsets avoiding the last party
    let mut out = Vec::new();
    for mask in 1u64..(1u64 << (p - 1)) {
        out.push(
            (0..p - 1)
                .filter(|b| mask >> b & 1 == 1)
                .map(|b| parties[b])
                .collect(),
        );
    }
    out.sort_by_key(|s: &Vec<usize>| (s.len(), s.clone()));
    out
}

fn require_multipartite(rho: &DensityMatrix) -> Result<()> {
    if rho.layout().len() < 2 {
        return Err(Error::usage(format!(
            "a lower bound needs at least two subsystems, layout is {}",
            rho.layout()
        )));
    }
    Ok(())
}

fn add_ppt(p: &mut SdpProblem, x: VarId, dims: &[usize], sets: &[Vec<usize>]) -> Result<()> {
    let n: usize = dims.iter().product();
    for s in sets {
        p.add_psd(n, None, vec![LinearTerm::new(x).partial_transpose(dims, s)])?;
    }
    Ok(())
}

fn unit_trace(p: &mut SdpProblem, x: VarId, n: usize) -> Result<()> {
    p.add_equality(vec![LinearTerm::new(x).trace(n)], identity(1))
}

fn finish(
    method: Method,
    raw: f64,
    sol: &crate::sdp::SdpSolution,
    opts: &BoundOptions,
    certificate: Certificate,
    started: Instant,
) -> BoundResult {
    BoundResult::new(
        method,
        Direction::Lower,
        raw,
        sol.status,
        opts.solver.tolerance,
    )
    .with_certificate(certificate)
    .with_solver_stats(
        sol.iterations,
        sol.duality_gap,
        started.elapsed().as_secs_f64(),
    )
}

/// Fidelity-based bound with a PPT relaxation of the separable set.
pub fn lb_ppt_fidelity_with(rho: &DensityMatrix, opts: &BoundOptions) -> Result<BoundResult> {
    require_multipartite(rho)?;
    let started = Instant::now();
    let dims = rho.layout().dims().to_vec();
    let n = rho.dim();
    let mut p = SdpProblem::new(Sense::Maximize);
    let sigma = p.psd_hermitian("sigma", n)?;
    unit_trace(&mut p, sigma, n)?;
    add_ppt(
        &mut p,
        sigma,
        &dims,
        &ppt_sets(&dims, opts.all_bipartitions),
    )?;
    root_fidelity_block(
        &mut p,
        rho.matrix(),
        SigmaRef::Terms(vec![LinearTerm::new(sigma)]),
    )?;
    let sol = solve_with(&p, &opts.solver)?;
    let t = sol.objective_value;
    let cert = Certificate::default().with("sigma", sol.primal_blocks[sigma.index()].clone());
    Ok(finish(
        Method::PptFidelity,
        1.0 - t * t,
        &sol,
        opts,
        cert,
        started,
    ))
}

/// Layout of the k-extended space and the marginal index sets.
struct Extension {
    dims: Vec<usize>,
    /// Kept subsystems giving the marginal that enters the fidelity.
    reference: Vec<usize>,
    /// Other marginals required to equal the reference one.
    copies: Vec<Vec<usize>>,
    /// Positions of the interchangeable copies when the extension is
    /// symmetric under permuting them (bipartite case).
    exchangeable: Option<Vec<usize>>,
}

fn extension(dims: &[usize], k: usize) -> Extension {
    let m = dims.len();
    if m == 2 {
        let mut ext = vec![dims[0]];
        ext.extend(std::iter::repeat_n(dims[1], k));
        return Extension {
            dims: ext,
            reference: vec![0, 1],
            copies: (2..=k).map(|i| vec![0, i]).collect(),
            exchangeable: Some((1..=k).collect()),
        };
    }
    // A.. B1 C1 B2 C2 ... with k copies of the last factor and max(1, k-1)
    // copies of the second to last
    let a = m - 2;
    let (db, dc) = (dims[m - 2], dims[m - 1]);
    let nb = (k - 1).max(1);
    let mut ext: Vec<usize> = dims[..a].to_vec();
    let mut b_pos = Vec::new();
    let mut c_pos = Vec::new();
    for j in 0..k {
        if j < nb {
            b_pos.push(ext.len());
            ext.push(db);
        }
        c_pos.push(ext.len());
        ext.push(dc);
    }
    let head: Vec<usize> = (0..a).collect();
    let with = |b: usize, c: usize| {
        let mut v = head.clone();
        v.extend([b, c]);
        v
    };
    let mut copies: Vec<Vec<usize>> = (1..k).map(|i| with(b_pos[0], c_pos[i])).collect();
    copies.extend((1..nb).map(|j| with(b_pos[j], c_pos[j])));
    Extension {
        dims: ext,
        reference: with(b_pos[0], c_pos[0]),
        copies,
        exchangeable: None,
    }
}

/// Index permutation of the full space induced by permuting tensor factors:
/// factor `s` of the input becomes factor `perm[s]` of the output.
fn factor_permutation(dims: &[usize], perm: &[usize]) -> Vec<usize> {
    let n: usize = dims.iter().product();
    let strides: Vec<usize> = (0..dims.len())
        .map(|s| dims[s + 1..].iter().product())
        .collect();
    (0..n)
        .map(|idx| {
            let mut out = 0;
            for s in 0..dims.len() {
                let digit = (idx / strides[s]) % dims[s];
                out += digit * strides[perm[s]];
            }
            out
        })
        .collect()
}

/// Fidelity-based bound over states admitting a `k`-extension.
pub fn lb_k_extension_with(
    rho: &DensityMatrix,
    k: usize,
    opts: &BoundOptions,
) -> Result<BoundResult> {
    require_multipartite(rho)?;
    if k == 0 {
        return Err(Error::usage("extension order k must be at least 1"));
    }
    let started = Instant::now();
    let ext = extension(rho.layout().dims(), k);
    let n: usize = ext.dims.iter().product();
    if n > opts.dimension_cap {
        return Err(Error::Capacity {
            required: n,
            cap: opts.dimension_cap,
        });
    }
    let mut p = SdpProblem::new(Sense::Maximize);
    let sigma = p.psd_hermitian("sigma_ext", n)?;
    unit_trace(&mut p, sigma, n)?;
    let reference = LinearTerm::new(sigma).partial_trace(&ext.dims, &ext.reference);
    let q: usize = ext.reference.iter().map(|&s| ext.dims[s]).product();
    for keep in &ext.copies {
        p.add_equality(
            vec![
                reference.clone(),
                LinearTerm::new(sigma)
                    .partial_trace(&ext.dims, keep)
                    .scaled(-1.0),
            ],
            CMat::zeros(q, q),
        )?;
    }
    let mut sets = ppt_sets(&ext.dims, opts.all_bipartitions);
    if let (Some(copies), true) = (&ext.exchangeable, opts.symmetric_extension && k > 1) {
        let m = ext.dims.len();
        let mut swap: Vec<usize> = (0..m).collect();
        swap.swap(copies[0], copies[1]);
        let mut cycle: Vec<usize> = (0..m).collect();
        for (i, &c) in copies.iter().enumerate() {
            cycle[c] = copies[(i + 1) % copies.len()];
        }
        p.set_symmetry(
            sigma,
            vec![
                factor_permutation(&ext.dims, &swap),
                factor_permutation(&ext.dims, &cycle),
            ],
        )?;
        if !opts.all_bipartitions {
            // transposing any copy is equivalent to transposing the first
            sets.retain(|s| s.len() != 1 || s[0] == 0 || s[0] == copies[0]);
        }
    }
    add_ppt(&mut p, sigma, &ext.dims, &sets)?;
    root_fidelity_block(&mut p, rho.matrix(), SigmaRef::Terms(vec![reference]))?;
    let sol = solve_with(&p, &opts.solver)?;
    let t = sol.objective_value;
    let sig = &sol.primal_blocks[sigma.index()];
    let cert = Certificate::default()
        .with(
            "sigma",
            partial_trace_matrix(sig, &ext.dims, &ext.reference),
        )
        .with("sigma_extended", sig.clone());
    Ok(finish(
        Method::KExtension(k),
        1.0 - t * t,
        &sol,
        opts,
        cert,
        started,
    ))
}

/// Shared body of the purification bounds: maximize `Tr(X target)` over
/// `X ⪰ 0` on `dims` with identity marginal on the ancilla (factor 0) and
/// the PPT constraints.
fn purity_problem(
    dims: &[usize],
    target: &CMat,
    opts: &BoundOptions,
) -> Result<(crate::sdp::SdpSolution, VarId)> {
    let n: usize = dims.iter().product();
    let r = dims[0];
    let mut p = SdpProblem::new(Sense::Maximize);
    let x = p.psd_hermitian("x", n)?;
    p.add_equality(
        vec![LinearTerm::new(x).partial_trace(dims, &[0])],
        identity(r),
    )?;
    add_ppt(&mut p, x, dims, &ppt_sets(dims, opts.all_bipartitions))?;
    p.add_objective(x, target.clone())?;
    Ok((solve_with(&p, &opts.solver)?, x))
}

fn purified(rho: &DensityMatrix) -> (Vec<usize>, CMat) {
    let psi = purify(rho);
    (psi.layout().dims().to_vec(), outer(psi.amplitudes()))
}

/// Purification bound on the reduced purified state (last subsystem traced out).
pub fn lb_purity_reduced_with(rho: &DensityMatrix, opts: &BoundOptions) -> Result<BoundResult> {
    require_multipartite(rho)?;
    let started = Instant::now();
    let (dims, proj) = purified(rho);
    let keep: Vec<usize> = (0..dims.len() - 1).collect();
    let reduced = partial_trace_matrix(&proj, &dims, &keep);
    let (sol, x) = purity_problem(&dims[..dims.len() - 1], &reduced, opts)?;
    let cert = Certificate::default().with("x", sol.primal_blocks[x.index()].clone());
    Ok(finish(
        Method::PurityReduced,
        1.0 - sol.objective_value,
        &sol,
        opts,
        cert,
        started,
    ))
}

/// Purification bound on the full purified state.
pub fn lb_purity_full_with(rho: &DensityMatrix, opts: &BoundOptions) -> Result<BoundResult> {
    require_multipartite(rho)?;
    let started = Instant::now();
    let (dims, proj) = purified(rho);
    let (sol, x) = purity_problem(&dims, &proj, opts)?;
    let cert = Certificate::default().with("x", sol.primal_blocks[x.index()].clone());
    Ok(finish(
        Method::PurityFull,
        1.0 - sol.objective_value,
        &sol,
        opts,
        cert,
        started,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ppt_sets_skip_complements_and_trivial_factors() {
        assert_eq!(ppt_sets(&[2, 2], false), vec![vec![0]]);
        assert_eq!(ppt_sets(&[1, 2, 2], false), vec![vec![1]]);
        assert_eq!(ppt_sets(&[2, 2, 2], false), vec![vec![0], vec![1], vec![2]]);
        assert_eq!(
            ppt_sets(&[2, 2, 2], true),
            vec![vec![0], vec![1], vec![0, 1]]
        );
        assert!(ppt_sets(&[1, 3], false).is_empty());
    }

    #[test]
    fn extension_layouts() {
        let e = extension(&[3, 3], 3);
        assert_eq!(e.dims, vec![3, 3, 3, 3]);
        assert_eq!(e.copies, vec![vec![0, 2], vec![0, 3]]);
        let e = extension(&[2, 2, 2], 3);
        // A B1 C1 B2 C2 C3
        assert_eq!(e.dims.len(), 6);
        assert_eq!(e.reference, vec![0, 1, 2]);
        assert_eq!(e.copies, vec![vec![0, 1, 4], vec![0, 1, 5], vec![0, 3, 4]]);
        let e = extension(&[2, 2, 2], 1);
        assert_eq!(e.dims, vec![2, 2, 2]);
        assert!(e.copies.is_empty());
    }

    #[test]
    fn factor_permutation_swaps_digits() {
        // swapping two qubits maps |01> (index 1) to |10> (index 2)
        assert_eq!(factor_permutation(&[2, 2], &[1, 0]), vec![0, 2, 1, 3]);
    }
}
