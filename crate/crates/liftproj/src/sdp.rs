//! Floating-point solver for small dense semidefinite problems.
//!
//! Problems are stated as linear matrix inequalities over free scalar
//! variables: maximize `gᵀy` subject to `F₀ᵇ + Σ_k y_k F_kᵇ ⪰ 0` for
//! every block `b`.  Scalar inequality rows are 1×1 blocks, so a problem
//! with no larger blocks degenerates to a linear program.
//!
//! Feasibility is settled first by maximizing the smallest eigenvalue
//! over all blocks (an auxiliary variable `t` shifted onto every
//! diagonal, capped above so the phase stays bounded).  A clearly
//! positive optimum yields a strictly feasible interior start; a clearly
//! negative one yields a separating certificate `Z ⪰ 0`, `⟨F_k,Z⟩ ≈ 0`,
//! `⟨F₀,Z⟩ < 0` that is re-verified by direct recomputation before
//! "infeasible" is reported.  Anything borderline is reported as a
//! numerical failure, never as a silent answer.  The optimization phase
//! is a short-step path-following iteration on the Schur-complement
//! direction with an adaptive centering weight; slower than a
//! predictor–corrector but far more robust on the tiny, often highly
//! degenerate systems produced here.

use crate::error::{Error, Result};

/// Total matrix dimension accepted by [`sdp_solve`].
pub const SDP_DIM_CAP: usize = 20_000;

/// Feasibility phase threshold: optima within `±FEAS_MARGIN` of zero are
/// reported as numerical failures instead of being classified.
pub const FEAS_MARGIN: f64 = 1e-6;

const PHASE_CAP: f64 = 1.0;
const MAX_ITER: usize = 200;

type Mat = Vec<Vec<f64>>;

/// One linear matrix inequality `F₀ + Σ y_k F_k ⪰ 0`.  `fs` lists only
/// the variables that actually touch the block.
#[derive(Clone)]
pub struct SdpBlock {
    pub dim: usize,
    pub f0: Mat,
    pub fs: Vec<(usize, Mat)>,
}

/// Block-diagonal semidefinite program: maximize `objective · y` over
/// all `y` keeping every block positive semidefinite.
#[derive(Clone)]
pub struct SdpProblem {
    pub n_vars: usize,
    pub blocks: Vec<SdpBlock>,
    pub objective: Vec<f64>,
    pub eps: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SdpStatus {
    Optimal,
    Infeasible,
    NumericalFailure,
}

/// Solver report.  On `Optimal`, `blocks` holds the final block values
/// `F₀ + Σ y_k F_k`, residuals are re-measured from `y` itself, and
/// `min_eig ≥ −ε`.  On `Infeasible`, `blocks` holds the normalized
/// separating certificate and `feas_margin` is negative with magnitude
/// at least the certified infeasibility margin.  `feas_margin` is the
/// optimum of the feasibility phase in every case.
pub struct SdpOutcome {
    pub status: SdpStatus,
    pub value: f64,
    pub y: Vec<f64>,
    pub blocks: Vec<Mat>,
    pub primal_residual: f64,
    pub dual_residual: f64,
    pub min_eig: f64,
    pub feas_margin: f64,
    pub message: String,
}

fn mat_zero(n: usize) -> Mat {
    vec![vec![0.0; n]; n]
}

fn mat_identity(n: usize) -> Mat {
    let mut m = mat_zero(n);
    for i in 0..n {
        m[i][i] = 1.0;
    }
    m
}

fn mat_norm(m: &Mat) -> f64 {
    m.iter()
        .flat_map(|r| r.iter())
        .fold(0.0f64, |acc, v| acc.max(v.abs()))
}

fn mat_inner(a: &Mat, b: &Mat) -> f64 {
    let mut s = 0.0;
    for (ra, rb) in a.iter().zip(b) {
        for (x, y) in ra.iter().zip(rb) {
            s += x * y;
        }
    }
    s
}

fn mat_mul(a: &Mat, b: &Mat) -> Mat {
    let n = a.len();
    let m = b[0].len();
    let inner = b.len();
    let mut out = vec![vec![0.0; m]; n];
    for i in 0..n {
        for k in 0..inner {
            let aik = a[i][k];
            if aik == 0.0 {
                continue;
            }
            for j in 0..m {
                out[i][j] += aik * b[k][j];
            }
        }
    }
    out
}

fn mat_symmetrize(m: &mut Mat) {
    let n = m.len();
    for i in 0..n {
        for j in (i + 1)..n {
            let v = 0.5 * (m[i][j] + m[j][i]);
            m[i][j] = v;
            m[j][i] = v;
        }
    }
}

fn check_symmetric(m: &Mat) -> Result<()> {
    let n = m.len();
    for row in m {
        if row.len() != n {
            return Err(Error::Dimension("matrix is not square".into()));
        }
    }
    let scale = mat_norm(m).max(1.0);
    for i in 0..n {
        for j in (i + 1)..n {
            if (m[i][j] - m[j][i]).abs() > 1e-12 * scale {
                return Err(Error::Dimension(format!(
                    "matrix not symmetric at ({i},{j})"
                )));
            }
        }
    }
    Ok(())
}

/// Lower Cholesky factor, or `None` when the matrix is not numerically
/// positive definite.
fn cholesky(m: &Mat) -> Option<Mat> {
    let n = m.len();
    let mut l = mat_zero(n);
    for i in 0..n {
        for j in 0..=i {
            let mut s = m[i][j];
            for k in 0..j {
                s -= l[i][k] * l[j][k];
            }
            if i == j {
                if s <= 0.0 {
                    return None;
                }
                l[i][j] = s.sqrt();
            } else {
                l[i][j] = s / l[j][j];
            }
        }
    }
    Some(l)
}

/// Solves `L z = b` in place.
fn forward_sub(l: &Mat, b: &mut [f64]) {
    for i in 0..b.len() {
        let mut s = b[i];
        for k in 0..i {
            s -= l[i][k] * b[k];
        }
        b[i] = s / l[i][i];
    }
}

/// Solves `Lᵀ z = b` in place.
fn backward_sub(l: &Mat, b: &mut [f64]) {
    let n = b.len();
    for i in (0..n).rev() {
        let mut s = b[i];
        for k in (i + 1)..n {
            s -= l[k][i] * b[k];
        }
        b[i] = s / l[i][i];
    }
}

/// `S⁻¹ B` column by column given the Cholesky factor of `S`.
fn chol_solve_mat(l: &Mat, b: &Mat) -> Mat {
    let n = l.len();
    let cols = b[0].len();
    let mut out = vec![vec![0.0; cols]; n];
    let mut col = vec![0.0; n];
    for j in 0..cols {
        for i in 0..n {
            col[i] = b[i][j];
        }
        forward_sub(l, &mut col);
        backward_sub(l, &mut col);
        for i in 0..n {
            out[i][j] = col[i];
        }
    }
    out
}

/// Largest step `α` keeping `M + α Δ ⪰ (1−τ) λ`-safe, computed from the
/// smallest eigenvalue of `L⁻¹ Δ L⁻ᵀ` where `M = L Lᵀ`.
fn max_step(l: &Mat, delta: &Mat, tau: f64) -> f64 {
    let n = l.len();
    if n == 1 {
        let w = delta[0][0] / (l[0][0] * l[0][0]);
        return if w >= 0.0 { 1.0 } else { (-tau / w).min(1.0) };
    }
    // W = L⁻¹ Δ L⁻ᵀ: solve L X = Δ, then W = X L⁻ᵀ i.e. Lᵀ-solve rows.
    let mut w = delta.clone();
    for j in 0..n {
        let mut col: Vec<f64> = (0..n).map(|i| w[i][j]).collect();
        forward_sub(l, &mut col);
        for i in 0..n {
            w[i][j] = col[i];
        }
    }
    for row in w.iter_mut() {
        forward_sub(l, row);
    }
    mat_symmetrize(&mut w);
    let (vals, _) = jacobi_eigen(&w);
    let lo = vals.iter().cloned().fold(f64::INFINITY, f64::min);
    if lo >= 0.0 {
        1.0
    } else {
        (-tau / lo).min(1.0)
    }
}

/// Cyclic Jacobi eigendecomposition of a symmetric matrix; returns
/// (eigenvalues, eigenvector columns), unsorted.
fn jacobi_eigen(m: &Mat) -> (Vec<f64>, Mat) {
    let n = m.len();
    let mut a = m.clone();
    let mut v = mat_identity(n);
    let scale = mat_norm(&a).max(f64::MIN_POSITIVE);
    for _sweep in 0..60 {
        let mut off = 0.0f64;
        for i in 0..n {
            for j in (i + 1)..n {
                off = off.max(a[i][j].abs());
            }
        }
        if off <= 1e-14 * scale {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                if a[p][q].abs() <= 1e-300 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k][p];
                    let akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p][k];
                    let aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
                for k in 0..n {
                    let vkp = v[k][p];
                    let vkq = v[k][q];
                    v[k][p] = c * vkp - s * vkq;
                    v[k][q] = s * vkp + c * vkq;
                }
            }
        }
    }
    ((0..n).map(|i| a[i][i]).collect(), v)
}

/// Sorted eigenvalues of a symmetric matrix (ascending), with every
/// residual `‖Mv − λv‖ ≤ 10⁻⁹‖M‖` guaranteed by the Jacobi sweep
/// threshold.  Rejects non-symmetric input.
pub fn eigen_sym(m: &Mat) -> Result<Vec<f64>> {
    check_symmetric(m)?;
    let (mut vals, _) = jacobi_eigen(m);
    vals.sort_by(|a, b| a.partial_cmp(b).expect("eigenvalue NaN"));
    Ok(vals)
}

fn min_eig(m: &Mat) -> f64 {
    let (vals, _) = jacobi_eigen(m);
    vals.into_iter().fold(f64::INFINITY, f64::min)
}

/// Assembled block value `F₀ + Σ y_k F_k`.
fn block_value(b: &SdpBlock, y: &[f64]) -> Mat {
    let mut s = b.f0.clone();
    for (k, fk) in &b.fs {
        let yk = y[*k];
        if yk == 0.0 {
            continue;
        }
        for i in 0..b.dim {
            for j in 0..b.dim {
                s[i][j] += yk * fk[i][j];
            }
        }
    }
    s
}

struct IpmResult {
    y: Vec<f64>,
    xs: Vec<Mat>,
    mu: f64,
    dual_residual: f64,
    converged: bool,
    message: String,
}

/// Dual-feasible short-step centering iteration.  `y0` must make every
/// block strictly positive definite; `xs` starts at the identity.
fn ipm(blocks: &[SdpBlock], g: &[f64], y0: &[f64], eps: f64) -> IpmResult {
    let n_vars = g.len();
    let total_dim: usize = blocks.iter().map(|b| b.dim).sum();
    let gscale = 1.0 + g.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let mut y = y0.to_vec();
    let mut xs: Vec<Mat> = blocks.iter().map(|b| mat_identity(b.dim)).collect();
    let mut stall = 0usize;
    let mut prev_mu = f64::INFINITY;
    let mut sigma = 0.3f64;

    for iter in 0..MAX_ITER {
        let svals: Vec<Mat> = blocks.iter().map(|b| block_value(b, &y)).collect();
        let mut chols = Vec::with_capacity(blocks.len());
        for s in &svals {
            match cholesky(s) {
                Some(l) => chols.push(l),
                None => {
                    return IpmResult {
                        y,
                        xs,
                        mu: prev_mu,
                        dual_residual: f64::INFINITY,
                        converged: false,
                        message: format!("interior lost at iteration {iter}"),
                    }
                }
            }
        }

        let mu = svals
            .iter()
            .zip(&xs)
            .map(|(s, x)| mat_inner(s, x))
            .sum::<f64>()
            / total_dim as f64;

        // Dual equality residual r_k = −g_k − Σ_b ⟨F_k, X_b⟩.
        let mut r = vec![0.0; n_vars];
        for (b, x) in blocks.iter().zip(&xs) {
            for (k, fk) in &b.fs {
                r[*k] -= mat_inner(fk, x);
            }
        }
        for k in 0..n_vars {
            r[k] -= g[k];
        }
        let rnorm = r.iter().fold(0.0f64, |a, v| a.max(v.abs())) / gscale;

        if std::env::var("SDP_TRACE").is_ok() {
            eprintln!(
                "it {iter}: mu={mu:.3e} rnorm={rnorm:.3e} y={:?} trX={:.6}",
                &y,
                xs.iter().map(|x| (0..x.len()).map(|i| x[i][i]).sum::<f64>()).sum::<f64>()
            );
        }
        if mu <= eps && rnorm <= eps {
            return IpmResult {
                y,
                xs,
                mu,
                dual_residual: rnorm,
                converged: true,
                message: format!("converged in {iter} iterations"),
            };
        }
        if mu > 0.97 * prev_mu {
            stall += 1;
            if stall > 12 {
                return IpmResult {
                    y,
                    xs,
                    mu,
                    dual_residual: rnorm,
                    converged: false,
                    message: format!("stalled at μ = {mu:.3e} after {iter} iterations"),
                };
            }
        } else {
            stall = 0;
        }
        prev_mu = mu;
        let objv = y.iter().zip(g).map(|(a, b)| a * b).sum::<f64>();
        if objv.abs() > 1e10 {
            return IpmResult {
                y,
                xs,
                mu,
                dual_residual: rnorm,
                converged: false,
                message: "objective diverging (problem appears unbounded)".into(),
            };
        }

        // Schur complement B_kl = Σ_b tr(S⁻¹ F_k X F_l) and a_k = tr(S⁻¹ F_k).
        let mut schur = vec![vec![0.0; n_vars]; n_vars];
        let mut avec = vec![0.0; n_vars];
        // Per block, cache P_k = S⁻¹ F_k X for its variable list.
        let mut pmats: Vec<Vec<(usize, Mat)>> = Vec::with_capacity(blocks.len());
        for ((b, x), l) in blocks.iter().zip(&xs).zip(&chols) {
            let mut local = Vec::with_capacity(b.fs.len());
            for (k, fk) in &b.fs {
                let fx = mat_mul(fk, x);
                let p = chol_solve_mat(l, &fx);
                let sinv_f = chol_solve_mat(l, fk);
                avec[*k] += (0..b.dim).map(|i| sinv_f[i][i]).sum::<f64>();
                local.push((*k, p));
            }
            for (idx_a, (k, p)) in local.iter().enumerate() {
                for (l_idx, fl) in b.fs.iter().take(idx_a + 1) {
                    // tr(P F_l) with F_l symmetric.
                    let mut t = 0.0;
                    for i in 0..b.dim {
                        for j in 0..b.dim {
                            t += p[i][j] * fl[j][i];
                        }
                    }
                    schur[*k][*l_idx] += t;
                    if k != l_idx {
                        schur[*l_idx][*k] += t;
                    }
                }
            }
            pmats.push(local);
        }
        for i in 0..n_vars {
            for j in (i + 1)..n_vars {
                let v = 0.5 * (schur[i][j] + schur[j][i]);
                schur[i][j] = v;
                schur[j][i] = v;
            }
        }
        let schur_chol = {
            let mut ridge = 0.0;
            let base: f64 = (0..n_vars).map(|i| schur[i][i]).sum::<f64>() / n_vars.max(1) as f64;
            loop {
                let mut m = schur.clone();
                for i in 0..n_vars {
                    m[i][i] += ridge;
                }
                if let Some(l) = cholesky(&m) {
                    break l;
                }
                ridge = if ridge == 0.0 {
                    1e-14 * base.max(1e-30)
                } else {
                    ridge * 100.0
                };
                if ridge > base.max(1.0) {
                    return IpmResult {
                        y,
                        xs,
                        mu,
                        dual_residual: rnorm,
                        converged: false,
                        message: "Schur complement numerically singular".into(),
                    };
                }
            }
        };

        // Centering direction for the current σ: B Δy = g + σμ a,
        // ΔX = σμ S⁻¹ − X − Σ Δy_k S⁻¹ F_k X.
        let mut rhs = vec![0.0; n_vars];
        for k in 0..n_vars {
            rhs[k] = g[k] + sigma * mu * avec[k];
        }
        forward_sub(&schur_chol, &mut rhs);
        backward_sub(&schur_chol, &mut rhs);
        let dy = rhs;
        let ds: Vec<Mat> = blocks
            .iter()
            .map(|b| {
                let mut m = mat_zero(b.dim);
                for (k, fk) in &b.fs {
                    let c = dy[*k];
                    if c == 0.0 {
                        continue;
                    }
                    for i in 0..b.dim {
                        for j in 0..b.dim {
                            m[i][j] += c * fk[i][j];
                        }
                    }
                }
                m
            })
            .collect();
        let dx: Vec<Mat> = blocks
            .iter()
            .enumerate()
            .map(|(bi, b)| {
                let sinv = chol_solve_mat(&chols[bi], &mat_identity(b.dim));
                let mut m = mat_zero(b.dim);
                for i in 0..b.dim {
                    for j in 0..b.dim {
                        m[i][j] = sigma * mu * sinv[i][j] - xs[bi][i][j];
                    }
                }
                for (k, p) in &pmats[bi] {
                    let c = dy[*k];
                    if c == 0.0 {
                        continue;
                    }
                    for i in 0..b.dim {
                        for j in 0..b.dim {
                            m[i][j] -= c * p[i][j];
                        }
                    }
                }
                mat_symmetrize(&mut m);
                m
            })
            .collect();

        let tau = 0.95;
        let mut step_d = 1.0f64;
        let mut step_p = 1.0f64;
        for (bi, _) in blocks.iter().enumerate() {
            step_d = step_d.min(max_step(&chols[bi], &ds[bi], tau));
            match cholesky(&xs[bi]) {
                Some(lx) => step_p = step_p.min(max_step(&lx, &dx[bi], tau)),
                None => {
                    return IpmResult {
                        y,
                        xs,
                        mu,
                        dual_residual: rnorm,
                        converged: false,
                        message: format!("multiplier lost definiteness at iteration {iter}"),
                    }
                }
            }
        }
        for k in 0..n_vars {
            y[k] += step_d * dy[k];
        }
        for (bi, b) in blocks.iter().enumerate() {
            for i in 0..b.dim {
                for j in 0..b.dim {
                    xs[bi][i][j] += step_p * dx[bi][i][j];
                }
            }
        }
        // Short steps mean the barrier is fighting the boundary: center
        // harder next round.  Full steps let σ relax toward a faster
        // reduction.
        let worst = step_d.min(step_p);
        if worst < 0.2 {
            sigma = (sigma + 1.0) * 0.5;
        } else if worst > 0.9 {
            sigma = (sigma * 0.6).max(0.05);
        }
    }
    IpmResult {
        y,
        xs,
        mu: prev_mu,
        dual_residual: f64::INFINITY,
        converged: false,
        message: format!("iteration limit {MAX_ITER} reached"),
    }
}

fn validate(p: &SdpProblem) -> Result<()> {
    if p.eps <= 0.0 {
        return Err(Error::Domain("tolerance must be positive".into()));
    }
    if p.objective.len() != p.n_vars {
        return Err(Error::Dimension("objective length ≠ n_vars".into()));
    }
    let total: usize = p.blocks.iter().map(|b| b.dim).sum();
    if total > SDP_DIM_CAP {
        return Err(Error::Guard(format!(
            "total block dimension {total} exceeds cap {SDP_DIM_CAP}"
        )));
    }
    for (bi, b) in p.blocks.iter().enumerate() {
        if b.f0.len() != b.dim {
            return Err(Error::Dimension(format!("block {bi}: f0 dimension mismatch")));
        }
        check_symmetric(&b.f0)?;
        for (k, fk) in &b.fs {
            if *k >= p.n_vars {
                return Err(Error::Dimension(format!(
                    "block {bi}: variable index {k} out of range"
                )));
            }
            if fk.len() != b.dim {
                return Err(Error::Dimension(format!(
                    "block {bi}: coefficient dimension mismatch"
                )));
            }
            check_symmetric(fk)?;
        }
    }
    Ok(())
}

/// Two-phase solve: feasibility classification, then optimization from
/// the strictly feasible start.  Inconclusive numerics surface as
/// `NumericalFailure` with a diagnostic message.
pub fn sdp_solve(p: &SdpProblem) -> Result<SdpOutcome> {
    validate(p)?;
    let n = p.n_vars;

    // Phase A: maximize t subject to F(y) − tI ⪰ 0 and t ≤ PHASE_CAP.
    let mut a_blocks: Vec<SdpBlock> = p
        .blocks
        .iter()
        .map(|b| {
            let mut fs = b.fs.clone();
            let mut shift = mat_zero(b.dim);
            for i in 0..b.dim {
                shift[i][i] = -1.0;
            }
            fs.push((n, shift));
            SdpBlock { dim: b.dim, f0: b.f0.clone(), fs }
        })
        .collect();
    a_blocks.push(SdpBlock {
        dim: 1,
        f0: vec![vec![PHASE_CAP]],
        fs: vec![(n, vec![vec![-1.0]])],
    });
    let mut g_a = vec![0.0; n + 1];
    g_a[n] = 1.0;
    let t0 = p
        .blocks
        .iter()
        .map(|b| min_eig(&b.f0))
        .fold(PHASE_CAP, f64::min)
        - 1.0;
    let mut y0 = vec![0.0; n + 1];
    y0[n] = t0;
    let phase_a = ipm(&a_blocks, &g_a, &y0, p.eps.max(1e-9));
    if !phase_a.converged {
        return Ok(SdpOutcome {
            status: SdpStatus::NumericalFailure,
            value: f64::NAN,
            y: phase_a.y[..n].to_vec(),
            blocks: Vec::new(),
            primal_residual: f64::NAN,
            dual_residual: phase_a.dual_residual,
            min_eig: f64::NAN,
            feas_margin: f64::NAN,
            message: format!("feasibility phase: {}", phase_a.message),
        });
    }
    let t_star = phase_a.y[n];

    if t_star < -FEAS_MARGIN {
        // Certificate: Z = X (original blocks), normalized to trace one,
        // re-verified from scratch.
        let traces: f64 = phase_a.xs[..p.blocks.len()]
            .iter()
            .map(|x| (0..x.len()).map(|i| x[i][i]).sum::<f64>())
            .sum();
        let zs: Vec<Mat> = phase_a.xs[..p.blocks.len()]
            .iter()
            .map(|x| {
                x.iter()
                    .map(|r| r.iter().map(|v| v / traces).collect())
                    .collect()
            })
            .collect();
        let c0: f64 = p
            .blocks
            .iter()
            .zip(&zs)
            .map(|(b, z)| mat_inner(&b.f0, z))
            .sum();
        let mut eq_err = 0.0f64;
        let mut contrib = vec![0.0; n];
        for (b, z) in p.blocks.iter().zip(&zs) {
            for (k, fk) in &b.fs {
                contrib[*k] += mat_inner(fk, z);
            }
        }
        for c in &contrib {
            eq_err = eq_err.max(c.abs());
        }
        let z_eig = zs.iter().map(|z| min_eig(z)).fold(f64::INFINITY, f64::min);
        if c0 < -FEAS_MARGIN && eq_err < 1e-6 && z_eig > -1e-9 {
            return Ok(SdpOutcome {
                status: SdpStatus::Infeasible,
                value: f64::NAN,
                y: Vec::new(),
                blocks: zs,
                primal_residual: eq_err,
                dual_residual: phase_a.dual_residual,
                min_eig: z_eig,
                feas_margin: t_star,
                message: format!(
                    "infeasible: certificate pairing {c0:.3e}, equation error {eq_err:.1e}"
                ),
            });
        }
        return Ok(SdpOutcome {
            status: SdpStatus::NumericalFailure,
            value: f64::NAN,
            y: Vec::new(),
            blocks: zs,
            primal_residual: eq_err,
            dual_residual: phase_a.dual_residual,
            min_eig: z_eig,
            feas_margin: t_star,
            message: format!(
                "apparent infeasibility (t* = {t_star:.3e}) but certificate failed \
                 re-verification (pairing {c0:.3e}, equation error {eq_err:.1e})"
            ),
        });
    }
    if t_star <= FEAS_MARGIN {
        return Ok(SdpOutcome {
            status: SdpStatus::NumericalFailure,
            value: f64::NAN,
            y: phase_a.y[..n].to_vec(),
            blocks: Vec::new(),
            primal_residual: f64::NAN,
            dual_residual: phase_a.dual_residual,
            min_eig: t_star,
            feas_margin: t_star,
            message: format!(
                "feasibility phase inconclusive: best eigenvalue margin {t_star:.3e}"
            ),
        });
    }

    // Phase B from the strictly feasible interior point.
    let y_start = phase_a.y[..n].to_vec();
    let res = ipm(&p.blocks, &p.objective, &y_start, p.eps);
    let final_blocks: Vec<Mat> = p.blocks.iter().map(|b| block_value(b, &res.y)).collect();
    let margin = final_blocks
        .iter()
        .map(|s| min_eig(s))
        .fold(f64::INFINITY, f64::min);
    let value = res.y.iter().zip(&p.objective).map(|(a, b)| a * b).sum::<f64>();
    // Residuals re-measured from the returned point, not the iteration.
    let mut r = vec![0.0; n];
    for (b, x) in p.blocks.iter().zip(&res.xs) {
        for (k, fk) in &b.fs {
            r[*k] -= mat_inner(fk, x);
        }
    }
    for k in 0..n {
        r[k] -= p.objective[k];
    }
    let gscale = 1.0 + p.objective.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let dual_residual = r.iter().fold(0.0f64, |a, v| a.max(v.abs())) / gscale;
    let primal_residual = res.mu;
    if !res.converged || margin < -p.eps || dual_residual > 10.0 * p.eps {
        return Ok(SdpOutcome {
            status: SdpStatus::NumericalFailure,
            value,
            y: res.y,
            blocks: final_blocks,
            primal_residual,
            dual_residual,
            min_eig: margin,
            feas_margin: t_star,
            message: format!("optimization phase: {}", res.message),
        });
    }
    Ok(SdpOutcome {
        status: SdpStatus::Optimal,
        value,
        y: res.y,
        blocks: final_blocks,
        primal_residual,
        dual_residual,
        min_eig: margin,
        feas_margin: t_star,
        message: res.message,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lp::{self, LinearProgram, LpRow, LpSolution, Sense};
    use crate::rational::Rational;

    fn diag(entries: &[f64]) -> Mat {
        let n = entries.len();
        let mut m = mat_zero(n);
        for i in 0..n {
            m[i][i] = entries[i];
        }
        m
    }

    /// Five-dimensional moment-style matrix: unit corner, 1/3 first row
    /// and column, 1/3 diagonal, zero elsewhere.
    fn third_matrix() -> Mat {
        let mut m = mat_zero(5);
        m[0][0] = 1.0;
        for i in 1..5 {
            m[0][i] = 1.0 / 3.0;
            m[i][0] = 1.0 / 3.0;
            m[i][i] = 1.0 / 3.0;
        }
        m
    }

    #[test]
    fn eigenvalues_of_simple_matrices() {
        let vals = eigen_sym(&mat_identity(4)).unwrap();
        for v in &vals {
            assert!((v - 1.0).abs() < 1e-12);
        }
        let vals = eigen_sym(&diag(&[3.0, 1.0, 0.0])).unwrap();
        assert!((vals[0] - 0.0).abs() < 1e-12);
        assert!((vals[1] - 1.0).abs() < 1e-12);
        assert!((vals[2] - 3.0).abs() < 1e-12);

        // Residual bound on a dense matrix.
        let m = vec![
            vec![2.0, -1.0, 0.5, 0.0],
            vec![-1.0, 3.0, 0.25, -0.5],
            vec![0.5, 0.25, 1.0, 2.0],
            vec![0.0, -0.5, 2.0, -1.0],
        ];
        let (vals, vecs) = jacobi_eigen(&m);
        let norm = mat_norm(&m);
        for (idx, lam) in vals.iter().enumerate() {
            let v: Vec<f64> = (0..4).map(|i| vecs[i][idx]).collect();
            let mut res = 0.0f64;
            for i in 0..4 {
                let mut mv = 0.0;
                for j in 0..4 {
                    mv += m[i][j] * v[j];
                }
                res = res.max((mv - lam * v[i]).abs());
            }
            assert!(res <= 1e-9 * norm, "residual {res} too large");
        }

        let mut bad = mat_identity(2);
        bad[0][1] = 0.5;
        assert!(eigen_sym(&bad).is_err());
    }

    #[test]
    fn third_matrix_is_indefinite() {
        let vals = eigen_sym(&third_matrix()).unwrap();
        let expected = (2.0 - 5.0f64.sqrt()) / 3.0;
        assert!((vals[0] - expected).abs() < 1e-9);
        assert!(vals[0] < 0.0);
    }

    #[test]
    fn shifted_identity_maximum() {
        // max t with Diag(1,1) − tI ⪰ 0: optimum 1.
        let p = SdpProblem {
            n_vars: 1,
            blocks: vec![SdpBlock {
                dim: 2,
                f0: mat_identity(2),
                fs: vec![(0, diag(&[-1.0, -1.0]))],
            }],
            objective: vec![1.0],
            eps: 1e-8,
        };
        let out = sdp_solve(&p).unwrap();
        assert_eq!(out.status, SdpStatus::Optimal, "{}", out.message);
        assert!((out.value - 1.0).abs() < 1e-6, "value {}", out.value);
    }

    #[test]
    fn fixed_indefinite_block_is_infeasible() {
        // No variables: feasibility of a constant indefinite block.
        let p = SdpProblem {
            n_vars: 0,
            blocks: vec![SdpBlock { dim: 5, f0: third_matrix(), fs: vec![] }],
            objective: vec![],
            eps: 1e-8,
        };
        let out = sdp_solve(&p).unwrap();
        assert_eq!(out.status, SdpStatus::Infeasible);
        assert!(out.feas_margin < -1e-6);
        let expected = (2.0 - 5.0f64.sqrt()) / 3.0;
        assert!((out.feas_margin - expected).abs() < 1e-5);
    }

    #[test]
    fn degenerates_to_linear_programming() {
        // 20 seeded random LPs, compared against the exact simplex.
        let mut state = 0x5eed_c0de_u64;
        let mut rng = move || {
            state = state
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            ((state >> 33) % 13) as i64 - 6
        };
        for inst in 0..20 {
            let n = 3;
            let mut rows_f: Vec<(Vec<f64>, f64)> = Vec::new();
            let mut rows_q: Vec<LpRow> = Vec::new();
            // Box 0 ≤ y_i ≤ 2 keeps every instance bounded and feasible.
            for i in 0..n {
                let mut a = vec![0.0; n];
                a[i] = 1.0;
                rows_f.push((a.clone(), 0.0));
                let mut aq = crate::linalg::zeros(n);
                aq[i] = Rational::one();
                rows_q.push(LpRow::ge(aq, Rational::zero()));
                let mut b = vec![0.0; n];
                b[i] = -1.0;
                rows_f.push((b, 2.0));
                let mut bq = crate::linalg::zeros(n);
                bq[i] = -Rational::one();
                rows_q.push(LpRow::ge(bq, Rational::new(-2, 1)));
            }
            for _ in 0..4 {
                let coeffs: Vec<i64> = (0..n).map(|_| rng()).collect();
                let rhs = -(rng().abs() + 1);
                rows_f.push((coeffs.iter().map(|&c| c as f64).collect(), -rhs as f64));
                rows_q.push(LpRow::ge(
                    crate::linalg::rvec_from_i64(&coeffs),
                    Rational::int(rhs),
                ));
            }
            let obj_i: Vec<i64> = (0..n).map(|_| rng()).collect();
            let p = SdpProblem {
                n_vars: n,
                blocks: rows_f
                    .iter()
                    .map(|(a, shift)| SdpBlock {
                        dim: 1,
                        f0: vec![vec![*shift]],
                        fs: a
                            .iter()
                            .enumerate()
                            .filter(|(_, c)| **c != 0.0)
                            .map(|(k, c)| (k, vec![vec![*c]]))
                            .collect(),
                    })
                    .collect(),
                objective: obj_i.iter().map(|&c| c as f64).collect(),
                eps: 1e-9,
            };
            let mut lp = LinearProgram::new(n, Sense::Max, crate::linalg::rvec_from_i64(&obj_i));
            lp.rows = rows_q;
            let exact = lp::solve(&lp).unwrap();
            let exact_value = match &exact {
                LpSolution::Optimal { value, .. } => value.to_f64(),
                other => panic!("instance {inst}: unexpected exact outcome {other:?}"),
            };
            let out = sdp_solve(&p).unwrap();
            assert_eq!(out.status, SdpStatus::Optimal, "instance {inst}: {}", out.message);
            assert!(
                (out.value - exact_value).abs() <= 1e-6,
                "instance {inst}: interior {} vs exact {exact_value}",
                out.value
            );
        }
    }

    #[test]
    fn optimal_outcomes_report_consistent_residuals() {
        // Recompute residuals from the reported solution and compare.
        let p = SdpProblem {
            n_vars: 2,
            blocks: vec![
                SdpBlock {
                    dim: 2,
                    f0: vec![vec![2.0, 0.3], vec![0.3, 1.5]],
                    fs: vec![
                        (0, vec![vec![-1.0, 0.0], vec![0.0, 0.0]]),
                        (1, vec![vec![0.0, -0.2], vec![-0.2, -1.0]]),
                    ],
                },
                SdpBlock {
                    dim: 1,
                    f0: vec![vec![3.0]],
                    fs: vec![(0, vec![vec![-1.0]]), (1, vec![vec![-0.5]])],
                },
            ],
            objective: vec![1.0, 0.7],
            eps: 1e-8,
        };
        let out = sdp_solve(&p).unwrap();
        assert_eq!(out.status, SdpStatus::Optimal);
        assert!(out.min_eig >= -1e-8);
        assert!(out.primal_residual <= 1e-8 && out.dual_residual <= 1e-8);
        // Block values really are F₀ + Σ y_k F_k at the reported y.
        for (b, reported) in p.blocks.iter().zip(&out.blocks) {
            let rebuilt = block_value(b, &out.y);
            for i in 0..b.dim {
                for j in 0..b.dim {
                    assert!((rebuilt[i][j] - reported[i][j]).abs() < 1e-12);
                }
            }
            let eigs = eigen_sym(&rebuilt).unwrap();
            assert!(eigs[0] >= -10.0 * 1e-8);
        }
    }

    #[test]
    fn guards_and_validation() {
        let bad = SdpProblem {
            n_vars: 1,
            blocks: vec![SdpBlock { dim: 1, f0: vec![vec![1.0]], fs: vec![(3, vec![vec![1.0]])] }],
            objective: vec![1.0],
            eps: 1e-8,
        };
        assert!(matches!(sdp_solve(&bad), Err(Error::Dimension(_))));
        let bad_eps = SdpProblem {
            n_vars: 0,
            blocks: vec![],
            objective: vec![],
            eps: 0.0,
        };
        assert!(matches!(sdp_solve(&bad_eps), Err(Error::Domain(_))));
    }
}
