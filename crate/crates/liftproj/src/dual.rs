//! Dual-side description of the lifted operators.
//!
//! The lifted set at level one is the intersection of a dual matrix
//! cone with the diagonal-tie subspace: a symmetric matrix `Y` is a
//! valid lift precisely when `diag(Y) = Ye₀` and `Y` pairs
//! nonnegatively with every generator `uvᵀ + vuᵀ`, `u` ranging over
//! the box facet normals `e_i, e₀−e_i` and `v` over the rows of the
//! cone.  This module builds those generator lists (together with the
//! orthogonal complement of the tie subspace), decides exact
//! membership in the generated cone by linear programming, extracts
//! exact separating functionals from Farkas certificates, and checks
//! the skew-symmetric criterion under which the unsymmetrized operator
//! collapses onto the symmetric one.

use crate::cone::HCone;
use crate::error::{Error, Result};
use crate::linalg::{self, RMat, RVec, SymMat};
use crate::lp::{self, LinearProgram, LpRow, LpSolution, Sense};
use crate::rational::Rational;
use crate::sdp::{sdp_solve, SdpBlock, SdpProblem, SdpStatus};

/// Which matrix space the generators live in.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GenVariant {
    /// Symmetrized products `uvᵀ + vuᵀ`; dual cone cut with symmetric
    /// matrices tied by `diag(Y) = Ye₀`.
    Symmetric,
    /// Plain products `uvᵀ` in the full matrix space; the tie subspace
    /// additionally matches `Yᵀe₀` with the diagonal.
    Nonsymmetric,
}

/// Generators of the matrix cone plus a basis of the tie-subspace
/// complement.  Cone members are nonnegative combinations of `cone`
/// plus arbitrary combinations of `subspace`.
pub struct MatrixConeGens {
    pub variant: GenVariant,
    pub d: usize,
    pub cone: Vec<RMat>,
    pub subspace: Vec<RMat>,
}

fn unit(n: usize, i: usize) -> RVec {
    let mut v = linalg::zeros(n);
    v[i] = Rational::one();
    v
}

fn outer_mat(u: &[Rational], v: &[Rational]) -> RMat {
    let n = u.len();
    let mut m = RMat::zero(n, n);
    for i in 0..n {
        if u[i].is_zero() {
            continue;
        }
        for j in 0..n {
            if !v[j].is_zero() {
                m.set(i, j, &u[i] * &v[j]);
            }
        }
    }
    m
}

fn add_mat(a: &RMat, b: &RMat) -> RMat {
    let mut m = RMat::zero(a.nrows(), a.ncols());
    for i in 0..a.nrows() {
        for j in 0..a.ncols() {
            m.set(i, j, a.get(i, j) + b.get(i, j));
        }
    }
    m
}

fn sub_mat(a: &RMat, b: &RMat) -> RMat {
    let mut m = RMat::zero(a.nrows(), a.ncols());
    for i in 0..a.nrows() {
        for j in 0..a.ncols() {
            m.set(i, j, a.get(i, j) - b.get(i, j));
        }
    }
    m
}

fn transpose(a: &RMat) -> RMat {
    let mut m = RMat::zero(a.ncols(), a.nrows());
    for i in 0..a.nrows() {
        for j in 0..a.ncols() {
            m.set(j, i, a.get(i, j).clone());
        }
    }
    m
}

/// Trace inner product `Σ_ij A_ij B_ij`.
pub fn trace_inner(a: &RMat, b: &RMat) -> Rational {
    let mut acc = Rational::zero();
    for i in 0..a.nrows() {
        acc += linalg::dot(a.row(i), b.row(i));
    }
    acc
}

fn sym_to_mat(y: &SymMat) -> RMat {
    let n = y.n();
    let mut m = RMat::zero(n, n);
    for i in 0..n {
        for j in 0..n {
            m.set(i, j, y.get(i, j).clone());
        }
    }
    m
}

/// Enumerates the cone generators `u vᵀ (+ v uᵀ)` for `u` over the box
/// facet normals and `v` over the rows of `K`, plus the basis of the
/// tie-subspace complement.  The row list is used as stored
/// (canonicalized and deduplicated); the generator list itself keeps
/// one entry per `(u, v)` pair.
pub fn build_gens(k: &HCone, variant: GenVariant) -> MatrixConeGens {
    let d = k.d();
    let n = d + 1;
    let mut us = Vec::with_capacity(2 * d);
    for i in 1..=d {
        us.push(unit(n, i));
        let mut c = unit(n, 0);
        c[i] = -Rational::one();
        us.push(c);
    }
    let mut cone = Vec::with_capacity(2 * d * k.rows().len());
    for u in &us {
        for v in k.rows() {
            let uv = outer_mat(u, v);
            cone.push(match variant {
                GenVariant::Symmetric => add_mat(&uv, &transpose(&uv)),
                GenVariant::Nonsymmetric => uv,
            });
        }
    }
    let mut subspace = Vec::new();
    for i in 1..=d {
        let eii = outer_mat(&unit(n, i), &unit(n, i));
        let e0i = outer_mat(&unit(n, 0), &unit(n, i));
        match variant {
            GenVariant::Symmetric => {
                // E_ii − E_0i with E_ab = e_a e_bᵀ + e_b e_aᵀ
                let tie = sub_mat(
                    &add_mat(&eii, &eii),
                    &add_mat(&e0i, &transpose(&e0i)),
                );
                subspace.push(tie);
            }
            GenVariant::Nonsymmetric => {
                subspace.push(sub_mat(&eii, &e0i));
                subspace.push(sub_mat(&eii, &transpose(&e0i)));
            }
        }
    }
    MatrixConeGens { variant, d, cone, subspace }
}

/// Outcome of the generated-cone membership test.
pub enum GenConeMembership {
    /// Exact nonnegative coefficients over `cone` followed by free
    /// coefficients over `subspace`, recombining to the queried matrix.
    In { coefficients: RVec },
    /// Exact separating functional: pairs nonnegatively with every cone
    /// generator, annihilates the subspace, and is negative against the
    /// queried matrix.
    Out { separating: RMat },
}

impl GenConeMembership {
    pub fn is_in(&self) -> bool {
        matches!(self, GenConeMembership::In { .. })
    }
}

/// Decides `S ∈ cone{generators} + span{subspace}` by an exact
/// entrywise linear program.  For the symmetric variant only the upper
/// triangle is matched (everything in sight is symmetric); the
/// nonsymmetric variant matches all entries.
pub fn gen_cone_member(k: &HCone, s: &RMat, variant: GenVariant) -> Result<GenConeMembership> {
    let d = k.d();
    let n = d + 1;
    if s.nrows() != n || s.ncols() != n {
        return Err(Error::Dimension(format!(
            "matrix is {}×{}, want {n}×{n}",
            s.nrows(),
            s.ncols()
        )));
    }
    if matches!(variant, GenVariant::Symmetric) {
        for i in 0..n {
            for j in (i + 1)..n {
                if s.get(i, j) != s.get(j, i) {
                    return Err(Error::Domain(
                        "symmetric variant needs a symmetric matrix".into(),
                    ));
                }
            }
        }
    }
    let gens = build_gens(k, variant);
    let n_cone = gens.cone.len();
    let n_vars = n_cone + gens.subspace.len();
    let mut entries = Vec::new();
    for i in 0..n {
        for j in 0..n {
            if matches!(variant, GenVariant::Nonsymmetric) || j >= i {
                entries.push((i, j));
            }
        }
    }
    let mut rows = Vec::with_capacity(entries.len() + n_cone);
    for &(i, j) in &entries {
        let mut coeffs = linalg::zeros(n_vars);
        for (v, g) in gens.cone.iter().chain(gens.subspace.iter()).enumerate() {
            coeffs[v] = g.get(i, j).clone();
        }
        rows.push(LpRow::eq(coeffs, s.get(i, j).clone()));
    }
    for v in 0..n_cone {
        rows.push(LpRow::ge(unit(n_vars, v), Rational::zero()));
    }
    let lp = LinearProgram { n_vars, rows, objective: linalg::zeros(n_vars), sense: Sense::Max };
    match lp::solve(&lp)? {
        LpSolution::Optimal { point, .. } => {
            let mut recombined = RMat::zero(n, n);
            for (v, g) in gens.cone.iter().chain(gens.subspace.iter()).enumerate() {
                if !point[v].is_zero() {
                    for i in 0..n {
                        for j in 0..n {
                            let acc = recombined.get(i, j) + &(g.get(i, j) * &point[v]);
                            recombined.set(i, j, acc);
                        }
                    }
                }
            }
            for &(i, j) in &entries {
                if recombined.get(i, j) != s.get(i, j) {
                    return Err(Error::Numerical("recombination mismatch".into()));
                }
            }
            Ok(GenConeMembership::In { coefficients: point })
        }
        LpSolution::Infeasible { farkas } => {
            let mut w = RMat::zero(n, n);
            for (pos, &(i, j)) in entries.iter().enumerate() {
                let nu = &farkas[pos];
                if matches!(variant, GenVariant::Symmetric) && i != j {
                    let hv = -&(nu / &Rational::int(2));
                    w.set(i, j, hv.clone());
                    w.set(j, i, hv);
                } else {
                    w.set(i, j, -nu);
                }
            }
            for g in &gens.cone {
                if trace_inner(&w, g).is_negative() {
                    return Err(Error::Numerical("separator fails a cone generator".into()));
                }
            }
            for b in &gens.subspace {
                if !trace_inner(&w, b).is_zero() {
                    return Err(Error::Numerical("separator touches the subspace".into()));
                }
            }
            if !trace_inner(&w, s).is_negative() {
                return Err(Error::Numerical("separator not negative on the query".into()));
            }
            Ok(GenConeMembership::Out { separating: w })
        }
        LpSolution::Unbounded { .. } => {
            Err(Error::Numerical("feasibility program cannot be unbounded".into()))
        }
    }
}

/// Dual-side test for a valid level-one lift: `diag(Y) = Ye₀` and
/// `⟨Y, G⟩ ≥ 0` for every symmetric cone generator.  Exact, and
/// equivalent to the primal column conditions.
pub fn dual_member(k: &HCone, y: &SymMat) -> bool {
    let d = k.d();
    if y.n() != d + 1 {
        return false;
    }
    for i in 1..=d {
        if y.get(0, i) != y.get(i, i) {
            return false;
        }
    }
    let ym = sym_to_mat(y);
    let gens = build_gens(k, GenVariant::Symmetric);
    gens.cone.iter().all(|g| !trace_inner(&ym, g).is_negative())
}

/// Outcome of the skew-generator criterion.
#[derive(Debug)]
pub enum SkewCheck {
    Holds,
    Fails { i: usize, j: usize },
}

impl SkewCheck {
    pub fn holds(&self) -> bool {
        matches!(self, SkewCheck::Holds)
    }
}

/// Checks that every elementary skew-symmetric matrix
/// `e_i e_jᵀ − e_j e_iᵀ` (both orientations) lies in the nonsymmetric
/// generated cone plus its tie-subspace complement.  When the check
/// holds, the unsymmetrized and symmetric operators agree at every
/// level.
pub fn skew_check(k: &HCone) -> Result<SkewCheck> {
    let d = k.d();
    let n = d + 1;
    for i in 1..=d {
        for j in 1..=d {
            if i == j {
                continue;
            }
            let s = sub_mat(
                &outer_mat(&unit(n, i), &unit(n, j)),
                &outer_mat(&unit(n, j), &unit(n, i)),
            );
            if !gen_cone_member(k, &s, GenVariant::Nonsymmetric)?.is_in() {
                return Ok(SkewCheck::Fails { i, j });
            }
        }
    }
    Ok(SkewCheck::Holds)
}

/// Exact test `Diag(s) ∈ cone{generators} + span{subspace}` for the
/// symmetric variant; `s` has length `d+1`.
pub fn diag_in_gen_cone(k: &HCone, s: &[Rational]) -> Result<bool> {
    let n = k.d() + 1;
    if s.len() != n {
        return Err(Error::Dimension(format!("vector length {}, want {n}", s.len())));
    }
    let mut m = RMat::zero(n, n);
    for (i, v) in s.iter().enumerate() {
        m.set(i, i, v.clone());
    }
    Ok(gen_cone_member(k, &m, GenVariant::Symmetric)?.is_in())
}

/// Verdict for the semidefinite-augmented diagonal test; `margin` is
/// the solver's interior or separation margin.
#[derive(Debug)]
pub enum ShiftedDiagVerdict {
    Holds { margin: f64 },
    Fails { margin: f64 },
}

/// Numerical test `Diag(s) ∈ cone{generators} + span{subspace} + PSD`:
/// feasibility of `Diag(s) − Σ λ_k G_k − Σ μ_l B_l ⪰ 0, λ ≥ 0`.
/// Decided to solver tolerance only — borderline instances surface as
/// errors, never as silent verdicts.
pub fn diag_in_gen_cone_psd(k: &HCone, s: &[Rational]) -> Result<ShiftedDiagVerdict> {
    let n = k.d() + 1;
    if s.len() != n {
        return Err(Error::Dimension(format!("vector length {}, want {n}", s.len())));
    }
    let gens = build_gens(k, GenVariant::Symmetric);
    let n_cone = gens.cone.len();
    let n_vars = n_cone + gens.subspace.len();
    let mut f0 = vec![vec![0.0; n]; n];
    for (i, v) in s.iter().enumerate() {
        f0[i][i] = v.to_f64();
    }
    let mut fs = Vec::with_capacity(n_vars);
    for (v, g) in gens.cone.iter().chain(gens.subspace.iter()).enumerate() {
        let mut m = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in 0..n {
                m[i][j] = -g.get(i, j).to_f64();
            }
        }
        fs.push((v, m));
    }
    let mut blocks = vec![SdpBlock { dim: n, f0, fs }];
    for v in 0..n_cone {
        blocks.push(SdpBlock {
            dim: 1,
            f0: vec![vec![0.0]],
            fs: vec![(v, vec![vec![1.0]])],
        });
    }
    let problem = SdpProblem {
        n_vars,
        blocks,
        objective: vec![0.0; n_vars],
        eps: crate::nplus::solver_eps(),
    };
    let out = sdp_solve(&problem)?;
    match out.status {
        SdpStatus::Optimal => Ok(ShiftedDiagVerdict::Holds { margin: out.feas_margin }),
        SdpStatus::Infeasible => Ok(ShiftedDiagVerdict::Fails { margin: -out.feas_margin }),
        SdpStatus::NumericalFailure => Err(Error::Numerical(format!(
            "diagonal decomposition borderline: {}",
            out.message
        ))),
    }
}
