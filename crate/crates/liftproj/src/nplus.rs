//! The semidefinite strengthening of the lift-and-project operator.
//!
//! The lifted tree from [`crate::lifted`] already encodes every matrix
//! entry as a linear expression over shared parameters; here each
//! square node becomes a positive-semidefinite block and each leaf
//! membership row a scalar inequality, giving one block-diagonal
//! semidefinite program per query.  Every square node carries a PSD
//! block — the recursion is semidefinite all the way down, not a mixed
//! hybrid.
//!
//! Alongside the solver-backed queries, this module holds the exact
//! certificate machinery: the replacement construction
//! `Y(x) = (1,x)(1,x)ᵀ + Diag(0, x−x²)` with its hypothesis check, the
//! general certificate verifier (exact LDLᵀ or floating eigenvalue
//! margin), the coordinate-zeroing polyhedral characterization with its
//! face-shift hypothesis, and the subset-enumeration rank certifier.

use crate::cone::{self, FaceSpec, HCone};
use crate::error::{Error, Result};
use crate::lifted::{build_lifted, LiftedSystem, LinExpr, OpKind};
use crate::linalg::{self, ldlt_psd_check, PsdCheck, RVec, SymMat};
use crate::lp::{self, LinearProgram, LpRow, LpSolution, Sense};
use crate::rational::Rational;
use crate::sdp::{eigen_sym, sdp_solve, SdpBlock, SdpOutcome, SdpProblem, SdpStatus};
use std::collections::BTreeMap;

/// Default solver tolerance for the semidefinite queries.
pub const DEFAULT_EPS: f64 = 1e-8;

pub(crate) fn solver_eps() -> f64 {
    crate::knobs::env_f64("LIFTPROJ_SDP_EPS", DEFAULT_EPS)
}

/// Tolerances accepted in floating verification mode.
const FLOAT_TOL: f64 = 1e-8;

/// A membership certificate for the lifted cone: a symmetric matrix
/// whose diagonal, columns and complement columns witness the operator
/// conditions against the stored base cone.
#[derive(Clone)]
pub struct MPlusCertificate {
    pub y: SymMat,
    pub cone: HCone,
}

impl MPlusCertificate {
    /// Text form: a `psd` tag, the dimension, then the matrix rows.
    pub fn render(&self) -> String {
        let n = self.y.n();
        let mut s = format!("psd\nd {}\n", n - 1);
        for i in 0..n {
            let line: Vec<String> = (0..n).map(|j| self.y.get(i, j).to_string()).collect();
            s.push_str(&line.join(" "));
            s.push('\n');
        }
        s
    }
}

/// Parses the matrix block of [`MPlusCertificate::render`]; verification
/// against a cone happens separately via [`verify_mplus`].
pub fn parse_psd_certificate(text: &str) -> Result<SymMat> {
    let mut lines = text.lines().map(|l| l.trim()).filter(|l| !l.is_empty());
    match lines.next() {
        Some("psd") => {}
        other => {
            return Err(Error::Parse(format!(
                "expected 'psd' tag, found '{}'",
                other.unwrap_or("")
            )))
        }
    }
    let d: usize = lines
        .next()
        .and_then(|l| l.strip_prefix("d "))
        .and_then(|v| v.trim().parse().ok())
        .ok_or_else(|| Error::Parse("expected 'd <dim>' after the tag".into()))?;
    let mut rows = Vec::with_capacity(d + 1);
    for _ in 0..=d {
        let line = lines
            .next()
            .ok_or_else(|| Error::Parse("certificate matrix truncated".into()))?;
        let row: crate::linalg::RVec = line
            .split_whitespace()
            .map(std::str::FromStr::from_str)
            .collect::<Result<_>>()?;
        rows.push(row);
    }
    SymMat::from_rows(rows)
}

/// Outcome of the replacement construction.
pub enum ReplacementOutcome {
    Certificate(MPlusCertificate),
    /// The coordinate whose replacement left the polytope.
    HypothesisViolated { j: usize },
}

/// Which certificate condition failed.
#[derive(Clone, Debug)]
pub enum MPlusViolation {
    DiagMismatch { i: usize },
    ColumnOutside { i: usize },
    ComplementOutside { i: usize },
    /// Exact mode: a rational vector with negative quadratic form.
    NotPsd { witness: RVec, form: Rational },
    /// Floating mode: smallest eigenvalue below the margin.
    EigenvalueBelow { min_eig: f64 },
}

pub enum MPlusCheck {
    Valid,
    Violated(MPlusViolation),
}

impl MPlusCheck {
    pub fn is_valid(&self) -> bool {
        matches!(self, MPlusCheck::Valid)
    }
}

/// Optimization outcome over a semidefinite relaxation level.
#[derive(Debug)]
pub enum PlusOutcome {
    Value(f64),
    Empty { margin: f64 },
}

/// Feasibility outcome; `margin` is the interior eigenvalue slack for
/// nonempty systems and the certified separation for empty ones.
#[derive(Debug)]
pub enum Feasibility {
    Nonempty { margin: f64 },
    Empty { margin: f64 },
}

/// Rank certification outcome; failures name the offending index set.
#[derive(Debug)]
pub enum RankCertify {
    Certified,
    NotCertified { face: Vec<usize> },
}

/// Exact linear-equality eliminator.  Each pivot maps a parameter to a
/// combination of strictly smaller free parameters; `empty` records
/// that the equalities contradict (so the feasible set is empty).
struct Presolve {
    pivots: BTreeMap<usize, LinExpr>,
    empty: bool,
}

impl Presolve {
    fn new() -> Presolve {
        Presolve { pivots: BTreeMap::new(), empty: false }
    }

    /// Substitutes every pivot into `e`.  Pivot expressions never
    /// mention pivot parameters, so one pass suffices.
    fn reduce(&self, e: &LinExpr) -> LinExpr {
        let mut out = e.clone();
        for (p, sub) in self.pivots.iter().rev() {
            let c = out.coeff(*p);
            if !c.is_zero() {
                out = out.add_scaled(&sub.sub(&LinExpr::param(*p)), &c);
            }
        }
        out
    }

    /// Records `e = 0`.  Returns true when a new pivot was created.
    /// An equality touching only parameter 0 (the pinned normalization)
    /// is a contradiction: the feasible set is empty.
    fn add_equality(&mut self, e: &LinExpr) -> bool {
        let r = self.reduce(e);
        if r.is_zero() {
            return false;
        }
        let (p, c) = {
            let t = r.terms().last().expect("nonzero expression has terms");
            (t.0, t.1.clone())
        };
        if p == 0 {
            self.empty = true;
            return false;
        }
        let rest = r.add_scaled(&LinExpr::param(p), &-&c);
        let sub = rest.scaled(&(&-Rational::one() / &c));
        let updated: Vec<(usize, LinExpr)> = self
            .pivots
            .iter()
            .filter(|(_, s)| !s.coeff(p).is_zero())
            .map(|(q, s)| {
                let cc = s.coeff(p);
                (*q, s.add_scaled(&sub.sub(&LinExpr::param(p)), &cc))
            })
            .collect();
        for (q, s) in updated {
            self.pivots.insert(q, s);
        }
        self.pivots.insert(p, sub);
        true
    }
}

/// Sign-normalized rendering used to match a row against its negation.
fn canonical_row(e: &LinExpr) -> (String, bool) {
    let lead = &e.terms()[0].1;
    let positive = lead.is_positive();
    let scale = &Rational::one() / lead;
    let norm = e.scaled(&scale);
    let key = norm
        .terms()
        .iter()
        .map(|(p, c)| format!("{p}:{c}"))
        .collect::<Vec<_>>()
        .join(",");
    (key, positive)
}

/// Extracts every equality implied by the lifted structure:
/// - a square node whose diagonal entry vanishes identically has the
///   whole row forced to zero by positive semidefiniteness;
/// - a leaf vector whose first entry vanishes lies in the cone's apex
///   (all cones here carry box rows), so every entry is forced to zero;
/// - a row appearing with both orientations is forced to zero.
/// Substituting one equality can expose more, so iterate to fixpoint.
fn structural_fixpoint(sys: &LiftedSystem, pre: &mut Presolve) {
    let dim = sys.d + 1;
    loop {
        if pre.empty {
            return;
        }
        let mut changed = false;
        for node in &sys.nodes {
            if node.grid.len() == dim {
                for i in 0..dim {
                    if pre.reduce(&node.grid[i][i]).is_zero() {
                        for j in 0..dim {
                            changed |= pre.add_equality(&node.grid[i][j]);
                        }
                    }
                }
            } else if pre.reduce(&node.grid[0][0]).is_zero() {
                for e in &node.grid[0] {
                    changed |= pre.add_equality(e);
                }
            }
        }
        let mut groups: BTreeMap<String, (bool, bool, LinExpr)> = BTreeMap::new();
        for row in &sys.rows {
            let r = pre.reduce(row);
            if r.is_zero() {
                continue;
            }
            if r.terms().len() == 1 && r.terms()[0].0 == 0 {
                if r.terms()[0].1.is_negative() {
                    pre.empty = true;
                    return;
                }
                continue;
            }
            let (key, positive) = canonical_row(&r);
            let entry = groups.entry(key).or_insert((false, false, r));
            if positive {
                entry.0 = true;
            } else {
                entry.1 = true;
            }
        }
        for (_, (pos, neg, expr)) in groups {
            if pos && neg {
                changed |= pre.add_equality(&expr);
            }
        }
        if !changed {
            return;
        }
    }
}

/// Reduced row echelon form over the rationals; returns the nonzero
/// rows, which form a basis of the row space.
fn rref_rows(mut rows: Vec<RVec>, ncols: usize) -> Vec<RVec> {
    let mut rank = 0;
    for col in 0..ncols {
        let Some(pivot) = (rank..rows.len()).find(|&i| !rows[i][col].is_zero()) else {
            continue;
        };
        rows.swap(rank, pivot);
        let inv = &Rational::one() / &rows[rank][col].clone();
        for v in rows[rank].iter_mut() {
            *v = &*v * &inv;
        }
        let lead = rows[rank].clone();
        for (i, row) in rows.iter_mut().enumerate() {
            if i != rank && !row[col].is_zero() {
                let f = row[col].clone();
                for (v, l) in row.iter_mut().zip(&lead) {
                    *v = &*v - &(&f * l);
                }
            }
        }
        rank += 1;
        if rank == rows.len() {
            break;
        }
    }
    rows.truncate(rank);
    rows
}

/// Quotients a symmetric expression matrix by its constant null space
/// (directions annihilated identically, whatever the parameters), which
/// the equality presolve leaves behind as duplicated or zeroed rows.
/// Returns `None` when the matrix vanishes entirely.
fn quotient_block(grid: &[Vec<LinExpr>]) -> Option<Vec<Vec<LinExpr>>> {
    let dim = grid.len();
    let mut stacked: Vec<RVec> = Vec::new();
    for row in grid {
        let mut per_param: BTreeMap<usize, RVec> = BTreeMap::new();
        for (j, e) in row.iter().enumerate() {
            for (p, c) in e.terms() {
                per_param.entry(*p).or_insert_with(|| linalg::zeros(dim))[j] = c.clone();
            }
        }
        stacked.extend(per_param.into_values());
    }
    let basis = rref_rows(stacked, dim);
    if basis.is_empty() {
        return None;
    }
    if basis.len() == dim {
        return Some(grid.to_vec());
    }
    let k = basis.len();
    let mut half = vec![vec![LinExpr::zero(); dim]; k];
    for (t, b) in basis.iter().enumerate() {
        for j in 0..dim {
            for (i, bi) in b.iter().enumerate() {
                if !bi.is_zero() {
                    half[t][j] = half[t][j].add_scaled(&grid[i][j], bi);
                }
            }
        }
    }
    let mut out = vec![vec![LinExpr::zero(); k]; k];
    for t in 0..k {
        for (u, b) in basis.iter().enumerate() {
            for (j, bj) in b.iter().enumerate() {
                if !bj.is_zero() {
                    out[t][u] = out[t][u].add_scaled(&half[t][j], bj);
                }
            }
        }
    }
    Some(out)
}

struct Prepared {
    problem: SdpProblem,
    constant: f64,
    /// Reduced membership rows, kept for the equality net.
    rows: Vec<LinExpr>,
    empty: bool,
}

fn expr_block(e: &LinExpr, var_of: &BTreeMap<usize, usize>) -> SdpBlock {
    let mut f0 = 0.0;
    let mut fs = Vec::new();
    for (p, c) in e.terms() {
        if *p == 0 {
            f0 = c.to_f64();
        } else {
            fs.push((var_of[p], vec![vec![c.to_f64()]]));
        }
    }
    SdpBlock { dim: 1, f0: vec![vec![f0]], fs }
}

/// Builds the block-diagonal semidefinite problem from the reduced
/// lifted system.  Parameter 0 is pinned to 1, remaining free
/// parameters become solver variables; returns the problem together
/// with the objective's constant term.
fn prepare(
    sys: &LiftedSystem,
    pre: &mut Presolve,
    objective: Option<&[Rational]>,
) -> Prepared {
    structural_fixpoint(sys, pre);
    let nothing = || Prepared {
        problem: SdpProblem { n_vars: 0, blocks: Vec::new(), objective: Vec::new(), eps: solver_eps() },
        constant: 0.0,
        rows: Vec::new(),
        empty: true,
    };
    if pre.empty {
        return nothing();
    }
    let var_of: BTreeMap<usize, usize> = (1..sys.n_params)
        .filter(|p| !pre.pivots.contains_key(p))
        .enumerate()
        .map(|(v, p)| (p, v))
        .collect();
    let n_vars = var_of.len();
    let dim = sys.d + 1;
    let mut blocks = Vec::new();
    for node in &sys.nodes {
        if node.grid.len() != dim {
            continue; // leaf vector: its memberships live in `rows`
        }
        let reduced: Vec<Vec<LinExpr>> = node
            .grid
            .iter()
            .map(|row| row.iter().map(|e| pre.reduce(e)).collect())
            .collect();
        let Some(quot) = quotient_block(&reduced) else {
            continue;
        };
        let bdim = quot.len();
        let mut f0 = vec![vec![0.0; bdim]; bdim];
        let mut per_var: BTreeMap<usize, Vec<Vec<f64>>> = BTreeMap::new();
        for (i, row) in quot.iter().enumerate() {
            for (j, e) in row.iter().enumerate() {
                for (p, c) in e.terms() {
                    let cf = c.to_f64();
                    if *p == 0 {
                        f0[i][j] += cf;
                    } else {
                        per_var
                            .entry(var_of[p])
                            .or_insert_with(|| vec![vec![0.0; bdim]; bdim])[i][j] += cf;
                    }
                }
            }
        }
        blocks.push(SdpBlock { dim: bdim, f0, fs: per_var.into_iter().collect() });
    }
    let mut rows_out = Vec::new();
    for row in &sys.rows {
        let r = pre.reduce(row);
        if r.is_zero() {
            continue;
        }
        if r.terms().len() == 1 && r.terms()[0].0 == 0 {
            if r.terms()[0].1.is_negative() {
                return nothing();
            }
            continue; // positive constant: always satisfied
        }
        blocks.push(expr_block(&r, &var_of));
        rows_out.push(r);
    }
    let mut g = vec![0.0; n_vars];
    let mut constant = 0.0;
    if let Some(c) = objective {
        let mut obj = LinExpr::zero();
        for (p, cp) in c.iter().enumerate() {
            obj = obj.add_scaled(&LinExpr::param(p), cp);
        }
        let obj = pre.reduce(&obj);
        for (p, cp) in obj.terms() {
            if *p == 0 {
                constant = cp.to_f64();
            } else {
                g[var_of[p]] = cp.to_f64();
            }
        }
    }
    Prepared {
        problem: SdpProblem { n_vars, blocks, objective: g, eps: solver_eps() },
        constant,
        rows: rows_out,
        empty: false,
    }
}

enum NetOutcome {
    Progress,
    NoProgress,
    Empty,
}

/// Last-resort equality extraction when the solver reports a borderline
/// interior: maximize the common slack `t` of all membership rows with
/// an exact simplex solve.  A zero optimum comes with a dual
/// certificate whose support names rows that vanish on the whole
/// feasible set; a negative one proves the rows inconsistent.
fn equality_net(rows: &[LinExpr], pre: &mut Presolve) -> Result<NetOutcome> {
    if rows.is_empty() {
        return Ok(NetOutcome::NoProgress);
    }
    let mut params: Vec<usize> = rows
        .iter()
        .flat_map(|r| r.terms().iter().map(|(p, _)| *p))
        .filter(|p| *p != 0)
        .collect();
    params.sort_unstable();
    params.dedup();
    let var_of: BTreeMap<usize, usize> =
        params.iter().enumerate().map(|(v, p)| (*p, v)).collect();
    let n = params.len();
    let mut lp_rows = Vec::with_capacity(rows.len() + 1);
    for r in rows {
        let mut coeffs = linalg::zeros(n + 1);
        let mut rhs = Rational::zero();
        for (p, c) in r.terms() {
            if *p == 0 {
                rhs = -c;
            } else {
                coeffs[var_of[p]] = c.clone();
            }
        }
        coeffs[n] = Rational::int(-1);
        lp_rows.push(LpRow::ge(coeffs, rhs));
    }
    let mut cap = linalg::zeros(n + 1);
    cap[n] = Rational::int(-1);
    lp_rows.push(LpRow::ge(cap, Rational::int(-1)));
    let mut objective = linalg::zeros(n + 1);
    objective[n] = Rational::one();
    let mut lp = LinearProgram::new(n + 1, Sense::Max, objective);
    lp.rows = lp_rows;
    match lp::solve(&lp)? {
        LpSolution::Optimal { value, dual, .. } => {
            if value.is_positive() {
                return Ok(NetOutcome::NoProgress);
            }
            if value.is_negative() || !dual[rows.len()].is_zero() {
                return Ok(NetOutcome::Empty);
            }
            let mut progress = false;
            for (r, y) in rows.iter().zip(&dual) {
                if !y.is_zero() {
                    progress |= pre.add_equality(r);
                }
            }
            if pre.empty {
                return Ok(NetOutcome::Empty);
            }
            Ok(if progress { NetOutcome::Progress } else { NetOutcome::NoProgress })
        }
        _ => Err(Error::Numerical("slack maximization cannot be unbounded".into())),
    }
}

enum LiftedSolve {
    Outcome(Box<SdpOutcome>, f64),
    ForcedEmpty,
    /// Exact reduction verified every constraint and fixed the objective.
    Trivial(f64),
}

fn solve_lifted(
    k: &HCone,
    r: usize,
    objective: Option<&[Rational]>,
    pin: Option<&[Rational]>,
) -> Result<LiftedSolve> {
    let sys = build_lifted(k, r, OpKind::NPlus)?;
    let mut pre = Presolve::new();
    if let Some(x) = pin {
        // Pin the root column to the queried slice point: x_i = (x_i/x₀)·x₀.
        for i in 1..=k.d() {
            let e = LinExpr::param(i)
                .add_scaled(&LinExpr::param(0), &-&(&x[i] / &x[0]));
            pre.add_equality(&e);
        }
        if pre.empty {
            return Ok(LiftedSolve::ForcedEmpty);
        }
    }
    let mut rounds = 0;
    loop {
        let prep = prepare(&sys, &mut pre, objective);
        if prep.empty {
            return Ok(LiftedSolve::ForcedEmpty);
        }
        if prep.problem.n_vars == 0 && prep.problem.blocks.is_empty() {
            return Ok(LiftedSolve::Trivial(prep.constant));
        }
        let out = sdp_solve(&prep.problem)?;
        if matches!(out.status, SdpStatus::NumericalFailure) && rounds < 32 {
            rounds += 1;
            match equality_net(&prep.rows, &mut pre)? {
                NetOutcome::Progress => continue,
                NetOutcome::Empty => return Ok(LiftedSolve::ForcedEmpty),
                NetOutcome::NoProgress => {}
            }
        }
        return Ok(LiftedSolve::Outcome(Box::new(out), prep.constant));
    }
}

/// Maximizes `cᵀx` over the level-`r` semidefinite relaxation slice.
/// `c` has length `d+1` (homogenizing coordinate first).  Emptiness
/// proven during exact reduction reports a unit margin.
pub fn nplus_optimize(k: &HCone, r: usize, c: &[Rational]) -> Result<PlusOutcome> {
    if c.len() != k.d() + 1 {
        return Err(Error::Dimension(format!(
            "objective length {}, want {}",
            c.len(),
            k.d() + 1
        )));
    }
    match solve_lifted(k, r, Some(c), None)? {
        LiftedSolve::ForcedEmpty => Ok(PlusOutcome::Empty { margin: 1.0 }),
        LiftedSolve::Trivial(constant) => Ok(PlusOutcome::Value(constant)),
        LiftedSolve::Outcome(out, constant) => match out.status {
            SdpStatus::Optimal => Ok(PlusOutcome::Value(out.value + constant)),
            SdpStatus::Infeasible => Ok(PlusOutcome::Empty { margin: -out.feas_margin }),
            SdpStatus::NumericalFailure => Err(Error::Numerical(format!(
                "semidefinite optimization inconclusive: {}",
                out.message
            ))),
        },
    }
}

/// Decides emptiness of the level-`r` semidefinite relaxation slice.
/// Empty verdicts carry a certificate margin of at least 10⁻⁶ (or unit
/// margin when proven during exact reduction); anything weaker surfaces
/// as an error rather than a silent answer.
pub fn nplus_feasible(k: &HCone, r: usize) -> Result<Feasibility> {
    match solve_lifted(k, r, None, None)? {
        LiftedSolve::ForcedEmpty => Ok(Feasibility::Empty { margin: 1.0 }),
        LiftedSolve::Trivial(_) => Ok(Feasibility::Nonempty { margin: 1.0 }),
        LiftedSolve::Outcome(out, _) => match out.status {
            SdpStatus::Optimal => Ok(Feasibility::Nonempty { margin: out.feas_margin }),
            SdpStatus::Infeasible => Ok(Feasibility::Empty { margin: -out.feas_margin }),
            SdpStatus::NumericalFailure => Err(Error::Numerical(format!(
                "semidefinite feasibility inconclusive: {}",
                out.message
            ))),
        },
    }
}

/// Decides membership of a homogeneous point (positive first coordinate)
/// in the level-`r` semidefinite relaxation by pinning the root column
/// and testing feasibility of what remains.  Verdicts carry the same
/// margins as [`nplus_feasible`].
pub fn nplus_member(k: &HCone, r: usize, x: &[Rational]) -> Result<Feasibility> {
    if x.len() != k.d() + 1 {
        return Err(Error::Dimension(format!(
            "point length {}, want {}",
            x.len(),
            k.d() + 1
        )));
    }
    if !x[0].is_positive() {
        return Err(Error::Domain(
            "membership queries need a positive homogenizing coordinate".into(),
        ));
    }
    match solve_lifted(k, r, None, Some(x))? {
        LiftedSolve::ForcedEmpty => Ok(Feasibility::Empty { margin: 1.0 }),
        LiftedSolve::Trivial(_) => Ok(Feasibility::Nonempty { margin: 1.0 }),
        LiftedSolve::Outcome(out, _) => match out.status {
            SdpStatus::Optimal => Ok(Feasibility::Nonempty { margin: out.feas_margin }),
            SdpStatus::Infeasible => Ok(Feasibility::Empty { margin: -out.feas_margin }),
            SdpStatus::NumericalFailure => Err(Error::Numerical(format!(
                "semidefinite membership inconclusive: {}",
                out.message
            ))),
        },
    }
}

fn homogeneous_point(x: &[Rational]) -> RVec {
    let mut h = Vec::with_capacity(x.len() + 1);
    h.push(Rational::one());
    h.extend(x.iter().cloned());
    h
}

/// Builds the exact replacement certificate for a point of the slice:
/// checks that every coordinate strictly between 0 and 1 can be pushed
/// to both 0 and 1 without leaving the polytope, then assembles
/// `Y(x) = (1,x)(1,x)ᵀ + Diag(0, x−x²)` and re-verifies every
/// certificate condition exactly.
pub fn replacement_certificate(p: &HCone, x: &[Rational]) -> Result<ReplacementOutcome> {
    let d = p.d();
    if x.len() != d {
        return Err(Error::Dimension(format!("point length {}, want {d}", x.len())));
    }
    if !p.slice_member(&homogeneous_point(x)) {
        return Err(Error::Domain("point is not in the polytope".into()));
    }
    for j in 1..=d {
        let xj = &x[j - 1];
        if xj.is_positive() && xj < &Rational::one() {
            let mut lowered = x.to_vec();
            lowered[j - 1] = Rational::zero();
            let mut raised = x.to_vec();
            raised[j - 1] = Rational::one();
            if !p.slice_member(&homogeneous_point(&lowered))
                || !p.slice_member(&homogeneous_point(&raised))
            {
                return Ok(ReplacementOutcome::HypothesisViolated { j });
            }
        }
    }
    let h = homogeneous_point(x);
    let mut y = SymMat::outer(&h);
    for i in 1..=d {
        let slack = &x[i - 1] - &(&x[i - 1] * &x[i - 1]);
        let v = y.get(i, i) + &slack;
        y.set(i, i, v);
    }
    let cert = MPlusCertificate { y, cone: p.clone() };
    match verify_mplus(p, &cert.y, true)? {
        MPlusCheck::Valid => Ok(ReplacementOutcome::Certificate(cert)),
        MPlusCheck::Violated(v) => Err(Error::Numerical(format!(
            "constructed certificate failed verification: {v:?}"
        ))),
    }
}

/// Verifies the three certificate conditions of a symmetric matrix
/// against the base cone: diagonal equals the first column, every
/// column and complement column lies in the cone, and the matrix is
/// positive semidefinite.  Exact mode uses rational elimination; float
/// mode tolerates `10⁻⁸` discrepancies and tests eigenvalues instead.
pub fn verify_mplus(k: &HCone, y: &SymMat, exact: bool) -> Result<MPlusCheck> {
    let d = k.d();
    if y.n() != d + 1 {
        return Err(Error::Dimension(format!("matrix size {}, want {}", y.n(), d + 1)));
    }
    let scale = {
        let mut m = 1.0f64;
        for i in 0..=d {
            for j in 0..=d {
                m = m.max(y.get(i, j).to_f64().abs());
            }
        }
        m
    };
    for i in 1..=d {
        let diff = y.get(0, i) - y.get(i, i);
        let ok = if exact { diff.is_zero() } else { diff.to_f64().abs() <= FLOAT_TOL * scale };
        if !ok {
            return Ok(MPlusCheck::Violated(MPlusViolation::DiagMismatch { i }));
        }
    }
    let col0 = y.col(0);
    for i in 0..=d {
        let col = y.col(i);
        let complement: RVec = col0.iter().zip(&col).map(|(a, b)| a - b).collect();
        for row in k.rows() {
            let direct = linalg::dot(row, &col);
            let ok = if exact {
                !direct.is_negative()
            } else {
                direct.to_f64() >= -FLOAT_TOL * scale * (d as f64 + 1.0)
            };
            if !ok {
                return Ok(MPlusCheck::Violated(MPlusViolation::ColumnOutside { i }));
            }
            if i >= 1 {
                let comp = linalg::dot(row, &complement);
                let ok = if exact {
                    !comp.is_negative()
                } else {
                    comp.to_f64() >= -FLOAT_TOL * scale * (d as f64 + 1.0)
                };
                if !ok {
                    return Ok(MPlusCheck::Violated(MPlusViolation::ComplementOutside { i }));
                }
            }
        }
    }
    if exact {
        match ldlt_psd_check(y) {
            PsdCheck::Psd => Ok(MPlusCheck::Valid),
            PsdCheck::NotPsd { witness } => {
                let form = y.quadratic_form(&witness);
                Ok(MPlusCheck::Violated(MPlusViolation::NotPsd { witness, form }))
            }
        }
    } else {
        let m: Vec<Vec<f64>> = (0..=d)
            .map(|i| (0..=d).map(|j| y.get(i, j).to_f64()).collect())
            .collect();
        let eigs = eigen_sym(&m)?;
        if eigs[0] >= -FLOAT_TOL * scale {
            Ok(MPlusCheck::Valid)
        } else {
            Ok(MPlusCheck::Violated(MPlusViolation::EigenvalueBelow { min_eig: eigs[0] }))
        }
    }
}

/// Sufficient diagonal-dominance bound for an off-diagonal correction
/// `B` at point `x`: `diag(B) = 0` and every entry obeys
/// `|B_ij| ≤ ½·min((x_i−x_i²)/nnz_i, (x_j−x_j²)/nnz_j)` with `nnz_i`
/// the number of nonzeros in column `i`.  Guarantees
/// `B + Diag(x−x²) ⪰ 0`; a `false` answer proves nothing.
pub fn diagonal_dominance_ok(b: &SymMat, x: &[Rational]) -> Result<bool> {
    let d = x.len();
    if b.n() != d {
        return Err(Error::Dimension(format!("matrix size {}, want {d}", b.n())));
    }
    for i in 0..d {
        if !b.get(i, i).is_zero() {
            return Ok(false);
        }
    }
    let nnz: Vec<usize> = (0..d)
        .map(|i| (0..d).filter(|&j| !b.get(i, j).is_zero()).count())
        .collect();
    let slack: Vec<Rational> = x.iter().map(|xi| xi - &(xi * xi)).collect();
    for i in 0..d {
        for j in (i + 1)..d {
            let bij = b.get(i, j);
            if bij.is_zero() {
                continue;
            }
            let half = Rational::new(1, 2);
            let cap_i = &half * &(&slack[i] / &Rational::int(nnz[i] as i64));
            let cap_j = &half * &(&slack[j] / &Rational::int(nnz[j] as i64));
            let cap = if cap_i < cap_j { cap_i } else { cap_j };
            let mag = if bij.is_negative() { -bij } else { bij.clone() };
            if mag > cap {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// The polyhedron `∩_j {x: x − x_j e_j ∈ P}`: every row of `P` with the
/// `j`-th coefficient zeroed, collected over all `j`.  For `d ≥ 2` the
/// box rows survive (each from the substitutions that leave them
/// untouched), so the result is a well-formed cone.
pub fn zeroing_stable_set(p: &HCone) -> Result<HCone> {
    let d = p.d();
    if d < 2 {
        return Err(Error::Dimension(
            "coordinate-zeroing set needs at least two coordinates".into(),
        ));
    }
    let mut rows = Vec::new();
    for j in 1..=d {
        for row in p.rows() {
            let mut r = row.clone();
            r[j] = Rational::zero();
            rows.push(r);
        }
    }
    HCone::from_rows(d, rows)
}

/// Decides whether `(P ∩ {x_j = 0}) + e_j = P ∩ {x_j = 1}` for every
/// coordinate, via two cone inclusions per `j` on the translated zero
/// face.  The translation maps row `a` to `a − a_j e₀`; the box rows
/// (valid on the translated set, which lives in `{x_j = 1}`) are
/// re-appended so the result is a well-formed cone.
pub fn face_shift_hypothesis(p: &HCone) -> Result<bool> {
    let d = p.d();
    for j in 1..=d {
        let zero_face = p.face_restrict(&FaceSpec::new(vec![j], vec![]))?;
        let translated: Vec<RVec> = zero_face
            .rows()
            .iter()
            .map(|row| {
                let mut r = row.clone();
                let aj = r[j].clone();
                r[0] = &r[0] - &aj;
                r
            })
            .collect();
        let shifted = HCone::with_box(d, translated)?;
        let one_face = p.face_restrict(&FaceSpec::new(vec![], vec![j]))?;
        if !cone::cone_include(&shifted, &one_face)? || !cone::cone_include(&one_face, &shifted)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Certifies that `aᵀx ≤ α·x₀` is valid for the level-`r` semidefinite
/// relaxation by checking it on every all-ones face `{x_i = x₀, i ∈ I}`
/// for `I` inside the support of `a` with either `|I| = r`, or
/// `|I| ≤ r−1` and `Σ_{i∈I} a_i > α`.  All face checks are exact linear
/// programs; `a` has length `d` and must be entrywise nonnegative.
pub fn nplus_rank_certify(
    k: &HCone,
    a: &[Rational],
    alpha: &Rational,
    r: usize,
) -> Result<RankCertify> {
    let d = k.d();
    if a.len() != d {
        return Err(Error::Dimension(format!("coefficient length {}, want {d}", a.len())));
    }
    if a.iter().any(|c| c.is_negative()) {
        return Err(Error::Domain(
            "coefficients must be nonnegative (flip complemented coordinates first)".into(),
        ));
    }
    let support: Vec<usize> = (1..=d).filter(|&i| a[i - 1].is_positive()).collect();
    let mut binom = 1u128;
    for s in 0..r.min(support.len()) {
        binom = binom.saturating_mul((support.len() - s) as u128) / (s as u128 + 1);
    }
    let cap = crate::knobs::env_u128("LIFTPROJ_SUBSET_GUARD", 10_000);
    if binom > cap {
        return Err(Error::Guard(format!(
            "face enumeration {binom} exceeds {cap} subsets"
        )));
    }
    let mut faces: Vec<Vec<usize>> = Vec::new();
    for size in 0..=r.min(support.len()) {
        for pick in cone::subsets_of_size(support.len(), size) {
            let subset: Vec<usize> = pick.iter().map(|&t| support[t - 1]).collect();
            if subset.len() == r {
                faces.push(subset);
            } else if subset.len() + 1 <= r {
                let total = subset
                    .iter()
                    .fold(Rational::zero(), |acc, &i| acc + &a[i - 1]);
                if total > *alpha {
                    faces.push(subset);
                }
            }
        }
    }
    for face in faces {
        let restricted = k.face_restrict(&FaceSpec::new(vec![], face.clone()))?;
        let mut lp = LinearProgram::new(d, Sense::Max, a.to_vec());
        lp.rows = restricted.slice_lp_rows();
        match lp::solve(&lp)? {
            LpSolution::Optimal { value, .. } => {
                if value > *alpha {
                    return Ok(RankCertify::NotCertified { face });
                }
            }
            LpSolution::Infeasible { .. } => {} // empty face: vacuously valid
            LpSolution::Unbounded { .. } => {
                return Ok(RankCertify::NotCertified { face });
            }
        }
    }
    Ok(RankCertify::Certified)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cone::{gen_box, gen_cross, gen_frac, gen_majority, gen_matching};
    use crate::lifted::n_optimize;
    use crate::linalg::rvec_from_i64;

    fn ones_objective(d: usize) -> RVec {
        let mut c = linalg::zeros(d + 1);
        for i in 1..=d {
            c[i] = Rational::one();
        }
        c
    }

    fn q(n: i64, d: i64) -> Rational {
        Rational::new(n, d)
    }

    #[test]
    fn clique_relaxation_collapses_at_level_one() {
        let k = gen_frac(4, &cone::complete_graph_edges(4)).unwrap();
        match nplus_optimize(&k, 1, &ones_objective(4)).unwrap() {
            PlusOutcome::Value(v) => assert!((v - 1.0).abs() < 1e-5, "value {v}"),
            other => panic!("unexpected {other:?}"),
        }
        // The polyhedral operator keeps the optimum strictly above 1.
        let ln = n_optimize(&k, 1, OpKind::N, &ones_objective(4)).unwrap().unwrap();
        assert!(ln > Rational::one());
    }

    #[test]
    fn majority_levels_match_recurrence() {
        let k = gen_majority(4).unwrap();
        let c = ones_objective(4);
        match nplus_optimize(&k, 1, &c).unwrap() {
            PlusOutcome::Value(v) => {
                assert!((v - 16.0 / 7.0).abs() < 1e-4, "level 1: {v}");
            }
            other => panic!("unexpected {other:?}"),
        }
        match nplus_optimize(&k, 2, &c).unwrap() {
            PlusOutcome::Value(v) => assert!((v - 2.0).abs() < 1e-4, "level 2: {v}"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn cross_polytope_feasibility_ladder() {
        let k = gen_cross(3, 2).unwrap();
        for r in 0..=2 {
            match nplus_feasible(&k, r).unwrap() {
                Feasibility::Nonempty { .. } => {}
                Feasibility::Empty { margin } => {
                    panic!("level {r} should be nonempty (margin {margin})")
                }
            }
        }
        match nplus_feasible(&k, 3).unwrap() {
            Feasibility::Empty { margin } => {
                assert!(margin >= 1e-6, "margin {margin}");
            }
            Feasibility::Nonempty { margin } => {
                panic!("level 3 should be empty (margin {margin})")
            }
        }
        // The center of the cube survives exactly as long as the
        // relaxation is nonempty.
        let center = homogeneous_point(&vec![Rational::new(1, 2); 3]);
        for r in 0..=2 {
            assert!(matches!(
                nplus_member(&k, r, &center).unwrap(),
                Feasibility::Nonempty { .. }
            ));
        }
        match nplus_member(&k, 3, &center).unwrap() {
            Feasibility::Empty { margin } => assert!(margin >= 1e-6, "margin {margin}"),
            Feasibility::Nonempty { margin } => {
                panic!("center should be cut at level 3 (margin {margin})")
            }
        }
        let b = gen_box(3).unwrap();
        for r in 0..=3 {
            assert!(matches!(
                nplus_feasible(&b, r).unwrap(),
                Feasibility::Nonempty { .. }
            ));
        }
    }

    #[test]
    fn replacement_certificates() {
        let p = gen_cross(3, 2).unwrap();
        let half = vec![q(1, 2), q(1, 2), q(1, 2)];
        match replacement_certificate(&p, &half).unwrap() {
            ReplacementOutcome::Certificate(cert) => {
                assert!(verify_mplus(&p, &cert.y, true).unwrap().is_valid());
                assert!(verify_mplus(&p, &cert.y, false).unwrap().is_valid());
            }
            ReplacementOutcome::HypothesisViolated { j } => panic!("violated at {j}"),
        }

        // Integral points give the rank-one certificate.
        let b = gen_box(2).unwrap();
        let corner = vec![Rational::one(), Rational::zero()];
        match replacement_certificate(&b, &corner).unwrap() {
            ReplacementOutcome::Certificate(cert) => {
                let h = homogeneous_point(&corner);
                let rank1 = SymMat::outer(&h);
                for i in 0..3 {
                    for j in 0..3 {
                        assert_eq!(cert.y.get(i, j), rank1.get(i, j));
                    }
                }
            }
            ReplacementOutcome::HypothesisViolated { j } => panic!("violated at {j}"),
        }

        // On the fractional stable-set polytope the raise step leaves P.
        let f = gen_frac(4, &cone::complete_graph_edges(4)).unwrap();
        let third = vec![q(1, 3), q(1, 3), q(1, 3), q(1, 3)];
        assert!(matches!(
            replacement_certificate(&f, &third).unwrap(),
            ReplacementOutcome::HypothesisViolated { .. }
        ));

        // Outside the polytope: domain error.
        let outside = vec![q(2, 1), q(1, 2), q(1, 2)];
        assert!(replacement_certificate(&p, &outside).is_err());
    }

    #[test]
    fn certificate_verifier_violations() {
        let k = gen_frac(4, &cone::complete_graph_edges(4)).unwrap();
        // 1/3-filled moment matrix: passes the linear conditions but is
        // not positive semidefinite; the exact witness form is −1/3.
        let mut y = SymMat::zero(5);
        y.set(0, 0, Rational::one());
        for i in 1..=4 {
            y.set(0, i, q(1, 3));
            y.set(i, i, q(1, 3));
        }
        match verify_mplus(&k, &y, true).unwrap() {
            MPlusCheck::Violated(MPlusViolation::NotPsd { witness, form }) => {
                assert_eq!(form, q(-1, 3));
                assert!(y.quadratic_form(&witness).is_negative());
            }
            other => panic!("unexpected {:?}", matches!(other, MPlusCheck::Valid)),
        }
        match verify_mplus(&k, &y, false).unwrap() {
            MPlusCheck::Violated(MPlusViolation::EigenvalueBelow { min_eig }) => {
                assert!(min_eig < -1e-2);
            }
            _ => panic!("float mode should also reject"),
        }

        // Zero matrix is valid for any cone.
        let z = SymMat::zero(5);
        assert!(verify_mplus(&k, &z, true).unwrap().is_valid());

        // Broken diagonal tie.
        let mut bad = SymMat::zero(5);
        bad.set(0, 0, Rational::one());
        bad.set(1, 1, q(1, 2));
        assert!(matches!(
            verify_mplus(&k, &bad, true).unwrap(),
            MPlusCheck::Violated(MPlusViolation::DiagMismatch { i: 1 })
        ));
    }

    #[test]
    fn diagonal_dominance_bound() {
        let x = vec![q(1, 2), q(1, 2), q(1, 2)];
        // x−x² = 1/4 each; two nonzeros per column allow |B_ij| ≤ 1/16.
        let mut b = SymMat::zero(3);
        b.set(0, 1, q(1, 16));
        b.set(1, 2, q(1, 16));
        assert!(diagonal_dominance_ok(&b, &x).unwrap());
        b.set(0, 1, q(1, 8));
        assert!(!diagonal_dominance_ok(&b, &x).unwrap());
        let mut diag_bad = SymMat::zero(3);
        diag_bad.set(0, 0, q(1, 16));
        assert!(!diagonal_dominance_ok(&diag_bad, &x).unwrap());
    }

    #[test]
    fn zeroing_set_and_face_shift() {
        let p = gen_cross(3, 2).unwrap();
        assert!(face_shift_hypothesis(&p).unwrap());
        let c = zeroing_stable_set(&p).unwrap();
        // The inner cross polytope is contained in the zeroing set.
        let inner = gen_cross(3, 1).unwrap();
        assert!(cone::cone_include(&inner, &c).unwrap());

        let f = gen_frac(4, &cone::complete_graph_edges(4)).unwrap();
        assert!(!face_shift_hypothesis(&f).unwrap());

        let b = gen_box(3).unwrap();
        assert!(face_shift_hypothesis(&b).unwrap());
    }

    #[test]
    fn rank_certification() {
        // Blossom inequality on the perfect-matching relaxation of four
        // vertices: sum of the three edges inside an odd triple ≤ 1.
        let m = gen_matching(4).unwrap();
        let mut a = linalg::zeros(6);
        for (u, v) in [(1usize, 2usize), (1, 3), (2, 3)] {
            a[cone::edge_index(4, u, v).unwrap() - 1] = Rational::one();
        }
        assert!(matches!(
            nplus_rank_certify(&m, &a, &Rational::one(), 1).unwrap(),
            RankCertify::Certified
        ));

        // Majority threshold at d=4: level 2 certifies, level 1 fails.
        let k = gen_majority(4).unwrap();
        let ones = rvec_from_i64(&[1, 1, 1, 1]);
        let two = Rational::int(2);
        assert!(matches!(
            nplus_rank_certify(&k, &ones, &two, 2).unwrap(),
            RankCertify::Certified
        ));
        assert!(matches!(
            nplus_rank_certify(&k, &ones, &two, 1).unwrap(),
            RankCertify::NotCertified { .. }
        ));

        let neg = rvec_from_i64(&[1, -1, 1, 1]);
        assert!(nplus_rank_certify(&k, &neg, &two, 1).is_err());
    }

    #[test]
    fn semidefinite_below_polyhedral() {
        // Random small cones: the semidefinite value never exceeds the
        // polyhedral value.
        let mut state = 0x17ac_e5u64;
        let mut rng = move || {
            state = state
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            (state >> 33) as i64
        };
        for _ in 0..6 {
            let d = 2 + (rng().unsigned_abs() as usize % 2);
            let mut extra = Vec::new();
            for _ in 0..2 {
                let mut row = linalg::zeros(d + 1);
                row[0] = Rational::int(rng().rem_euclid(3) + 1);
                for i in 1..=d {
                    row[i] = Rational::int(-(rng().rem_euclid(3)));
                }
                extra.push(row);
            }
            let k = HCone::with_box(d, extra).unwrap();
            let mut c = linalg::zeros(d + 1);
            for i in 1..=d {
                c[i] = Rational::int(rng().rem_euclid(4) + 1);
            }
            let lin = n_optimize(&k, 1, OpKind::N, &c).unwrap();
            let sd = nplus_optimize(&k, 1, &c).unwrap();
            match (lin, sd) {
                (Some(lv), PlusOutcome::Value(sv)) => {
                    assert!(sv <= lv.to_f64() + 1e-5, "{sv} vs {lv}");
                }
                (None, _) => panic!("polyhedral relaxation unexpectedly empty"),
                (_, other) => panic!("semidefinite outcome {other:?}"),
            }
        }
    }

    #[test]
    fn zeroing_set_matches_operators_on_cross() {
        // When the face-shift hypothesis holds, all operator variants
        // and the zeroing set agree at level one.
        let p = gen_cross(3, 2).unwrap();
        assert!(face_shift_hypothesis(&p).unwrap());
        let c = zeroing_stable_set(&p).unwrap();
        let mut state = 0xfeed_5eedu64;
        let mut rng = move || {
            state = state
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            ((state >> 33) % 9) as i64 - 4
        };
        for trial in 0..10 {
            let mut obj = linalg::zeros(4);
            for i in 1..=3 {
                obj[i] = Rational::int(rng());
            }
            let n_val = n_optimize(&p, 1, OpKind::N, &obj).unwrap();
            let n0_val = n_optimize(&p, 1, OpKind::N0, &obj).unwrap();
            let mut lp = LinearProgram::new(3, Sense::Max, obj[1..].to_vec());
            lp.rows = c.slice_lp_rows();
            let zero_val = match lp::solve(&lp).unwrap() {
                LpSolution::Optimal { value, .. } => Some(value),
                LpSolution::Infeasible { .. } => None,
                LpSolution::Unbounded { .. } => panic!("unbounded zeroing set"),
            };
            assert_eq!(n_val, n0_val, "trial {trial}");
            assert_eq!(n_val, zero_val, "trial {trial}");
            if let Some(nv) = &n_val {
                match nplus_optimize(&p, 1, &obj).unwrap() {
                    PlusOutcome::Value(sv) => {
                        assert!((sv - nv.to_f64()).abs() <= 1e-5, "trial {trial}: {sv} vs {nv}")
                    }
                    other => panic!("trial {trial}: {other:?}"),
                }
            }
        }
    }
}
