//! Lifted constraint systems for the iterated lift-and-project operators.
//!
//! A lifted system compiles the level-`r` relaxation of a cone into a tree
//! of matrix/vector nodes whose entries are sparse linear expressions over
//! one global parameter vector.  Parameters `0..=d` are reserved for the
//! root diagonal `(x₀, x₁, …, x_d)`; structural equalities (symmetry,
//! diagonal ties, decomposition sums) are eliminated by substitution during
//! construction, so the compiled system consists of inequality rows only —
//! one per base-cone row per leaf vector.

use std::fmt::Write as _;
use std::str::FromStr;

use crate::cone::{subsets_of_size, HCone};
use crate::error::{Error, Result};
use crate::linalg::{dot, zeros, RVec};
use crate::lp::{self, LinearProgram, LpRow, LpSolution, Sense};
use crate::rational::Rational;

/// Which operator a lifted system realizes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OpKind {
    /// Symmetric operator (matrix columns constrained pairwise).
    N,
    /// Per-index decomposition operator (no matrix, sum splits per index).
    N0,
    /// Symmetric operator with positive-semidefinite node matrices; shares
    /// the tree of `N`, the extra condition is enforced by the SDP layer.
    NPlus,
}

impl OpKind {
    pub fn parse(s: &str) -> Result<OpKind> {
        match s {
            "n" => Ok(OpKind::N),
            "n0" => Ok(OpKind::N0),
            "nplus" => Ok(OpKind::NPlus),
            _ => Err(Error::Parse(format!("unknown operator '{s}' (want n, n0, nplus)"))),
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            OpKind::N => "n",
            OpKind::N0 => "n0",
            OpKind::NPlus => "nplus",
        }
    }
}

/// Sparse homogeneous linear expression over the global parameter vector;
/// terms are sorted by parameter index.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LinExpr(Vec<(usize, Rational)>);

impl LinExpr {
    pub fn zero() -> LinExpr {
        LinExpr(Vec::new())
    }

    pub fn param(i: usize) -> LinExpr {
        LinExpr(vec![(i, Rational::one())])
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    pub fn terms(&self) -> &[(usize, Rational)] {
        &self.0
    }

    pub fn coeff(&self, i: usize) -> Rational {
        match self.0.binary_search_by_key(&i, |t| t.0) {
            Ok(pos) => self.0[pos].1.clone(),
            Err(_) => Rational::zero(),
        }
    }

    fn combine(&self, other: &LinExpr, negate_other: bool) -> LinExpr {
        let mut out = Vec::with_capacity(self.0.len() + other.0.len());
        let (mut i, mut j) = (0, 0);
        while i < self.0.len() || j < other.0.len() {
            let take_left = match (self.0.get(i), other.0.get(j)) {
                (Some(a), Some(b)) => a.0 <= b.0,
                (Some(_), None) => true,
                (None, _) => false,
            };
            if take_left {
                let (idx, c) = &self.0[i];
                i += 1;
                if j < other.0.len() && other.0[j].0 == *idx {
                    let d = &other.0[j].1;
                    j += 1;
                    let v = if negate_other { c - d } else { c + d };
                    if !v.is_zero() {
                        out.push((*idx, v));
                    }
                } else {
                    out.push((*idx, c.clone()));
                }
            } else {
                let (idx, d) = &other.0[j];
                j += 1;
                out.push((*idx, if negate_other { -d } else { d.clone() }));
            }
        }
        LinExpr(out)
    }

    pub fn add(&self, other: &LinExpr) -> LinExpr {
        self.combine(other, false)
    }

    pub fn sub(&self, other: &LinExpr) -> LinExpr {
        self.combine(other, true)
    }

    pub fn add_scaled(&self, other: &LinExpr, factor: &Rational) -> LinExpr {
        if factor.is_zero() {
            return self.clone();
        }
        self.combine(&other.scaled(factor), false)
    }

    pub fn scaled(&self, factor: &Rational) -> LinExpr {
        if factor.is_zero() {
            return LinExpr::zero();
        }
        LinExpr(self.0.iter().map(|(i, c)| (*i, c * factor)).collect())
    }

    pub fn eval(&self, assignment: &[Rational]) -> Rational {
        let mut acc = Rational::zero();
        for (i, c) in &self.0 {
            if !assignment[*i].is_zero() {
                acc += &assignment[*i] * c;
            }
        }
        acc
    }
}

/// One tree node: a `(d+1)×(d+1)` matrix of expressions for the symmetric
/// kinds, a single-row vector for decomposition nodes and leaves.
#[derive(Clone, Debug)]
pub struct LiftedNode {
    pub depth: usize,
    pub grid: Vec<Vec<LinExpr>>,
}

/// Compiled level-`r` relaxation: inequality rows `expr ≥ 0` over
/// `n_params` parameters, plus the node tree for certificates.
#[derive(Clone, Debug)]
pub struct LiftedSystem {
    pub d: usize,
    pub r: usize,
    pub kind: OpKind,
    pub n_params: usize,
    pub rows: Vec<LinExpr>,
    pub nodes: Vec<LiftedNode>,
}

pub const DEFAULT_PARAM_BUDGET: usize = 100_000;

/// Predicted parameter count, used to refuse oversized builds before any
/// allocation.
fn param_budget(d: usize, r: usize, kind: OpKind) -> u128 {
    let per_node: u128 = match kind {
        OpKind::N | OpKind::NPlus => (d as u128) * (d as u128 - 1) / 2,
        OpKind::N0 => (d as u128) * (d as u128).saturating_sub(1),
    };
    let mut nodes: u128 = 0;
    let mut level: u128 = 1;
    for _ in 0..r {
        nodes = nodes.saturating_add(level);
        level = level.saturating_mul(2 * d as u128);
    }
    (d as u128 + 1).saturating_add(per_node.saturating_mul(nodes))
}

pub fn build_lifted(k: &HCone, r: usize, kind: OpKind) -> Result<LiftedSystem> {
    let budget = crate::knobs::env_usize("LIFTPROJ_PARAM_BUDGET", DEFAULT_PARAM_BUDGET);
    build_lifted_with_budget(k, r, kind, budget)
}

pub fn build_lifted_with_budget(
    k: &HCone,
    r: usize,
    kind: OpKind,
    budget: usize,
) -> Result<LiftedSystem> {
    let d = k.d();
    if d == 0 {
        return Err(Error::Dimension("cone dimension must be positive".into()));
    }
    let predicted = param_budget(d, r, kind);
    if predicted > budget as u128 {
        return Err(Error::Guard(format!(
            "lifted system needs {predicted} parameters, budget is {budget}"
        )));
    }
    let mut sys = LiftedSystem {
        d,
        r,
        kind,
        n_params: d + 1,
        rows: Vec::new(),
        nodes: Vec::new(),
    };
    let root: Vec<LinExpr> = (0..=d).map(LinExpr::param).collect();
    match kind {
        OpKind::N | OpKind::NPlus => sys.build_sym_node(k, root, r),
        OpKind::N0 => sys.build_split_node(k, root, r),
    }
    Ok(sys)
}

impl LiftedSystem {
    fn fresh(&mut self) -> LinExpr {
        let p = self.n_params;
        self.n_params += 1;
        LinExpr::param(p)
    }

    fn push_leaf(&mut self, k: &HCone, v: Vec<LinExpr>) {
        for row in k.rows() {
            let mut expr = LinExpr::zero();
            for (j, c) in row.iter().enumerate() {
                if !c.is_zero() {
                    expr = expr.add_scaled(&v[j], c);
                }
            }
            if !expr.is_zero() {
                self.rows.push(expr);
            }
        }
        self.nodes.push(LiftedNode { depth: 0, grid: vec![v] });
    }

    /// Symmetric node: matrix with row/column 0 and diagonal equal to the
    /// incoming vector, fresh off-diagonal entries, and both column
    /// conditions per index recursing one level down.
    fn build_sym_node(&mut self, k: &HCone, col0: Vec<LinExpr>, depth: usize) {
        if depth == 0 {
            self.push_leaf(k, col0);
            return;
        }
        let d = self.d;
        let mut grid = vec![vec![LinExpr::zero(); d + 1]; d + 1];
        for j in 0..=d {
            grid[0][j] = col0[j].clone();
            grid[j][0] = col0[j].clone();
        }
        for i in 1..=d {
            grid[i][i] = col0[i].clone();
        }
        for i in 1..=d {
            for j in (i + 1)..=d {
                let p = self.fresh();
                grid[i][j] = p.clone();
                grid[j][i] = p;
            }
        }
        let node_idx = self.nodes.len();
        self.nodes.push(LiftedNode { depth, grid });
        for i in 1..=d {
            let col_i: Vec<LinExpr> =
                (0..=d).map(|j| self.nodes[node_idx].grid[j][i].clone()).collect();
            let complement: Vec<LinExpr> = (0..=d).map(|j| col0[j].sub(&col_i[j])).collect();
            self.build_sym_node(k, col_i, depth - 1);
            self.build_sym_node(k, complement, depth - 1);
        }
    }

    /// Decomposition node: per index `i`, the vector splits as `y + z` with
    /// `y` on the `x_i = 0` face and `z` on the `x_i = x₀` face; the two
    /// face equalities fix `y₀` and `y_i`, the rest of `y` is fresh.
    fn build_split_node(&mut self, k: &HCone, x: Vec<LinExpr>, depth: usize) {
        if depth == 0 {
            self.push_leaf(k, x);
            return;
        }
        let d = self.d;
        self.nodes.push(LiftedNode { depth, grid: vec![x.clone()] });
        for i in 1..=d {
            let mut y = vec![LinExpr::zero(); d + 1];
            y[0] = x[0].sub(&x[i]);
            for j in 1..=d {
                if j != i {
                    y[j] = self.fresh();
                }
            }
            let mut z = vec![LinExpr::zero(); d + 1];
            z[0] = x[i].clone();
            z[i] = x[i].clone();
            for j in 1..=d {
                if j != i {
                    z[j] = x[j].sub(&y[j]);
                }
            }
            self.build_split_node(k, y, depth - 1);
            self.build_split_node(k, z, depth - 1);
        }
    }

    /// Values of every node grid under a full parameter assignment.
    pub fn node_values(&self, assignment: &[Rational]) -> Vec<Vec<RVec>> {
        self.nodes
            .iter()
            .map(|n| n.grid.iter().map(|row| row.iter().map(|e| e.eval(assignment)).collect()).collect())
            .collect()
    }

    /// Exact check that an assignment satisfies every compiled row and
    /// matches the stated root diagonal.
    pub fn check_assignment(&self, x: &[Rational], assignment: &[Rational]) -> Result<()> {
        if assignment.len() != self.n_params || x.len() != self.d + 1 {
            return Err(Error::Dimension("assignment/point length mismatch".into()));
        }
        if assignment[..=self.d] != *x {
            return Err(Error::Numerical("assignment root diagonal differs from point".into()));
        }
        for (idx, row) in self.rows.iter().enumerate() {
            if row.eval(assignment).is_negative() {
                return Err(Error::Numerical(format!("lifted row {idx} violated")));
            }
        }
        Ok(())
    }

    /// Round-trippable certificate text: header, the assignment, then every
    /// node grid evaluated at the assignment.
    pub fn dump_assignment(&self, assignment: &[Rational]) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "kind {}", self.kind.as_str());
        let _ = writeln!(s, "r {}", self.r);
        let _ = writeln!(s, "d {}", self.d);
        let point: Vec<String> = assignment[..=self.d].iter().map(Rational::to_string).collect();
        let _ = writeln!(s, "point {}", point.join(" "));
        let _ = writeln!(s, "params {}", self.n_params);
        let vals: Vec<String> = assignment.iter().map(Rational::to_string).collect();
        let _ = writeln!(s, "{}", vals.join(" "));
        for (idx, node) in self.nodes.iter().enumerate() {
            let _ = writeln!(
                s,
                "node {idx} depth {} rows {} cols {}",
                node.depth,
                node.grid.len(),
                node.grid[0].len()
            );
            for row in &node.grid {
                let line: Vec<String> =
                    row.iter().map(|e| e.eval(assignment).to_string()).collect();
                let _ = writeln!(s, "{}", line.join(" "));
            }
        }
        s
    }
}

/// Parsed and re-verified certificate.
pub struct CertSummary {
    pub kind: OpKind,
    pub r: usize,
    pub point: RVec,
}

/// Rebuilds the lifted system for the cone, replays the dumped assignment,
/// and checks rows, node grids, and the stated point, all exactly.
pub fn verify_certificate(k: &HCone, text: &str) -> Result<CertSummary> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let mut need = |key: &str| -> Result<String> {
        let line = lines
            .next()
            .ok_or_else(|| Error::Parse(format!("certificate truncated before '{key}'")))?;
        line.strip_prefix(key)
            .map(|rest| rest.trim().to_string())
            .ok_or_else(|| Error::Parse(format!("expected '{key} …', found '{line}'")))
    };
    let kind = OpKind::parse(&need("kind")?)?;
    let r: usize = need("r")?.parse().map_err(|_| Error::Parse("bad r".into()))?;
    let d: usize = need("d")?.parse().map_err(|_| Error::Parse("bad d".into()))?;
    if d != k.d() {
        return Err(Error::Dimension(format!("certificate d = {d}, cone d = {}", k.d())));
    }
    let point: RVec = need("point")?
        .split_whitespace()
        .map(Rational::from_str)
        .collect::<Result<_>>()?;
    let n_params: usize = need("params")?.parse().map_err(|_| Error::Parse("bad params".into()))?;
    let assignment: RVec = lines
        .next()
        .ok_or_else(|| Error::Parse("certificate missing assignment".into()))?
        .split_whitespace()
        .map(Rational::from_str)
        .collect::<Result<_>>()?;
    if assignment.len() != n_params {
        return Err(Error::Parse("assignment length differs from 'params'".into()));
    }

    let sys = build_lifted(k, r, kind)?;
    if sys.n_params != n_params {
        return Err(Error::Parse(format!(
            "system has {} parameters, certificate claims {n_params}",
            sys.n_params
        )));
    }
    sys.check_assignment(&point, &assignment)?;

    let values = sys.node_values(&assignment);
    for (idx, grid) in values.iter().enumerate() {
        let header = lines
            .next()
            .ok_or_else(|| Error::Parse(format!("certificate truncated at node {idx}")))?;
        if !header.starts_with("node ") {
            return Err(Error::Parse(format!("expected node header, found '{header}'")));
        }
        for row in grid {
            let line = lines
                .next()
                .ok_or_else(|| Error::Parse(format!("certificate truncated in node {idx}")))?;
            let got: RVec = line
                .split_whitespace()
                .map(Rational::from_str)
                .collect::<Result<_>>()?;
            if got != *row {
                return Err(Error::Numerical(format!("node {idx} disagrees with assignment")));
            }
        }
    }
    Ok(CertSummary { kind, r, point })
}

fn optimize_slice(
    k: &HCone,
    r: usize,
    kind: OpKind,
    c: &[Rational],
    face: Option<&crate::cone::FaceSpec>,
) -> Result<Option<(Rational, RVec)>> {
    if matches!(kind, OpKind::NPlus) {
        return Err(Error::Domain("positive-semidefinite kind needs the SDP path".into()));
    }
    if c.len() != k.d() + 1 {
        return Err(Error::Dimension("objective length must be d+1".into()));
    }
    let sys = build_lifted(k, r, kind)?;
    let n_vars = sys.n_params - 1;
    let mut rows = Vec::with_capacity(sys.rows.len());
    for expr in &sys.rows {
        let mut coeffs = zeros(n_vars);
        let mut rhs = Rational::zero();
        for (i, v) in expr.terms() {
            if *i == 0 {
                rhs = -v;
            } else {
                coeffs[*i - 1] = v.clone();
            }
        }
        rows.push(LpRow::ge(coeffs, rhs));
    }
    if let Some(f) = face {
        f.validate(sys.d)?;
        for &i in &f.zeros {
            let mut coeffs = zeros(n_vars);
            coeffs[i - 1] = Rational::one();
            rows.push(LpRow::eq(coeffs, Rational::zero()));
        }
        for &i in &f.ones {
            let mut coeffs = zeros(n_vars);
            coeffs[i - 1] = Rational::one();
            rows.push(LpRow::eq(coeffs, Rational::one()));
        }
    }
    let mut objective = zeros(n_vars);
    for i in 1..=sys.d {
        objective[i - 1] = c[i].clone();
    }
    let lp = LinearProgram { n_vars, rows, objective, sense: Sense::Max };
    match lp::solve(&lp)? {
        LpSolution::Optimal { point, value, .. } => {
            let mut assignment = vec![Rational::one()];
            assignment.extend(point);
            Ok(Some((value + &c[0], assignment)))
        }
        LpSolution::Infeasible { .. } => Ok(None),
        LpSolution::Unbounded { .. } => {
            Err(Error::Numerical("lifted slice unbounded; box rows missing".into()))
        }
    }
}

/// Exact maximum of `cᵀ(x₀, …, x_d)` over the `x₀ = 1` slice of the level-`r`
/// relaxation; `None` when the relaxation is empty.  Also returns the full
/// parameter assignment attaining the optimum.
pub fn n_optimize_full(
    k: &HCone,
    r: usize,
    kind: OpKind,
    c: &[Rational],
) -> Result<Option<(Rational, RVec)>> {
    optimize_slice(k, r, kind, c, None)
}

pub fn n_optimize(k: &HCone, r: usize, kind: OpKind, c: &[Rational]) -> Result<Option<Rational>> {
    Ok(n_optimize_full(k, r, kind, c)?.map(|(v, _)| v))
}

/// Exact maximum over the level-`r` slice with face coordinates pinned
/// (`x_i = 0` for the zero set, `x_i = 1` for the one set) by equality rows
/// added to the lifted program; `None` when that face of the relaxation is
/// empty.
pub fn n_optimize_face(
    k: &HCone,
    r: usize,
    kind: OpKind,
    c: &[Rational],
    face: &crate::cone::FaceSpec,
) -> Result<Option<Rational>> {
    Ok(optimize_slice(k, r, kind, c, Some(face))?.map(|(v, _)| v))
}

/// Exact membership outcome for a homogeneous point.
pub enum Membership {
    /// Full parameter assignment witnessing membership.
    In { assignment: RVec },
    /// A row `aᵀx ≥ 0` valid for the whole relaxation with `aᵀx < 0` at the
    /// queried point.
    Out { separating: RVec },
}

impl Membership {
    pub fn is_in(&self) -> bool {
        matches!(self, Membership::In { .. })
    }
}

pub fn n_member(k: &HCone, r: usize, kind: OpKind, x: &[Rational]) -> Result<Membership> {
    if matches!(kind, OpKind::NPlus) {
        return Err(Error::Domain("positive-semidefinite kind needs the SDP path".into()));
    }
    if x.len() != k.d() + 1 {
        return Err(Error::Dimension("point length must be d+1".into()));
    }
    let sys = build_lifted(k, r, kind)?;
    let d = sys.d;
    let n_vars = sys.n_params - (d + 1);
    // split each row into its point part α and internal part β
    let mut alphas: Vec<RVec> = Vec::with_capacity(sys.rows.len());
    let mut rows = Vec::with_capacity(sys.rows.len());
    for expr in &sys.rows {
        let mut alpha = zeros(d + 1);
        let mut coeffs = zeros(n_vars);
        for (i, v) in expr.terms() {
            if *i <= d {
                alpha[*i] = v.clone();
            } else {
                coeffs[*i - d - 1] = v.clone();
            }
        }
        let rhs = -dot(&alpha, x);
        alphas.push(alpha);
        rows.push(LpRow::ge(coeffs, rhs));
    }
    let lp = LinearProgram { n_vars, rows, objective: zeros(n_vars), sense: Sense::Max };
    match lp::solve(&lp)? {
        LpSolution::Optimal { point, .. } => {
            let mut assignment = x.to_vec();
            assignment.extend(point);
            sys.check_assignment(x, &assignment)?;
            Ok(Membership::In { assignment })
        }
        LpSolution::Infeasible { farkas } => {
            let mut separating = zeros(d + 1);
            for (alpha, nu) in alphas.iter().zip(&farkas) {
                if !nu.is_zero() {
                    crate::linalg::add_scaled(&mut separating, alpha, nu);
                }
            }
            if !dot(&separating, x).is_negative() {
                return Err(Error::Numerical("separating row fails to cut the point".into()));
            }
            Ok(Membership::Out { separating })
        }
        LpSolution::Unbounded { .. } => {
            Err(Error::Numerical("membership system unbounded; box rows missing".into()))
        }
    }
}

/// Refuses partition-family computations larger than `cap` LP blocks
/// (`C(d,r)` subsets times `2^r` partitions each).
fn guard_partitions(d: usize, r: usize, cap: u128) -> Result<()> {
    let mut binom: u128 = 1;
    for i in 0..r {
        binom = binom.saturating_mul((d - i) as u128) / (i as u128 + 1);
    }
    let total = binom.saturating_mul(1u128 << r.min(100));
    if total > cap {
        return Err(Error::Guard(format!(
            "partition family size {total} exceeds cap {cap}"
        )));
    }
    Ok(())
}

/// LP rows and variable layout for one subset `J`: every partition piece
/// gets a variable block, pieces must sum to the target.
struct PartitionLayout {
    piece_vars: Vec<Vec<Option<usize>>>, // per piece, per coordinate: var id or None (expression via face)
    n_vars: usize,
}

fn partition_layout(d: usize, j_set: &[usize], base: usize) -> PartitionLayout {
    let r = j_set.len();
    let mut piece_vars = Vec::with_capacity(1 << r);
    let mut next = base;
    for _mask in 0..(1u32 << r) {
        let mut vars: Vec<Option<usize>> = vec![None; d + 1];
        vars[0] = Some(next);
        next += 1;
        for j in 1..=d {
            if !j_set.contains(&j) {
                vars[j] = Some(next);
                next += 1;
            }
        }
        piece_vars.push(vars);
    }
    PartitionLayout { piece_vars, n_vars: next - base }
}

/// Coefficient rows for piece `mask` of subset `j_set`: coordinate `i ∈ J`
/// reads `0` (zeros side) or the piece's `w₀` (ones side).
fn piece_row_coeffs(
    k_row: &[Rational],
    j_set: &[usize],
    mask: u32,
    vars: &[Option<usize>],
    coeffs: &mut [Rational],
) {
    for (j, c) in k_row.iter().enumerate() {
        if c.is_zero() {
            continue;
        }
        match vars[j] {
            Some(v) => coeffs[v] += c,
            None => {
                let pos = j_set.iter().position(|&x| x == j).unwrap();
                if mask >> pos & 1 == 1 {
                    // pinned to w₀
                    let v0 = vars[0].unwrap();
                    coeffs[v0] += c;
                }
                // pinned to zero: contributes nothing
            }
        }
    }
}

/// Membership in the level-`r` partition relaxation: for every `J` of size
/// `r`, the point must decompose as a sum of face points over the `2^r`
/// partitions of `J`; one exact LP per `J`.
pub fn ntilde0_member(k: &HCone, r: usize, x: &[Rational]) -> Result<bool> {
    let d = k.d();
    if x.len() != d + 1 {
        return Err(Error::Dimension("point length must be d+1".into()));
    }
    if r > d {
        return Err(Error::Domain(format!("level {r} exceeds dimension {d}")));
    }
    guard_partitions(d, r, crate::knobs::env_u128("LIFTPROJ_PARTITION_GUARD", 10_000))?;
    for j_set in subsets_of_size(d, r) {
        let layout = partition_layout(d, &j_set, 0);
        let mut rows = Vec::new();
        // each piece lies in the cone
        for (mask, vars) in layout.piece_vars.iter().enumerate() {
            for k_row in k.rows() {
                let mut coeffs = zeros(layout.n_vars);
                piece_row_coeffs(k_row, &j_set, mask as u32, vars, &mut coeffs);
                rows.push(LpRow::ge(coeffs, Rational::zero()));
            }
        }
        // pieces sum to the point, coordinate by coordinate
        for coord in 0..=d {
            let mut coeffs = zeros(layout.n_vars);
            for (mask, vars) in layout.piece_vars.iter().enumerate() {
                match vars[coord] {
                    Some(v) => coeffs[v] += Rational::one(),
                    None => {
                        let pos = j_set.iter().position(|&x| x == coord).unwrap();
                        if mask as u32 >> pos & 1 == 1 {
                            coeffs[vars[0].unwrap()] += Rational::one();
                        }
                    }
                }
            }
            rows.push(LpRow::eq(coeffs, x[coord].clone()));
        }
        let lp = LinearProgram {
            n_vars: layout.n_vars,
            rows,
            objective: zeros(layout.n_vars),
            sense: Sense::Max,
        };
        match lp::solve(&lp)? {
            LpSolution::Optimal { .. } => {}
            LpSolution::Infeasible { .. } => return Ok(false),
            LpSolution::Unbounded { .. } => {
                return Err(Error::Numerical("partition system unbounded".into()))
            }
        }
    }
    Ok(true)
}

/// Exact maximum of `cᵀx` over the intersection of all partition
/// relaxations at level `r` (every subset `J` simultaneously).
pub fn ntilde0_optimize(k: &HCone, r: usize, c: &[Rational]) -> Result<Option<Rational>> {
    let d = k.d();
    if c.len() != d + 1 {
        return Err(Error::Dimension("objective length must be d+1".into()));
    }
    if r > d {
        return Err(Error::Domain(format!("level {r} exceeds dimension {d}")));
    }
    guard_partitions(d, r, crate::knobs::env_u128("LIFTPROJ_PARTITION_GUARD", 10_000))?;
    // vars: x₁..x_d first, then per-J piece blocks; x₀ = 1
    let mut rows = Vec::new();
    let mut n_vars = d;
    let subsets = subsets_of_size(d, r);
    let mut layouts = Vec::with_capacity(subsets.len());
    for j_set in &subsets {
        let layout = partition_layout(d, j_set, n_vars);
        n_vars += layout.n_vars;
        layouts.push(layout);
    }
    for (j_set, layout) in subsets.iter().zip(&layouts) {
        for (mask, vars) in layout.piece_vars.iter().enumerate() {
            for k_row in k.rows() {
                let mut coeffs = zeros(n_vars);
                piece_row_coeffs(k_row, j_set, mask as u32, vars, &mut coeffs);
                rows.push(LpRow::ge(coeffs, Rational::zero()));
            }
        }
        for coord in 0..=d {
            let mut coeffs = zeros(n_vars);
            for (mask, vars) in layout.piece_vars.iter().enumerate() {
                match vars[coord] {
                    Some(v) => coeffs[v] += Rational::one(),
                    None => {
                        let pos = j_set.iter().position(|&x| x == coord).unwrap();
                        if mask as u32 >> pos & 1 == 1 {
                            coeffs[vars[0].unwrap()] += Rational::one();
                        }
                    }
                }
            }
            let rhs = if coord == 0 {
                Rational::one()
            } else {
                coeffs[coord - 1] = Rational::int(-1);
                Rational::zero()
            };
            rows.push(LpRow::eq(coeffs, rhs));
        }
    }
    let mut objective = zeros(n_vars);
    for i in 1..=d {
        objective[i - 1] = c[i].clone();
    }
    let lp = LinearProgram { n_vars, rows, objective, sense: Sense::Max };
    match lp::solve(&lp)? {
        LpSolution::Optimal { value, .. } => Ok(Some(value + &c[0])),
        LpSolution::Infeasible { .. } => Ok(None),
        LpSolution::Unbounded { .. } => Err(Error::Numerical("partition system unbounded".into())),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RankResult {
    Rank(usize),
    Exceeds,
}

/// Smallest `r ≤ r_max` at which `aᵀx ≤ α` holds over the level-`r` slice
/// (`a` over `x₁..x_d`); an empty relaxation validates every inequality.
pub fn inequality_rank(
    k: &HCone,
    a: &[Rational],
    alpha: &Rational,
    kind: OpKind,
    r_max: usize,
) -> Result<RankResult> {
    if a.len() != k.d() {
        return Err(Error::Dimension("inequality length must be d".into()));
    }
    let mut c = vec![Rational::zero()];
    c.extend_from_slice(a);
    for r in 0..=r_max {
        match n_optimize(k, r, kind, &c)? {
            None => return Ok(RankResult::Rank(r)),
            Some(v) => {
                if v <= *alpha {
                    return Ok(RankResult::Rank(r));
                }
            }
        }
    }
    Ok(RankResult::Exceeds)
}

/// Smallest `r ≤ r_max` at which the level-`r` relaxation equals the 0-1
/// hull: every non-box hull row must be valid (box rows hold at every level
/// since the relaxation sits inside the base cone).  For an empty hull the
/// relaxation itself must be empty.
pub fn cone_rank(k: &HCone, kind: OpKind, r_max: usize) -> Result<RankResult> {
    let hull = crate::cone::integral_hull(k)?;
    let empty = crate::cone::integral_points(k)?.is_empty();
    let d = k.d();
    let ones: RVec = {
        let mut c = zeros(d + 1);
        for i in 1..=d {
            c[i] = Rational::one();
        }
        c
    };
    for r in 0..=r_max {
        let achieved = if empty {
            n_optimize(k, r, kind, &ones)?.is_none()
        } else {
            let mut all = true;
            for (idx, row) in hull.rows().iter().enumerate() {
                if hull.is_box_row(idx) {
                    continue;
                }
                let c: RVec = row.iter().map(|v| -v).collect();
                if let Some(v) = n_optimize(k, r, kind, &c)? {
                    if v.is_positive() {
                        all = false;
                        break;
                    }
                }
            }
            all
        };
        if achieved {
            return Ok(RankResult::Rank(r));
        }
    }
    Ok(RankResult::Exceeds)
}
