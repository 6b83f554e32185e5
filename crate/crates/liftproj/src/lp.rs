//! Exact linear programming over the rationals.
//!
//! Problems are stated over free variables with `≥` and `=` rows.  The
//! solver runs a dense-tableau simplex method on the dual in standard form
//! with auxiliary (artificial) variables, priced by a two-level
//! lexicographic cost (auxiliary level, then real level) so the phase-1
//! objective is exact; Bland's rule is used throughout, which guarantees
//! termination.  Every outcome carries an exact certificate — optimal dual
//! multipliers, an infeasibility combination, or a feasible point plus an
//! improving ray — and all certificates are re-verified in exact arithmetic
//! before being returned.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::linalg::{add_scaled, dot, zeros, RMat, RVec};
use crate::rational::Rational;

/// Relation of a constraint row: `aᵀz ≥ b` or `aᵀz = b`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Rel {
    Ge,
    Eq,
}

/// One linear constraint over free variables.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LpRow {
    pub coeffs: RVec,
    pub rel: Rel,
    pub rhs: Rational,
}

impl LpRow {
    pub fn ge(coeffs: RVec, rhs: Rational) -> LpRow {
        LpRow { coeffs, rel: Rel::Ge, rhs }
    }

    pub fn eq(coeffs: RVec, rhs: Rational) -> LpRow {
        LpRow { coeffs, rel: Rel::Eq, rhs }
    }

    pub fn satisfied_by(&self, z: &[Rational]) -> bool {
        let lhs = dot(&self.coeffs, z);
        match self.rel {
            Rel::Ge => lhs >= self.rhs,
            Rel::Eq => lhs == self.rhs,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sense {
    Max,
    Min,
}

#[derive(Clone, Debug)]
pub struct LinearProgram {
    pub n_vars: usize,
    pub rows: Vec<LpRow>,
    pub objective: RVec,
    pub sense: Sense,
}

impl LinearProgram {
    pub fn new(n_vars: usize, sense: Sense, objective: RVec) -> LinearProgram {
        LinearProgram { n_vars, rows: Vec::new(), objective, sense }
    }

    fn validate(&self) -> Result<()> {
        if self.objective.len() != self.n_vars {
            return Err(Error::Dimension("objective length != n_vars".into()));
        }
        for (k, row) in self.rows.iter().enumerate() {
            if row.coeffs.len() != self.n_vars {
                return Err(Error::Dimension(format!("row {k} length != n_vars")));
            }
        }
        Ok(())
    }

    pub fn is_feasible_point(&self, z: &[Rational]) -> bool {
        z.len() == self.n_vars && self.rows.iter().all(|r| r.satisfied_by(z))
    }

    pub fn objective_value(&self, z: &[Rational]) -> Rational {
        dot(&self.objective, z)
    }
}

/// Outcome of an exact solve.  All fields are exact rationals.
#[derive(Clone, Debug, PartialEq)]
pub enum LpSolution {
    /// `dual` holds one multiplier per row with `Σ y_k a_k = c` and
    /// `Σ y_k b_k = value`; on `≥` rows `y_k ≤ 0` when maximizing and
    /// `y_k ≥ 0` when minimizing.
    Optimal { point: RVec, value: Rational, dual: RVec },
    /// `farkas` holds one multiplier per row, nonnegative on `≥` rows, with
    /// `Σ ν_k a_k = 0` and `Σ ν_k b_k > 0`.
    Infeasible { farkas: RVec },
    /// `point` is feasible and `ray` improves the objective while keeping
    /// every row satisfied (`aᵀray ≥ 0` on `≥` rows, `aᵀray = 0` on `=`
    /// rows).
    Unbounded { point: RVec, ray: RVec },
}

impl LpSolution {
    pub fn optimal_value(&self) -> Option<&Rational> {
        match self {
            LpSolution::Optimal { value, .. } => Some(value),
            _ => None,
        }
    }
}

/// Exact verification of a solution against the stated program.
pub fn verify_solution(lp: &LinearProgram, sol: &LpSolution) -> Result<()> {
    let fail = |msg: &str| Err(Error::Numerical(format!("lp certificate check failed: {msg}")));
    match sol {
        LpSolution::Optimal { point, value, dual } => {
            if point.len() != lp.n_vars || dual.len() != lp.rows.len() {
                return fail("certificate dimensions");
            }
            if !lp.is_feasible_point(point) {
                return fail("primal point infeasible");
            }
            if &lp.objective_value(point) != value {
                return fail("objective value mismatch");
            }
            let mut comb = zeros(lp.n_vars);
            let mut bound = Rational::zero();
            for (row, y) in lp.rows.iter().zip(dual) {
                if row.rel == Rel::Ge {
                    let ok = match lp.sense {
                        Sense::Max => !y.is_positive(),
                        Sense::Min => !y.is_negative(),
                    };
                    if !ok {
                        return fail("dual multiplier sign");
                    }
                }
                add_scaled(&mut comb, &row.coeffs, y);
                bound += y * &row.rhs;
            }
            if comb != lp.objective {
                return fail("dual combination != objective");
            }
            if &bound != value {
                return fail("dual bound != value");
            }
        }
        LpSolution::Infeasible { farkas } => {
            if farkas.len() != lp.rows.len() {
                return fail("certificate dimensions");
            }
            let mut comb = zeros(lp.n_vars);
            let mut bound = Rational::zero();
            for (row, v) in lp.rows.iter().zip(farkas) {
                if row.rel == Rel::Ge && v.is_negative() {
                    return fail("farkas multiplier sign");
                }
                add_scaled(&mut comb, &row.coeffs, v);
                bound += v * &row.rhs;
            }
            if comb.iter().any(|c| !c.is_zero()) {
                return fail("farkas combination != 0");
            }
            if !bound.is_positive() {
                return fail("farkas bound not positive");
            }
        }
        LpSolution::Unbounded { point, ray } => {
            if point.len() != lp.n_vars || ray.len() != lp.n_vars {
                return fail("certificate dimensions");
            }
            if !lp.is_feasible_point(point) {
                return fail("point infeasible");
            }
            for row in &lp.rows {
                let v = dot(&row.coeffs, ray);
                let ok = match row.rel {
                    Rel::Ge => !v.is_negative(),
                    Rel::Eq => v.is_zero(),
                };
                if !ok {
                    return fail("ray leaves feasible region");
                }
            }
            let gain = dot(&lp.objective, ray);
            let ok = match lp.sense {
                Sense::Max => gain.is_positive(),
                Sense::Min => gain.is_negative(),
            };
            if !ok {
                return fail("ray does not improve objective");
            }
        }
    }
    Ok(())
}

pub fn solve(lp: &LinearProgram) -> Result<LpSolution> {
    lp.validate()?;
    let obj: RVec = match lp.sense {
        Sense::Max => lp.objective.clone(),
        Sense::Min => lp.objective.iter().map(|c| -c).collect(),
    };
    let sol = match solve_max(lp, &obj)? {
        Inner::Optimal { point, dual } => {
            let value = lp.objective_value(&point);
            let dual = match lp.sense {
                Sense::Max => dual,
                Sense::Min => dual.iter().map(|y| -y).collect(),
            };
            LpSolution::Optimal { point, value, dual }
        }
        Inner::Infeasible { farkas } => LpSolution::Infeasible { farkas },
        Inner::DualInfeasible { ray } => match solve_max(lp, &zeros(lp.n_vars))? {
            Inner::Optimal { point, .. } => LpSolution::Unbounded { point, ray },
            Inner::Infeasible { farkas } => LpSolution::Infeasible { farkas },
            Inner::DualInfeasible { .. } => {
                return Err(Error::Numerical("feasibility subproblem cannot lack a dual".into()))
            }
        },
    };
    verify_solution(lp, &sol)?;
    Ok(sol)
}

enum Inner {
    /// `dual` satisfies `Σ y_k a_k = obj`, `y ≤ 0` on `≥` rows.
    Optimal { point: RVec, dual: RVec },
    Infeasible { farkas: RVec },
    /// `ray` satisfies `aᵀray ≥ 0` / `= 0` per row and `objᵀray > 0`.
    DualInfeasible { ray: RVec },
}

#[derive(Clone, Copy, Debug)]
enum Origin {
    Ge(usize),
    EqPlus(usize),
    EqMinus(usize),
    Art,
}

struct Col {
    entries: Vec<(usize, Rational)>,
    cost: Rational,
    origin: Origin,
}

/// Maximize `objᵀz` over the rows of `lp` (the stated sense is ignored) by
/// running the simplex method on the dual in standard form.
fn solve_max(lp: &LinearProgram, obj: &RVec) -> Result<Inner> {
    let p = lp.n_vars;
    // Exact duplicate rows collapse onto their first occurrence; the
    // removed copies keep zero multipliers in every certificate.
    let mut seen: HashMap<(Rel, RVec, Rational), ()> = HashMap::new();
    let mut kept: Vec<usize> = Vec::new();
    for (k, row) in lp.rows.iter().enumerate() {
        let key = (row.rel, row.coeffs.clone(), row.rhs.clone());
        if seen.insert(key, ()).is_none() {
            kept.push(k);
        }
    }

    // Row signs are flipped so the standard-form right-hand side is >= 0.
    let sigma: Vec<bool> = obj.iter().map(Rational::is_negative).collect();
    let ctilde: RVec = obj.iter().map(Rational::abs).collect();
    let flip = |coeffs: &RVec, negate: bool| -> Vec<(usize, Rational)> {
        coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(i, c)| {
                let v = if negate != sigma[i] { -c } else { c.clone() };
                (i, v)
            })
            .collect()
    };

    let mut cols: Vec<Col> = Vec::new();
    for &k in &kept {
        let row = &lp.rows[k];
        match row.rel {
            Rel::Ge => cols.push(Col {
                entries: flip(&row.coeffs, true),
                cost: -&row.rhs,
                origin: Origin::Ge(k),
            }),
            Rel::Eq => {
                cols.push(Col {
                    entries: flip(&row.coeffs, false),
                    cost: row.rhs.clone(),
                    origin: Origin::EqPlus(k),
                });
                cols.push(Col {
                    entries: flip(&row.coeffs, true),
                    cost: -&row.rhs,
                    origin: Origin::EqMinus(k),
                });
            }
        }
    }
    let n_real = cols.len();

    // Dense tableau [B⁻¹G | B⁻¹] with the auxiliary identity block on the
    // right; the initial basis is the auxiliary block itself.
    let n_cols = n_real + p;
    let mut t = RMat::zero(p, n_cols);
    let mut cost_art = zeros(n_cols);
    let mut cost_real = zeros(n_cols);
    for (j, col) in cols.iter().enumerate() {
        let mut colsum = Rational::zero();
        for (i, v) in &col.entries {
            t.set(*i, j, v.clone());
            colsum += v;
        }
        cost_art[j] = -colsum;
        cost_real[j] = col.cost.clone();
    }
    for i in 0..p {
        t.set(i, n_real + i, Rational::one());
    }

    let mut sx = Simplex {
        p,
        n_real,
        origins: cols.iter().map(|c| c.origin).collect(),
        costs: cols.iter().map(|c| c.cost.clone()).collect(),
        t,
        xb: ctilde,
        basis: (n_real..n_cols).collect(),
        cost_art,
        cost_real,
        art_in_basis: p,
    };

    let unflip = |v: &[Rational]| -> RVec {
        v.iter().zip(&sigma).map(|(x, &s)| if s { -x } else { x.clone() }).collect()
    };

    match sx.run() {
        RunEnd::Ray { entering, u } => {
            let mut farkas = zeros(lp.rows.len());
            let mut add = |origin: Origin, val: Rational| -> Result<()> {
                match origin {
                    Origin::Ge(k) => farkas[k] += val,
                    Origin::EqPlus(k) => farkas[k] -= val,
                    Origin::EqMinus(k) => farkas[k] += val,
                    Origin::Art => {
                        if !val.is_zero() {
                            return Err(Error::Numerical(
                                "improving ray touches auxiliary column".into(),
                            ));
                        }
                    }
                }
                Ok(())
            };
            add(sx.origin_of(entering), Rational::one())?;
            for (i, ui) in u.iter().enumerate() {
                if !ui.is_zero() {
                    add(sx.origin_of(sx.basis[i]), -ui)?;
                }
            }
            Ok(Inner::Infeasible { farkas })
        }
        RunEnd::Optimal => {
            let mut art_sum = Rational::zero();
            for (i, &b) in sx.basis.iter().enumerate() {
                if matches!(sx.origin_of(b), Origin::Art) {
                    art_sum += &sx.xb[i];
                }
            }
            if !art_sum.is_zero() {
                return Ok(Inner::DualInfeasible { ray: unflip(&sx.multipliers(true)) });
            }
            let point = unflip(&sx.multipliers(false));
            let mut dual = zeros(lp.rows.len());
            for (i, &b) in sx.basis.iter().enumerate() {
                let val = &sx.xb[i];
                match sx.origin_of(b) {
                    Origin::Ge(k) => dual[k] -= val,
                    Origin::EqPlus(k) => dual[k] += val,
                    Origin::EqMinus(k) => dual[k] -= val,
                    Origin::Art => {}
                }
            }
            Ok(Inner::Optimal { point, dual })
        }
    }
}

enum RunEnd {
    Optimal,
    Ray { entering: usize, u: RVec },
}

struct Simplex {
    p: usize,
    n_real: usize,
    /// Per real column: the constraint row it came from.
    origins: Vec<Origin>,
    /// Per real column: its real-level cost.
    costs: RVec,
    /// Current tableau `B⁻¹[G | I]`, auxiliary identity block last.
    t: RMat,
    /// Basic values `B⁻¹c̃`; kept nonnegative by the ratio test.
    xb: RVec,
    /// Column index occupying each basis position.
    basis: Vec<usize>,
    /// Reduced-cost rows for the auxiliary and real cost levels.
    cost_art: RVec,
    cost_real: RVec,
    art_in_basis: usize,
}

impl Simplex {
    fn origin_of(&self, col: usize) -> Origin {
        if col < self.n_real {
            self.origins[col]
        } else {
            Origin::Art
        }
    }

    /// Min-ratio row; ties go to the smallest basic column index.
    fn choose_leaving(&self, e: usize) -> Option<usize> {
        let mut best: Option<(Rational, usize, usize)> = None;
        for i in 0..self.p {
            let ui = self.t.get(i, e);
            if !ui.is_positive() {
                continue;
            }
            let ratio = &self.xb[i] / ui;
            let better = match &best {
                None => true,
                Some((bt, bcol, _)) => ratio < *bt || (ratio == *bt && self.basis[i] < *bcol),
            };
            if better {
                best = Some((ratio, self.basis[i], i));
            }
        }
        best.map(|(_, _, i)| i)
    }

    fn pivot(&mut self, entering: usize, r: usize) {
        let inv = self.t.get(r, entering).recip();
        for v in self.t.row_mut(r) {
            if !v.is_zero() {
                *v *= &inv;
            }
        }
        self.xb[r] *= &inv;
        let row_r: RVec = self.t.row(r).to_vec();
        let xbr = self.xb[r].clone();
        for i in 0..self.p {
            if i == r {
                continue;
            }
            let f = -self.t.get(i, entering);
            if f.is_zero() {
                continue;
            }
            add_scaled(self.t.row_mut(i), &row_r, &f);
            let delta = &f * &xbr;
            self.xb[i] += delta;
        }
        let fa = -&self.cost_art[entering];
        if !fa.is_zero() {
            add_scaled(&mut self.cost_art, &row_r, &fa);
        }
        let fr = -&self.cost_real[entering];
        if !fr.is_zero() {
            add_scaled(&mut self.cost_real, &row_r, &fr);
        }
        if matches!(self.origin_of(self.basis[r]), Origin::Art) {
            self.art_in_basis -= 1;
        }
        self.basis[r] = entering;
    }

    fn ray(&self, entering: usize) -> RunEnd {
        let u: RVec = (0..self.p).map(|i| self.t.get(i, entering).clone()).collect();
        RunEnd::Ray { entering, u }
    }

    fn run(&mut self) -> RunEnd {
        // Phase one: drive the auxiliary objective to its minimum
        // (Bland's rule on the auxiliary reduced costs).
        loop {
            let Some(e) = (0..self.n_real).find(|&j| self.cost_art[j].is_negative()) else {
                break;
            };
            match self.choose_leaving(e) {
                Some(r) => self.pivot(e, r),
                // The auxiliary objective is bounded below by zero, so no
                // improving ray exists; surface it rather than loop.
                None => return self.ray(e),
            }
        }
        if self.basis.iter().enumerate().any(|(i, &b)| {
            matches!(self.origin_of(b), Origin::Art) && !self.xb[i].is_zero()
        }) {
            // Auxiliary mass is stuck at a positive level; the caller reads
            // the auxiliary multipliers off this basis.
            return RunEnd::Optimal;
        }
        // Auxiliary columns left basic at level zero would block the real
        // multipliers from satisfying the rows behind positive-auxiliary
        // columns.  Pivot each out wherever a real column crosses its row;
        // rows with no crossing are redundant and stay inert (their tableau
        // entries and basic values remain zero through later pivots).
        for i in 0..self.p {
            if self.art_in_basis == 0 {
                break;
            }
            if !matches!(self.origin_of(self.basis[i]), Origin::Art) {
                continue;
            }
            if let Some(j) = (0..self.n_real).find(|&j| !self.t.get(i, j).is_zero()) {
                self.pivot(j, i);
            }
        }
        // Phase two: optimize the real objective.  Auxiliary columns never
        // re-enter, and the surviving auxiliary rows are all-zero across
        // real columns, so the auxiliary level stays pinned at zero.
        loop {
            let Some(e) = (0..self.n_real).find(|&j| self.cost_real[j].is_negative()) else {
                return RunEnd::Optimal;
            };
            match self.choose_leaving(e) {
                Some(r) => self.pivot(e, r),
                None => return self.ray(e),
            }
        }
    }

    /// Simplex multipliers of the selected cost level at the current basis,
    /// read off the auxiliary identity block (which holds `B⁻¹`).
    fn multipliers(&self, art_level: bool) -> RVec {
        let mut pi = zeros(self.p);
        for (i, &b) in self.basis.iter().enumerate() {
            let c = match (b < self.n_real, art_level) {
                (true, true) => Rational::zero(),
                (true, false) => self.costs[b].clone(),
                (false, true) => Rational::one(),
                (false, false) => Rational::zero(),
            };
            if c.is_zero() {
                continue;
            }
            let row = &self.t.row(i)[self.n_real..];
            add_scaled(&mut pi, row, &c);
        }
        pi
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::rvec_from_i64;

    struct Lcg(u64);
    impl Lcg {
        fn next(&mut self) -> u64 {
            self.0 = self.0.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            self.0 >> 33
        }
        fn int(&mut self, lo: i64, hi: i64) -> i64 {
            lo + (self.next() % ((hi - lo + 1) as u64)) as i64
        }
    }

    fn lp(n: usize, sense: Sense, obj: &[i64]) -> LinearProgram {
        LinearProgram::new(n, sense, rvec_from_i64(obj))
    }

    #[test]
    fn optimum_with_duals_small() {
        let mut prob = lp(2, Sense::Max, &[1, 2]);
        prob.rows.push(LpRow::ge(rvec_from_i64(&[-1, -1]), Rational::int(-1)));
        prob.rows.push(LpRow::ge(rvec_from_i64(&[1, 0]), Rational::zero()));
        prob.rows.push(LpRow::ge(rvec_from_i64(&[0, 1]), Rational::zero()));
        match solve(&prob).unwrap() {
            LpSolution::Optimal { point, value, dual } => {
                assert_eq!(point, rvec_from_i64(&[0, 1]));
                assert_eq!(value, Rational::int(2));
                assert_eq!(dual, rvec_from_i64(&[-2, -1, 0]));
            }
            other => panic!("expected optimum, got {other:?}"),
        }
    }

    #[test]
    fn min_sense() {
        let mut prob = lp(1, Sense::Min, &[1]);
        prob.rows.push(LpRow::ge(rvec_from_i64(&[1]), Rational::int(3)));
        match solve(&prob).unwrap() {
            LpSolution::Optimal { point, value, dual } => {
                assert_eq!(point, rvec_from_i64(&[3]));
                assert_eq!(value, Rational::int(3));
                assert_eq!(dual, rvec_from_i64(&[1]));
            }
            other => panic!("expected optimum, got {other:?}"),
        }
    }

    #[test]
    fn eq_rows() {
        let mut prob = lp(2, Sense::Max, &[1, 1]);
        prob.rows.push(LpRow::eq(rvec_from_i64(&[1, 1]), Rational::one()));
        prob.rows.push(LpRow::ge(rvec_from_i64(&[1, 0]), Rational::zero()));
        prob.rows.push(LpRow::ge(rvec_from_i64(&[0, 1]), Rational::zero()));
        let sol = solve(&prob).unwrap();
        assert_eq!(sol.optimal_value(), Some(&Rational::one()));

        let mut bad = lp(1, Sense::Max, &[0]);
        bad.rows.push(LpRow::eq(rvec_from_i64(&[1]), Rational::one()));
        bad.rows.push(LpRow::eq(rvec_from_i64(&[1]), Rational::int(2)));
        assert!(matches!(solve(&bad).unwrap(), LpSolution::Infeasible { .. }));
    }

    #[test]
    fn infeasible_farkas() {
        let mut prob = lp(1, Sense::Max, &[1]);
        prob.rows.push(LpRow::ge(rvec_from_i64(&[1]), Rational::one()));
        prob.rows.push(LpRow::ge(rvec_from_i64(&[-1]), Rational::zero()));
        match solve(&prob).unwrap() {
            LpSolution::Infeasible { farkas } => {
                // combination checks are re-done here independently
                assert!(farkas.iter().all(|v| !v.is_negative()));
                let a = &farkas[0] - &farkas[1];
                assert!(a.is_zero());
                assert!(farkas[0].is_positive());
            }
            other => panic!("expected infeasible, got {other:?}"),
        }
    }

    #[test]
    fn unbounded_with_ray() {
        let mut prob = lp(1, Sense::Max, &[1]);
        prob.rows.push(LpRow::ge(rvec_from_i64(&[1]), Rational::zero()));
        match solve(&prob).unwrap() {
            LpSolution::Unbounded { point, ray } => {
                assert!(prob.is_feasible_point(&point));
                assert!(ray[0].is_positive());
            }
            other => panic!("expected unbounded, got {other:?}"),
        }

        let mut probmin = lp(1, Sense::Min, &[1]);
        probmin.rows.push(LpRow::ge(rvec_from_i64(&[-1]), Rational::zero()));
        match solve(&probmin).unwrap() {
            LpSolution::Unbounded { ray, .. } => assert!(ray[0].is_negative()),
            other => panic!("expected unbounded, got {other:?}"),
        }
    }

    #[test]
    fn degenerate_vertex() {
        let mut prob = lp(2, Sense::Max, &[1, 1]);
        for (a, b, r) in [(-1i64, -2i64, -1i64), (-2, -1, -1), (-1, -1, -1), (-2, -2, -2)] {
            prob.rows.push(LpRow::ge(rvec_from_i64(&[a, b]), Rational::int(r)));
        }
        prob.rows.push(LpRow::ge(rvec_from_i64(&[1, 0]), Rational::zero()));
        prob.rows.push(LpRow::ge(rvec_from_i64(&[0, 1]), Rational::zero()));
        assert_eq!(solve(&prob).unwrap().optimal_value(), Some(&Rational::new(2, 3)));
    }

    #[test]
    fn duplicate_rows_get_zero_multipliers() {
        let mut prob = lp(1, Sense::Max, &[-1]);
        for _ in 0..5 {
            prob.rows.push(LpRow::ge(rvec_from_i64(&[1]), Rational::int(2)));
        }
        match solve(&prob).unwrap() {
            LpSolution::Optimal { value, dual, .. } => {
                assert_eq!(value, Rational::int(-2));
                assert_eq!(dual.len(), 5);
                assert_eq!(dual[0], Rational::int(-1));
                assert!(dual[1..].iter().all(Rational::is_zero));
            }
            other => panic!("expected optimum, got {other:?}"),
        }
    }

    #[test]
    fn zero_rows() {
        let mut prob = lp(2, Sense::Max, &[0, 0]);
        prob.rows.push(LpRow::ge(rvec_from_i64(&[0, 0]), Rational::one()));
        assert!(matches!(solve(&prob).unwrap(), LpSolution::Infeasible { .. }));

        let mut ok = lp(1, Sense::Max, &[0]);
        ok.rows.push(LpRow::ge(rvec_from_i64(&[0]), Rational::int(-1)));
        ok.rows.push(LpRow::ge(rvec_from_i64(&[1]), Rational::zero()));
        assert_eq!(ok.rows[0].rel, Rel::Ge);
        assert_eq!(solve(&ok).unwrap().optimal_value(), Some(&Rational::zero()));
    }

    #[test]
    fn five_cycle_relaxation() {
        // Fractional stable set on the 5-cycle: optimum 5/2 at the all-1/2
        // point.
        let mut prob = lp(5, Sense::Max, &[1, 1, 1, 1, 1]);
        for i in 0..5usize {
            let mut row = zeros(5);
            row[i] = Rational::int(-1);
            row[(i + 1) % 5] = Rational::int(-1);
            prob.rows.push(LpRow::ge(row, Rational::int(-1)));
        }
        for i in 0..5 {
            let mut row = zeros(5);
            row[i] = Rational::one();
            prob.rows.push(LpRow::ge(row, Rational::zero()));
        }
        match solve(&prob).unwrap() {
            LpSolution::Optimal { point, value, .. } => {
                assert_eq!(value, Rational::new(5, 2));
                assert!(point.iter().all(|x| *x == Rational::new(1, 2)));
            }
            other => panic!("expected optimum, got {other:?}"),
        }
    }

    #[test]
    fn determinism() {
        let mut rng = Lcg(99);
        let prob = random_lp(&mut rng, 3, 7);
        let a = solve(&prob).unwrap();
        let b = solve(&prob).unwrap();
        assert_eq!(format!("{a:?}"), format!("{b:?}"));
    }

    fn random_lp(rng: &mut Lcg, p: usize, m: usize) -> LinearProgram {
        let obj: Vec<i64> = (0..p).map(|_| rng.int(-3, 3)).collect();
        let mut prob = lp(p, Sense::Max, &obj);
        for _ in 0..m {
            let coeffs: Vec<i64> = (0..p).map(|_| rng.int(-3, 3)).collect();
            prob.rows.push(LpRow::ge(rvec_from_i64(&coeffs), Rational::int(rng.int(-3, 3))));
        }
        // box rows keep the region bounded
        for j in 0..p {
            let mut lo = zeros(p);
            lo[j] = Rational::one();
            prob.rows.push(LpRow::ge(lo, Rational::int(-4)));
            let mut hi = zeros(p);
            hi[j] = Rational::int(-1);
            prob.rows.push(LpRow::ge(hi, Rational::int(-4)));
        }
        prob
    }

    /// Independent oracle: enumerate all basic points of a bounded
    /// all-inequality system and maximize over the feasible ones.
    fn enumerate_optimum(prob: &LinearProgram) -> Option<Rational> {
        let p = prob.n_vars;
        let m = prob.rows.len();
        let mut best: Option<Rational> = None;
        let mut subset = vec![0usize; p];
        fn rec(
            prob: &LinearProgram,
            m: usize,
            start: usize,
            k: usize,
            subset: &mut Vec<usize>,
            best: &mut Option<Rational>,
        ) {
            let p = prob.n_vars;
            if k == p {
                if let Some(z) = solve_square(prob, subset) {
                    if prob.is_feasible_point(&z) {
                        let v = prob.objective_value(&z);
                        if best.as_ref().is_none_or(|b| v > *b) {
                            *best = Some(v);
                        }
                    }
                }
                return;
            }
            for i in start..m {
                subset[k] = i;
                rec(prob, m, i + 1, k + 1, subset, best);
            }
        }
        rec(prob, m, 0, 0, &mut subset, &mut best);
        best
    }

    fn solve_square(prob: &LinearProgram, subset: &[usize]) -> Option<RVec> {
        let p = prob.n_vars;
        let mut a: Vec<RVec> = subset.iter().map(|&i| prob.rows[i].coeffs.clone()).collect();
        let mut b: RVec = subset.iter().map(|&i| prob.rows[i].rhs.clone()).collect();
        for col in 0..p {
            let piv = (col..p).find(|&r| !a[r][col].is_zero())?;
            a.swap(col, piv);
            b.swap(col, piv);
            let inv = a[col][col].recip();
            for v in a[col].iter_mut() {
                *v *= &inv;
            }
            b[col] *= &inv;
            for r in 0..p {
                if r != col && !a[r][col].is_zero() {
                    let f = -&a[r][col];
                    let src = a[col].clone();
                    add_scaled(&mut a[r], &src, &f);
                    let delta = &f * &b[col];
                    b[r] += delta;
                }
            }
        }
        Some(b)
    }

    #[test]
    fn random_vs_enumeration() {
        let mut rng = Lcg(2024);
        let mut infeasible_seen = 0;
        for case in 0..200usize {
            let p = 2 + (case % 2);
            let m = 3 + (case % 4);
            let prob = random_lp(&mut rng, p, m);
            let oracle = enumerate_optimum(&prob);
            match solve(&prob).unwrap() {
                LpSolution::Optimal { value, .. } => {
                    assert_eq!(Some(value), oracle, "case {case}");
                }
                LpSolution::Infeasible { .. } => {
                    assert_eq!(oracle, None, "case {case}");
                    infeasible_seen += 1;
                }
                other => panic!("bounded LP returned {other:?}"),
            }
        }
        assert!(infeasible_seen > 5, "wanted infeasible cases in the mix");
    }
}
