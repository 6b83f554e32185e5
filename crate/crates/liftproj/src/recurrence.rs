//! Exact recurrences for the extremal symmetric point of the majority
//! cone under iterated lifting.
//!
//! `value(r, n₀, n₁)` is the largest common value of the free coordinates
//! of a point with `n₀` coordinates pinned to 0 and `n₁` pinned to 1 that
//! survives `r` rounds, tracked separately for the linear and the
//! semidefinite operator.  The level-`r` value follows from the two
//! level-`r−1` values `a` (one more zero) and `b` (one more one) as
//! `a/(1−b+a)`, with the semidefinite kind additionally capped by
//! `((p−1)b+1)/p` where `p` counts the free coordinates.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::lifted::OpKind;
use crate::rational::Rational;

/// Memoized table of symmetric-point values for one dimension and kind.
pub struct RecurrenceTable {
    d: usize,
    kind: OpKind,
    memo: HashMap<(usize, usize, usize), Rational>,
}

fn check_dim(d: usize) -> Result<usize> {
    if d < 2 || d % 2 != 0 {
        return Err(Error::Domain(format!("dimension must be even and ≥ 2, got {d}")));
    }
    Ok(d / 2)
}

impl RecurrenceTable {
    pub fn new(d: usize, kind: OpKind) -> Result<RecurrenceTable> {
        check_dim(d)?;
        if matches!(kind, OpKind::N0) {
            return Err(Error::Domain("recurrence kinds are n and nplus".into()));
        }
        Ok(RecurrenceTable { d, kind, memo: HashMap::new() })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn value(&mut self, r: usize, n0: usize, n1: usize) -> Result<Rational> {
        let half = self.d / 2;
        if n1 > half {
            return Err(Error::Domain(format!("n₁ = {n1} exceeds d/2 = {half}")));
        }
        if let Some(v) = self.memo.get(&(r, n0, n1)) {
            return Ok(v.clone());
        }
        let v = if self.d <= n0 + n1 {
            // no free coordinates: the constraint on them is vacuous
            Rational::one()
        } else if r == 0 {
            base_value(self.d, n0, n1)
        } else if n1 == half {
            // the pinned ones already exhaust the budget; n₀ ≥ d/2 has no
            // free coordinates and was handled above
            Rational::zero()
        } else {
            let a = self.value(r - 1, n0 + 1, n1)?;
            let b = self.value(r - 1, n0, n1 + 1)?;
            let mut v = &a / &(Rational::one() - &b + &a);
            if matches!(self.kind, OpKind::NPlus) {
                let p = Rational::int((self.d - n0 - n1) as i64);
                let cap = &(&(&p - &Rational::one()) * &b + &Rational::one()) / &p;
                if cap < v {
                    v = cap;
                }
            }
            v
        };
        debug_assert!(!v.is_negative() && v <= Rational::one());
        self.memo.insert((r, n0, n1), v.clone());
        Ok(v)
    }
}

fn base_value(d: usize, n0: usize, n1: usize) -> Rational {
    let half = (d / 2) as i64;
    if n0 < d / 2 {
        Rational::new(half - n1 as i64, half + 1 - n1 as i64)
    } else {
        Rational::one()
    }
}

pub fn c_value(d: usize, r: usize, n0: usize, n1: usize) -> Result<Rational> {
    RecurrenceTable::new(d, OpKind::N)?.value(r, n0, n1)
}

pub fn cplus_value(d: usize, r: usize, n0: usize, n1: usize) -> Result<Rational> {
    RecurrenceTable::new(d, OpKind::NPlus)?.value(r, n0, n1)
}

/// Smallest `r` with `value(r,0,0) = 1/2`, i.e. the level at which the
/// all-coordinates sum inequality becomes valid.
pub fn recurrence_rank(d: usize, kind: OpKind) -> Result<usize> {
    if d < 4 {
        return Err(Error::Domain("rank extraction needs d ≥ 4".into()));
    }
    let mut table = RecurrenceTable::new(d, kind)?;
    let target = Rational::new(1, 2);
    for r in 0..=d {
        if table.value(r, 0, 0)? == target {
            return Ok(r);
        }
    }
    Err(Error::Numerical("value(r,0,0) never reached 1/2 for r ≤ d".into()))
}

/// Compares `value(d−3, 0, 0)` for the linear kind against the closed
/// form `1/2 + 1/(5d−6)`; holds for even `d` (the odd case falls outside
/// the generator's domain and is not checked).
pub struct ClosedFormCheck {
    pub computed: Rational,
    pub closed_form: Rational,
}

impl ClosedFormCheck {
    pub fn matches(&self) -> bool {
        self.computed == self.closed_form
    }
}

pub fn closed_form_check(d: usize) -> Result<ClosedFormCheck> {
    if d < 4 {
        return Err(Error::Domain("closed form needs d ≥ 4".into()));
    }
    let computed = c_value(d, d - 3, 0, 0)?;
    let closed_form = Rational::new(1, 2) + Rational::new(1, 5 * d as i64 - 6);
    Ok(ClosedFormCheck { computed, closed_form })
}

/// Outcome of the exhaustive inequality suite; any violation is reported
/// with its exact values.
pub struct SuiteReport {
    pub checks: usize,
    pub violations: Vec<String>,
}

impl SuiteReport {
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Exhaustive in-range checks of the interlacing, lower-bound,
/// differential, difference-bound, and kind-agreement properties.
pub fn interlacing_suite(d: usize, r_max: usize) -> Result<SuiteReport> {
    let half = check_dim(d)?;
    let mut lin = RecurrenceTable::new(d, OpKind::N)?;
    let mut psd = RecurrenceTable::new(d, OpKind::NPlus)?;
    let mut checks = 0;
    let mut violations = Vec::new();
    let mut fail = |msg: String| violations.push(msg);

    // strict interlacing, both kinds
    for r in 1..=r_max.min(half) {
        for n0 in 0..=(half - r) {
            for n1 in 0..=(half - r) {
                for (name, table) in [("lin", &mut lin), ("psd", &mut psd)] {
                    let low = table.value(r - 1, n0, n1 + 1)?;
                    let mid = table.value(r, n0, n1)?;
                    let high = table.value(r - 1, n0 + 1, n1)?;
                    checks += 1;
                    if !(low < mid && mid < high) {
                        fail(format!("interlacing {name} ({r},{n0},{n1}): {low} {mid} {high}"));
                    }
                }
            }
        }
    }

    // lower bound: both kinds sit above the depth-s base value, strictly
    // unless r = n₀ = 0 where the bound is attained by definition
    for r in 0..=r_max.min(half) {
        for n0 in 0..=(half - r) {
            for n1 in 0..=(half - r - n0) {
                let s = r + n0 + n1;
                let cc = lin.value(r, n0, n1)?;
                let cp = psd.value(r, n0, n1)?;
                let bound = base_value(d, 0, s);
                checks += 1;
                if cp > cc {
                    fail(format!("kind order ({r},{n0},{n1}): {cp} > {cc}"));
                }
                let strict = r >= 1 || n0 >= 1;
                if strict && !(cp > bound) {
                    fail(format!("lower bound ({r},{n0},{n1}): {cp} ≤ {bound}"));
                }
                if !strict && cp != bound {
                    fail(format!("lower bound base ({r},{n0},{n1}): {cp} ≠ {bound}"));
                }
            }
        }
    }

    // differential interlacing, linear kind, strict in the stated range
    for r in 1..=r_max.min(half) {
        if half < r + 2 {
            break;
        }
        for n0 in 0..=(half - r - 2) {
            for n1 in 1..=(half - r) {
                let lhs = lin.value(r - 1, n0 + 2, n1 - 1)? - lin.value(r - 1, n0 + 1, n1)?;
                let mid = lin.value(r, n0 + 1, n1 - 1)? - lin.value(r, n0, n1)?;
                let rhs = lin.value(r - 1, n0 + 1, n1)? - lin.value(r - 1, n0, n1 + 1)?;
                checks += 1;
                if !(lhs < mid && mid < rhs) {
                    fail(format!("differential ({r},{n0},{n1}): {lhs} {mid} {rhs}"));
                }
            }
        }
    }

    // difference bound, linear kind: strict for r ≥ 2, attained at r = 1
    for r in 1..=r_max.min(half) {
        for n0 in 0..=(half - r) {
            for n1 in 0..=(half - r - n0) {
                let s = r + n0 + n1;
                let diff = lin.value(r - 1, n0 + 1, n1)? - lin.value(r - 1, n0, n1 + 1)?;
                let q = (half + 1 - s) as i64;
                let cap = Rational::new(1, q * (q + 1));
                let identity = lin.value(0, 1, s - 1)? - lin.value(0, 0, s)?;
                checks += 1;
                if identity != cap {
                    fail(format!("difference identity s={s}: {identity} ≠ {cap}"));
                }
                if diff > cap || (r >= 2 && diff == cap) {
                    fail(format!("difference bound ({r},{n0},{n1}): {diff} vs {cap}"));
                }
            }
        }
    }

    // kind agreement in the shallow range 4d ≤ (d+3−2s)²
    for r in 0..=r_max.min(half) {
        for n0 in 0..=(half - r) {
            for n1 in 0..=(half - r - n0) {
                let s = r + n0 + n1;
                let t = d as i64 + 3 - 2 * s as i64;
                if t < 0 || t * t < 4 * d as i64 {
                    continue;
                }
                checks += 1;
                let cc = lin.value(r, n0, n1)?;
                let cp = psd.value(r, n0, n1)?;
                if cc != cp {
                    fail(format!("kind agreement ({r},{n0},{n1}): {cc} ≠ {cp}"));
                }
            }
        }
    }

    Ok(SuiteReport { checks, violations })
}

/// One row of the level profile: both kind values at (r,0,0) and the
/// base-value lower bound `1 − 1/(d/2+1−r)`.
pub struct ProfileRow {
    pub r: usize,
    pub c_plus: Rational,
    pub c: Rational,
    pub bound: Rational,
}

/// Bottom-up column `value(k, 0, 0)` for `k = 0..=d/2`: layer `k` holds
/// the triangle `n₀+n₁ ≤ d/2−k`, each entry needing two neighbours from
/// the previous layer.  Linear memory in the layer size.
///
/// Entries grow to thousands of bits for large `d`, so the bulk
/// arithmetic runs on GMP-backed rationals; only the collected column is
/// converted back.  The memoized [`RecurrenceTable`] path uses the
/// crate-wide arithmetic instead, so cross-checking the two at moderate
/// `d` exercises two independent number backends.
fn profile_column(d: usize, kind: OpKind) -> Vec<Rational> {
    let half = d / 2;
    let psd = matches!(kind, OpKind::NPlus);
    let base = |n0: usize, n1: usize| {
        if n0 <= half - 1 {
            rug::Rational::from(((half - n1) as u64, (half + 1 - n1) as u64))
        } else {
            rug::Rational::from(1)
        }
    };
    let mut prev: Vec<Vec<rug::Rational>> = (0..=half)
        .map(|n0| (0..=(half - n0)).map(|n1| base(n0, n1)).collect())
        .collect();
    let mut out = vec![prev[0][0].clone()];
    for k in 1..=half {
        let lim = half - k;
        let cur: Vec<Vec<rug::Rational>> = (0..=lim)
            .map(|n0| {
                (0..=(lim - n0))
                    .map(|n1| {
                        let a = &prev[n0 + 1][n1];
                        let b = &prev[n0][n1 + 1];
                        let den = rug::Rational::from(1) - b + a;
                        let mut v = rug::Rational::from(a / &den);
                        if psd {
                            let p = (d - n0 - n1) as u64;
                            let cap = (rug::Rational::from(b * (p - 1)) + 1u64) / p;
                            if cap < v {
                                v = cap;
                            }
                        }
                        v
                    })
                    .collect()
            })
            .collect();
        out.push(cur[0][0].clone());
        prev = cur;
    }
    out.iter()
        .map(|v| v.to_string().parse().expect("rational round-trip"))
        .collect()
}

/// Profile rows for `r = 0..=d/2`; the two kinds are computed on separate
/// threads since their tables are independent.
pub fn level_profile(d: usize) -> Result<Vec<ProfileRow>> {
    let half = check_dim(d)?;
    let (col_plus, col_lin) = std::thread::scope(|s| {
        let plus = s.spawn(|| profile_column(d, OpKind::NPlus));
        let lin = s.spawn(|| profile_column(d, OpKind::N));
        (plus.join().expect("profile thread"), lin.join().expect("profile thread"))
    });
    Ok((0..=half)
        .map(|r| ProfileRow {
            r,
            c_plus: col_plus[r].clone(),
            c: col_lin[r].clone(),
            bound: Rational::one() - Rational::new(1, (half + 1 - r) as i64),
        })
        .collect())
}

/// CSV rendering: decimal with 12 significant digits, or exact rationals.
pub fn render_profile_csv(rows: &[ProfileRow], exact: bool) -> String {
    let mut s = String::from("r,c_plus,c,bound\n");
    for row in rows {
        let f = |v: &Rational| if exact { v.to_string() } else { v.to_decimal(12) };
        s.push_str(&format!(
            "{},{},{},{}\n",
            row.r,
            f(&row.c_plus),
            f(&row.c),
            f(&row.bound)
        ));
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, den: i64) -> Rational {
        Rational::new(n, den)
    }

    #[test]
    fn base_layer() {
        assert_eq!(c_value(10, 0, 0, 0).unwrap(), q(5, 6));
        assert_eq!(c_value(4, 0, 3, 0).unwrap(), Rational::one());
        assert_eq!(c_value(4, 0, 0, 2).unwrap(), Rational::zero());
        // both kinds share the base layer
        for n0 in 0..=3 {
            for n1 in 0..=3 {
                assert_eq!(
                    c_value(6, 0, n0, n1).unwrap(),
                    cplus_value(6, 0, n0, n1).unwrap()
                );
            }
        }
    }

    #[test]
    fn domain_errors() {
        assert!(matches!(c_value(5, 0, 0, 0), Err(Error::Domain(_))));
        assert!(matches!(c_value(4, 1, 0, 3), Err(Error::Domain(_))));
        assert!(RecurrenceTable::new(4, OpKind::N0).is_err());
    }

    #[test]
    fn four_dimensional_column() {
        assert_eq!(c_value(4, 1, 0, 0).unwrap(), q(4, 7));
        assert_eq!(c_value(4, 2, 0, 0).unwrap(), q(1, 2));
        assert_eq!(c_value(4, 1, 1, 0).unwrap(), q(2, 3));
        assert_eq!(c_value(4, 1, 0, 1).unwrap(), q(1, 3));
        // semidefinite cap does not bind at depth 1
        assert_eq!(cplus_value(4, 1, 0, 0).unwrap(), q(4, 7));
        assert_eq!(cplus_value(4, 2, 0, 0).unwrap(), q(1, 2));
    }

    #[test]
    fn six_and_eight_dimensional_columns() {
        let lin6: Vec<Rational> =
            (0..=4).map(|r| c_value(6, r, 0, 0).unwrap()).collect();
        assert_eq!(lin6, vec![q(3, 4), q(9, 13), q(21, 34), q(13, 24), q(1, 2)]);
        let psd6: Vec<Rational> =
            (0..=3).map(|r| cplus_value(6, r, 0, 0).unwrap()).collect();
        assert_eq!(psd6, vec![q(3, 4), q(9, 13), q(21, 34), q(1, 2)]);
        // spot values where the semidefinite cap binds
        assert_eq!(cplus_value(6, 1, 0, 2).unwrap(), q(1, 4));
        assert_eq!(cplus_value(6, 2, 0, 1).unwrap(), q(2, 5));
        assert_eq!(cplus_value(6, 2, 1, 0).unwrap(), q(7, 11));

        let lin8: Vec<Rational> =
            (0..=6).map(|r| c_value(8, r, 0, 0).unwrap()).collect();
        assert_eq!(
            lin8,
            vec![q(4, 5), q(16, 21), q(52, 73), q(136, 209), q(73, 125), q(9, 17), q(1, 2)]
        );
        assert_eq!(cplus_value(8, 4, 0, 0).unwrap(), q(1, 2));
        assert!(cplus_value(8, 3, 0, 0).unwrap() > q(1, 2));
    }

    #[test]
    fn ranks() {
        assert_eq!(recurrence_rank(4, OpKind::N).unwrap(), 2);
        assert_eq!(recurrence_rank(4, OpKind::NPlus).unwrap(), 2);
        assert_eq!(recurrence_rank(6, OpKind::N).unwrap(), 4);
        assert_eq!(recurrence_rank(6, OpKind::NPlus).unwrap(), 3);
        assert_eq!(recurrence_rank(8, OpKind::N).unwrap(), 6);
        assert_eq!(recurrence_rank(8, OpKind::NPlus).unwrap(), 4);
        assert_eq!(recurrence_rank(10, OpKind::N).unwrap(), 8);
        assert_eq!(recurrence_rank(10, OpKind::NPlus).unwrap(), 5);
    }

    #[test]
    fn closed_form() {
        for (d, want) in [(4usize, q(4, 7)), (6, q(13, 24)), (20, q(24, 47))] {
            let chk = closed_form_check(d).unwrap();
            assert!(chk.matches(), "d={d}");
            assert_eq!(chk.computed, want);
        }
    }

    #[test]
    fn suite_is_clean() {
        for d in [4usize, 6, 10, 16] {
            let report = interlacing_suite(d, d / 2).unwrap();
            assert!(report.is_clean(), "d={d}: {:?}", report.violations);
            assert!(report.checks > 0);
        }
        // hand-checked interlacing instance
        assert!(c_value(4, 0, 0, 1).unwrap() < c_value(4, 1, 0, 0).unwrap());
        assert!(c_value(4, 1, 0, 0).unwrap() < c_value(4, 0, 1, 0).unwrap());
    }

    #[test]
    fn profile_matches_memo() {
        let rows = level_profile(20).unwrap();
        assert_eq!(rows.len(), 11);
        for row in &rows {
            assert_eq!(row.c, c_value(20, row.r, 0, 0).unwrap());
            assert_eq!(row.c_plus, cplus_value(20, row.r, 0, 0).unwrap());
            if row.r >= 1 && row.r < 10 {
                assert!(row.c_plus > row.bound);
            }
        }
        assert_eq!(rows[0].c_plus, rows[0].bound);
        assert_eq!(rows[10].c_plus, q(1, 2));
    }

    #[test]
    fn csv_rendering() {
        let rows = level_profile(4).unwrap();
        let csv = render_profile_csv(&rows, false);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "r,c_plus,c,bound");
        assert_eq!(lines[1], "0,0.666666666667,0.666666666667,0.666666666667");
        assert_eq!(lines[3], "2,0.500000000000,0.500000000000,0");
        let exact = render_profile_csv(&rows, true);
        assert!(exact.contains("1,4/7,4/7,1/2"));
    }
}
