//! Dense rational vectors and matrices, and an exact positive-semidefinite
//! test with rational witness vectors.

use std::fmt::Write as _;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::rational::Rational;

/// Dense rational vector.
pub type RVec = Vec<Rational>;

pub fn rvec_from_i64(v: &[i64]) -> RVec {
    v.iter().map(|&x| Rational::int(x)).collect()
}

pub fn zeros(n: usize) -> RVec {
    vec![Rational::zero(); n]
}

/// Standard basis vector `e_i` of length `n`.
pub fn unit(n: usize, i: usize) -> RVec {
    let mut v = zeros(n);
    v[i] = Rational::one();
    v
}

pub fn dot(a: &[Rational], b: &[Rational]) -> Rational {
    assert_eq!(a.len(), b.len(), "dot: length mismatch");
    let mut acc = Rational::zero();
    for (x, y) in a.iter().zip(b) {
        if !x.is_zero() && !y.is_zero() {
            acc += x * y;
        }
    }
    acc
}

pub fn add_scaled(dst: &mut [Rational], src: &[Rational], factor: &Rational) {
    assert_eq!(dst.len(), src.len(), "add_scaled: length mismatch");
    if factor.is_zero() {
        return;
    }
    for (d, s) in dst.iter_mut().zip(src) {
        if !s.is_zero() {
            *d += s * factor;
        }
    }
}

pub fn scale(v: &mut [Rational], factor: &Rational) {
    for x in v.iter_mut() {
        *x *= factor;
    }
}

/// Dense row-major rational matrix.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RMat {
    nrows: usize,
    ncols: usize,
    data: Vec<Rational>,
}

impl RMat {
    pub fn zero(nrows: usize, ncols: usize) -> RMat {
        RMat { nrows, ncols, data: vec![Rational::zero(); nrows * ncols] }
    }

    pub fn from_rows(rows: Vec<RVec>) -> RMat {
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, |r| r.len());
        let mut data = Vec::with_capacity(nrows * ncols);
        for r in rows {
            assert_eq!(r.len(), ncols, "from_rows: ragged rows");
            data.extend(r);
        }
        RMat { nrows, ncols, data }
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> &Rational {
        &self.data[i * self.ncols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: Rational) {
        self.data[i * self.ncols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[Rational] {
        &self.data[i * self.ncols..(i + 1) * self.ncols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [Rational] {
        &mut self.data[i * self.ncols..(i + 1) * self.ncols]
    }

    pub fn mul_vec(&self, v: &[Rational]) -> RVec {
        assert_eq!(v.len(), self.ncols, "mul_vec: length mismatch");
        (0..self.nrows).map(|i| dot(self.row(i), v)).collect()
    }
}

/// Dense symmetric rational matrix; writes keep both triangles in sync.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SymMat {
    n: usize,
    data: Vec<Rational>,
}

impl SymMat {
    pub fn zero(n: usize) -> SymMat {
        SymMat { n, data: vec![Rational::zero(); n * n] }
    }

    pub fn identity(n: usize) -> SymMat {
        let mut m = SymMat::zero(n);
        for i in 0..n {
            m.set(i, i, Rational::one());
        }
        m
    }

    pub fn diag(entries: &[Rational]) -> SymMat {
        let mut m = SymMat::zero(entries.len());
        for (i, e) in entries.iter().enumerate() {
            m.set(i, i, e.clone());
        }
        m
    }

    /// `v vᵀ`.
    pub fn outer(v: &[Rational]) -> SymMat {
        let n = v.len();
        let mut m = SymMat::zero(n);
        for i in 0..n {
            for j in 0..n {
                m.data[i * n + j] = &v[i] * &v[j];
            }
        }
        m
    }

    /// Symmetrized product `u vᵀ + v uᵀ`.
    pub fn sym_outer(u: &[Rational], v: &[Rational]) -> SymMat {
        let n = u.len();
        assert_eq!(v.len(), n);
        let mut m = SymMat::zero(n);
        for i in 0..n {
            for j in 0..n {
                m.data[i * n + j] = &u[i] * &v[j] + &v[i] * &u[j];
            }
        }
        m
    }

    pub fn from_rows(rows: Vec<RVec>) -> Result<SymMat> {
        let n = rows.len();
        let m = RMat::from_rows(rows);
        if m.ncols() != n {
            return Err(Error::Dimension("symmetric matrix must be square".into()));
        }
        for i in 0..n {
            for j in 0..i {
                if m.get(i, j) != m.get(j, i) {
                    return Err(Error::Dimension(format!(
                        "matrix not symmetric at ({i},{j})"
                    )));
                }
            }
        }
        Ok(SymMat { n, data: m.data })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> &Rational {
        &self.data[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: Rational) {
        self.data[i * self.n + j] = v.clone();
        self.data[j * self.n + i] = v;
    }

    pub fn add_to(&mut self, i: usize, j: usize, v: &Rational) {
        let cur = self.get(i, j).clone();
        self.set(i, j, cur + v);
    }

    pub fn col(&self, j: usize) -> RVec {
        (0..self.n).map(|i| self.get(i, j).clone()).collect()
    }

    pub fn diagonal(&self) -> RVec {
        (0..self.n).map(|i| self.get(i, i).clone()).collect()
    }

    pub fn mul_vec(&self, v: &[Rational]) -> RVec {
        assert_eq!(v.len(), self.n, "mul_vec: length mismatch");
        (0..self.n)
            .map(|i| dot(&self.data[i * self.n..(i + 1) * self.n], v))
            .collect()
    }

    /// `uᵀ M u`, exactly.
    pub fn quadratic_form(&self, u: &[Rational]) -> Rational {
        dot(u, &self.mul_vec(u))
    }

    /// Trace inner product `⟨A, B⟩ = Σ A_ij B_ij`.
    pub fn inner(&self, other: &SymMat) -> Rational {
        assert_eq!(self.n, other.n, "inner: size mismatch");
        dot(&self.data, &other.data)
    }

    pub fn scaled(&self, factor: &Rational) -> SymMat {
        let mut m = self.clone();
        scale(&mut m.data, factor);
        m
    }

    pub fn add(&self, other: &SymMat) -> SymMat {
        assert_eq!(self.n, other.n, "add: size mismatch");
        let mut m = self.clone();
        for (d, s) in m.data.iter_mut().zip(&other.data) {
            *d += s;
        }
        m
    }

    pub fn sub(&self, other: &SymMat) -> SymMat {
        assert_eq!(self.n, other.n, "sub: size mismatch");
        let mut m = self.clone();
        for (d, s) in m.data.iter_mut().zip(&other.data) {
            *d -= s;
        }
        m
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Rational::is_zero)
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.data.iter().map(Rational::to_f64).collect()
    }

    /// Text form: a `dim n` line, then `n` rows of `n` rationals.
    pub fn render(&self) -> String {
        let mut s = format!("dim {}\n", self.n);
        for i in 0..self.n {
            let row: Vec<String> = (0..self.n).map(|j| self.get(i, j).to_string()).collect();
            let _ = writeln!(s, "{}", row.join(" "));
        }
        s
    }

    pub fn parse(text: &str) -> Result<SymMat> {
        let mut tokens = Vec::new();
        let mut dim: Option<usize> = None;
        for line in text.lines() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if dim.is_none() {
                let rest = line
                    .strip_prefix("dim")
                    .ok_or_else(|| Error::Parse("matrix file must start with 'dim n'".into()))?;
                dim = Some(
                    rest.trim()
                        .parse::<usize>()
                        .map_err(|_| Error::Parse("invalid dimension line".into()))?,
                );
                continue;
            }
            for tok in line.split_whitespace() {
                tokens.push(Rational::from_str(tok)?);
            }
        }
        let n = dim.ok_or_else(|| Error::Parse("missing 'dim n' line".into()))?;
        if tokens.len() != n * n {
            return Err(Error::Parse(format!(
                "expected {} entries, found {}",
                n * n,
                tokens.len()
            )));
        }
        let rows: Vec<RVec> = tokens.chunks(n).map(|c| c.to_vec()).collect();
        SymMat::from_rows(rows)
    }
}

/// Outcome of the exact semidefiniteness test.
#[derive(Clone, Debug)]
pub enum PsdCheck {
    Psd,
    /// A rational `u` with `uᵀ M u < 0`, exactly.
    NotPsd { witness: RVec },
}

impl PsdCheck {
    pub fn is_psd(&self) -> bool {
        matches!(self, PsdCheck::Psd)
    }
}

/// Decides `uᵀ M u ≥ 0 for all u` by pivoted symmetric elimination over the
/// rationals.
///
/// Pivots are chosen as the smallest strictly positive diagonal entry, ties
/// broken toward the larger index; each pivot takes an exact Schur
/// complement.  A negative diagonal entry, or a nonzero row with a zero
/// diagonal, yields a witness which is lifted back through the recorded
/// pivots so that its quadratic form is preserved exactly.
pub fn ldlt_psd_check(m: &SymMat) -> PsdCheck {
    let n = m.n();
    let mut a = m.clone();
    let mut active: Vec<usize> = (0..n).collect();
    // (pivot index, multipliers a_ip / a_pp for the then-active indices)
    let mut pivots: Vec<(usize, Vec<(usize, Rational)>)> = Vec::new();

    let lift = |mut w: RVec, pivots: &[(usize, Vec<(usize, Rational)>)]| -> RVec {
        for (p, factors) in pivots.iter().rev() {
            let mut wp = Rational::zero();
            for (i, f) in factors {
                if !w[*i].is_zero() {
                    wp -= &w[*i] * f;
                }
            }
            w[*p] = wp;
        }
        w
    };

    loop {
        if active.is_empty() {
            return PsdCheck::Psd;
        }
        if let Some(&i) = active.iter().find(|&&i| a.get(i, i).is_negative()) {
            let w = lift(unit(n, i), &pivots);
            debug_assert!(m.quadratic_form(&w).is_negative());
            return PsdCheck::NotPsd { witness: w };
        }
        // Smallest strictly positive diagonal entry; ties toward larger index.
        let mut pivot: Option<usize> = None;
        for &i in &active {
            let d = a.get(i, i);
            if d.is_positive() && pivot.is_none_or(|p| d <= a.get(p, p)) {
                pivot = Some(i);
            }
        }
        let Some(p) = pivot else {
            // All active diagonal entries are zero; any nonzero off-diagonal
            // entry gives a 2x2 witness.
            for (k, &i) in active.iter().enumerate() {
                for &j in &active[k + 1..] {
                    let s = a.get(i, j);
                    if !s.is_zero() {
                        let mut w = unit(n, i);
                        w[j] = if s.is_positive() { -Rational::one() } else { Rational::one() };
                        let w = lift(w, &pivots);
                        debug_assert!(m.quadratic_form(&w).is_negative());
                        return PsdCheck::NotPsd { witness: w };
                    }
                }
            }
            return PsdCheck::Psd;
        };
        active.retain(|&i| i != p);
        let pd = a.get(p, p).clone();
        let factors: Vec<(usize, Rational)> = active
            .iter()
            .filter(|&&i| !a.get(i, p).is_zero())
            .map(|&i| (i, a.get(i, p) / &pd))
            .collect();
        for (i, fi) in &factors {
            for (j, _) in factors.iter().filter(|(j, _)| j >= i) {
                let v = a.get(*i, *j) - fi * a.get(*j, p);
                a.set(*i, *j, v);
            }
        }
        pivots.push((p, factors));
    }
}

/// Plain-text matrix block: one row per line, entries as exact rationals
/// separated by whitespace.
pub fn render_rmat(m: &RMat) -> String {
    let mut s = String::new();
    for i in 0..m.nrows() {
        let line: Vec<String> = m.row(i).iter().map(Rational::to_string).collect();
        s.push_str(&line.join(" "));
        s.push('\n');
    }
    s
}

/// Parses the [`render_rmat`] format; `#` starts a comment, blank lines
/// are skipped, and all rows must have equal length.
pub fn parse_rmat(text: &str) -> Result<RMat> {
    let mut rows: Vec<RVec> = Vec::new();
    for line in text.lines() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let row: RVec = line
            .split_whitespace()
            .map(Rational::from_str)
            .collect::<Result<_>>()?;
        if let Some(first) = rows.first() {
            if row.len() != first.len() {
                return Err(Error::Parse("matrix rows have unequal lengths".into()));
            }
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::Parse("matrix text has no rows".into()));
    }
    Ok(RMat::from_rows(rows))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mat(rows: &[&[i64]]) -> SymMat {
        SymMat::from_rows(rows.iter().map(|r| rvec_from_i64(r)).collect()).unwrap()
    }

    fn frac_third_matrix() -> SymMat {
        // The 5x5 certificate-shaped matrix with first row/column and
        // diagonal equal to 1/3 (and 1 in the corner), zero elsewhere.
        let t = Rational::new(1, 3);
        let mut m = SymMat::zero(5);
        m.set(0, 0, Rational::one());
        for i in 1..5 {
            m.set(0, i, t.clone());
            m.set(i, i, t.clone());
        }
        m
    }

    #[test]
    fn identity_is_psd() {
        assert!(ldlt_psd_check(&SymMat::identity(3)).is_psd());
        assert!(ldlt_psd_check(&SymMat::zero(4)).is_psd());
    }

    #[test]
    fn indefinite_diag_witness() {
        let m = SymMat::diag(&[Rational::one(), Rational::int(-1)]);
        match ldlt_psd_check(&m) {
            PsdCheck::NotPsd { witness } => {
                assert_eq!(witness, rvec_from_i64(&[0, 1]));
                assert_eq!(m.quadratic_form(&witness), Rational::int(-1));
            }
            PsdCheck::Psd => panic!("expected witness"),
        }
    }

    #[test]
    fn zero_diagonal_offdiag_witness() {
        let m = mat(&[&[0, 1], &[1, 0]]);
        match ldlt_psd_check(&m) {
            PsdCheck::NotPsd { witness } => {
                assert!(m.quadratic_form(&witness).is_negative());
            }
            PsdCheck::Psd => panic!("expected witness"),
        }
    }

    #[test]
    fn third_matrix_witness_value() {
        let m = frac_third_matrix();
        match ldlt_psd_check(&m) {
            PsdCheck::NotPsd { witness } => {
                assert_eq!(witness, rvec_from_i64(&[1, -1, -1, -1, -1]));
                assert_eq!(m.quadratic_form(&witness), Rational::new(-1, 3));
            }
            PsdCheck::Psd => panic!("expected witness"),
        }
    }

    #[test]
    fn gram_matrices_are_psd() {
        // A Gram matrix V Vᵀ is positive semidefinite for any V.
        let mut seed = 3u64;
        let mut next = move || {
            seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((seed >> 33) % 11) as i64 - 5
        };
        for _ in 0..20 {
            let n = 4;
            let v: Vec<RVec> = (0..n).map(|_| rvec_from_i64(&[next(), next(), next()])).collect();
            let mut g = SymMat::zero(n);
            for i in 0..n {
                for j in 0..n {
                    g.set(i, j, dot(&v[i], &v[j]));
                }
            }
            assert!(ldlt_psd_check(&g).is_psd());
            // random vectors have nonnegative form
            for _ in 0..100 {
                let u = rvec_from_i64(&[next(), next(), next(), next()]);
                assert!(!g.quadratic_form(&u).is_negative());
            }
        }
    }

    #[test]
    fn rank_deficient_psd() {
        let ones = mat(&[&[1, 1, 1], &[1, 1, 1], &[1, 1, 1]]);
        assert!(ldlt_psd_check(&ones).is_psd());
    }

    #[test]
    fn witness_form_always_negative() {
        let mut seed = 17u64;
        let mut next = move || {
            seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((seed >> 33) % 9) as i64 - 4
        };
        let mut found = 0;
        for _ in 0..60 {
            let n = 4;
            let mut m = SymMat::zero(n);
            for i in 0..n {
                for j in i..n {
                    m.set(i, j, Rational::int(next()));
                }
            }
            if let PsdCheck::NotPsd { witness } = ldlt_psd_check(&m) {
                assert!(m.quadratic_form(&witness).is_negative());
                found += 1;
            }
        }
        assert!(found > 10);
    }

    #[test]
    fn matrix_text_round_trip() {
        let m = frac_third_matrix();
        let text = m.render();
        assert!(text.starts_with("dim 5\n"));
        let back = SymMat::parse(&text).unwrap();
        assert_eq!(m, back);
        assert!(SymMat::parse("dim 2\n1 0\n0").is_err());
        assert!(SymMat::parse("dim 2\n1 2\n3 4").is_err()); // not symmetric
    }
}
