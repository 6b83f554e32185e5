//! Homogenized 0-1 cones in inequality form: canonical row storage, faces,
//! coordinate flips, inclusion tests, 0-1 hulls, and the generator families
//! used throughout the crate.
//!
//! A cone lives in `R^{d+1}` with coordinates `(x₀, x₁, …, x_d)`; every row
//! `a` means `aᵀx ≥ 0`.  The box rows `x_i ≥ 0` and `x₀ − x_i ≥ 0` are
//! always present, so the `x₀ = 1` slice sits inside the unit cube.

use std::fmt::Write as _;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::linalg::{dot, zeros, RVec};
use crate::lp::{self, LinearProgram, LpRow, LpSolution, Sense};
use crate::rational::Rational;

/// Scale a rational vector to a primitive integer vector (same direction).
/// Zero vectors stay zero.
pub(crate) fn primitive_scale(v: &[Rational]) -> RVec {
    let mut lcm = BigInt::one();
    for x in v {
        let d = x.denom();
        lcm = lcm.lcm(&d);
    }
    let scaled: Vec<BigInt> = v
        .iter()
        .map(|x| x.numer() * (&lcm / x.denom()))
        .collect();
    let mut gcd = BigInt::zero();
    for n in &scaled {
        gcd = gcd.gcd(n);
    }
    if gcd.is_zero() {
        return zeros(v.len());
    }
    scaled
        .into_iter()
        .map(|n| Rational::from_big(n / &gcd, BigInt::one()))
        .collect()
}

/// A face selector: coordinates pinned to `0` and coordinates pinned to
/// `x₀`.  Indices are 1-based (coordinate 0 is the homogenizing variable).
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct FaceSpec {
    pub zeros: Vec<usize>,
    pub ones: Vec<usize>,
}

impl FaceSpec {
    pub fn new(zeros: Vec<usize>, ones: Vec<usize>) -> FaceSpec {
        FaceSpec { zeros, ones }
    }

    pub fn is_empty(&self) -> bool {
        self.zeros.is_empty() && self.ones.is_empty()
    }

    pub(crate) fn validate(&self, d: usize) -> Result<()> {
        for &i in self.zeros.iter().chain(&self.ones) {
            if i == 0 || i > d {
                return Err(Error::Dimension(format!("face index {i} outside 1..={d}")));
            }
        }
        for &i in &self.zeros {
            if self.ones.contains(&i) {
                return Err(Error::Dimension(format!("face index {i} pinned both ways")));
            }
        }
        Ok(())
    }
}

/// Homogenized cone `{x : aᵀx ≥ 0 for all rows a}` with canonical rows:
/// primitive integer entries, lexicographically sorted, deduplicated, no
/// zero rows, box rows always present.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HCone {
    d: usize,
    rows: Vec<RVec>,
}

fn box_rows(d: usize) -> Vec<RVec> {
    let mut rows = Vec::with_capacity(2 * d);
    for i in 1..=d {
        let mut lo = zeros(d + 1);
        lo[i] = Rational::one();
        rows.push(lo);
        let mut hi = zeros(d + 1);
        hi[0] = Rational::one();
        hi[i] = Rational::int(-1);
        rows.push(hi);
    }
    rows
}

fn is_box_row(row: &[Rational]) -> bool {
    let d = row.len() - 1;
    let nonzero: Vec<usize> = (0..=d).filter(|&i| !row[i].is_zero()).collect();
    match nonzero.as_slice() {
        [i] => *i >= 1 && row[*i] == Rational::one(),
        [0, i] => row[0] == Rational::one() && row[*i] == Rational::int(-1),
        _ => false,
    }
}

impl HCone {
    /// Builds a cone from `extra` rows, adding the box rows.
    pub fn with_box(d: usize, extra: Vec<RVec>) -> Result<HCone> {
        let mut rows = extra;
        rows.extend(box_rows(d));
        HCone::from_rows(d, rows)
    }

    /// Builds a cone from a complete row list; the box rows must already be
    /// present.
    pub fn from_rows(d: usize, rows: Vec<RVec>) -> Result<HCone> {
        for (k, row) in rows.iter().enumerate() {
            if row.len() != d + 1 {
                return Err(Error::Dimension(format!("row {k} has length {}, want {}", row.len(), d + 1)));
            }
        }
        let mut canonical: Vec<RVec> = rows
            .iter()
            .map(|r| primitive_scale(r))
            .filter(|r| r.iter().any(|x| !x.is_zero()))
            .collect();
        canonical.sort();
        canonical.dedup();
        for b in box_rows(d) {
            if !canonical.contains(&b) {
                return Err(Error::Dimension(format!(
                    "box row {} missing",
                    render_row(&b)
                )));
            }
        }
        Ok(HCone { d, rows: canonical })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn rows(&self) -> &[RVec] {
        &self.rows
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn is_box_row(&self, idx: usize) -> bool {
        is_box_row(&self.rows[idx])
    }

    /// Exact membership of a homogeneous point.
    pub fn slice_member(&self, x: &[Rational]) -> bool {
        x.len() == self.d + 1 && self.rows.iter().all(|r| !dot(r, x).is_negative())
    }

    /// The `x₀ = 1` slice as LP rows over variables `x₁..x_d`.
    pub fn slice_lp_rows(&self) -> Vec<LpRow> {
        self.rows
            .iter()
            .map(|r| LpRow::ge(r[1..].to_vec(), -&r[0]))
            .collect()
    }

    /// Intersection with a face (equalities encoded as inequality pairs).
    pub fn face_restrict(&self, face: &FaceSpec) -> Result<HCone> {
        face.validate(self.d)?;
        let mut rows = self.rows.clone();
        for &i in &face.zeros {
            let mut up = zeros(self.d + 1);
            up[i] = Rational::int(-1);
            rows.push(up);
        }
        for &i in &face.ones {
            let mut dn = zeros(self.d + 1);
            dn[0] = Rational::int(-1);
            dn[i] = Rational::one();
            rows.push(dn);
        }
        HCone::from_rows(self.d, rows)
    }

    /// Image under `x_i ↦ x₀ − x_i` for `i ∈ flips`, then the coordinate
    /// permutation `perm` (length `d`, 0-based images of 1-based
    /// coordinates: coordinate `i` maps to `perm[i−1]`).
    pub fn flip(&self, flips: &[usize], perm: &[usize]) -> Result<HCone> {
        validate_flip_args(self.d, flips, perm)?;
        let rows = self.rows.iter().map(|r| flip_row(r, flips, perm)).collect();
        HCone::from_rows(self.d, rows)
    }

    pub fn render(&self) -> String {
        let mut s = format!("d {}\nm {}\n", self.d, self.rows.len());
        for row in &self.rows {
            let _ = writeln!(s, "{}", render_row(row));
        }
        s
    }

    pub fn parse(text: &str) -> Result<HCone> {
        let mut lines = text
            .lines()
            .map(|l| l.split('#').next().unwrap_or("").trim())
            .filter(|l| !l.is_empty());
        let d = parse_header(lines.next(), "d")?;
        let m = parse_header(lines.next(), "m")?;
        let mut rows = Vec::with_capacity(m);
        for line in lines {
            let row: Result<RVec> = line.split_whitespace().map(Rational::from_str).collect();
            rows.push(row?);
        }
        if rows.len() != m {
            return Err(Error::Parse(format!("expected {m} rows, found {}", rows.len())));
        }
        HCone::from_rows(d, rows)
    }
}

fn render_row(row: &[Rational]) -> String {
    row.iter().map(Rational::to_string).collect::<Vec<_>>().join(" ")
}

fn parse_header(line: Option<&str>, key: &str) -> Result<usize> {
    let line = line.ok_or_else(|| Error::Parse(format!("missing '{key} <int>' line")))?;
    line.strip_prefix(key)
        .and_then(|rest| rest.trim().parse::<usize>().ok())
        .ok_or_else(|| Error::Parse(format!("expected '{key} <int>', found '{line}'")))
}

fn validate_flip_args(d: usize, flips: &[usize], perm: &[usize]) -> Result<()> {
    for &i in flips {
        if i == 0 || i > d {
            return Err(Error::Dimension(format!("flip index {i} outside 1..={d}")));
        }
    }
    if perm.len() != d {
        return Err(Error::Dimension("permutation length != d".into()));
    }
    let mut seen = vec![false; d + 1];
    for &p in perm {
        if p == 0 || p > d || seen[p] {
            return Err(Error::Dimension("not a permutation of 1..=d".into()));
        }
        seen[p] = true;
    }
    Ok(())
}

fn flip_row(row: &[Rational], flips: &[usize], perm: &[usize]) -> RVec {
    let d = row.len() - 1;
    let mut out = zeros(d + 1);
    let mut head = row[0].clone();
    for i in 1..=d {
        if flips.contains(&i) {
            head += &row[i];
            out[perm[i - 1]] = -&row[i];
        } else {
            out[perm[i - 1]] = row[i].clone();
        }
    }
    out[0] = head;
    out
}

/// Image of a homogeneous point under the same flip-then-permute map.
pub fn flip_point(x: &[Rational], flips: &[usize], perm: &[usize]) -> RVec {
    let d = x.len() - 1;
    let mut out = zeros(d + 1);
    out[0] = x[0].clone();
    for i in 1..=d {
        out[perm[i - 1]] = if flips.contains(&i) { &x[0] - &x[i] } else { x[i].clone() };
    }
    out
}

pub fn identity_perm(d: usize) -> Vec<usize> {
    (1..=d).collect()
}

/// Homogenizes `Ax ≤ b` over `[0,1]^d`: rows `b_k x₀ − A_k·x ≥ 0` plus box
/// rows.
pub fn homogenize(a: &[RVec], b: &[Rational], d: usize) -> Result<HCone> {
    if a.len() != b.len() {
        return Err(Error::Dimension("row/rhs count mismatch".into()));
    }
    let mut rows = Vec::with_capacity(a.len());
    for (ak, bk) in a.iter().zip(b) {
        if ak.len() != d {
            return Err(Error::Dimension("constraint width != d".into()));
        }
        let mut row = Vec::with_capacity(d + 1);
        row.push(bk.clone());
        row.extend(ak.iter().map(|c| -c));
        rows.push(row);
    }
    HCone::with_box(d, rows)
}

/// Decides `K1 ⊆ K2` by minimizing each `K2` row over the `x₀ = 1` slice of
/// `K1`.  An empty slice means `K1 = {0}` (box rows pin the recession cone),
/// hence inclusion.
pub fn cone_include(k1: &HCone, k2: &HCone) -> Result<bool> {
    if k1.d != k2.d {
        return Err(Error::Dimension("cone dimensions differ".into()));
    }
    let slice = k1.slice_lp_rows();
    for row in &k2.rows {
        let lp = LinearProgram {
            n_vars: k1.d,
            rows: slice.clone(),
            objective: row[1..].to_vec(),
            sense: Sense::Min,
        };
        match lp::solve(&lp)? {
            LpSolution::Optimal { value, .. } => {
                if (&value + &row[0]).is_negative() {
                    return Ok(false);
                }
            }
            LpSolution::Infeasible { .. } => return Ok(true),
            LpSolution::Unbounded { .. } => {
                return Err(Error::Numerical("cone slice unbounded; box rows missing".into()))
            }
        }
    }
    Ok(true)
}

/// All 0-1 points of the `x₀ = 1` slice, in lexicographic order, as
/// homogeneous vectors.
pub fn integral_points(k: &HCone) -> Result<Vec<RVec>> {
    if k.d > 12 {
        return Err(Error::Guard(format!("dimension_too_large: d = {} > 12", k.d)));
    }
    let mut pts = Vec::new();
    for mask in 0..(1u32 << k.d) {
        let mut x = zeros(k.d + 1);
        x[0] = Rational::one();
        for i in 1..=k.d {
            if mask >> (i - 1) & 1 == 1 {
                x[i] = Rational::one();
            }
        }
        if k.slice_member(&x) {
            pts.push(x);
        }
    }
    Ok(pts)
}

/// Facet description of the cone generated by the 0-1 points of `K`.  An
/// empty point set yields the explicitly infeasible cone `{−x₀ ≥ 0}` plus
/// box rows (i.e. `{0}`).
pub fn integral_hull(k: &HCone) -> Result<HCone> {
    let pts = integral_points(k)?;
    if pts.is_empty() {
        let mut bad = zeros(k.d + 1);
        bad[0] = Rational::int(-1);
        return HCone::with_box(k.d, vec![bad]);
    }
    let rows = polar_rays(k.d + 1, &pts);
    debug_assert!(pts.iter().all(|p| rows.iter().all(|r| !dot(r, p).is_negative())));
    HCone::with_box(k.d, rows)
}

/// Extreme rays (plus `±`lineality) of `{a : aᵀp ≥ 0 for all p}` by
/// double description, constraints inserted one at a time.
fn polar_rays(dim: usize, points: &[RVec]) -> Vec<RVec> {
    let words = points.len().div_ceil(64);
    struct Ray {
        v: RVec,
        tight: Vec<u64>,
    }
    let subset = |a: &[u64], b: &[u64]| a.iter().zip(b).all(|(x, y)| x & !y == 0);

    let mut lin: Vec<RVec> = (0..dim)
        .map(|i| {
            let mut e = zeros(dim);
            e[i] = Rational::one();
            e
        })
        .collect();
    let mut rays: Vec<Ray> = Vec::new();

    for (idx, c) in points.iter().enumerate() {
        if let Some(pos) = lin.iter().position(|l| !dot(c, l).is_zero()) {
            // Shrink the lineality space: one direction becomes a ray.
            let mut pivot = lin.swap_remove(pos);
            if dot(c, &pivot).is_negative() {
                for v in pivot.iter_mut() {
                    *v = -&*v;
                }
            }
            let cp = dot(c, &pivot);
            for l in lin.iter_mut() {
                let f = -&(dot(c, l) / &cp);
                crate::linalg::add_scaled(l, &pivot, &f);
                *l = primitive_scale(l);
            }
            for ray in rays.iter_mut() {
                let f = -&(dot(c, &ray.v) / &cp);
                crate::linalg::add_scaled(&mut ray.v, &pivot, &f);
                ray.v = primitive_scale(&ray.v);
                ray.tight[idx / 64] |= 1 << (idx % 64);
            }
            let mut tight = vec![u64::MAX; words];
            for j in idx..words * 64 {
                tight[j / 64] &= !(1 << (j % 64));
            }
            rays.push(Ray { v: primitive_scale(&pivot), tight });
            continue;
        }
        let vals: Vec<Rational> = rays.iter().map(|r| dot(c, &r.v)).collect();
        let mut fresh: Vec<Ray> = Vec::new();
        for (pi, pv) in vals.iter().enumerate() {
            if !pv.is_positive() {
                continue;
            }
            for (mi, mv) in vals.iter().enumerate() {
                if !mv.is_negative() {
                    continue;
                }
                let meet: Vec<u64> = rays[pi]
                    .tight
                    .iter()
                    .zip(&rays[mi].tight)
                    .map(|(a, b)| a & b)
                    .collect();
                let adjacent = !rays.iter().enumerate().any(|(oi, o)| {
                    oi != pi && oi != mi && subset(&meet, &o.tight)
                });
                if !adjacent {
                    continue;
                }
                let mut v = rays[mi].v.clone();
                crate::linalg::scale(&mut v, pv);
                crate::linalg::add_scaled(&mut v, &rays[pi].v, &-mv);
                let mut tight = meet;
                tight[idx / 64] |= 1 << (idx % 64);
                fresh.push(Ray { v: primitive_scale(&v), tight });
            }
        }
        let mut kept: Vec<Ray> = Vec::new();
        for (ri, ray) in rays.into_iter().enumerate() {
            if vals[ri].is_negative() {
                continue;
            }
            let mut ray = ray;
            if vals[ri].is_zero() {
                ray.tight[idx / 64] |= 1 << (idx % 64);
            }
            kept.push(ray);
        }
        kept.extend(fresh);
        rays = kept;
    }

    let mut out: Vec<RVec> = rays.into_iter().map(|r| r.v).collect();
    for l in lin {
        out.push(l.iter().map(|x| -x).collect());
        out.push(l);
    }
    out
}

pub(crate) fn subsets_of_size(n: usize, k: usize) -> Vec<Vec<usize>> {
    // k-subsets of {1..n} in lexicographic order
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(k);
    fn rec(n: usize, k: usize, start: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..=n {
            cur.push(i);
            rec(n, k, i + 1, cur, out);
            cur.pop();
        }
    }
    rec(n, k, 1, &mut cur, &mut out);
    out
}

/// Majority system: `x(S) ≤ (d/2)x₀` for every `S` of size `d/2 + 1`, plus
/// box rows.  Requires even `d ≥ 2`.
pub fn gen_majority(d: usize) -> Result<HCone> {
    if d < 2 || d % 2 != 0 {
        return Err(Error::Domain(format!("majority family needs even d >= 2, got {d}")));
    }
    let half = d / 2;
    let mut rows = Vec::new();
    for s in subsets_of_size(d, half + 1) {
        let mut row = zeros(d + 1);
        row[0] = Rational::int(half as i64);
        for i in s {
            row[i] = Rational::int(-1);
        }
        rows.push(row);
    }
    HCone::with_box(d, rows)
}

/// ℓ₁-ball `‖x − e/2‖₁ ≤ p/2` (cross-polytope), one row per sign pattern,
/// plus box rows.  Requires `0 < p ≤ d` and `d ≤ 16`.
pub fn gen_cross(d: usize, p: usize) -> Result<HCone> {
    if p == 0 || p > d {
        return Err(Error::Domain(format!("cross family needs 0 < p <= d, got p = {p}, d = {d}")));
    }
    if d > 16 {
        return Err(Error::Guard(format!("cross family limited to d <= 16, got {d}")));
    }
    let mut rows = Vec::new();
    for mask in 0..(1u32 << d) {
        // Σ s_i (x_i − x₀/2) ≤ (p/2) x₀, scaled by 2
        let mut row = zeros(d + 1);
        let mut head = p as i64;
        for i in 1..=d {
            if mask >> (i - 1) & 1 == 1 {
                head += 1;
                row[i] = Rational::int(-2);
            } else {
                head -= 1;
                row[i] = Rational::int(2);
            }
        }
        row[0] = Rational::int(head);
        rows.push(row);
    }
    HCone::with_box(d, rows)
}

/// Fractional stable set: `x_i + x_j ≤ x₀` per edge, plus box rows.
/// Vertices are 1-based; `d = n`.
pub fn gen_frac(n: usize, edges: &[(usize, usize)]) -> Result<HCone> {
    let mut rows = Vec::new();
    for &(u, v) in edges {
        if u == 0 || v == 0 || u > n || v > n || u == v {
            return Err(Error::Domain(format!("bad edge ({u},{v}) on {n} vertices")));
        }
        let mut row = zeros(n + 1);
        row[0] = Rational::one();
        row[u] = Rational::int(-1);
        row[v] = Rational::int(-1);
        rows.push(row);
    }
    HCone::with_box(n, rows)
}

/// Edges of the complete graph `K_n` in lexicographic order.
pub fn complete_graph_edges(n: usize) -> Vec<(usize, usize)> {
    let mut edges = Vec::new();
    for u in 1..=n {
        for v in (u + 1)..=n {
            edges.push((u, v));
        }
    }
    edges
}

/// Position of edge `{u,v}` in the lexicographic edge order of `K_n`
/// (1-based, matching `gen_matching` variables).
pub fn edge_index(n: usize, u: usize, v: usize) -> Result<usize> {
    let (u, v) = if u < v { (u, v) } else { (v, u) };
    if u == 0 || v > n || u == v {
        return Err(Error::Domain(format!("bad edge ({u},{v}) on {n} vertices")));
    }
    Ok(complete_graph_edges(n).iter().position(|&e| e == (u, v)).unwrap() + 1)
}

/// Fractional matching on `K_n`: degree rows `x(δ(v)) ≤ x₀` over edge
/// variables, plus box rows.  `d = n(n−1)/2`.
pub fn gen_matching(n: usize) -> Result<HCone> {
    if n < 2 {
        return Err(Error::Domain(format!("matching family needs n >= 2, got {n}")));
    }
    let edges = complete_graph_edges(n);
    let d = edges.len();
    let mut rows = Vec::new();
    for v in 1..=n {
        let mut row = zeros(d + 1);
        row[0] = Rational::one();
        for (ei, &(a, b)) in edges.iter().enumerate() {
            if a == v || b == v {
                row[ei + 1] = Rational::int(-1);
            }
        }
        rows.push(row);
    }
    HCone::with_box(d, rows)
}

/// The unit cube: box rows only.
pub fn gen_box(d: usize) -> Result<HCone> {
    HCone::with_box(d, Vec::new())
}
