//! Exact arbitrary-precision rational scalars.
//!
//! [`Rational`] is the scalar for every polyhedral, simplex and recurrence
//! computation in the crate.  Values are always stored in lowest terms with a
//! positive denominator, and arithmetic is closed: small values live in a
//! machine-word fast path and are promoted to big integers only on overflow,
//! then demoted again whenever they fit, so equal values always have equal
//! representations.

use std::cmp::Ordering;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::iter::Sum;
use std::ops::{Add, AddAssign, Div, DivAssign, Mul, MulAssign, Neg, Sub, SubAssign};
use std::str::FromStr;

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::Error;

#[derive(Clone, Debug)]
enum Repr {
    /// `num/den`, `den > 0`, reduced, neither component equal to `i128::MIN`.
    Small(i128, i128),
    /// Reduced `num/den` with `den > 0`, not representable as `Small`.
    Big(Box<(BigInt, BigInt)>),
}

/// An exact rational number in canonical form.
#[derive(Clone)]
pub struct Rational(Repr);

fn gcd_u128(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// gcd of |a| and |b| for inputs other than `i128::MIN`.
fn gcd_i128(a: i128, b: i128) -> i128 {
    gcd_u128(a.unsigned_abs(), b.unsigned_abs()) as i128
}

impl Rational {
    /// Builds `num/den` in canonical form; `den` must be nonzero.
    pub fn new(num: i64, den: i64) -> Rational {
        assert!(den != 0, "zero denominator");
        Rational::from_i128_pair(num as i128, den as i128)
    }

    pub fn int(n: i64) -> Rational {
        Rational(Repr::Small(n as i128, 1))
    }

    pub fn zero() -> Rational {
        Rational(Repr::Small(0, 1))
    }

    pub fn one() -> Rational {
        Rational(Repr::Small(1, 1))
    }

    /// Canonicalizes an `i128` pair, routing extreme values through big
    /// integers so the `Small` invariants hold.
    pub fn from_i128_pair(num: i128, den: i128) -> Rational {
        assert!(den != 0, "zero denominator");
        if num == i128::MIN || den == i128::MIN {
            return Rational::from_big(BigInt::from(num), BigInt::from(den));
        }
        let (mut n, mut d) = if den < 0 { (-num, -den) } else { (num, den) };
        if n == 0 {
            return Rational(Repr::Small(0, 1));
        }
        let g = gcd_i128(n, d);
        if g > 1 {
            n /= g;
            d /= g;
        }
        Rational(Repr::Small(n, d))
    }

    /// Canonicalizes a big-integer pair; `den` must be nonzero.
    pub fn from_big(num: BigInt, den: BigInt) -> Rational {
        assert!(!den.is_zero(), "zero denominator");
        let (mut n, mut d) = if den.sign() == Sign::Minus {
            (-num, -den)
        } else {
            (num, den)
        };
        if n.is_zero() {
            return Rational(Repr::Small(0, 1));
        }
        let g = n.gcd(&d);
        if !g.is_one() {
            n /= &g;
            d /= &g;
        }
        Rational::demote(n, d)
    }

    /// Wraps an already reduced pair, demoting to the fast path when possible.
    fn demote(n: BigInt, d: BigInt) -> Rational {
        if let (Some(ns), Some(ds)) = (n.to_i128(), d.to_i128()) {
            if ns != i128::MIN && ds != i128::MIN {
                return Rational(Repr::Small(ns, ds));
            }
        }
        Rational(Repr::Big(Box::new((n, d))))
    }

    pub fn is_zero(&self) -> bool {
        matches!(self.0, Repr::Small(0, _))
    }

    pub fn is_negative(&self) -> bool {
        match &self.0 {
            Repr::Small(n, _) => *n < 0,
            Repr::Big(b) => b.0.is_negative(),
        }
    }

    pub fn is_positive(&self) -> bool {
        match &self.0 {
            Repr::Small(n, _) => *n > 0,
            Repr::Big(b) => b.0.is_positive(),
        }
    }

    pub fn is_integer(&self) -> bool {
        match &self.0 {
            Repr::Small(_, d) => *d == 1,
            Repr::Big(b) => b.1.is_one(),
        }
    }

    pub fn abs(&self) -> Rational {
        if self.is_negative() {
            -self
        } else {
            self.clone()
        }
    }

    /// Multiplicative inverse; panics on zero.
    pub fn recip(&self) -> Rational {
        match &self.0 {
            Repr::Small(n, d) => {
                assert!(*n != 0, "reciprocal of zero");
                Rational::from_i128_pair(*d, *n)
            }
            Repr::Big(b) => Rational::from_big(b.1.clone(), b.0.clone()),
        }
    }

    pub fn numer(&self) -> BigInt {
        match &self.0 {
            Repr::Small(n, _) => BigInt::from(*n),
            Repr::Big(b) => b.0.clone(),
        }
    }

    pub fn denom(&self) -> BigInt {
        match &self.0 {
            Repr::Small(_, d) => BigInt::from(*d),
            Repr::Big(b) => b.1.clone(),
        }
    }

    pub fn to_f64(&self) -> f64 {
        match &self.0 {
            Repr::Small(n, d) => *n as f64 / *d as f64,
            Repr::Big(b) => {
                let (n, d) = (&b.0, &b.1);
                let shift = n.bits().max(d.bits()).saturating_sub(512);
                let nf = (n >> shift).to_f64().unwrap_or(f64::NAN);
                let df = (d >> shift).to_f64().unwrap_or(f64::NAN);
                nf / df
            }
        }
    }

    fn add_impl(&self, rhs: &Rational, sub: bool) -> Rational {
        if let (Repr::Small(a, b), Repr::Small(c0, d)) = (&self.0, &rhs.0) {
            let c = if sub { c0.checked_neg() } else { Some(*c0) };
            if let Some(c) = c {
                if let Some(r) = small_add(*a, *b, c, *d) {
                    return r;
                }
            }
        }
        let (an, ad) = (self.numer(), self.denom());
        let (mut bn, bd) = (rhs.numer(), rhs.denom());
        if sub {
            bn = -bn;
        }
        Rational::from_big(&an * &bd + &bn * &ad, ad * bd)
    }

    fn mul_impl(&self, rhs: &Rational) -> Rational {
        if let (Repr::Small(a, b), Repr::Small(c, d)) = (&self.0, &rhs.0) {
            if let Some(r) = small_mul(*a, *b, *c, *d) {
                return r;
            }
        }
        Rational::from_big(self.numer() * rhs.numer(), self.denom() * rhs.denom())
    }

    fn div_impl(&self, rhs: &Rational) -> Rational {
        assert!(!rhs.is_zero(), "division by zero");
        self.mul_impl(&rhs.recip())
    }

    /// Renders the value in decimal with `sig` significant digits
    /// (round half away from zero).
    pub fn to_decimal(&self, sig: usize) -> String {
        assert!(sig > 0);
        if self.is_zero() {
            return "0".to_string();
        }
        let neg = self.is_negative();
        let num = self.numer().abs();
        let den = self.denom();
        // t = floor(log10(num/den)): largest t with 10^t <= value.
        let ten = BigInt::from(10);
        let mut t: i64 = 0;
        let mut lo = num.clone();
        let mut hi = den.clone();
        // Scale until den <= num < 10*den.
        while lo < hi {
            lo *= &ten;
            t -= 1;
        }
        while lo >= &hi * &ten {
            hi *= &ten;
            t += 1;
        }
        // scaled = round(value * 10^(sig-1-t)) has exactly `sig` digits
        // unless rounding carries it to 10^sig.
        let shift = sig as i64 - 1 - t;
        let (mut n, mut d) = (num, den);
        if shift >= 0 {
            n *= ten.pow(shift as u32);
        } else {
            d *= ten.pow((-shift) as u32);
        }
        let mut scaled = (BigInt::from(2) * &n + &d) / (BigInt::from(2) * &d);
        if scaled == ten.pow(sig as u32) {
            scaled /= &ten;
            t += 1;
        }
        let digits = scaled.to_string();
        debug_assert_eq!(digits.len(), sig);
        let point = t + 1; // digits before the decimal point
        let mut s = String::new();
        if neg {
            s.push('-');
        }
        if point <= 0 {
            s.push_str("0.");
            for _ in 0..(-point) {
                s.push('0');
            }
            s.push_str(&digits);
        } else if (point as usize) >= sig {
            s.push_str(&digits);
            for _ in 0..(point as usize - sig) {
                s.push('0');
            }
        } else {
            s.push_str(&digits[..point as usize]);
            s.push('.');
            s.push_str(&digits[point as usize..]);
        }
        s
    }
}

/// `a/b + c/d` on reduced small operands, `None` on overflow.
fn small_add(a: i128, b: i128, c: i128, d: i128) -> Option<Rational> {
    let g1 = gcd_i128(b, d);
    let db = d / g1;
    let bb = b / g1;
    let t = a.checked_mul(db)?.checked_add(c.checked_mul(bb)?)?;
    if t == 0 {
        return Some(Rational::zero());
    }
    let g2 = if g1 == 1 { 1 } else { gcd_i128(t, g1) };
    let num = t / g2;
    let den = bb.checked_mul(d / g2)?;
    if num == i128::MIN || den == i128::MIN {
        return None;
    }
    Some(Rational(Repr::Small(num, den)))
}

/// `(a/b) * (c/d)` on reduced small operands, `None` on overflow.
fn small_mul(a: i128, b: i128, c: i128, d: i128) -> Option<Rational> {
    if a == 0 || c == 0 {
        return Some(Rational::zero());
    }
    let g1 = gcd_i128(a, d);
    let g2 = gcd_i128(c, b);
    let num = (a / g1).checked_mul(c / g2)?;
    let den = (b / g2).checked_mul(d / g1)?;
    if num == i128::MIN || den == i128::MIN {
        return None;
    }
    Some(Rational(Repr::Small(num, den)))
}

impl Default for Rational {
    fn default() -> Self {
        Rational::zero()
    }
}

impl PartialEq for Rational {
    fn eq(&self, other: &Self) -> bool {
        match (&self.0, &other.0) {
            (Repr::Small(a, b), Repr::Small(c, d)) => a == c && b == d,
            (Repr::Big(x), Repr::Big(y)) => x == y,
            _ => false, // canonical form: big values never fit small
        }
    }
}

impl Eq for Rational {}

impl Hash for Rational {
    fn hash<H: Hasher>(&self, state: &mut H) {
        match &self.0 {
            Repr::Small(n, d) => {
                n.hash(state);
                d.hash(state);
            }
            Repr::Big(b) => {
                b.0.hash(state);
                b.1.hash(state);
            }
        }
    }
}

impl PartialOrd for Rational {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Rational {
    fn cmp(&self, other: &Self) -> Ordering {
        if let (Repr::Small(a, b), Repr::Small(c, d)) = (&self.0, &other.0) {
            if let (Some(x), Some(y)) = (a.checked_mul(*d), c.checked_mul(*b)) {
                return x.cmp(&y);
            }
        }
        (self.numer() * other.denom()).cmp(&(other.numer() * self.denom()))
    }
}

macro_rules! forward_binop {
    ($trait:ident, $method:ident, $impl_fn:ident) => {
        impl $trait for Rational {
            type Output = Rational;
            fn $method(self, rhs: Rational) -> Rational {
                Rational::$impl_fn(&self, &rhs)
            }
        }
        impl $trait<&Rational> for Rational {
            type Output = Rational;
            fn $method(self, rhs: &Rational) -> Rational {
                Rational::$impl_fn(&self, rhs)
            }
        }
        impl $trait<Rational> for &Rational {
            type Output = Rational;
            fn $method(self, rhs: Rational) -> Rational {
                Rational::$impl_fn(self, &rhs)
            }
        }
        impl $trait<&Rational> for &Rational {
            type Output = Rational;
            fn $method(self, rhs: &Rational) -> Rational {
                Rational::$impl_fn(self, rhs)
            }
        }
    };
}

impl Rational {
    fn add_ref(&self, rhs: &Rational) -> Rational {
        self.add_impl(rhs, false)
    }
    fn sub_ref(&self, rhs: &Rational) -> Rational {
        self.add_impl(rhs, true)
    }
}

forward_binop!(Add, add, add_ref);
forward_binop!(Sub, sub, sub_ref);
forward_binop!(Mul, mul, mul_impl);
forward_binop!(Div, div, div_impl);

impl Neg for Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        -&self
    }
}

impl Neg for &Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        match &self.0 {
            Repr::Small(n, d) => Rational(Repr::Small(-n, *d)),
            Repr::Big(b) => Rational::demote(-b.0.clone(), b.1.clone()),
        }
    }
}

impl AddAssign<&Rational> for Rational {
    fn add_assign(&mut self, rhs: &Rational) {
        *self = self.add_ref(rhs);
    }
}

impl AddAssign for Rational {
    fn add_assign(&mut self, rhs: Rational) {
        *self = self.add_ref(&rhs);
    }
}

impl SubAssign<&Rational> for Rational {
    fn sub_assign(&mut self, rhs: &Rational) {
        *self = self.sub_ref(rhs);
    }
}

impl SubAssign for Rational {
    fn sub_assign(&mut self, rhs: Rational) {
        *self = self.sub_ref(&rhs);
    }
}

impl MulAssign<&Rational> for Rational {
    fn mul_assign(&mut self, rhs: &Rational) {
        *self = self.mul_impl(rhs);
    }
}

impl MulAssign for Rational {
    fn mul_assign(&mut self, rhs: Rational) {
        *self = self.mul_impl(&rhs);
    }
}

impl DivAssign<&Rational> for Rational {
    fn div_assign(&mut self, rhs: &Rational) {
        *self = self.div_impl(rhs);
    }
}

impl DivAssign for Rational {
    fn div_assign(&mut self, rhs: Rational) {
        *self = self.div_impl(&rhs);
    }
}

impl Sum for Rational {
    fn sum<I: Iterator<Item = Rational>>(iter: I) -> Rational {
        iter.fold(Rational::zero(), |acc, x| acc + x)
    }
}

impl<'a> Sum<&'a Rational> for Rational {
    fn sum<I: Iterator<Item = &'a Rational>>(iter: I) -> Rational {
        iter.fold(Rational::zero(), |acc, x| acc + x)
    }
}

impl From<i64> for Rational {
    fn from(n: i64) -> Self {
        Rational::int(n)
    }
}

impl From<i32> for Rational {
    fn from(n: i32) -> Self {
        Rational::int(n as i64)
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.0 {
            Repr::Small(n, 1) => write!(f, "{n}"),
            Repr::Small(n, d) => write!(f, "{n}/{d}"),
            Repr::Big(b) if b.1.is_one() => write!(f, "{}", b.0),
            Repr::Big(b) => write!(f, "{}/{}", b.0, b.1),
        }
    }
}

impl fmt::Debug for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for Rational {
    type Err = Error;

    /// Parses `p` or `p/q` with arbitrary-precision components.
    fn from_str(s: &str) -> Result<Self, Error> {
        let s = s.trim();
        let bad = || Error::Parse(format!("invalid rational '{s}'"));
        match s.split_once('/') {
            None => {
                let n = BigInt::from_str(s).map_err(|_| bad())?;
                Ok(Rational::demote(n, BigInt::one()))
            }
            Some((p, q)) => {
                let n = BigInt::from_str(p.trim()).map_err(|_| bad())?;
                let d = BigInt::from_str(q.trim()).map_err(|_| bad())?;
                if d.is_zero() {
                    return Err(bad());
                }
                Ok(Rational::from_big(n, d))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::BigRational;

    struct Lcg(u64);

    impl Lcg {
        fn next(&mut self) -> u64 {
            self.0 = self.0.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            self.0 >> 33
        }
        fn int(&mut self, lo: i64, hi: i64) -> i64 {
            lo + (self.next() % (hi - lo + 1) as u64) as i64
        }
    }

    fn to_big(q: &Rational) -> BigRational {
        BigRational::new(q.numer(), q.denom())
    }

    #[test]
    fn canonical_form() {
        assert_eq!(Rational::new(2, 4), Rational::new(1, 2));
        assert_eq!(Rational::new(-2, -4), Rational::new(1, 2));
        assert_eq!(Rational::new(2, -4), Rational::new(-1, 2));
        assert_eq!(Rational::new(0, -7), Rational::zero());
        assert_eq!(Rational::new(6, 3).to_string(), "2");
        assert_eq!(Rational::new(-1, 3).to_string(), "-1/3");
    }

    #[test]
    fn arithmetic_matches_reference() {
        let mut rng = Lcg(7);
        for _ in 0..2000 {
            let a = Rational::new(rng.int(-50, 50), rng.int(1, 30));
            let b = Rational::new(rng.int(-50, 50), rng.int(1, 30));
            let (ba, bb) = (to_big(&a), to_big(&b));
            assert_eq!(to_big(&(&a + &b)), &ba + &bb);
            assert_eq!(to_big(&(&a - &b)), &ba - &bb);
            assert_eq!(to_big(&(&a * &b)), &ba * &bb);
            if !b.is_zero() {
                assert_eq!(to_big(&(&a / &b)), &ba / &bb);
            }
            assert_eq!(a.cmp(&b), ba.cmp(&bb));
        }
    }

    #[test]
    fn promotion_and_demotion() {
        let huge = Rational::from_i128_pair(i128::MAX, 1);
        let one = Rational::one();
        let sum = &huge + &one; // overflows i128
        let back = &sum - &one;
        assert_eq!(back, huge);
        assert!(matches!(back.0, Repr::Small(_, _)));
        let product = &huge * &huge;
        let quotient = &product / &huge;
        assert_eq!(quotient, huge);
        // min-edge routing
        let m = Rational::from_i128_pair(i128::MIN, 1);
        assert_eq!(-&m, Rational::from_i128_pair(i128::MIN, -1).abs());
    }

    #[test]
    fn parse_render_round_trip() {
        for s in ["0", "5", "-5", "1/3", "-7/4", "250/251", "123456789123456789123456789/2"] {
            let q: Rational = s.parse().unwrap();
            assert_eq!(q.to_string(), s.to_string());
            let q2: Rational = q.to_string().parse().unwrap();
            assert_eq!(q, q2);
        }
        assert_eq!("4/8".parse::<Rational>().unwrap().to_string(), "1/2");
        assert!("1/0".parse::<Rational>().is_err());
        assert!("a".parse::<Rational>().is_err());
        assert!("".parse::<Rational>().is_err());
    }

    #[test]
    fn decimal_rendering() {
        assert_eq!(Rational::new(1, 2).to_decimal(12), "0.500000000000");
        assert_eq!(Rational::new(250, 251).to_decimal(12), "0.996015936255");
        assert_eq!(Rational::new(1, 3).to_decimal(5), "0.33333");
        assert_eq!(Rational::new(2, 3).to_decimal(5), "0.66667");
        assert_eq!(Rational::new(-1, 3).to_decimal(3), "-0.333");
        assert_eq!(Rational::zero().to_decimal(12), "0");
        assert_eq!(Rational::int(1).to_decimal(3), "1.00");
        assert_eq!(Rational::int(12345).to_decimal(3), "12300");
        assert_eq!(Rational::new(1, 1000).to_decimal(3), "0.00100");
        assert_eq!(Rational::new(9999, 10000).to_decimal(3), "1.00");
    }

    #[test]
    fn decimal_matches_f64() {
        let mut rng = Lcg(11);
        for _ in 0..200 {
            let q = Rational::new(rng.int(-9999, 9999), rng.int(1, 9999));
            if q.is_zero() {
                continue;
            }
            let rendered: f64 = q.to_decimal(12).parse().unwrap();
            assert!((rendered - q.to_f64()).abs() <= 1e-9 * q.to_f64().abs().max(1.0));
        }
    }

    #[test]
    fn ordering_huge() {
        let a = Rational::from_i128_pair(i128::MAX - 1, i128::MAX);
        let b = Rational::one();
        assert!(a < b);
        assert!(a > Rational::new(1, 2));
    }
}
