//! Closed intervals with exact rational endpoints.
//!
//! Every real quantity in the certification path lives in an [`Interval`].
//! Arithmetic is exact on the endpoints; transcendental functions return
//! enclosures computed from series with explicit tail bounds, rounded
//! outward onto a dyadic grid so that denominators stay bounded.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::sync::LazyLock;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use parking_lot::Mutex;

use crate::error::{Error, Result};

pub type Rational = BigRational;

/// Builds an exact rational `num/den`.
pub fn ratio(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

pub fn rat_int(n: impl Into<BigInt>) -> Rational {
    Rational::from_integer(n.into())
}

fn pow2(bits: u32) -> BigInt {
    BigInt::one() << bits as usize
}

/// Largest dyadic `m / 2^bits` that is `<= x`.
pub fn round_down(x: &Rational, bits: u32) -> Rational {
    let scaled = x * rat_int(pow2(bits));
    Rational::new(scaled.floor().to_integer(), pow2(bits))
}

/// Smallest dyadic `m / 2^bits` that is `>= x`.
pub fn round_up(x: &Rational, bits: u32) -> Rational {
    let scaled = x * rat_int(pow2(bits));
    Rational::new(scaled.ceil().to_integer(), pow2(bits))
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Interval {
    lo: Rational,
    hi: Rational,
}

impl fmt::Debug for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (lo, hi) = self.decimal_bounds(12);
        write!(f, "[{lo}, {hi}]")
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

impl Interval {
    pub fn new(lo: Rational, hi: Rational) -> Self {
        assert!(lo <= hi, "interval endpoints out of order");
        Interval { lo, hi }
    }

    /// Interval spanning two values in either order.
    pub fn spanning(a: Rational, b: Rational) -> Self {
        if a <= b {
            Interval { lo: a, hi: b }
        } else {
            Interval { lo: b, hi: a }
        }
    }

    pub fn exact(x: Rational) -> Self {
        Interval { lo: x.clone(), hi: x }
    }

    pub fn from_int(n: impl Into<BigInt>) -> Self {
        Self::exact(rat_int(n))
    }

    pub fn zero() -> Self {
        Self::exact(Rational::zero())
    }

    pub fn one() -> Self {
        Self::exact(Rational::one())
    }

    pub fn lo(&self) -> &Rational {
        &self.lo
    }

    pub fn hi(&self) -> &Rational {
        &self.hi
    }

    pub fn width(&self) -> Rational {
        &self.hi - &self.lo
    }

    pub fn mid(&self) -> Rational {
        (&self.lo + &self.hi) / rat_int(2)
    }

    pub fn is_exact(&self) -> bool {
        self.lo == self.hi
    }

    pub fn contains(&self, x: &Rational) -> bool {
        &self.lo <= x && x <= &self.hi
    }

    pub fn contains_zero(&self) -> bool {
        self.contains(&Rational::zero())
    }

    pub fn is_positive(&self) -> bool {
        self.lo.is_positive()
    }

    pub fn is_negative(&self) -> bool {
        self.hi.is_negative()
    }

    /// Certified sign: `Some(1)`, `Some(-1)`, `Some(0)` for the exact zero,
    /// `None` when the interval straddles zero.
    pub fn sign(&self) -> Option<i8> {
        if self.is_positive() {
            Some(1)
        } else if self.is_negative() {
            Some(-1)
        } else if self.lo.is_zero() && self.hi.is_zero() {
            Some(0)
        } else {
            None
        }
    }

    pub fn is_subset_of(&self, other: &Interval) -> bool {
        other.lo <= self.lo && self.hi <= other.hi
    }

    pub fn intersects(&self, other: &Interval) -> bool {
        self.lo <= other.hi && other.lo <= self.hi
    }

    pub fn hull(&self, other: &Interval) -> Interval {
        Interval {
            lo: self.lo.clone().min(other.lo.clone()),
            hi: self.hi.clone().max(other.hi.clone()),
        }
    }

    /// Certified strict comparison; `None` when the intervals overlap.
    pub fn cmp_certified(&self, other: &Interval) -> Option<Ordering> {
        if self.hi < other.lo {
            Some(Ordering::Less)
        } else if other.hi < self.lo {
            Some(Ordering::Greater)
        } else if self.is_exact() && other.is_exact() && self.lo == other.lo {
            Some(Ordering::Equal)
        } else {
            None
        }
    }

    /// `true` only when every point of `self` is strictly below every point of `other`.
    pub fn certainly_lt(&self, other: &Interval) -> bool {
        self.hi < other.lo
    }

    pub fn certainly_le(&self, other: &Interval) -> bool {
        self.hi <= other.lo
    }

    pub fn abs(&self) -> Interval {
        if self.lo.is_negative() && self.hi.is_positive() {
            Interval { lo: Rational::zero(), hi: (-&self.lo).max(self.hi.clone()) }
        } else if self.hi <= Rational::zero() {
            Interval { lo: -&self.hi, hi: -&self.lo }
        } else {
            self.clone()
        }
    }

    pub fn scale(&self, k: &Rational) -> Interval {
        Interval::spanning(&self.lo * k, &self.hi * k)
    }

    pub fn square(&self) -> Interval {
        let a = self.abs();
        Interval { lo: &a.lo * &a.lo, hi: &a.hi * &a.hi }
    }

    pub fn recip(&self) -> Result<Interval> {
        if self.contains_zero() {
            return Err(Error::precision("reciprocal of an interval containing 0"));
        }
        Ok(Interval::spanning(self.hi.recip(), self.lo.recip()))
    }

    pub fn div(&self, other: &Interval) -> Result<Interval> {
        Ok(self * &other.recip()?)
    }

    pub fn min(&self, other: &Interval) -> Interval {
        Interval { lo: self.lo.clone().min(other.lo.clone()), hi: self.hi.clone().min(other.hi.clone()) }
    }

    pub fn max(&self, other: &Interval) -> Interval {
        Interval { lo: self.lo.clone().max(other.lo.clone()), hi: self.hi.clone().max(other.hi.clone()) }
    }

    /// Rounds both endpoints outward onto the grid `2^-bits`.
    pub fn round_out(&self, bits: u32) -> Interval {
        let lo = if self.lo.denom().bits() > bits as u64 { round_down(&self.lo, bits) } else { self.lo.clone() };
        let hi = if self.hi.denom().bits() > bits as u64 { round_up(&self.hi, bits) } else { self.hi.clone() };
        Interval { lo, hi }
    }

    /// Certified floor: `Some(n)` when every point of the interval has floor `n`.
    pub fn floor(&self) -> Option<BigInt> {
        let a = self.lo.floor().to_integer();
        let b = self.hi.floor().to_integer();
        (a == b).then_some(a)
    }

    pub fn floor_or_err(&self, what: &str) -> Result<BigInt> {
        self.floor().ok_or_else(|| Error::precision(format!("cannot certify floor of {what} = {self:?}")))
    }

    pub fn to_f64(&self) -> f64 {
        self.mid().to_f64().unwrap_or(f64::NAN)
    }

    /// Square root enclosure, endpoints on the `2^-bits` grid.
    pub fn sqrt(&self, bits: u32) -> Result<Interval> {
        if self.lo.is_negative() {
            return Err(Error::domain("square root of a negative interval"));
        }
        let scale = rat_int(pow2(2 * bits));
        let lo_scaled = (&self.lo * &scale).floor().to_integer();
        let hi_scaled = (&self.hi * &scale).ceil().to_integer();
        let lo_root = lo_scaled.sqrt();
        let mut hi_root = hi_scaled.sqrt();
        if &hi_root * &hi_root < hi_scaled {
            hi_root += 1;
        }
        Ok(Interval { lo: Rational::new(lo_root, pow2(bits)), hi: Rational::new(hi_root, pow2(bits)) })
    }

    /// Natural logarithm enclosure; requires a strictly positive interval.
    pub fn ln(&self, bits: u32) -> Result<Interval> {
        if !self.is_positive() {
            return Err(Error::domain("logarithm of a non-positive interval"));
        }
        let lo = ln_point(&self.lo, bits);
        let hi = if self.is_exact() { lo.clone() } else { ln_point(&self.hi, bits) };
        Ok(Interval { lo: lo.lo, hi: hi.hi })
    }

    pub fn exp(&self, bits: u32) -> Interval {
        let lo = exp_point(&self.lo, bits);
        let hi = if self.is_exact() { lo.clone() } else { exp_point(&self.hi, bits) };
        Interval { lo: lo.lo, hi: hi.hi }
    }

    /// Outward-rounded decimal rendering with `sig` significant digits.
    pub fn decimal_bounds(&self, sig: usize) -> (String, String) {
        (format_decimal(&self.lo, sig, Rounding::Down), format_decimal(&self.hi, sig, Rounding::Up))
    }

    /// Rounds outward to `sig` significant decimal digits; the result is
    /// exactly what [`Interval::decimal_bounds`] prints.
    pub fn round_decimal(&self, sig: usize) -> Interval {
        let (lo, hi) = self.decimal_bounds(sig);
        Interval { lo: parse_decimal(&lo).expect("own format"), hi: parse_decimal(&hi).expect("own format") }
    }

    pub fn from_decimal_strs(lo: &str, hi: &str) -> Result<Interval> {
        let lo = parse_decimal(lo).ok_or_else(|| Error::Io(format!("bad decimal '{lo}'")))?;
        let hi = parse_decimal(hi).ok_or_else(|| Error::Io(format!("bad decimal '{hi}'")))?;
        if lo > hi {
            return Err(Error::Io("interval endpoints out of order".into()));
        }
        Ok(Interval { lo, hi })
    }
}

impl Add for &Interval {
    type Output = Interval;
    fn add(self, rhs: &Interval) -> Interval {
        Interval { lo: &self.lo + &rhs.lo, hi: &self.hi + &rhs.hi }
    }
}

impl Sub for &Interval {
    type Output = Interval;
    fn sub(self, rhs: &Interval) -> Interval {
        Interval { lo: &self.lo - &rhs.hi, hi: &self.hi - &rhs.lo }
    }
}

impl Neg for &Interval {
    type Output = Interval;
    fn neg(self) -> Interval {
        Interval { lo: -&self.hi, hi: -&self.lo }
    }
}

impl Mul for &Interval {
    type Output = Interval;
    fn mul(self, rhs: &Interval) -> Interval {
        if self.is_exact() {
            return rhs.scale(&self.lo);
        }
        if rhs.is_exact() {
            return self.scale(&rhs.lo);
        }
        let c = [&self.lo * &rhs.lo, &self.lo * &rhs.hi, &self.hi * &rhs.lo, &self.hi * &rhs.hi];
        let lo = c.iter().min().unwrap().clone();
        let hi = c.iter().max().unwrap().clone();
        Interval { lo, hi }
    }
}

macro_rules! forward_owned {
    ($tr:ident, $f:ident) => {
        impl $tr for Interval {
            type Output = Interval;
            fn $f(self, rhs: Interval) -> Interval {
                (&self).$f(&rhs)
            }
        }
        impl $tr<&Interval> for Interval {
            type Output = Interval;
            fn $f(self, rhs: &Interval) -> Interval {
                (&self).$f(rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl Neg for Interval {
    type Output = Interval;
    fn neg(self) -> Interval {
        -&self
    }
}

// atanh(z) = sum z^(2i+1)/(2i+1) for 0 <= z < 1; tail after n terms is
// bounded by z^(2n+1) / ((2n+1)(1 - z^2)).
/// `atanh z` for `0 <= z <= 1/2`, in fixed point with `bits + 32` fraction
/// bits. Every truncation rounds down and costs at most one unit per step, so
/// the sum falls short of the series by at most two units per term.
fn atanh_series(z: &Rational, bits: u32) -> Interval {
    debug_assert!(!z.is_negative() && z <= &ratio(1, 2));
    let work = bits + 32;
    let (p, q) = (z.numer(), z.denom());
    let (p2, q2) = (p * p, q * q);
    let mut power = (p << work as usize) / q;
    let mut sum = BigInt::zero();
    let mut i: u64 = 0;
    let stop = BigInt::one() << 8;
    loop {
        sum += &power / BigInt::from(2 * i + 1);
        power = &power * &p2 / &q2;
        i += 1;
        if power < stop {
            break;
        }
    }
    let scale = rat_int(pow2(work));
    // remaining terms: z^(2i+1) / (2i+1) summed as a geometric series in z^2
    let tail = rat_int(&power + BigInt::from(i + 1)) / rat_int(BigInt::from(2 * i + 1)) * rat_int(q2.clone())
        / rat_int(&q2 - &p2);
    let lo = rat_int(sum.clone()) / &scale;
    let hi = (rat_int(sum + BigInt::from(2 * i)) + tail) / &scale;
    Interval { lo, hi }
}

static LN2_CACHE: LazyLock<Mutex<HashMap<u32, Interval>>> = LazyLock::new(|| Mutex::new(HashMap::new()));

/// Enclosure of ln 2 accurate to about `2^-bits`.
pub fn ln2(bits: u32) -> Interval {
    if let Some(v) = LN2_CACHE.lock().get(&bits) {
        return v.clone();
    }
    let v = atanh_series(&ratio(1, 3), bits + 4).scale(&rat_int(2)).round_out(bits + 4);
    LN2_CACHE.lock().insert(bits, v.clone());
    v
}

fn ln_point(x: &Rational, bits: u32) -> Interval {
    // x = 2^e * y with y in [1, 2)
    let e = x.numer().bits() as i64 - x.denom().bits() as i64;
    let mut y = if e >= 0 { x / rat_int(BigInt::one() << e as usize) } else { x * rat_int(BigInt::one() << (-e) as usize) };
    let mut e = e;
    let two = rat_int(2);
    while y >= two {
        y /= &two;
        e += 1;
    }
    while y < Rational::one() {
        y *= &two;
        e -= 1;
    }
    let extra = (64 - (e.unsigned_abs().max(1)).leading_zeros()) + 8;
    let atanh2 = |y: &Rational| atanh_series(&((y - Rational::one()) / (y + Rational::one())), bits + 4).scale(&two);
    // large denominators make the series slow; ln is increasing, so bracket y by short dyadics
    let ln_y = if y.denom().bits() > (bits + 16) as u64 {
        let lo = atanh2(&round_down(&y, bits + 16));
        let hi = atanh2(&round_up(&y, bits + 16));
        Interval { lo: lo.lo, hi: hi.hi }
    } else {
        atanh2(&y)
    };
    let ln_2e = ln2(bits + extra).scale(&rat_int(e));
    (&ln_y + &ln_2e).round_out(bits + 4)
}

fn exp_point(x: &Rational, bits: u32) -> Interval {
    // exp(x) = exp(x / 2^s)^(2^s) with |x / 2^s| <= 1/2
    let mut s: u32 = 0;
    let half = ratio(1, 2);
    let mut r = x.clone();
    while r.abs() > half {
        r /= rat_int(2);
        s += 1;
    }
    let work = bits + 2 * s + 40;
    let eps = Rational::new(BigInt::one(), pow2(work - 8));
    let mut term = Interval::one();
    let mut sum = Interval::one();
    let mut n: u64 = 1;
    loop {
        term = term.scale(&(&r / rat_int(n))).round_out(work);
        sum = (&sum + &term).round_out(work);
        n += 1;
        // |remaining| <= 2 |term| since |r| <= 1/2
        let bound = term.abs().hi().clone() * rat_int(2);
        if bound < eps {
            sum = Interval { lo: &sum.lo - &bound, hi: &sum.hi + &bound };
            break;
        }
    }
    for _ in 0..s {
        sum = sum.square().round_out(work);
    }
    sum.round_out(bits + 4)
}

// atan(1/m) for integer m >= 2: alternating series, error below the next term.
fn atan_inv(m: i64, bits: u32) -> Interval {
    let work = bits + 32;
    let eps = Rational::new(BigInt::one(), pow2(bits + 8));
    let m2 = rat_int(m * m);
    let mut power = ratio(1, m);
    let mut sum = Interval::zero();
    let mut i: u64 = 0;
    loop {
        let term = &power / rat_int(2 * i + 1);
        let t = Interval::exact(term.clone());
        sum = if i.is_multiple_of(2) { &sum + &t } else { &sum - &t }.round_out(work);
        power = round_down(&(&power / &m2), work + 16);
        i += 1;
        let next = &power / rat_int(2 * i + 1);
        if next < eps {
            // power was rounded down; pad by the rounding error too
            let pad = next * rat_int(2) + Rational::new(BigInt::one(), pow2(work));
            return Interval { lo: sum.lo - &pad, hi: sum.hi + pad };
        }
    }
}

static PI_CACHE: LazyLock<Mutex<HashMap<u32, Interval>>> = LazyLock::new(|| Mutex::new(HashMap::new()));

/// Enclosure of pi (Machin's formula).
pub fn pi(bits: u32) -> Interval {
    if let Some(v) = PI_CACHE.lock().get(&bits) {
        return v.clone();
    }
    let a = atan_inv(5, bits + 8).scale(&rat_int(16));
    let b = atan_inv(239, bits + 8).scale(&rat_int(4));
    let v = (&a - &b).round_out(bits + 4);
    PI_CACHE.lock().insert(bits, v.clone());
    v
}

#[derive(Clone, Copy)]
enum Rounding {
    Down,
    Up,
}

fn format_decimal(x: &Rational, sig: usize, mode: Rounding) -> String {
    if x.is_zero() {
        return "0".to_string();
    }
    let neg = x.is_negative();
    let ax = x.abs();
    // exponent e with 10^e <= ax < 10^(e+1)
    let mut e: i64 = ax.numer().to_string().len() as i64 - ax.denom().to_string().len() as i64;
    let ten = rat_int(10);
    let pow10 = |k: i64| -> Rational {
        if k >= 0 {
            rat_int(num_traits::pow(BigInt::from(10), k as usize))
        } else {
            Rational::new(BigInt::one(), num_traits::pow(BigInt::from(10), (-k) as usize))
        }
    };
    while ax >= pow10(e + 1) {
        e += 1;
    }
    while ax < pow10(e) {
        e -= 1;
    }
    let shift = sig as i64 - 1 - e;
    let scaled = &ax * pow10(shift);
    // rounding direction on |x| flips with the sign
    let away = matches!((mode, neg), (Rounding::Up, false) | (Rounding::Down, true));
    let mut mant = if away { scaled.ceil().to_integer() } else { scaled.floor().to_integer() };
    let mut exp = e;
    if mant.to_string().len() > sig {
        mant /= 10;
        exp += 1;
        if away && &rat_int(mant.clone()) * pow10(exp - sig as i64 + 1) < ax {
            mant += 1;
        }
    }
    let _ = &ten;
    let digits = mant.to_string();
    let (head, tail) = digits.split_at(1);
    let tail = tail.trim_end_matches('0');
    let sign = if neg { "-" } else { "" };
    let body = if tail.is_empty() { head.to_string() } else { format!("{head}.{tail}") };
    if exp == 0 {
        format!("{sign}{body}")
    } else {
        format!("{sign}{body}e{exp}")
    }
}

/// Parses decimals of the form `-1.25e-3`, `42`, `0.5`, or `p/q`.
pub fn parse_decimal(s: &str) -> Option<Rational> {
    let s = s.trim();
    if let Some((n, d)) = s.split_once('/') {
        let n: BigInt = n.trim().parse().ok()?;
        let d: BigInt = d.trim().parse().ok()?;
        if d.is_zero() {
            return None;
        }
        return Some(Rational::new(n, d));
    }
    let (mant, exp) = match s.find(['e', 'E']) {
        Some(i) => (&s[..i], s[i + 1..].parse::<i64>().ok()?),
        None => (s, 0),
    };
    let (neg, mant) = match mant.strip_prefix('-') {
        Some(m) => (true, m),
        None => (false, mant.strip_prefix('+').unwrap_or(mant)),
    };
    let (int_part, frac_part) = mant.split_once('.').unwrap_or((mant, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    let digits: BigInt = format!("{int_part}{frac_part}").parse().ok()?;
    let e = exp - frac_part.len() as i64;
    let ten = BigInt::from(10);
    let mut v = if e >= 0 {
        Rational::from_integer(digits * num_traits::pow(ten, e as usize))
    } else {
        Rational::new(digits, num_traits::pow(ten, (-e) as usize))
    };
    if neg {
        v = -v;
    }
    Some(v)
}

/// Exact decimal string of an integer-valued rational, or `p/q` otherwise.
pub fn rational_string(x: &Rational) -> String {
    if x.is_integer() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}
