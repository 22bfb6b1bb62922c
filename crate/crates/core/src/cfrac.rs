//! Continued-fraction engine for `alpha = 1/(a_1 + 1/(a_2 + ...))`.
//!
//! Convergents use the seeds `p_0 = 0, q_0 = 1, p_1 = 1, q_1 = a_1`, so that
//! `[1] = 1/1` and `[1, 4, 9] = 37/46`.

use std::fmt;
use std::sync::{Arc, LazyLock};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use parking_lot::RwLock;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::interval::{self, rat_int, Interval, Rational};

type CoefficientFn = dyn Fn(u64) -> BigInt + Send + Sync;

/// Rule producing the partial quotients `a_k` for `k >= 1`.
#[derive(Clone)]
pub enum CoefficientSequence {
    /// `a_k = k^2`.
    Squares,
    /// Arbitrary rule, identified by `id` for caching and reporting.
    Custom { id: String, rule: Arc<CoefficientFn> },
}

impl fmt::Debug for CoefficientSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.id())
    }
}

impl CoefficientSequence {
    pub fn custom(id: impl Into<String>, rule: impl Fn(u64) -> BigInt + Send + Sync + 'static) -> Self {
        CoefficientSequence::Custom { id: id.into(), rule: Arc::new(rule) }
    }

    pub fn id(&self) -> String {
        match self {
            CoefficientSequence::Squares => "squares".to_string(),
            CoefficientSequence::Custom { id, .. } => id.clone(),
        }
    }

    pub fn is_default(&self) -> bool {
        matches!(self, CoefficientSequence::Squares)
    }

    pub fn coefficient(&self, k: u64) -> Result<BigInt> {
        if k == 0 {
            return Err(Error::domain("coefficient index starts at 1"));
        }
        let a = match self {
            CoefficientSequence::Squares => BigInt::from(k) * BigInt::from(k),
            CoefficientSequence::Custom { rule, .. } => rule(k),
        };
        if a < BigInt::one() {
            return Err(Error::domain(format!("coefficient a_{k} = {a} is below 1")));
        }
        Ok(a)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Convergent {
    pub k: u64,
    #[serde(serialize_with = "ser_bigint")]
    pub p: BigInt,
    #[serde(serialize_with = "ser_bigint")]
    pub q: BigInt,
}

fn ser_bigint<S: serde::Serializer>(x: &BigInt, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&x.to_str_radix(10))
}

/// Enclosure of `b = 2 * sum_{j>=1} |q_{2j+1} alpha - p_{2j+1}|`.
#[derive(Debug, Clone)]
pub struct BValue {
    pub enclosure: Interval,
    /// Number of summed terms.
    pub truncation: u64,
    /// Upper bound on the omitted tail `2 * sum_{j>J} |...|`.
    pub tail_bound: Rational,
}

#[derive(Debug, Clone)]
pub struct AssumptionReport {
    /// (K, partial sum of `1/a_{2k+2}` for `k <= K`)
    pub summable_partials: Vec<(u64, Interval)>,
    /// Bound on the omitted tail after the last partial sum (default sequence only).
    pub summable_tail_bound: Option<Rational>,
    /// `(pi^2/6 - 1)/4` for the default sequence.
    pub summable_limit: Option<Interval>,
    pub summable_increasing: bool,
    /// (k, `a_{2k+1}`)
    pub divergent_terms: Vec<(u64, BigInt)>,
    pub divergent_increasing: bool,
    pub ratio_rows: Vec<RatioRow>,
    /// Certified `r_{k+1} < r_k` for every consecutive pair with `k >= 3`.
    pub ratio_decreasing_from_3: bool,
    /// Largest upper endpoint of `r_k * k^4` over the rows.
    pub ratio_scaled_max: Rational,
}

#[derive(Debug, Clone)]
pub struct RatioRow {
    pub k: u64,
    /// `r_k = q_{2k-1} log(a_{2k+2}) / q_{2k+1}`
    pub ratio: Interval,
    pub ratio_times_k4: Interval,
}

/// Memoizing continued-fraction engine. Cheap to clone; clones share the cache.
#[derive(Clone)]
pub struct ContinuedFraction {
    seq: CoefficientSequence,
    // cache[k] = (p_k, q_k)
    cache: Arc<RwLock<Vec<(BigInt, BigInt)>>>,
}

impl fmt::Debug for ContinuedFraction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ContinuedFraction").field("seq", &self.seq).field("cached", &self.cache.read().len()).finish()
    }
}

static SQUARES: LazyLock<ContinuedFraction> = LazyLock::new(|| ContinuedFraction::new(CoefficientSequence::Squares));

impl ContinuedFraction {
    pub fn new(seq: CoefficientSequence) -> Self {
        ContinuedFraction {
            seq,
            cache: Arc::new(RwLock::new(vec![(BigInt::zero(), BigInt::one())])),
        }
    }

    /// Shared engine for `a_k = k^2`.
    pub fn squares() -> Self {
        SQUARES.clone()
    }

    pub fn sequence(&self) -> &CoefficientSequence {
        &self.seq
    }

    pub fn coefficient(&self, k: u64) -> Result<BigInt> {
        self.seq.coefficient(k)
    }

    pub fn convergent(&self, k: u64) -> Result<Convergent> {
        {
            let cache = self.cache.read();
            if let Some((p, q)) = cache.get(k as usize) {
                return Ok(Convergent { k, p: p.clone(), q: q.clone() });
            }
        }
        let mut cache = self.cache.write();
        while cache.len() <= k as usize {
            let j = cache.len() as u64;
            let a = self.seq.coefficient(j)?;
            let (p1, q1) = cache[j as usize - 1].clone();
            let (p2, q2) = if j >= 2 { cache[j as usize - 2].clone() } else { (BigInt::one(), BigInt::zero()) };
            cache.push((&a * &p1 + p2, &a * &q1 + q2));
        }
        let (p, q) = cache[k as usize].clone();
        Ok(Convergent { k, p, q })
    }

    pub fn q(&self, k: u64) -> Result<BigInt> {
        Ok(self.convergent(k)?.q)
    }

    pub fn p(&self, k: u64) -> Result<BigInt> {
        Ok(self.convergent(k)?.p)
    }

    /// Interval between the consecutive convergents `p_K/q_K` and `p_{K+1}/q_{K+1}`.
    pub fn enclose_alpha(&self, depth: u64) -> Result<Interval> {
        if depth == 0 {
            return Err(Error::domain("alpha enclosure depth starts at 1"));
        }
        let a = self.convergent(depth)?;
        let b = self.convergent(depth + 1)?;
        Ok(Interval::spanning(Rational::new(a.p, a.q), Rational::new(b.p, b.q)))
    }

    /// Shallowest convergent enclosure of alpha whose width is at most `width`.
    pub fn alpha_within(&self, width: &Rational) -> Result<Interval> {
        if !width.is_positive() {
            return Err(Error::domain("requested alpha width must be positive"));
        }
        let mut depth = 1;
        loop {
            let enc = self.enclose_alpha(depth)?;
            if &enc.width() <= width {
                return Ok(enc);
            }
            depth += 1;
        }
    }

    /// Certified enclosure of `q_k alpha - p_k` whose sign is determined.
    pub fn signed_error(&self, k: u64) -> Result<Interval> {
        if k == 0 {
            return Err(Error::domain("signed error index starts at 1"));
        }
        let c = self.convergent(k)?;
        let bound = Rational::new(BigInt::one(), self.q(k + 1)?);
        let max_depth = k + 64;
        for depth in (k + 1)..=max_depth {
            let alpha = self.enclose_alpha(depth)?;
            let e = &alpha.scale(&rat_int(c.q.clone())) - &Interval::from_int(c.p.clone());
            // also resolve the classical bound |e| < 1/q_{k+1}
            if e.sign().is_some_and(|s| s != 0) && e.abs().hi() < &bound {
                return Ok(e);
            }
        }
        Err(Error::precision(format!("cannot separate q_{k} alpha - p_{k} from 0 at depth {max_depth}")))
    }

    /// `q_k alpha - p_k` with interval width at most `width`.
    pub fn signed_error_within(&self, k: u64, width: &Rational) -> Result<Interval> {
        let c = self.convergent(k)?;
        let alpha = self.alpha_within(&(width / rat_int(c.q.clone())))?;
        Ok(&alpha.scale(&rat_int(c.q)) - &Interval::from_int(c.p))
    }

    /// `b` truncated after `terms` summands, each term enclosed to `term_width`.
    pub fn b_truncated(&self, terms: u64, term_width: &Rational) -> Result<BValue> {
        let mut sum = Interval::zero();
        for j in 1..=terms {
            let m = 2 * j + 1;
            let e = self.signed_error_within(m, term_width)?.abs();
            let bound = Rational::new(BigInt::one(), self.q(m + 1)?);
            if !e.hi().lt(&bound) {
                return Err(Error::precision(format!(
                    "|q_{m} alpha - p_{m}| not certified below 1/q_{}",
                    m + 1
                )));
            }
            sum = &sum + &e;
        }
        // q_{m+2} >= 2 q_m, so the tail of 1/q_{2j+2} is at most twice its first term
        let tail_bound = Rational::new(BigInt::from(4), self.q(2 * terms + 4)?);
        let partial = sum.scale(&rat_int(2));
        let enclosure = Interval::new(partial.lo().clone(), partial.hi() + &tail_bound);
        Ok(BValue { enclosure, truncation: terms, tail_bound })
    }

    /// Enclosure of `b` of width at most `tolerance`.
    pub fn compute_b(&self, tolerance: &Rational) -> Result<BValue> {
        if !tolerance.is_positive() {
            return Err(Error::domain("tolerance must be positive"));
        }
        let half = tolerance / rat_int(2);
        let mut terms = 1;
        while Rational::new(BigInt::from(4), self.q(2 * terms + 4)?) >= half {
            terms += 1;
        }
        let q_last = self.q(2 * terms + 1)?;
        let term_width = tolerance / rat_int(BigInt::from(8 * terms) * q_last);
        let mut v = self.b_truncated(terms, &term_width)?;
        let bits = bits_for(&(tolerance / rat_int(16)));
        v.enclosure = v.enclosure.round_out(bits);
        debug_assert!(&v.enclosure.width() <= tolerance);
        Ok(v)
    }

    pub fn check_assumptions(&self, max_k: u64) -> Result<AssumptionReport> {
        if max_k < 2 {
            return Err(Error::domain("assumption checks need max_k >= 2"));
        }
        let bits = 160;
        // (A)
        let mut partials = Vec::new();
        let mut acc = Rational::zero();
        for k in 1..=max_k {
            acc += Rational::new(BigInt::one(), self.coefficient(2 * k + 2)?);
            partials.push((k, Interval::exact(acc.clone())));
        }
        let summable_increasing = partials.windows(2).all(|w| w[0].1.certainly_lt(&w[1].1));
        let (tail, limit) = if self.seq.is_default() {
            // sum_{m > K+1} 1/(4 m^2) <= 1/(4 (K+1))
            let tail = Rational::new(BigInt::one(), BigInt::from(4 * (max_k + 1)));
            let pi = interval::pi(bits);
            let zeta2 = pi.square().scale(&interval::ratio(1, 6));
            let limit = (&zeta2 - &Interval::one()).scale(&interval::ratio(1, 4));
            (Some(tail), Some(limit))
        } else {
            (None, None)
        };
        // (B)
        let mut divergent = Vec::new();
        for k in 1..=max_k {
            divergent.push((k, self.coefficient(2 * k + 1)?));
        }
        let divergent_increasing = divergent.windows(2).all(|w| w[0].1 < w[1].1);
        // (C)
        let mut rows = Vec::new();
        for k in 1..=max_k {
            let num = self.q(2 * k - 1)?;
            let den = self.q(2 * k + 1)?;
            let log_a = Interval::from_int(self.coefficient(2 * k + 2)?).ln(bits)?;
            let ratio = log_a.scale(&Rational::new(num, den));
            let k4 = rat_int(BigInt::from(k).pow(4));
            rows.push(RatioRow { k, ratio_times_k4: ratio.scale(&k4), ratio });
        }
        let ratio_decreasing_from_3 = rows
            .windows(2)
            .filter(|w| w[0].k >= 3)
            .all(|w| w[1].ratio.certainly_lt(&w[0].ratio));
        let ratio_scaled_max = rows.iter().map(|r| r.ratio_times_k4.hi().clone()).max().unwrap_or_else(Rational::zero);
        Ok(AssumptionReport {
            summable_partials: partials,
            summable_tail_bound: tail,
            summable_limit: limit,
            summable_increasing,
            divergent_terms: divergent,
            divergent_increasing,
            ratio_rows: rows,
            ratio_decreasing_from_3,
            ratio_scaled_max,
        })
    }
}

/// Smallest `bits` with `2^-bits <= eps`.
pub(crate) fn bits_for(eps: &Rational) -> u32 {
    let mut bits = eps.denom().bits() as i64 - eps.numer().bits() as i64;
    bits = bits.max(0);
    let mut bits = bits as u32;
    while Rational::new(BigInt::one(), BigInt::one() << bits as usize) > *eps {
        bits += 1;
    }
    bits
}

/// `|p_k q_{k-1} - p_{k-1} q_k| == 1` and `gcd(p_k, q_k) == 1` for `1 <= k <= max_k`.
pub fn verify_recurrence(cf: &ContinuedFraction, max_k: u64) -> Result<bool> {
    for k in 1..=max_k {
        let a = cf.convergent(k)?;
        let b = cf.convergent(k - 1)?;
        let det = &a.p * &b.q - &b.p * &a.q;
        let expected = if (k - 1) % 2 == 0 { BigInt::one() } else { -BigInt::one() };
        if det != expected || !a.p.gcd(&a.q).is_one() {
            return Ok(false);
        }
        if k >= 2 && a.q <= b.q {
            return Ok(false);
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::interval::ratio;

    /// Bottom-up evaluation of `1/(a_1 + 1/(a_2 + ... + 1/a_k))` in exact rationals.
    fn bottom_up(coeffs: &[i64]) -> Rational {
        let mut x = Rational::zero();
        for &a in coeffs.iter().rev() {
            x = (rat_int(a) + x).recip();
        }
        x
    }

    #[test]
    fn coefficients_are_squares() {
        let cf = ContinuedFraction::squares();
        assert_eq!(cf.coefficient(1).unwrap(), BigInt::from(1));
        assert_eq!(cf.coefficient(5).unwrap(), BigInt::from(25));
        assert!(matches!(cf.coefficient(0), Err(Error::Domain(_))));
    }

    #[test]
    fn convergents_match_bottom_up_oracle() {
        let cf = ContinuedFraction::squares();
        let c0 = cf.convergent(0).unwrap();
        assert_eq!((c0.p, c0.q), (BigInt::from(0), BigInt::from(1)));
        for k in 1..=12i64 {
            let coeffs: Vec<i64> = (1..=k).map(|i| i * i).collect();
            let oracle = bottom_up(&coeffs);
            let c = cf.convergent(k as u64).unwrap();
            assert_eq!(Rational::new(c.p.clone(), c.q.clone()), oracle);
            assert_eq!(c.q, oracle.denom().clone());
        }
        let c3 = cf.convergent(3).unwrap();
        assert_eq!((c3.p, c3.q), (BigInt::from(37), BigInt::from(46)));
        let c5 = cf.convergent(5).unwrap();
        assert_eq!((c5.p, c5.q), (BigInt::from(14937), BigInt::from(18571)));
        assert!(verify_recurrence(&cf, 50).unwrap());
    }

    #[test]
    fn alpha_enclosures() {
        let cf = ContinuedFraction::squares();
        assert_eq!(cf.enclose_alpha(1).unwrap(), Interval::new(ratio(4, 5), ratio(1, 1)));
        let e3 = cf.enclose_alpha(3).unwrap();
        assert_eq!(e3, Interval::new(ratio(596, 741), ratio(37, 46)));
        assert!(e3.width() <= ratio(1, 46 * 741));
        for k in 1..30 {
            let a = cf.enclose_alpha(k).unwrap();
            let b = cf.enclose_alpha(k + 1).unwrap();
            assert!(b.is_subset_of(&a));
            let bound = Rational::new(BigInt::one(), cf.q(k).unwrap() * cf.q(k + 1).unwrap());
            assert!(a.width() <= bound);
        }
        assert!(cf.enclose_alpha(0).is_err());
    }

    #[test]
    fn signed_errors_alternate_and_are_small() {
        let cf = ContinuedFraction::squares();
        let e2 = cf.signed_error(2).unwrap();
        assert!(e2.is_positive());
        let e3 = cf.signed_error(3).unwrap();
        assert!(e3.is_negative());
        assert!(e3.abs().hi() < &ratio(1, 741));
        for k in 1..40u64 {
            let e = cf.signed_error(k).unwrap();
            let expected = if k % 2 == 0 { 1 } else { -1 };
            assert_eq!(e.sign(), Some(expected), "k = {k}");
            let bound = Rational::new(BigInt::one(), cf.q(k + 1).unwrap());
            assert!(e.abs().hi() < &bound);
        }
    }

    #[test]
    fn b_value_and_tolerance_nesting() {
        let cf = ContinuedFraction::squares();
        let tol12 = ratio(1, 1_000_000_000_000);
        let b12 = cf.compute_b(&tol12).unwrap();
        assert!(b12.enclosure.width() <= tol12);
        // independent float estimate from the dominant terms
        assert!((b12.enclosure.to_f64() - 0.0026954).abs() < 5e-7);
        let tol30 = Rational::new(BigInt::one(), BigInt::from(10).pow(30));
        let b30 = cf.compute_b(&tol30).unwrap();
        assert!(b30.enclosure.intersects(&b12.enclosure));
        assert!(b30.enclosure.width() <= tol30);
        let fat = Interval::new(b12.enclosure.lo() - &b12.tail_bound, b12.enclosure.hi() + &b12.tail_bound);
        assert!(b30.enclosure.is_subset_of(&fat));
        assert!(cf.compute_b(&Rational::zero()).is_err());
    }

    #[test]
    fn b_with_no_terms_is_the_tail() {
        let cf = ContinuedFraction::squares();
        let v = cf.b_truncated(0, &ratio(1, 1000)).unwrap();
        assert_eq!(v.enclosure, Interval::new(Rational::zero(), v.tail_bound.clone()));
        assert_eq!(v.truncation, 0);
    }

    #[test]
    fn assumption_report_values() {
        let cf = ContinuedFraction::squares();
        let r = cf.check_assumptions(10).unwrap();
        let (k, s) = &r.summable_partials[9];
        assert_eq!(*k, 10);
        assert!((s.to_f64() - 0.139508).abs() < 1e-5);
        assert!(r.summable_increasing);
        let limit = r.summable_limit.unwrap();
        assert!((limit.to_f64() - 0.1612335).abs() < 1e-6);
        assert!(s.hi() <= limit.lo());
        assert_eq!(r.divergent_terms[3], (4, BigInt::from(81)));
        assert!(r.divergent_increasing);
        let r3 = &r.ratio_rows[2];
        assert!((r3.ratio.to_f64() - 18571.0 * 64f64.ln() / 32814124.0).abs() < 1e-12);
        assert!(r.ratio_decreasing_from_3);
        assert!(cf.check_assumptions(1).is_err());
    }

    #[test]
    fn custom_sequence_has_its_own_cache() {
        let golden = ContinuedFraction::new(CoefficientSequence::custom("ones", |_| BigInt::one()));
        assert_eq!(golden.q(10).unwrap(), BigInt::from(89));
        assert_eq!(ContinuedFraction::squares().q(3).unwrap(), BigInt::from(46));
        let bad = ContinuedFraction::new(CoefficientSequence::custom("zeros", |_| BigInt::zero()));
        assert!(bad.convergent(2).is_err());
    }

    #[test]
    fn concurrent_reads_agree() {
        let cf = ContinuedFraction::new(CoefficientSequence::Squares);
        let results: Vec<BigInt> = std::thread::scope(|s| {
            let hs: Vec<_> = (0..8).map(|i| { let cf = cf.clone(); s.spawn(move || cf.q(30 + i % 3).unwrap()) }).collect();
            hs.into_iter().map(|h| h.join().unwrap()).collect()
        });
        for (i, q) in results.iter().enumerate() {
            assert_eq!(*q, cf.q(30 + (i as u64) % 3).unwrap());
        }
    }
}
