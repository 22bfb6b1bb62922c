//! Certified integer-valued sums over linear sequences with irrational data.
//!
//! These replace explicit enumeration of strands once the strand count
//! grows past anything that can be listed (it reaches 10^40 at desk scale).

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::interval::{rat_int, Interval};

/// Working precision (bits) for quantities indexed up to `n`.
pub(crate) fn bits_for_count(n: &BigInt) -> u32 {
    2 * n.bits() as u32 + 96
}

/// `sum_{i=0}^{n-1} floor(i * theta + phi)`.
///
/// Assumes no term `i * theta + phi` with `i > 0` is an exact integer unless
/// the inputs are exact; every floor actually taken is certified.
pub fn floor_sum(n: &BigInt, theta: &Interval, phi: &Interval) -> Result<BigInt> {
    let bits = bits_for_count(n).max(128);
    floor_sum_rec(n.clone(), theta.clone(), phi.clone(), bits, 0)
}

fn floor_sum_rec(n: BigInt, theta: Interval, phi: Interval, bits: u32, depth: u32) -> Result<BigInt> {
    if n.is_zero() || n.is_negative() {
        return Ok(BigInt::zero());
    }
    if depth > 4 * bits {
        return Err(Error::precision("floor sum recursion did not terminate"));
    }
    let a = theta.floor_or_err("slope")?;
    let c = phi.floor_or_err("offset")?;
    let tri = &n * (&n - 1u32) / 2u32;
    let mut res = &a * &tri + &c * &n;
    let theta = &theta - &Interval::from_int(a);
    let phi = &phi - &Interval::from_int(c);
    if theta.is_exact() && theta.lo().is_zero() {
        return Ok(res);
    }
    if !theta.is_positive() {
        return Err(Error::precision("slope fractional part not separated from 0"));
    }
    let top = &theta.scale(&rat_int(&n - 1u32)) + &phi;
    let m = top.floor_or_err("largest term")?;
    if m.is_zero() {
        return Ok(res);
    }
    let inv = theta.recip()?.round_out(bits);
    let phi2 = (&Interval::one() - &phi).div(&theta)?.round_out(bits);
    let inner = floor_sum_rec(m.clone(), inv, phi2, bits, depth + 1)?;
    res += &m * (&n - 1u32) - inner;
    Ok(res)
}

/// Convergents `(h_l, k_l)` for `l = -1, 0, 1, ...` of every real in `x`, stopping
/// once `k_l > max_den`, together with the partial quotients `a_0, a_1, ...`.
///
/// Certifies that no rational with denominator at most `max_den` lies in `x`.
#[derive(Debug, Clone)]
pub struct CertifiedExpansion {
    pub digits: Vec<BigInt>,
    /// index 0 holds l = -1
    pub convergents: Vec<(BigInt, BigInt)>,
}

impl CertifiedExpansion {
    pub fn new(x: &Interval, max_den: &BigInt) -> Result<Self> {
        let mut lo = x.lo().clone();
        let mut hi = x.hi().clone();
        let mut digits = Vec::new();
        let mut convs = vec![(BigInt::one(), BigInt::zero())];
        let (mut h2, mut k2) = (BigInt::zero(), BigInt::one()); // l = -2
        let (mut h1, mut k1) = (BigInt::one(), BigInt::zero()); // l = -1
        loop {
            let a = lo.floor().to_integer();
            if hi.floor().to_integer() != a || lo.is_integer() {
                return Err(Error::precision(format!(
                    "continued fraction of the enclosure is not determined past denominator {k1}"
                )));
            }
            let h = &a * &h1 + &h2;
            let k = &a * &k1 + &k2;
            digits.push(a.clone());
            convs.push((h.clone(), k.clone()));
            if &k > max_den {
                return Ok(CertifiedExpansion { digits, convergents: convs });
            }
            h2 = std::mem::replace(&mut h1, h);
            k2 = std::mem::replace(&mut k1, k);
            let a_r = rat_int(a);
            let new_lo = (&hi - &a_r).recip();
            let new_hi = (&lo - &a_r).recip();
            lo = new_lo;
            hi = new_hi;
        }
    }

    fn conv(&self, l: i64) -> &(BigInt, BigInt) {
        &self.convergents[(l + 1) as usize]
    }

    fn last_index(&self) -> i64 {
        self.convergents.len() as i64 - 2
    }

    /// Largest denominator `<= m` among the one-sided best approximations on
    /// the side of the convergents with index parity `parity` (0 below, 1 above),
    /// with its numerator.
    fn best_one_sided(&self, m: &BigInt, parity: i64) -> Option<(BigInt, BigInt)> {
        let mut best: Option<(BigInt, BigInt)> = None;
        let mut e = if parity == 0 { 0 } else { -1 };
        while e < self.last_index() {
            let (he, ke) = self.conv(e).clone();
            let (hn, kn) = self.conv(e + 1).clone();
            if !ke.is_zero() && &ke <= m {
                best = Some((he.clone(), ke.clone()));
            }
            // semiconvergents (h_e + j h_{e+1}) / (k_e + j k_{e+1}), j = 1..a_{e+2}
            if !kn.is_zero() && kn <= *m {
                let room = (m - &ke) / &kn;
                let cap = self.digits.get((e + 2) as usize).cloned();
                let j = match cap {
                    Some(a) => room.min(a),
                    None => room,
                };
                if j >= BigInt::one() {
                    best = Some((&he + &j * &hn, &ke + &j * &kn));
                }
            }
            e += 2;
        }
        best
    }
}

/// Largest gap between consecutive points of `{ i * beta mod 1 : 0 <= i < n }`
/// as a fraction of the circle.
pub fn max_gap_fraction(beta: &Interval, n: &BigInt) -> Result<Interval> {
    if n <= &BigInt::one() {
        return Ok(Interval::one());
    }
    let shift = beta.floor_or_err("rotation number")?;
    let beta = beta - &Interval::from_int(shift);
    let m = n - 1u32;
    let exp = CertifiedExpansion::new(&beta, &m)?;
    let (pu, u) = exp.best_one_sided(&m, 0).ok_or_else(|| Error::precision("no lower approximation"))?;
    let (pv, v) = exp.best_one_sided(&m, 1).ok_or_else(|| Error::precision("no upper approximation"))?;
    let g1 = &beta.scale(&rat_int(u.clone())) - &Interval::from_int(pu);
    let g2 = &Interval::from_int(pv) - &beta.scale(&rat_int(v.clone()));
    if !(g1.is_positive() && g2.is_positive()) {
        return Err(Error::precision("gap lengths not certified positive"));
    }
    if &u + &v >= &m + 2u32 {
        Ok(&g1 + &g2)
    } else {
        Ok(g1.max(&g2))
    }
}

/// Number of `i` in `1..n` with `frac(i * beta) < width`, for `0 < width < 1`.
pub fn count_fractional_hits(beta: &Interval, width: &Interval, n: &BigInt) -> Result<BigInt> {
    if n <= &BigInt::one() {
        return Ok(BigInt::zero());
    }
    // [frac(x) < w] = floor(x) - floor(x - w)
    let a = floor_sum(n, beta, &Interval::zero())?;
    let b = floor_sum(n, beta, &(-width))?;
    // drop the i = 0 term, which contributes floor(0) - floor(-w) = 1
    Ok(a - b - 1u32)
}

/// `gcd(m, n) == 1`
pub fn is_primitive(m: &BigInt, n: &BigInt) -> bool {
    m.gcd(n).is_one()
}

/// Certifies `frac(d * x) != 0` for every `1 <= d <= bound`.
pub fn avoids_small_denominators(x: &Interval, bound: &BigInt) -> bool {
    CertifiedExpansion::new(x, bound).is_ok()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::interval::{ratio, Rational};
    use proptest::prelude::*;

    fn brute_floor_sum(n: i64, theta: &Rational, phi: &Rational) -> BigInt {
        (0..n).map(|i| (rat_int(i) * theta + phi).floor().to_integer()).sum()
    }

    fn brute_max_gap(beta: f64, n: usize) -> f64 {
        let mut pts: Vec<f64> = (0..n).map(|i| (i as f64 * beta).fract()).collect();
        pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let mut g = 1.0 - pts[n - 1] + pts[0];
        for w in pts.windows(2) {
            g = g.max(w[1] - w[0]);
        }
        g
    }

    fn sqrt2_minus_1() -> Interval {
        Interval::from_int(2).sqrt(200).unwrap() - Interval::one()
    }

    #[test]
    fn floor_sum_matches_brute_force_for_sqrt2() {
        let theta = Interval::from_int(2).sqrt(300).unwrap();
        let phi = Interval::exact(ratio(1, 7));
        for n in [1i64, 2, 10, 137, 1000] {
            let expected = brute_floor_sum(n, theta.lo(), phi.lo());
            assert_eq!(floor_sum(&BigInt::from(n), &theta, &phi).unwrap(), expected, "n = {n}");
        }
    }

    #[test]
    fn max_gap_single_point() {
        assert_eq!(max_gap_fraction(&sqrt2_minus_1(), &BigInt::one()).unwrap(), Interval::one());
    }

    #[test]
    fn max_gap_matches_sorting_for_sqrt2() {
        let beta = sqrt2_minus_1();
        let bf = beta.to_f64();
        for n in [2usize, 3, 5, 12, 13, 29, 100, 411, 1000] {
            let g = max_gap_fraction(&beta, &BigInt::from(n)).unwrap();
            assert!((g.to_f64() - brute_max_gap(bf, n)).abs() < 1e-9, "n = {n}");
        }
    }

    #[test]
    fn rational_enclosure_is_rejected() {
        let x = Interval::exact(ratio(3, 7));
        assert!(CertifiedExpansion::new(&x, &BigInt::from(100)).is_err());
        assert!(!avoids_small_denominators(&x, &BigInt::from(10)));
        assert!(avoids_small_denominators(&sqrt2_minus_1(), &BigInt::from(10_000)));
    }

    #[test]
    fn fractional_hits_match_brute_force() {
        let beta = Interval::from_int(3).sqrt(200).unwrap();
        let w = Interval::exact(ratio(1, 10));
        let n = 5000i64;
        let bf = beta.to_f64();
        let expected = (1..n).filter(|&i| (i as f64 * bf).fract() < 0.1).count();
        assert_eq!(count_fractional_hits(&beta, &w, &BigInt::from(n)).unwrap(), BigInt::from(expected));
    }

    proptest! {
        #[test]
        fn floor_sum_matches_brute_force(num in 1i64..10_000_000, n in 1i64..400, pn in -50i64..50) {
            // a rational slope with a large prime denominator behaves generically for small n
            let theta = ratio(num, 1_000_003);
            let phi = ratio(pn, 97) + ratio(1, 1_000_033);
            let expected = brute_floor_sum(n, &theta, &phi);
            let got = floor_sum(&BigInt::from(n), &Interval::exact(theta), &Interval::exact(phi)).unwrap();
            prop_assert_eq!(got, expected);
        }

        #[test]
        fn max_gap_matches_sorting(num in 1i64..1_000_000_006, n in 2usize..600) {
            let beta = ratio(num, 1_000_000_007);
            let bf = num as f64 / 1_000_000_007.0;
            let g = max_gap_fraction(&Interval::exact(beta), &BigInt::from(n)).unwrap();
            prop_assert!((g.to_f64() - brute_max_gap(bf, n)).abs() < 1e-9);
        }
    }
}
