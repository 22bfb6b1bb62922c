use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::Serialize;

use super::arith::{avoids_small_denominators, count_fractional_hits};
use super::lattice::{box_search, certified_min, lattice_at, reduce_basis, systole, with_retries, Coords};
use super::{FlowTime, PlanarVector, SlitSurface, DISPLAY_BITS};
use crate::error::{Error, Result};
use crate::interval::{pi, rat_int, Interval, Rational};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ConnectionKind {
    BranchToBranch,
    BranchLoop,
}

/// How a connection threads the two sheets.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SheetPattern {
    /// Transverse crossings of slit copies in the interior of the segment.
    pub slit_crossings: Option<BigInt>,
    /// Sheet on which the segment ends when it starts on sheet 0.
    pub end_sheet: Option<u8>,
}

#[derive(Debug, Clone)]
pub struct SaddleConnection {
    pub kind: ConnectionKind,
    /// Lattice coordinates `(m, n)`; the holonomy is `(m + b_c, n)` for
    /// branch-to-branch connections and `(m, n)` for loops, before shearing.
    pub coords: Coords,
    pub holonomy: PlanarVector,
    pub sheet_pattern: SheetPattern,
    pub flat_length: Interval,
    pub time: FlowTime,
}

impl SaddleConnection {
    pub fn horizontal(&self) -> Interval {
        self.holonomy.x.abs()
    }

    pub fn vertical(&self) -> Interval {
        self.holonomy.y.abs()
    }
}

/// Interior slit crossings of the segment from `0` to `(m + w, n)`.
fn slit_crossings(m: &BigInt, n: &BigInt, w: &Interval) -> Result<BigInt> {
    if n.is_zero() {
        return Ok(BigInt::zero());
    }
    // rows y = 1..|n|-1 meet the segment at abscissa y (m + w) / |n| (mod 1);
    // the slit copy on that row covers [0, w)
    let beta = (w + &Interval::from_int(m.clone())).scale(&Rational::new(BigInt::one(), n.abs()));
    count_fractional_hits(&beta, w, &n.abs())
}

pub fn slit_connections(surface: &SlitSurface, t: &FlowTime, bound: &Rational) -> Result<Vec<SaddleConnection>> {
    if !bound.is_positive() {
        return Err(Error::domain("length bound must be positive"));
    }
    with_retries(|extra| slit_connections_at(surface, t, bound, extra))
}

fn slit_connections_at(
    surface: &SlitSurface,
    t: &FlowTime,
    bound: &Rational,
    extra: u32,
) -> Result<Vec<SaddleConnection>> {
    let lattice = lattice_at(surface, t, extra)?;
    let red = reduce_basis(&lattice)?;
    let (s, _) = t.factors();
    let s_int = s.hi().ceil().to_integer().max(BigInt::one());
    let n_max = &s_int * (bound.ceil().to_integer() + 1);
    let w = surface.slit_width_bits(SlitSurface::working_bits(&s_int, &n_max, extra))?;
    let bound2 = bound * bound;
    let mut found = Vec::new();
    for ((m, n), v, len2) in box_search(&lattice, &red, &w, bound) {
        if len2.hi() > &bound2 {
            if len2.lo() <= &bound2 {
                return Err(Error::precision("candidate length straddles the bound"));
            }
            continue;
        }
        // horizontal coset vectors other than the slit and its complement
        // pass through a branch point
        if n.is_zero() && !(m.is_zero() || m == -BigInt::one()) {
            continue;
        }
        found.push(((m, n), v, len2));
    }
    let n_top = found.iter().map(|c| c.0 .1.abs()).max().unwrap_or_default();
    if n_top > BigInt::one() && !avoids_small_denominators(&w, &n_top) {
        return Err(Error::precision("slit width not certified away from rationals of small denominator"));
    }
    let mut out = Vec::with_capacity(found.len());
    for ((m, n), holonomy, len2) in found {
        let crossings = slit_crossings(&m, &n, &w)?;
        let parity = (&crossings % 2u32).is_one() as u8;
        out.push(SaddleConnection {
            kind: ConnectionKind::BranchToBranch,
            sheet_pattern: SheetPattern { slit_crossings: Some(crossings), end_sheet: Some(parity) },
            flat_length: len2.sqrt(DISPLAY_BITS + extra)?,
            coords: (m, n),
            holonomy,
            time: t.clone(),
        });
    }
    out.sort_by(|a, b| {
        a.flat_length
            .mid()
            .cmp(&b.flat_length.mid())
            .then_with(|| a.vertical().mid().cmp(&b.vertical().mid()))
            .then_with(|| a.horizontal().mid().cmp(&b.horizontal().mid()))
            .then_with(|| a.sheet_pattern.end_sheet.cmp(&b.sheet_pattern.end_sheet))
    });
    Ok(out)
}

/// The slit curve of stage `k` together with its scale-free summaries.
#[derive(Debug, Clone)]
pub struct SlitCurve {
    pub k: u64,
    pub connection: SaddleConnection,
    pub horizontal: Interval,
    pub vertical: Interval,
    pub length: Interval,
    /// `|zeta_k| * a_{2k+2}`
    pub length_times_a: Interval,
}

/// Shortest branch-to-branch connection at `t_k`.
///
/// For `c != 0` the combinatorial class is the one found at `c = 0` and its
/// horizontal measure is weighted by `1 + c`; see the crate README.
pub fn slit_curve(surface: &SlitSurface, k: u64) -> Result<SlitCurve> {
    let t = surface.stage_time(k)?;
    let base = surface.with_c(Rational::zero())?;
    let mut bound = Rational::one();
    let conns = loop {
        let conns = slit_connections(&base, &t, &bound)?;
        if !conns.is_empty() {
            break conns;
        }
        bound *= rat_int(2);
        if bound > rat_int(64) {
            return Err(Error::precision("no branch-to-branch connection found"));
        }
    };
    let lens: Vec<Interval> = conns.iter().map(|c| c.flat_length.square()).collect();
    let best = certified_min(&lens).map_err(|e| e.at_stage(k as u32))?;
    weighted_curve(surface, k, conns[best].clone())
}

/// The slit curve of `surface` from the one found on `X_0`, which it shares up
/// to the horizontal weight. `base` must come from [`slit_curve`] at `c = 0`.
pub fn reweight_slit_curve(base: &SlitCurve, surface: &SlitSurface) -> Result<SlitCurve> {
    weighted_curve(surface, base.k, base.connection.clone())
}

fn weighted_curve(surface: &SlitSurface, k: u64, mut zeta: SaddleConnection) -> Result<SlitCurve> {
    if !surface.c().is_zero() {
        zeta.holonomy.x = zeta.holonomy.x.scale(&surface.weight());
        zeta.flat_length = zeta.holonomy.length(DISPLAY_BITS);
    }
    let a = rat_int(surface.cf().coefficient(2 * k + 2)?);
    Ok(SlitCurve {
        k,
        horizontal: zeta.horizontal(),
        vertical: zeta.vertical(),
        length: zeta.flat_length.clone(),
        length_times_a: zeta.flat_length.scale(&a),
        connection: zeta,
    })
}

#[derive(Debug, Clone)]
pub struct LengthCertificate {
    pub inner_radius: Interval,
    pub outer_radius: Interval,
    /// `(1 / 2 pi) log(R / r)`
    pub modulus_lower: Interval,
    /// Extremal length is at most `1 / modulus`.
    pub extremal_upper: Interval,
    /// Hyperbolic length is at most `pi` times the extremal length.
    pub hyperbolic_upper: Interval,
}

impl LengthCertificate {
    /// Round annulus between radii `inner < outer`.
    pub fn from_radii(inner: &Interval, outer: &Interval) -> Result<Self> {
        if !inner.certainly_lt(outer) {
            return Err(Error::NoCertificate(format!(
                "annulus radii not separated: inner {inner:?}, outer {outer:?}"
            )));
        }
        let bits = DISPLAY_BITS;
        let p = pi(bits);
        let log_ratio = outer.div(inner)?.ln(bits)?;
        let modulus = log_ratio.div(&p.scale(&rat_int(2)))?.round_out(bits);
        let extremal = modulus.recip()?.round_out(bits);
        let hyperbolic = (&p * &extremal).round_out(bits);
        Ok(LengthCertificate {
            inner_radius: inner.clone(),
            outer_radius: outer.clone(),
            modulus_lower: modulus,
            extremal_upper: extremal,
            hyperbolic_upper: hyperbolic,
        })
    }
}

/// Certificate from the round annulus of outer radius `systole / 4` around `zeta`.
pub fn length_certificate(zeta: &SaddleConnection, surface: &SlitSurface, t: &FlowTime) -> Result<LengthCertificate> {
    let sys = systole(surface, t)?;
    let outer = sys.lattice_systole.scale(&Rational::new(BigInt::one(), BigInt::from(4)));
    LengthCertificate::from_radii(&zeta.flat_length, &outer)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::interval::ratio;

    #[test]
    fn bound_below_shortest_is_empty() {
        let x = SlitSurface::standard();
        let t = x.stage_time(1).unwrap();
        assert!(slit_connections(&x, &t, &ratio(1, 10)).unwrap().is_empty());
    }

    #[test]
    fn first_slit_curve_is_the_slit() {
        let x = SlitSurface::standard();
        let z = slit_curve(&x, 1).unwrap();
        assert_eq!(z.connection.coords, (BigInt::zero(), BigInt::zero()));
        assert!(z.vertical.is_exact() && z.vertical.lo().is_zero());
        assert!((z.length.to_f64() - 0.1240).abs() < 1e-3);
        assert!((z.length_times_a.to_f64() - 1.98).abs() < 0.01);
        assert_eq!(z.connection.sheet_pattern.end_sheet, Some(0));
    }

    #[test]
    fn second_slit_curve_matches_formula() {
        let x = SlitSurface::standard();
        let z = slit_curve(&x, 2).unwrap();
        // holonomy at t = 0 is (b - 2|e_3|, -2 q_3)
        assert_eq!(z.connection.coords, (BigInt::from(-74), BigInt::from(-92)));
        assert!((z.horizontal.to_f64() - 0.0555).abs() < 5e-4);
        assert!((z.vertical.to_f64() - 0.00495).abs() < 5e-5);
        assert!((z.length.to_f64() - 0.0557).abs() < 5e-4);
        assert!((z.length_times_a.to_f64() - 2.0).abs() < 0.02);
    }

    #[test]
    fn slit_curves_follow_the_partial_sum_formula() {
        let x = SlitSurface::standard();
        let cf = x.cf();
        for k in 1..=6u64 {
            let z = slit_curve(&x, k).unwrap();
            let n: BigInt = (0..k - 1).map(|j| cf.q(2 * j + 3).unwrap() * 2).sum();
            assert_eq!(z.connection.coords.1.abs(), n, "k = {k}");
            assert!(z.horizontal.is_positive());
        }
    }

    #[test]
    fn c_family_reweights_horizontal_part() {
        let x = SlitSurface::standard();
        let z0 = slit_curve(&x, 3).unwrap();
        let zp = slit_curve(&x.with_c(ratio(1, 2)).unwrap(), 3).unwrap();
        let zm = slit_curve(&x.with_c(ratio(-1, 2)).unwrap(), 3).unwrap();
        assert_eq!((&zp.horizontal + &zm.horizontal).scale(&ratio(1, 2)), z0.horizontal);
        assert_eq!(zp.vertical, z0.vertical);
    }

    #[test]
    fn certificate_rejects_degenerate_annulus() {
        let r = Interval::exact(ratio(1, 4));
        assert!(matches!(LengthCertificate::from_radii(&r, &r), Err(Error::NoCertificate(_))));
    }

    #[test]
    fn certificate_at_stage_two() {
        let x = SlitSurface::standard();
        let z = slit_curve(&x, 2).unwrap();
        let cert = length_certificate(&z.connection, &x, &x.stage_time(2).unwrap()).unwrap();
        assert!((cert.modulus_lower.to_f64() - 0.239).abs() < 0.005);
        assert!((cert.hyperbolic_upper.to_f64() - 13.1).abs() < 0.3);
        assert!(cert.modulus_lower.is_positive());
    }
}
