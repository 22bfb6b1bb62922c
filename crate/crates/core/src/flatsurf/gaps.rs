use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use super::arith::max_gap_fraction;
use super::connections::slit_curve;
use super::lattice::{lattice_at, systole};
use super::{SlitSurface, DISPLAY_BITS};
use crate::error::{Error, Result};
use crate::interval::{rat_int, Interval, Rational};

/// Strand counts beyond `2^MAX_STRAND_BITS` are refused.
pub const MAX_STRAND_BITS: u64 = 4096;

/// Largest gap between consecutive crossings of a curve with a closed geodesic.
#[derive(Debug, Clone)]
pub struct GapReport {
    pub observe_k: u64,
    pub curve_j: u64,
    /// Crossing points on the circle.
    pub strands: BigInt,
    /// Gap as a fraction of the circle.
    pub fraction: Interval,
    pub circle_length: Interval,
    pub gap: Interval,
}

fn check_strands(n: &BigInt) -> Result<()> {
    if n.bits() > MAX_STRAND_BITS {
        return Err(Error::Resource(format!("{} crossing strands exceed the configured limit", n)));
    }
    Ok(())
}

/// At `t_k`, the largest gap between the crossings of `zeta_j` (`j > k`) with
/// the horizontal closed geodesic through the branch point.
pub fn horizontal_gap_max(surface: &SlitSurface, observe_k: u64, curve_j: u64) -> Result<GapReport> {
    if curve_j <= observe_k {
        return Err(Error::domain(format!(
            "horizontal gaps need a later curve: curve {curve_j} is not after stage {observe_k}"
        )));
    }
    let base = surface.with_c(Rational::zero())?;
    let zeta = slit_curve(&base, curve_j)?;
    let (m, n) = zeta.connection.coords.clone();
    let strands = n.abs() + 1u32;
    check_strands(&strands)?;
    let w = base.slit_width_bits(2 * strands.bits() as u32 + 128)?;
    // the segment meets row y at abscissa y (m + w) / |n| mod 1, y = 0..|n|
    let beta = (&w + &Interval::from_int(m)).scale(&Rational::new(BigInt::one(), n.abs()));
    let fraction = max_gap_fraction(&beta, &strands)?;
    let circle_length = Interval::from_int(base.stage_stretch(observe_k)?);
    Ok(GapReport { observe_k, curve_j, gap: &fraction * &circle_length, strands, fraction, circle_length })
}

/// At `t_k`, the largest gap between the crossings of `zeta_j` (`j < k`) with
/// the near-vertical closed geodesic of direction `(p_{2k+1}, q_{2k+1})`.
pub fn vertical_gap_max(surface: &SlitSurface, observe_k: u64, curve_j: u64) -> Result<GapReport> {
    if curve_j >= observe_k {
        return Err(Error::domain(format!(
            "vertical gaps need an earlier curve: curve {curve_j} is not before stage {observe_k}"
        )));
    }
    let base = surface.with_c(Rational::zero())?;
    let cf = base.cf();
    let zeta = slit_curve(&base, curve_j)?;
    let (m, n) = zeta.connection.coords.clone();
    let cv = cf.convergent(2 * observe_k + 1)?;
    let co = cf.convergent(2 * observe_k)?;
    let det = &cv.p * &co.q - &co.p * &cv.q;
    debug_assert!(det.abs().is_one());
    let bits = 3 * cv.q.bits() as u32 + 2 * n.bits() as u32 + 128;
    let w = base.slit_width_bits(bits)?;
    let u = &w + &Interval::from_int(m);
    let d = rat_int(det);
    // (u, n) = c1 (p_v, q_v) + c2 (p_o, q_o)
    let c1 = (&u.scale(&rat_int(co.q.clone())) - &Interval::from_int(&n * &co.p)).scale(&d.recip());
    let c2 = (&Interval::from_int(&cv.p * &n) - &u.scale(&rat_int(cv.q.clone()))).scale(&d.recip());
    let strands = c2.abs().floor_or_err("transverse crossing count")? + 1u32;
    check_strands(&strands)?;
    let beta = c1.div(&c2)?;
    let fraction = if strands.is_one() { Interval::one() } else { max_gap_fraction(&beta, &strands)? };
    let t = base.stage_time(observe_k)?;
    let lattice = lattice_at(&base, &t, 0)?;
    let circle_length = lattice.vector(&cv.p, &cv.q).length(DISPLAY_BITS);
    Ok(GapReport { observe_k, curve_j, gap: &fraction * &circle_length, strands, fraction, circle_length })
}

/// Outcome of the grid criterion for a pair of slit curves.
#[derive(Debug, Clone)]
pub struct FillingEvidence {
    pub j: u64,
    pub k: u64,
    pub mid: Option<u64>,
    pub horizontal: Option<GapReport>,
    pub vertical: Option<GapReport>,
    pub systole: Option<Interval>,
    pub fills: bool,
    pub note: String,
}

impl FillingEvidence {
    fn rejected(j: u64, k: u64, note: &str) -> Self {
        FillingEvidence {
            j,
            k,
            mid: None,
            horizontal: None,
            vertical: None,
            systole: None,
            fills: false,
            note: note.to_string(),
        }
    }
}

/// At the middle stage, the later curve cuts every horizontal segment and the
/// earlier curve every vertical one finely enough that together they leave
/// only small rectangles.
pub fn filling_check(surface: &SlitSurface, j: u64, k: u64) -> Result<FillingEvidence> {
    if j == k {
        return Ok(FillingEvidence::rejected(j, k, "same curve, self-gaps unbounded in one direction"));
    }
    if j > k {
        return Ok(FillingEvidence::rejected(j, k, "curves given out of order"));
    }
    let mid = (j + k) / 2;
    if mid <= j || j == 0 {
        return Ok(FillingEvidence::rejected(j, k, "no stage strictly between the curves"));
    }
    let horizontal = horizontal_gap_max(surface, mid, k)?;
    let vertical = vertical_gap_max(surface, mid, j)?;
    let sys = systole(surface, &surface.stage_time(mid)?)?.lattice_systole;
    let total = &horizontal.gap + &vertical.gap;
    let half = sys.scale(&Rational::new(BigInt::one(), BigInt::from(2)));
    let fills = total.certainly_lt(&half);
    let note = if fills { "gaps below half the systole" } else { "gaps not certified below half the systole" };
    Ok(FillingEvidence {
        j,
        k,
        mid: Some(mid),
        horizontal: Some(horizontal),
        vertical: Some(vertical),
        systole: Some(sys),
        fills,
        note: note.to_string(),
    })
}
