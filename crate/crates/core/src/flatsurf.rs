//! Flat geometry of the slit double cover.
//!
//! The torus is the quotient of the plane by the lattice spanned by `(1, 0)` and
//! `(-alpha, 1)`. A point of the lattice is written in integer coordinates
//! `(m, n)`, standing for `m (1, 0) + n (-alpha, 1)`. Holonomies of
//! branch-to-branch connections live in the coset `(m + b_c, n)`, so every
//! combinatorial question reduces to integer data plus the two irrationals
//! `alpha` and `b_c`.

mod arith;
mod connections;
mod gaps;
mod intersect;
mod lattice;

use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use parking_lot::Mutex;

use crate::cfrac::{bits_for, ContinuedFraction};
use crate::error::{Error, Result};
use crate::interval::{rat_int, Interval, Rational};

pub use arith::{
    avoids_small_denominators, count_fractional_hits, floor_sum, is_primitive, max_gap_fraction, CertifiedExpansion,
};
pub use connections::{
    length_certificate, reweight_slit_curve, slit_connections, slit_curve, ConnectionKind, LengthCertificate, SaddleConnection,
    SheetPattern, SlitCurve,
};
pub use gaps::{filling_check, horizontal_gap_max, vertical_gap_max, FillingEvidence, GapReport};
pub use intersect::{count_interior_points, intersection_number};
pub use lattice::{reduce_basis, shear_lattice, systole, ReducedBasis, ShearedLattice, SystoleReport};

/// Bits used for transcendental enclosures of displayed quantities.
pub(crate) const DISPLAY_BITS: u32 = 160;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlanarVector {
    pub x: Interval,
    pub y: Interval,
}

impl PlanarVector {
    pub fn new(x: Interval, y: Interval) -> Self {
        PlanarVector { x, y }
    }

    pub fn exact(x: Rational, y: Rational) -> Self {
        PlanarVector { x: Interval::exact(x), y: Interval::exact(y) }
    }

    pub fn length_squared(&self) -> Interval {
        &self.x.square() + &self.y.square()
    }

    pub fn length(&self, bits: u32) -> Interval {
        self.length_squared().sqrt(bits).expect("squared length is nonnegative")
    }

    /// `(e^t x, e^-t y)`
    pub fn flow(&self, t: &FlowTime) -> PlanarVector {
        let (s, inv) = t.factors();
        PlanarVector { x: &self.x * &s, y: &self.y * &inv }
    }

    pub fn cross(&self, other: &PlanarVector) -> Interval {
        &(&self.x * &other.y) - &(&self.y * &other.x)
    }

    pub fn dot(&self, other: &PlanarVector) -> Interval {
        &(&self.x * &other.x) + &(&self.y * &other.y)
    }
}

/// A Teichmüller time, either `log r` for an exact rational `r > 0` or an enclosure.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FlowTime {
    Log(Rational),
    Time(Interval),
}

impl FlowTime {
    pub fn zero() -> Self {
        FlowTime::Log(Rational::one())
    }

    pub fn log(r: Rational) -> Result<Self> {
        if !r.is_positive() {
            return Err(Error::domain("flow time log(r) needs r > 0"));
        }
        Ok(FlowTime::Log(r))
    }

    pub fn log_int(r: &BigInt) -> Result<Self> {
        FlowTime::log(rat_int(r.clone()))
    }

    /// Enclosures of `e^t` and `e^-t`.
    pub fn factors(&self) -> (Interval, Interval) {
        match self {
            FlowTime::Log(r) => (Interval::exact(r.clone()), Interval::exact(r.recip())),
            FlowTime::Time(t) => (t.exp(DISPLAY_BITS), (-t).exp(DISPLAY_BITS)),
        }
    }

    pub fn value(&self, bits: u32) -> Interval {
        match self {
            FlowTime::Log(r) => Interval::exact(r.clone()).ln(bits).expect("r > 0"),
            FlowTime::Time(t) => t.clone(),
        }
    }

    /// `g_s g_t = g_{s+t}`, exact when both are logarithms.
    pub fn compose(&self, other: &FlowTime) -> FlowTime {
        match (self, other) {
            (FlowTime::Log(a), FlowTime::Log(b)) => FlowTime::Log(a * b),
            _ => FlowTime::Time(&self.value(DISPLAY_BITS) + &other.value(DISPLAY_BITS)),
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, FlowTime::Log(_))
    }
}

/// Two copies of the sheared torus glued crosswise along `[0, b_c] x {0}`.
///
/// `c = 0` is the surface of the construction; other `c` in `(-1, 1)` give the
/// family with slit `b_c = (1 + c) b`.
#[derive(Debug, Clone)]
pub struct SlitSurface {
    cf: ContinuedFraction,
    c: Rational,
    b_cache: Arc<Mutex<Option<Interval>>>,
}

impl SlitSurface {
    pub fn new(cf: ContinuedFraction, c: Rational) -> Result<Self> {
        if c <= -Rational::one() || c >= Rational::one() {
            return Err(Error::domain(format!("slit parameter c = {c} must lie in (-1, 1)")));
        }
        Ok(SlitSurface { cf, c, b_cache: Arc::new(Mutex::new(None)) })
    }

    pub fn standard() -> Self {
        SlitSurface::new(ContinuedFraction::squares(), Rational::zero()).expect("c = 0 is admissible")
    }

    /// Same surface with another `c`, sharing the cached enclosure of `b`.
    pub fn with_c(&self, c: Rational) -> Result<Self> {
        let mut s = SlitSurface::new(self.cf.clone(), c)?;
        s.b_cache = self.b_cache.clone();
        Ok(s)
    }

    pub fn cf(&self) -> &ContinuedFraction {
        &self.cf
    }

    pub fn c(&self) -> &Rational {
        &self.c
    }

    pub fn weight(&self) -> Rational {
        Rational::one() + &self.c
    }

    /// Enclosure of `b` of width at most `2^-bits`.
    pub fn b_bits(&self, bits: u32) -> Result<Interval> {
        let tol = Rational::new(BigInt::one(), BigInt::one() << bits as usize);
        {
            let cached = self.b_cache.lock();
            if let Some(b) = cached.as_ref() {
                if b.width() <= tol {
                    return Ok(b.clone());
                }
            }
        }
        // overshoot so that nearby requests hit the cache
        let finer = Rational::new(BigInt::one(), BigInt::one() << (bits + 32) as usize);
        let b = self.cf.compute_b(&finer)?.enclosure;
        *self.b_cache.lock() = Some(b.clone());
        Ok(b)
    }

    pub fn b(&self, tolerance: &Rational) -> Result<Interval> {
        self.b_bits(bits_for(tolerance))
    }

    /// `b_c = (1 + c) b`
    pub fn slit_width_bits(&self, bits: u32) -> Result<Interval> {
        Ok(self.b_bits(bits + 2)?.scale(&self.weight()))
    }

    pub fn slit_holonomy(&self, bits: u32) -> Result<PlanarVector> {
        Ok(PlanarVector::new(self.slit_width_bits(bits)?, Interval::zero()))
    }

    pub fn alpha_bits(&self, bits: u32) -> Result<Interval> {
        self.cf.alpha_within(&Rational::new(BigInt::one(), BigInt::one() << bits as usize))
    }

    /// `t_k = log q_{2k+1}`
    pub fn stage_time(&self, k: u64) -> Result<FlowTime> {
        if k == 0 {
            return Err(Error::domain("stages start at k = 1"));
        }
        FlowTime::log_int(&self.cf.q(2 * k + 1)?)
    }

    /// Stretch factor `q_{2k+1}` of stage `k`.
    pub(crate) fn stage_stretch(&self, k: u64) -> Result<BigInt> {
        self.cf.q(2 * k + 1)
    }

    /// Working precision for vectors with integer coordinates up to `coord`
    /// seen at stretch `stretch`.
    pub(crate) fn working_bits(stretch: &BigInt, coord: &BigInt, extra: u32) -> u32 {
        (stretch.bits() + coord.bits()) as u32 + 96 + extra
    }

    /// Lattice-coordinate vector `(u, n)` at stretch factor `s`:
    /// `(s (u - n alpha), n / s)`.
    pub(crate) fn embed(u: &Interval, n: &BigInt, alpha: &Interval, s: &Interval, s_inv: &Interval) -> PlanarVector {
        let x = &(u - &alpha.scale(&rat_int(n.clone()))) * s;
        let y = s_inv.scale(&rat_int(n.clone()));
        PlanarVector { x, y }
    }
}
