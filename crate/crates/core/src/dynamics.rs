//! Rotation by `alpha` on the horizontal circle and its two-sheet extension.
//!
//! Orbits are iterated with a rational rotation `P/Q` (a convergent of
//! `alpha`) on integer positions modulo `D = Q * den(start)`. The convergent
//! is deep enough that, for every step up to the horizon, the approximate and
//! true orbit points sit on the same side of every boundary; each step checks
//! this against precomputed integer thresholds and refuses to guess.

use num_bigint::BigInt;
use num_traits::{One, ToPrimitive, Zero};
use serde::Serialize;

use crate::cfrac::ContinuedFraction;
use crate::error::{Error, Result};
use crate::flatsurf::SlitSurface;
use crate::interval::{rat_int, Interval, Rational};

/// The rational rotation must have `Q >= N_max * 2^SAFETY_BITS`.
pub const SAFETY_BITS: u32 = 20;

/// Deepest convergent tried before giving up.
const MAX_DEPTH: u64 = 200;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SkewState {
    #[serde(serialize_with = "ser_rational")]
    pub position: Rational,
    pub sheet: u8,
}

fn ser_rational<S: serde::Serializer>(x: &Rational, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&crate::interval::rational_string(x))
}

impl SkewState {
    pub fn new(position: Rational, sheet: u8) -> Result<Self> {
        if position < Rational::zero() || position >= Rational::one() {
            return Err(Error::domain("start position must lie in [0, 1)"));
        }
        if sheet > 1 {
            return Err(Error::domain("sheets are 0 and 1"));
        }
        Ok(SkewState { position, sheet })
    }
}

/// `(x, s) -> (x + alpha mod 1, s xor [x in J])` with `J = [0, width)`.
#[derive(Debug, Clone)]
pub struct SkewSystem {
    /// Convergent index of the rotation `P/Q`.
    pub depth: u64,
    pub p: BigInt,
    pub q: BigInt,
    pub horizon: u64,
    /// Enclosure of the flip-interval length.
    pub flip_width: Interval,
    /// `|alpha - P/Q| * horizon + width(flip_width)`, an upper bound.
    pub drift: Rational,
}

pub fn build_skew(surface: &SlitSurface, horizon: u64) -> Result<SkewSystem> {
    let bits = 2 * (64 - horizon.leading_zeros()) + 2 * SAFETY_BITS + 64;
    SkewSystem::new(surface.cf(), surface.slit_width_bits(bits)?, horizon, None)
}

impl SkewSystem {
    /// Uses convergent `depth` when given, else the shallowest admissible one.
    pub fn new(cf: &ContinuedFraction, flip_width: Interval, horizon: u64, depth: Option<u64>) -> Result<Self> {
        if horizon == 0 {
            return Err(Error::domain("orbit horizon must be at least 1"));
        }
        if flip_width.lo() < &Rational::zero() || flip_width.hi() >= &Rational::one() {
            return Err(Error::domain("flip interval length must lie in [0, 1)"));
        }
        let need = BigInt::from(horizon) << SAFETY_BITS as usize;
        let depth = match depth {
            Some(d) => {
                if cf.q(d)? < need {
                    return Err(Error::precision(format!(
                        "q_{d} is below horizon * 2^{SAFETY_BITS}; use a deeper convergent"
                    )));
                }
                d
            }
            None => {
                let mut d = 1;
                while cf.q(d)? < need {
                    d += 1;
                    if d > MAX_DEPTH {
                        return Err(Error::Resource("no convergent deep enough for the horizon".into()));
                    }
                }
                d
            }
        };
        let c = cf.convergent(depth)?;
        let q_next = cf.q(depth + 1)?;
        // |alpha - P/Q| < 1 / (Q q_{K+1})
        let step_err = Rational::new(BigInt::one(), &c.q * &q_next);
        let drift = step_err * rat_int(horizon) + flip_width.width();
        Ok(SkewSystem { depth, p: c.p, q: c.q, horizon, flip_width, drift })
    }

    pub fn rotation(&self) -> Rational {
        Rational::new(self.p.clone(), self.q.clone())
    }
}

/// Running counts recorded at one checkpoint.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Checkpoint {
    pub n: u64,
    /// Orbit points `i < n` on sheet 0 (or inside the observed interval).
    pub hits: u64,
    pub flips: u64,
}

impl Checkpoint {
    pub fn average(&self) -> Rational {
        Rational::new(BigInt::from(self.hits), BigInt::from(self.n))
    }

    pub fn average_f64(&self) -> f64 {
        self.hits as f64 / self.n as f64
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BirkhoffTrace {
    pub start: SkewState,
    pub checkpoints: Vec<Checkpoint>,
    pub end: SkewState,
    pub flips: u64,
}

/// Checkpoint schedule: powers of two and stage times `q_{2k+1}` up to `n`, plus `n`.
pub fn default_checkpoints(cf: &ContinuedFraction, n: u64) -> Result<Vec<u64>> {
    let mut out = Vec::new();
    let mut d = 1u64;
    while d <= n {
        out.push(d);
        d = match d.checked_mul(2) {
            Some(v) => v,
            None => break,
        };
    }
    let mut k = 1;
    loop {
        let q = cf.q(2 * k + 1)?;
        match q.to_u64() {
            Some(v) if v <= n => out.push(v),
            _ => break,
        }
        k += 1;
    }
    out.push(n);
    out.sort_unstable();
    out.dedup();
    Ok(out)
}

/// Integer orbit of `x0 + i P/Q` modulo `D`.
struct Orbit {
    pos: u128,
    step: u128,
    modulus: u128,
    /// Points with `pos < margin` or `pos > modulus - margin` are too close to 0.
    margin: u128,
}

impl Orbit {
    fn new(system: &SkewSystem, x0: &Rational) -> Result<Self> {
        let t = x0.denom().clone();
        let d = &system.q * &t;
        if d.bits() > 126 {
            return Err(Error::Resource("orbit modulus exceeds 126 bits".into()));
        }
        let modulus = d.to_u128().expect("checked size");
        let pos = (x0 * rat_int(d.clone())).to_integer().to_u128().expect("position below modulus");
        let step = ((&system.p * &t) % &d).to_u128().expect("step below modulus");
        let margin = (&system.drift * rat_int(d)).ceil().to_integer().to_u128().unwrap_or(u128::MAX) + 1;
        if margin.saturating_mul(4) >= modulus {
            return Err(Error::precision("orbit modulus too coarse for the certification margin"));
        }
        Ok(Orbit { pos, step, modulus, margin })
    }

    #[inline]
    fn advance(&mut self) {
        self.pos += self.step;
        if self.pos >= self.modulus {
            self.pos -= self.modulus;
        }
    }

    /// Certified test `x in [0, w)` with thresholds `[lo_in, hi_out)` around `w`.
    #[inline]
    fn classify(&self, step: u64, lo_in: u128, hi_out: u128) -> Result<bool> {
        let x = self.pos;
        if step == 0 {
            // the start point is exact
            if x < lo_in {
                return Ok(true);
            }
            if x >= hi_out {
                return Ok(false);
            }
            return Err(Error::BoundaryAmbiguity { step });
        }
        if x < self.margin || x > self.modulus - self.margin {
            return Err(Error::BoundaryAmbiguity { step });
        }
        if x < lo_in {
            Ok(true)
        } else if x >= hi_out {
            Ok(false)
        } else {
            Err(Error::BoundaryAmbiguity { step })
        }
    }

    /// Thresholds for an interval `[0, w)`, `w` enclosed.
    fn thresholds(&self, w: &Interval, exact_start: bool) -> (u128, u128) {
        let d = rat_int(BigInt::from(self.modulus));
        let m = if exact_start { 0 } else { self.margin };
        let lo = (w.lo() * &d).floor().to_integer().to_u128().unwrap_or(0).saturating_sub(m);
        let hi = (w.hi() * &d).ceil().to_integer().to_u128().unwrap_or(u128::MAX).saturating_add(m);
        (lo, hi)
    }

    fn position(&self) -> Rational {
        Rational::new(BigInt::from(self.pos), BigInt::from(self.modulus))
    }
}

fn check_schedule(system: &SkewSystem, n: u64, checkpoints: &[u64]) -> Result<Vec<u64>> {
    if n > system.horizon {
        return Err(Error::domain(format!("N = {n} exceeds the certified horizon {}", system.horizon)));
    }
    let mut cps: Vec<u64> = checkpoints.iter().copied().filter(|&c| c >= 1 && c <= n).collect();
    cps.push(n);
    cps.sort_unstable();
    cps.dedup();
    Ok(cps)
}

/// Sheet-0 occupancy along the orbit of `start`.
pub fn iterate(system: &SkewSystem, start: &SkewState, n: u64, checkpoints: &[u64]) -> Result<BirkhoffTrace> {
    let cps = check_schedule(system, n, checkpoints)?;
    let mut orbit = Orbit::new(system, &start.position)?;
    let empty = system.flip_width.is_exact() && system.flip_width.lo().is_zero();
    let (lo0, hi0) = orbit.thresholds(&system.flip_width, true);
    let (lo, hi) = orbit.thresholds(&system.flip_width, false);
    let mut sheet = start.sheet;
    let mut hits = 0u64;
    let mut flips = 0u64;
    let mut out = Vec::with_capacity(cps.len());
    let mut next = cps.iter().peekable();
    for i in 0..n {
        if sheet == 0 {
            hits += 1;
        }
        let inside = if empty {
            false
        } else if i == 0 {
            orbit.classify(0, lo0, hi0)?
        } else {
            orbit.classify(i, lo, hi)?
        };
        if inside {
            sheet ^= 1;
            flips += 1;
        }
        orbit.advance();
        if next.peek() == Some(&&(i + 1)) {
            next.next();
            out.push(Checkpoint { n: i + 1, hits, flips });
        }
    }
    Ok(BirkhoffTrace {
        start: start.clone(),
        checkpoints: out,
        end: SkewState { position: orbit.position(), sheet },
        flips,
    })
}

/// Plain rotation with the observable `1_[0, 1/2)`.
pub fn control_trace(system: &SkewSystem, start: &Rational, n: u64, checkpoints: &[u64]) -> Result<BirkhoffTrace> {
    let cps = check_schedule(system, n, checkpoints)?;
    let state = SkewState::new(start.clone(), 0)?;
    let mut orbit = Orbit::new(system, start)?;
    let half = Interval::exact(Rational::new(BigInt::one(), BigInt::from(2)));
    let (lo0, hi0) = orbit.thresholds(&half, true);
    let (lo, hi) = orbit.thresholds(&half, false);
    let mut hits = 0u64;
    let mut out = Vec::with_capacity(cps.len());
    let mut next = cps.iter().peekable();
    for i in 0..n {
        let inside = if i == 0 { orbit.classify(0, lo0, hi0)? } else { orbit.classify(i, lo, hi)? };
        if inside {
            hits += 1;
        }
        orbit.advance();
        if next.peek() == Some(&&(i + 1)) {
            next.next();
            out.push(Checkpoint { n: i + 1, hits, flips: 0 });
        }
    }
    Ok(BirkhoffTrace { start: state, checkpoints: out, end: SkewState { position: orbit.position(), sheet: 0 }, flips: 0 })
}

/// Star discrepancy of `{ x0 + i P/Q : i < n }`; exact for the rational
/// rotation, which stands in for `alpha` within the certified horizon.
pub fn rotation_discrepancy(system: &SkewSystem, start: &Rational, n: u64) -> Result<f64> {
    check_schedule(system, n, &[])?;
    let mut orbit = Orbit::new(system, start)?;
    let mut pts = Vec::with_capacity(n as usize);
    for _ in 0..n {
        pts.push(orbit.pos);
        orbit.advance();
    }
    pts.sort_unstable();
    let d = orbit.modulus as f64;
    let nf = n as f64;
    let mut worst = 0.0f64;
    for (i, &p) in pts.iter().enumerate() {
        let x = p as f64 / d;
        worst = worst.max((i as f64 + 1.0) / nf - x).max(x - i as f64 / nf);
    }
    Ok(worst)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OscillationStats {
    pub burn_in: u64,
    pub checkpoints_used: usize,
    pub max: f64,
    pub min: f64,
    pub amplitude: f64,
}

/// Spread of the running averages at checkpoints `n >= burn_in`.
pub fn oscillation_stats(trace: &BirkhoffTrace, burn_in: u64) -> Result<OscillationStats> {
    let used: Vec<&Checkpoint> = trace.checkpoints.iter().filter(|c| c.n >= burn_in).collect();
    if used.len() < 3 {
        return Err(Error::domain(format!(
            "oscillation statistics need 3 checkpoints past the burn-in {burn_in}, found {}",
            used.len()
        )));
    }
    let avgs = used.iter().map(|c| c.average());
    let max = avgs.clone().max().unwrap();
    let min = avgs.min().unwrap();
    let f = |r: &Rational| r.to_f64().unwrap_or(f64::NAN);
    Ok(OscillationStats {
        burn_in,
        checkpoints_used: used.len(),
        max: f(&max),
        min: f(&min),
        amplitude: f(&(&max - &min)),
    })
}

/// Burn-in `q_5` used for oscillation statistics.
pub fn default_burn_in(cf: &ContinuedFraction) -> Result<u64> {
    cf.q(5)?.to_u64().ok_or_else(|| Error::Resource("burn-in does not fit in 64 bits".into()))
}

/// Checkpoints increase and every count fits under its `n`.
pub fn trace_is_consistent(trace: &BirkhoffTrace) -> bool {
    trace.checkpoints.windows(2).all(|w| w[0].n < w[1].n && w[0].hits <= w[1].hits && w[0].flips <= w[1].flips)
        && trace.checkpoints.iter().all(|c| c.hits <= c.n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::interval::ratio;

    fn surface() -> SlitSurface {
        SlitSurface::standard()
    }

    #[test]
    fn horizon_selects_a_deep_convergent() {
        let s = build_skew(&surface(), 1_000_000).unwrap();
        assert!(s.depth >= 9);
        assert!(s.q >= BigInt::from(1_000_000u64) << SAFETY_BITS as usize);
        assert!((s.flip_width.to_f64() - 0.0026954).abs() < 1e-7);
    }

    #[test]
    fn one_step_from_the_origin_flips() {
        let s = build_skew(&surface(), 10).unwrap();
        let t = iterate(&s, &SkewState::new(Rational::zero(), 0).unwrap(), 1, &[]).unwrap();
        assert_eq!(t.end.sheet, 1);
        assert_eq!(t.end.position, s.rotation());
        assert_eq!(t.flips, 1);
    }

    #[test]
    fn empty_flip_interval_never_mixes() {
        let cf = ContinuedFraction::squares();
        let s = SkewSystem::new(&cf, Interval::zero(), 100_000, None).unwrap();
        let t = iterate(&s, &SkewState::new(ratio(1, 3), 0).unwrap(), 100_000, &[10, 1000]).unwrap();
        assert_eq!(t.flips, 0);
        assert!(t.checkpoints.iter().all(|c| c.average() == Rational::one()));
    }

    #[test]
    fn sheet_swap_gives_complementary_counts() {
        let s = build_skew(&surface(), 200_000).unwrap();
        let cps = default_checkpoints(s_cf(), 200_000).unwrap();
        let a = iterate(&s, &SkewState::new(ratio(1, 3), 0).unwrap(), 200_000, &cps).unwrap();
        let b = iterate(&s, &SkewState::new(ratio(1, 3), 1).unwrap(), 200_000, &cps).unwrap();
        for (x, y) in a.checkpoints.iter().zip(&b.checkpoints) {
            assert_eq!(x.hits + y.hits, x.n);
            assert_eq!(x.flips, y.flips);
        }
    }

    fn s_cf() -> &'static ContinuedFraction {
        static CF: std::sync::LazyLock<ContinuedFraction> = std::sync::LazyLock::new(ContinuedFraction::squares);
        &CF
    }

    #[test]
    fn two_precisions_agree() {
        let x = surface();
        let n = 300_000;
        let a = build_skew(&x, n).unwrap();
        let w = x.slit_width_bits(200).unwrap();
        let b = SkewSystem::new(x.cf(), w, n, Some(a.depth + 2)).unwrap();
        let start = SkewState::new(ratio(1, 3), 0).unwrap();
        let cps = default_checkpoints(x.cf(), n).unwrap();
        let ta = iterate(&a, &start, n, &cps).unwrap();
        let tb = iterate(&b, &start, n, &cps).unwrap();
        assert_eq!(ta.checkpoints, tb.checkpoints);
        assert_eq!(ta, iterate(&a, &start, n, &cps).unwrap());
    }

    #[test]
    fn shallow_convergent_is_refused() {
        let cf = ContinuedFraction::squares();
        assert!(matches!(SkewSystem::new(&cf, Interval::zero(), 1_000_000, Some(3)), Err(Error::Precision(_))));
    }

    #[test]
    fn horizon_is_enforced() {
        let s = build_skew(&surface(), 100).unwrap();
        assert!(iterate(&s, &SkewState::new(Rational::zero(), 0).unwrap(), 101, &[]).is_err());
    }

    #[test]
    fn control_rotation_equidistributes() {
        let s = build_skew(&surface(), 1_000_000).unwrap();
        let t = control_trace(&s, &ratio(1, 3), 1_000_000, &[]).unwrap();
        let a = t.checkpoints.last().unwrap().average_f64();
        assert!((a - 0.5).abs() <= 0.01, "{a}");
    }

    #[test]
    fn discrepancy_drops_along_convergent_denominators() {
        let s = build_skew(&surface(), 1_000_000).unwrap();
        let mut prev = f64::INFINITY;
        for m in 3..=6 {
            let n = s_cf().q(m).unwrap().to_u64().unwrap();
            let d = rotation_discrepancy(&s, &ratio(1, 3), n).unwrap();
            assert!(d < prev, "q_{m}: {d} >= {prev}");
            prev = d;
        }
    }

    #[test]
    fn constant_trace_has_zero_amplitude() {
        let trace = BirkhoffTrace {
            start: SkewState::new(Rational::zero(), 0).unwrap(),
            checkpoints: (1..=5).map(|i| Checkpoint { n: i * 10, hits: i * 10, flips: 0 }).collect(),
            end: SkewState::new(Rational::zero(), 0).unwrap(),
            flips: 0,
        };
        let st = oscillation_stats(&trace, 10).unwrap();
        assert_eq!(st.amplitude, 0.0);
        assert!(oscillation_stats(&trace, 40).is_err());
        assert!(trace_is_consistent(&trace));
    }

    #[test]
    fn default_schedule_contains_stage_times() {
        let cps = default_checkpoints(s_cf(), 1_000_000).unwrap();
        for q in [46u64, 18571, 524288, 1_000_000] {
            assert!(cps.contains(&q));
        }
        assert!(!cps.contains(&669297));
    }
}
