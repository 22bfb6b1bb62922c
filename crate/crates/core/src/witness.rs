//! Stage pipeline: per-stage records and the checks run over them.
//!
//! Records store every interval as outward-rounded decimal strings, so a
//! record read back from the cache serializes to the same bytes as a freshly
//! computed one, and checks never need to touch the geometry again.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use num_bigint::BigInt;
use num_traits::{FromPrimitive, Zero};
use parking_lot::Mutex;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::cfrac::ContinuedFraction;
use crate::constants::*;
use crate::dynamics::{
    build_skew, control_trace, default_burn_in, default_checkpoints, iterate, oscillation_stats, BirkhoffTrace,
    OscillationStats, SkewState,
};
use crate::error::{Error, Result};
use crate::flatsurf::{
    filling_check, horizontal_gap_max, intersection_number, reweight_slit_curve, slit_curve, systole, LengthCertificate,
    SlitCurve, SlitSurface, SystoleReport,
};
use crate::interval::{parse_decimal, rat_int, rational_string, Interval, Rational};

/// Significant digits kept in serialized intervals.
pub const RECORD_DIGITS: usize = 30;
const BITS: u32 = 160;

/// Outward-rounded decimal enclosure.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Bounds {
    pub lo: String,
    pub hi: String,
}

impl Bounds {
    pub fn interval(&self) -> Interval {
        Interval::from_decimal_strs(&self.lo, &self.hi).expect("records hold well-formed decimals")
    }

    pub fn to_f64(&self) -> f64 {
        self.interval().to_f64()
    }
}

impl From<&Interval> for Bounds {
    fn from(x: &Interval) -> Self {
        let (lo, hi) = x.decimal_bounds(RECORD_DIGITS);
        Bounds { lo, hi }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GapRecord {
    /// `t_{k+1} - t_k`
    pub value: Bounds,
    /// `log(a_{2k+3} a_{2k+2})`
    pub log_partial_quotients: Bounds,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SystoleRecord {
    pub plus: Bounds,
    pub minus: Bounds,
    pub branch_loop: Bounds,
    pub shortest_vector: (String, String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ZetaRecord {
    pub m: String,
    pub n: String,
    pub h: Bounds,
    pub v: Bounds,
    pub length: Bounds,
    /// `a_{2k+2}`
    pub a: String,
    pub length_times_a: Bounds,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CertificateRecord {
    pub outer_radius: Bounds,
    pub modulus_lower: Option<Bounds>,
    pub extremal_upper: Option<Bounds>,
    pub hyperbolic_upper: Option<Bounds>,
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HorizontalGapRecord {
    pub curve: u64,
    pub strands: String,
    pub fraction: Bounds,
    pub circle_length: Bounds,
    pub gap: Bounds,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FillingRecord {
    pub j: u64,
    pub k: u64,
    pub fills: bool,
    pub horizontal_gap: Option<Bounds>,
    pub vertical_gap: Option<Bounds>,
    pub systole: Option<Bounds>,
    pub note: String,
}

/// The flat geometry at stage `k`: stage time, systoles and the slit curve.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GeometryRecord {
    pub k: u64,
    pub n_k: u64,
    pub q: String,
    pub t: Bounds,
    pub gap: GapRecord,
    pub systole: SystoleRecord,
    pub zeta: ZetaRecord,
    pub certificate: CertificateRecord,
}

impl GeometryRecord {
    pub fn q_int(&self) -> BigInt {
        self.q.parse().expect("records hold integers")
    }
}

/// Everything computed at stage `k`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageRecord {
    #[serde(flatten)]
    pub geometry: GeometryRecord,
    pub horizontal_gap: HorizontalGapRecord,
    pub filling: Option<FillingRecord>,
    pub i_minus3: Option<String>,
    pub i_plus3: Option<String>,
}

impl std::ops::Deref for StageRecord {
    type Target = GeometryRecord;

    fn deref(&self) -> &GeometryRecord {
        &self.geometry
    }
}

impl AsRef<GeometryRecord> for StageRecord {
    fn as_ref(&self) -> &GeometryRecord {
        &self.geometry
    }
}

impl AsRef<GeometryRecord> for GeometryRecord {
    fn as_ref(&self) -> &GeometryRecord {
        self
    }
}

/// Inputs that determine a stage record.
#[derive(Debug, Clone)]
pub struct StageConfig {
    pub surface: SlitSurface,
    /// Largest stage that may be requested.
    pub k_limit: u64,
    pub cache_dir: Option<PathBuf>,
}

impl StageConfig {
    pub fn new(surface: SlitSurface) -> Self {
        StageConfig { surface, k_limit: MAX_K_LIMIT, cache_dir: None }
    }

    pub fn with_cache(mut self, dir: impl Into<PathBuf>) -> Self {
        self.cache_dir = Some(dir.into());
        self
    }

    /// Hex SHA-256 of everything a record depends on.
    pub fn hash(&self) -> String {
        let key = format!(
            "slitflow {}|constants {}|sequence {}|c {}|digits {}",
            env!("CARGO_PKG_VERSION"),
            CONSTANTS_VERSION,
            self.surface.cf().sequence().id(),
            rational_string(self.surface.c()),
            RECORD_DIGITS
        );
        hex(&Sha256::digest(key.as_bytes()))
    }
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

/// Content-addressed store of stage records. Reads are concurrent, writes serialized.
struct StageCache {
    dir: PathBuf,
    hash: String,
    write_lock: Mutex<()>,
}

impl StageCache {
    fn path(&self, k: u64) -> PathBuf {
        self.dir.join(format!("stage-{k:03}-{}.json", &self.hash[..16]))
    }

    fn load(&self, k: u64) -> Option<StageRecord> {
        let text = fs::read_to_string(self.path(k)).ok()?;
        serde_json::from_str::<StageRecord>(&text).ok().filter(|r| r.k == k)
    }

    fn store(&self, rec: &StageRecord) -> Result<()> {
        let _guard = self.write_lock.lock();
        fs::create_dir_all(&self.dir)?;
        let path = self.path(rec.k);
        let tmp = path.with_extension("tmp");
        fs::write(&tmp, serde_json::to_string_pretty(rec)?)?;
        fs::rename(&tmp, &path)?;
        Ok(())
    }
}

fn annotate(e: Error, k: u64) -> Error {
    match e {
        Error::Stage { .. } => e,
        other => other.at_stage(k as u32),
    }
}

/// Computes (or reads from the cache) the records for `k_min..=k_max`.
fn check_range(k_min: u64, k_max: u64, k_limit: u64) -> Result<()> {
    if k_min == 0 || k_min > k_max {
        return Err(Error::domain(format!("stage range {k_min}..{k_max} is empty or starts below 1")));
    }
    if k_max > k_limit {
        return Err(Error::Resource(format!("stage {k_max} exceeds the configured limit {k_limit}")));
    }
    Ok(())
}

/// Geometry records only, uncached; enough for the gap, thickness and slit
/// decay checks.
pub fn run_geometry(k_min: u64, k_max: u64, config: &StageConfig) -> Result<Vec<GeometryRecord>> {
    check_range(k_min, k_max, config.k_limit)?;
    (k_min..=k_max)
        .into_par_iter()
        .map(|k| compute_geometry(&config.surface, k).map_err(|e| annotate(e, k)))
        .collect()
}

/// Geometry records of `X_c` for each weight in `cs`, in that order. The
/// lattice and the slit connections do not depend on `c`, so they are found
/// once per stage and reweighted.
pub fn run_geometry_family(k_min: u64, k_max: u64, config: &StageConfig, cs: &[Rational]) -> Result<Vec<Vec<GeometryRecord>>> {
    check_range(k_min, k_max, config.k_limit)?;
    let surfaces: Vec<SlitSurface> = cs.iter().map(|c| config.surface.with_c(c.clone())).collect::<Result<_>>()?;
    let base = config.surface.with_c(Rational::zero())?;
    let by_stage: Vec<Vec<GeometryRecord>> = (k_min..=k_max)
        .into_par_iter()
        .map(|k| {
            let stage = || {
                let sys = systole(&base, &base.stage_time(k)?)?;
                let zeta = slit_curve(&base, k)?;
                let clock = StageClock::new(&base, k)?;
                surfaces
                    .iter()
                    .map(|x| geometry_record(x, &clock, &sys, &reweight_slit_curve(&zeta, x)?))
                    .collect::<Result<Vec<_>>>()
            };
            stage().map_err(|e| annotate(e, k))
        })
        .collect::<Result<_>>()?;
    let mut out = vec![Vec::with_capacity(by_stage.len()); cs.len()];
    for stage in by_stage {
        for (i, rec) in stage.into_iter().enumerate() {
            out[i].push(rec);
        }
    }
    Ok(out)
}

pub fn run_stages(k_min: u64, k_max: u64, config: &StageConfig) -> Result<Vec<StageRecord>> {
    check_range(k_min, k_max, config.k_limit)?;
    let cache = config.cache_dir.as_ref().map(|dir| StageCache {
        dir: dir.clone(),
        hash: config.hash(),
        write_lock: Mutex::new(()),
    });
    (k_min..=k_max)
        .into_par_iter()
        .map(|k| {
            if let Some(rec) = cache.as_ref().and_then(|c| c.load(k)) {
                return Ok(rec);
            }
            let rec = compute_stage(&config.surface, k).map_err(|e| annotate(e, k))?;
            if let Some(c) = &cache {
                c.store(&rec)?;
            }
            Ok(rec)
        })
        .collect()
}

/// Records as a JSON array, fields in declaration order.
pub fn records_json(records: &[StageRecord]) -> Result<String> {
    Ok(serde_json::to_string(records)?)
}

/// The geometric part of [`compute_stage`], without the filling data.
pub fn compute_geometry(surface: &SlitSurface, k: u64) -> Result<GeometryRecord> {
    let sys = systole(surface, &surface.stage_time(k)?)?;
    let zeta = slit_curve(surface, k)?;
    geometry_record(surface, &StageClock::new(surface, k)?, &sys, &zeta)
}

/// The parts of a geometry record that depend only on the continued fraction.
struct StageClock {
    k: u64,
    q: BigInt,
    t: Interval,
    gap: Interval,
    log_a: Interval,
}

impl StageClock {
    fn new(surface: &SlitSurface, k: u64) -> Result<Self> {
        let cf = surface.cf();
        let q = cf.q(2 * k + 1)?;
        let t = surface.stage_time(k)?.value(BITS);
        let gap = Interval::exact(Rational::new(cf.q(2 * k + 3)?, q.clone())).ln(BITS)?;
        let log_a = Interval::from_int(cf.coefficient(2 * k + 3)? * cf.coefficient(2 * k + 2)?).ln(BITS)?;
        Ok(StageClock { k, q, t, gap, log_a })
    }
}

fn geometry_record(surface: &SlitSurface, clock: &StageClock, sys: &SystoleReport, zeta: &SlitCurve) -> Result<GeometryRecord> {
    let cf = surface.cf();
    let StageClock { k, q, t, gap, log_a } = clock;
    let k = *k;

    let outer = sys.lattice_systole.scale(&Rational::new(1.into(), 4.into()));
    let certificate = match LengthCertificate::from_radii(&zeta.length, &outer) {
        Ok(c) => CertificateRecord {
            outer_radius: (&outer).into(),
            modulus_lower: Some((&c.modulus_lower).into()),
            extremal_upper: Some((&c.extremal_upper).into()),
            hyperbolic_upper: Some((&c.hyperbolic_upper).into()),
            note: None,
        },
        Err(Error::NoCertificate(msg)) => CertificateRecord {
            outer_radius: (&outer).into(),
            modulus_lower: None,
            extremal_upper: None,
            hyperbolic_upper: None,
            note: Some(msg),
        },
        Err(e) => return Err(e),
    };

    let (m, n) = &zeta.connection.coords;
    Ok(GeometryRecord {
        k,
        n_k: 2 * k + 1,
        q: q.to_string(),
        t: t.into(),
        gap: GapRecord { value: gap.into(), log_partial_quotients: log_a.into() },
        systole: SystoleRecord {
            plus: (&sys.plus).into(),
            minus: (&sys.minus).into(),
            branch_loop: (&sys.branch_loop).into(),
            shortest_vector: (sys.shortest_vector.0.to_string(), sys.shortest_vector.1.to_string()),
        },
        zeta: ZetaRecord {
            m: m.to_string(),
            n: n.to_string(),
            h: (&zeta.horizontal).into(),
            v: (&zeta.vertical).into(),
            length: (&zeta.length).into(),
            a: cf.coefficient(2 * k + 2)?.to_string(),
            length_times_a: (&zeta.length_times_a).into(),
        },
        certificate,
    })
}

pub fn compute_stage(surface: &SlitSurface, k: u64) -> Result<StageRecord> {
    let geometry = compute_geometry(surface, k)?;
    let hg = horizontal_gap_max(surface, k, k + 3)?;
    let filling = if k > 3 {
        let ev = filling_check(surface, k - 3, k + 3)?;
        Some(FillingRecord {
            j: ev.j,
            k: ev.k,
            fills: ev.fills,
            horizontal_gap: ev.horizontal.as_ref().map(|g| (&g.gap).into()),
            vertical_gap: ev.vertical.as_ref().map(|g| (&g.gap).into()),
            systole: ev.systole.as_ref().map(Bounds::from),
            note: ev.note,
        })
    } else {
        None
    };
    let i_minus3 = if k > 3 { Some(intersection_number(surface, k - 3, k)?.to_string()) } else { None };
    let i_plus3 = Some(intersection_number(surface, k, k + 3)?.to_string());

    Ok(StageRecord {
        geometry,
        horizontal_gap: HorizontalGapRecord {
            curve: hg.curve_j,
            strands: hg.strands.to_string(),
            fraction: (&hg.fraction).into(),
            circle_length: (&hg.circle_length).into(),
            gap: (&hg.gap).into(),
        },
        filling,
        i_minus3,
        i_plus3,
    })
}

/// Bounds that checks compare against; defaults are the frozen constants.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Thresholds {
    pub gap_growth_tolerance: f64,
    pub gap_growth_from_k: u64,
    pub gap_c_bound: f64,
    pub epsilon_floor: f64,
    pub epsilon_stability: f64,
    pub len_times_a_window: (f64, f64),
    pub hyperbolic_from_k: u64,
    pub gap_k4_bound: f64,
    pub ratio_k4_bound: f64,
    pub birkhoff_amplitude: f64,
    pub birkhoff_ratio: f64,
    pub birkhoff_tolerance: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds {
            gap_growth_tolerance: GAP_GROWTH_TOLERANCE,
            gap_growth_from_k: GAP_GROWTH_FROM_K,
            gap_c_bound: GAP_GROWTH_C_BOUND,
            epsilon_floor: EPSILON_FLOOR,
            epsilon_stability: EPSILON_STABILITY,
            len_times_a_window: LEN_TIMES_A_WINDOW,
            hyperbolic_from_k: HYPERBOLIC_DECREASING_FROM_K,
            gap_k4_bound: GAP_K4_BOUND,
            ratio_k4_bound: RATIO_K4_BOUND,
            birkhoff_amplitude: BIRKHOFF_AMPLITUDE,
            birkhoff_ratio: BIRKHOFF_RATIO,
            birkhoff_tolerance: BIRKHOFF_TOLERANCE,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Verdict {
    pub name: String,
    pub passed: bool,
    /// Preconditions not met; not counted as a failure.
    pub skipped: bool,
    pub failures: Vec<String>,
    pub metrics: BTreeMap<String, Value>,
}

impl Verdict {
    fn new(name: &str) -> Self {
        Verdict { name: name.to_string(), passed: true, skipped: false, failures: Vec::new(), metrics: BTreeMap::new() }
    }

    fn fail(&mut self, msg: impl Into<String>) {
        self.passed = false;
        self.failures.push(msg.into());
    }

    fn skip(mut self, why: &str) -> Self {
        self.skipped = true;
        self.metrics.insert("skipped".into(), json!(why));
        self
    }

    fn metric(&mut self, key: &str, v: Value) {
        self.metrics.insert(key.to_string(), v);
    }

    pub fn counts_as_failure(&self) -> bool {
        !self.passed && !self.skipped
    }
}

fn rat(x: f64) -> Rational {
    Rational::from_f64(x).expect("finite threshold")
}

fn f(x: &Rational) -> f64 {
    num_traits::ToPrimitive::to_f64(x).unwrap_or(f64::NAN)
}

/// Gap growth between consecutive stage times and its fitted constant.
pub fn check_gap_growth<R: AsRef<GeometryRecord>>(records: &[R], offset: u64, th: &Thresholds) -> Verdict {
    let records: Vec<&GeometryRecord> = records.iter().map(AsRef::as_ref).collect();
    let mut v = Verdict::new("gap_growth");
    v.metric("offset", json!(offset));
    if records.len() < offset as usize + 1 {
        return v.skip("fewer than offset + 1 records");
    }
    let tol = rat(th.gap_growth_tolerance);
    let mut worst = Rational::zero();
    for &r in &records {
        let t = r.t.interval();
        if t.lo() <= &rat_int(r.k) {
            v.fail(format!("t_{} not above {}", r.k, r.k));
        }
        if r.k >= th.gap_growth_from_k {
            let d = (&r.gap.value.interval() - &r.gap.log_partial_quotients.interval()).abs();
            if d.hi() > &tol {
                v.fail(format!("stage {}: gap differs from log(a a') by up to {:.3e}", r.k, f(d.hi())));
            }
            worst = worst.max(d.hi().clone());
        }
    }
    v.metric("max_deviation", json!(f(&worst)));
    // C with gap_D(k) <= C log t_k
    let mut fitted = Rational::zero();
    if offset > 0 {
        for &r in &records {
            let gap = if offset == 1 {
                Some(r.gap.value.interval())
            } else {
                records.iter().find(|s| s.k == r.k + offset).map(|s| &s.t.interval() - &r.t.interval())
            };
            let Some(gap) = gap else { continue };
            let log_t = match r.t.interval().ln(BITS) {
                Ok(l) if l.is_positive() => l,
                _ => continue,
            };
            fitted = fitted.max(gap.hi() / log_t.lo());
        }
    }
    v.metric("fitted_c", json!(f(&fitted)));
    if offset == 1 {
        v.metric("c_bound", json!(th.gap_c_bound));
        if fitted > rat(th.gap_c_bound) {
            v.fail(format!("fitted C = {:.4} exceeds the frozen bound {}", f(&fitted), th.gap_c_bound));
        }
    }
    v
}

/// Uniform thickness of the two torus pieces along the stage times.
pub fn check_thickness<R: AsRef<GeometryRecord>>(records: &[R], th: &Thresholds) -> Verdict {
    let records: Vec<&GeometryRecord> = records.iter().map(AsRef::as_ref).collect();
    let mut v = Verdict::new("thickness");
    if records.is_empty() {
        return v.skip("no records");
    }
    let piece = |r: &GeometryRecord| r.systole.plus.interval().min(&r.systole.minus.interval());
    for &r in &records {
        if r.systole.plus != r.systole.minus {
            v.fail(format!("stage {}: the two pieces have different systoles", r.k));
        }
    }
    let lows: Vec<Rational> = records.iter().map(|r| piece(r).lo().clone()).collect();
    let eps = lows.iter().min().unwrap().clone();
    let loops = records.iter().map(|r| r.systole.branch_loop.interval().lo().clone()).min().unwrap();
    v.metric("epsilon", json!(f(&eps)));
    v.metric("branch_loop_min", json!(f(&loops)));
    v.metric("epsilon_floor", json!(th.epsilon_floor));
    if eps <= Rational::zero() {
        v.fail("a systole is not certified positive");
    }
    if eps <= rat(th.epsilon_floor) {
        v.fail(format!("epsilon {:.4} not above the floor {}", f(&eps), th.epsilon_floor));
    }
    if records.len() >= 2 {
        let half = records.len() / 2;
        let first = lows[..records.len() - half].iter().min().unwrap().clone();
        let last = lows[records.len() - half..].iter().min().unwrap().clone();
        let keep = rat(1.0 - th.epsilon_stability);
        let near = rat(1.0 + th.epsilon_stability);
        v.metric("first_half_min", json!(f(&first)));
        v.metric("last_half_min", json!(f(&last)));
        if eps < &keep * &first || last > &near * &eps {
            v.fail("running minimum still drops in the last half of the range");
        }
    } else {
        v.metric("stabilization", json!("skipped for a single record"));
    }
    v
}

/// Slit curves shrink, at the predicted rate, with shrinking hyperbolic bounds.
pub fn check_slit_decay<R: AsRef<GeometryRecord>>(records: &[R], th: &Thresholds) -> Verdict {
    let records: Vec<&GeometryRecord> = records.iter().map(AsRef::as_ref).collect();
    let mut v = Verdict::new("slit_decay");
    if records.len() < 2 {
        return v.skip("fewer than 2 records");
    }
    for w in records.windows(2) {
        if !w[1].zeta.length.interval().certainly_lt(&w[0].zeta.length.interval()) {
            v.fail(format!("|zeta_{}| not certified below |zeta_{}|", w[1].k, w[0].k));
        }
    }
    let (c1, c2) = th.len_times_a_window;
    v.metric("window", json!([c1, c2]));
    let prods: Vec<Interval> = records.iter().map(|r| r.zeta.length_times_a.interval()).collect();
    let lo = prods.iter().map(|p| p.lo().clone()).min().unwrap();
    let hi = prods.iter().map(|p| p.hi().clone()).max().unwrap();
    v.metric("len_times_a_min", json!(f(&lo)));
    v.metric("len_times_a_max", json!(f(&hi)));
    for (r, p) in records.iter().zip(&prods) {
        if p.lo() < &rat(c1) || p.hi() > &rat(c2) {
            v.fail(format!("stage {}: |zeta| a = {:.4} outside the window", r.k, p.to_f64()));
        }
    }
    if records.len() >= 3 {
        let later: Vec<&GeometryRecord> = records.iter().copied().filter(|r| r.k >= th.hyperbolic_from_k).collect();
        let hyps: Vec<Option<Interval>> =
            later.iter().map(|r| r.certificate.hyperbolic_upper.as_ref().map(Bounds::interval)).collect();
        for (r, h) in later.iter().zip(&hyps) {
            if h.is_none() {
                v.fail(format!("stage {}: no hyperbolic length certificate", r.k));
            }
        }
        for (i, w) in hyps.windows(2).enumerate() {
            if let (Some(a), Some(b)) = (&w[0], &w[1]) {
                if !b.certainly_lt(a) {
                    v.fail(format!("hyperbolic bound does not decrease at stage {}", later[i + 1].k));
                }
            }
        }
        v.metric("hyperbolic_from_k", json!(th.hyperbolic_from_k));
    } else {
        v.metric("hyperbolic", json!("skipped for fewer than 3 records"));
    }
    v
}

/// Curves three stages apart fill, with gaps shrinking like `k^-4`.
pub fn check_filling(records: &[StageRecord], th: &Thresholds) -> Verdict {
    let mut v = Verdict::new("filling");
    let admissible: Vec<&StageRecord> = records.iter().filter(|r| r.filling.is_some()).collect();
    if admissible.is_empty() {
        return v.skip("no stage k >= 4 in range");
    }
    for r in &admissible {
        let fr = r.filling.as_ref().unwrap();
        if !fr.fills {
            v.fail(format!("curves {} and {} not certified to fill: {}", fr.j, fr.k, fr.note));
        }
    }
    let mut worst = Rational::zero();
    for r in records {
        let g = r.horizontal_gap.gap.interval();
        worst = worst.max(g.hi() * rat_int(BigInt::from(r.k).pow(4)));
    }
    v.metric("checked_stages", json!(admissible.iter().map(|r| r.k).collect::<Vec<_>>()));
    v.metric("gap_k4_max", json!(f(&worst)));
    v.metric("gap_k4_bound", json!(th.gap_k4_bound));
    if worst > rat(th.gap_k4_bound) {
        v.fail(format!("gap k^4 reaches {:.4e}, above the frozen bound", f(&worst)));
    }
    v
}

/// Growth assumptions on the partial quotients.
pub fn check_assumptions(cf: &ContinuedFraction, max_k: u64, th: &Thresholds) -> Result<Verdict> {
    let rep = cf.check_assumptions(max_k)?;
    let mut v = Verdict::new("assumptions");
    if !rep.summable_increasing {
        v.fail("partial sums of 1/a_{2k+2} not increasing");
    }
    if let (Some(limit), Some((_, last))) = (&rep.summable_limit, rep.summable_partials.last()) {
        if !last.certainly_le(limit) {
            v.fail("partial sum exceeds the closed-form limit");
        }
        v.metric("summable_limit", json!(limit.to_f64()));
    }
    if let Some((_, last)) = rep.summable_partials.last() {
        v.metric("summable_partial", json!(last.to_f64()));
    }
    if !rep.divergent_increasing {
        v.fail("a_{2k+1} not increasing");
    }
    if max_k > 3 && !rep.ratio_decreasing_from_3 {
        v.fail("r_k not decreasing from k = 3");
    }
    v.metric("ratio_k4_max", json!(f(&rep.ratio_scaled_max)));
    v.metric("ratio_k4_bound", json!(th.ratio_k4_bound));
    if rep.ratio_scaled_max > rat(th.ratio_k4_bound) {
        v.fail("r_k k^4 exceeds the frozen bound");
    }
    Ok(v)
}

#[derive(Debug, Clone, Serialize)]
pub struct DiagnosticRow {
    pub j: u64,
    pub k: u64,
    pub intersection: String,
    /// `2 + 2 log2 i`
    pub distance_upper: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct CurveGraphDiagnostics {
    pub label: String,
    pub rows: Vec<DiagnosticRow>,
}

/// Upper bounds on curve-graph distances from intersection numbers.
pub fn curve_graph_diagnostics(records: &[StageRecord], disclaimer: &str) -> CurveGraphDiagnostics {
    let rows = records
        .iter()
        .filter_map(|r| {
            let i: BigInt = r.i_plus3.as_ref()?.parse().ok()?;
            if i.is_zero() {
                return None;
            }
            // log2 i from the bit length and the leading digits
            let shift = i.bits().saturating_sub(53);
            let lead = num_traits::ToPrimitive::to_f64(&(&i >> shift)).unwrap_or(f64::NAN);
            let log2 = lead.log2() + shift as f64;
            Some(DiagnosticRow { j: r.k, k: r.k + 3, intersection: i.to_string(), distance_upper: 2.0 + 2.0 * log2 })
        })
        .collect();
    CurveGraphDiagnostics { label: disclaimer.to_string(), rows }
}

/// `gap(observe 1, curve 4) * q_9 / q_7`.
pub fn spot_gap(surface: &SlitSurface) -> Result<Interval> {
    let g = horizontal_gap_max(surface, 1, 4)?;
    let cf = surface.cf();
    Ok(g.gap.scale(&Rational::new(cf.q(9)?, cf.q(7)?)))
}

/// `(b_c + b_{-c}) / 2 == b` for the slit widths, exactly.
pub fn c_family_identity(surface: &SlitSurface, c: &Rational, bits: u32) -> Result<bool> {
    let b = surface.with_c(Rational::zero())?.slit_width_bits(bits)?;
    let plus = surface.with_c(c.clone())?.slit_width_bits(bits)?;
    let minus = surface.with_c(-c.clone())?.slit_width_bits(bits)?;
    Ok((&plus + &minus).scale(&Rational::new(1.into(), 2.into())) == b)
}

/// The weighted slits for `c` and `-c` average to the unweighted one.
pub fn check_c_family(surface: &SlitSurface, c: &Rational) -> Result<Verdict> {
    let mut v = Verdict::new("c_family");
    v.metric("c", json!(rational_string(c)));
    if !c_family_identity(surface, c, 128)? {
        v.fail("(b_c + b_-c) / 2 differs from b");
    }
    Ok(v)
}

/// Skew and control traces with their oscillation statistics.
#[derive(Debug, Clone, Serialize)]
pub struct BirkhoffWitness {
    pub n: u64,
    pub start: String,
    pub c: String,
    pub burn_in: u64,
    pub skew: BirkhoffTrace,
    pub control: BirkhoffTrace,
    /// `None` when too few checkpoints lie past the burn-in.
    pub stats: Option<WitnessStats>,
}

#[derive(Debug, Clone, Serialize)]
pub struct WitnessStats {
    pub skew: OscillationStats,
    pub control: OscillationStats,
    /// Skew amplitude over control amplitude.
    pub ratio: f64,
}

pub fn run_birkhoff_witness(surface: &SlitSurface, n: u64, start: &Rational) -> Result<BirkhoffWitness> {
    let cf = surface.cf();
    let system = build_skew(surface, n)?;
    let cps = default_checkpoints(cf, n)?;
    let burn_in = default_burn_in(cf)?;
    let (skew, control) = rayon::join(
        || iterate(&system, &SkewState::new(start.clone(), 0)?, n, &cps),
        || control_trace(&system, start, n, &cps),
    );
    let (skew, control) = (skew?, control?);
    let stats = match (oscillation_stats(&skew, burn_in), oscillation_stats(&control, burn_in)) {
        (Ok(skew), Ok(control)) => {
            let ratio = skew.amplitude / control.amplitude;
            Some(WitnessStats { skew, control, ratio })
        }
        (Err(Error::Domain(_)), _) | (_, Err(Error::Domain(_))) => None,
        (Err(e), _) | (_, Err(e)) => return Err(e),
    };
    Ok(BirkhoffWitness {
        n,
        start: rational_string(start),
        c: rational_string(surface.c()),
        burn_in,
        skew,
        control,
        stats,
    })
}

/// The skew amplitude reproduces the calibration and dwarfs the control.
pub fn check_birkhoff(w: &BirkhoffWitness, th: &Thresholds) -> Verdict {
    let mut v = Verdict::new("birkhoff");
    v.metric("calibrated_amplitude", json!(th.birkhoff_amplitude));
    v.metric("calibrated_ratio", json!(th.birkhoff_ratio));
    let Some(st) = &w.stats else {
        return v.skip("too few checkpoints past the burn-in");
    };
    v.metric("amplitude", json!(st.skew.amplitude));
    v.metric("control_amplitude", json!(st.control.amplitude));
    v.metric("ratio", json!(st.ratio));
    let calibrated = w.n == BIRKHOFF_N
        && parse_decimal(&w.start) == parse_decimal(BIRKHOFF_START)
        && parse_decimal(&w.c) == Some(Rational::zero());
    if !calibrated {
        return v.skip("run differs from the calibration run (n, start or c)");
    }
    let tol = th.birkhoff_tolerance;
    if (st.skew.amplitude - th.birkhoff_amplitude).abs() > tol * th.birkhoff_amplitude {
        v.fail(format!("amplitude {:.6} not within {}% of the calibrated value", st.skew.amplitude, tol * 100.0));
    }
    if st.ratio.is_nan() || st.ratio < (1.0 - tol) * th.birkhoff_ratio {
        v.fail(format!("skew/control ratio {:.2} below the calibrated ratio", st.ratio));
    }
    v
}

/// Where the record for stage `k` is cached, if caching is on.
pub fn cache_path(config: &StageConfig, k: u64) -> Option<PathBuf> {
    let dir: &Path = config.cache_dir.as_deref()?;
    Some(dir.join(format!("stage-{k:03}-{}.json", &config.hash()[..16])))
}
