//! Command-line front end.
//!
//! Exit codes: 0 success, 1 verdict failure or I/O error, 2 usage or domain
//! error, 3 precision, boundary or certificate failure, 4 resource limit.

mod config;
mod output;

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use num_traits::Zero;
use serde_json::{json, Value};

pub use config::{CheckpointSchedule, RunConfig, CACHE_ENV, DEFAULT_CACHE_DIR};
pub use output::{line_plot, Format, Series, Table};

use crate::cfrac::ContinuedFraction;
use crate::constants::*;
use crate::dynamics::{control_trace, default_checkpoints, iterate, BirkhoffTrace, SkewState, SkewSystem};
use crate::error::{Error, Result};
use crate::flatsurf::{length_certificate, slit_curve, systole, SlitSurface};
use crate::interval::{rational_string, Interval};
use crate::witness::{self, StageConfig, StageRecord, Verdict};
use output::bounds;

pub const STAGES_HEADER: [&str; 24] = [
    "k",
    "n_k",
    "q",
    "t_lo",
    "t_hi",
    "gap_lo",
    "gap_hi",
    "systole_lo",
    "systole_hi",
    "zeta_h_lo",
    "zeta_h_hi",
    "zeta_v_lo",
    "zeta_v_hi",
    "zeta_len_lo",
    "zeta_len_hi",
    "len_times_a_lo",
    "len_times_a_hi",
    "hyp_upper_lo",
    "hyp_upper_hi",
    "gapmax_lo",
    "gapmax_hi",
    "filling",
    "i_minus3",
    "i_plus3",
];

pub const SUMMARY_SCHEMA_VERSION: &str = "1";

#[derive(Debug, Parser)]
#[command(name = "slitflow", version, about = "Certified stage data for the slit-torus geodesic with alpha = [1,4,9,16,...]")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Write files into DIR instead of printing.
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// `key = value` configuration file; flags override it.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub no_cache: bool,
}

#[derive(Debug, Clone, Args)]
pub struct RangeArgs {
    #[arg(long)]
    pub from: Option<u64>,
    #[arg(long)]
    pub to: Option<u64>,
    /// Same as --to.
    #[arg(long)]
    pub max_k: Option<u64>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Partial quotients and convergents `(k, a_k, p_k, q_k)`.
    Convergents {
        #[arg(long)]
        max_k: Option<u64>,
    },
    /// Growth assumptions on the partial quotients.
    Assumptions {
        #[arg(long)]
        max_k: Option<u64>,
    },
    /// Enclosure of the slit constant `b` and the weighted slit `b_c`.
    B {
        #[arg(long)]
        tol: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        c: Option<String>,
    },
    /// Full stage records.
    Stages {
        #[command(flatten)]
        range: RangeArgs,
        #[arg(long, allow_hyphen_values = true)]
        c: Option<String>,
    },
    /// Systoles of the torus pieces at the stage times.
    Systole {
        #[command(flatten)]
        range: RangeArgs,
    },
    /// Slit curves and their length certificates.
    Slits {
        #[command(flatten)]
        range: RangeArgs,
        #[arg(long, allow_hyphen_values = true)]
        c: Option<String>,
    },
    /// Birkhoff averages of the sheet indicator along the skew rotation.
    Birkhoff {
        #[arg(long)]
        n: Option<String>,
        #[arg(long)]
        start: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        c: Option<String>,
        /// Overlay the plain rotation with the observable `[0, 1/2)`.
        #[arg(long)]
        control: bool,
        /// Use an empty flip interval (`b_c = 0`).
        #[arg(long)]
        zero_slit: bool,
    },
    /// Full pipeline: every table, verdicts, plots and summary.json.
    Report {
        #[command(flatten)]
        range: RangeArgs,
        #[arg(long, allow_hyphen_values = true)]
        c: Option<String>,
        #[arg(long)]
        n: Option<String>,
        #[arg(long)]
        start: Option<String>,
    },
}

/// Parses `args` (including the program name), runs, and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("slitflow: {e}");
            e.exit_code()
        }
    }
}

fn apply_range(cfg: &mut RunConfig, r: &RangeArgs) {
    if let Some(f) = r.from {
        cfg.k_from = f;
    }
    if let Some(t) = r.to.or(r.max_k) {
        cfg.k_to = t;
    }
}

fn apply_opt(cfg: &mut RunConfig, key: &str, v: &Option<String>) -> Result<()> {
    match v {
        Some(v) => cfg.set(key, v),
        None => Ok(()),
    }
}

/// Resolves the configuration for a parsed command line.
pub fn resolve_config(cli: &Cli) -> Result<RunConfig> {
    let mut cfg = RunConfig::default();
    if let Some(path) = &cli.config {
        cfg.apply_file(path)?;
    }
    if let Some(out) = &cli.out {
        cfg.out_dir = Some(out.clone());
    }
    if cli.no_cache {
        cfg.cache_dir = None;
    }
    match &cli.command {
        Command::Convergents { max_k } | Command::Assumptions { max_k } => {
            if let Some(m) = max_k {
                cfg.assumptions_max_k = *m;
            }
        }
        Command::B { tol, c } => {
            apply_opt(&mut cfg, "tol", tol)?;
            apply_opt(&mut cfg, "c", c)?;
        }
        Command::Stages { range, c } | Command::Slits { range, c } => {
            apply_range(&mut cfg, range);
            apply_opt(&mut cfg, "c", c)?;
        }
        Command::Systole { range } => apply_range(&mut cfg, range),
        Command::Birkhoff { n, start, c, control, .. } => {
            apply_opt(&mut cfg, "n", n)?;
            apply_opt(&mut cfg, "start", start)?;
            apply_opt(&mut cfg, "c", c)?;
            cfg.control |= *control;
        }
        Command::Report { range, c, n, start } => {
            apply_range(&mut cfg, range);
            apply_opt(&mut cfg, "c", c)?;
            apply_opt(&mut cfg, "n", n)?;
            apply_opt(&mut cfg, "start", start)?;
        }
    }
    cfg.validate()?;
    Ok(cfg)
}

fn execute(cli: &Cli) -> Result<i32> {
    let cfg = resolve_config(cli)?;
    let format = cli.format.unwrap_or(Format::Csv);
    let ext = match format {
        Format::Csv => "csv",
        Format::Json => "json",
    };
    match &cli.command {
        Command::Convergents { max_k } => {
            let max_k = max_k.unwrap_or(DEFAULT_K_MAX);
            emit(&cfg, &format!("convergents.{ext}"), &cmd_convergents(max_k)?.render(format)?)?;
        }
        Command::Assumptions { .. } => {
            emit(&cfg, &format!("assumptions.{ext}"), &cmd_assumptions(&cfg)?.render(format)?)?;
        }
        Command::B { .. } => emit(&cfg, &format!("b.{ext}"), &cmd_b(&cfg)?.render(format)?)?,
        Command::Stages { .. } => {
            let records = witness::run_stages(cfg.k_from, cfg.k_to, &stage_config(&cfg)?)?;
            emit(&cfg, &format!("stages.{ext}"), &stages_table(&records).render(format)?)?;
        }
        Command::Systole { .. } => emit(&cfg, &format!("systole.{ext}"), &cmd_systole(&cfg)?.render(format)?)?,
        Command::Slits { .. } => emit(&cfg, &format!("slits.{ext}"), &cmd_slits(&cfg)?.render(format)?)?,
        Command::Birkhoff { zero_slit, .. } => {
            let run = cmd_birkhoff(&cfg, *zero_slit)?;
            emit(&cfg, &format!("birkhoff.{ext}"), &run.table().render(format)?)?;
            if cfg.out_dir.is_some() {
                emit(&cfg, "birkhoff.svg", &run.plot())?;
            }
        }
        Command::Report { .. } => {
            let outcome = cmd_report(&cfg)?;
            for name in &outcome.failing {
                eprintln!("slitflow: check failed: {name}");
            }
            return Ok(if outcome.failing.is_empty() { 0 } else { 1 });
        }
    }
    Ok(0)
}

/// Writes `content` to `out_dir/name`, or prints it when no directory is set.
fn emit(cfg: &RunConfig, name: &str, content: &str) -> Result<()> {
    match &cfg.out_dir {
        Some(dir) => write_file(dir, name, content),
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

fn write_file(dir: &Path, name: &str, content: &str) -> Result<()> {
    let path = dir.join(name);
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(|e| Error::Io(format!("{}: {e}", parent.display())))?;
    }
    fs::write(&path, content).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

pub fn surface(cfg: &RunConfig) -> Result<SlitSurface> {
    SlitSurface::new(ContinuedFraction::squares(), cfg.c.clone())
}

pub fn stage_config(cfg: &RunConfig) -> Result<StageConfig> {
    let mut sc = StageConfig::new(surface(cfg)?);
    sc.k_limit = cfg.k_limit;
    sc.cache_dir = cfg.cache_dir.clone();
    Ok(sc)
}

/// The configured stages, within the resource limit.
fn stage_range(cfg: &RunConfig) -> Result<std::ops::RangeInclusive<u64>> {
    if cfg.k_to > cfg.k_limit {
        return Err(Error::Resource(format!("stage {} exceeds the configured limit {}", cfg.k_to, cfg.k_limit)));
    }
    Ok(cfg.k_from..=cfg.k_to)
}

pub fn cmd_convergents(max_k: u64) -> Result<Table> {
    if max_k == 0 {
        return Err(Error::Usage("--max-k must be at least 1".into()));
    }
    let cf = ContinuedFraction::squares();
    let mut t = Table::new(&["k", "a_k", "p_k", "q_k"]);
    for k in 1..=max_k {
        let c = cf.convergent(k)?;
        t.push(vec![k.to_string(), cf.coefficient(k)?.to_string(), c.p.to_string(), c.q.to_string()]);
    }
    Ok(t)
}

pub fn cmd_assumptions(cfg: &RunConfig) -> Result<Table> {
    let cf = ContinuedFraction::squares();
    let rep = cf.check_assumptions(cfg.assumptions_max_k.max(2))?;
    let mut t = Table::new(&[
        "k",
        "a_2k+2",
        "partial_sum_lo",
        "partial_sum_hi",
        "a_2k+1",
        "r_k_lo",
        "r_k_hi",
        "r_k_times_k4_lo",
        "r_k_times_k4_hi",
    ]);
    for (i, row) in rep.ratio_rows.iter().enumerate() {
        let k = row.k;
        let [plo, phi] = bounds(&rep.summable_partials[i].1);
        let [rlo, rhi] = bounds(&row.ratio);
        let [slo, shi] = bounds(&row.ratio_times_k4);
        t.push(vec![
            k.to_string(),
            cf.coefficient(2 * k + 2)?.to_string(),
            plo,
            phi,
            rep.divergent_terms[i].1.to_string(),
            rlo,
            rhi,
            slo,
            shi,
        ]);
    }
    Ok(t)
}

pub fn cmd_b(cfg: &RunConfig) -> Result<Table> {
    let x = surface(cfg)?;
    let v = x.cf().compute_b(&cfg.tol)?;
    let weighted = v.enclosure.scale(&x.weight());
    let [lo, hi] = bounds(&v.enclosure);
    let [clo, chi] = bounds(&weighted);
    let mut t = Table::new(&["c", "b_lo", "b_hi", "b_c_lo", "b_c_hi", "terms", "tail_bound"]);
    t.push(vec![rational_string(x.c()), lo, hi, clo, chi, v.truncation.to_string(), rational_string(&v.tail_bound)]);
    Ok(t)
}

pub fn cmd_systole(cfg: &RunConfig) -> Result<Table> {
    let x = surface(cfg)?;
    let mut t = Table::new(&[
        "k",
        "systole_lo",
        "systole_hi",
        "branch_loop_lo",
        "branch_loop_hi",
        "shortest_m",
        "shortest_n",
    ]);
    for k in stage_range(cfg)? {
        let s = systole(&x, &x.stage_time(k)?).map_err(|e| e.at_stage(k as u32))?;
        let [a, b] = bounds(&s.lattice_systole);
        let [c, d] = bounds(&s.branch_loop);
        t.push(vec![k.to_string(), a, b, c, d, s.shortest_vector.0.to_string(), s.shortest_vector.1.to_string()]);
    }
    Ok(t)
}

pub fn cmd_slits(cfg: &RunConfig) -> Result<Table> {
    let x = surface(cfg)?;
    let mut t = Table::new(&[
        "k",
        "m",
        "n",
        "zeta_h_lo",
        "zeta_h_hi",
        "zeta_v_lo",
        "zeta_v_hi",
        "zeta_len_lo",
        "zeta_len_hi",
        "len_times_a_lo",
        "len_times_a_hi",
        "hyp_upper_lo",
        "hyp_upper_hi",
    ]);
    for k in stage_range(cfg)? {
        let z = slit_curve(&x, k).map_err(|e| e.at_stage(k as u32))?;
        let hyp = match length_certificate(&z.connection, &x, &x.stage_time(k)?) {
            Ok(c) => bounds(&c.hyperbolic_upper).to_vec(),
            Err(Error::NoCertificate(_)) => vec![String::new(), String::new()],
            Err(e) => return Err(e.at_stage(k as u32)),
        };
        let mut row = vec![k.to_string(), z.connection.coords.0.to_string(), z.connection.coords.1.to_string()];
        for v in [&z.horizontal, &z.vertical, &z.length, &z.length_times_a] {
            row.extend(bounds(v));
        }
        row.extend(hyp);
        t.push(row);
    }
    Ok(t)
}

pub fn stages_table(records: &[StageRecord]) -> Table {
    let mut t = Table::new(&STAGES_HEADER);
    for r in records {
        let hyp = r.certificate.hyperbolic_upper.as_ref();
        let filling = r.filling.as_ref().map(|f| f.fills.to_string()).unwrap_or_default();
        t.push(vec![
            r.k.to_string(),
            r.n_k.to_string(),
            r.q.clone(),
            r.t.lo.clone(),
            r.t.hi.clone(),
            r.gap.value.lo.clone(),
            r.gap.value.hi.clone(),
            r.systole.plus.lo.clone(),
            r.systole.plus.hi.clone(),
            r.zeta.h.lo.clone(),
            r.zeta.h.hi.clone(),
            r.zeta.v.lo.clone(),
            r.zeta.v.hi.clone(),
            r.zeta.length.lo.clone(),
            r.zeta.length.hi.clone(),
            r.zeta.length_times_a.lo.clone(),
            r.zeta.length_times_a.hi.clone(),
            hyp.map(|h| h.lo.clone()).unwrap_or_default(),
            hyp.map(|h| h.hi.clone()).unwrap_or_default(),
            r.horizontal_gap.gap.lo.clone(),
            r.horizontal_gap.gap.hi.clone(),
            filling,
            r.i_minus3.clone().unwrap_or_default(),
            r.i_plus3.clone().unwrap_or_default(),
        ]);
    }
    t
}

/// A skew trace and, optionally, the control rotation at the same checkpoints.
pub struct BirkhoffRun {
    pub skew: BirkhoffTrace,
    pub control: Option<BirkhoffTrace>,
}

impl BirkhoffRun {
    pub fn table(&self) -> Table {
        let mut header = vec!["N", "A_N", "hits", "flips"];
        if self.control.is_some() {
            header.extend(["control_A_N", "control_hits"]);
        }
        let mut t = Table::new(&header);
        for (i, cp) in self.skew.checkpoints.iter().enumerate() {
            let mut row = vec![cp.n.to_string(), rational_string(&cp.average()), cp.hits.to_string(), cp.flips.to_string()];
            if let Some(c) = &self.control {
                row.push(rational_string(&c.checkpoints[i].average()));
                row.push(c.checkpoints[i].hits.to_string());
            }
            t.push(row);
        }
        t
    }

    pub fn plot(&self) -> String {
        let pts = |tr: &BirkhoffTrace| tr.checkpoints.iter().map(|c| (c.n as f64, c.average_f64())).collect();
        let mut series = vec![Series { name: "sheet 0 average".into(), points: pts(&self.skew), dashed: false }];
        if let Some(c) = &self.control {
            series.push(Series { name: "rotation, [0, 1/2)".into(), points: pts(c), dashed: true });
        }
        line_plot("Birkhoff running averages", "N", "A_N", &series, true)
    }
}

pub fn cmd_birkhoff(cfg: &RunConfig, zero_slit: bool) -> Result<BirkhoffRun> {
    if cfg.n > cfg.horizon {
        return Err(Error::Resource(format!("n = {} exceeds the configured horizon {}", cfg.n, cfg.horizon)));
    }
    if cfg.n == 0 {
        return Err(Error::Usage("n must be positive".into()));
    }
    let x = surface(cfg)?;
    let system = if zero_slit {
        SkewSystem::new(x.cf(), Interval::zero(), cfg.n, None)?
    } else {
        crate::dynamics::build_skew(&x, cfg.n)?
    };
    let cps = match &cfg.checkpoints {
        CheckpointSchedule::Default => default_checkpoints(x.cf(), cfg.n)?,
        CheckpointSchedule::List(l) => l.clone(),
    };
    let start = SkewState::new(cfg.start.clone(), 0)?;
    let (skew, control) = rayon::join(
        || iterate(&system, &start, cfg.n, &cps),
        || if cfg.control { Some(control_trace(&system, &cfg.start, cfg.n, &cps)) } else { None },
    );
    Ok(BirkhoffRun { skew: skew?, control: control.transpose()? })
}

pub struct ReportOutcome {
    pub summary: Value,
    pub failing: Vec<String>,
}

/// Runs every check and writes the bundle into the output directory.
pub fn cmd_report(cfg: &RunConfig) -> Result<ReportOutcome> {
    let out = cfg.out_dir.clone().unwrap_or_else(|| PathBuf::from("slitflow-report"));
    let x = surface(cfg)?;
    let th = &cfg.thresholds;
    let records = witness::run_stages(cfg.k_from, cfg.k_to, &stage_config(cfg)?)?;
    let mut notices = Vec::new();

    let mut verdicts: Vec<Verdict> = vec![
        witness::check_assumptions(x.cf(), cfg.assumptions_max_k.max(2), th)?,
        witness::check_gap_growth(&records, 1, th),
        witness::check_thickness(&records, th),
        witness::check_slit_decay(&records, th),
        witness::check_filling(&records, th),
    ];
    let bw = witness::run_birkhoff_witness(&x, cfg.n, &cfg.start)?;
    verdicts.push(witness::check_birkhoff(&bw, th));
    if !cfg.c.is_zero() {
        verdicts.push(witness::check_c_family(&x, &cfg.c)?);
    }
    let failing: Vec<String> = verdicts.iter().filter(|v| v.counts_as_failure()).map(|v| v.name.clone()).collect();
    for v in verdicts.iter().filter(|v| v.skipped) {
        notices.push(format!("check {} skipped: {}", v.name, v.metrics.get("skipped").and_then(Value::as_str).unwrap_or("")));
    }

    let diagnostics = witness::curve_graph_diagnostics(&records, &cfg.disclaimer);
    let spot = witness::spot_gap(&x)?;
    let (w0, w1) = SPOT_GAP_WINDOW;
    let spot_within = spot.to_f64() >= w0 && spot.to_f64() <= w1;

    write_file(&out, "stages.csv", &stages_table(&records).to_csv()?)?;
    write_file(&out, "assumptions.csv", &cmd_assumptions(cfg)?.to_csv()?)?;
    let run = BirkhoffRun { skew: bw.skew.clone(), control: Some(bw.control.clone()) };
    write_file(&out, "birkhoff.csv", &run.table().to_csv()?)?;
    write_file(&out, "plots/birkhoff.svg", &run.plot())?;

    let ks = |f: &dyn Fn(&StageRecord) -> f64| records.iter().map(|r| (r.k as f64, f(r))).collect::<Vec<_>>();
    if records.len() >= 2 {
        let gap = Series { name: "t_{k+1} - t_k".into(), points: ks(&|r| r.gap.value.to_f64()), dashed: false };
        let model =
            Series { name: "4 log(2k)".into(), points: ks(&|r| 4.0 * (2.0 * r.k as f64).ln()), dashed: true };
        write_file(&out, "plots/gap.svg", &line_plot("Stage time gaps", "k", "gap", &[gap, model], false))?;
    } else {
        notices.push("gap plot skipped: fewer than two stages".into());
    }
    let prod = Series { name: "|zeta_k| a_{2k+2}".into(), points: ks(&|r| r.zeta.length_times_a.to_f64()), dashed: false };
    write_file(&out, "plots/length_times_a.svg", &line_plot("Slit length scaled by a_{2k+2}", "k", "|zeta_k| a", &[prod], false))?;
    let sys = Series { name: "torus systole".into(), points: ks(&|r| r.systole.plus.to_f64()), dashed: false };
    let lp = Series { name: "branch loop".into(), points: ks(&|r| r.systole.branch_loop.to_f64()), dashed: true };
    write_file(&out, "plots/systole.svg", &line_plot("Systoles at t_k", "k", "length", &[sys, lp], false))?;

    let summary = json!({
        "schema": "slitflow-summary",
        "schema_version": SUMMARY_SCHEMA_VERSION,
        "versions": { "slitflow": env!("CARGO_PKG_VERSION"), "constants": CONSTANTS_VERSION },
        "config": {
            "sequence": cfg.sequence,
            "from": cfg.k_from,
            "to": cfg.k_to,
            "c": rational_string(&cfg.c),
            "tol": rational_string(&cfg.tol),
            "n": cfg.n,
            "start": rational_string(&cfg.start),
            "assumptions_max_k": cfg.assumptions_max_k,
        },
        "passed": failing.is_empty(),
        "failing": failing,
        "verdicts": verdicts,
        "constants": th,
        "birkhoff": {
            "n": bw.n,
            "burn_in": bw.burn_in,
            "amplitude": bw.stats.as_ref().map(|s| s.skew.amplitude),
            "control_amplitude": bw.stats.as_ref().map(|s| s.control.amplitude),
            "ratio": bw.stats.as_ref().map(|s| s.ratio),
        },
        "spot_gap": {
            "value": bounds(&spot),
            "window": [w0, w1],
            "within": spot_within,
        },
        "diagnostics": diagnostics,
        "notices": notices,
    });
    write_file(&out, "summary.json", &(serde_json::to_string_pretty(&summary)? + "\n"))?;
    write_file(&out, "summary.schema.json", SUMMARY_SCHEMA)?;
    Ok(ReportOutcome { summary, failing })
}

/// JSON Schema of `summary.json`.
pub const SUMMARY_SCHEMA: &str = r##"{
  "$schema": "https://json-schema.org/draft/2020-12/schema",
  "$id": "https://slitflow.invalid/summary/1",
  "title": "slitflow report summary",
  "type": "object",
  "required": ["schema", "schema_version", "versions", "config", "passed", "failing", "verdicts", "constants", "birkhoff", "spot_gap", "diagnostics", "notices"],
  "properties": {
    "schema": { "const": "slitflow-summary" },
    "schema_version": { "const": "1" },
    "versions": {
      "type": "object",
      "required": ["slitflow", "constants"],
      "properties": { "slitflow": { "type": "string" }, "constants": { "type": "string" } }
    },
    "config": {
      "type": "object",
      "required": ["sequence", "from", "to", "c", "tol", "n", "start", "assumptions_max_k"],
      "properties": {
        "sequence": { "type": "string" },
        "from": { "type": "integer", "minimum": 1 },
        "to": { "type": "integer", "minimum": 1 },
        "c": { "type": "string" },
        "tol": { "type": "string" },
        "n": { "type": "integer", "minimum": 1 },
        "start": { "type": "string" },
        "assumptions_max_k": { "type": "integer" }
      }
    },
    "passed": { "type": "boolean" },
    "failing": { "type": "array", "items": { "type": "string" } },
    "verdicts": {
      "type": "array",
      "items": {
        "type": "object",
        "required": ["name", "passed", "skipped", "failures", "metrics"],
        "properties": {
          "name": { "type": "string" },
          "passed": { "type": "boolean" },
          "skipped": { "type": "boolean" },
          "failures": { "type": "array", "items": { "type": "string" } },
          "metrics": { "type": "object" }
        }
      }
    },
    "constants": { "type": "object" },
    "birkhoff": {
      "type": "object",
      "required": ["n", "burn_in", "amplitude", "control_amplitude", "ratio"],
      "properties": {
        "n": { "type": "integer" },
        "burn_in": { "type": "integer" },
        "amplitude": { "type": ["number", "null"] },
        "control_amplitude": { "type": ["number", "null"] },
        "ratio": { "type": ["number", "null"] }
      }
    },
    "spot_gap": {
      "type": "object",
      "required": ["value", "window", "within"],
      "properties": {
        "value": { "type": "array", "items": { "type": "string" }, "minItems": 2, "maxItems": 2 },
        "window": { "type": "array", "items": { "type": "number" }, "minItems": 2, "maxItems": 2 },
        "within": { "type": "boolean" }
      }
    },
    "diagnostics": {
      "type": "object",
      "required": ["label", "rows"],
      "properties": {
        "label": { "type": "string" },
        "rows": {
          "type": "array",
          "items": {
            "type": "object",
            "required": ["j", "k", "intersection", "distance_upper"],
            "properties": {
              "j": { "type": "integer" },
              "k": { "type": "integer" },
              "intersection": { "type": "string" },
              "distance_upper": { "type": "number" }
            }
          }
        }
      }
    },
    "notices": { "type": "array", "items": { "type": "string" } }
  }
}
"##;
