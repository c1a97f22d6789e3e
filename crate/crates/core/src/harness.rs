//! Experiment driver behind the `nilzeta` command line.
//!
//! Each command reads an [`ExperimentConfig`], computes exact data and
//! writes flat files (CSV tables, a JSON-lines ledger, JSON summaries) into
//! the output directory, followed by a plain-text `manifest.txt`. Output
//! files depend only on the configuration and the seed, never on the
//! number of workers.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use num_bigint::{BigInt, BigUint};
use num_traits::Zero;
use serde::Serialize;

use crate::curves::{
    count_line_and_intersections, count_points_elliptic, count_points_genus2, count_points_genus2_chart, CurveSpec,
    EllipticNormalForm,
};
use crate::detrep::{build_elliptic_rep, fit_genus2_betas};
use crate::enumeration::{
    count_per_center, weight_exponent, zeta_coefficients_partial, DiagonalVector, EnumConfig, Mode,
    ZetaCoefficientTable, DEFAULT_BUDGET,
};
use crate::error::{Error, Result};
use crate::fit::{collect_strata, fit_dependence, fit_polynomial, stratified_fit, DependenceFit, PrimeStrata, RatPoly, Sample, StratifiedFit};
use crate::liering::ClassTwoLieRing;
use crate::measures::ledger::FamilySummary;
use crate::measures::oracle::measure_oracle;
use crate::measures::suite::{run_all, SuiteConfig};
use crate::measures::{d_closed_form, d_printed, d_set, ChartCounts, DProfile, Regime};
use crate::padic::is_prime;

fn as_string<S: serde::Serializer, T: std::fmt::Display>(x: &T, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_str(x)
}

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
pub const MANIFEST: &str = "manifest.txt";

/// The diagonal of index p^11 singled out for genus-2 curves.
pub const GENUS2_TARGET: &str = "0,1,1,1,1,1,0,1,1,1,1,1|0,0,1";

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ExperimentConfig {
    pub curve: CurveSpec,
    pub primes: Vec<u64>,
    pub mode: Mode,
    pub n_max: u32,
    /// When non-empty, `zeta` counts only these diagonals.
    pub diagonals: Vec<DiagonalVector>,
    /// Oracle level K; 0 uses the stabilisation level of each set.
    pub level: u32,
    pub seed: u64,
    pub workers: usize,
    pub out: PathBuf,
    pub budget: u128,
    /// Degree bound for fitted coefficient polynomials.
    pub degree: usize,
    /// Good primes kept out of the fit and used to validate it.
    pub held_out: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            curve: CurveSpec::Elliptic(EllipticNormalForm::new(-2, -1, 1)),
            primes: vec![3, 5, 7],
            mode: Mode::Ideals,
            n_max: 5,
            diagonals: Vec::new(),
            level: 0,
            seed: 2024,
            workers: default_workers(),
            out: PathBuf::from("out"),
            budget: DEFAULT_BUDGET,
            degree: 8,
            held_out: 2,
        }
    }
}

/// `NILZETA_WORKERS` if set, else the available parallelism.
pub fn default_workers() -> usize {
    std::env::var("NILZETA_WORKERS")
        .ok()
        .and_then(|v| v.trim().parse().ok())
        .filter(|&n| n > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}

/// `a..b` (inclusive, primes only) or a comma-separated list of primes.
pub fn parse_primes(s: &str) -> Result<Vec<u64>> {
    let bad = || Error::InvalidInput(format!("prime range '{s}' is neither a..b nor a list"));
    let mut out: Vec<u64> = if let Some((a, b)) = s.trim().split_once("..") {
        let a: u64 = a.trim().parse().map_err(|_| bad())?;
        let b: u64 = b.trim().trim_start_matches('=').parse().map_err(|_| bad())?;
        (a..=b).filter(|&n| is_prime(n)).collect()
    } else {
        let list: Vec<u64> = s.split(',').map(|x| x.trim().parse().map_err(|_| bad())).collect::<Result<_>>()?;
        if let Some(&n) = list.iter().find(|&&n| !is_prime(n)) {
            return Err(Error::NotPrime(n));
        }
        list
    };
    out.sort_unstable();
    out.dedup();
    Ok(out)
}

/// `key = value` lines; blank lines and `#` comments are skipped.
pub fn parse_config_text(text: &str) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::InvalidInput(format!("config line {} has no '='", i + 1)))?;
        out.push((k.trim().to_string(), v.trim().to_string()));
    }
    Ok(out)
}

impl ExperimentConfig {
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let num = |what: &str| Error::InvalidInput(format!("{what} expects a non-negative integer, got '{value}'"));
        match key {
            "curve" => self.curve = value.parse()?,
            "primes" => self.primes = parse_primes(value)?,
            "mode" => self.mode = value.parse()?,
            "nmax" => self.n_max = value.parse().map_err(|_| num(key))?,
            "diagonal" | "diagonals" => {
                self.diagonals = value.split(';').filter(|d| !d.trim().is_empty()).map(str::parse).collect::<Result<_>>()?
            }
            "level" => self.level = value.parse().map_err(|_| num(key))?,
            "seed" => self.seed = value.parse().map_err(|_| num(key))?,
            "workers" => self.workers = value.parse::<usize>().ok().filter(|&n| n > 0).ok_or_else(|| num(key))?,
            "out" => self.out = PathBuf::from(value),
            "budget" => self.budget = value.parse().map_err(|_| num(key))?,
            "degree" => self.degree = value.parse().map_err(|_| num(key))?,
            "heldout" | "held_out" => self.held_out = value.parse().map_err(|_| num(key))?,
            _ => return Err(Error::InvalidInput(format!("unknown config key '{key}'"))),
        }
        Ok(())
    }

    pub fn apply_file(&mut self, path: &Path) -> Result<()> {
        let text = fs::read_to_string(path)
            .map_err(|e| Error::InvalidInput(format!("cannot read config {}: {e}", path.display())))?;
        for (k, v) in parse_config_text(&text)? {
            self.set(&k, &v)?;
        }
        Ok(())
    }

    pub fn good_primes(&self) -> Vec<u64> {
        self.primes.iter().copied().filter(|&p| !self.curve.is_bad_prime(p)).collect()
    }

    pub fn bad_primes(&self) -> Vec<u64> {
        self.primes.iter().copied().filter(|&p| self.curve.is_bad_prime(p)).collect()
    }

    pub fn enum_config(&self) -> EnumConfig {
        EnumConfig { budget: self.budget, ..EnumConfig::default() }
    }

    /// The configuration as `key = value` pairs, in the syntax `set` accepts.
    pub fn echo(&self) -> Vec<(String, String)> {
        let list = |v: &[u64]| v.iter().map(u64::to_string).collect::<Vec<_>>().join(",");
        let diagonals: Vec<String> = self.diagonals.iter().map(|d| d.to_string()).collect();
        vec![
            ("curve".into(), self.curve.to_string()),
            ("primes".into(), list(&self.primes)),
            ("mode".into(), self.mode.to_string()),
            ("nmax".into(), self.n_max.to_string()),
            ("diagonals".into(), diagonals.join(";")),
            ("level".into(), self.level.to_string()),
            ("seed".into(), self.seed.to_string()),
            ("workers".into(), self.workers.to_string()),
            ("out".into(), self.out.display().to_string()),
            ("budget".into(), self.budget.to_string()),
            ("degree".into(), self.degree.to_string()),
            ("heldout".into(), self.held_out.to_string()),
        ]
    }

    /// Runs `f` on a thread pool of `workers` threads.
    pub fn in_pool<T: Send>(&self, f: impl FnOnce() -> T + Send) -> Result<T> {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(self.workers)
            .build()
            .map_err(|e| Error::InvalidInput(format!("cannot start {} workers: {e}", self.workers)))?;
        Ok(pool.install(f))
    }
}

/// The Lie ring of a curve: the 3x3 pattern for elliptic curves, the fitted
/// 6x6 matrix for genus 2 (which must have integral betas).
pub fn ring_for(curve: &CurveSpec) -> Result<ClassTwoLieRing> {
    match curve {
        CurveSpec::Elliptic(e) => ClassTwoLieRing::new(build_elliptic_rep(e).matrix, 3),
        CurveSpec::Genus2(c) => {
            let rep = fit_genus2_betas(c)
                .map_err(|inf| Error::InvalidInput(format!("no determinantal fit for {curve}: {}", inf.residual.join("; "))))?;
            let matrix = rep
                .matrix
                .ok_or_else(|| Error::InvalidInput(format!("betas of {curve} are not integral")))?;
            ClassTwoLieRing::new(matrix, 6)
        }
    }
}

fn csv_writer(path: &Path) -> Result<csv::Writer<fs::File>> {
    csv::Writer::from_path(path).map_err(|e| io_error(path, e))
}

fn io_error(path: &Path, e: impl std::fmt::Display) -> Error {
    Error::InvalidInput(format!("cannot write {}: {e}", path.display()))
}

fn write_rows<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let mut w = csv_writer(path)?;
    for r in rows {
        w.serialize(r).map_err(|e| io_error(path, e))?;
    }
    w.flush().map_err(|e| io_error(path, e))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| io_error(path, e))?;
    text.push('\n');
    fs::write(path, text).map_err(|e| io_error(path, e))
}

/// Writes `manifest.txt`: tool version, command, configuration echo, bad
/// primes, extra facts and the files produced.
pub fn write_manifest(cfg: &ExperimentConfig, command: &str, extra: &[(String, String)], files: &[String]) -> Result<()> {
    let path = cfg.out.join(MANIFEST);
    let mut text = format!("tool = nilzeta {VERSION}\ncommand = {command}\n");
    for (k, v) in cfg.echo().into_iter().chain(extra.iter().cloned()) {
        text.push_str(&format!("{k} = {v}\n"));
    }
    let bad: Vec<String> = cfg.bad_primes().iter().map(u64::to_string).collect();
    text.push_str(&format!("bad_primes = {}\n", bad.join(",")));
    text.push_str(&format!("files = {}\n", files.join(",")));
    fs::write(&path, text).map_err(|e| io_error(&path, e))
}

fn prepare_out(cfg: &ExperimentConfig) -> Result<()> {
    fs::create_dir_all(&cfg.out).map_err(|e| io_error(&cfg.out, e))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PointsRow {
    pub ring_id: String,
    pub p: u64,
    pub affine: u64,
    pub projective: u64,
    pub unit_affine: u64,
    pub e_m1: Option<u64>,
    pub e_m2: Option<u64>,
    pub e_m1_m2: Option<u64>,
    /// Genus 2 only: points of the (b, c)-chart of the targeted diagonal.
    pub chart: Option<u64>,
    pub bad: bool,
}

pub fn points_table(cfg: &ExperimentConfig) -> Result<Vec<PointsRow>> {
    cfg.primes
        .iter()
        .map(|&p| {
            let ring_id = cfg.curve.ring_id();
            let bad = cfg.curve.is_bad_prime(p);
            match &cfg.curve {
                CurveSpec::Elliptic(e) => {
                    let pc = count_points_elliptic(e, p)?;
                    let lines = count_line_and_intersections(e, p).ok();
                    Ok(PointsRow {
                        ring_id,
                        p,
                        affine: pc.affine,
                        projective: pc.projective,
                        unit_affine: pc.unit_affine,
                        e_m1: lines.map(|l| l.e_m1),
                        e_m2: lines.map(|l| l.e_m2),
                        e_m1_m2: lines.map(|l| l.e_m1_m2),
                        chart: None,
                        bad,
                    })
                }
                CurveSpec::Genus2(c) => {
                    let pc = count_points_genus2(c, p)?.count;
                    Ok(PointsRow {
                        ring_id,
                        p,
                        affine: pc.affine,
                        projective: pc.projective,
                        unit_affine: pc.unit_affine,
                        e_m1: None,
                        e_m2: None,
                        e_m1_m2: None,
                        chart: Some(count_points_genus2_chart(c, p)?),
                        bad,
                    })
                }
            }
        })
        .collect()
}

pub fn cmd_points(cfg: &ExperimentConfig) -> Result<Vec<PointsRow>> {
    prepare_out(cfg)?;
    let rows = points_table(cfg)?;
    write_rows(&cfg.out.join("points.csv"), &rows)?;
    write_manifest(cfg, "points", &[], &["points.csv".into()])?;
    Ok(rows)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
struct CoefficientRow {
    ring_id: String,
    p: u64,
    mode: String,
    n: usize,
    a_n: String,
    methods: String,
    status: String,
    budget: u128,
    seed: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
struct DiagonalRow {
    ring_id: String,
    p: u64,
    mode: String,
    n: usize,
    diagonal: String,
    count: String,
    weight: u32,
    method: String,
    budget: u128,
    seed: u64,
}

/// Coefficient tables of the good primes; a table cut short by an error
/// carries that error.
#[derive(Clone, Debug)]
pub struct ZetaRun {
    pub tables: Vec<(ZetaCoefficientTable, Option<Error>)>,
}

pub fn zeta_tables(cfg: &ExperimentConfig) -> Result<ZetaRun> {
    let ring = ring_for(&cfg.curve)?;
    let enum_cfg = cfg.enum_config();
    let id = cfg.curve.ring_id();
    let tables = cfg.in_pool(|| {
        cfg.good_primes()
            .into_iter()
            .map(|p| zeta_coefficients_partial(&ring, &id, p, cfg.n_max, cfg.mode, &enum_cfg))
            .collect()
    })?;
    Ok(ZetaRun { tables })
}

fn write_zeta_files(cfg: &ExperimentConfig, ring: &ClassTwoLieRing, run: &ZetaRun) -> Result<Vec<String>> {
    let mut files = Vec::new();
    for (t, err) in &run.tables {
        let mut rows: Vec<CoefficientRow> = t
            .coefficients
            .iter()
            .zip(&t.breakdown)
            .enumerate()
            .map(|(n, (a, counts))| {
                let mut methods: Vec<String> = counts.iter().map(|c| c.method.to_string()).collect();
                methods.sort();
                methods.dedup();
                CoefficientRow {
                    ring_id: t.ring_id.clone(),
                    p: t.p,
                    mode: t.mode.to_string(),
                    n,
                    a_n: a.to_string(),
                    methods: methods.join("+"),
                    status: "complete".into(),
                    budget: cfg.budget,
                    seed: cfg.seed,
                }
            })
            .collect();
        if let Some(e) = err {
            rows.push(CoefficientRow {
                ring_id: t.ring_id.clone(),
                p: t.p,
                mode: t.mode.to_string(),
                n: t.coefficients.len(),
                a_n: String::new(),
                methods: String::new(),
                status: format!("incomplete: {e}"),
                budget: cfg.budget,
                seed: cfg.seed,
            });
        }
        let name = format!("zeta_p{}.csv", t.p);
        write_rows(&cfg.out.join(&name), &rows)?;
        files.push(name);

        let diag_rows: Vec<DiagonalRow> = t
            .breakdown
            .iter()
            .enumerate()
            .flat_map(|(n, counts)| {
                counts.iter().map(move |c| DiagonalRow {
                    ring_id: t.ring_id.clone(),
                    p: t.p,
                    mode: t.mode.to_string(),
                    n,
                    diagonal: c.diagonal.to_string(),
                    count: c.count.to_string(),
                    weight: weight_exponent(ring, &c.diagonal),
                    method: c.method.to_string(),
                    budget: cfg.budget,
                    seed: cfg.seed,
                })
            })
            .collect();
        let name = format!("diagonals_p{}.csv", t.p);
        write_rows(&cfg.out.join(&name), &diag_rows)?;
        files.push(name);
    }
    Ok(files)
}

/// The count of one diagonal split by the central entries `(b, c)`: the
/// part with `b = c = 0` and the rest.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TargetedCount {
    pub ring_id: String,
    pub p: u64,
    pub diagonal: String,
    #[serde(serialize_with = "as_string")]
    pub total: BigUint,
    #[serde(serialize_with = "as_string")]
    pub zero_part: BigUint,
    #[serde(serialize_with = "as_string")]
    pub nonzero_part: BigUint,
    /// Central matrices with `(b, c) != (0, 0)` and a non-zero count.
    pub admissible_centers: u64,
    /// Largest count over a single central matrix.
    #[serde(serialize_with = "as_string")]
    pub max_per_center: BigUint,
    pub chart: Option<u64>,
    pub method: String,
    pub budget: u128,
    pub seed: u64,
}

pub fn targeted_count(cfg: &ExperimentConfig, ring: &ClassTwoLieRing, p: u64, d: &DiagonalVector) -> Result<TargetedCount> {
    let per = count_per_center(ring, p, d)?;
    let mut zero_part = BigUint::zero();
    let mut nonzero_part = BigUint::zero();
    let mut admissible_centers = 0;
    let mut max_per_center = BigUint::zero();
    for (n, c) in per {
        if c > max_per_center {
            max_per_center = c.clone();
        }
        if n[0][2] == 0 && n[1][2] == 0 {
            zero_part += c;
        } else if !c.is_zero() {
            admissible_centers += 1;
            nonzero_part += c;
        }
    }
    let chart = match &cfg.curve {
        CurveSpec::Genus2(c) => Some(count_points_genus2_chart(c, p)?),
        CurveSpec::Elliptic(_) => None,
    };
    Ok(TargetedCount {
        ring_id: cfg.curve.ring_id(),
        p,
        diagonal: d.to_string(),
        total: &zero_part + &nonzero_part,
        zero_part,
        nonzero_part,
        admissible_centers,
        max_per_center,
        chart,
        method: "row".into(),
        budget: cfg.budget,
        seed: cfg.seed,
    })
}

pub fn targeted_counts(cfg: &ExperimentConfig, diagonals: &[DiagonalVector]) -> Result<Vec<TargetedCount>> {
    let ring = ring_for(&cfg.curve)?;
    cfg.in_pool(|| {
        let mut out = Vec::new();
        for p in cfg.good_primes() {
            for d in diagonals {
                out.push(targeted_count(cfg, &ring, p, d)?);
            }
        }
        Ok(out)
    })?
}

#[derive(Clone, Debug)]
pub enum ZetaOutput {
    Tables(ZetaRun),
    Targeted(Vec<TargetedCount>),
}

pub fn cmd_zeta(cfg: &ExperimentConfig) -> Result<ZetaOutput> {
    prepare_out(cfg)?;
    let ring = ring_for(&cfg.curve)?;
    if !cfg.diagonals.is_empty() {
        let rows = targeted_counts(cfg, &cfg.diagonals)?;
        write_rows(&cfg.out.join("targeted.csv"), &rows)?;
        write_manifest(cfg, "zeta", &[], &["targeted.csv".into()])?;
        return Ok(ZetaOutput::Targeted(rows));
    }
    let run = zeta_tables(cfg)?;
    let files = write_zeta_files(cfg, &ring, &run)?;
    let incomplete: Vec<String> =
        run.tables.iter().filter(|(_, e)| e.is_some()).map(|(t, _)| t.p.to_string()).collect();
    write_manifest(cfg, "zeta", &[("incomplete_primes".into(), incomplete.join(","))], &files)?;
    Ok(ZetaOutput::Tables(run))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct EllipticFitReport {
    pub ring_id: String,
    pub n: u32,
    pub basis: Vec<String>,
    pub degree_bound: usize,
    pub bad_primes: Vec<u64>,
    pub q1: String,
    pub q2: String,
    pub fit: StratifiedFit,
    /// The `|E|`-coefficient is a non-zero polynomial.
    pub q2_nonzero: bool,
    pub validated: bool,
    /// Training primes minus the most coefficients any stratum needed.
    pub margin: i64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Genus2FitReport {
    pub ring_id: String,
    pub diagonal: String,
    pub counts: Vec<TargetedCount>,
    /// `nonzero_part = q1 + q2 * chart` with constant `q1, q2`.
    pub nonzero_fit: Option<DependenceFit>,
    /// Lowest-degree polynomial in p through the `b = c = 0` parts.
    pub zero_fit: Option<RatPoly>,
    pub zero_constant: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum FitReport {
    Elliptic(EllipticFitReport),
    Genus2(Genus2FitReport),
}

/// `a_n(p) = Q1(p) + Q2(p) |E(F_p)|` over the good primes, the last
/// `held_out` of them reserved for validation.
pub fn fit_elliptic(cfg: &ExperimentConfig, e: &EllipticNormalForm) -> Result<EllipticFitReport> {
    let good = cfg.good_primes();
    if good.len() < cfg.held_out + 2 {
        return Err(Error::Fit(format!("{} good primes leave too few for training", good.len())));
    }
    let ring = ring_for(&cfg.curve)?;
    let run = zeta_tables(cfg)?;
    let n = cfg.n_max as usize;
    let (train_n, _) = good.split_at(good.len() - cfg.held_out);
    let mut training = Vec::new();
    let mut held = Vec::new();
    for (t, err) in &run.tables {
        if let Some(e) = err {
            return Err(Error::Fit(format!("table at p = {} is incomplete: {e}", t.p)));
        }
        let points = count_points_elliptic(e, t.p)?.projective;
        if train_n.contains(&t.p) {
            let strata = cfg.in_pool(|| collect_strata(&ring, t, n))??;
            training.push(PrimeStrata { p: t.p, e: points, strata });
        } else {
            held.push(Sample { p: t.p, e: points, value: BigInt::from(t.coefficients[n].clone()) });
        }
    }
    let fit = stratified_fit(&training, &held, cfg.degree)?;
    let used = fit.strata.iter().map(|s| s.fit.q1.0.len() + s.fit.q2.0.len()).max().unwrap_or(0);
    Ok(EllipticFitReport {
        ring_id: cfg.curve.ring_id(),
        n: cfg.n_max,
        basis: vec!["1".into(), "|E|".into()],
        degree_bound: cfg.degree,
        bad_primes: cfg.bad_primes(),
        q1: fit.q1.to_string(),
        q2: fit.q2.to_string(),
        q2_nonzero: !fit.q2.is_zero(),
        validated: fit.validated(),
        margin: training.len() as i64 - used as i64,
        fit,
    })
}

/// The targeted genus-2 diagonal: its `(b, c) != (0, 0)` part against the
/// chart count, and its `b = c = 0` part as a polynomial in p.
pub fn fit_genus2(cfg: &ExperimentConfig) -> Result<Genus2FitReport> {
    let d: DiagonalVector = match cfg.diagonals.first() {
        Some(d) => d.clone(),
        None => GENUS2_TARGET.parse()?,
    };
    let counts = targeted_counts(cfg, std::slice::from_ref(&d))?;
    let samples: Vec<Sample> = counts
        .iter()
        .map(|t| Sample { p: t.p, e: t.chart.unwrap_or(0), value: BigInt::from(t.nonzero_part.clone()) })
        .collect();
    let nonzero_fit = if samples.len() > 2 { fit_dependence(&samples, 0, Some(0))? } else { None };
    let points: Vec<(u64, BigInt)> = counts.iter().map(|t| (t.p, BigInt::from(t.zero_part.clone()))).collect();
    let mut zero_fit = None;
    for deg in 0..points.len().saturating_sub(1).min(cfg.degree + 1) {
        if let Some(f) = fit_polynomial(&points, deg)? {
            zero_fit = Some(f);
            break;
        }
    }
    let zero_constant = zero_fit.as_ref().is_some_and(|f| f.degree().unwrap_or(0) == 0);
    Ok(Genus2FitReport {
        ring_id: cfg.curve.ring_id(),
        diagonal: d.to_string(),
        counts,
        nonzero_fit,
        zero_fit,
        zero_constant,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
struct StratumRow {
    diagonal: String,
    exponent: u32,
    weight: u32,
    q1: String,
    q2: String,
}

pub fn cmd_fit(cfg: &ExperimentConfig) -> Result<FitReport> {
    prepare_out(cfg)?;
    let report = match &cfg.curve {
        CurveSpec::Elliptic(e) => FitReport::Elliptic(fit_elliptic(cfg, e)?),
        CurveSpec::Genus2(_) => FitReport::Genus2(fit_genus2(cfg)?),
    };
    let mut files = vec!["fit.json".to_string()];
    write_json(&cfg.out.join("fit.json"), &report)?;
    let extra = match &report {
        FitReport::Elliptic(r) => {
            let rows: Vec<StratumRow> = r
                .fit
                .strata
                .iter()
                .map(|s| StratumRow {
                    diagonal: s.key.diagonal.to_string(),
                    exponent: s.key.exponent,
                    weight: s.key.weight,
                    q1: s.fit.q1.to_string(),
                    q2: s.fit.q2.to_string(),
                })
                .collect();
            write_rows(&cfg.out.join("fit_strata.csv"), &rows)?;
            files.push("fit_strata.csv".into());
            vec![
                ("q1".into(), r.fit.q1.to_string()),
                ("q2".into(), r.fit.q2.to_string()),
                ("q2_nonzero".into(), r.q2_nonzero.to_string()),
                ("validated".into(), r.validated.to_string()),
            ]
        }
        FitReport::Genus2(r) => {
            write_rows(&cfg.out.join("targeted.csv"), &r.counts)?;
            files.push("targeted.csv".into());
            let show = |f: &Option<DependenceFit>| f.as_ref().map_or("none".into(), |f| format!("{} + ({}) * chart", f.q1, f.q2));
            vec![
                ("nonzero_fit".into(), show(&r.nonzero_fit)),
                ("zero_fit".into(), r.zero_fit.as_ref().map_or("none".into(), |f| f.to_string())),
            ]
        }
    };
    write_manifest(cfg, "fit", &extra, &files)?;
    Ok(report)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct VerifyReport {
    pub suite: SuiteConfig,
    pub records: usize,
    pub closed_form_mismatches: u64,
    pub families: std::collections::BTreeMap<String, FamilySummary>,
}

pub fn suite_config(cfg: &ExperimentConfig) -> Result<SuiteConfig> {
    let CurveSpec::Elliptic(e) = cfg.curve else {
        return Err(Error::InvalidInput("the measure suite needs an elliptic curve".into()));
    };
    let good = cfg.good_primes();
    if good.is_empty() {
        return Err(Error::InvalidInput("no good primes to verify at".into()));
    }
    Ok(SuiteConfig {
        curve: e,
        omega_primes: good.iter().copied().take(2).collect(),
        primes: good,
        seed: cfg.seed,
        ..SuiteConfig::default()
    })
}

/// Runs the oracle suite and writes `ledger.jsonl` and `summary.json`.
/// Discrepancies are data; only infrastructure problems are errors.
pub fn cmd_verify(cfg: &ExperimentConfig) -> Result<VerifyReport> {
    prepare_out(cfg)?;
    let suite = suite_config(cfg)?;
    let ledger = cfg.in_pool(|| run_all(&suite))??;
    let path = cfg.out.join("ledger.jsonl");
    let file = fs::File::create(&path).map_err(|e| io_error(&path, e))?;
    let mut w = std::io::BufWriter::new(file);
    ledger.write_jsonl(&mut w).map_err(|e| io_error(&path, e))?;
    w.flush().map_err(|e| io_error(&path, e))?;
    let report = VerifyReport {
        suite,
        records: ledger.records.len(),
        closed_form_mismatches: ledger.closed_form_mismatches(),
        families: ledger.families,
    };
    write_json(&cfg.out.join("summary.json"), &report)?;
    let extra = vec![
        ("records".into(), report.records.to_string()),
        ("closed_form_mismatches".into(), report.closed_form_mismatches.to_string()),
    ];
    write_manifest(cfg, "verify", &extra, &["ledger.jsonl".into(), "summary.json".into()])?;
    Ok(report)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MeasureRow {
    pub p: u64,
    pub regime: u8,
    pub b: u32,
    pub c: u32,
    pub f: u32,
    pub g: u32,
    pub h: u32,
    pub level: u32,
    pub oracle: String,
    pub closed_form: Option<String>,
    pub printed: Option<String>,
    pub formula_id: String,
}

/// One d-measure at every good prime: oracle, closed form and displayed value.
pub fn measure_rows(cfg: &ExperimentConfig, regime: Regime, d: DProfile) -> Result<Vec<MeasureRow>> {
    let CurveSpec::Elliptic(e) = cfg.curve else {
        return Err(Error::InvalidInput("d-measures need an elliptic curve".into()));
    };
    let spec = d_set(regime, d, e.pattern_params());
    let level = if cfg.level == 0 { spec.stabilization_level() } else { cfg.level };
    cfg.good_primes()
        .into_iter()
        .map(|p| {
            let oracle = measure_oracle(&spec, p, level)?;
            let (closed, printed) = match ChartCounts::new(&e, p) {
                Ok(k) => {
                    let pr = d_printed(regime, d, &k);
                    (d_closed_form(regime, d, &k), Some(pr))
                }
                Err(Error::DegenerateLine(_)) => (None, None),
                Err(err) => return Err(err),
            };
            Ok(MeasureRow {
                p,
                regime: regime.number(),
                b: d.b,
                c: d.c,
                f: d.f,
                g: d.g,
                h: d.h,
                level,
                oracle: oracle.to_string(),
                closed_form: closed.map(|x| x.to_string()),
                printed: printed.as_ref().and_then(|p| p.effective().map(|x| x.to_string())),
                formula_id: printed.map_or(String::new(), |p| p.formula_id.to_string()),
            })
        })
        .collect()
}

pub fn cmd_measure(cfg: &ExperimentConfig, regime: Regime, d: DProfile) -> Result<Vec<MeasureRow>> {
    prepare_out(cfg)?;
    let rows = cfg.in_pool(|| measure_rows(cfg, regime, d))??;
    write_rows(&cfg.out.join("measure.csv"), &rows)?;
    write_manifest(cfg, "measure", &[("profile".into(), format!("regime {} {d:?}", regime.number()))], &["measure.csv".into()])?;
    Ok(rows)
}
