//! `nilzeta`: point counts, zeta coefficient tables, dependence fits and
//! the measure verification suite, written as flat files.

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use nilzeta_core::harness::{
    cmd_fit, cmd_measure, cmd_points, cmd_verify, cmd_zeta, ExperimentConfig, FitReport, ZetaOutput,
};
use nilzeta_core::measures::{DProfile, Regime};

#[derive(Parser)]
#[command(name = "nilzeta", version, about = "Exact experiments on ideal zeta functions of curve-built Lie rings")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Point counts per prime.
    Points(Common),
    /// Ideal (or subalgebra) counts a_0..a_nmax, or targeted diagonals.
    Zeta(Common),
    /// Exact fit of a_nmax(p) against |E(F_p)|, or the genus-2 diagonal fit.
    Fit(Common),
    /// Closed forms and displayed formulas against exact oracles.
    Verify(Common),
    /// One d-measure at every prime.
    Measure {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 1)]
        regime: u8,
        /// B,C,F,G,H
        #[arg(long, default_value = "0,0,1,0,0")]
        profile: String,
    },
}

#[derive(Args)]
struct Common {
    /// Plain-text key=value file, overridden by flags.
    #[arg(long)]
    config: Option<PathBuf>,
    /// `elliptic:a1,a2,a3` or `genus2:a0,...,a5;b`.
    #[arg(long)]
    curve: Option<String>,
    /// `a..b` or a comma-separated list.
    #[arg(long)]
    primes: Option<String>,
    /// ideals or subalgebras.
    #[arg(long)]
    mode: Option<String>,
    #[arg(long)]
    nmax: Option<String>,
    /// Diagonal vectors `m1,..,mk|n1,n2,n3`, separated by `;`.
    #[arg(long)]
    diagonal: Option<String>,
    #[arg(long)]
    level: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    /// Defaults to NILZETA_WORKERS, then to the available parallelism.
    #[arg(long)]
    workers: Option<String>,
    #[arg(long)]
    out: Option<String>,
    #[arg(long)]
    budget: Option<String>,
    #[arg(long)]
    degree: Option<String>,
    #[arg(long)]
    heldout: Option<String>,
}

impl Common {
    fn config(&self) -> Result<ExperimentConfig> {
        let mut cfg = ExperimentConfig::default();
        if let Some(path) = &self.config {
            cfg.apply_file(path)?;
        }
        let flags = [
            ("curve", &self.curve),
            ("primes", &self.primes),
            ("mode", &self.mode),
            ("nmax", &self.nmax),
            ("diagonal", &self.diagonal),
            ("level", &self.level),
            ("seed", &self.seed),
            ("workers", &self.workers),
            ("out", &self.out),
            ("budget", &self.budget),
            ("degree", &self.degree),
            ("heldout", &self.heldout),
        ];
        for (key, value) in flags {
            if let Some(v) = value {
                cfg.set(key, v).with_context(|| format!("--{key}"))?;
            }
        }
        Ok(cfg)
    }
}

fn parse_profile(s: &str) -> Result<DProfile> {
    let v: Vec<u32> = s.split(',').map(|x| x.trim().parse()).collect::<std::result::Result<_, _>>()?;
    match v.as_slice() {
        &[b, c, f, g, h] => Ok(DProfile::new(b, c, f, g, h)),
        _ => anyhow::bail!("profile needs five values B,C,F,G,H"),
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Points(c) => {
            let cfg = c.config()?;
            let rows = cmd_points(&cfg)?;
            for r in rows {
                println!("p={} affine={} projective={} bad={}", r.p, r.affine, r.projective, r.bad);
            }
        }
        Command::Zeta(c) => {
            let cfg = c.config()?;
            match cmd_zeta(&cfg)? {
                ZetaOutput::Tables(run) => {
                    for (t, err) in &run.tables {
                        let a: Vec<String> = t.coefficients.iter().map(|x| x.to_string()).collect();
                        println!("p={} a=[{}]", t.p, a.join(", "));
                        if let Some(e) = err {
                            println!("p={} incomplete: {e}", t.p);
                        }
                    }
                }
                ZetaOutput::Targeted(rows) => {
                    for r in rows {
                        println!(
                            "p={} {} total={} zero_part={} nonzero_part={}",
                            r.p, r.diagonal, r.total, r.zero_part, r.nonzero_part
                        );
                    }
                }
            }
        }
        Command::Fit(c) => {
            let cfg = c.config()?;
            match cmd_fit(&cfg)? {
                FitReport::Elliptic(r) => {
                    println!("a_{}(p) = Q1(p) + Q2(p) |E(F_p)|", r.n);
                    println!("Q1 = {}", r.fit.q1);
                    println!("Q2 = {}", r.fit.q2);
                    println!("Q2 nonzero: {}", r.q2_nonzero);
                    for h in &r.fit.held_out {
                        println!("held out p={}: predicted {} actual {} ok={}", h.p, h.predicted, h.actual, h.ok);
                    }
                }
                FitReport::Genus2(r) => {
                    match &r.nonzero_fit {
                        Some(f) => println!("nonzero part = {} + ({}) * chart", f.q1, f.q2),
                        None => println!("nonzero part: no exact fit"),
                    }
                    match &r.zero_fit {
                        Some(f) => println!("zero part = {f}"),
                        None => println!("zero part: no exact fit"),
                    }
                }
            }
        }
        Command::Verify(c) => {
            let cfg = c.config()?;
            let r = cmd_verify(&cfg)?;
            for (family, s) in &r.families {
                println!(
                    "{family}: checked {} closed-form mismatches {} printed differs {} sanctioned {} convention {} not stated {}",
                    s.checked, s.closed_form_mismatches, s.printed_differs, s.sanctioned, s.convention, s.not_stated
                );
            }
            println!("records {} written to {}", r.records, cfg.out.join("ledger.jsonl").display());
        }
        Command::Measure { common, regime, profile } => {
            let cfg = common.config()?;
            let rows = cmd_measure(&cfg, Regime::from_number(regime)?, parse_profile(&profile)?)?;
            for r in rows {
                println!(
                    "p={} oracle={} closed={} printed={}",
                    r.p,
                    r.oracle,
                    r.closed_form.as_deref().unwrap_or("-"),
                    r.printed.as_deref().unwrap_or("-")
                );
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
