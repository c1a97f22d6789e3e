//! Runs every closed form against its oracle over parameter grids and
//! collects the outcome in a [`Ledger`].

use num_bigint::BigInt;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::curves::{solutions_mod_pk, EllipticNormalForm};
use crate::error::Result;
use crate::measures::minors::{column_triples, direct_minor, printed_minor};
use crate::measures::dcases::{
    d_closed_form, d_prime_closed_form, d_prime_printed, d_prime_set, d_printed, d_set, phi_branch, phi_closed_form,
    phi_measure, phi_set, ChartCounts, DProfile, PhiInput, Regime,
};
use crate::measures::ledger::{Check, Ledger, Sanction};
use crate::measures::omega::{omega_measures, omega_measures_printed, omega_oracle, printed_minima, valuation_minima, OmegaContext};
use crate::measures::oracle::{measure_oracle, PadicSetSpec};
use crate::padic::{pow_i128, ExactRational};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SuiteConfig {
    pub curve: EllipticNormalForm,
    /// Primes for the d-cases, Phi and the Hensel lifting check.
    pub primes: Vec<u64>,
    /// Upper bound for each of B, C, F, G, H (and A, N2 for Phi).
    pub grid_max: u32,
    pub omega_primes: Vec<u64>,
    /// Bound on `N1 + N2 + N3` for the Omega sets.
    pub omega_n_max: u32,
    pub omega_m_max: u32,
    pub omega_samples: usize,
    pub minor_samples: usize,
    pub hensel_k_max: u32,
    pub seed: u64,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        Self {
            curve: EllipticNormalForm::new(-2, -1, 1),
            primes: vec![3, 5, 7],
            grid_max: 3,
            omega_primes: vec![3, 5],
            omega_n_max: 2,
            omega_m_max: 3,
            omega_samples: 50,
            minor_samples: 100,
            hensel_k_max: 4,
            seed: 2024,
        }
    }
}

fn oracle(spec: &PadicSetSpec, p: u64) -> Result<ExactRational> {
    measure_oracle(spec, p, spec.stabilization_level())
}

fn family_of(id: &str) -> &str {
    if id.starts_with("eight-case") {
        "eight-case"
    } else {
        id.split('(').next().unwrap_or(id)
    }
}

fn sanction_of(id: &str) -> Sanction {
    match id {
        "d1(2)" | "d2(2)" => Sanction::Typo,
        _ if id.starts_with("eight-case") => Sanction::Convention,
        _ => Sanction::None,
    }
}

/// The d-measures of all three regimes and `d'`, on the full grid.
pub fn run_d_cases(cfg: &SuiteConfig) -> Result<Ledger> {
    let g = cfg.grid_max;
    let mut jobs = Vec::new();
    for &p in &cfg.primes {
        for regime in [Regime::One, Regime::Two, Regime::Three] {
            for b in 0..=g {
                for c in 0..=g {
                    if regime.admits(b, c) {
                        jobs.push((p, Some(regime), b, c));
                    }
                }
            }
        }
        for b in 1..=g {
            jobs.push((p, None, b, 0));
        }
    }
    let parts: Vec<Result<Ledger>> = jobs
        .par_iter()
        .map(|&(p, regime, b, c)| {
            let k = ChartCounts::new(&cfg.curve, p)?;
            let mut l = Ledger::new();
            for f in 0..=g {
                for gg in 0..=g {
                    match regime {
                        Some(regime) => {
                            for h in 0..=g {
                                let d = DProfile::new(b, c, f, gg, h);
                                let pr = d_printed(regime, d, &k);
                                let o = oracle(&d_set(regime, d, k.params), p)?;
                                l.check(Check {
                                    family: family_of(pr.formula_id),
                                    formula_id: pr.formula_id,
                                    inputs: vec![
                                        ("p", p as i64),
                                        ("case", regime.number() as i64),
                                        ("B", b as i64),
                                        ("C", c as i64),
                                        ("F", f as i64),
                                        ("G", gg as i64),
                                        ("H", h as i64),
                                    ],
                                    closed: d_closed_form(regime, d, &k),
                                    printed: pr.value.clone(),
                                    reading: pr.reading.clone(),
                                    oracle: o,
                                    sanction: sanction_of(pr.formula_id),
                                });
                            }
                        }
                        None => {
                            let pr = d_prime_printed(b, f, gg);
                            let o = oracle(&d_prime_set(b, f, gg, k.params), p)?;
                            l.check(Check {
                                family: "d1-c0",
                                formula_id: pr.formula_id,
                                inputs: vec![("p", p as i64), ("B", b as i64), ("F", f as i64), ("G", gg as i64)],
                                closed: Some(d_prime_closed_form(b, f, gg, &k)),
                                printed: pr.value,
                                reading: None,
                                oracle: o,
                                sanction: Sanction::None,
                            });
                        }
                    }
                }
            }
            Ok(l)
        })
        .collect();
    let mut out = Ledger::new();
    for part in parts {
        out.merge(part?);
    }
    Ok(out)
}

/// Phi for `A, B, C, N2 <= grid_max`, with several unit parts of c and b~.
pub fn run_phi(cfg: &SuiteConfig) -> Result<Ledger> {
    let g = cfg.grid_max;
    let mut out = Ledger::new();
    for &p in &cfg.primes {
        for a in 0..=g {
            for b in 0..=g {
                for c in 0..=g {
                    for n2 in 0..=g {
                        let x = PhiInput { a, b, c, n2 };
                        for (uc, ub) in [(1, 1), (p as i64 - 1, 1), (1, 2)] {
                            let o = oracle(&phi_set(x, p, uc, ub), p)?;
                            let id = ["phi(1)", "phi(2)", "phi(3)", "phi(4)"][phi_branch(x) as usize - 1];
                            out.check(Check {
                                family: "phi",
                                formula_id: id,
                                inputs: vec![
                                    ("p", p as i64),
                                    ("A", a as i64),
                                    ("B", b as i64),
                                    ("C", c as i64),
                                    ("N2", n2 as i64),
                                    ("unit_c", uc),
                                    ("unit_b", ub),
                                ],
                                closed: Some(phi_closed_form(x, p)),
                                printed: Some(phi_measure(x, p)),
                                reading: None,
                                oracle: o,
                                sanction: Sanction::None,
                            });
                        }
                    }
                }
            }
        }
    }
    Ok(out)
}

fn sample_entry(rng: &mut ChaCha8Rng, p: u64) -> i128 {
    match rng.gen_range(0..6) {
        0 => 0,
        1 => {
            let unit = loop {
                let u: i128 = rng.gen_range(-20..=20);
                if u % p as i128 != 0 {
                    break u;
                }
            };
            unit * pow_i128(p, rng.gen_range(1..=3)).unwrap()
        }
        _ => rng.gen_range(-200..=200),
    }
}

/// Central blocks `(p, N, a, b, c)` for the Omega and minor checks.
pub fn sample_contexts(cfg: &SuiteConfig, primes: &[u64], n_max: u32, per_n: usize, salt: u64) -> Vec<OmegaContext> {
    let alpha = cfg.curve.pattern_params();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ salt);
    let mut out = Vec::new();
    for &p in primes {
        for n1 in 0..=n_max {
            for n2 in 0..=n_max - n1 {
                for n3 in 0..=n_max - n1 - n2 {
                    for _ in 0..per_n {
                        let abc = (sample_entry(&mut rng, p), sample_entry(&mut rng, p), sample_entry(&mut rng, p));
                        out.push(OmegaContext::new(p, [n1, n2, n3], abc, alpha));
                    }
                }
            }
        }
    }
    out
}

fn ctx_inputs(ctx: &OmegaContext) -> Vec<(&'static str, i64)> {
    let (a, b, c) = ctx.entries();
    let [n1, n2, n3] = ctx.n();
    vec![
        ("p", ctx.p() as i64),
        ("N1", n1 as i64),
        ("N2", n2 as i64),
        ("N3", n3 as i64),
        ("a", a as i64),
        ("b", b as i64),
        ("c", c as i64),
    ]
}

const OMEGA_IDS: [&str; 6] = ["omega(1)", "omega(2)", "omega(3)", "omega(4)", "omega(5)", "omega(6)"];

/// Omega_1..Omega_6 closed forms against the defining congruences, plus the
/// displayed minimum lists against the actual minors.
pub fn run_omega(cfg: &SuiteConfig) -> Ledger {
    let ctxs = sample_contexts(cfg, &cfg.omega_primes, cfg.omega_n_max, cfg.omega_samples, 0x0e6a);
    let parts: Vec<Ledger> = ctxs
        .par_iter()
        .map(|ctx| {
            let mut l = Ledger::new();
            for m in 0..=cfg.omega_m_max {
                let closed = omega_measures(ctx, [m; 6]);
                let printed = omega_measures_printed(ctx, [m; 6]);
                for i in 0..6 {
                    let mut inputs = ctx_inputs(ctx);
                    inputs.push(("M", m as i64));
                    l.check(Check {
                        family: "omega",
                        formula_id: OMEGA_IDS[i],
                        inputs,
                        closed: Some(closed.mu[i].clone()),
                        printed: Some(printed.mu[i].clone()),
                        reading: None,
                        oracle: omega_oracle(ctx, i + 1, m),
                        sanction: Sanction::None,
                    });
                }
            }
            let actual = valuation_minima(ctx);
            let shown = printed_minima(ctx);
            for (id, shown, actual) in [
                ("minima-u1", shown.u1, actual.u1),
                ("minima-u2", shown.u2, actual.u2),
                ("minima-w1", shown.w1, actual.w1),
                ("minima-w2", shown.w2, actual.w2),
                ("minima-w3", shown.w3, actual.w3),
                ("minima-u5", shown.u5, actual.u5),
            ] {
                l.check(Check {
                    family: "minima",
                    formula_id: id,
                    inputs: ctx_inputs(ctx),
                    closed: Some(actual),
                    printed: Some(shown),
                    reading: None,
                    oracle: actual,
                    sanction: Sanction::None,
                });
            }
            let v1 = Some(actual.big_v1);
            l.check(Check {
                family: "minima",
                formula_id: "minima-V1",
                inputs: ctx_inputs(ctx),
                closed: v1,
                printed: Some(shown.v1.capped(ctx.s())),
                reading: None,
                oracle: actual.big_v1,
                sanction: Sanction::None,
            });
            l
        })
        .collect();
    let mut out = Ledger::new();
    for part in parts {
        out.merge(part);
    }
    out
}

/// The twenty printed 3x3 minors on random contexts.
pub fn run_minors(cfg: &SuiteConfig) -> Ledger {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0xa99e);
    let alpha = cfg.curve.pattern_params();
    let mut out = Ledger::new();
    for &p in &cfg.omega_primes {
        for _ in 0..cfg.minor_samples {
            let n = [rng.gen_range(0..=3), rng.gen_range(0..=3), rng.gen_range(0..=3)];
            let abc = (sample_entry(&mut rng, p), sample_entry(&mut rng, p), sample_entry(&mut rng, p));
            let ctx = OmegaContext::new(p, n, abc, alpha);
            for cols in column_triples() {
                let id = format!("minor({},{},{})", cols[0], cols[1], cols[2]);
                let direct = direct_minor(cols, &ctx);
                let printed = printed_minor(cols, &ctx);
                out.check(Check {
                    family: "minor",
                    formula_id: &id,
                    inputs: ctx_inputs(&ctx),
                    closed: Some(direct.clone()),
                    reading: Some(-&printed),
                    printed: Some(printed),
                    oracle: direct,
                    sanction: Sanction::Convention,
                });
            }
        }
    }
    out
}

/// Solutions of the curve congruence mod `p^K` against `p^{K-1}` times the
/// count mod p.
pub fn run_lifting(cfg: &SuiteConfig) -> Result<Ledger> {
    let mut out = Ledger::new();
    for &p in &cfg.primes {
        let base = solutions_mod_pk(&cfg.curve, p, 1)?.len() as u64;
        for k in 1..=cfg.hensel_k_max {
            let n = solutions_mod_pk(&cfg.curve, p, k)?.len() as u64;
            let predicted = BigInt::from(p).pow(k - 1) * base;
            out.check(Check {
                family: "lift",
                formula_id: "lift",
                inputs: vec![("p", p as i64), ("K", k as i64)],
                closed: Some(predicted.clone()),
                printed: Some(predicted),
                reading: None,
                oracle: BigInt::from(n),
                sanction: Sanction::None,
            });
        }
    }
    Ok(out)
}

pub fn run_all(cfg: &SuiteConfig) -> Result<Ledger> {
    let mut l = run_d_cases(cfg)?;
    l.merge(run_phi(cfg)?);
    l.merge(run_omega(cfg));
    l.merge(run_minors(cfg));
    l.merge(run_lifting(cfg)?);
    Ok(l)
}
