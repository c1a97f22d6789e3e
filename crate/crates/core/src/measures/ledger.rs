//! Discrepancy ledger: one JSON line per input where a displayed formula or
//! a closed form departs from its oracle.

use std::collections::BTreeMap;
use std::fmt::Display;
use std::io::Write;

use serde::{Deserialize, Serialize};

pub const SCHEMA: &str = "nilzeta.discrepancy/1";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Agree,
    /// The text disagrees, and one of the two sanctioned typo corrections
    /// (the second branch of d1, the exponent sign in d2) repairs it.
    SanctionedCorrection,
    /// The text agrees once read under a declared convention (point-count
    /// normalization, per-entry sign of a minor).
    Convention,
    /// The text gives a value that the oracle contradicts.
    PrintedDiffers,
    /// The text gives no value for this input.
    NotStated,
}

/// How a formula's departures may be read.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sanction {
    None,
    Typo,
    Convention,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiscrepancyRecord {
    pub schema: String,
    pub family: String,
    pub formula_id: String,
    pub inputs: BTreeMap<String, i64>,
    pub closed_form: Option<String>,
    pub printed: Option<String>,
    pub oracle: String,
    pub closed_form_matches: bool,
    pub verdict: Verdict,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FamilySummary {
    pub checked: u64,
    pub closed_form_mismatches: u64,
    pub agree: u64,
    pub sanctioned: u64,
    pub convention: u64,
    pub printed_differs: u64,
    pub not_stated: u64,
    /// Formula ids with at least one `PrintedDiffers` record.
    pub differing_ids: Vec<String>,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct Ledger {
    pub records: Vec<DiscrepancyRecord>,
    pub families: BTreeMap<String, FamilySummary>,
}

/// One comparison: the artifact's closed form, the displayed value, the
/// displayed value under its permitted reading, and the oracle.
pub struct Check<'a, T> {
    pub family: &'a str,
    pub formula_id: &'a str,
    pub inputs: Vec<(&'a str, i64)>,
    pub closed: Option<T>,
    pub printed: Option<T>,
    pub reading: Option<T>,
    pub oracle: T,
    pub sanction: Sanction,
}

impl Ledger {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn check<T: PartialEq + Display>(&mut self, c: Check<'_, T>) -> Verdict {
        let closed_ok = c.closed.as_ref().is_none_or(|x| *x == c.oracle);
        let verdict = if c.printed.as_ref() == Some(&c.oracle) {
            Verdict::Agree
        } else if c.reading.as_ref() == Some(&c.oracle) {
            match c.sanction {
                Sanction::Typo => Verdict::SanctionedCorrection,
                Sanction::Convention => Verdict::Convention,
                Sanction::None => Verdict::PrintedDiffers,
            }
        } else if c.printed.is_none() && c.reading.is_none() {
            Verdict::NotStated
        } else {
            Verdict::PrintedDiffers
        };
        let s = self.families.entry(c.family.to_string()).or_default();
        s.checked += 1;
        s.closed_form_mismatches += u64::from(!closed_ok);
        match verdict {
            Verdict::Agree => s.agree += 1,
            Verdict::SanctionedCorrection => s.sanctioned += 1,
            Verdict::Convention => s.convention += 1,
            Verdict::PrintedDiffers => {
                s.printed_differs += 1;
                if !s.differing_ids.iter().any(|x| x == c.formula_id) {
                    s.differing_ids.push(c.formula_id.to_string());
                }
            }
            Verdict::NotStated => s.not_stated += 1,
        }
        if verdict != Verdict::Agree || !closed_ok {
            self.records.push(DiscrepancyRecord {
                schema: SCHEMA.to_string(),
                family: c.family.to_string(),
                formula_id: c.formula_id.to_string(),
                inputs: c.inputs.into_iter().map(|(k, v)| (k.to_string(), v)).collect(),
                closed_form: c.closed.map(|x| x.to_string()),
                printed: c.printed.or(c.reading).map(|x| x.to_string()),
                oracle: c.oracle.to_string(),
                closed_form_matches: closed_ok,
                verdict,
            });
        }
        verdict
    }

    pub fn merge(&mut self, other: Ledger) {
        self.records.extend(other.records);
        for (k, v) in other.families {
            let s = self.families.entry(k).or_default();
            s.checked += v.checked;
            s.closed_form_mismatches += v.closed_form_mismatches;
            s.agree += v.agree;
            s.sanctioned += v.sanctioned;
            s.convention += v.convention;
            s.printed_differs += v.printed_differs;
            s.not_stated += v.not_stated;
            for id in v.differing_ids {
                if !s.differing_ids.contains(&id) {
                    s.differing_ids.push(id);
                }
            }
        }
    }

    pub fn closed_form_mismatches(&self) -> u64 {
        self.families.values().map(|s| s.closed_form_mismatches).sum()
    }

    pub fn write_jsonl<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        for r in &self.records {
            serde_json::to_writer(&mut w, r)?;
            w.write_all(b"\n")?;
        }
        Ok(())
    }
}
