//! Measure calculus for the central block: exact oracles, the Omega sets,
//! the case-split measures and the printed 3x3 minors.

pub mod minors;
pub mod dcases;
pub mod ledger;
pub mod omega;
pub mod oracle;
pub mod suite;

pub use minors::{compare_minor, column_triples, MinorComparison, SignMatch};
pub use dcases::{d_closed_form, d_measure, d_printed, d_set, phi_closed_form, phi_measure, ChartCounts, DProfile, PhiInput, Regime};
pub use ledger::{DiscrepancyRecord, Ledger, Verdict};
pub use omega::{omega_measures, omega_oracle, printed_minima, valuation_minima, OmegaContext, OmegaMeasures, ValuationMinima};
pub use oracle::{measure_exhaustive, measure_oracle, valuation_histogram, BcPoly, Condition, PadicSetSpec, Relation};
pub use suite::SuiteConfig;
