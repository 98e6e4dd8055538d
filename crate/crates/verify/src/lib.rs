//! Certification layer: statement checks, estimators, and reports.

pub mod check;
pub mod constants;
pub mod counterexample;
pub mod lemmas;
pub mod montecarlo;
pub mod report;
pub mod suites;
pub mod tech;
pub mod theorem;
pub mod transfer;

pub use check::{quad_slack, summarize, CheckResult};
pub use constants::{ConstantLedger, LambdaPack, SourceTag};
pub use lemmas::CheckCtx;
pub use report::{render_csv, render_jsonl, write_reports, CSV_HEADER};
pub use suites::{run_statement, run_suite, statement_ids, Suite, SuiteConfig, SuiteOutcome};
