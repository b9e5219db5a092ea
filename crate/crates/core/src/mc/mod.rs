//! Deterministic parallel Monte-Carlo harness for the rejection-frequency
//! figures, the spherical-mean study, and the law and LAN checks.
//!
//! Each replicate draws its sample from its own stream, labelled
//! `[figure, ℓ, r, block, replicate]` with `block` the sample size. All tests
//! of a cell are evaluated on the same sample. Replicates run in parallel and
//! only integer rejection counts are reduced, so results do not depend on
//! the number of worker threads.

mod checks;
mod csv;
mod figures;
mod spec;
mod thm21;

pub use checks::{lan_error_study, wald_law_check, LanErrorRow, WaldLawCheck};
pub use csv::format_sig;
pub use figures::{asymptotic_rejection, run_figure, run_figure1, run_figure2, run_figure3};
pub use spec::{ExperimentSpec, Figure, FAST_REPLICATES, MIN_REPLICATES};
pub use thm21::{run_thm21_study, Thm21Result, Thm21Row};

use std::fmt::Write as _;

/// One cell of a rejection-frequency study.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub figure: Figure,
    pub ell: u32,
    pub r: u32,
    pub test: String,
    pub n: usize,
    pub replicates: usize,
    pub alpha: f64,
    pub rejections: usize,
    pub asym_power: Option<f64>,
    pub seed: u64,
}

impl ResultRow {
    pub fn reject_freq(&self) -> f64 {
        self.rejections as f64 / self.replicates as f64
    }

    /// `√(f(1-f)/M)`.
    pub fn stderr(&self) -> f64 {
        let f = self.reject_freq();
        (f * (1.0 - f) / self.replicates as f64).sqrt()
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ExperimentResult {
    pub rows: Vec<ResultRow>,
}

pub const RESULT_HEADER: &str = "figure,ell,r,test,n,M,alpha,reject_freq,stderr,asym_power,seed";

impl ExperimentResult {
    pub fn find(&self, ell: u32, r: u32, test: &str, n: usize) -> Option<&ResultRow> {
        self.rows
            .iter()
            .find(|row| row.ell == ell && row.r == r && row.test == test && row.n == n)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(RESULT_HEADER);
        out.push('\n');
        for row in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{},{}",
                row.figure,
                row.ell,
                row.r,
                row.test,
                row.n,
                row.replicates,
                format_sig(row.alpha),
                format_sig(row.reject_freq()),
                format_sig(row.stderr()),
                row.asym_power.map(format_sig).unwrap_or_default(),
                row.seed
            );
        }
        out
    }
}
