use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::limits::DEFAULT_MC_DRAWS;
use crate::model::{RadialFunction, RegimeKind};
use crate::sampling::DEFAULT_SEED;
use crate::stats::TestKind;

/// Replicates per cell with `--fast`.
pub const FAST_REPLICATES: usize = 2_000;

/// Smallest replicate count accepted by [`ExperimentSpec::validate`].
pub const MIN_REPLICATES: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Figure {
    /// Null rejection rates of Watson and Wald as `E[X'θ] = n^{-ℓ/6}/√p`
    /// shrinks, `ℓ = 0..5`.
    Fig1,
    /// Power against the alternatives of [`crate::model::local_alternative`]
    /// with `E[X'θ] = n^{-ℓ/4}/√p`, `ℓ = 0..3`.
    Fig2,
    /// Watson against the oracle test under contiguity.
    Fig3,
    /// Limit laws of the spherical mean in the four regimes.
    Thm21,
}

impl Figure {
    pub fn name(&self) -> &'static str {
        match self {
            Figure::Fig1 => "fig1",
            Figure::Fig2 => "fig2",
            Figure::Fig3 => "fig3",
            Figure::Thm21 => "thm21",
        }
    }

    /// Label mixed into every random stream of the figure.
    pub(crate) fn code(&self) -> u64 {
        match self {
            Figure::Fig1 => 1,
            Figure::Fig2 => 2,
            Figure::Fig3 => 3,
            Figure::Thm21 => 21,
        }
    }
}

impl fmt::Display for Figure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Figure {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "fig1" | "1" => Ok(Figure::Fig1),
            "fig2" | "2" => Ok(Figure::Fig2),
            "fig3" | "3" => Ok(Figure::Fig3),
            "thm21" => Ok(Figure::Thm21),
            other => Err(Error::Config {
                key: "figure".into(),
                message: format!("unknown figure `{other}` (expected fig1, fig2, fig3 or thm21)"),
            }),
        }
    }
}

/// Full description of one simulation study.
#[derive(Debug, Clone)]
pub struct ExperimentSpec {
    pub figure: Figure,
    pub p: usize,
    pub ns: Vec<usize>,
    /// Replicates per cell (`M`).
    pub replicates: usize,
    pub alpha: f64,
    pub seed: u64,
    pub xi: f64,
    pub radial: RadialFunction,
    pub ells: Vec<u32>,
    pub rs: Vec<u32>,
    /// Draws behind every Monte-Carlo critical value.
    pub mc_draws: usize,
    /// Regimes covered by the spherical-mean study.
    pub regimes: Vec<RegimeKind>,
}

impl ExperimentSpec {
    /// Built-in defaults reproducing each figure.
    pub fn preset(figure: Figure) -> Self {
        let base = ExperimentSpec {
            figure,
            p: 3,
            ns: vec![200],
            replicates: 10_000,
            alpha: 0.05,
            seed: DEFAULT_SEED,
            xi: 1.0,
            radial: RadialFunction::fvml(),
            ells: vec![],
            rs: vec![0],
            mc_draws: DEFAULT_MC_DRAWS,
            regimes: vec![],
        };
        match figure {
            Figure::Fig1 => ExperimentSpec {
                ns: vec![100, 1000],
                ells: (0..=5).collect(),
                ..base
            },
            Figure::Fig2 => ExperimentSpec {
                ells: (0..=3).collect(),
                rs: (0..=6).collect(),
                ..base
            },
            Figure::Fig3 => ExperimentSpec {
                ells: vec![2],
                rs: (0..=6).collect(),
                ..base
            },
            Figure::Thm21 => ExperimentSpec {
                ns: vec![10_000],
                replicates: 5_000,
                regimes: vec![
                    RegimeKind::AwayFromUniformity,
                    RegimeKind::BeyondContiguity,
                    RegimeKind::UnderContiguity,
                    RegimeKind::StrictContiguity,
                ],
                ..base
            },
        }
    }

    /// Reduces the replicate count to [`FAST_REPLICATES`].
    pub fn fast(mut self) -> Self {
        self.replicates = self.replicates.min(FAST_REPLICATES);
        self
    }

    /// Tests run in each cell, in output order.
    pub fn tests(&self) -> Vec<TestKind> {
        match self.figure {
            Figure::Fig1 => vec![TestKind::Watson, TestKind::Wald],
            Figure::Fig2 => vec![
                TestKind::Watson,
                TestKind::Wald,
                TestKind::ContiguityWald,
                TestKind::StrictContiguityWald,
            ],
            Figure::Fig3 => vec![TestKind::Watson, TestKind::Oracle],
            Figure::Thm21 => vec![],
        }
    }

    pub fn validate(&self) -> Result<()> {
        let err = |key: &str, message: String| {
            Err(Error::Config {
                key: key.into(),
                message,
            })
        };
        if self.p < 2 {
            return err("p", format!("dimension must be >= 2, got {}", self.p));
        }
        if matches!(self.figure, Figure::Fig2 | Figure::Fig3) && self.p != 3 {
            return err("p", "the alternatives of fig2 and fig3 live on S^2 (p = 3)".into());
        }
        if self.ns.is_empty() || self.ns.iter().any(|&n| n < 2) {
            return err("n", "need one or more sample sizes, each >= 2".into());
        }
        if self.replicates < MIN_REPLICATES {
            return err("M", format!("need M >= {MIN_REPLICATES}, got {}", self.replicates));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return err("alpha", format!("alpha must lie in (0, 1), got {}", self.alpha));
        }
        if !(self.xi.is_finite() && self.xi > 0.0) {
            return err("xi", format!("xi must be > 0, got {}", self.xi));
        }
        if self.figure != Figure::Thm21 && self.xi != 1.0 {
            return err("xi", format!("{} is defined with xi = 1", self.figure));
        }
        let max_ell = match self.figure {
            Figure::Fig1 => 5,
            Figure::Fig2 => 3,
            Figure::Fig3 => 2,
            Figure::Thm21 => u32::MAX,
        };
        if self.figure != Figure::Thm21 && (self.ells.is_empty() || self.ells.iter().any(|&l| l > max_ell)) {
            return err("ell", format!("{} needs ell values in 0..={max_ell}", self.figure));
        }
        if self.figure == Figure::Fig3 && self.ells != [2] {
            return err("ell", "fig3 is defined under contiguity (ell = 2 only)".into());
        }
        if self.rs.is_empty() || self.rs.iter().any(|&r| r > 6) {
            return err("r", "r values must lie in 0..=6".into());
        }
        if self.mc_draws < 1000 {
            return err("mc_draws", format!("need at least 1000 draws, got {}", self.mc_draws));
        }
        if self.figure == Figure::Thm21 && self.regimes.is_empty() {
            return err("regimes", "list one or more regimes".into());
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_are_valid() {
        for f in [Figure::Fig1, Figure::Fig2, Figure::Fig3, Figure::Thm21] {
            ExperimentSpec::preset(f).validate().unwrap();
            assert_eq!(f.name().parse::<Figure>().unwrap(), f);
        }
        assert_eq!(ExperimentSpec::preset(Figure::Fig1).fast().replicates, FAST_REPLICATES);
        let mut bad = ExperimentSpec::preset(Figure::Fig2);
        bad.ells = vec![4];
        assert!(matches!(bad.validate(), Err(Error::Config { key, .. }) if key == "ell"));
    }
}
