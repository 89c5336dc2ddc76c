//! Named, configuration-driven experiment runs and their file outputs.

pub mod config;
mod figures;
pub mod output;

use std::path::{Path, PathBuf};

pub use config::{CgSpec, Format, RunConfig};
pub use figures::*;
pub use output::{RunHeader, Table, Value};

use crate::error::{Error, Result};

pub const CODE_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Experiment {
    Fig1PhaseSpace,
    Fig2OeVsMu,
    Fig3OeDynamics,
    Fig4RatesVsKappa,
    Fig56SmallJ,
    Fig7SaddleVsChaos,
}

impl Experiment {
    pub const ALL: [Experiment; 6] = [
        Experiment::Fig1PhaseSpace,
        Experiment::Fig2OeVsMu,
        Experiment::Fig3OeDynamics,
        Experiment::Fig4RatesVsKappa,
        Experiment::Fig56SmallJ,
        Experiment::Fig7SaddleVsChaos,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Experiment::Fig1PhaseSpace => "fig1_phase_space",
            Experiment::Fig2OeVsMu => "fig2_oe_vs_mu",
            Experiment::Fig3OeDynamics => "fig3_oe_dynamics",
            Experiment::Fig4RatesVsKappa => "fig4_rates_vs_kappa",
            Experiment::Fig56SmallJ => "fig56_small_j",
            Experiment::Fig7SaddleVsChaos => "fig7_saddle_vs_chaos",
        }
    }

    pub fn description(&self) -> &'static str {
        match self {
            Experiment::Fig1PhaseSpace => "classical phase portraits of the kicked top",
            Experiment::Fig2OeVsMu => "ensemble OE against uniform coarse-graining length, evolved and unevolved",
            Experiment::Fig3OeDynamics => "ensemble OE against kicks, with saturation-approach fits",
            Experiment::Fig4RatesVsKappa => "early OE and OTOC growth rates against kick strength",
            Experiment::Fig56SmallJ => "OTOC and OE dynamics for small spins",
            Experiment::Fig7SaddleVsChaos => "long-time FOTOC and OE from a saddle and a chaotic point",
        }
    }
}

impl std::str::FromStr for Experiment {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Experiment::ALL
            .into_iter()
            .find(|e| e.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown experiment `{s}` (see `qkt-oe list`)")))
    }
}

#[derive(Clone, Debug)]
pub struct RunOutput {
    pub header: RunHeader,
    pub tables: Vec<Table>,
}

impl RunOutput {
    pub fn table(&self, name: &str) -> Option<&Table> {
        self.tables.iter().find(|t| t.name == name)
    }

    pub fn render(&self, name: &str, format: Format) -> Result<Vec<u8>> {
        let t = self.table(name).ok_or_else(|| Error::Config(format!("no table `{name}`")))?;
        output::render(&self.header, t, format)
    }

    pub fn write(&self, dir: &Path, format: Format) -> Result<Vec<PathBuf>> {
        output::write_tables(&self.header, &self.tables, dir, format)
    }
}

pub fn header(cfg: &RunConfig) -> RunHeader {
    RunHeader {
        experiment: cfg.experiment.name().to_string(),
        config_hash: cfg.hash(),
        seed: cfg.ensemble.seed,
        code_version: CODE_VERSION.to_string(),
    }
}

/// Runs `cfg` on the current rayon pool.
pub fn run(cfg: &RunConfig) -> Result<RunOutput> {
    cfg.validate()?;
    let tables = match cfg.experiment {
        Experiment::Fig1PhaseSpace => fig1_tables(cfg, &fig1_phase_space(cfg)?),
        Experiment::Fig2OeVsMu => fig2_tables(cfg, &fig2_oe_vs_mu(cfg)?),
        Experiment::Fig3OeDynamics => fig3_tables(cfg, &fig3_oe_dynamics(cfg)?),
        Experiment::Fig4RatesVsKappa => fig4_tables(cfg, &fig4_rates_vs_kappa(cfg)?),
        Experiment::Fig56SmallJ => fig56_tables(cfg, &fig56_small_j(cfg)?),
        Experiment::Fig7SaddleVsChaos => fig7_tables(cfg, &fig7_saddle_vs_chaos(cfg)?),
    };
    Ok(RunOutput { header: header(cfg), tables })
}

/// Runs `cfg` on a dedicated pool of `threads` workers (0 means all cores).
pub fn run_with_threads(cfg: &RunConfig, threads: usize) -> Result<RunOutput> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    pool.install(|| run(cfg))
}
