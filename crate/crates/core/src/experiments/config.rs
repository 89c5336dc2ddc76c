//! Flat `key = value` run configuration.

use std::f64::consts::{FRAC_PI_2, PI, TAU};
use std::fmt::Write as _;

use sha2::{Digest, Sha256};

use super::Experiment;
use crate::ensemble::{EnsembleSpec, Sampling};
use crate::entropy::{half_half_partition, uniform_partition, uniform_with_remainder, CoarseGraining, HalfHalfOrder};
use crate::error::{Error, Result};
use crate::spin_algebra::SpinSpace;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl Format {
    pub fn extension(&self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

/// Coarse-graining selection, resolved per dimension.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CgSpec {
    HalfHalf(HalfHalfOrder),
    Uniform(usize),
    /// Half-half where `d` allows it, otherwise blocks of two with the odd
    /// remainder merged into the last block.
    Auto,
}

impl CgSpec {
    pub fn build(&self, dim: usize) -> Result<CoarseGraining> {
        match *self {
            CgSpec::HalfHalf(order) => half_half_partition(dim, order),
            CgSpec::Uniform(mu) => uniform_partition(dim, mu),
            CgSpec::Auto if dim.is_multiple_of(8) => half_half_partition(dim, HalfHalfOrder::FineFirst),
            CgSpec::Auto => uniform_with_remainder(dim, 2.min(dim)),
        }
    }

    /// Label of the partition actually used at `dim`.
    pub fn label(&self, dim: usize) -> String {
        match *self {
            CgSpec::HalfHalf(HalfHalfOrder::FineFirst) => "half-half".into(),
            CgSpec::HalfHalf(HalfHalfOrder::CoarseFirst) => "half-half-coarse-first".into(),
            CgSpec::Uniform(mu) => format!("uniform:{mu}"),
            CgSpec::Auto if dim.is_multiple_of(8) => "half-half".into(),
            CgSpec::Auto if dim.is_multiple_of(2) || dim < 2 => "uniform:2".into(),
            CgSpec::Auto => "uniform:2+remainder".into(),
        }
    }

    fn canonical(&self) -> String {
        match *self {
            CgSpec::Auto => "auto".into(),
            other => other.label(0),
        }
    }
}

impl std::str::FromStr for CgSpec {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "half-half" => Ok(CgSpec::HalfHalf(HalfHalfOrder::FineFirst)),
            "half-half-coarse-first" => Ok(CgSpec::HalfHalf(HalfHalfOrder::CoarseFirst)),
            "auto" => Ok(CgSpec::Auto),
            _ => match s.strip_prefix("uniform:").map(str::parse::<usize>) {
                Some(Ok(mu)) if mu > 0 => Ok(CgSpec::Uniform(mu)),
                _ => Err(Error::Config(format!("unknown coarse_graining `{s}`"))),
            },
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub experiment: Experiment,
    pub spaces: Vec<SpinSpace>,
    pub kappas: Vec<f64>,
    pub alpha: f64,
    pub steps: usize,
    pub ensemble: EnsembleSpec,
    pub coarse_graining: CgSpec,
    pub delta: f64,
    pub format: Format,
    /// Inclusive step window for the saturation-approach fit.
    pub fit_window: (usize, usize),
    /// Trajectories per phase portrait.
    pub n_init: usize,
    /// Start of the fluctuation tail; derived from the Ehrenfest time when unset.
    pub tail_start: Option<usize>,
}

fn dims(ds: &[usize]) -> Vec<SpinSpace> {
    ds.iter().map(|&d| SpinSpace::from_dim(d).expect("default dimension")).collect()
}

impl RunConfig {
    /// Defaults for `experiment`, before any file or override is applied.
    pub fn defaults(experiment: Experiment) -> Self {
        let base = RunConfig {
            experiment,
            spaces: dims(&[400]),
            kappas: vec![7.0],
            alpha: FRAC_PI_2,
            steps: 50,
            ensemble: EnsembleSpec::default(),
            coarse_graining: CgSpec::HalfHalf(HalfHalfOrder::FineFirst),
            delta: crate::diagnostics::DEFAULT_FOTOC_DELTA,
            format: Format::Csv,
            fit_window: (0, 5),
            n_init: 200,
            tail_start: None,
        };
        match experiment {
            Experiment::Fig1PhaseSpace => RunConfig { kappas: vec![0.5, 2.5, 7.0], steps: 500, ..base },
            Experiment::Fig2OeVsMu => RunConfig { spaces: dims(&[1024]), kappas: vec![0.5, 2.5, 7.0], ..base },
            Experiment::Fig3OeDynamics => RunConfig { kappas: vec![0.5, 2.5, 4.0, 4.5, 7.0], ..base },
            Experiment::Fig4RatesVsKappa => RunConfig {
                spaces: dims(&[400, 1000]),
                kappas: (0..13).map(|i| 3.5 + 0.25 * i as f64).collect(),
                steps: 3,
                ..base
            },
            Experiment::Fig56SmallJ => RunConfig {
                spaces: (1..=9).step_by(2).map(SpinSpace::from_twice_j).collect(),
                kappas: vec![1.5 * PI],
                steps: 20,
                coarse_graining: CgSpec::Auto,
                ..base
            },
            Experiment::Fig7SaddleVsChaos => RunConfig { kappas: vec![2.5], steps: 200, ..base },
        }
    }

    /// Applies `key = value` pairs in order; later pairs win.
    pub fn from_pairs<'a>(experiment: Experiment, pairs: impl IntoIterator<Item = (&'a str, &'a str)>) -> Result<Self> {
        let mut cfg = Self::defaults(experiment);
        let mut dims_set = false;
        let mut j_set = false;
        for (key, value) in pairs {
            match key {
                "d" => dims_set = true,
                "j" => j_set = true,
                _ => {}
            }
            cfg.set(key, value)?;
        }
        if dims_set && j_set {
            return Err(Error::Config("give either `d` or `j`, not both".into()));
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Parses a config file body and applies `overrides` on top.
    pub fn parse(experiment: Experiment, text: &str, overrides: &[(String, String)]) -> Result<Self> {
        let mut pairs = parse_pairs(text)?;
        pairs.extend(overrides.iter().cloned());
        Self::from_pairs(experiment, pairs.iter().map(|(k, v)| (k.as_str(), v.as_str())))
    }

    fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let bad = |what: &str| Error::Config(format!("`{key}`: cannot parse `{value}` as {what}"));
        match key {
            "experiment" => {
                let named: Experiment = value.parse()?;
                if named != self.experiment {
                    return Err(Error::Config(format!(
                        "config is for `{}`, not `{}`",
                        named.name(),
                        self.experiment.name()
                    )));
                }
            }
            "d" => {
                self.spaces = list(value)
                    .map(|s| {
                        let d: usize = s.parse().map_err(|_| bad("a dimension"))?;
                        SpinSpace::from_dim(d).map_err(|e| Error::Config(e.to_string()))
                    })
                    .collect::<Result<_>>()?;
            }
            "j" => {
                self.spaces = list(value)
                    .map(|s| {
                        let j = parse_number(s).ok_or_else(|| bad("a spin"))?;
                        SpinSpace::from_j(j).map_err(|e| Error::Config(e.to_string()))
                    })
                    .collect::<Result<_>>()?;
            }
            "kappa" => {
                self.kappas = list(value).map(|s| parse_number(s).ok_or_else(|| bad("a number"))).collect::<Result<_>>()?;
            }
            "alpha" => self.alpha = parse_number(value).ok_or_else(|| bad("a number"))?,
            "steps" => self.steps = value.parse().map_err(|_| bad("a step count"))?,
            "count" => self.ensemble.count = value.parse().map_err(|_| bad("a count"))?,
            "seed" => self.ensemble.seed = value.parse().map_err(|_| bad("an unsigned integer"))?,
            "sampling" => self.ensemble.sampling = value.parse()?,
            "theta_min" => self.ensemble.theta_range.0 = parse_number(value).ok_or_else(|| bad("an angle"))?,
            "theta_max" => self.ensemble.theta_range.1 = parse_number(value).ok_or_else(|| bad("an angle"))?,
            "phi_min" => self.ensemble.phi_range.0 = parse_number(value).ok_or_else(|| bad("an angle"))?,
            "phi_max" => self.ensemble.phi_range.1 = parse_number(value).ok_or_else(|| bad("an angle"))?,
            "coarse_graining" => self.coarse_graining = value.parse()?,
            "delta" => self.delta = parse_number(value).ok_or_else(|| bad("a number"))?,
            "format" => {
                self.format = match value {
                    "csv" => Format::Csv,
                    "json" => Format::Json,
                    _ => return Err(bad("csv or json")),
                }
            }
            "fit_first" => self.fit_window.0 = value.parse().map_err(|_| bad("a step"))?,
            "fit_last" => self.fit_window.1 = value.parse().map_err(|_| bad("a step"))?,
            "n_init" => self.n_init = value.parse().map_err(|_| bad("a count"))?,
            "tail_start" => self.tail_start = Some(value.parse().map_err(|_| bad("a step"))?),
            _ => return Err(Error::Config(format!("unknown key `{key}`"))),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::Config(msg));
        if self.spaces.is_empty() {
            return fail("no dimensions given".into());
        }
        if self.experiment != Experiment::Fig1PhaseSpace && self.spaces.iter().any(|s| s.twice_j() == 0) {
            return fail("j = 0 has no dynamics".into());
        }
        if self.kappas.is_empty() {
            return fail("no kappa values given".into());
        }
        if let Some(k) = self.kappas.iter().find(|k| !k.is_finite() || **k < 0.0) {
            return fail(format!("kappa = {k} must be finite and non-negative"));
        }
        if !self.alpha.is_finite() {
            return fail(format!("alpha = {}", self.alpha));
        }
        if !self.delta.is_finite() {
            return fail(format!("delta = {}", self.delta));
        }
        if self.steps == 0 {
            return fail("steps must be at least 1".into());
        }
        self.ensemble.validate().map_err(|e| Error::Config(e.to_string()))?;
        let (first, last) = self.fit_window;
        match self.experiment {
            Experiment::Fig1PhaseSpace if self.n_init == 0 => return fail("n_init must be at least 1".into()),
            Experiment::Fig3OeDynamics if !(first < last && last <= self.steps) => {
                return fail(format!("fit window ({first}, {last}) must be increasing and within {} steps", self.steps));
            }
            Experiment::Fig4RatesVsKappa if self.steps < 3 => return fail("rates need at least 3 steps".into()),
            Experiment::Fig4RatesVsKappa if self.kappas.len() < 2 => return fail("a kappa fit needs two points".into()),
            Experiment::Fig7SaddleVsChaos => {
                if let Some(t) = self.tail_start {
                    if t > self.steps {
                        return fail(format!("tail_start {t} beyond {} steps", self.steps));
                    }
                }
            }
            _ => {}
        }
        if matches!(
            self.experiment,
            Experiment::Fig3OeDynamics | Experiment::Fig4RatesVsKappa | Experiment::Fig56SmallJ | Experiment::Fig7SaddleVsChaos
        ) {
            for s in &self.spaces {
                self.coarse_graining.build(s.dim()).map_err(|e| {
                    Error::Config(format!("coarse_graining `{}` at d = {}: {e}", self.coarse_graining.canonical(), s.dim()))
                })?;
            }
        }
        Ok(())
    }

    /// Every resolved field as sorted `key=value` lines.
    pub fn canonical(&self) -> String {
        let floats = |xs: &[f64]| xs.iter().map(|x| format!("{x:?}")).collect::<Vec<_>>().join(",");
        let e = &self.ensemble;
        let sampling = match e.sampling {
            Sampling::UniformThetaPhi => "uniform-theta-phi",
            Sampling::UniformSphere => "uniform-sphere",
        };
        let twice_j: Vec<String> = self.spaces.iter().map(|s| format!("{}/2", s.twice_j())).collect();
        let mut lines = vec![
            format!("alpha={:?}", self.alpha),
            format!("coarse_graining={}", self.coarse_graining.canonical()),
            format!("count={}", e.count),
            format!("delta={:?}", self.delta),
            format!("experiment={}", self.experiment.name()),
            format!("fit_first={}", self.fit_window.0),
            format!("fit_last={}", self.fit_window.1),
            format!("format={}", self.format.extension()),
            format!("j={}", twice_j.join(",")),
            format!("kappa={}", floats(&self.kappas)),
            format!("n_init={}", self.n_init),
            format!("phi_max={:?}", e.phi_range.1),
            format!("phi_min={:?}", e.phi_range.0),
            format!("sampling={sampling}"),
            format!("seed={}", e.seed),
            format!("steps={}", self.steps),
            format!("tail_start={}", self.tail_start.map_or("auto".into(), |t| t.to_string())),
            format!("theta_max={:?}", e.theta_range.1),
            format!("theta_min={:?}", e.theta_range.0),
        ];
        lines.sort();
        lines.iter().fold(String::new(), |mut acc, l| {
            let _ = writeln!(acc, "{l}");
            acc
        })
    }

    /// SHA-256 of [`canonical`](Self::canonical), hex encoded.
    pub fn hash(&self) -> String {
        Sha256::digest(self.canonical().as_bytes()).iter().fold(String::new(), |mut acc, b| {
            let _ = write!(acc, "{b:02x}");
            acc
        })
    }
}

fn list(value: &str) -> impl Iterator<Item = &str> {
    value.split(',').map(str::trim).filter(|s| !s.is_empty())
}

/// Lines of `key = value`; blank lines and `#` comments are skipped.
pub fn parse_pairs(text: &str) -> Result<Vec<(String, String)>> {
    text.lines()
        .enumerate()
        .filter_map(|(i, line)| {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                return None;
            }
            Some(parse_assignment(line).map_err(|e| Error::Config(format!("line {}: {e}", i + 1))))
        })
        .collect()
}

/// One `key=value`, as given on the command line.
pub fn parse_assignment(s: &str) -> Result<(String, String)> {
    let (k, v) = s.split_once('=').ok_or_else(|| Error::Config(format!("expected key=value, got `{s}`")))?;
    let (k, v) = (k.trim(), v.trim());
    if k.is_empty() {
        return Err(Error::Config(format!("empty key in `{s}`")));
    }
    Ok((k.to_string(), v.to_string()))
}

/// Plain numbers, fractions (`7/2`) and multiples of pi (`3pi/2`, `1.5*pi`, `pi`).
pub fn parse_number(s: &str) -> Option<f64> {
    let s = s.trim();
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim().parse::<f64>().ok()?),
        None => (s, 1.0),
    };
    let value = if let Some(coef) = num.strip_suffix("pi") {
        let coef = coef.trim().trim_end_matches('*').trim();
        let c = if coef.is_empty() { 1.0 } else { coef.parse::<f64>().ok()? };
        c * PI
    } else if num == "tau" {
        TAU
    } else {
        num.parse::<f64>().ok()?
    };
    let v = value / den;
    v.is_finite().then_some(v)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers() {
        assert_eq!(parse_number("2.5"), Some(2.5));
        assert_eq!(parse_number("7/2"), Some(3.5));
        assert_eq!(parse_number("3pi/2"), Some(1.5 * PI));
        assert_eq!(parse_number("1.5*pi"), Some(1.5 * PI));
        assert_eq!(parse_number("pi"), Some(PI));
        assert_eq!(parse_number("1/0"), None);
        assert_eq!(parse_number("abc"), None);
    }

    #[test]
    fn file_then_overrides() {
        let text = "# comment\nkappa = 4, 7\nseed=3 # trailing\n\nsteps = 10\n";
        let cfg = RunConfig::parse(Experiment::Fig3OeDynamics, text, &[("seed".into(), "9".into())]).unwrap();
        assert_eq!(cfg.kappas, vec![4.0, 7.0]);
        assert_eq!(cfg.ensemble.seed, 9);
        assert_eq!(cfg.steps, 10);
    }

    #[test]
    fn errors_are_config_errors() {
        let cases = [
            "bogus = 1",
            "kappa = x",
            "steps = 0",
            "d = 402",
            "d = 400\nj = 3",
            "count = 0",
            "format = xml",
            "experiment = fig2_oe_vs_mu",
            "no equals sign",
            "fit_last = 60",
            "coarse_graining = uniform:3",
        ];
        for text in cases {
            let err = RunConfig::parse(Experiment::Fig3OeDynamics, text, &[]).unwrap_err();
            assert_eq!(err.exit_code(), 2, "{text}: {err}");
        }
    }

    #[test]
    fn hash_tracks_content() {
        let a = RunConfig::defaults(Experiment::Fig3OeDynamics);
        let mut b = a.clone();
        assert_eq!(a.hash(), b.hash());
        b.ensemble.seed = 1;
        assert_ne!(a.hash(), b.hash());
        assert_eq!(a.hash().len(), 64);
    }

    #[test]
    fn auto_coarse_graining() {
        assert_eq!(CgSpec::Auto.build(8).unwrap().volumes(), vec![2, 2, 4]);
        assert_eq!(CgSpec::Auto.build(10).unwrap().volumes(), vec![2; 5]);
        assert_eq!(CgSpec::Auto.build(5).unwrap().volumes(), vec![2, 3]);
        assert_eq!(CgSpec::Auto.build(2).unwrap().volumes(), vec![2]);
        assert_eq!(CgSpec::Auto.label(5), "uniform:2+remainder");
    }
}
