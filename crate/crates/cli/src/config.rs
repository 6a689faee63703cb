use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, ensure, Context, Result};
use predcorr::problems::{
    make_matrix_game, make_multiblock_quadratic, make_saddle_quadratic, make_two_block_l1, make_two_block_quadratic,
    matching_pennies, UniformSource,
};
use predcorr::{Family, InstanceDocument, InstanceSpec, Mode, SaddleSpec, VariationalInstance};
use serde::Deserialize;

pub const DEFAULT_BUDGET: usize = 2000;
pub const DEFAULT_TAU_INIT: f64 = 0.5;
pub const DEFAULT_SEED: u64 = 1;

/// Seeded instance generator with its parameters. Omitted parameters take
/// the defaults used in `build`.
#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(tag = "name", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Generator {
    TwoBlockQuadratic {
        n1: Option<usize>,
        n2: Option<usize>,
        l: Option<usize>,
    },
    TwoBlockL1 {
        n: Option<usize>,
        mu: Option<f64>,
    },
    MultiBlockQuadratic {
        n: Option<Vec<usize>>,
        l: Option<usize>,
    },
    SaddleQuadratic {
        n: Option<usize>,
        m: Option<usize>,
    },
    /// Random payoff matrix; no equilibrium is attached, so gaps are not reported.
    MatrixGame {
        rows: Option<usize>,
        cols: Option<usize>,
    },
    /// `rs = step_factor · ρ(AᵀA)` with `r = s`.
    MatchingPennies {
        step_factor: Option<f64>,
        alpha: Option<f64>,
    },
}

impl Generator {
    pub const NAMES: [&'static str; 6] = [
        "two-block-quadratic",
        "two-block-l1",
        "multi-block-quadratic",
        "saddle-quadratic",
        "matrix-game",
        "matching-pennies",
    ];

    /// The generator with all parameters at their defaults.
    pub fn named(name: &str) -> Result<Self> {
        serde_json::from_value(serde_json::json!({ "name": name }))
            .with_context(|| format!("unknown generator {name:?}; expected one of {}", Self::NAMES.join(", ")))
    }

    pub fn build(&self, seed: u64) -> Result<VariationalInstance> {
        let instance = match self {
            Generator::TwoBlockQuadratic { n1, n2, l } => {
                make_two_block_quadratic(seed, n1.unwrap_or(3), n2.unwrap_or(2), l.unwrap_or(4))?
            }
            Generator::TwoBlockL1 { n, mu } => make_two_block_l1(seed, n.unwrap_or(6), mu.unwrap_or(0.5))?,
            Generator::MultiBlockQuadratic { n, l } => {
                make_multiblock_quadratic(seed, n.as_deref().unwrap_or(&[2, 2, 2]), l.unwrap_or(3))?
            }
            Generator::SaddleQuadratic { n, m } => make_saddle_quadratic(seed, n.unwrap_or(3), m.unwrap_or(2))?,
            Generator::MatrixGame { rows, cols } => {
                let (rows, cols) = (rows.unwrap_or(3), cols.unwrap_or(4));
                ensure!(rows > 0 && cols > 0, "matrix game needs at least one row and column");
                make_matrix_game(UniformSource::new(seed).matrix(rows, cols))?
            }
            Generator::MatchingPennies { step_factor, alpha } => {
                let game = matching_pennies();
                let InstanceSpec::Saddle(spec) = game.spec().clone() else { unreachable!() };
                let rho = spec.step_threshold() / (1.0 - spec.alpha + spec.alpha * spec.alpha);
                let factor = step_factor.unwrap_or(0.8);
                ensure!(factor > 0.0 && factor.is_finite(), "step_factor must be positive, got {factor}");
                let step = (factor * rho).sqrt();
                let spec = SaddleSpec { r: step, s: step, alpha: alpha.unwrap_or(0.5), ..spec };
                VariationalInstance::new(InstanceSpec::Saddle(spec), game.w_star().map(|w| w.values().clone()), None)?
            }
        };
        Ok(instance)
    }
}

/// Run configuration as read from `--config`. Field names match the flags.
#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub generator: Option<Generator>,
    pub seed: Option<u64>,
    pub instance: Option<PathBuf>,
    pub family: Option<Family>,
    pub mode: Option<Mode>,
    pub budget: Option<usize>,
    pub tau_init: Option<f64>,
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub override_uncertified: bool,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        let mut config: RunConfig =
            serde_json::from_str(&text).with_context(|| format!("parsing config {}", path.display()))?;
        // instance paths are relative to the config file
        if let (Some(inst), Some(dir)) = (&config.instance, path.parent()) {
            if inst.is_relative() {
                config.instance = Some(dir.join(inst));
            }
        }
        Ok(config)
    }

    /// Overlay command-line values. A source given on the command line
    /// replaces the configured one.
    pub fn merge(mut self, other: RunConfig) -> Self {
        if other.generator.is_some() || other.instance.is_some() {
            self.generator = other.generator;
            self.instance = other.instance;
        }
        self.seed = other.seed.or(self.seed);
        self.family = other.family.or(self.family);
        self.mode = other.mode.or(self.mode);
        self.budget = other.budget.or(self.budget);
        self.tau_init = other.tau_init.or(self.tau_init);
        self.out = other.out.or(self.out);
        self.override_uncertified |= other.override_uncertified;
        self
    }

    pub fn budget(&self) -> Result<usize> {
        let budget = self.budget.unwrap_or(DEFAULT_BUDGET);
        ensure!(budget >= 1, "budget must be at least 1");
        Ok(budget)
    }

    pub fn tau_init(&self) -> Result<f64> {
        let tau = self.tau_init.unwrap_or(DEFAULT_TAU_INIT);
        ensure!(tau > 0.0 && tau < 1.0, "tau_init must lie in (0, 1), got {tau}");
        Ok(tau)
    }

    pub fn mode(&self) -> Mode {
        self.mode.unwrap_or(Mode::Baseline)
    }

    pub fn out_dir(&self) -> Result<&Path> {
        self.out.as_deref().context("an output directory is required (--out)")
    }

    pub fn instance(&self) -> Result<VariationalInstance> {
        let instance = match (&self.generator, &self.instance) {
            (Some(_), Some(_)) => bail!("give either a generator or an instance file, not both"),
            (None, None) => bail!("no instance source: pass --generator or --instance"),
            (Some(g), None) => g.build(self.seed.unwrap_or(DEFAULT_SEED))?,
            (None, Some(path)) => {
                ensure!(self.seed.is_none(), "--seed only applies to generators");
                load_instance(path)?
            }
        };
        if let Some(family) = self.family {
            ensure!(
                family == instance.family(),
                "config asks for the {family} solver but the instance is {}",
                instance.family()
            );
        }
        Ok(instance)
    }
}

pub fn load_instance(path: &Path) -> Result<VariationalInstance> {
    let text = fs::read_to_string(path).with_context(|| format!("reading instance {}", path.display()))?;
    let doc: InstanceDocument =
        serde_json::from_str(&text).with_context(|| format!("parsing instance {}", path.display()))?;
    VariationalInstance::from_document(doc).with_context(|| format!("building instance {}", path.display()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generator_defaults_and_params() {
        assert_eq!(Generator::named("two-block-l1").unwrap(), Generator::TwoBlockL1 { n: None, mu: None });
        assert!(Generator::named("nope").is_err());
        let g: Generator = serde_json::from_str(r#"{"name":"multi-block-quadratic","n":[1,2],"l":2}"#).unwrap();
        assert_eq!(g.build(3).unwrap().layout().num_blocks(), 3);
        assert!(serde_json::from_str::<Generator>(r#"{"name":"two-block-l1","bogus":1}"#).is_err());
        for name in Generator::NAMES {
            Generator::named(name).unwrap().build(2).unwrap();
        }
    }

    #[test]
    fn merge_replaces_source() {
        let base = RunConfig { instance: Some("a.json".into()), budget: Some(5), ..Default::default() };
        let cli = RunConfig { generator: Some(Generator::named("matching-pennies").unwrap()), ..Default::default() };
        let merged = base.merge(cli);
        assert!(merged.instance.is_none());
        assert_eq!(merged.budget, Some(5));
    }

    #[test]
    fn validation() {
        let bad_tau = RunConfig { tau_init: Some(1.0), ..Default::default() };
        assert!(bad_tau.tau_init().is_err());
        let bad_budget = RunConfig { budget: Some(0), ..Default::default() };
        assert!(bad_budget.budget().is_err());
        assert!(RunConfig::default().instance().is_err());
        let both = RunConfig {
            generator: Some(Generator::named("matching-pennies").unwrap()),
            instance: Some("x.json".into()),
            ..Default::default()
        };
        assert!(both.instance().is_err());
        let wrong = RunConfig {
            generator: Some(Generator::named("matching-pennies").unwrap()),
            family: Some(Family::TwoBlock),
            ..Default::default()
        };
        assert!(wrong.instance().is_err());
    }
}
