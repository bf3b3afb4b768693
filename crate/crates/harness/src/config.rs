use std::fmt;
use std::path::Path;
use std::str::FromStr;

use anyhow::{bail, ensure, Context, Result};
use serde::{Deserialize, Serialize};
use twostep::actor_critic::{ActorStep, BasisGrid, CriticTrace, EpisodeConfig, PenaltyRule, TrainConfig};
use twostep::environment::{CostWeights, LinearPlant, Pendulum, PendulumParams, Plant};
use twostep::lqr::{CollectionSettings, GainMatrix, MomentRule};
use twostep::numerics::Mat;

/// Controller composition evaluated or trained by the harness.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Mode {
    #[serde(rename = "k+rl")]
    KRl,
    #[serde(rename = "k0+rl")]
    K0Rl,
    #[serde(rename = "rl")]
    RlAlone,
    #[serde(rename = "k")]
    KAlone,
    #[serde(rename = "k0")]
    K0Alone,
}

impl Mode {
    pub const ALL: [Mode; 5] = [Mode::KRl, Mode::K0Rl, Mode::RlAlone, Mode::KAlone, Mode::K0Alone];

    pub fn name(self) -> &'static str {
        match self {
            Mode::KRl => "k+rl",
            Mode::K0Rl => "k0+rl",
            Mode::RlAlone => "rl",
            Mode::KAlone => "k",
            Mode::K0Alone => "k0",
        }
    }

    pub fn learns(self) -> bool {
        matches!(self, Mode::KRl | Mode::K0Rl | Mode::RlAlone)
    }

    /// Whether the learned step-one gain is needed.
    pub fn uses_learned_gain(self) -> bool {
        matches!(self, Mode::KRl | Mode::KAlone)
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Mode {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_lowercase().replace(['_', ' '], "");
        Ok(match key.as_str() {
            "k+rl" | "krl" => Mode::KRl,
            "k0+rl" | "k0rl" => Mode::K0Rl,
            "rl" | "rlalone" | "rl-alone" => Mode::RlAlone,
            "k" | "kalone" | "k-alone" => Mode::KAlone,
            "k0" | "k0alone" | "k0-alone" => Mode::K0Alone,
            _ => bail!("unknown mode {s:?}; expected one of k+rl, k0+rl, rl, k, k0"),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PlantKind {
    /// nonlinear inverted pendulum
    Pendulum,
    /// its linearization about the upright equilibrium
    Linear,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MomentRuleName {
    Integrated,
    Trapezoid,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CriticTraceName {
    Previous,
    Current,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ActorStepName {
    VarianceScaled,
    Fixed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PendulumSection {
    pub length: f64,
    pub mass: f64,
    pub gravity: f64,
    pub friction: f64,
}

impl Default for PendulumSection {
    fn default() -> Self {
        let p = PendulumParams::<f64>::standard();
        Self {
            length: p.length,
            mass: p.mass,
            gravity: p.gravity,
            friction: p.friction,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WeightsSection {
    pub q: Vec<Vec<f64>>,
    pub r: Vec<Vec<f64>>,
}

impl Default for WeightsSection {
    fn default() -> Self {
        Self {
            q: vec![vec![100.0, 0.0], vec![0.0, 1.0]],
            r: vec![vec![1.0]],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Step1Section {
    /// initial stabilizing gain, one row per input
    pub k0: Vec<Vec<f64>>,
    /// number of data windows `l`
    pub windows: usize,
    pub window_length: f64,
    pub dt_sample: f64,
    pub x0: Vec<f64>,
    pub eps: f64,
    pub max_iter: usize,
    pub moment_rule: MomentRuleName,
    pub amplitude: f64,
    pub tones: usize,
    /// exploration frequencies are drawn from `[−range, range]` rad/s
    pub frequency_range: f64,
}

impl Default for Step1Section {
    fn default() -> Self {
        Self {
            k0: vec![vec![-2.87, -2.0]],
            windows: 10,
            window_length: 0.03,
            dt_sample: 0.003,
            x0: vec![0.0, 0.0],
            eps: 1e-3,
            max_iter: 50,
            moment_rule: MomentRuleName::Integrated,
            amplitude: 0.5,
            tones: 100,
            frequency_range: 500.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Step2Section {
    pub ts: f64,
    pub t_epi: f64,
    pub x0: Vec<f64>,
    pub gamma: f64,
    pub alpha: f64,
    pub beta: f64,
    pub lambda_theta: f64,
    pub lambda_w: f64,
    pub sigma2: f64,
    pub episodes: usize,
    /// state coordinate watched by the penalty rule
    pub penalty_coordinate: usize,
    pub penalty_bound: f64,
    pub penalty_reward: f64,
    pub critic_trace: CriticTraceName,
    pub actor_step: ActorStepName,
    pub grid_lower: Vec<f64>,
    pub grid_upper: Vec<f64>,
    pub grid_counts: Vec<usize>,
}

impl Default for Step2Section {
    fn default() -> Self {
        Self {
            ts: 0.03,
            t_epi: 3.0,
            x0: vec![0.4, 0.0],
            gamma: 0.9,
            alpha: 0.05,
            beta: 0.001,
            lambda_theta: 0.99,
            lambda_w: 0.99,
            sigma2: 0.05,
            episodes: 5000,
            penalty_coordinate: 0,
            penalty_bound: 0.5,
            penalty_reward: -100.0,
            critic_trace: CriticTraceName::Previous,
            actor_step: ActorStepName::VarianceScaled,
            grid_lower: vec![-0.5, -2.0],
            grid_upper: vec![0.5, 2.0],
            grid_counts: vec![11, 11],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepSection {
    pub betas: Vec<f64>,
    pub sigma2s: Vec<f64>,
    pub n_sim: usize,
    pub modes: Vec<Mode>,
}

impl Default for SweepSection {
    fn default() -> Self {
        Self {
            betas: vec![1e-4, 1e-3, 1e-2],
            sigma2s: vec![2.5e-2],
            n_sim: 20,
            modes: vec![Mode::KRl, Mode::K0Rl, Mode::RlAlone],
        }
    }
}

/// Thresholds that turn a deterministic rollout into success/failure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvaluationSection {
    /// `|x_final[i]| < settle_tolerance[i]` for success
    pub settle_tolerance: Vec<f64>,
}

impl Default for EvaluationSection {
    fn default() -> Self {
        Self {
            settle_tolerance: vec![0.05, 0.1],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub plant: PlantKind,
    pub pendulum: PendulumSection,
    pub weights: WeightsSection,
    pub step1: Step1Section,
    pub step2: Step2Section,
    pub sweep: SweepSection,
    pub evaluation: EvaluationSection,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            plant: PlantKind::Pendulum,
            pendulum: PendulumSection::default(),
            weights: WeightsSection::default(),
            step1: Step1Section::default(),
            step2: Step2Section::default(),
            sweep: SweepSection::default(),
            evaluation: EvaluationSection::default(),
        }
    }
}

fn matrix(rows: &[Vec<f64>], what: &str) -> Result<Mat<f64>> {
    ensure!(!rows.is_empty(), "{what} must have at least one row");
    let cols = rows[0].len();
    ensure!(rows.iter().all(|r| r.len() == cols), "{what} rows differ in length");
    Ok(Mat::from_rows(rows))
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::from_toml(&text).with_context(|| format!("in config {}", path.display()))
    }

    pub fn to_toml(&self) -> Result<String> {
        Ok(toml::to_string_pretty(self)?)
    }

    pub fn validate(&self) -> Result<()> {
        let s1 = &self.step1;
        let s2 = &self.step2;
        self.params()?;
        let weights = self.cost_weights()?;
        let n = weights.q.rows();
        let k0 = self.k0()?;
        ensure!(k0.state_dim() == n, "k0 has {} columns, Q is {n}x{n}", k0.state_dim());
        ensure!(k0.input_dim() == weights.r.rows(), "k0 rows must match R");
        ensure!(s1.windows >= 5, "step1.windows must be at least 5, got {}", s1.windows);
        ensure!(s1.x0.len() == n, "step1.x0 must have {n} entries");
        ensure!(s1.eps > 0.0, "step1.eps must be positive");
        ensure!(s1.max_iter >= 1, "step1.max_iter must be at least 1");
        ensure!(s1.amplitude >= 0.0 && s1.frequency_range > 0.0, "exploration amplitude/range invalid");
        self.collection().steps_per_window()?;

        ensure!((0.0..=1.0).contains(&s2.gamma), "step2.gamma must lie in [0, 1], got {}", s2.gamma);
        for (name, v) in [("alpha", s2.alpha), ("beta", s2.beta)] {
            ensure!(v > 0.0 && v < 1.0, "step2.{name} must lie in (0, 1), got {v}");
        }
        for (name, v) in [("lambda_theta", s2.lambda_theta), ("lambda_w", s2.lambda_w)] {
            ensure!((0.0..1.0).contains(&v), "step2.{name} must lie in [0, 1), got {v}");
        }
        ensure!(s2.sigma2 > 0.0, "step2.sigma2 must be positive");
        ensure!(s2.x0.len() == n, "step2.x0 must have {n} entries");
        ensure!(s2.penalty_coordinate < n, "step2.penalty_coordinate out of range");
        ensure!(s2.penalty_bound > 0.0, "step2.penalty_bound must be positive");
        self.episode_config().validate()?;
        let grid = self.grid()?;
        ensure!(grid.state_dim() == n, "basis grid must be {n}-dimensional");

        ensure!(self.sweep.n_sim >= 1, "sweep.n_sim must be at least 1");
        ensure!(!self.sweep.betas.is_empty() && !self.sweep.sigma2s.is_empty(), "sweep grids must be non-empty");
        ensure!(
            self.sweep.betas.iter().all(|&b| b > 0.0 && b < 1.0),
            "sweep.betas must lie in (0, 1)"
        );
        ensure!(self.sweep.sigma2s.iter().all(|&s| s > 0.0), "sweep.sigma2s must be positive");
        ensure!(self.evaluation.settle_tolerance.len() == n, "evaluation.settle_tolerance must have {n} entries");
        Ok(())
    }

    pub fn params(&self) -> Result<PendulumParams<f64>> {
        let p = PendulumParams {
            length: self.pendulum.length,
            mass: self.pendulum.mass,
            gravity: self.pendulum.gravity,
            friction: self.pendulum.friction,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn build_plant(&self) -> Result<Box<dyn Plant<f64>>> {
        let pendulum = Pendulum::new(self.params()?)?;
        Ok(match self.plant {
            PlantKind::Pendulum => Box::new(pendulum),
            PlantKind::Linear => {
                let (a, b) = pendulum.linearize();
                Box::new(LinearPlant::new(a, b)?)
            }
        })
    }

    /// Linearization used by the model-based reference and stability checks.
    pub fn linearization(&self) -> Result<(Mat<f64>, Mat<f64>)> {
        Ok(Pendulum::new(self.params()?)?.linearize())
    }

    pub fn cost_weights(&self) -> Result<CostWeights<f64>> {
        Ok(CostWeights::new(
            matrix(&self.weights.q, "weights.q")?,
            matrix(&self.weights.r, "weights.r")?,
        )?)
    }

    pub fn k0(&self) -> Result<GainMatrix<f64>> {
        Ok(GainMatrix::new(matrix(&self.step1.k0, "step1.k0")?)?)
    }

    pub fn collection(&self) -> CollectionSettings<f64> {
        CollectionSettings {
            windows: self.step1.windows,
            window_length: self.step1.window_length,
            dt_sample: self.step1.dt_sample,
            x0: Some(self.step1.x0.clone()),
            rule: match self.step1.moment_rule {
                MomentRuleName::Integrated => MomentRule::Integrated,
                MomentRuleName::Trapezoid => MomentRule::Trapezoid,
            },
        }
    }

    pub fn grid(&self) -> Result<BasisGrid<f64>> {
        let s2 = &self.step2;
        Ok(BasisGrid::uniform(&s2.grid_lower, &s2.grid_upper, &s2.grid_counts)?)
    }

    pub fn episode_config(&self) -> EpisodeConfig<f64> {
        let s2 = &self.step2;
        EpisodeConfig {
            ts: s2.ts,
            t_epi: s2.t_epi,
            x0: s2.x0.clone(),
            gamma: s2.gamma,
            weights: self.cost_weights().unwrap_or_else(|_| CostWeights::pendulum_default()),
            penalty: Some(PenaltyRule {
                coordinate: s2.penalty_coordinate,
                bound: s2.penalty_bound,
                reward: s2.penalty_reward,
            }),
            critic_trace: match s2.critic_trace {
                CriticTraceName::Previous => CriticTrace::Previous,
                CriticTraceName::Current => CriticTrace::Current,
            },
        }
    }

    pub fn train_config(&self) -> TrainConfig<f64> {
        let s2 = &self.step2;
        TrainConfig {
            episode: self.episode_config(),
            alpha: s2.alpha,
            beta: s2.beta,
            lambda_theta: s2.lambda_theta,
            lambda_w: s2.lambda_w,
            sigma2: s2.sigma2,
            episodes: s2.episodes,
            actor_step: match s2.actor_step {
                ActorStepName::VarianceScaled => ActorStep::VarianceScaled,
                ActorStepName::Fixed => ActorStep::Fixed,
            },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate_and_round_trip() {
        let cfg = ExperimentConfig::default();
        cfg.validate().unwrap();
        let text = cfg.to_toml().unwrap();
        assert_eq!(ExperimentConfig::from_toml(&text).unwrap(), cfg);
    }

    #[test]
    fn partial_config_fills_defaults() {
        let cfg = ExperimentConfig::from_toml("seed = 7\n[step2]\nepisodes = 10\n").unwrap();
        assert_eq!(cfg.seed, 7);
        assert_eq!(cfg.step2.episodes, 10);
        assert_eq!(cfg.step2.beta, 0.001);
        assert_eq!(cfg.step1.k0, vec![vec![-2.87, -2.0]]);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(ExperimentConfig::from_toml("sede = 1\n").is_err());
        assert!(ExperimentConfig::from_toml("[step2]\nbeta2 = 0.1\n").is_err());
    }

    #[test]
    fn out_of_range_values_are_rejected() {
        for text in [
            "[step2]\ngamma = 1.5\n",
            "[step1]\nwindows = 4\n",
            "[sweep]\nn_sim = 0\n",
            "[step2]\nbeta = 0.0\n",
            "[step1]\nk0 = [[1.0, 2.0, 3.0]]\n",
        ] {
            assert!(ExperimentConfig::from_toml(text).is_err(), "{text}");
        }
    }

    #[test]
    fn modes_parse_and_serialize() {
        for mode in Mode::ALL {
            assert_eq!(mode.name().parse::<Mode>().unwrap(), mode);
        }
        assert_eq!("RL-alone".parse::<Mode>().unwrap(), Mode::RlAlone);
        assert!("pid".parse::<Mode>().is_err());
        let cfg = ExperimentConfig::from_toml("[sweep]\nmodes = [\"k+rl\", \"rl\"]\n").unwrap();
        assert_eq!(cfg.sweep.modes, vec![Mode::KRl, Mode::RlAlone]);
    }
}
