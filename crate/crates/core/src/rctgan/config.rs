use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub epochs: usize,
    /// Must be a multiple of `pac`.
    pub batch_size: usize,
    pub z_dim: usize,
    /// Rows scored together by one critic evaluation.
    pub pac: usize,
    /// Weight of the gradient penalty; zero disables it.
    pub penalty_weight: f64,
    /// Critic weight clipping, the fallback when the penalty is disabled.
    pub weight_clip: Option<f64>,
    /// Dropout after each critic hidden layer; needs the penalty disabled.
    pub critic_dropout: f64,
    pub critic_steps: usize,
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub generator_hidden: Vec<usize>,
    pub critic_hidden: Vec<usize>,
    /// 1 conditions on parents, 2 also on grandparents.
    pub max_depth: usize,
    pub max_modes: usize,
    /// When false every table is modelled without its ancestors.
    pub condition_on_ancestors: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            epochs: 300,
            batch_size: 500,
            z_dim: 128,
            pac: 10,
            penalty_weight: 10.0,
            weight_clip: None,
            critic_dropout: 0.0,
            critic_steps: 1,
            learning_rate: 2e-4,
            beta1: 0.5,
            beta2: 0.9,
            generator_hidden: vec![256, 256],
            critic_hidden: vec![256, 256],
            max_depth: 1,
            max_modes: 10,
            condition_on_ancestors: true,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), String> {
        let positive = [
            ("epochs", self.epochs),
            ("batch_size", self.batch_size),
            ("z_dim", self.z_dim),
            ("pac", self.pac),
            ("critic_steps", self.critic_steps),
            ("max_modes", self.max_modes),
        ];
        for (name, v) in positive {
            if v == 0 {
                return Err(format!("{name} must be positive"));
            }
        }
        if self.batch_size % self.pac != 0 {
            return Err(format!("batch_size {} is not a multiple of pac {}", self.batch_size, self.pac));
        }
        if !(1..=2).contains(&self.max_depth) {
            return Err(format!("max_depth must be 1 or 2, got {}", self.max_depth));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err("learning_rate must be positive".into());
        }
        for (name, b) in [("beta1", self.beta1), ("beta2", self.beta2)] {
            if !(0.0..1.0).contains(&b) {
                return Err(format!("{name} must lie in [0, 1)"));
            }
        }
        if !(self.penalty_weight >= 0.0 && self.penalty_weight.is_finite()) {
            return Err("penalty_weight must be non-negative".into());
        }
        if let Some(c) = self.weight_clip {
            if !(c > 0.0 && c.is_finite()) {
                return Err("weight_clip must be positive".into());
            }
        }
        if !(0.0..1.0).contains(&self.critic_dropout) {
            return Err("critic_dropout must lie in [0, 1)".into());
        }
        if self.critic_dropout > 0.0 && self.penalty_weight > 0.0 {
            return Err("critic_dropout requires penalty_weight 0 (use weight_clip instead)".into());
        }
        if self.generator_hidden.contains(&0) || self.critic_hidden.contains(&0) {
            return Err("hidden layer sizes must be positive".into());
        }
        Ok(())
    }
}
