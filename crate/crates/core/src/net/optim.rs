use serde::{Deserialize, Serialize};

use super::{Parameters, Scalar};

/// Update rule. Defaults to Adam with step size 1e-3 and the usual moments.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum OptimizerConfig {
    Sgd {
        lr: f64,
    },
    Adam {
        lr: f64,
        beta1: f64,
        beta2: f64,
        eps: f64,
    },
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        OptimizerConfig::adam(1e-3)
    }
}

impl OptimizerConfig {
    pub fn adam(lr: f64) -> Self {
        OptimizerConfig::Adam {
            lr,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }
}

/// Optimizer state for one parameter set.
#[derive(Debug, Clone)]
pub struct Optimizer<F> {
    config: OptimizerConfig,
    first: Option<Parameters<F>>,
    second: Option<Parameters<F>>,
    steps: u64,
}

impl<F: Scalar> Optimizer<F> {
    pub fn new(config: OptimizerConfig) -> Self {
        Optimizer {
            config,
            first: None,
            second: None,
            steps: 0,
        }
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    /// Applies one update in place. Panics if `grads` is shaped unlike `params`.
    pub fn step(&mut self, params: &mut Parameters<F>, grads: &Parameters<F>) {
        assert!(params.same_shape(grads), "gradient shape");
        self.steps += 1;
        match self.config {
            OptimizerConfig::Sgd { lr } => {
                let lr = F::from_f64(lr).unwrap();
                for (p, g) in params.slices_mut().into_iter().zip(grads.slices()) {
                    for (p, &g) in p.iter_mut().zip(g) {
                        *p = *p - lr * g;
                    }
                }
            }
            OptimizerConfig::Adam {
                lr,
                beta1,
                beta2,
                eps,
            } => {
                let t = self.steps as i32;
                // Bias corrections folded into the step size and epsilon.
                let c1 = 1.0 - beta1.powi(t);
                let c2 = 1.0 - beta2.powi(t);
                let step = F::from_f64(lr / c1).unwrap();
                let inv_sqrt_c2 = F::from_f64(1.0 / c2.sqrt()).unwrap();
                let (b1, b2) = (F::from_f64(beta1).unwrap(), F::from_f64(beta2).unwrap());
                let (one, eps) = (F::one(), F::from_f64(eps).unwrap());

                let first = self
                    .first
                    .get_or_insert_with(|| zeros_shaped(params));
                let second = self
                    .second
                    .get_or_insert_with(|| zeros_shaped(params));
                for (((p, g), m), v) in params
                    .slices_mut()
                    .into_iter()
                    .zip(grads.slices())
                    .zip(first.slices_mut())
                    .zip(second.slices_mut())
                {
                    for i in 0..p.len() {
                        let gi = g[i];
                        m[i] = b1 * m[i] + (one - b1) * gi;
                        v[i] = b2 * v[i] + (one - b2) * gi * gi;
                        p[i] = p[i] - step * m[i] / (v[i].sqrt() * inv_sqrt_c2 + eps);
                    }
                }
            }
        }
    }
}

fn zeros_shaped<F: Scalar>(like: &Parameters<F>) -> Parameters<F> {
    let mut z = like.clone();
    for s in z.slices_mut() {
        s.fill(F::zero());
    }
    z
}
