//! One-hidden-layer network: logistic hidden units, linear output, trained by
//! full-batch gradient descent on `½ · mean squared error`.

use alloc::vec::Vec;

use rand::Rng;

use super::BaselineError;
use crate::binopt::sigmoid;
use crate::rng;
use crate::timeseries::SupervisedMatrix;

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MlpConfig {
    pub hidden_units: usize,
    pub learning_rate: f64,
    pub epochs: usize,
    pub seed: u64,
}

impl Default for MlpConfig {
    fn default() -> Self {
        Self {
            hidden_units: 10,
            learning_rate: 0.01,
            epochs: 1000,
            seed: 0,
        }
    }
}

/// Weights are laid out so that [`MlpModel::params`] is
/// `w_hidden ‖ b_hidden ‖ w_out ‖ b_out`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MlpModel {
    pub n_inputs: usize,
    /// Row-major `hidden × n_inputs`.
    pub w_hidden: Vec<f64>,
    pub b_hidden: Vec<f64>,
    pub w_out: Vec<f64>,
    pub b_out: f64,
}

impl MlpModel {
    pub fn zeros(n_inputs: usize, hidden: usize) -> Self {
        Self {
            n_inputs,
            w_hidden: alloc::vec![0.0; hidden * n_inputs],
            b_hidden: alloc::vec![0.0; hidden],
            w_out: alloc::vec![0.0; hidden],
            b_out: 0.0,
        }
    }

    /// Every weight and bias uniform in `[-0.5, 0.5]`.
    pub fn random<R: Rng + ?Sized>(n_inputs: usize, hidden: usize, rng: &mut R) -> Self {
        let mut m = Self::zeros(n_inputs, hidden);
        let p: Vec<f64> = (0..m.n_params())
            .map(|_| rng.random::<f64>() - 0.5)
            .collect();
        m.set_params(&p);
        m
    }

    pub fn hidden_units(&self) -> usize {
        self.b_hidden.len()
    }

    pub fn n_params(&self) -> usize {
        self.w_hidden.len() + 2 * self.b_hidden.len() + 1
    }

    pub fn params(&self) -> Vec<f64> {
        let mut p = Vec::with_capacity(self.n_params());
        p.extend_from_slice(&self.w_hidden);
        p.extend_from_slice(&self.b_hidden);
        p.extend_from_slice(&self.w_out);
        p.push(self.b_out);
        p
    }

    pub fn set_params(&mut self, p: &[f64]) {
        assert_eq!(p.len(), self.n_params());
        let (a, rest) = p.split_at(self.w_hidden.len());
        let (b, rest) = rest.split_at(self.b_hidden.len());
        let (c, d) = rest.split_at(self.w_out.len());
        self.w_hidden.copy_from_slice(a);
        self.b_hidden.copy_from_slice(b);
        self.w_out.copy_from_slice(c);
        self.b_out = d[0];
    }

    /// Hidden activations and output.
    fn forward(&self, x: &[f64], hidden: &mut [f64]) -> f64 {
        let n = self.n_inputs;
        let mut out = self.b_out;
        for (h, a) in hidden.iter_mut().enumerate() {
            let row = &self.w_hidden[h * n..(h + 1) * n];
            let z: f64 = self.b_hidden[h] + row.iter().zip(x).map(|(w, v)| w * v).sum::<f64>();
            *a = sigmoid(z);
            out += self.w_out[h] * *a;
        }
        out
    }
}

pub fn mlp_predict(model: &MlpModel, x: &[f64]) -> Result<f64, BaselineError> {
    if x.len() != model.n_inputs {
        return Err(BaselineError::DimensionMismatch {
            expected: model.n_inputs,
            found: x.len(),
        });
    }
    let mut hidden = alloc::vec![0.0; model.hidden_units()];
    Ok(model.forward(x, &mut hidden))
}

fn check_data(model: &MlpModel, data: &SupervisedMatrix) -> Result<(), BaselineError> {
    if data.n_rows() == 0 {
        return Err(BaselineError::NoData);
    }
    if data.n_cols() != model.n_inputs {
        return Err(BaselineError::DimensionMismatch {
            expected: model.n_inputs,
            found: data.n_cols(),
        });
    }
    Ok(())
}

/// `(1 / 2N) Σ (f(x_i) − y_i)²`.
pub fn mlp_loss(model: &MlpModel, data: &SupervisedMatrix) -> Result<f64, BaselineError> {
    check_data(model, data)?;
    let mut hidden = alloc::vec![0.0; model.hidden_units()];
    let sse: f64 = data
        .rows()
        .zip(data.targets())
        .map(|(x, y)| {
            let e = model.forward(x, &mut hidden) - y;
            e * e
        })
        .sum();
    Ok(0.5 * sse / data.n_rows() as f64)
}

/// Backpropagated gradient of [`mlp_loss`], in [`MlpModel::params`] order.
pub fn mlp_gradient(model: &MlpModel, data: &SupervisedMatrix) -> Result<Vec<f64>, BaselineError> {
    check_data(model, data)?;
    let n = model.n_inputs;
    let k = model.hidden_units();
    let off_b = k * n;
    let off_v = off_b + k;
    let mut grad = alloc::vec![0.0; model.n_params()];
    let mut hidden = alloc::vec![0.0; k];
    let scale = 1.0 / data.n_rows() as f64;
    for (x, y) in data.rows().zip(data.targets()) {
        let e = (model.forward(x, &mut hidden) - y) * scale;
        grad[off_v + k] += e;
        for h in 0..k {
            let a = hidden[h];
            grad[off_v + h] += e * a;
            let delta = e * model.w_out[h] * a * (1.0 - a);
            grad[off_b + h] += delta;
            for (g, v) in grad[h * n..(h + 1) * n].iter_mut().zip(x) {
                *g += delta * v;
            }
        }
    }
    Ok(grad)
}

/// Central finite differences of [`mlp_loss`] with the given step.
pub fn mlp_numerical_gradient(
    model: &MlpModel,
    data: &SupervisedMatrix,
    step: f64,
) -> Result<Vec<f64>, BaselineError> {
    let base = model.params();
    let mut probe = model.clone();
    let mut grad = Vec::with_capacity(base.len());
    for i in 0..base.len() {
        let mut p = base.clone();
        p[i] = base[i] + step;
        probe.set_params(&p);
        let up = mlp_loss(&probe, data)?;
        p[i] = base[i] - step;
        probe.set_params(&p);
        let down = mlp_loss(&probe, data)?;
        grad.push((up - down) / (2.0 * step));
    }
    Ok(grad)
}

/// Trains on already-scaled data. Initial weights come from the learner
/// stream of `config.seed`.
pub fn mlp_train(train: &SupervisedMatrix, config: &MlpConfig) -> Result<MlpModel, BaselineError> {
    if config.hidden_units == 0 || train.n_cols() == 0 {
        return Err(BaselineError::EmptyNetwork);
    }
    let mut rng = rng::stream(config.seed, rng::streams::LEARNER);
    let mut model = MlpModel::random(train.n_cols(), config.hidden_units, &mut rng);
    check_data(&model, train)?;
    let mut params = model.params();
    for epoch in 0..config.epochs {
        let grad = mlp_gradient(&model, train)?;
        if grad.iter().any(|g| !g.is_finite()) || !mlp_loss(&model, train)?.is_finite() {
            return Err(BaselineError::Diverged(epoch));
        }
        for (p, g) in params.iter_mut().zip(&grad) {
            *p -= config.learning_rate * g;
        }
        model.set_params(&params);
    }
    if !mlp_loss(&model, train)?.is_finite() {
        return Err(BaselineError::Diverged(config.epochs));
    }
    Ok(model)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy() -> SupervisedMatrix {
        SupervisedMatrix::from_rows(&[(&[0.1, 0.9], 0.3), (&[0.5, 0.2], 0.7), (&[0.8, 0.6], 0.4)])
    }

    #[test]
    fn dead_network_outputs_bias() {
        let mut m = MlpModel::zeros(3, 4);
        m.b_out = 0.25;
        assert_eq!(mlp_predict(&m, &[1.0, -2.0, 7.0]).unwrap(), 0.25);
        assert!(mlp_predict(&m, &[1.0]).is_err());
    }

    #[test]
    fn single_unit_by_hand() {
        let m = MlpModel {
            n_inputs: 2,
            w_hidden: vec![0.5, -1.0],
            b_hidden: vec![0.2],
            w_out: vec![2.0],
            b_out: -0.3,
        };
        // z = 0.5·1 − 1·0.4 + 0.2 = 0.3
        let expected = 2.0 / (1.0 + (-0.3f64).exp()) - 0.3;
        assert!((mlp_predict(&m, &[1.0, 0.4]).unwrap() - expected).abs() < 1e-15);
    }

    #[test]
    fn hidden_permutation_invariance() {
        let m = MlpModel::random(2, 3, &mut rng::seeded(5));
        let mut p = m.clone();
        p.w_hidden = [&m.w_hidden[4..6], &m.w_hidden[0..2], &m.w_hidden[2..4]].concat();
        p.b_hidden = vec![m.b_hidden[2], m.b_hidden[0], m.b_hidden[1]];
        p.w_out = vec![m.w_out[2], m.w_out[0], m.w_out[1]];
        let x = [0.3, -0.8];
        assert!((mlp_predict(&m, &x).unwrap() - mlp_predict(&p, &x).unwrap()).abs() < 1e-14);
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let data = toy();
        for seed in 0..5 {
            let m = MlpModel::random(2, 10, &mut rng::seeded(seed));
            let a = mlp_gradient(&m, &data).unwrap();
            let n = mlp_numerical_gradient(&m, &data, 1e-5).unwrap();
            for (x, y) in a.iter().zip(&n) {
                assert!((x - y).abs() <= 1e-5 * x.abs().max(1e-3), "{x} vs {y}");
            }
        }
    }

    #[test]
    fn zero_epochs_returns_initialization() {
        let cfg = MlpConfig {
            epochs: 0,
            seed: 9,
            ..MlpConfig::default()
        };
        let m = mlp_train(&toy(), &cfg).unwrap();
        let init = MlpModel::random(2, 10, &mut rng::stream(9, rng::streams::LEARNER));
        assert_eq!(m, init);
    }

    #[test]
    fn training_reduces_loss() {
        let data = toy();
        let cfg = MlpConfig {
            learning_rate: 1e-3,
            epochs: 200,
            seed: 3,
            ..MlpConfig::default()
        };
        let init = mlp_train(
            &data,
            &MlpConfig {
                epochs: 0,
                ..cfg.clone()
            },
        )
        .unwrap();
        let trained = mlp_train(&data, &cfg).unwrap();
        assert!(mlp_loss(&trained, &data).unwrap() < mlp_loss(&init, &data).unwrap());
    }

    #[test]
    fn divergence_names_the_epoch() {
        let data = SupervisedMatrix::from_rows(&[(&[1e200], 1e200), (&[-1e200], 0.0)]);
        let cfg = MlpConfig {
            learning_rate: 1e10,
            ..MlpConfig::default()
        };
        assert!(matches!(
            mlp_train(&data, &cfg),
            Err(BaselineError::Diverged(_))
        ));
    }
}
