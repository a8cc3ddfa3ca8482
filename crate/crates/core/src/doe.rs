//! Degree-of-Execution estimator: a three-layer sigmoid network mapping the task
//! characteristics `(dd, l, dl)` to a score in `(0, 1)`.

use std::fmt::Write as _;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Number of task characteristics fed to the network.
pub const INPUTS: usize = 3;

pub type Features<T> = [T; INPUTS];

fn sigmoid<T: Scalar>(a: T) -> T {
    T::one() / (T::one() + (-a).exp())
}

/// Weights of the input→hidden→output network.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DoeNetwork<T> {
    /// `hidden_weights[j][k]` connects input `k` to hidden unit `j`.
    pub hidden_weights: Vec<Features<T>>,
    pub hidden_biases: Vec<T>,
    pub output_weights: Vec<T>,
    pub output_bias: T,
}

impl<T: Scalar> DoeNetwork<T> {
    pub fn zeros(hidden: usize) -> Self {
        Self {
            hidden_weights: vec![[T::zero(); INPUTS]; hidden],
            hidden_biases: vec![T::zero(); hidden],
            output_weights: vec![T::zero(); hidden],
            output_bias: T::zero(),
        }
    }

    /// Every weight and bias drawn uniformly from `[-0.5, 0.5]`.
    pub fn random<R: Rng + ?Sized>(hidden: usize, rng: &mut R) -> Self {
        let mut draw = || T::lit(rng.gen::<f64>() - 0.5);
        let mut net = Self::zeros(hidden);
        for j in 0..hidden {
            for k in 0..INPUTS {
                net.hidden_weights[j][k] = draw();
            }
            net.hidden_biases[j] = draw();
        }
        for j in 0..hidden {
            net.output_weights[j] = draw();
        }
        net.output_bias = draw();
        net
    }

    pub fn hidden_width(&self) -> usize {
        self.hidden_biases.len()
    }

    pub fn parameter_count(&self) -> usize {
        self.hidden_width() * (INPUTS + 2) + 1
    }

    /// Parameters in file order: hidden weights row by row, hidden biases,
    /// output weights, output bias.
    pub fn to_flat(&self) -> Vec<T> {
        let mut out = Vec::with_capacity(self.parameter_count());
        for row in &self.hidden_weights {
            out.extend_from_slice(row);
        }
        out.extend_from_slice(&self.hidden_biases);
        out.extend_from_slice(&self.output_weights);
        out.push(self.output_bias);
        out
    }

    pub fn from_flat(hidden: usize, flat: &[T]) -> Result<Self> {
        let want = hidden * (INPUTS + 2) + 1;
        if flat.len() != want {
            return Err(Error::CorruptedModel(format!(
                "expected {want} parameters for {hidden} hidden units, got {}",
                flat.len()
            )));
        }
        let mut it = flat.iter().copied();
        let mut net = Self::zeros(hidden);
        for row in net.hidden_weights.iter_mut() {
            for w in row.iter_mut() {
                *w = it.next().unwrap();
            }
        }
        for b in net.hidden_biases.iter_mut() {
            *b = it.next().unwrap();
        }
        for w in net.output_weights.iter_mut() {
            *w = it.next().unwrap();
        }
        net.output_bias = it.next().unwrap();
        Ok(net)
    }

    pub fn validate(&self) -> Result<()> {
        let h = self.hidden_width();
        if self.hidden_weights.len() != h || self.output_weights.len() != h {
            return Err(Error::CorruptedModel("inconsistent layer widths".into()));
        }
        if let Some(pos) = self.to_flat().iter().position(|w| !w.is_finite()) {
            return Err(Error::CorruptedModel(format!(
                "non-finite parameter at position {pos}"
            )));
        }
        Ok(())
    }

    /// DoE for the characteristics `(dd, l, dl)`.
    pub fn forward(&self, dd: T, l: T, dl: T) -> Result<T> {
        self.validate()?;
        Ok(self.forward_unchecked(&[dd, l, dl]))
    }

    fn hidden_activation(&self, j: usize, p: &Features<T>) -> T {
        let a = self.hidden_weights[j]
            .iter()
            .zip(p)
            .fold(self.hidden_biases[j], |acc, (&w, &x)| acc + w * x);
        sigmoid(a)
    }

    /// Forward pass without the finiteness check; callers validate once up front.
    pub fn forward_unchecked(&self, p: &Features<T>) -> T {
        let out = (0..self.hidden_width()).fold(self.output_bias, |acc, j| {
            acc + self.output_weights[j] * self.hidden_activation(j, p)
        });
        sigmoid(out)
    }

    /// Mean squared error and its gradient with respect to every parameter
    /// (same layout as [`DoeNetwork::to_flat`]).
    pub fn loss_and_gradient(&self, data: &TrainingSet<T>) -> (T, Vec<T>) {
        let hidden = self.hidden_width();
        let mut grad = DoeNetwork::<T>::zeros(hidden);
        let mut loss = T::zero();
        let n = T::from_count(data.rows.len().max(1));
        let two = T::lit(2.0);
        let mut z = vec![T::zero(); hidden];
        for (p, target) in &data.rows {
            for (j, zj) in z.iter_mut().enumerate() {
                *zj = self.hidden_activation(j, p);
            }
            let out = z
                .iter()
                .zip(&self.output_weights)
                .fold(self.output_bias, |acc, (&zj, &wj)| acc + wj * zj);
            let y = sigmoid(out);
            let err = y - *target;
            loss = loss + err * err;
            let delta_out = two * err * y * (T::one() - y) / n;
            grad.output_bias = grad.output_bias + delta_out;
            for j in 0..hidden {
                grad.output_weights[j] = grad.output_weights[j] + delta_out * z[j];
                let delta_hidden = delta_out * self.output_weights[j] * z[j] * (T::one() - z[j]);
                grad.hidden_biases[j] = grad.hidden_biases[j] + delta_hidden;
                for k in 0..INPUTS {
                    grad.hidden_weights[j][k] = grad.hidden_weights[j][k] + delta_hidden * p[k];
                }
            }
        }
        (loss / n, grad.to_flat())
    }

    pub fn mse(&self, data: &TrainingSet<T>) -> Result<T> {
        if data.rows.is_empty() {
            return Err(Error::NoData("empty evaluation set"));
        }
        let sum: T = data
            .rows
            .iter()
            .map(|(p, t)| {
                let e = self.forward_unchecked(p) - *t;
                e * e
            })
            .sum();
        Ok(sum / T::from_count(data.rows.len()))
    }

    /// Flat text format: `M CC` header, then one line per hidden unit's input
    /// weights, a line of hidden biases, a line of output weights and the
    /// output bias.
    pub fn to_text(&self) -> String {
        let line = |vals: &[T]| {
            vals.iter()
                .map(|v| format!("{}", v.as_f64()))
                .collect::<Vec<_>>()
                .join(" ")
        };
        let mut s = String::new();
        writeln!(s, "{} {}", INPUTS, self.hidden_width()).unwrap();
        for row in &self.hidden_weights {
            writeln!(s, "{}", line(row)).unwrap();
        }
        writeln!(s, "{}", line(&self.hidden_biases)).unwrap();
        writeln!(s, "{}", line(&self.output_weights)).unwrap();
        writeln!(s, "{}", line(&[self.output_bias])).unwrap();
        s
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let (_, header) = lines
            .next()
            .ok_or_else(|| Error::CorruptedModel("empty model file".into()))?;
        let dims: Vec<usize> = header
            .split_whitespace()
            .map(str::parse)
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::CorruptedModel(format!("bad header `{header}`: {e}")))?;
        let [m, hidden] = dims[..] else {
            return Err(Error::CorruptedModel(format!("bad header `{header}`")));
        };
        if m != INPUTS {
            return Err(Error::CorruptedModel(format!(
                "model expects {m} inputs, this build supports {INPUTS}"
            )));
        }
        let mut flat = Vec::new();
        for (idx, line) in lines {
            for tok in line.split_whitespace() {
                let v: f64 = tok.parse().map_err(|_| Error::Parse {
                    line: idx + 1,
                    message: format!("not a number: `{tok}`"),
                })?;
                flat.push(T::lit(v));
            }
        }
        let net = Self::from_flat(hidden, &flat)?;
        net.validate()?;
        Ok(net)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_text())?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_text(&std::fs::read_to_string(path)?)
    }
}

/// Labelled rows `((dd, l, dl), DoE)`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct TrainingSet<T> {
    pub rows: Vec<(Features<T>, T)>,
}

impl<T: Scalar> TrainingSet<T> {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Shuffles and splits off `holdout_fraction` of the rows as an evaluation set.
    pub fn split<R: Rng + ?Sized>(mut self, holdout_fraction: f64, rng: &mut R) -> (Self, Self) {
        self.rows.shuffle(rng);
        let n_hold = ((self.rows.len() as f64) * holdout_fraction).round() as usize;
        let hold = self.rows.split_off(self.rows.len() - n_hold.min(self.rows.len()));
        (self, Self { rows: hold })
    }
}

/// Labelling rule standing in for expert-provided DoE targets.
///
/// Both rules increase with `dd` and decrease with `l` and `dl`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExpertRule {
    /// `(dd + (1 - l) + (1 - dl)) / 3`.
    #[default]
    Linear,
    /// `(√dd + (1 - l)² + (1 - dl)²) / 3`.
    Curved,
}

impl ExpertRule {
    pub fn label<T: Scalar>(self, dd: T, l: T, dl: T) -> T {
        let three = T::lit(3.0);
        let v = match self {
            ExpertRule::Linear => (dd + (T::one() - l) + (T::one() - dl)) / three,
            ExpertRule::Curved => {
                (dd.sqrt() + (T::one() - l).powi(2) + (T::one() - dl).powi(2)) / three
            }
        };
        v.max(T::zero()).min(T::one())
    }
}

/// `n_rows` inputs uniform on the unit cube, labelled by `rule`.
pub fn generate_expert_dataset<T: Scalar, R: Rng + ?Sized>(
    n_rows: usize,
    rule: ExpertRule,
    rng: &mut R,
) -> TrainingSet<T> {
    let rows = (0..n_rows)
        .map(|_| {
            let p = [
                T::lit(rng.gen::<f64>()),
                T::lit(rng.gen::<f64>()),
                T::lit(rng.gen::<f64>()),
            ];
            (p, rule.label(p[0], p[1], p[2]))
        })
        .collect();
    TrainingSet { rows }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainOptions {
    pub epochs: usize,
    pub learning_rate: f64,
}

impl Default for TrainOptions {
    fn default() -> Self {
        Self {
            epochs: 5000,
            learning_rate: 15.0,
        }
    }
}

#[derive(Clone, Debug)]
pub struct TrainOutcome<T> {
    pub net: DoeNetwork<T>,
    /// Training loss before each epoch's update.
    pub losses: Vec<T>,
}

/// Full-batch gradient descent on the mean squared error.
pub fn train<T: Scalar>(
    net: DoeNetwork<T>,
    data: &TrainingSet<T>,
    opts: &TrainOptions,
) -> Result<TrainOutcome<T>> {
    if data.is_empty() {
        return Err(Error::NoData("empty training set"));
    }
    if !(opts.learning_rate > 0.0) {
        return Err(Error::InvalidConfig(format!(
            "learning rate must be positive, got {}",
            opts.learning_rate
        )));
    }
    net.validate()?;
    let hidden = net.hidden_width();
    let lr = T::lit(opts.learning_rate);
    let mut params = net.to_flat();
    let mut current = net;
    let mut losses = Vec::with_capacity(opts.epochs);
    let mut last_finite = f64::NAN;
    for epoch in 0..opts.epochs {
        let (loss, grad) = current.loss_and_gradient(data);
        if !loss.is_finite() || grad.iter().any(|g| !g.is_finite()) {
            return Err(Error::TrainingDiverged {
                epoch,
                loss: loss.as_f64(),
                last_finite,
            });
        }
        last_finite = loss.as_f64();
        losses.push(loss);
        for (p, g) in params.iter_mut().zip(&grad) {
            *p = *p - lr * *g;
        }
        if params.iter().any(|p| !p.is_finite()) {
            return Err(Error::TrainingDiverged {
                epoch,
                loss: f64::INFINITY,
                last_finite,
            });
        }
        current = DoeNetwork::from_flat(hidden, &params)?;
    }
    Ok(TrainOutcome {
        net: current,
        losses,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DoeTrainingConfig {
    pub rows: usize,
    pub hidden: usize,
    pub holdout_fraction: f64,
    pub rule: ExpertRule,
    pub options: TrainOptions,
    pub seed: u64,
}

impl Default for DoeTrainingConfig {
    fn default() -> Self {
        Self {
            rows: 5000,
            hidden: 8,
            holdout_fraction: 0.2,
            rule: ExpertRule::Linear,
            options: TrainOptions::default(),
            seed: 0x05ee_dd0e,
        }
    }
}

#[derive(Clone, Debug)]
pub struct FitReport<T> {
    pub net: DoeNetwork<T>,
    pub train_mse: T,
    pub holdout_mse: T,
}

/// Generates the rule dataset, trains a fresh network and scores it on the hold-out split.
pub fn fit_expert_model<T: Scalar>(cfg: &DoeTrainingConfig) -> Result<FitReport<T>> {
    if cfg.rows == 0 || cfg.hidden == 0 {
        return Err(Error::InvalidConfig(
            "DoE training needs at least one row and one hidden unit".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let data = generate_expert_dataset::<T, _>(cfg.rows, cfg.rule, &mut rng);
    let (train_set, holdout) = data.split(cfg.holdout_fraction, &mut rng);
    let init = DoeNetwork::random(cfg.hidden, &mut rng);
    let outcome = train(init, &train_set, &cfg.options)?;
    let train_mse = outcome.net.mse(&train_set)?;
    let holdout_mse = if holdout.is_empty() {
        train_mse
    } else {
        outcome.net.mse(&holdout)?
    };
    Ok(FitReport {
        net: outcome.net,
        train_mse,
        holdout_mse,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_network_is_one_half() {
        let net = DoeNetwork::<f64>::zeros(8);
        for p in [(0.0, 0.0, 0.0), (1.0, 0.3, 0.9), (0.5, 0.5, 0.5)] {
            assert_eq!(net.forward(p.0, p.1, p.2).unwrap(), 0.5);
        }
    }

    #[test]
    fn non_finite_weights_rejected() {
        let mut net = DoeNetwork::<f64>::zeros(2);
        net.output_weights[1] = f64::NAN;
        assert!(matches!(net.forward(0.1, 0.2, 0.3), Err(Error::CorruptedModel(_))));
    }

    #[test]
    fn rule_extremes() {
        let r = ExpertRule::Linear;
        assert_eq!(r.label(1.0, 0.0, 0.0), 1.0);
        assert_eq!(r.label(0.0, 1.0, 1.0), 0.0);
        assert!((r.label(0.5, 0.5, 0.5) - 0.5f64).abs() < 1e-15);
        assert_eq!(ExpertRule::Curved.label(1.0, 0.0, 0.0), 1.0);
        assert_eq!(ExpertRule::Curved.label(0.0, 1.0, 1.0), 0.0);
    }

    #[test]
    fn zero_epochs_is_noop() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let net = DoeNetwork::<f64>::random(4, &mut rng);
        let data = generate_expert_dataset(50, ExpertRule::Linear, &mut rng);
        let out = train(net.clone(), &data, &TrainOptions { epochs: 0, learning_rate: 0.5 }).unwrap();
        assert_eq!(out.net, net);
        assert!(out.losses.is_empty());
    }

    #[test]
    fn divergence_is_reported() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let net = DoeNetwork::<f64>::random(4, &mut rng);
        let mut data = generate_expert_dataset(20, ExpertRule::Linear, &mut rng);
        data.rows[3].1 = f64::INFINITY;
        let res = train(net, &data, &TrainOptions { epochs: 5, learning_rate: 0.5 });
        assert!(matches!(res, Err(Error::TrainingDiverged { .. })), "{res:?}");
    }

    #[test]
    fn text_round_trip_is_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let net = DoeNetwork::<f64>::random(6, &mut rng);
        let back = DoeNetwork::<f64>::from_text(&net.to_text()).unwrap();
        assert_eq!(net, back);
        let header = net.to_text().lines().next().unwrap().to_string();
        assert_eq!(header, "3 6");
    }

    #[test]
    fn malformed_text_rejected() {
        assert!(DoeNetwork::<f64>::from_text("").is_err());
        assert!(DoeNetwork::<f64>::from_text("3 2\n0.1 0.2\n").is_err());
        assert!(DoeNetwork::<f64>::from_text("4 1\n0 0 0 0\n0\n0\n0\n").is_err());
        assert!(DoeNetwork::<f64>::from_text("3 1\n0 x 0\n0\n0\n0\n").is_err());
    }

    #[test]
    fn split_sizes() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let data = generate_expert_dataset::<f64, _>(100, ExpertRule::Linear, &mut rng);
        let (a, b) = data.split(0.2, &mut rng);
        assert_eq!((a.len(), b.len()), (80, 20));
    }
}
