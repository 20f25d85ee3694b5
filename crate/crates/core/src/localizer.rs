//! MLP position regressor: RSSI vector in, `(x, y)` out.
//!
//! Layers compute `Z = A W + b` with `W` stored `fan_in x fan_out`, so a
//! batch is one row per sample. Hidden layers use ReLU, the output layer is
//! linear. Training minimises mean squared error with Adam and early
//! stopping on a held-out validation split.

use std::cmp::Ordering;
use std::io::{Read, Write};
use std::path::Path;

use ndarray::{Array1, Array2, ArrayView2, Axis};
use rand::seq::SliceRandom;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::dataset::{impute, DEFAULT_FILL_DBM};
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::simulator::seeded_stream;
use crate::types::{ApId, FingerprintDataset, WifiScan};

pub const DEFAULT_HIDDEN: [usize; 3] = [256, 128, 32];
pub const OUTPUT_DIM: usize = 2;

const STREAM_INIT: u64 = 10;
const STREAM_SPLIT: u64 = 11;
const STREAM_BATCHES: u64 = 12;

/// Minimum drop in validation loss that counts as an improvement.
pub const MIN_IMPROVEMENT: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Relu,
    Linear,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Layer<F> {
    pub weights: Array2<F>,
    pub biases: Array1<F>,
    pub activation: Activation,
}

impl<F: Scalar> Layer<F> {
    pub fn fan_in(&self) -> usize {
        self.weights.nrows()
    }

    pub fn fan_out(&self) -> usize {
        self.weights.ncols()
    }

    fn affine(&self, input: &ArrayView2<F>) -> Array2<F> {
        input.dot(&self.weights) + &self.biases
    }
}

fn activate<F: Scalar>(act: Activation, mut z: Array2<F>) -> Array2<F> {
    if act == Activation::Relu {
        z.mapv_inplace(|v| if v > F::zero() { v } else { F::zero() });
    }
    z
}

#[derive(Debug, Clone, PartialEq)]
pub struct MlpModel<F> {
    pub layers: Vec<Layer<F>>,
    /// Binds input slots to access points; empty for an unbound network.
    pub ap_columns: Vec<ApId>,
    pub feature_mean: Array1<F>,
    pub feature_std: Array1<F>,
    /// Output de-standardization: position = output * target_std + target_mean.
    pub target_mean: Array1<F>,
    pub target_std: Array1<F>,
    pub fill_dbm: f64,
}

/// Gradients with the same layout as the model parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients<F> {
    pub weights: Vec<Array2<F>>,
    pub biases: Vec<Array1<F>>,
}

impl<F: Scalar> MlpModel<F> {
    /// Default 256-128-32-2 network with He-normal weights and zero biases.
    pub fn init(input_dim: usize, seed: u64) -> Result<Self> {
        Self::init_with(input_dim, &DEFAULT_HIDDEN, seed)
    }

    pub fn init_with(input_dim: usize, hidden: &[usize], seed: u64) -> Result<Self> {
        if input_dim == 0 {
            return Err(Error::InvalidConfig("input dimension must be >= 1".into()));
        }
        if hidden.contains(&0) {
            return Err(Error::InvalidConfig("hidden layer of width 0".into()));
        }
        let mut dims = vec![input_dim];
        dims.extend_from_slice(hidden);
        dims.push(OUTPUT_DIM);
        let mut rng = seeded_stream(seed, STREAM_INIT);
        let last = dims.len() - 2;
        let layers = dims
            .windows(2)
            .enumerate()
            .map(|(l, d)| {
                let std = (2.0 / d[0] as f64).sqrt();
                let weights = Array2::from_shape_simple_fn((d[0], d[1]), || {
                    let z: f64 = StandardNormal.sample(&mut rng);
                    F::from_f64_lossy(std * z)
                });
                Layer {
                    weights,
                    biases: Array1::zeros(d[1]),
                    activation: if l == last { Activation::Linear } else { Activation::Relu },
                }
            })
            .collect();
        Ok(Self {
            layers,
            ap_columns: Vec::new(),
            feature_mean: Array1::zeros(input_dim),
            feature_std: Array1::ones(input_dim),
            target_mean: Array1::zeros(OUTPUT_DIM),
            target_std: Array1::ones(OUTPUT_DIM),
            fill_dbm: DEFAULT_FILL_DBM,
        })
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].fan_in()
    }

    pub fn layer_dims(&self) -> Vec<usize> {
        std::iter::once(self.input_dim()).chain(self.layers.iter().map(Layer::fan_out)).collect()
    }

    pub fn activations(&self) -> Vec<Activation> {
        self.layers.iter().map(|l| l.activation).collect()
    }

    pub fn parameter_count(&self) -> usize {
        self.layers.iter().map(|l| l.weights.len() + l.biases.len()).sum()
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidModel(m));
        if self.layers.is_empty() {
            return bad("no layers".into());
        }
        for (l, pair) in self.layers.windows(2).enumerate() {
            if pair[0].fan_out() != pair[1].fan_in() {
                return bad(format!("layer {} output {} does not feed layer {} input {}", l, pair[0].fan_out(), l + 1, pair[1].fan_in()));
            }
        }
        for (l, layer) in self.layers.iter().enumerate() {
            if layer.biases.len() != layer.fan_out() {
                return bad(format!("layer {l} bias length {} != {}", layer.biases.len(), layer.fan_out()));
            }
            if layer.weights.iter().chain(layer.biases.iter()).any(|v| !v.is_finite()) {
                return bad(format!("layer {l} has non-finite parameters"));
            }
        }
        if self.layers.last().unwrap().fan_out() != OUTPUT_DIM {
            return bad("output dimension must be 2".into());
        }
        let d = self.input_dim();
        if !self.ap_columns.is_empty() && self.ap_columns.len() != d {
            return bad(format!("{} AP columns for input dimension {d}", self.ap_columns.len()));
        }
        if self.feature_mean.len() != d || self.feature_std.len() != d {
            return bad("standardization vectors do not match input dimension".into());
        }
        if self.feature_std.iter().any(|s| !(*s > F::zero()) || !s.is_finite()) {
            return bad("feature stddev must be positive".into());
        }
        if self.target_mean.len() != OUTPUT_DIM || self.target_std.len() != OUTPUT_DIM {
            return bad("target standardization vectors must have length 2".into());
        }
        if self.target_std.iter().any(|s| !(*s > F::zero()) || !s.is_finite()) {
            return bad("target stddev must be positive".into());
        }
        Ok(())
    }

    fn check_width(&self, features: &ArrayView2<F>) -> Result<()> {
        if features.ncols() != self.input_dim() {
            return Err(Error::DimensionMismatch { expected: self.input_dim(), got: features.ncols() });
        }
        Ok(())
    }

    /// Network output for already-standardized inputs.
    pub fn forward(&self, features: ArrayView2<F>) -> Result<Array2<F>> {
        self.check_width(&features)?;
        let mut a = features.to_owned();
        for layer in &self.layers {
            a = activate(layer.activation, layer.affine(&a.view()));
        }
        Ok(a)
    }

    /// Mean squared error over rows and both coordinates, with its
    /// gradient by backpropagation.
    pub fn loss_and_grads(&self, features: ArrayView2<F>, targets: ArrayView2<F>) -> Result<(F, Gradients<F>)> {
        self.check_width(&features)?;
        if features.nrows() == 0 {
            return Err(Error::EmptyBatch);
        }
        if targets.nrows() != features.nrows() || targets.ncols() != OUTPUT_DIM {
            return Err(Error::LengthMismatch(features.nrows(), targets.nrows()));
        }

        // Keep pre-activations for the ReLU masks and activations for dW.
        let mut inputs: Vec<Array2<F>> = Vec::with_capacity(self.layers.len());
        let mut pre: Vec<Array2<F>> = Vec::with_capacity(self.layers.len());
        let mut a = features.to_owned();
        for layer in &self.layers {
            let z = layer.affine(&a.view());
            let next = activate(layer.activation, z.clone());
            inputs.push(a);
            pre.push(z);
            a = next;
        }

        let diff = &a - &targets;
        let count = F::from_usize_lossy(diff.len());
        let loss = diff.iter().fold(F::zero(), |acc, &d| acc + d * d) / count;

        let two = F::from_f64_lossy(2.0);
        let mut delta = diff.mapv(|d| two * d / count);
        let n = self.layers.len();
        let mut gw = Vec::with_capacity(n);
        let mut gb = Vec::with_capacity(n);
        for l in (0..n).rev() {
            let layer = &self.layers[l];
            if layer.activation == Activation::Relu {
                delta.zip_mut_with(&pre[l], |d, &z| {
                    if z <= F::zero() {
                        *d = F::zero();
                    }
                });
            }
            gw.push(inputs[l].t().dot(&delta));
            gb.push(delta.sum_axis(Axis(0)));
            if l > 0 {
                delta = delta.dot(&layer.weights.t());
            }
        }
        gw.reverse();
        gb.reverse();
        Ok((loss, Gradients { weights: gw, biases: gb }))
    }

    pub fn loss(&self, features: ArrayView2<F>, targets: ArrayView2<F>) -> Result<F> {
        let out = self.forward(features)?;
        if targets.shape() != out.shape() || out.nrows() == 0 {
            return Err(Error::LengthMismatch(out.nrows(), targets.nrows()));
        }
        let diff = &out - &targets;
        Ok(diff.iter().fold(F::zero(), |acc, &d| acc + d * d) / F::from_usize_lossy(diff.len()))
    }

    /// Applies the stored standardization to raw dBm features.
    pub fn standardize(&self, raw: ArrayView2<F>) -> Result<Array2<F>> {
        self.check_width(&raw)?;
        Ok((&raw - &self.feature_mean) / &self.feature_std)
    }

    /// Positions for raw (imputed, unstandardized) feature rows.
    pub fn predict_raw(&self, raw: ArrayView2<F>) -> Result<Array2<F>> {
        let out = self.forward(self.standardize(raw)?.view())?;
        Ok(out * &self.target_std + &self.target_mean)
    }

    /// Raw feature vector for a scan in model column order. Unknown APs
    /// are ignored, missing ones take the fill value.
    pub fn scan_features(&self, scan: &WifiScan) -> Array1<F> {
        self.ap_columns
            .iter()
            .map(|id| F::from_f64_lossy(scan.readings.get(id).copied().unwrap_or(self.fill_dbm)))
            .collect()
    }

    /// Online localization of a single scan.
    pub fn predict(&self, scan: &WifiScan) -> (f64, f64) {
        let x = self.scan_features(scan).insert_axis(Axis(0));
        let out = self.predict_raw(x.view()).expect("feature width matches ap_columns");
        (out[[0, 0]].to_f64_lossy(), out[[0, 1]].to_f64_lossy())
    }

    pub fn to_writer<W: Write>(&self, sink: W) -> Result<()> {
        serde_json::to_writer(sink, &ModelFile::from_model(self)).map_err(|e| Error::InvalidModel(e.to_string()))
    }

    pub fn from_reader<R: Read>(source: R) -> Result<Self> {
        let file: ModelFile<F> = serde_json::from_reader(source).map_err(|e| Error::InvalidModel(e.to_string()))?;
        file.into_model()
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
        self.to_writer(&mut w)?;
        w.write_all(b"\n")?;
        w.flush()?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_reader(std::io::BufReader::new(std::fs::File::open(path)?))
    }
}

/// On-disk model layout. Weights are flattened row-major `fan_in x fan_out`.
#[derive(Debug, Serialize, Deserialize)]
struct ModelFile<F> {
    layer_dims: Vec<usize>,
    activations: Vec<Activation>,
    weights: Vec<Vec<F>>,
    biases: Vec<Vec<F>>,
    feature_mean: Vec<F>,
    feature_std: Vec<F>,
    target_mean: Vec<F>,
    target_std: Vec<F>,
    ap_columns: Vec<ApId>,
    fill_dbm: f64,
}

impl<F: Scalar> ModelFile<F> {
    fn from_model(m: &MlpModel<F>) -> Self {
        Self {
            layer_dims: m.layer_dims(),
            activations: m.activations(),
            weights: m.layers.iter().map(|l| l.weights.iter().copied().collect()).collect(),
            biases: m.layers.iter().map(|l| l.biases.to_vec()).collect(),
            feature_mean: m.feature_mean.to_vec(),
            feature_std: m.feature_std.to_vec(),
            target_mean: m.target_mean.to_vec(),
            target_std: m.target_std.to_vec(),
            ap_columns: m.ap_columns.clone(),
            fill_dbm: m.fill_dbm,
        }
    }

    fn into_model(self) -> Result<MlpModel<F>> {
        let dims = &self.layer_dims;
        let n_layers = dims.len().saturating_sub(1);
        if n_layers == 0 {
            return Err(Error::InvalidModel("layer_dims needs at least two entries".into()));
        }
        if self.activations.len() != n_layers || self.weights.len() != n_layers || self.biases.len() != n_layers {
            return Err(Error::InvalidModel(format!(
                "{} layers declared but {} activations, {} weight and {} bias arrays",
                n_layers,
                self.activations.len(),
                self.weights.len(),
                self.biases.len()
            )));
        }
        let mut layers = Vec::with_capacity(n_layers);
        for (l, ((w, b), act)) in self.weights.into_iter().zip(self.biases).zip(self.activations).enumerate() {
            let weights = Array2::from_shape_vec((dims[l], dims[l + 1]), w)
                .map_err(|_| Error::InvalidModel(format!("layer {l} weights do not have shape {}x{}", dims[l], dims[l + 1])))?;
            if b.len() != dims[l + 1] {
                return Err(Error::InvalidModel(format!("layer {l} biases do not have length {}", dims[l + 1])));
            }
            layers.push(Layer { weights, biases: Array1::from(b), activation: act });
        }
        let model = MlpModel {
            layers,
            ap_columns: self.ap_columns,
            feature_mean: Array1::from(self.feature_mean),
            feature_std: Array1::from(self.feature_std),
            target_mean: Array1::from(self.target_mean),
            target_std: Array1::from(self.target_std),
            fill_dbm: self.fill_dbm,
        };
        model.validate()?;
        Ok(model)
    }
}

/// Adam with bias correction.
#[derive(Debug, Clone)]
pub struct Adam<F> {
    pub learning_rate: F,
    pub beta1: F,
    pub beta2: F,
    pub eps: F,
    step: i32,
    m: Gradients<F>,
    v: Gradients<F>,
}

impl<F: Scalar> Adam<F> {
    pub fn new(model: &MlpModel<F>, learning_rate: f64, beta1: f64, beta2: f64, eps: f64) -> Self {
        let zeros = Gradients {
            weights: model.layers.iter().map(|l| Array2::zeros(l.weights.raw_dim())).collect(),
            biases: model.layers.iter().map(|l| Array1::zeros(l.biases.raw_dim())).collect(),
        };
        Self {
            learning_rate: F::from_f64_lossy(learning_rate),
            beta1: F::from_f64_lossy(beta1),
            beta2: F::from_f64_lossy(beta2),
            eps: F::from_f64_lossy(eps),
            step: 0,
            m: zeros.clone(),
            v: zeros,
        }
    }

    pub fn step(&mut self, model: &mut MlpModel<F>, grads: &Gradients<F>) {
        self.step += 1;
        let one = F::one();
        let c1 = one - self.beta1.powi(self.step);
        let c2 = one - self.beta2.powi(self.step);
        let (b1, b2, lr, eps) = (self.beta1, self.beta2, self.learning_rate, self.eps);
        let update = |p: &mut F, g: F, m: &mut F, v: &mut F| {
            *m = b1 * *m + (one - b1) * g;
            *v = b2 * *v + (one - b2) * g * g;
            let m_hat = *m / c1;
            let v_hat = *v / c2;
            *p = *p - lr * m_hat / (v_hat.sqrt() + eps);
        };
        for (l, layer) in model.layers.iter_mut().enumerate() {
            ndarray::Zip::from(&mut layer.weights)
                .and(&grads.weights[l])
                .and(&mut self.m.weights[l])
                .and(&mut self.v.weights[l])
                .for_each(|p, &g, m, v| update(p, g, m, v));
            ndarray::Zip::from(&mut layer.biases)
                .and(&grads.biases[l])
                .and(&mut self.m.biases[l])
                .and(&mut self.v.biases[l])
                .for_each(|p, &g, m, v| update(p, g, m, v));
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LossKind {
    #[default]
    MeanSquaredError,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub epochs_max: usize,
    pub batch_size: usize,
    pub patience: usize,
    pub learning_rate: f64,
    pub adam_beta1: f64,
    pub adam_beta2: f64,
    pub adam_eps: f64,
    pub val_fraction: f64,
    pub rng_seed: u64,
    pub loss: LossKind,
    pub hidden_layers: Vec<usize>,
    pub fill_dbm: f64,
    pub standardize_targets: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            epochs_max: 100,
            batch_size: 32,
            patience: 5,
            learning_rate: 1e-3,
            adam_beta1: 0.9,
            adam_beta2: 0.999,
            adam_eps: 1e-8,
            val_fraction: 0.2,
            rng_seed: 0,
            loss: LossKind::MeanSquaredError,
            hidden_layers: DEFAULT_HIDDEN.to_vec(),
            fill_dbm: DEFAULT_FILL_DBM,
            standardize_targets: true,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidConfig(m.to_string()));
        if !(self.val_fraction > 0.0 && self.val_fraction < 1.0) {
            return bad("val_fraction must lie in (0, 1)");
        }
        if self.patience == 0 || self.batch_size == 0 || self.epochs_max == 0 {
            return bad("patience, batch_size and epochs_max must be >= 1");
        }
        if !(self.learning_rate > 0.0) {
            return bad("learning_rate must be positive");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub train_loss: f64,
    pub val_loss: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingReport {
    pub epochs: Vec<EpochRecord>,
    /// 1-based epoch whose parameters were kept.
    pub best_epoch: usize,
    pub best_val_loss: f64,
    pub stopped_early: bool,
    pub n_train: usize,
    pub n_val: usize,
}

impl TrainingReport {
    /// `epoch,train_loss,val_loss` lines with a header.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("epoch,train_loss,val_loss\n");
        for e in &self.epochs {
            s.push_str(&format!("{},{},{}\n", e.epoch, e.train_loss, e.val_loss));
        }
        s
    }
}

/// Tracks the best validation loss and decides when to stop.
#[derive(Debug, Clone)]
pub struct EarlyStopping {
    patience: usize,
    best: f64,
    best_epoch: usize,
    waited: usize,
}

impl EarlyStopping {
    pub fn new(patience: usize) -> Self {
        Self { patience, best: f64::INFINITY, best_epoch: 0, waited: 0 }
    }

    /// Records one epoch's validation loss; returns true if it is a new best.
    pub fn observe(&mut self, epoch: usize, val_loss: f64) -> bool {
        if val_loss < self.best - MIN_IMPROVEMENT || (self.best.is_infinite() && val_loss.is_finite()) {
            self.best = val_loss;
            self.best_epoch = epoch;
            self.waited = 0;
            true
        } else {
            self.waited += 1;
            false
        }
    }

    pub fn should_stop(&self) -> bool {
        self.waited >= self.patience
    }

    pub fn best(&self) -> (usize, f64) {
        (self.best_epoch, self.best)
    }
}

fn row_order_key(a: &crate::types::FingerprintRow, b: &crate::types::FingerprintRow) -> Ordering {
    let opt = |v: &Option<f64>| v.unwrap_or(f64::NEG_INFINITY);
    a.t.total_cmp(&b.t)
        .then(a.x.total_cmp(&b.x))
        .then(a.y.total_cmp(&b.y))
        .then_with(|| {
            a.rssi
                .iter()
                .zip(&b.rssi)
                .map(|(p, q)| opt(p).total_cmp(&opt(q)))
                .find(|o| o.is_ne())
                .unwrap_or(Ordering::Equal)
        })
}

/// Seeded train/validation split of `n` rows; returns `(train, val)`.
pub fn split_indices(n: usize, val_fraction: f64, seed: u64) -> (Vec<usize>, Vec<usize>) {
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(&mut seeded_stream(seed, STREAM_SPLIT));
    let n_val = ((n as f64 * val_fraction).round() as usize).clamp(1, n.saturating_sub(1).max(1));
    let val = idx.split_off(n - n_val);
    (idx, val)
}

fn column_stats<F: Scalar>(x: ArrayView2<F>) -> (Array1<F>, Array1<F>) {
    let n = F::from_usize_lossy(x.nrows());
    let mean = x.sum_axis(Axis(0)) / n;
    let var = x.map_axis(Axis(0), |col| {
        let mu = col.sum() / n;
        col.iter().fold(F::zero(), |acc, &v| acc + (v - mu) * (v - mu)) / n
    });
    let floor = F::from_f64_lossy(1e-8);
    let std = var.mapv(|v| if v.sqrt() > floor { v.sqrt() } else { F::one() });
    (mean, std)
}

fn finite_or_err<F: Scalar>(v: F, what: &str, epoch: usize) -> Result<f64> {
    let v = v.to_f64_lossy();
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::NonFinite(format!("{what} at epoch {epoch}")))
    }
}

/// Fits the localizer to a fingerprint dataset.
///
/// Rows are first put in a canonical order, so any permutation of the same
/// rows trains identical parameters for a given seed. The returned model
/// carries the parameters of the best validation epoch.
pub fn train<F: Scalar>(ds: &FingerprintDataset, cfg: &TrainConfig) -> Result<(MlpModel<F>, TrainingReport)> {
    cfg.validate()?;
    if ds.rows.len() < 10 {
        return Err(Error::InsufficientData(format!("{} rows, need at least 10", ds.rows.len())));
    }
    if ds.ap_columns.is_empty() {
        return Err(Error::NoAccessPoints);
    }

    let mut canonical = ds.clone();
    canonical.rows.sort_by(row_order_key);
    let (features, targets) = impute::<F>(&canonical, cfg.fill_dbm);

    let (train_idx, val_idx) = split_indices(canonical.rows.len(), cfg.val_fraction, cfg.rng_seed);
    if train_idx.len() < cfg.batch_size {
        return Err(Error::InsufficientData(format!(
            "{} training rows after split, batch size {}",
            train_idx.len(),
            cfg.batch_size
        )));
    }

    let x_train_raw = features.select(Axis(0), &train_idx);
    let (mean, std) = column_stats(x_train_raw.view());
    let mut model = MlpModel::<F>::init_with(ds.ap_columns.len(), &cfg.hidden_layers, cfg.rng_seed)?;
    model.ap_columns = canonical.ap_columns.clone();
    model.feature_mean = mean;
    model.feature_std = std;
    model.fill_dbm = cfg.fill_dbm;

    let y_train_raw = targets.select(Axis(0), &train_idx);
    if cfg.standardize_targets {
        let (t_mean, t_std) = column_stats(y_train_raw.view());
        model.target_mean = t_mean;
        model.target_std = t_std;
    }
    let scale_targets = |y: Array2<F>| (y - &model.target_mean) / &model.target_std;

    let x_train = model.standardize(x_train_raw.view())?;
    let y_train = scale_targets(y_train_raw);
    let x_val = model.standardize(features.select(Axis(0), &val_idx).view())?;
    let y_val = scale_targets(targets.select(Axis(0), &val_idx));

    let mut adam = Adam::new(&model, cfg.learning_rate, cfg.adam_beta1, cfg.adam_beta2, cfg.adam_eps);
    let mut stopper = EarlyStopping::new(cfg.patience);
    let mut best = model.clone();
    let mut epochs = Vec::new();
    let mut order: Vec<usize> = (0..train_idx.len()).collect();
    let mut rng = seeded_stream(cfg.rng_seed, STREAM_BATCHES);
    let mut stopped_early = false;

    for epoch in 1..=cfg.epochs_max {
        order.shuffle(&mut rng);
        for batch in order.chunks(cfg.batch_size) {
            let xb = x_train.select(Axis(0), batch);
            let yb = y_train.select(Axis(0), batch);
            let (loss, grads) = model.loss_and_grads(xb.view(), yb.view())?;
            finite_or_err(loss, "batch loss", epoch)?;
            adam.step(&mut model, &grads);
        }
        let train_loss = finite_or_err(model.loss(x_train.view(), y_train.view())?, "train loss", epoch)?;
        let val_loss = finite_or_err(model.loss(x_val.view(), y_val.view())?, "validation loss", epoch)?;
        epochs.push(EpochRecord { epoch, train_loss, val_loss });
        if stopper.observe(epoch, val_loss) {
            best = model.clone();
        }
        if stopper.should_stop() {
            stopped_early = epoch < cfg.epochs_max;
            break;
        }
    }

    let (best_epoch, best_val_loss) = stopper.best();
    let report = TrainingReport {
        epochs,
        best_epoch,
        best_val_loss,
        stopped_early,
        n_train: train_idx.len(),
        n_val: val_idx.len(),
    };
    Ok((best, report))
}

/// Prediction matrix for every row of `ds`, imputing with the model's fill.
pub fn predict_dataset<F: Scalar>(model: &MlpModel<F>, ds: &FingerprintDataset) -> Result<Vec<(f64, f64)>> {
    let aligned = reorder_columns(ds, &model.ap_columns);
    let (x, _) = impute::<F>(&aligned, model.fill_dbm);
    let out = model.predict_raw(x.view())?;
    Ok(out.outer_iter().map(|r| (r[0].to_f64_lossy(), r[1].to_f64_lossy())).collect())
}

/// Re-expresses `ds` in the given column order; columns the dataset lacks
/// become absent.
pub fn reorder_columns(ds: &FingerprintDataset, columns: &[ApId]) -> FingerprintDataset {
    if ds.ap_columns == columns {
        return ds.clone();
    }
    let map: Vec<Option<usize>> = columns.iter().map(|c| ds.column_index(c)).collect();
    FingerprintDataset {
        ap_columns: columns.to_vec(),
        rows: ds
            .rows
            .iter()
            .map(|r| crate::types::FingerprintRow {
                t: r.t,
                x: r.x,
                y: r.y,
                rssi: map.iter().map(|m| m.and_then(|j| r.rssi[j])).collect(),
            })
            .collect(),
    }
}
