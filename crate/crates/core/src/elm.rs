//! Extreme learning machine with a single output unit.
//!
//! Hidden weights and biases are drawn once, uniformly on [-1, 1], and never
//! touched again. Only the output weights are learned, in closed form:
//!
//! * `ridge > 0`: `(HᵀH + λI) w = Hᵀy`, solved with a Cholesky factorization;
//! * `ridge = 0`: `w = H⁺y`, the minimum-norm least-squares solution, via SVD.
//!
//! The output unit has no bias: `f(x) = Σ_j w_j φ(ŵ_j·x + b̂_j)`.

use std::fs;
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::Label;
use crate::error::{Error, Result};
use crate::seed;

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Activation {
    Sigmoid,
    Tanh,
    /// Linear units; turns the model into plain (ridge) least squares on
    /// randomly projected inputs.
    Identity,
}

impl Activation {
    pub fn apply(self, z: f64) -> f64 {
        match self {
            Activation::Sigmoid => 1.0 / (1.0 + (-z).exp()),
            Activation::Tanh => z.tanh(),
            Activation::Identity => z,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ElmConfig {
    pub input_dim: usize,
    pub hidden_count: usize,
    pub activation: Activation,
    pub ridge: f64,
    pub seed: u64,
    pub classify_threshold: f64,
}

impl ElmConfig {
    pub fn new(input_dim: usize, hidden_count: usize) -> Self {
        ElmConfig {
            input_dim,
            hidden_count,
            activation: Activation::Sigmoid,
            ridge: 1e-3,
            seed: 0,
            classify_threshold: 0.5,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.input_dim == 0 || self.hidden_count == 0 {
            return Err(Error::InvalidArgument("input_dim and hidden_count must be ≥ 1".into()));
        }
        if !(self.ridge >= 0.0 && self.ridge.is_finite()) {
            return Err(Error::InvalidArgument(format!("ridge must be ≥ 0, got {}", self.ridge)));
        }
        if !(self.classify_threshold > 0.0 && self.classify_threshold < 1.0) {
            return Err(Error::InvalidArgument("classify_threshold must lie in (0, 1)".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ElmModel {
    config: ElmConfig,
    /// `hidden_count × input_dim`; row j is ŵ_j.
    hidden_weights: DMatrix<f64>,
    hidden_biases: DVector<f64>,
    output_weights: Option<DVector<f64>>,
}

fn check_finite(values: &[f64], what: &'static str) -> Result<()> {
    if values.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite(what))
    }
}

impl ElmModel {
    /// Draws the hidden layer from the seeded stream: weights row by row,
    /// then biases.
    pub fn init(config: ElmConfig) -> Result<Self> {
        config.validate()?;
        let mut rng = seed::rng(config.seed);
        let (h, m) = (config.hidden_count, config.input_dim);
        let mut hidden_weights = DMatrix::zeros(h, m);
        for j in 0..h {
            for k in 0..m {
                hidden_weights[(j, k)] = rng.gen_range(-1.0..=1.0);
            }
        }
        let hidden_biases = DVector::from_fn(h, |_, _| rng.gen_range(-1.0..=1.0));
        Ok(ElmModel { config, hidden_weights, hidden_biases, output_weights: None })
    }

    /// Builds a model around explicit hidden parameters.
    pub fn from_hidden(config: ElmConfig, weights: DMatrix<f64>, biases: DVector<f64>) -> Result<Self> {
        config.validate()?;
        if weights.shape() != (config.hidden_count, config.input_dim) || biases.len() != config.hidden_count {
            return Err(Error::Shape("hidden parameters do not match the config".into()));
        }
        check_finite(weights.as_slice(), "hidden weights")?;
        check_finite(biases.as_slice(), "hidden biases")?;
        Ok(ElmModel { config, hidden_weights: weights, hidden_biases: biases, output_weights: None })
    }

    pub fn config(&self) -> &ElmConfig {
        &self.config
    }

    pub fn hidden_weights(&self) -> &DMatrix<f64> {
        &self.hidden_weights
    }

    pub fn hidden_biases(&self) -> &DVector<f64> {
        &self.hidden_biases
    }

    pub fn output_weights(&self) -> Option<&DVector<f64>> {
        self.output_weights.as_ref()
    }

    pub fn is_fitted(&self) -> bool {
        self.output_weights.is_some()
    }

    /// `H[i, j] = φ(ŵ_j · x_i + b̂_j)` for the rows `x_i` of `x`.
    pub fn activation_matrix(&self, x: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        if x.ncols() != self.config.input_dim {
            return Err(Error::Shape(format!(
                "input has {} columns, model expects {}",
                x.ncols(),
                self.config.input_dim
            )));
        }
        let mut h = x * self.hidden_weights.transpose();
        let act = self.config.activation;
        for (j, mut col) in h.column_iter_mut().enumerate() {
            let b = self.hidden_biases[j];
            col.apply(|v| *v = act.apply(*v + b));
        }
        Ok(h)
    }

    fn hidden_response(&self, x: &[f64]) -> Result<DVector<f64>> {
        if x.len() != self.config.input_dim {
            return Err(Error::Shape(format!("input has length {}, model expects {}", x.len(), self.config.input_dim)));
        }
        let act = self.config.activation;
        Ok(DVector::from_fn(self.config.hidden_count, |j, _| {
            let z: f64 = self.hidden_weights.row(j).iter().zip(x).map(|(w, v)| w * v).sum();
            act.apply(z + self.hidden_biases[j])
        }))
    }

    /// Solves for the output weights on rows `x` with targets `y`.
    pub fn fit(&mut self, x: &DMatrix<f64>, y: &[f64]) -> Result<()> {
        if x.nrows() == 0 {
            return Err(Error::InvalidArgument("no training rows".into()));
        }
        if y.len() != x.nrows() {
            return Err(Error::Shape(format!("{} rows but {} targets", x.nrows(), y.len())));
        }
        check_finite(x.as_slice(), "inputs")?;
        check_finite(y, "targets")?;
        let h = self.activation_matrix(x)?;
        let y = DVector::from_column_slice(y);
        self.output_weights = Some(solve_output_weights(&h, &y, self.config.ridge)?);
        Ok(())
    }

    pub fn predict(&self, x: &[f64]) -> Result<f64> {
        let w = self.output_weights.as_ref().ok_or(Error::NotFitted)?;
        Ok(w.dot(&self.hidden_response(x)?))
    }

    pub fn predict_rows(&self, x: &DMatrix<f64>) -> Result<DVector<f64>> {
        let w = self.output_weights.as_ref().ok_or(Error::NotFitted)?;
        Ok(self.activation_matrix(x)? * w)
    }

    /// Positive iff `predict(x) ≥ classify_threshold`.
    pub fn classify(&self, x: &[f64]) -> Result<Label> {
        Ok(self.label_for(self.predict(x)?))
    }

    pub fn label_for(&self, score: f64) -> Label {
        if score >= self.config.classify_threshold {
            Label::Positive
        } else {
            Label::Negative
        }
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let file = ElmFile {
            format_version: FORMAT_VERSION,
            config: self.config,
            hidden_weights: row_major(&self.hidden_weights),
            hidden_biases: self.hidden_biases.as_slice().to_vec(),
            output_weights: self.output_weights.as_ref().map(|w| w.as_slice().to_vec()),
        };
        fs::write(path, serde_json::to_string_pretty(&file)?).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let f: ElmFile = serde_json::from_str(&text)?;
        if f.format_version != FORMAT_VERSION {
            return Err(Error::Schema(format!("unsupported ELM format {}", f.format_version)));
        }
        let (h, m) = (f.config.hidden_count, f.config.input_dim);
        if f.hidden_weights.len() != h * m {
            return Err(Error::Shape("hidden weight array length".into()));
        }
        let mut model = ElmModel::from_hidden(
            f.config,
            DMatrix::from_row_slice(h, m, &f.hidden_weights),
            DVector::from_vec(f.hidden_biases),
        )?;
        if let Some(w) = f.output_weights {
            if w.len() != h {
                return Err(Error::Shape("output weight array length".into()));
            }
            model.output_weights = Some(DVector::from_vec(w));
        }
        Ok(model)
    }
}

#[derive(Serialize, Deserialize)]
struct ElmFile {
    format_version: u32,
    config: ElmConfig,
    hidden_weights: Vec<f64>,
    hidden_biases: Vec<f64>,
    output_weights: Option<Vec<f64>>,
}

fn row_major(m: &DMatrix<f64>) -> Vec<f64> {
    m.row_iter().flat_map(|r| r.iter().copied().collect::<Vec<_>>()).collect()
}

/// Closed-form output weights for activation matrix `h`.
pub fn solve_output_weights(h: &DMatrix<f64>, y: &DVector<f64>, ridge: f64) -> Result<DVector<f64>> {
    if ridge > 0.0 {
        // An explicit transpose lets the product go through the blocked gemm.
        let ht = h.transpose();
        let mut gram = &ht * h;
        for i in 0..gram.nrows() {
            gram[(i, i)] += ridge;
        }
        cholesky_solve(gram, &(&ht * y))
    } else {
        let svd = h.clone().svd(true, true);
        let eps = f64::EPSILON * h.nrows().max(h.ncols()) as f64 * svd.singular_values.max();
        svd.solve(y, eps).map_err(|e| Error::InvalidArgument(e.to_string()))
    }
}

/// Solves `a x = b` for symmetric positive-definite `a` by `a = L Lᵀ`.
pub fn cholesky_solve(mut a: DMatrix<f64>, b: &DVector<f64>) -> Result<DVector<f64>> {
    let n = a.nrows();
    if a.ncols() != n || b.len() != n {
        return Err(Error::Shape("cholesky_solve needs a square system".into()));
    }
    // Factor in place: the lower triangle of `a` becomes L.
    for j in 0..n {
        let mut d = a[(j, j)];
        for k in 0..j {
            d -= a[(j, k)] * a[(j, k)];
        }
        if d <= 0.0 || !d.is_finite() {
            return Err(Error::InvalidArgument("matrix is not positive definite".into()));
        }
        let d = d.sqrt();
        a[(j, j)] = d;
        for i in j + 1..n {
            let mut s = a[(i, j)];
            for k in 0..j {
                s -= a[(i, k)] * a[(j, k)];
            }
            a[(i, j)] = s / d;
        }
    }
    let mut z = b.clone();
    for i in 0..n {
        let mut s = z[i];
        for k in 0..i {
            s -= a[(i, k)] * z[k];
        }
        z[i] = s / a[(i, i)];
    }
    for i in (0..n).rev() {
        let mut s = z[i];
        for k in i + 1..n {
            s -= a[(k, i)] * z[k];
        }
        z[i] = s / a[(i, i)];
    }
    Ok(z)
}

/// `‖Hw − y‖² + λ‖w‖²`.
pub fn ridge_cost(h: &DMatrix<f64>, y: &DVector<f64>, w: &DVector<f64>, ridge: f64) -> f64 {
    (h * w - y).norm_squared() + ridge * w.norm_squared()
}
