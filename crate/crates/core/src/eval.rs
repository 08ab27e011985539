//! Classification metrics, a primal hinge-loss SVM baseline and a k-fold
//! paired comparison against the ELM.

use std::fmt::Write as _;
use std::time::Instant;

use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::corpus::Label;
use crate::elm::{ElmConfig, ElmModel};
use crate::error::{Error, Result};
use crate::profile::fmt_real;
use crate::seed;

fn check_lengths(pred: &[Label], gold: &[Label]) -> Result<()> {
    if pred.is_empty() || pred.len() != gold.len() {
        return Err(Error::Shape(format!("{} predictions for {} gold labels", pred.len(), gold.len())));
    }
    Ok(())
}

pub fn accuracy(pred: &[Label], gold: &[Label]) -> Result<f64> {
    check_lengths(pred, gold)?;
    let hits = pred.iter().zip(gold).filter(|(p, g)| p == g).count();
    Ok(hits as f64 / gold.len() as f64)
}

/// Unweighted mean of the two per-class F1 scores.
///
/// A class absent from both sequences scores 1; a class whose precision and
/// recall are both zero scores 0. The mean is formed as one exact fraction
/// and rounded once.
pub fn macro_f1(pred: &[Label], gold: &[Label]) -> Result<f64> {
    check_lengths(pred, gold)?;
    // Per-class F1 as numerator/denominator: 2tp / (2tp + fp + fn).
    let f1 = |class: Label| -> (u64, u64) {
        let (mut tp, mut fp, mut fnn) = (0u64, 0u64, 0u64);
        for (&p, &g) in pred.iter().zip(gold) {
            match (p == class, g == class) {
                (true, true) => tp += 1,
                (true, false) => fp += 1,
                (false, true) => fnn += 1,
                _ => {}
            }
        }
        if tp + fp + fnn == 0 {
            (1, 1)
        } else {
            (2 * tp, 2 * tp + fp + fnn)
        }
    };
    let (a, b) = f1(Label::Negative);
    let (c, d) = f1(Label::Positive);
    Ok((a * d + c * b) as f64 / (2 * b * d) as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BaselineConfig {
    pub epochs: usize,
    /// L2 weight λ of the SVM objective.
    pub reg: f64,
    pub seed: u64,
}

impl Default for BaselineConfig {
    fn default() -> Self {
        BaselineConfig { epochs: 50, reg: 1e-4, seed: 0 }
    }
}

/// Linear classifier `sign(w·x + b)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearModel {
    pub weights: Vec<f64>,
    pub bias: f64,
    /// Label returned when the score is exactly zero: the training majority.
    pub tie: Label,
    pub train_time: f64,
}

impl LinearModel {
    pub fn score(&self, x: &[f64]) -> f64 {
        self.weights.iter().zip(x).map(|(w, v)| w * v).sum::<f64>() + self.bias
    }

    pub fn classify(&self, x: &[f64]) -> Label {
        let s = self.score(x);
        if s > 0.0 {
            Label::Positive
        } else if s < 0.0 {
            Label::Negative
        } else {
            self.tie
        }
    }
}

fn check_rows(x: &[Vec<f64>], y: &[Label]) -> Result<usize> {
    if x.is_empty() || x.len() != y.len() {
        return Err(Error::Shape(format!("{} rows but {} labels", x.len(), y.len())));
    }
    let d = x[0].len();
    if x.iter().any(|r| r.len() != d) {
        return Err(Error::Shape("ragged feature rows".into()));
    }
    if x.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("features"));
    }
    Ok(d)
}

/// Pegasos: stochastic sub-gradient descent on
/// `λ/2 ‖w‖² + mean(max(0, 1 − y (w·x + b)))` with step `1/(λt)` and
/// projection onto the ball of radius `1/√λ`. The bias is an extra weight on
/// a constant feature.
pub fn train_linear_baseline(x: &[Vec<f64>], y: &[Label], config: &BaselineConfig) -> Result<LinearModel> {
    let d = check_rows(x, y)?;
    if !(config.reg.is_finite() && config.reg > 0.0) {
        return Err(Error::InvalidArgument("reg must be positive".into()));
    }
    let positives = y.iter().filter(|&&l| l == Label::Positive).count();
    let tie = if 2 * positives >= y.len() { Label::Positive } else { Label::Negative };
    let start = Instant::now();
    let lambda = config.reg;
    let radius = 1.0 / lambda.sqrt();
    let signs: Vec<f64> = y.iter().map(|&l| if l == Label::Positive { 1.0 } else { -1.0 }).collect();
    let mut w = vec![0.0; d + 1];
    let mut order: Vec<usize> = (0..x.len()).collect();
    let mut rng = seed::rng(seed::derive(config.seed, "pegasos"));
    let mut t = 0u64;
    for _ in 0..config.epochs {
        order.shuffle(&mut rng);
        for &i in &order {
            t += 1;
            let eta = 1.0 / (lambda * t as f64);
            let row = &x[i];
            let margin = signs[i] * (w[..d].iter().zip(row).map(|(a, b)| a * b).sum::<f64>() + w[d]);
            let shrink = 1.0 - eta * lambda;
            w.iter_mut().for_each(|v| *v *= shrink);
            if margin < 1.0 {
                let step = eta * signs[i];
                for (wj, xj) in w[..d].iter_mut().zip(row) {
                    *wj += step * xj;
                }
                w[d] += step;
            }
            let norm = w.iter().map(|v| v * v).sum::<f64>().sqrt();
            if norm > radius {
                let s = radius / norm;
                w.iter_mut().for_each(|v| *v *= s);
            }
        }
    }
    let train_time = start.elapsed().as_secs_f64();
    let bias = w.pop().expect("bias slot");
    Ok(LinearModel { weights: w, bias, tie, train_time })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FoldResult {
    pub fold_index: usize,
    pub accuracy: f64,
    pub macro_f1: f64,
    /// Seconds spent in training only.
    pub train_time: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairedT {
    pub t: f64,
    pub p: f64,
    /// Differences had zero spread but a nonzero mean.
    pub degenerate: bool,
}

/// Two-sided p-value of `t` under Student's t with `df` degrees of freedom.
pub fn student_t_p(t: f64, df: f64) -> Result<f64> {
    let dist = StudentsT::new(0.0, 1.0, df).map_err(|e| Error::InvalidArgument(e.to_string()))?;
    Ok((2.0 * dist.sf(t.abs())).min(1.0))
}

/// Paired t-test on per-fold differences.
pub fn paired_t(diffs: &[f64]) -> Result<PairedT> {
    let k = diffs.len();
    if k < 2 {
        return Err(Error::InvalidArgument("paired t-test needs at least two pairs".into()));
    }
    if diffs.iter().any(|d| !d.is_finite()) {
        return Err(Error::NonFinite("differences"));
    }
    let mean = diffs.iter().sum::<f64>() / k as f64;
    let var = diffs.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / (k - 1) as f64;
    if diffs.iter().all(|&d| d == 0.0) {
        return Ok(PairedT { t: 0.0, p: 1.0, degenerate: false });
    }
    if var == 0.0 {
        return Ok(PairedT { t: mean.signum() * f64::INFINITY, p: 0.0, degenerate: true });
    }
    let t = mean / (var.sqrt() / (k as f64).sqrt());
    Ok(PairedT { t, p: student_t_p(t, (k - 1) as f64)?, degenerate: false })
}

/// Test-set indices of each fold; seeded shuffle, then round-robin.
pub fn kfold_indices(n: usize, k: usize, seed_value: u64) -> Result<Vec<Vec<usize>>> {
    if k < 2 || n < k {
        return Err(Error::InvalidArgument(format!("need k ≥ 2 and N ≥ k, got k={k}, N={n}")));
    }
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(&mut seed::rng(seed::derive(seed_value, "folds")));
    let mut folds = vec![Vec::with_capacity(n / k + 1); k];
    for (pos, idx) in perm.into_iter().enumerate() {
        folds[pos % k].push(idx);
    }
    folds.iter_mut().for_each(|f| f.sort_unstable());
    Ok(folds)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub elm: Vec<FoldResult>,
    pub baseline: Vec<FoldResult>,
    /// Test on ELM accuracy minus baseline accuracy.
    pub test: PairedT,
    /// Mean baseline training time over mean ELM training time.
    pub speed_ratio: f64,
}

fn mean(xs: impl Iterator<Item = f64>) -> f64 {
    let (s, n) = xs.fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    s / n.max(1) as f64
}

impl Comparison {
    pub fn mean_accuracy(folds: &[FoldResult]) -> f64 {
        mean(folds.iter().map(|f| f.accuracy))
    }

    pub fn mean_macro_f1(folds: &[FoldResult]) -> f64 {
        mean(folds.iter().map(|f| f.macro_f1))
    }

    pub fn mean_time(folds: &[FoldResult]) -> f64 {
        mean(folds.iter().map(|f| f.train_time))
    }

    /// Per-fold rows, one summary row per model and a `#` trailer line.
    pub fn to_tsv(&self) -> String {
        let mut out = String::from("model\tfold\taccuracy\tmacro_f1\ttrain_time\n");
        for (name, folds) in [("elm", &self.elm), ("baseline", &self.baseline)] {
            for f in folds.iter() {
                let _ = writeln!(
                    out,
                    "{name}\t{}\t{}\t{}\t{}",
                    f.fold_index,
                    fmt_real(f.accuracy),
                    fmt_real(f.macro_f1),
                    fmt_real(f.train_time)
                );
            }
        }
        for (name, folds) in [("elm", &self.elm), ("baseline", &self.baseline)] {
            let _ = writeln!(
                out,
                "{name}\tmean\t{}\t{}\t{}",
                fmt_real(Self::mean_accuracy(folds)),
                fmt_real(Self::mean_macro_f1(folds)),
                fmt_real(Self::mean_time(folds))
            );
        }
        let _ = writeln!(
            out,
            "# protocol=kfold k={} t={} p={} degenerate={} speed_ratio={}",
            self.elm.len(),
            fmt_real(self.test.t),
            fmt_real(self.test.p),
            self.test.degenerate,
            fmt_real(self.speed_ratio)
        );
        out
    }
}

/// Trains and scores both classifiers on every fold. Timings are taken
/// serially around the training calls only.
pub fn kfold_compare(
    x: &[Vec<f64>],
    y: &[Label],
    k: usize,
    elm: &ElmConfig,
    baseline: &BaselineConfig,
    seed_value: u64,
) -> Result<Comparison> {
    let d = check_rows(x, y)?;
    if elm.input_dim != d {
        return Err(Error::Shape(format!("ELM expects {} inputs, features have {d}", elm.input_dim)));
    }
    let folds = kfold_indices(x.len(), k, seed_value)?;
    let mut in_test = vec![usize::MAX; x.len()];
    for (f, idx) in folds.iter().enumerate() {
        idx.iter().for_each(|&i| in_test[i] = f);
    }
    let mut elm_results = Vec::with_capacity(k);
    let mut base_results = Vec::with_capacity(k);
    for (f, test) in folds.iter().enumerate() {
        let train: Vec<usize> = (0..x.len()).filter(|&i| in_test[i] != f).collect();
        let train_x: Vec<Vec<f64>> = train.iter().map(|&i| x[i].clone()).collect();
        let train_y: Vec<Label> = train.iter().map(|&i| y[i]).collect();
        let gold: Vec<Label> = test.iter().map(|&i| y[i]).collect();

        let xm = DMatrix::from_fn(train.len(), d, |r, c| train_x[r][c]);
        let targets: Vec<f64> = train_y.iter().map(|l| l.as_f64()).collect();
        let cfg = ElmConfig { seed: seed::derive_indexed(elm.seed, "fold", f as u64), ..*elm };
        let start = Instant::now();
        let mut model = ElmModel::init(cfg)?;
        model.fit(&xm, &targets)?;
        let elm_time = start.elapsed().as_secs_f64();
        let pred = test.iter().map(|&i| model.classify(&x[i])).collect::<Result<Vec<_>>>()?;
        elm_results.push(FoldResult {
            fold_index: f,
            accuracy: accuracy(&pred, &gold)?,
            macro_f1: macro_f1(&pred, &gold)?,
            train_time: elm_time,
        });

        let bcfg = BaselineConfig { seed: seed::derive_indexed(baseline.seed, "fold", f as u64), ..*baseline };
        let start = Instant::now();
        let lin = train_linear_baseline(&train_x, &train_y, &bcfg)?;
        let base_time = start.elapsed().as_secs_f64();
        let pred: Vec<Label> = test.iter().map(|&i| lin.classify(&x[i])).collect();
        base_results.push(FoldResult {
            fold_index: f,
            accuracy: accuracy(&pred, &gold)?,
            macro_f1: macro_f1(&pred, &gold)?,
            train_time: base_time,
        });
    }
    let diffs: Vec<f64> = elm_results.iter().zip(&base_results).map(|(a, b)| a.accuracy - b.accuracy).collect();
    let test = paired_t(&diffs)?;
    let elm_mean = Comparison::mean_time(&elm_results);
    let speed_ratio = Comparison::mean_time(&base_results) / elm_mean.max(f64::MIN_POSITIVE);
    Ok(Comparison { elm: elm_results, baseline: base_results, test, speed_ratio })
}
