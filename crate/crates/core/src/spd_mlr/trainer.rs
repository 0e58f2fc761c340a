//! A desk-scale MLR trainer: central finite-difference gradients over every
//! parameter entry and gradient descent with step backtracking.
//!
//! Each class is parameterized as `P_k = exp(S_k)` with `S_k` and `W_k`
//! symmetric, so iterates stay SPD without projection.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{GyroError, Result};
use crate::matker::{sym_exp, Mat, SpdMatrix, SymMatrix};
use crate::spd_gyro::SpdMetric;

use super::{argmax, Hypergyroplane, MlrModel, PlaneScorer, PointFeatures};

pub const MAX_ORDER: usize = 5;
pub const MAX_CLASSES: usize = 4;
pub const MAX_SAMPLES: usize = 500;

#[derive(Debug, Clone, PartialEq)]
pub struct FitConfig {
    pub metric: SpdMetric,
    pub epochs: usize,
    pub learning_rate: f64,
    pub fd_step: f64,
    /// Seeds the initial normals.
    pub seed: u64,
}

impl Default for FitConfig {
    fn default() -> Self {
        FitConfig {
            metric: SpdMetric::Le,
            epochs: 150,
            learning_rate: 1.0,
            fd_step: 1e-5,
            seed: 7,
        }
    }
}

#[derive(Debug, Clone)]
pub struct FitReport {
    pub model: MlrModel,
    /// Mean cross-entropy before training, then after each epoch.
    pub losses: Vec<f64>,
    pub train_accuracy: f64,
}

impl FitReport {
    pub fn initial_loss(&self) -> f64 {
        self.losses[0]
    }

    pub fn final_loss(&self) -> f64 {
        *self.losses.last().expect("at least the initial loss")
    }
}

/// Labeled SPD clusters: class means are random symmetric matrices in
/// log-space, samples add symmetric Gaussian noise of deviation `noise`.
/// Labels cycle through the classes.
pub fn synthetic_clusters(
    n: usize,
    classes: usize,
    samples: usize,
    noise: f64,
    seed: u64,
) -> Result<Vec<(SpdMatrix, usize)>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut sym = |scale: f64| {
        let a = Mat::from_fn(n, n, |_, _| scale * rng.sample::<f64, _>(StandardNormal));
        SymMatrix::from_symmetric_part(&a)
    };
    let means: Vec<SymMatrix> = (0..classes).map(|_| sym(1.0)).collect();
    (0..samples)
        .map(|i| {
            let k = i % classes;
            Ok((sym_exp(&means[k].add(&sym(noise)))?, k))
        })
        .collect()
}

/// Synthetic-cluster training demo.
#[derive(Debug, Clone, PartialEq)]
pub struct DemoConfig {
    pub n: usize,
    pub classes: usize,
    pub samples: usize,
    pub noise: f64,
    pub epochs: usize,
    /// Seeds both the data and the initial normals.
    pub seed: u64,
}

impl Default for DemoConfig {
    fn default() -> Self {
        DemoConfig {
            n: 3,
            classes: 3,
            samples: 300,
            noise: 0.15,
            epochs: 150,
            seed: 7,
        }
    }
}

/// Generates the demo clusters and fits them under `metric`.
pub fn demo_fit(cfg: &DemoConfig, metric: SpdMetric) -> Result<FitReport> {
    if cfg.n == 0 || cfg.n > MAX_ORDER {
        return Err(GyroError::InvalidConfig(format!(
            "matrix order must be in 1..={MAX_ORDER}, got {}",
            cfg.n
        )));
    }
    if cfg.samples == 0 || cfg.samples > MAX_SAMPLES {
        return Err(GyroError::InvalidConfig(format!(
            "sample count must be in 1..={MAX_SAMPLES}, got {}",
            cfg.samples
        )));
    }
    if !(cfg.noise >= 0.0 && cfg.noise.is_finite()) {
        return Err(GyroError::InvalidConfig(format!("noise must be non-negative, got {}", cfg.noise)));
    }
    let data = synthetic_clusters(cfg.n, cfg.classes, cfg.samples, cfg.noise, cfg.seed)?;
    let fit = FitConfig {
        metric,
        epochs: cfg.epochs,
        seed: cfg.seed,
        ..FitConfig::default()
    };
    mlr_fit_fd(&data, cfg.classes, &fit)
}

fn lower_entries(n: usize) -> Vec<(usize, usize)> {
    (0..n).flat_map(|i| (0..=i).map(move |j| (i, j))).collect()
}

fn bump(m: &SymMatrix, (i, j): (usize, usize), h: f64) -> SymMatrix {
    let mut out = m.as_mat().clone();
    out[(i, j)] += h;
    if i != j {
        out[(j, i)] += h;
    }
    SymMatrix::from_symmetric_part(&out)
}

struct ClassState {
    s: SymMatrix,
    w: SymMatrix,
    scorer: PlaneScorer,
    /// `A` factor of every sample for the current base point.
    a: Vec<Mat>,
}

impl ClassState {
    fn new(metric: SpdMetric, s: SymMatrix, w: SymMatrix, feats: &[PointFeatures]) -> Result<Self> {
        let p = sym_exp(&s)?;
        let scorer = PlaneScorer::from_parts(metric, &p, &w)?;
        let a = feats
            .iter()
            .map(|f| scorer.point_image(f))
            .collect::<Result<Vec<_>>>()?;
        Ok(ClassState { s, w, scorer, a })
    }

    fn logits(&self) -> Vec<f64> {
        let b = self.scorer.normal_image();
        self.a.iter().map(|a| a.dot(b)).collect()
    }

    /// Logits after replacing the normal, reusing the cached `A` factors.
    fn logits_with_normal(&self, w: &SymMatrix) -> Result<Vec<f64>> {
        let scorer = self.scorer.with_normal(w)?;
        let b = scorer.normal_image();
        Ok(self.a.iter().map(|a| a.dot(b)).collect())
    }
}

fn cross_entropy(columns: &[Vec<f64>], labels: &[usize]) -> f64 {
    let n = labels.len();
    let mut total = 0.0;
    for (i, &y) in labels.iter().enumerate() {
        let top = columns.iter().map(|c| c[i]).fold(f64::NEG_INFINITY, f64::max);
        let lse = top + columns.iter().map(|c| (c[i] - top).exp()).sum::<f64>().ln();
        total += lse - columns[y][i];
    }
    total / n as f64
}

fn accuracy(columns: &[Vec<f64>], labels: &[usize]) -> f64 {
    let hits = labels
        .iter()
        .enumerate()
        .filter(|&(i, &y)| {
            let row: Vec<f64> = columns.iter().map(|c| c[i]).collect();
            argmax(&row) == y
        })
        .count();
    hits as f64 / labels.len() as f64
}

fn validate(data: &[(SpdMatrix, usize)], classes: usize, cfg: &FitConfig) -> Result<usize> {
    if classes < 2 {
        return Err(GyroError::InvalidConfig(format!(
            "MLR needs at least 2 classes, got {classes}"
        )));
    }
    if classes > MAX_CLASSES {
        return Err(GyroError::InvalidConfig(format!(
            "at most {MAX_CLASSES} classes are supported, got {classes}"
        )));
    }
    if data.is_empty() || data.len() > MAX_SAMPLES {
        return Err(GyroError::InvalidConfig(format!(
            "between 1 and {MAX_SAMPLES} samples are supported, got {}",
            data.len()
        )));
    }
    let n = data[0].0.order();
    if n > MAX_ORDER {
        return Err(GyroError::InvalidConfig(format!(
            "matrix order at most {MAX_ORDER} is supported, got {n}"
        )));
    }
    if let Some((x, _)) = data.iter().find(|(x, _)| x.order() != n) {
        return Err(GyroError::DimMismatch(format!("orders {n} and {}", x.order())));
    }
    if let Some((_, y)) = data.iter().find(|(_, y)| *y >= classes) {
        return Err(GyroError::InvalidConfig(format!("label {y} outside 0..{classes}")));
    }
    if !(cfg.learning_rate > 0.0 && cfg.fd_step > 0.0) {
        return Err(GyroError::InvalidConfig(
            "learning rate and finite-difference step must be positive".into(),
        ));
    }
    Ok(n)
}

/// Fits a single-block MLR model by minimizing mean cross-entropy.
///
/// Fails with `NonConvergence` if no epoch lowered the loss.
pub fn mlr_fit_fd(data: &[(SpdMatrix, usize)], classes: usize, cfg: &FitConfig) -> Result<FitReport> {
    let n = validate(data, classes, cfg)?;
    let metric = cfg.metric;
    let labels: Vec<usize> = data.iter().map(|(_, y)| *y).collect();
    let feats = data
        .iter()
        .map(|(x, _)| PointFeatures::new(metric, x))
        .collect::<Result<Vec<_>>>()?;

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut states = (0..classes)
        .map(|_| {
            let w = Mat::from_fn(n, n, |_, _| 0.1 * rng.sample::<f64, _>(StandardNormal));
            ClassState::new(metric, SymMatrix::zeros(n), SymMatrix::from_symmetric_part(&w), &feats)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut columns: Vec<Vec<f64>> = states.iter().map(ClassState::logits).collect();
    let mut loss = cross_entropy(&columns, &labels);
    let mut losses = vec![loss];

    let entries = lower_entries(n);
    let h = cfg.fd_step;
    let mut lr = cfg.learning_rate;
    for _ in 0..cfg.epochs {
        // gradient[k] = (dS entries, dW entries)
        let mut grad: Vec<(Vec<f64>, Vec<f64>)> = Vec::with_capacity(classes);
        for k in 0..classes {
            let side = |perturbed: &dyn Fn(f64) -> Result<Vec<f64>>| -> Result<f64> {
                let mut cols = columns.clone();
                cols[k] = perturbed(h)?;
                let up = cross_entropy(&cols, &labels);
                cols[k] = perturbed(-h)?;
                let down = cross_entropy(&cols, &labels);
                Ok((up - down) / (2.0 * h))
            };
            let st = &states[k];
            let mut gs = Vec::with_capacity(entries.len());
            let mut gw = Vec::with_capacity(entries.len());
            for &e in &entries {
                gs.push(side(&|t| {
                    Ok(ClassState::new(metric, bump(&st.s, e, t), st.w.clone(), &feats)?.logits())
                })?);
                gw.push(side(&|t| st.logits_with_normal(&bump(&st.w, e, t)))?);
            }
            grad.push((gs, gw));
        }

        let mut accepted = false;
        for _ in 0..30 {
            let trial = states
                .iter()
                .zip(&grad)
                .map(|(st, (gs, gw))| {
                    let mut s = st.s.as_mat().clone();
                    let mut w = st.w.as_mat().clone();
                    for (idx, &(i, j)) in entries.iter().enumerate() {
                        // Off-diagonal parameters move both mirrored entries.
                        s[(i, j)] -= lr * gs[idx];
                        w[(i, j)] -= lr * gw[idx];
                        if i != j {
                            s[(j, i)] = s[(i, j)];
                            w[(j, i)] = w[(i, j)];
                        }
                    }
                    ClassState::new(
                        metric,
                        SymMatrix::from_symmetric_part(&s),
                        SymMatrix::from_symmetric_part(&w),
                        &feats,
                    )
                })
                .collect::<Result<Vec<_>>>();
            if let Ok(trial) = trial {
                let cols: Vec<Vec<f64>> = trial.iter().map(ClassState::logits).collect();
                let trial_loss = cross_entropy(&cols, &labels);
                if trial_loss < loss {
                    states = trial;
                    columns = cols;
                    loss = trial_loss;
                    lr *= 1.2;
                    accepted = true;
                    break;
                }
            }
            lr *= 0.5;
        }
        losses.push(loss);
        if !accepted {
            break;
        }
    }

    if !(losses.last().copied().unwrap_or(f64::NAN) < losses[0]) {
        return Err(GyroError::NonConvergence(format!(
            "loss stayed at {:.6e} after {} epochs",
            losses[0],
            losses.len() - 1
        )));
    }

    let train_accuracy = accuracy(&columns, &labels);
    let planes = states
        .into_iter()
        .map(|st| Hypergyroplane::new(metric, sym_exp(&st.s)?, st.w))
        .collect::<Result<Vec<_>>>()?;
    Ok(FitReport {
        model: MlrModel::from_planes(metric, planes)?,
        losses,
        train_accuracy,
    })
}
