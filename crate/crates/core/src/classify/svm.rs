use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{ClassifyError, WeightVector};

/// Epochs without an objective improvement above `tol` before stopping.
const PATIENCE: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SvmParams {
    pub c: f64,
    pub max_epochs: usize,
    pub tol: f64,
    pub seed: u64,
}

impl Default for SvmParams {
    fn default() -> Self {
        SvmParams {
            c: 10.0,
            max_epochs: 2000,
            tol: 1e-6,
            seed: 42,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SupportVector {
    pub alpha: f64,
    /// `+1` or `-1`.
    pub y: f64,
    pub x: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SvmModel {
    pub feature_names: Vec<String>,
    pub weights: Vec<f64>,
    pub bias: f64,
    pub support: Vec<SupportVector>,
    pub params: SvmParams,
    pub converged: bool,
    pub epochs: usize,
    /// Best objective after each epoch.
    pub loss_history: Vec<f64>,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `λ/2·‖w‖² + (1/n)·Σ max(0, 1 − yᵢ(w·xᵢ + b))` with `y ∈ {−1, +1}`.
pub fn objective(w: &[f64], b: f64, x: &[Vec<f64>], y: &[f64], lambda: f64) -> f64 {
    let n = x.len().max(1) as f64;
    let hinge: f64 = x.iter().zip(y).map(|(xi, yi)| (1.0 - yi * (dot(w, xi) + b)).max(0.0)).sum();
    0.5 * lambda * dot(w, w) + hinge / n
}

/// A subgradient of [`objective`]: margin exactly 1 counts as satisfied.
pub fn objective_subgradient(w: &[f64], b: f64, x: &[Vec<f64>], y: &[f64], lambda: f64) -> (Vec<f64>, f64) {
    let n = x.len().max(1) as f64;
    let mut gw: Vec<f64> = w.iter().map(|wi| lambda * wi).collect();
    let mut gb = 0.0;
    for (xi, yi) in x.iter().zip(y) {
        if yi * (dot(w, xi) + b) < 1.0 {
            for (g, v) in gw.iter_mut().zip(xi) {
                *g -= yi * v / n;
            }
            gb -= yi / n;
        }
    }
    (gw, gb)
}

/// Full-batch subgradient descent with `η_t = 1/(λt)`, `λ = 1/(C·n)`,
/// returning the best iterate seen. `converged` is false when the objective
/// was still improving by more than `tol` at `max_epochs`.
pub fn svm_train(
    matrix: &[Vec<f64>],
    labels: &[u8],
    feature_names: &[String],
    params: SvmParams,
) -> Result<SvmModel, ClassifyError> {
    if let Some(&bad) = labels.iter().find(|l| **l > 1) {
        return Err(ClassifyError::BadLabel(bad));
    }
    for label in [0u8, 1] {
        if !labels.contains(&(1 - label)) {
            return Err(ClassifyError::SingleClassTraining { label });
        }
    }
    let dim = matrix[0].len();
    if let Some(r) = matrix.iter().find(|r| r.len() != dim) {
        return Err(ClassifyError::RaggedVectors {
            expected: dim,
            found: r.len(),
        });
    }
    let mut order: Vec<usize> = (0..matrix.len()).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(params.seed));
    let x: Vec<Vec<f64>> = order.iter().map(|i| matrix[*i].clone()).collect();
    let y: Vec<f64> = order.iter().map(|i| if labels[*i] == 1 { 1.0 } else { -1.0 }).collect();
    let n = x.len() as f64;
    let lambda = 1.0 / (params.c * n);

    // The optimum lies in ‖w‖ ≤ 1/√λ, and then |b| ≤ 1 + ‖w‖·max‖x‖.
    let radius = 1.0 / lambda.sqrt();
    let b_bound = 1.0 + radius * x.iter().map(|xi| dot(xi, xi).sqrt()).fold(0.0, f64::max);
    let mut w = vec![0.0; dim];
    let mut b = 0.0;
    let mut alpha = vec![0.0; x.len()];
    let mut best = (objective(&w, b, &x, &y, lambda), w.clone(), b, alpha.clone());
    let mut history = Vec::new();
    let mut last_gain = 0;
    let mut converged = false;
    let mut epochs = 0;
    for t in 1..=params.max_epochs {
        epochs = t;
        let (gw, gb) = objective_subgradient(&w, b, &x, &y, lambda);
        if gw.iter().all(|g| *g == 0.0) && gb == 0.0 {
            converged = true;
            history.push(best.0);
            break;
        }
        let eta = 1.0 / (lambda * t as f64);
        let shrink = 1.0 - eta * lambda;
        let violators: Vec<bool> = x.iter().zip(&y).map(|(xi, yi)| yi * (dot(&w, xi) + b) < 1.0).collect();
        for (a, v) in alpha.iter_mut().zip(&violators) {
            *a = *a * shrink + if *v { eta / n } else { 0.0 };
        }
        for (wi, g) in w.iter_mut().zip(&gw) {
            *wi -= eta * g;
        }
        b -= eta * gb;
        let scale = project(&mut w, &mut b, radius, b_bound);
        alpha.iter_mut().for_each(|a| *a *= scale);
        let obj = objective(&w, b, &x, &y, lambda);
        if obj < best.0 {
            if best.0 - obj > params.tol {
                last_gain = t;
            }
            best = (obj, w.clone(), b, alpha.clone());
        }
        history.push(best.0);
        if t - last_gain >= PATIENCE {
            converged = true;
            break;
        }
    }
    if let Some(polished) = polish_margin(&best, &x, &y, lambda) {
        best = polished;
        if let Some(last) = history.last_mut() {
            *last = best.0;
        }
    }
    let (_, weights, bias, alpha) = best;
    let support = alpha
        .iter()
        .enumerate()
        .filter(|(_, a)| **a > 0.0)
        .map(|(i, a)| SupportVector {
            alpha: *a,
            y: y[i],
            x: x[i].clone(),
        })
        .collect();
    Ok(SvmModel {
        feature_names: feature_names.to_vec(),
        weights,
        bias,
        support,
        params,
        converged,
        epochs,
        loss_history: history,
    })
}

/// Returns the factor `w` was scaled by.
fn project(w: &mut [f64], b: &mut f64, radius: f64, b_bound: f64) -> f64 {
    *b = b.clamp(-b_bound, b_bound);
    let norm = dot(w, w).sqrt();
    if norm > radius {
        let s = radius / norm;
        w.iter_mut().for_each(|v| *v *= s);
        s
    } else {
        1.0
    }
}

type Iterate = (f64, Vec<f64>, f64, Vec<f64>);

/// When the iterate separates the data with a smallest functional margin
/// just under 1, rescaling it onto the margin clears the residual hinge.
/// Kept only if the objective does not grow.
fn polish_margin(best: &Iterate, x: &[Vec<f64>], y: &[f64], lambda: f64) -> Option<Iterate> {
    let (obj, w, b, alpha) = best;
    let m = x
        .iter()
        .zip(y)
        .map(|(xi, yi)| yi * (dot(w, xi) + b))
        .fold(f64::INFINITY, f64::min);
    if !(m > 0.0 && m < 1.0) {
        return None;
    }
    let w2: Vec<f64> = w.iter().map(|v| v / m).collect();
    let b2 = b / m;
    let obj2 = objective(&w2, b2, x, y, lambda);
    (obj2 <= *obj).then(|| (obj2, w2, b2, alpha.iter().map(|a| a / m).collect()))
}

pub fn decision(model: &SvmModel, v: &[f64]) -> Result<f64, ClassifyError> {
    if v.len() != model.weights.len() {
        return Err(ClassifyError::DimensionMismatch {
            expected: model.weights.len(),
            found: v.len(),
        });
    }
    Ok(dot(&model.weights, v) + model.bias)
}

/// `1` when `w·v + b > 0`, else `0`.
pub fn svm_predict(model: &SvmModel, v: &WeightVector) -> Result<u8, ClassifyError> {
    Ok(u8::from(decision(model, &v.entries)? > 0.0))
}

/// Same rule through the support-vector expansion `Σ αᵢ yᵢ xᵢ·v + b`.
pub fn svm_predict_dual(model: &SvmModel, v: &WeightVector) -> Result<u8, ClassifyError> {
    decision(model, &v.entries)?;
    let s: f64 = model.support.iter().map(|sv| sv.alpha * sv.y * dot(&sv.x, &v.entries)).sum();
    Ok(u8::from(s + model.bias > 0.0))
}
