//! RBF-kernel support vector machines trained by sequential minimal
//! optimization, with the grid-search cross-validation protocol used by the
//! classification experiments.
//!
//! Binary problems are solved on the dual with the maximal-violating-pair
//! working-set rule; multiclass problems use one-versus-one voting.
//! Features are z-scored with training-fold statistics before the kernel is
//! evaluated (counts and length totals live on wildly different scales).

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};

const SMO_TOLERANCE: f64 = 1e-3;
const SMO_MAX_ITER: usize = 100_000;

/// The (h, eta) search grid: slack penalty by kernel width.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    pub h_values: Vec<f64>,
    pub eta_values: Vec<f64>,
}

impl Default for GridSpec {
    /// 18 slack penalties (0.5, 0.7, 0.9 and the odd integers 1..=29) by 250
    /// kernel widths evenly spaced from 0.0001 to 0.1001.
    fn default() -> Self {
        let mut h_values = vec![0.5, 0.7, 0.9];
        h_values.extend((0..15).map(|k| 1.0 + 2.0 * k as f64));
        let eta_values = (0..250)
            .map(|k| 0.0001 + 0.1 * k as f64 / 249.0)
            .collect();
        GridSpec { h_values, eta_values }
    }
}

impl GridSpec {
    /// Small grid for smoke tests and quick runs.
    pub fn coarse() -> Self {
        GridSpec {
            h_values: vec![1.0, 9.0, 29.0],
            eta_values: (0..10).map(|k| 0.0001 + 0.1 * k as f64 / 9.0).collect(),
        }
    }
}

/// Solution of one binary dual problem.
#[derive(Debug, Clone)]
pub struct BinarySolution {
    pub alpha: Vec<f64>,
    pub bias: f64,
    /// Dual objective in maximization form.
    pub objective: f64,
    /// Final maximal KKT violation (m - M).
    pub kkt_violation: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Solve the SVM dual for labels in {-1, +1} over a precomputed kernel.
///
/// `kernel[i * n + j]` holds K(x_i, x_j). The working set is the maximal
/// KKT-violating pair; the dual objective is nondecreasing across iterations
/// and iteration is capped with `converged = false` past the cap.
pub fn solve_binary(kernel: &[f64], y: &[f64], c: f64, tol: f64, max_iter: usize) -> BinarySolution {
    let n = y.len();
    debug_assert_eq!(kernel.len(), n * n);
    let mut alpha = vec![0.0f64; n];
    // Gradient of (1/2) a^T Q a - e^T a, so -e at the origin.
    let mut grad = vec![-1.0f64; n];
    let k = |i: usize, j: usize| kernel[i * n + j];

    let mut iterations = 0;
    let mut converged = false;
    let mut violation = f64::INFINITY;
    while iterations < max_iter {
        // Working-set selection over I_up and I_low.
        let mut m_up = f64::NEG_INFINITY;
        let mut i_sel = usize::MAX;
        let mut m_low = f64::INFINITY;
        let mut j_sel = usize::MAX;
        for t in 0..n {
            let v = -y[t] * grad[t];
            let in_up = (y[t] > 0.0 && alpha[t] < c) || (y[t] < 0.0 && alpha[t] > 0.0);
            let in_low = (y[t] < 0.0 && alpha[t] < c) || (y[t] > 0.0 && alpha[t] > 0.0);
            if in_up && v > m_up {
                m_up = v;
                i_sel = t;
            }
            if in_low && v < m_low {
                m_low = v;
                j_sel = t;
            }
        }
        violation = m_up - m_low;
        if violation <= tol || i_sel == usize::MAX || j_sel == usize::MAX {
            converged = true;
            break;
        }
        let (i, j) = (i_sel, j_sel);
        let (old_i, old_j) = (alpha[i], alpha[j]);

        if y[i] != y[j] {
            let quad = (k(i, i) + k(j, j) + 2.0 * k(i, j)).max(1e-12);
            let delta = (-grad[i] - grad[j]) / quad;
            let diff = alpha[i] - alpha[j];
            alpha[i] += delta;
            alpha[j] += delta;
            if diff > 0.0 && alpha[j] < 0.0 {
                alpha[j] = 0.0;
                alpha[i] = diff;
            } else if diff <= 0.0 && alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = -diff;
            }
            if diff > 0.0 && alpha[i] > c {
                alpha[i] = c;
                alpha[j] = c - diff;
            } else if diff <= 0.0 && alpha[j] > c {
                alpha[j] = c;
                alpha[i] = c + diff;
            }
        } else {
            let quad = (k(i, i) + k(j, j) - 2.0 * k(i, j)).max(1e-12);
            let delta = (grad[i] - grad[j]) / quad;
            let sum = alpha[i] + alpha[j];
            alpha[i] -= delta;
            alpha[j] += delta;
            if sum > c && alpha[i] > c {
                alpha[i] = c;
                alpha[j] = sum - c;
            } else if sum <= c && alpha[j] < 0.0 {
                alpha[j] = 0.0;
                alpha[i] = sum;
            }
            if sum > c && alpha[j] > c {
                alpha[j] = c;
                alpha[i] = sum - c;
            } else if sum <= c && alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = sum;
            }
        }

        let (dai, daj) = (alpha[i] - old_i, alpha[j] - old_j);
        for t in 0..n {
            grad[t] += y[t] * y[i] * k(t, i) * dai + y[t] * y[j] * k(t, j) * daj;
        }
        iterations += 1;
    }

    // Bias from free support vectors, else the violation midpoint.
    let mut free_sum = 0.0;
    let mut free_count = 0usize;
    for t in 0..n {
        if alpha[t] > 1e-12 && alpha[t] < c - 1e-12 {
            free_sum += -y[t] * grad[t];
            free_count += 1;
        }
    }
    let bias = if free_count > 0 {
        free_sum / free_count as f64
    } else {
        let mut m_up = f64::NEG_INFINITY;
        let mut m_low = f64::INFINITY;
        for t in 0..n {
            let v = -y[t] * grad[t];
            if (y[t] > 0.0 && alpha[t] < c) || (y[t] < 0.0 && alpha[t] > 0.0) {
                m_up = m_up.max(v);
            }
            if (y[t] < 0.0 && alpha[t] < c) || (y[t] > 0.0 && alpha[t] > 0.0) {
                m_low = m_low.min(v);
            }
        }
        (m_up + m_low) / 2.0
    };

    // Dual objective (maximization form): sum(a) - 1/2 a^T Q a, where
    // grad = Qa - e gives a^T Q a = a . (grad + e).
    let quad_term: f64 = alpha
        .iter()
        .zip(&grad)
        .map(|(a, g)| a * (g + 1.0))
        .sum();
    let objective = alpha.iter().sum::<f64>() - 0.5 * quad_term;

    BinarySolution {
        alpha,
        bias,
        objective,
        kkt_violation: violation.max(0.0),
        iterations,
        converged,
    }
}

/// Per-feature standardization statistics fit on training data.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Standardizer {
    pub means: Vec<f64>,
    pub stds: Vec<f64>,
}

impl Standardizer {
    pub fn fit(rows: &[&[f64]]) -> Standardizer {
        let dim = rows.first().map(|r| r.len()).unwrap_or(0);
        let n = rows.len().max(1) as f64;
        let mut means = vec![0.0; dim];
        for row in rows {
            for (m, v) in means.iter_mut().zip(*row) {
                *m += v;
            }
        }
        for m in &mut means {
            *m /= n;
        }
        let mut stds = vec![0.0; dim];
        for row in rows {
            for (s, (v, m)) in stds.iter_mut().zip(row.iter().zip(&means)) {
                *s += (v - m) * (v - m);
            }
        }
        for s in &mut stds {
            *s = (*s / n).sqrt();
            if *s < 1e-12 {
                *s = 1.0;
            }
        }
        Standardizer { means, stds }
    }

    pub fn apply(&self, row: &[f64]) -> Vec<f64> {
        row.iter()
            .zip(self.means.iter().zip(&self.stds))
            .map(|(v, (m, s))| (v - m) / s)
            .collect()
    }
}

fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn rbf(a: &[f64], b: &[f64], eta: f64) -> f64 {
    (-eta * squared_distance(a, b)).exp()
}

/// One binary classifier inside a one-versus-one ensemble.
#[derive(Debug, Clone)]
struct PairModel {
    class_pos: usize,
    class_neg: usize,
    support: Vec<Vec<f64>>,
    /// alpha_i * y_i per support vector.
    coef: Vec<f64>,
    bias: f64,
}

impl PairModel {
    fn decision(&self, x: &[f64], eta: f64) -> f64 {
        let mut f = self.bias;
        for (sv, c) in self.support.iter().zip(&self.coef) {
            f += c * rbf(sv, x, eta);
        }
        f
    }
}

/// A trained RBF SVM: standardization statistics plus one-versus-one binary
/// models over the sorted class labels.
#[derive(Debug, Clone)]
pub struct SvmModel {
    classes: Vec<String>,
    standardizer: Standardizer,
    pairs: Vec<PairModel>,
    pub h: f64,
    pub eta: f64,
    /// Largest KKT violation among the trained binary problems.
    pub kkt_violation: f64,
    dim: usize,
}

impl SvmModel {
    pub fn classes(&self) -> &[String] {
        &self.classes
    }

    pub fn standardizer(&self) -> &Standardizer {
        &self.standardizer
    }
}

/// Train an RBF-kernel SVM with slack penalty `h` and kernel width `eta`.
pub fn train(x: &[Vec<f64>], y: &[String], h: f64, eta: f64) -> Result<SvmModel> {
    if x.len() != y.len() || x.len() < 2 {
        return Err(Error::InvalidArgument(
            "need at least two samples with matching labels".into(),
        ));
    }
    if h <= 0.0 || eta <= 0.0 {
        return Err(Error::InvalidArgument("h and eta must be positive".into()));
    }
    let classes = sorted_classes(y);
    if classes.len() < 2 {
        return Err(Error::DegenerateLabels);
    }
    let dim = x[0].len();
    if x.iter().any(|r| r.len() != dim) {
        return Err(Error::DimensionMismatch {
            expected: dim,
            got: x.iter().map(|r| r.len()).find(|l| *l != dim).unwrap_or(dim),
        });
    }

    let rows: Vec<&[f64]> = x.iter().map(|r| r.as_slice()).collect();
    let standardizer = Standardizer::fit(&rows);
    let std_x: Vec<Vec<f64>> = rows.iter().map(|r| standardizer.apply(r)).collect();
    let class_of: Vec<usize> = y
        .iter()
        .map(|label| classes.iter().position(|c| c == label).unwrap())
        .collect();

    let mut pairs = Vec::new();
    let mut worst_violation: f64 = 0.0;
    for a in 0..classes.len() {
        for b in (a + 1)..classes.len() {
            let indices: Vec<usize> = (0..x.len())
                .filter(|&i| class_of[i] == a || class_of[i] == b)
                .collect();
            let sub_y: Vec<f64> = indices
                .iter()
                .map(|&i| if class_of[i] == a { 1.0 } else { -1.0 })
                .collect();
            let m = indices.len();
            let mut kernel = vec![0.0; m * m];
            for (p, &i) in indices.iter().enumerate() {
                for (q, &j) in indices.iter().enumerate().skip(p) {
                    let v = rbf(&std_x[i], &std_x[j], eta);
                    kernel[p * m + q] = v;
                    kernel[q * m + p] = v;
                }
            }
            let solution = solve_binary(&kernel, &sub_y, h, SMO_TOLERANCE, SMO_MAX_ITER);
            worst_violation = worst_violation.max(solution.kkt_violation);
            let mut support = Vec::new();
            let mut coef = Vec::new();
            for (p, &i) in indices.iter().enumerate() {
                if solution.alpha[p] > 1e-12 {
                    support.push(std_x[i].clone());
                    coef.push(solution.alpha[p] * sub_y[p]);
                }
            }
            pairs.push(PairModel {
                class_pos: a,
                class_neg: b,
                support,
                coef,
                bias: solution.bias,
            });
        }
    }

    Ok(SvmModel {
        classes,
        standardizer,
        pairs,
        h,
        eta,
        kkt_violation: worst_violation,
        dim,
    })
}

/// Predict the label of one feature vector by one-versus-one majority vote;
/// vote ties resolve to the lowest label in sort order.
pub fn predict(model: &SvmModel, x: &[f64]) -> Result<String> {
    if x.len() != model.dim {
        return Err(Error::DimensionMismatch {
            expected: model.dim,
            got: x.len(),
        });
    }
    let std_x = model.standardizer.apply(x);
    let mut votes = vec![0usize; model.classes.len()];
    for pair in &model.pairs {
        let f = pair.decision(&std_x, model.eta);
        let winner = if f >= 0.0 { pair.class_pos } else { pair.class_neg };
        votes[winner] += 1;
    }
    let best = votes
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(&a.0)))
        .map(|(i, _)| i)
        .unwrap_or(0);
    Ok(model.classes[best].clone())
}

fn sorted_classes(y: &[String]) -> Vec<String> {
    let mut classes: Vec<String> = y.to_vec();
    classes.sort();
    classes.dedup();
    classes
}

/// Cross-validation scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CvScheme {
    LeaveOneOut,
    KFold(usize),
}

/// Accuracy of one grid cell.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridCell {
    pub h: f64,
    pub eta: f64,
    pub accuracy: f64,
}

/// Average, maximum, and standard deviation of accuracy over the grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridSummary {
    pub average: f64,
    pub max: f64,
    pub std: f64,
}

/// Full cross-validation output: per-cell accuracies plus the grid summary.
#[derive(Debug, Clone)]
pub struct CrossValidation {
    pub cells: Vec<GridCell>,
    pub summary: GridSummary,
    pub best_h: f64,
    pub best_eta: f64,
}

/// Cross-validated grid search.
///
/// For every (h, eta) cell the mean cross-validated accuracy is computed;
/// k-fold splits are stratified by label and shuffled with the seed
/// (leave-one-out ignores the seed). Fold statistics never see test samples:
/// standardization is refit on each training fold.
pub fn cross_validate(
    x: &[Vec<f64>],
    y: &[String],
    scheme: CvScheme,
    grid: &GridSpec,
    seed: u64,
) -> Result<CrossValidation> {
    let n = x.len();
    if n != y.len() || n < 2 {
        return Err(Error::InvalidArgument(
            "need at least two samples with matching labels".into(),
        ));
    }
    let folds = make_folds(y, scheme, seed)?;
    let cells_per_eta = grid.h_values.len();
    let cell_count = cells_per_eta * grid.eta_values.len();
    // fold_accuracy[cell] accumulates the mean of fold accuracies.
    let mut cell_accuracy = vec![0.0f64; cell_count];

    for fold in &folds {
        let train_idx: Vec<usize> = (0..n).filter(|i| !fold.contains(i)).collect();
        let rows: Vec<&[f64]> = train_idx.iter().map(|&i| x[i].as_slice()).collect();
        let standardizer = Standardizer::fit(&rows);
        let std_all: Vec<Vec<f64>> = x.iter().map(|r| standardizer.apply(r)).collect();
        // Squared distances between every sample pair under this fold's
        // standardization; kernels for all etas derive from it.
        let mut dist_sq = vec![0.0f64; n * n];
        for i in 0..n {
            for j in (i + 1)..n {
                let d = squared_distance(&std_all[i], &std_all[j]);
                dist_sq[i * n + j] = d;
                dist_sq[j * n + i] = d;
            }
        }

        let classes = sorted_classes(&train_idx.iter().map(|&i| y[i].clone()).collect::<Vec<_>>());
        if classes.len() < 2 {
            return Err(Error::DegenerateLabels);
        }
        let class_of: Vec<usize> = y
            .iter()
            .map(|label| classes.iter().position(|c| c == label).unwrap_or(usize::MAX))
            .collect();

        // Per-eta work shares nothing mutable; cells collect in grid order.
        let fold_cells: Vec<Vec<f64>> = grid
            .eta_values
            .par_iter()
            .map(|&eta| {
                eta_accuracies(
                    &dist_sq,
                    &train_idx,
                    fold,
                    &class_of,
                    classes.len(),
                    eta,
                    &grid.h_values,
                )
            })
            .collect();
        for (e, per_h) in fold_cells.iter().enumerate() {
            for (hi, acc) in per_h.iter().enumerate() {
                cell_accuracy[e * cells_per_eta + hi] += acc;
            }
        }
    }

    let mut cells = Vec::with_capacity(cell_count);
    for (e, &eta) in grid.eta_values.iter().enumerate() {
        for (hi, &h) in grid.h_values.iter().enumerate() {
            cells.push(GridCell {
                h,
                eta,
                accuracy: cell_accuracy[e * cells_per_eta + hi] / folds.len() as f64,
            });
        }
    }
    let accs: Vec<f64> = cells.iter().map(|c| c.accuracy).collect();
    let average = accs.iter().sum::<f64>() / accs.len() as f64;
    let max = accs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let var = accs.iter().map(|a| (a - average) * (a - average)).sum::<f64>() / accs.len() as f64;
    let best = cells
        .iter()
        .find(|c| c.accuracy == max)
        .copied()
        .expect("grid nonempty");

    Ok(CrossValidation {
        cells,
        summary: GridSummary {
            average,
            max,
            std: var.sqrt(),
        },
        best_h: best.h,
        best_eta: best.eta,
    })
}

/// Accuracies of every h at one eta for one fold: train one-versus-one
/// models on the training indices and score the held-out fold.
#[allow(clippy::too_many_arguments)]
fn eta_accuracies(
    dist_sq: &[f64],
    train_idx: &[usize],
    test_idx: &[usize],
    class_of: &[usize],
    class_count: usize,
    eta: f64,
    h_values: &[f64],
) -> Vec<f64> {
    let n = (dist_sq.len() as f64).sqrt() as usize;
    let kernel: Vec<f64> = dist_sq.iter().map(|d| (-eta * d).exp()).collect();
    let k = |i: usize, j: usize| kernel[i * n + j];

    let mut per_h = Vec::with_capacity(h_values.len());
    for &h in h_values {
        let mut votes: BTreeMap<usize, Vec<usize>> =
            test_idx.iter().map(|&t| (t, vec![0; class_count])).collect();
        for a in 0..class_count {
            for b in (a + 1)..class_count {
                let indices: Vec<usize> = train_idx
                    .iter()
                    .copied()
                    .filter(|&i| class_of[i] == a || class_of[i] == b)
                    .collect();
                let sub_y: Vec<f64> = indices
                    .iter()
                    .map(|&i| if class_of[i] == a { 1.0 } else { -1.0 })
                    .collect();
                let m = indices.len();
                let mut sub_kernel = vec![0.0; m * m];
                for (p, &i) in indices.iter().enumerate() {
                    for (q, &j) in indices.iter().enumerate() {
                        sub_kernel[p * m + q] = k(i, j);
                    }
                }
                let solution = solve_binary(&sub_kernel, &sub_y, h, SMO_TOLERANCE, SMO_MAX_ITER);
                for (&t, vote) in votes.iter_mut() {
                    let mut f = solution.bias;
                    for (p, &i) in indices.iter().enumerate() {
                        if solution.alpha[p] > 1e-12 {
                            f += solution.alpha[p] * sub_y[p] * k(i, t);
                        }
                    }
                    let winner = if f >= 0.0 { a } else { b };
                    vote[winner] += 1;
                }
            }
        }
        let mut correct = 0usize;
        for (&t, vote) in &votes {
            let best = vote
                .iter()
                .enumerate()
                .max_by(|x, y| x.1.cmp(y.1).then(y.0.cmp(&x.0)))
                .map(|(i, _)| i)
                .unwrap();
            if best == class_of[t] {
                correct += 1;
            }
        }
        per_h.push(correct as f64 / test_idx.len().max(1) as f64);
    }
    per_h
}

/// Build test folds: singletons for leave-one-out, or `k` stratified groups
/// shuffled by the seed.
fn make_folds(y: &[String], scheme: CvScheme, seed: u64) -> Result<Vec<Vec<usize>>> {
    let n = y.len();
    match scheme {
        CvScheme::LeaveOneOut => Ok((0..n).map(|i| vec![i]).collect()),
        CvScheme::KFold(k) => {
            if k < 2 || k > n {
                return Err(Error::BadFoldCount { k, n });
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let classes = sorted_classes(y);
            let mut folds: Vec<Vec<usize>> = vec![Vec::new(); k];
            let mut cursor = 0usize;
            for class in &classes {
                let mut members: Vec<usize> =
                    (0..n).filter(|&i| &y[i] == class).collect();
                members.shuffle(&mut rng);
                for i in members {
                    folds[cursor % k].push(i);
                    cursor += 1;
                }
            }
            for fold in &mut folds {
                fold.sort_unstable();
            }
            Ok(folds.into_iter().filter(|f| !f.is_empty()).collect())
        }
    }
}
