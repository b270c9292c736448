//! 2-d projection of document states: PCA as the deterministic reference
//! and exact O(n²) t-SNE for the variety maps.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ProjectionError {
    #[error("invalid point set: {0}")]
    BadPoints(String),
    #[error("degenerate covariance: all points identical")]
    Degenerate,
    #[error("perplexity {perplexity} infeasible for {n} points (need 5 <= p <= (n-1)/3)")]
    PerplexityInfeasible { perplexity: f64, n: usize },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PointLabel {
    pub group: String,
    pub kind: String,
}

/// n points of equal dimension with group/kind labels.
#[derive(Debug, Clone)]
pub struct PointSet {
    points: Vec<Vec<f64>>,
    labels: Vec<PointLabel>,
}

impl PointSet {
    pub fn new(points: Vec<Vec<f64>>, labels: Vec<PointLabel>) -> Result<Self, ProjectionError> {
        if points.len() < 2 {
            return Err(ProjectionError::BadPoints("need at least 2 points".into()));
        }
        if points.len() != labels.len() {
            return Err(ProjectionError::BadPoints(
                "labels and points differ in length".into(),
            ));
        }
        let dim = points[0].len();
        if dim == 0 {
            return Err(ProjectionError::BadPoints("zero-dimensional points".into()));
        }
        for p in &points {
            if p.len() != dim {
                return Err(ProjectionError::BadPoints("ragged dimensions".into()));
            }
            if p.iter().any(|v| !v.is_finite()) {
                return Err(ProjectionError::BadPoints("non-finite coordinate".into()));
            }
        }
        Ok(PointSet { points, labels })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.points[0].len()
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn labels(&self) -> &[PointLabel] {
        &self.labels
    }
}

/// Cyclic Jacobi eigendecomposition of a symmetric matrix. Returns
/// (eigenvalues, eigenvectors as columns), unsorted.
fn jacobi_eigen(mut a: Vec<Vec<f64>>) -> (Vec<f64>, Vec<Vec<f64>>) {
    let n = a.len();
    let mut v = vec![vec![0.0; n]; n];
    for (i, row) in v.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    let off = |a: &Vec<Vec<f64>>| -> f64 {
        let mut s = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                s += a[i][j] * a[i][j];
            }
        }
        s
    };
    let frob: f64 = a
        .iter()
        .flat_map(|r| r.iter())
        .map(|x| x * x)
        .sum::<f64>()
        .max(1e-300);
    for _sweep in 0..100 {
        if off(&a) <= 1e-24 * frob {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                if a[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k][p];
                    let akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p][k];
                    let aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
                for k in 0..n {
                    let vkp = v[k][p];
                    let vkq = v[k][q];
                    v[k][p] = c * vkp - s * vkq;
                    v[k][q] = s * vkp + c * vkq;
                }
            }
        }
    }
    let vals = (0..n).map(|i| a[i][i]).collect();
    (vals, v)
}

/// Mean-centered projection onto the top eigenvectors of the covariance.
/// Deterministic: each component's largest-magnitude loading is made
/// positive.
pub fn pca(set: &PointSet, out_dim: usize) -> Result<PointSet, ProjectionError> {
    let n = set.len();
    let d = set.dim();
    if out_dim == 0 || out_dim > d {
        return Err(ProjectionError::BadPoints(format!(
            "out_dim {out_dim} not in 1..={d}"
        )));
    }
    if n <= out_dim {
        return Err(ProjectionError::BadPoints(format!(
            "need more than {out_dim} points, got {n}"
        )));
    }
    let mut mean = vec![0.0f64; d];
    for p in set.points() {
        for (m, x) in mean.iter_mut().zip(p) {
            *m += x;
        }
    }
    mean.iter_mut().for_each(|m| *m /= n as f64);
    let centered: Vec<Vec<f64>> = set
        .points()
        .iter()
        .map(|p| p.iter().zip(&mean).map(|(x, m)| x - m).collect())
        .collect();
    let mut cov = vec![vec![0.0f64; d]; d];
    for p in &centered {
        for i in 0..d {
            if p[i] == 0.0 {
                continue;
            }
            for j in i..d {
                cov[i][j] += p[i] * p[j];
            }
        }
    }
    for i in 0..d {
        for j in i..d {
            cov[i][j] /= (n - 1) as f64;
            cov[j][i] = cov[i][j];
        }
    }
    let total_var: f64 = (0..d).map(|i| cov[i][i]).sum();
    if total_var <= 1e-24 {
        return Err(ProjectionError::Degenerate);
    }
    let (vals, vecs) = jacobi_eigen(cov);
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| vals[b].partial_cmp(&vals[a]).unwrap());
    let mut components: Vec<Vec<f64>> = Vec::with_capacity(out_dim);
    for &idx in order.iter().take(out_dim) {
        let mut comp: Vec<f64> = (0..d).map(|r| vecs[r][idx]).collect();
        let max_k = (0..d)
            .max_by(|&a, &b| comp[a].abs().partial_cmp(&comp[b].abs()).unwrap())
            .unwrap();
        if comp[max_k] < 0.0 {
            comp.iter_mut().for_each(|x| *x = -*x);
        }
        components.push(comp);
    }
    let projected: Vec<Vec<f64>> = centered
        .iter()
        .map(|p| {
            components
                .iter()
                .map(|c| c.iter().zip(p).map(|(a, b)| a * b).sum())
                .collect()
        })
        .collect();
    PointSet::new(projected, set.labels().to_vec())
}

fn squared_distances(points: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = points.len();
    let mut d2 = vec![vec![0.0f64; n]; n];
    for i in 0..n {
        for j in (i + 1)..n {
            let s: f64 = points[i]
                .iter()
                .zip(&points[j])
                .map(|(a, b)| (a - b) * (a - b))
                .sum();
            d2[i][j] = s;
            d2[j][i] = s;
        }
    }
    d2
}

/// Per-point Gaussian bandwidths found by bisection so each conditional
/// distribution hits the requested perplexity, then symmetrized:
/// p_ij = (p_{j|i} + p_{i|j}) / 2n.
fn affinities(d2: &[Vec<f64>], perplexity: f64) -> Vec<Vec<f64>> {
    let n = d2.len();
    let target_entropy = perplexity.ln();
    let mut cond = vec![vec![0.0f64; n]; n];
    for i in 0..n {
        let mut beta = 1.0f64;
        let mut beta_min = f64::NEG_INFINITY;
        let mut beta_max = f64::INFINITY;
        let mut row = vec![0.0f64; n];
        for _ in 0..64 {
            let mut sum = 0.0f64;
            for j in 0..n {
                row[j] = if j == i { 0.0 } else { (-beta * d2[i][j]).exp() };
                sum += row[j];
            }
            let sum = sum.max(1e-300);
            let mut entropy = 0.0f64;
            for j in 0..n {
                if j != i && row[j] > 0.0 {
                    let p = row[j] / sum;
                    if p > 0.0 {
                        entropy -= p * p.ln();
                    }
                }
            }
            let diff = entropy - target_entropy;
            if diff.abs() < 1e-7 {
                break;
            }
            if diff > 0.0 {
                beta_min = beta;
                beta = if beta_max.is_finite() {
                    (beta + beta_max) / 2.0
                } else {
                    beta * 2.0
                };
            } else {
                beta_max = beta;
                beta = if beta_min.is_finite() {
                    (beta + beta_min) / 2.0
                } else {
                    beta / 2.0
                };
            }
        }
        let sum: f64 = row.iter().sum::<f64>().max(1e-300);
        for j in 0..n {
            cond[i][j] = row[j] / sum;
        }
    }
    let mut p = vec![vec![0.0f64; n]; n];
    for i in 0..n {
        for j in 0..n {
            if i != j {
                p[i][j] = ((cond[i][j] + cond[j][i]) / (2.0 * n as f64)).max(1e-12);
            }
        }
    }
    p
}

/// KL divergence between the high-dimensional affinities and the Student-t
/// similarities of a layout. Depends on the layout only through pairwise
/// distances.
pub fn kl_divergence(p: &[Vec<f64>], layout: &[Vec<f64>]) -> f64 {
    let n = layout.len();
    let d2 = squared_distances(layout);
    let mut z = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                z += 1.0 / (1.0 + d2[i][j]);
            }
        }
    }
    let z = z.max(1e-300);
    let mut kl = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                let q = (1.0 / (1.0 + d2[i][j]) / z).max(1e-12);
                kl += p[i][j] * (p[i][j] / q).ln();
            }
        }
    }
    kl
}

/// Exact t-SNE settings; the reference schedule is early exaggeration 12
/// for the first 250 of 1000 iterations, learning rate n/12 and momentum
/// 0.5 switching to 0.8 at iteration 250.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(default)]
pub struct TsneConfig {
    pub perplexity: f64,
    pub iterations: usize,
    pub seed: u64,
    pub early_exaggeration: f64,
    pub exaggeration_iters: usize,
    pub momentum_switch_iter: usize,
    pub initial_momentum: f64,
    pub final_momentum: f64,
}

impl Default for TsneConfig {
    fn default() -> Self {
        TsneConfig {
            perplexity: 30.0,
            iterations: 1000,
            seed: 0,
            early_exaggeration: 12.0,
            exaggeration_iters: 250,
            momentum_switch_iter: 250,
            initial_momentum: 0.5,
            final_momentum: 0.8,
        }
    }
}

pub const TSNE_MAX_POINTS: usize = 5000;
/// Inputs wider than this are PCA-reduced before the pairwise affinities.
pub const TSNE_PCA_DIM: usize = 50;

/// Exact t-SNE to 2 dimensions. Returns the layout and the KL-divergence
/// trace (initial value first, final value last; length iterations + 1).
pub fn tsne(
    set: &PointSet,
    cfg: &TsneConfig,
) -> Result<(PointSet, Vec<f64>), ProjectionError> {
    let n = set.len();
    if n > TSNE_MAX_POINTS {
        return Err(ProjectionError::BadPoints(format!(
            "{n} points exceed the exact-method cap of {TSNE_MAX_POINTS}"
        )));
    }
    if cfg.perplexity < 5.0 || cfg.perplexity > (n as f64 - 1.0) / 3.0 {
        return Err(ProjectionError::PerplexityInfeasible {
            perplexity: cfg.perplexity,
            n,
        });
    }
    let reduced;
    let working = if set.dim() > TSNE_PCA_DIM {
        let target = TSNE_PCA_DIM.min(n - 1);
        reduced = pca(set, target)?;
        &reduced
    } else {
        set
    };
    let p = affinities(&squared_distances(working.points()), cfg.perplexity);

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut y: Vec<Vec<f64>> = (0..n)
        .map(|_| (0..2).map(|_| gaussian(&mut rng) * 1e-4).collect())
        .collect();
    let mut velocity = vec![vec![0.0f64; 2]; n];
    let lr = n as f64 / 12.0;
    let mut trace = Vec::with_capacity(cfg.iterations + 1);

    for iter in 0..cfg.iterations {
        trace.push(kl_divergence(&p, &y));
        let exag = if iter < cfg.exaggeration_iters {
            cfg.early_exaggeration
        } else {
            1.0
        };
        let momentum = if iter < cfg.momentum_switch_iter {
            cfg.initial_momentum
        } else {
            cfg.final_momentum
        };
        let d2 = squared_distances(&y);
        let mut z = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    z += 1.0 / (1.0 + d2[i][j]);
                }
            }
        }
        let z = z.max(1e-300);
        let mut grad = vec![[0.0f64; 2]; n];
        for i in 0..n {
            for j in 0..n {
                if i == j {
                    continue;
                }
                let w = 1.0 / (1.0 + d2[i][j]);
                let q = (w / z).max(1e-12);
                let coeff = 4.0 * (exag * p[i][j] - q) * w;
                grad[i][0] += coeff * (y[i][0] - y[j][0]);
                grad[i][1] += coeff * (y[i][1] - y[j][1]);
            }
        }
        let mut mean = [0.0f64; 2];
        for i in 0..n {
            for k in 0..2 {
                velocity[i][k] = momentum * velocity[i][k] - lr * grad[i][k];
                y[i][k] += velocity[i][k];
                mean[k] += y[i][k];
            }
        }
        for k in 0..2 {
            mean[k] /= n as f64;
        }
        for row in &mut y {
            row[0] -= mean[0];
            row[1] -= mean[1];
        }
    }
    trace.push(kl_divergence(&p, &y));
    let out = PointSet::new(y, set.labels().to_vec())?;
    Ok((out, trace))
}

fn gaussian(rng: &mut ChaCha8Rng) -> f64 {
    // Box-Muller; two uniforms per sample keeps the stream simple
    let u1: f64 = rng.random_range(f64::MIN_POSITIVE..1.0);
    let u2: f64 = rng.random_range(0.0..1.0);
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

/// Write a 2-d layout as `x,y,group,kind` CSV plus an SVG scatter with one
/// color per group, circles for poetry and crosses for prose.
pub fn export_plot(
    set: &PointSet,
    csv_path: &std::path::Path,
    svg_path: &std::path::Path,
) -> Result<(), ProjectionError> {
    if set.dim() != 2 {
        return Err(ProjectionError::BadPoints(format!(
            "plot export needs 2-d points, got {}-d",
            set.dim()
        )));
    }
    let mut csv = String::from("x,y,group,kind\n");
    for (p, label) in set.points().iter().zip(set.labels()) {
        csv.push_str(&format!(
            "{:.6},{:.6},{},{}\n",
            p[0], p[1], label.group, label.kind
        ));
    }
    std::fs::write(csv_path, csv)?;

    let mut group_order: Vec<String> = set.labels().iter().map(|l| l.group.clone()).collect();
    group_order.sort();
    group_order.dedup();
    let coords: Vec<(f64, f64)> = set.points().iter().map(|p| (p[0], p[1])).collect();
    let groups: Vec<String> = set.labels().iter().map(|l| l.group.clone()).collect();
    let kinds: Vec<String> = set.labels().iter().map(|l| l.kind.clone()).collect();
    let svg = crate::svg::scatter(&coords, &groups, &kinds, &group_order);
    std::fs::write(svg_path, svg)?;
    Ok(())
}
