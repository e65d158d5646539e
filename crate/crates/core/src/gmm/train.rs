use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::model::{log_sum_exp, BLOCK};
use super::{GmmError, GmmModel};
use crate::features::FeatureMatrix;

/// Lower bound for the floor when a feature dimension is constant.
const MIN_VARIANCE: f64 = 1e-10;

/// Components whose responsibility mass falls below this fraction of the
/// frame count are reseeded.
const RESCUE_MASS: f64 = 1e-8;

/// Blocks reduced per parallel batch; bounds peak memory.
const BATCH_BLOCKS: usize = 32;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrainConfig {
    pub n_components: usize,
    pub max_iterations: usize,
    /// Stop once the per-frame log-likelihood improves by less than this.
    pub log_likelihood_tolerance: f64,
    /// Variance floor as a fraction of the global per-dimension variance.
    pub variance_floor_factor: f64,
    pub seed: u64,
    /// Frames used for k-means++ initialization (evenly strided).
    pub init_subsample: usize,
    pub kmeans_iterations: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            n_components: 512,
            max_iterations: 100,
            log_likelihood_tolerance: 1e-4,
            variance_floor_factor: 0.01,
            seed: 0,
            init_subsample: 10_000,
            kmeans_iterations: 5,
        }
    }
}

impl TrainConfig {
    fn validate(&self) -> Result<(), GmmError> {
        if self.n_components == 0 {
            return Err(GmmError::InvalidConfig("n_components must be at least 1".into()));
        }
        if !(self.log_likelihood_tolerance > 0.0) {
            return Err(GmmError::InvalidConfig("tolerance must be positive".into()));
        }
        if !(self.variance_floor_factor > 0.0 && self.variance_floor_factor <= 1.0) {
            return Err(GmmError::InvalidConfig(
                "variance_floor_factor must lie in (0, 1]".into(),
            ));
        }
        if self.init_subsample < self.n_components {
            return Err(GmmError::InvalidConfig(
                "init_subsample smaller than n_components".into(),
            ));
        }
        Ok(())
    }
}

/// Training trace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    /// Per-frame log-likelihood of the initial model, then after each M-step.
    pub log_likelihoods: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    /// `(iteration, component)` pairs that were reseeded.
    pub rescued: Vec<(usize, usize)>,
}

pub fn train_em(frames: &FeatureMatrix, cfg: &TrainConfig) -> Result<GmmModel, GmmError> {
    train_em_with_report(frames, cfg).map(|(m, _)| m)
}

/// EM with seeded k-means++ initialization and floored variances.
pub fn train_em_with_report(
    frames: &FeatureMatrix,
    cfg: &TrainConfig,
) -> Result<(GmmModel, TrainReport), GmmError> {
    cfg.validate()?;
    let (n, d) = (frames.frames(), frames.dims());
    if d == 0 {
        return Err(GmmError::InvalidConfig("features have no dimensions".into()));
    }
    if n < cfg.n_components {
        return Err(GmmError::TooFewFrames {
            frames: n,
            components: cfg.n_components,
        });
    }
    if frames.values().iter().any(|v| !v.is_finite()) {
        return Err(GmmError::NonFinite);
    }

    let global_var = global_variance(frames);
    let floor: Vec<f64> = global_var
        .iter()
        .map(|v| (cfg.variance_floor_factor * v).max(MIN_VARIANCE))
        .collect();
    let mut model = initialize(frames, cfg, &global_var, &floor)?;

    let mut stats = e_step(&model, frames);
    let mut report = TrainReport {
        log_likelihoods: vec![stats.ll / n as f64],
        iterations: 0,
        converged: false,
        rescued: Vec::new(),
    };
    for it in 1..=cfg.max_iterations {
        let (next, rescued) = m_step(&model, &stats, frames, &global_var, &floor)?;
        report.rescued.extend(rescued.into_iter().map(|k| (it, k)));
        model = next;
        stats = e_step(&model, frames);
        let ll = stats.ll / n as f64;
        let prev = *report.log_likelihoods.last().unwrap();
        report.log_likelihoods.push(ll);
        report.iterations = it;
        if ll - prev < cfg.log_likelihood_tolerance {
            report.converged = true;
            break;
        }
    }
    Ok((model, report))
}

fn global_variance(frames: &FeatureMatrix) -> Vec<f64> {
    let (n, d) = (frames.frames() as f64, frames.dims());
    let mut mean = vec![0.0; d];
    for x in frames.rows() {
        for j in 0..d {
            mean[j] += x[j];
        }
    }
    mean.iter_mut().for_each(|m| *m /= n);
    let mut var = vec![0.0; d];
    for x in frames.rows() {
        for j in 0..d {
            var[j] += (x[j] - mean[j]).powi(2);
        }
    }
    var.iter_mut().for_each(|v| *v /= n);
    var
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Index of the nearest centre, lowest index on ties.
fn nearest(x: &[f64], centres: &[f64], d: usize) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (k, c) in centres.chunks_exact(d).enumerate() {
        let dist = sq_dist(x, c);
        if dist < best.1 {
            best = (k, dist);
        }
    }
    best
}

/// k-means++ seeding and Lloyd refinement on an evenly strided subsample,
/// then per-cluster weights and floored variances.
///
/// Frame selection uses `⌊u · n⌋` and inverse-CDF draws, so duplicating
/// every frame in place leaves the chosen centres unchanged.
fn initialize(
    frames: &FeatureMatrix,
    cfg: &TrainConfig,
    global_var: &[f64],
    floor: &[f64],
) -> Result<GmmModel, GmmError> {
    let (n, d, k) = (frames.frames(), frames.dims(), cfg.n_components);
    let sub: Vec<&[f64]> = if n <= cfg.init_subsample {
        frames.rows().collect()
    } else {
        let s = cfg.init_subsample;
        (0..s).map(|i| frames.row(i * n / s)).collect()
    };
    let m = sub.len();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);

    let mut centres = Vec::with_capacity(k * d);
    let first = ((rng.random::<f64>() * m as f64) as usize).min(m - 1);
    centres.extend_from_slice(sub[first]);
    let mut dist: Vec<f64> = sub.iter().map(|x| sq_dist(x, sub[first])).collect();
    for _ in 1..k {
        let total: f64 = dist.iter().sum();
        let u: f64 = rng.random();
        let pick = if total > 0.0 {
            let target = u * total;
            let mut acc = 0.0;
            let mut pick = m - 1;
            for (i, &w) in dist.iter().enumerate() {
                acc += w;
                if acc > target {
                    pick = i;
                    break;
                }
            }
            pick
        } else {
            ((u * m as f64) as usize).min(m - 1)
        };
        centres.extend_from_slice(sub[pick]);
        for (dv, x) in dist.iter_mut().zip(&sub) {
            *dv = dv.min(sq_dist(x, sub[pick]));
        }
    }

    for _ in 0..cfg.kmeans_iterations {
        let assign: Vec<usize> = sub.par_iter().map(|x| nearest(x, &centres, d).0).collect();
        let mut sums = vec![0.0; k * d];
        let mut counts = vec![0usize; k];
        for (x, &a) in sub.iter().zip(&assign) {
            counts[a] += 1;
            for j in 0..d {
                sums[a * d + j] += x[j];
            }
        }
        for c in 0..k {
            if counts[c] > 0 {
                for j in 0..d {
                    centres[c * d + j] = sums[c * d + j] / counts[c] as f64;
                }
            }
        }
    }
    let assign: Vec<usize> = sub.par_iter().map(|x| nearest(x, &centres, d).0).collect();

    let mut counts = vec![0usize; k];
    let mut sq = vec![0.0; k * d];
    for (x, &a) in sub.iter().zip(&assign) {
        counts[a] += 1;
        for j in 0..d {
            sq[a * d + j] += (x[j] - centres[a * d + j]).powi(2);
        }
    }
    let mut variances = vec![0.0; k * d];
    for c in 0..k {
        for j in 0..d {
            let v = if counts[c] >= 2 {
                sq[c * d + j] / counts[c] as f64
            } else {
                global_var[j]
            };
            variances[c * d + j] = v.max(floor[j]);
        }
    }
    let weights = normalized(counts.iter().map(|&c| c as f64).collect());
    GmmModel::from_flat(d, weights, centres, variances, floor.to_vec())
}

fn normalized(mut w: Vec<f64>) -> Vec<f64> {
    let total: f64 = w.iter().sum();
    w.iter_mut().for_each(|v| *v /= total);
    w
}

/// Sufficient statistics centred on the current means for conditioning.
struct Stats {
    mass: Vec<f64>,
    first: Vec<f64>,
    second: Vec<f64>,
    ll: f64,
}

impl Stats {
    fn zeros(k: usize, d: usize) -> Self {
        Stats {
            mass: vec![0.0; k],
            first: vec![0.0; k * d],
            second: vec![0.0; k * d],
            ll: 0.0,
        }
    }

    fn add(&mut self, other: &Stats) {
        for (a, b) in self.mass.iter_mut().zip(&other.mass) {
            *a += b;
        }
        for (a, b) in self.first.iter_mut().zip(&other.first) {
            *a += b;
        }
        for (a, b) in self.second.iter_mut().zip(&other.second) {
            *a += b;
        }
        self.ll += other.ll;
    }
}

fn block_stats(model: &GmmModel, block: &[f64]) -> Stats {
    let (k, d) = (model.n_components(), model.dims());
    let mut s = Stats::zeros(k, d);
    let mut buf = vec![0.0; k];
    for x in block.chunks_exact(d) {
        model.component_log_densities(x, &mut buf);
        let lse = log_sum_exp(&buf);
        s.ll += lse;
        for c in 0..k {
            let r = (buf[c] - lse).exp();
            if r == 0.0 {
                continue;
            }
            s.mass[c] += r;
            let mu = model.mean(c);
            for j in 0..d {
                let z = x[j] - mu[j];
                s.first[c * d + j] += r * z;
                s.second[c * d + j] += r * z * z;
            }
        }
    }
    s
}

/// Block statistics reduced in block order, independent of worker count.
fn e_step(model: &GmmModel, frames: &FeatureMatrix) -> Stats {
    let d = model.dims();
    let blocks: Vec<&[f64]> = frames.values().chunks(BLOCK * d).collect();
    let mut total = Stats::zeros(model.n_components(), d);
    for batch in blocks.chunks(BATCH_BLOCKS) {
        let partial: Vec<Stats> = batch.par_iter().map(|b| block_stats(model, b)).collect();
        for p in &partial {
            total.add(p);
        }
    }
    total
}

fn m_step(
    model: &GmmModel,
    stats: &Stats,
    frames: &FeatureMatrix,
    global_var: &[f64],
    floor: &[f64],
) -> Result<(GmmModel, Vec<usize>), GmmError> {
    let (k, d, n) = (model.n_components(), model.dims(), frames.frames());
    let mut means = vec![0.0; k * d];
    let mut variances = vec![0.0; k * d];
    let mut weights = vec![0.0; k];
    let mut empty = Vec::new();
    for c in 0..k {
        let r = stats.mass[c];
        if r < RESCUE_MASS * n as f64 {
            empty.push(c);
            continue;
        }
        weights[c] = r / n as f64;
        let mu = model.mean(c);
        for j in 0..d {
            let shift = stats.first[c * d + j] / r;
            means[c * d + j] = mu[j] + shift;
            let v = stats.second[c * d + j] / r - shift * shift;
            variances[c * d + j] = v.max(floor[j]);
        }
    }
    if !empty.is_empty() {
        // Reseed at the worst-explained frames, one distinct frame each.
        let mut buf = vec![0.0; k];
        let mut ll: Vec<(f64, usize)> = frames
            .rows()
            .enumerate()
            .map(|(i, x)| {
                model.component_log_densities(x, &mut buf);
                (log_sum_exp(&buf), i)
            })
            .collect();
        ll.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        for (&c, &(_, i)) in empty.iter().zip(ll.iter().cycle()) {
            weights[c] = 1.0 / n as f64;
            means[c * d..(c + 1) * d].copy_from_slice(frames.row(i));
            for j in 0..d {
                variances[c * d + j] = global_var[j].max(floor[j]);
            }
        }
    }
    let weights = normalized(weights);
    let next = GmmModel::from_flat(d, weights, means, variances, floor.to_vec())?;
    Ok((next, empty))
}
