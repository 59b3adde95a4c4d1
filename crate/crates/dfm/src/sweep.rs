//! Sweep driver: runs a grid of repetitions, in parallel, with a fixed
//! stream layout so every record is reproducible from the seed alone.

use crate::config::{ExperimentSpec, SweepVar};
use crate::dataio::{Dataset, ResultRow};
use crate::error::DfmError;
use crate::eval::{delta_separation, f_hat, hamming_error, spectral_deviation};
use crate::model::{
    build_omega, canonical_index_set, labels_to_membership, CommunityLabels, MembershipMatrix,
    ModelSpec, PopulationMatrix,
};
use crate::rng::RandomStream;
use crate::sampling::{
    observe, sample_adjacency, sample_bundle, sample_labels, sample_noise, NoiseSpec,
};
use crate::spectral::{dfa, top_eigs, KMeansConfig};
use crate::Result;
use nalgebra::DMatrix;
use rayon::prelude::*;
use std::time::Instant;

// Stream channels. For noise-level sweeps (sigma2A, m, sigma2W) the
// per-repetition draws are keyed by the repetition index only, so the same
// underlying randomness is reused at every grid point (common random
// numbers): trend comparisons along the grid are paired, isolating the
// effect of the noise level. A rho sweep instead keys the draws by
// (grid index, repetition): pairing a pure scale change would reuse the
// identical relative noise realization at every rho — for a scale family
// such as the Exponential the detections would be literally identical —
// so each rho level gets independent draws.
const CH_LABELS: u64 = 1;
const CH_ADJ: u64 = 2;
const CH_NOISE: u64 = 3;
const CH_KMEANS: u64 = 4;

/// Metrics of one repetition.
#[derive(Debug, Clone, PartialEq)]
pub struct RepMetrics {
    pub rep: usize,
    pub hamming: f64,
    pub raw_l0: f64,
    pub fhat: f64,
    pub deviation: f64,
    pub delta: f64,
    pub elapsed_ms: f64,
}

/// One sweep grid point with its repetitions.
#[derive(Debug, Clone)]
pub struct SweepRecord {
    pub value: f64,
    pub distribution: String,
    pub rho: f64,
    pub sigma2a: Option<f64>,
    pub m: Option<u64>,
    pub sigma2w: f64,
    pub reps: Vec<RepMetrics>,
}

fn run_parallel<F>(tasks: &[(usize, usize)], f: F) -> Result<Vec<RepMetrics>>
where
    F: Fn(usize, usize) -> Result<RepMetrics> + Sync,
{
    let work = || tasks.par_iter().map(|&(g, r)| f(g, r)).collect();
    match std::env::var("DFM_THREADS") {
        Ok(v) => {
            let threads: usize = v
                .parse()
                .map_err(|_| DfmError::Config(format!("bad DFM_THREADS value `{v}`")))?;
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .map_err(|e| DfmError::Config(format!("thread pool: {e}")))?;
            pool.install(work)
        }
        Err(_) => work(),
    }
}

fn group_records(
    spec: &ExperimentSpec,
    metrics: Vec<RepMetrics>,
) -> Vec<SweepRecord> {
    let mut out = Vec::with_capacity(spec.grid.len());
    let mut iter = metrics.into_iter();
    for &value in &spec.grid {
        let (rho, sigma2a, m, sigma2w) = spec.csv_params(value);
        out.push(SweepRecord {
            value,
            distribution: spec.distribution_at(value).name().to_string(),
            rho,
            sigma2a,
            m,
            sigma2w,
            reps: iter.by_ref().take(spec.reps).collect(),
        });
    }
    out
}

struct GridPrep {
    rho: f64,
    dist: crate::sampling::EdgeDistribution,
    noise: NoiseSpec,
    /// Shared label draw; absent when labels are redrawn per repetition.
    labels: Option<CommunityLabels>,
    omega: Option<PopulationMatrix>,
    delta: Option<f64>,
}

/// Runs a full synthetic sweep. Labels are drawn once per grid point unless
/// `resample_labels` redraws them per repetition; the noise-perturbation
/// protocol (`fixed_adjacency`) draws one label vector and one adjacency for
/// the whole sweep and resamples only the noise.
pub fn run_sweep(spec: &ExperimentSpec, timings: bool) -> Result<Vec<SweepRecord>> {
    if spec.fixed_adjacency && spec.resample_labels {
        return Err(DfmError::Config(
            "resample_labels cannot be combined with the fixed-adjacency protocol".into(),
        ));
    }
    if spec.fixed_adjacency && spec.sweep != SweepVar::Sigma2W {
        return Err(DfmError::Config(
            "fixed_adjacency requires a sigma2W sweep".into(),
        ));
    }
    // fail before any sampling if some grid point puts a block mean outside
    // the distribution's domain
    for &v in &spec.grid {
        let scaled = spec.p.as_matrix() * spec.rho_at(v);
        spec.distribution_at(v).check_domain(&scaled)?;
    }

    let root = RandomStream::new(spec.seed, 0);
    let fixed: Option<(CommunityLabels, PopulationMatrix, DMatrix<f64>)> =
        if spec.fixed_adjacency {
            let labels = sample_labels(spec.n, spec.k, &root.child(CH_LABELS))?;
            let z = labels_to_membership(&labels, spec.k)?;
            let model = ModelSpec::new(spec.rho, spec.p.clone(), z)?;
            let omega = build_omega(&model);
            let dist = spec.distribution_at(spec.grid[0]);
            let a = sample_adjacency(&omega, &dist, &root.child(CH_ADJ))?;
            Some((labels, omega, a))
        } else {
            None
        };

    let paired = spec.sweep != SweepVar::Rho;
    let mut grids = Vec::with_capacity(spec.grid.len());
    for (g, &v) in spec.grid.iter().enumerate() {
        let noise = NoiseSpec::new(spec.sigma2w_at(v))?;
        let dist = spec.distribution_at(v);
        let rho = spec.rho_at(v);
        let (labels, omega) = match &fixed {
            Some((labels, omega, _)) => (Some(labels.clone()), Some(omega.clone())),
            None if spec.resample_labels => (None, None),
            None => {
                // Labels are drawn once per grid point. On a paired sweep the
                // stream is not keyed by the grid index, so every grid point
                // reuses the same draw and trend comparisons are not
                // confounded by community-size noise; a rho sweep draws
                // independently per grid point.
                let stream = if paired {
                    root.child(CH_LABELS)
                } else {
                    root.child(CH_LABELS).child(g as u64)
                };
                let labels = sample_labels(spec.n, spec.k, &stream)?;
                let z = labels_to_membership(&labels, spec.k)?;
                let model = ModelSpec::new(rho, spec.p.clone(), z)?;
                let omega = build_omega(&model);
                (Some(labels), Some(omega))
            }
        };
        let delta = match (&labels, &omega) {
            (Some(labels), Some(omega)) => {
                let z = labels_to_membership(labels, spec.k)?;
                Some(delta_separation(omega, &z, spec.k0)?.delta)
            }
            _ => None,
        };
        grids.push(GridPrep {
            rho,
            dist,
            noise,
            labels,
            omega,
            delta,
        });
    }

    let fixed_a = fixed.as_ref().map(|(_, _, a)| a);
    let rep_stream = |ch: u64, g: usize, r: usize| {
        let s = root.child(ch);
        if paired {
            s.child(r as u64)
        } else {
            s.child(g as u64).child(r as u64)
        }
    };
    let run_rep = |g: usize, r: usize| -> Result<RepMetrics> {
        let gp = &grids[g];
        let start = Instant::now();
        let (labels, omega, delta) = match (&gp.labels, &gp.omega, gp.delta) {
            (Some(labels), Some(omega), Some(delta)) => (labels.clone(), omega.clone(), delta),
            _ => {
                let labels = sample_labels(spec.n, spec.k, &rep_stream(CH_LABELS, g, r))?;
                let z = labels_to_membership(&labels, spec.k)?;
                let model = ModelSpec::new(gp.rho, spec.p.clone(), z.clone())?;
                let omega = build_omega(&model);
                let delta = delta_separation(&omega, &z, spec.k0)?.delta;
                (labels, omega, delta)
            }
        };
        let ahat = match fixed_a {
            Some(a) => {
                let w = sample_noise(spec.n, &gp.noise, &rep_stream(CH_NOISE, g, r));
                observe(a, &w)?
            }
            None => {
                sample_bundle(&omega, &gp.dist, &gp.noise, &rep_stream(CH_ADJ, g, r))?.ahat
            }
        };
        let config = KMeansConfig::new(rep_stream(CH_KMEANS, g, r));
        let est = dfa(&ahat, spec.k, spec.k0, &config)?;
        let ham = hamming_error(&labels, &est, spec.k)?;
        let fhat = f_hat(&labels, &est, spec.k)?;
        let deviation = spectral_deviation(&ahat, omega.as_matrix())?;
        Ok(RepMetrics {
            rep: r,
            hamming: ham.fraction,
            raw_l0: ham.raw_l0,
            fhat,
            deviation,
            delta,
            elapsed_ms: if timings {
                start.elapsed().as_secs_f64() * 1e3
            } else {
                0.0
            },
        })
    };

    let tasks: Vec<(usize, usize)> = (0..spec.grid.len())
        .flat_map(|g| (0..spec.reps).map(move |r| (g, r)))
        .collect();
    let metrics = run_parallel(&tasks, run_rep)?;
    Ok(group_records(spec, metrics))
}

fn real_delta(a: &DMatrix<f64>, z: &MembershipMatrix, k0: usize) -> Result<f64> {
    let pair = top_eigs(a, k0)?;
    let idx = canonical_index_set(z);
    let k = z.k();
    let mut delta = f64::INFINITY;
    for i in 0..k {
        for j in (i + 1)..k {
            delta = delta.min((pair.u.row(idx.indices()[i]) - pair.u.row(idx.indices()[j])).norm());
        }
    }
    Ok(delta)
}

/// Noise-perturbation study on a real network: `Ahat = A + W` for each grid
/// value of `sigma2W`, with `K0 = K` taken from the dataset. The spectral
/// deviation is measured against the observed adjacency, which stands in for
/// the unknown expectation.
pub fn run_realdata(
    dataset: &Dataset,
    grid: &[f64],
    reps: usize,
    seed: u64,
    timings: bool,
) -> Result<Vec<SweepRecord>> {
    if grid.is_empty() {
        return Err(DfmError::Config("empty sigma2W grid".into()));
    }
    if reps < 1 {
        return Err(DfmError::Config("reps must be at least 1".into()));
    }
    let k = dataset.k;
    let z = labels_to_membership(&dataset.truth, k)?;
    let delta = real_delta(&dataset.adjacency, &z, k)?;
    let root = RandomStream::new(seed, 0);
    let noises: Vec<NoiseSpec> = grid
        .iter()
        .map(|&v| NoiseSpec::new(v))
        .collect::<Result<_>>()?;

    let run_rep = |g: usize, r: usize| -> Result<RepMetrics> {
        let start = Instant::now();
        let r64 = r as u64;
        let w = sample_noise(
            dataset.n(),
            &noises[g],
            &root.child(CH_NOISE).child(r64),
        );
        let ahat = observe(&dataset.adjacency, &w)?;
        let config = KMeansConfig::new(root.child(CH_KMEANS).child(r64));
        let est = dfa(&ahat, k, k, &config)?;
        let ham = hamming_error(&dataset.truth, &est, k)?;
        let fhat = f_hat(&dataset.truth, &est, k)?;
        let deviation = spectral_deviation(&ahat, &dataset.adjacency)?;
        Ok(RepMetrics {
            rep: r,
            hamming: ham.fraction,
            raw_l0: ham.raw_l0,
            fhat,
            deviation,
            delta,
            elapsed_ms: if timings {
                start.elapsed().as_secs_f64() * 1e3
            } else {
                0.0
            },
        })
    };

    let tasks: Vec<(usize, usize)> = (0..grid.len())
        .flat_map(|g| (0..reps).map(move |r| (g, r)))
        .collect();
    let metrics = run_parallel(&tasks, run_rep)?;

    let mut out = Vec::with_capacity(grid.len());
    let mut iter = metrics.into_iter();
    for &value in grid {
        out.push(SweepRecord {
            value,
            distribution: "real".to_string(),
            rho: 1.0,
            sigma2a: None,
            m: None,
            sigma2w: value,
            reps: iter.by_ref().take(reps).collect(),
        });
    }
    Ok(out)
}

fn mean_sd(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Flattens sweep records into the CSV row schema: one row per repetition
/// followed by `mean` and `sd` aggregate rows per grid point.
pub fn rows_from_records(
    experiment: &str,
    n: usize,
    k: usize,
    k0: usize,
    seed: u64,
    records: &[SweepRecord],
) -> Vec<ResultRow> {
    let mut rows = Vec::new();
    for rec in records {
        let base = |rep: String, m: &RepMetrics| ResultRow {
            experiment: experiment.to_string(),
            distribution: rec.distribution.clone(),
            n,
            k,
            k0,
            rho: rec.rho,
            sigma2a: rec.sigma2a,
            m: rec.m,
            sigma2w: rec.sigma2w,
            seed,
            rep,
            hamming: m.hamming,
            hamming_raw_l0: m.raw_l0,
            fhat: m.fhat,
            spectral_deviation: m.deviation,
            delta: m.delta,
            elapsed_ms: m.elapsed_ms,
        };
        for m in &rec.reps {
            rows.push(base(m.rep.to_string(), m));
        }
        let col = |f: fn(&RepMetrics) -> f64| -> Vec<f64> { rec.reps.iter().map(f).collect() };
        let stats = [
            mean_sd(&col(|m| m.hamming)),
            mean_sd(&col(|m| m.raw_l0)),
            mean_sd(&col(|m| m.fhat)),
            mean_sd(&col(|m| m.deviation)),
            mean_sd(&col(|m| m.delta)),
            mean_sd(&col(|m| m.elapsed_ms)),
        ];
        for (which, pick) in [("mean", 0usize), ("sd", 1usize)] {
            let get = |i: usize| if pick == 0 { stats[i].0 } else { stats[i].1 };
            rows.push(ResultRow {
                hamming: get(0),
                hamming_raw_l0: get(1),
                fhat: get(2),
                spectral_deviation: get(3),
                delta: get(4),
                elapsed_ms: get(5),
                ..base(which.to_string(), &rec.reps[0])
            });
        }
    }
    rows
}
