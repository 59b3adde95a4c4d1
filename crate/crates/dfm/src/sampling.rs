//! Seeded samplers: labels, adjacency matrices with a prescribed mean under
//! several edge distributions, and symmetric zero-mean noise.

use crate::error::DfmError;
use crate::model::{CommunityLabels, ModelSpec, PopulationMatrix};
use crate::rng::RandomStream;
use crate::Result;
use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::{Binomial, Distribution, Exp, Gamma, Normal, Poisson};

/// Edge-weight distribution for adjacency sampling. Each variant draws
/// entries with mean `Omega(i,j)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EdgeDistribution {
    /// Entries in {0,1}; requires all means in [0,1].
    Bernoulli,
    /// `Normal(Omega(i,j), variance)`; any real mean.
    Normal { variance: f64 },
    /// `Binomial(trials, Omega(i,j)/trials)`; requires means in [0, trials].
    Binomial { trials: u64 },
    /// `Poisson(Omega(i,j))`; requires nonnegative means.
    Poisson,
    /// `Exponential(1/Omega(i,j))`; requires strictly positive means.
    Exponential,
    /// `Gamma(scale * Omega(i,j), scale)` in shape/rate form; mean Omega,
    /// variance `Omega/scale`. Requires strictly positive means.
    GammaByScale { scale: f64 },
    /// `Gamma(shape, shape/Omega(i,j))` in shape/rate form; mean Omega,
    /// variance `Omega^2/shape`. Requires strictly positive means.
    GammaByShape { shape: f64 },
}

impl EdgeDistribution {
    pub fn name(&self) -> &'static str {
        match self {
            EdgeDistribution::Bernoulli => "bernoulli",
            EdgeDistribution::Normal { .. } => "normal",
            EdgeDistribution::Binomial { .. } => "binomial",
            EdgeDistribution::Poisson => "poisson",
            EdgeDistribution::Exponential => "exponential",
            EdgeDistribution::GammaByScale { .. } => "gamma_scale",
            EdgeDistribution::GammaByShape { .. } => "gamma_shape",
        }
    }

    /// Checks whether `mean` is an admissible entry mean for this
    /// distribution.
    pub fn admits(&self, mean: f64) -> bool {
        match self {
            EdgeDistribution::Bernoulli => (0.0..=1.0).contains(&mean),
            EdgeDistribution::Normal { variance } => *variance >= 0.0,
            EdgeDistribution::Binomial { trials } => {
                *trials >= 1 && mean >= 0.0 && mean <= *trials as f64
            }
            EdgeDistribution::Poisson => mean >= 0.0,
            EdgeDistribution::Exponential => mean > 0.0,
            EdgeDistribution::GammaByScale { scale } => *scale > 0.0 && mean > 0.0,
            EdgeDistribution::GammaByShape { shape } => *shape > 0.0 && mean > 0.0,
        }
    }

    /// First entry of `omega` (row-major upper triangle scan) that violates
    /// the parameter domain, as a `DomainError`.
    pub fn check_domain(&self, omega: &DMatrix<f64>) -> Result<()> {
        let n = omega.nrows();
        for i in 0..n {
            for j in i..n {
                let v = omega[(i, j)];
                if !self.admits(v) {
                    return Err(DfmError::Domain {
                        i: i + 1,
                        j: j + 1,
                        value: v,
                        dist: self.name().into(),
                    });
                }
            }
        }
        Ok(())
    }

    fn sample_entry(&self, mean: f64, rng: &mut impl Rng) -> f64 {
        match self {
            EdgeDistribution::Bernoulli => {
                if rng.gen::<f64>() < mean {
                    1.0
                } else {
                    0.0
                }
            }
            EdgeDistribution::Normal { variance } => {
                if *variance == 0.0 {
                    mean
                } else {
                    Normal::new(mean, variance.sqrt()).unwrap().sample(rng)
                }
            }
            EdgeDistribution::Binomial { trials } => {
                Binomial::new(*trials, mean / *trials as f64).unwrap().sample(rng) as f64
            }
            EdgeDistribution::Poisson => {
                if mean == 0.0 {
                    0.0
                } else {
                    Poisson::new(mean).unwrap().sample(rng)
                }
            }
            EdgeDistribution::Exponential => Exp::new(1.0 / mean).unwrap().sample(rng),
            EdgeDistribution::GammaByScale { scale } => {
                Gamma::new(scale * mean, 1.0 / scale).unwrap().sample(rng)
            }
            EdgeDistribution::GammaByShape { shape } => {
                Gamma::new(*shape, mean / shape).unwrap().sample(rng)
            }
        }
    }
}

/// Zero-mean symmetric Normal noise with entrywise variance `variance`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseSpec {
    pub variance: f64,
}

impl NoiseSpec {
    pub fn new(variance: f64) -> Result<Self> {
        if variance < 0.0 {
            return Err(DfmError::InvalidSpec(format!(
                "noise variance {variance} must be nonnegative"
            )));
        }
        Ok(Self { variance })
    }
}

/// A sampled adjacency matrix, its noise, and their sum.
#[derive(Debug, Clone)]
pub struct AdjacencyBundle {
    pub a: DMatrix<f64>,
    pub w: DMatrix<f64>,
    pub ahat: DMatrix<f64>,
}

/// Draws i.i.d. uniform labels on `1..=k`, resampling the whole vector until
/// every community is nonempty.
pub fn sample_labels(n: usize, k: usize, stream: &RandomStream) -> Result<CommunityLabels> {
    if k < 1 || n < k {
        return Err(DfmError::InvalidLabels(format!(
            "cannot fill {k} communities with {n} nodes"
        )));
    }
    let mut rng = stream.rng();
    loop {
        let entries: Vec<usize> = (0..n).map(|_| rng.gen_range(1..=k)).collect();
        let labels = CommunityLabels::new(entries, k)?;
        if labels.covers_all_communities() {
            return Ok(labels);
        }
    }
}

/// Samples a symmetric adjacency matrix with entry means `omega`.
///
/// The upper triangle including the diagonal is drawn independently; the
/// lower triangle mirrors it.
pub fn sample_adjacency(
    omega: &PopulationMatrix,
    dist: &EdgeDistribution,
    stream: &RandomStream,
) -> Result<DMatrix<f64>> {
    let m = omega.as_matrix();
    dist.check_domain(m)?;
    let n = m.nrows();
    let mut rng = stream.rng();
    let mut a = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let v = dist.sample_entry(m[(i, j)], &mut rng);
            a[(i, j)] = v;
            a[(j, i)] = v;
        }
    }
    Ok(a)
}

/// Samples a symmetric noise matrix with i.i.d. `Normal(0, variance)` upper
/// triangle. Zero variance yields the zero matrix exactly.
pub fn sample_noise(n: usize, noise: &NoiseSpec, stream: &RandomStream) -> DMatrix<f64> {
    if noise.variance == 0.0 {
        return DMatrix::zeros(n, n);
    }
    let dist = Normal::new(0.0, noise.variance.sqrt()).unwrap();
    let mut rng = stream.rng();
    let mut w = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let v = dist.sample(&mut rng);
            w[(i, j)] = v;
            w[(j, i)] = v;
        }
    }
    w
}

/// Entrywise sum of a sampled adjacency and its noise.
pub fn observe(a: &DMatrix<f64>, w: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if a.shape() != w.shape() {
        return Err(DfmError::ShapeMismatch(format!(
            "A is {:?}, W is {:?}",
            a.shape(),
            w.shape()
        )));
    }
    Ok(a + w)
}

/// Samples A, W and their sum in one call using disjoint sub-streams.
pub fn sample_bundle(
    omega: &PopulationMatrix,
    dist: &EdgeDistribution,
    noise: &NoiseSpec,
    stream: &RandomStream,
) -> Result<AdjacencyBundle> {
    let a = sample_adjacency(omega, dist, &stream.child(0))?;
    let w = sample_noise(omega.n(), noise, &stream.child(1));
    let ahat = observe(&a, &w)?;
    Ok(AdjacencyBundle { a, w, ahat })
}

/// Diagnostic report of the variance and sparsity assumptions.
#[derive(Debug, Clone)]
pub struct AssumptionReport {
    /// Distribution-specific variance-over-rho bound.
    pub gamma: f64,
    /// `(gamma*rho*n + sigma2_w*n) / log(n)`; should be large.
    pub sparsity_value: f64,
    /// `rho / sigma2_w`; infinite when the noise is zero.
    pub rho_over_noise: f64,
    /// Advisory flags; never errors.
    pub flags: Vec<String>,
}

/// Variance-over-rho bound for a distribution at sparsity `rho`.
pub fn gamma_bound(dist: &EdgeDistribution, rho: f64) -> f64 {
    match dist {
        EdgeDistribution::Bernoulli => 1.0,
        EdgeDistribution::Normal { variance } => variance / rho,
        EdgeDistribution::Binomial { .. } => 1.0,
        EdgeDistribution::Poisson => 1.0,
        EdgeDistribution::Exponential => rho,
        EdgeDistribution::GammaByScale { scale } => 1.0 / scale,
        EdgeDistribution::GammaByShape { shape } => rho / shape,
    }
}

pub fn check_assumptions(
    spec: &ModelSpec,
    dist: &EdgeDistribution,
    noise: &NoiseSpec,
) -> AssumptionReport {
    let n = spec.n() as f64;
    let gamma = gamma_bound(dist, spec.rho);
    let sparsity_value = (gamma * spec.rho * n + noise.variance * n) / n.ln();
    let rho_over_noise = if noise.variance == 0.0 {
        f64::INFINITY
    } else {
        spec.rho / noise.variance
    };
    let mut flags = Vec::new();
    if sparsity_value < 5.0 {
        flags.push(format!(
            "(gamma*rho*n + sigma2W*n)/log(n) = {sparsity_value:.3} is small; consistency degrades"
        ));
    }
    if rho_over_noise < 1.0 {
        flags.push(format!(
            "rho/sigma2W = {rho_over_noise:.3} < 1; noise dominates the signal scale"
        ));
    }
    AssumptionReport {
        gamma,
        sparsity_value,
        rho_over_noise,
        flags,
    }
}
