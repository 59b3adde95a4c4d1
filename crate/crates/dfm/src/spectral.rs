//! Numerical core: top-K0 eigendecomposition by eigenvalue magnitude,
//! restarted Lloyd k-means, and the spectral label-recovery pipeline.

use crate::error::DfmError;
use crate::model::{CommunityLabels, PopulationMatrix};
use crate::rng::RandomStream;
use crate::Result;
use nalgebra::DMatrix;
use rand::Rng;

/// Leading eigenpairs of a symmetric matrix, ordered by descending
/// eigenvalue magnitude.
#[derive(Debug, Clone)]
pub struct SpectralPair {
    /// n-by-K0 matrix with orthonormal columns.
    pub u: DMatrix<f64>,
    /// Eigenvalues, descending by |lambda|; may be negative.
    pub lambda: Vec<f64>,
}

fn require_symmetric(s: &DMatrix<f64>) -> Result<()> {
    let n = s.nrows();
    if n != s.ncols() {
        return Err(DfmError::ShapeMismatch(format!(
            "expected square matrix, got {:?}",
            s.shape()
        )));
    }
    let scale = s.iter().fold(0.0f64, |a, &v| a.max(v.abs()));
    let tol = 1e-10 * scale.max(1e-300);
    for i in 0..n {
        for j in (i + 1)..n {
            if (s[(i, j)] - s[(j, i)]).abs() > tol {
                return Err(DfmError::NotSymmetric(format!(
                    "entries ({},{}) and ({},{}) differ by {}",
                    i + 1,
                    j + 1,
                    j + 1,
                    i + 1,
                    (s[(i, j)] - s[(j, i)]).abs()
                )));
            }
        }
    }
    Ok(())
}

/// Top-K0 eigenpairs of a symmetric matrix.
///
/// Ordering: descending |lambda|, ties broken by descending signed value,
/// then ascending position in the full decomposition.
pub fn top_eigs(s: &DMatrix<f64>, k0: usize) -> Result<SpectralPair> {
    require_symmetric(s)?;
    let n = s.nrows();
    if k0 < 1 || k0 > n {
        return Err(DfmError::InvalidSpec(format!("K0={k0} outside 1..=n={n}")));
    }
    // symmetrize away the sub-tolerance asymmetry before decomposing
    let sym = (s + s.transpose()) * 0.5;
    let eig = nalgebra::SymmetricEigen::try_new(sym, 1.0e-13, 50_000)
        .ok_or(DfmError::EigenConvergence)?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        let (la, lb) = (eig.eigenvalues[a], eig.eigenvalues[b]);
        lb.abs()
            .partial_cmp(&la.abs())
            .unwrap()
            .then(lb.partial_cmp(&la).unwrap())
            .then(a.cmp(&b))
    });
    let mut u = DMatrix::zeros(n, k0);
    let mut lambda = Vec::with_capacity(k0);
    for (col, &idx) in order.iter().take(k0).enumerate() {
        u.set_column(col, &eig.eigenvectors.column(idx));
        lambda.push(eig.eigenvalues[idx]);
    }
    Ok(SpectralPair { u, lambda })
}

/// Spectral norm (largest eigenvalue magnitude) of a symmetric matrix.
pub fn spectral_norm(s: &DMatrix<f64>) -> Result<f64> {
    if s.nrows() == 0 {
        return Ok(0.0);
    }
    Ok(top_eigs(s, 1)?.lambda[0].abs())
}

/// Configuration of the restarted Lloyd iteration.
#[derive(Debug, Clone)]
pub struct KMeansConfig {
    pub restarts: usize,
    pub max_iter: usize,
    pub tol: f64,
    pub stream: RandomStream,
}

impl KMeansConfig {
    /// Defaults: 10 restarts of at most 100 iterations, tolerance 1e-8.
    pub fn new(stream: RandomStream) -> Self {
        Self {
            restarts: 10,
            max_iter: 100,
            tol: 1e-8,
            stream,
        }
    }
}

/// Output of k-means: 1-based cluster labels, centers, and the within-cluster
/// sum of squares of the best restart.
#[derive(Debug, Clone)]
pub struct ClusteringResult {
    pub labels: CommunityLabels,
    pub centers: DMatrix<f64>,
    pub wcss: f64,
    /// Set when the input had fewer than K distinct rows.
    pub degenerate: bool,
}

fn row_dist2(rows: &DMatrix<f64>, i: usize, centers: &DMatrix<f64>, c: usize) -> f64 {
    let d = rows.ncols();
    let mut acc = 0.0;
    for t in 0..d {
        let x = rows[(i, t)] - centers[(c, t)];
        acc += x * x;
    }
    acc
}

fn assign(rows: &DMatrix<f64>, centers: &DMatrix<f64>) -> (Vec<usize>, f64) {
    let n = rows.nrows();
    let k = centers.nrows();
    let mut labels = vec![0usize; n];
    let mut wcss = 0.0;
    for i in 0..n {
        let mut best = 0usize;
        let mut best_d = row_dist2(rows, i, centers, 0);
        for c in 1..k {
            let d = row_dist2(rows, i, centers, c);
            if d < best_d {
                best = c;
                best_d = d;
            }
        }
        labels[i] = best;
        wcss += best_d;
    }
    (labels, wcss)
}

fn plus_plus_seed(rows: &DMatrix<f64>, k: usize, rng: &mut impl Rng) -> DMatrix<f64> {
    let n = rows.nrows();
    let d = rows.ncols();
    let mut centers = DMatrix::zeros(k, d);
    let first = rng.gen_range(0..n);
    centers.row_mut(0).copy_from(&rows.row(first));
    let mut d2: Vec<f64> = (0..n).map(|i| row_dist2(rows, i, &centers, 0)).collect();
    for c in 1..k {
        let total: f64 = d2.iter().sum();
        let pick = if total > 0.0 {
            let mut target = rng.gen::<f64>() * total;
            let mut chosen = n - 1;
            for (i, &w) in d2.iter().enumerate() {
                if target < w {
                    chosen = i;
                    break;
                }
                target -= w;
            }
            chosen
        } else {
            rng.gen_range(0..n)
        };
        centers.row_mut(c).copy_from(&rows.row(pick));
        for i in 0..n {
            let d = row_dist2(rows, i, &centers, c);
            if d < d2[i] {
                d2[i] = d;
            }
        }
    }
    centers
}

fn lloyd(
    rows: &DMatrix<f64>,
    k: usize,
    max_iter: usize,
    tol: f64,
    mut centers: DMatrix<f64>,
) -> (Vec<usize>, DMatrix<f64>, f64) {
    let n = rows.nrows();
    let d = rows.ncols();
    let (mut labels, mut wcss) = assign(rows, &centers);
    for _ in 0..max_iter {
        // update step
        let mut counts = vec![0usize; k];
        let mut sums = DMatrix::<f64>::zeros(k, d);
        for i in 0..n {
            counts[labels[i]] += 1;
            for t in 0..d {
                sums[(labels[i], t)] += rows[(i, t)];
            }
        }
        for c in 0..k {
            if counts[c] > 0 {
                for t in 0..d {
                    centers[(c, t)] = sums[(c, t)] / counts[c] as f64;
                }
            }
        }
        // empty-cluster repair: reseed at the point farthest from its center
        let mut moved = vec![false; n];
        for c in 0..k {
            if counts[c] == 0 {
                let mut far = 0usize;
                let mut far_d = -1.0;
                for i in 0..n {
                    if moved[i] || counts[labels[i]] <= 1 {
                        continue;
                    }
                    let di = row_dist2(rows, i, &centers, labels[i]);
                    if di > far_d {
                        far_d = di;
                        far = i;
                    }
                }
                centers.row_mut(c).copy_from(&rows.row(far));
                moved[far] = true;
            }
        }
        let (new_labels, new_wcss) = assign(rows, &centers);
        let improved = wcss - new_wcss;
        let unchanged = new_labels == labels;
        labels = new_labels;
        wcss = new_wcss;
        if unchanged || improved.abs() <= tol {
            break;
        }
    }
    (labels, centers, wcss)
}

fn distinct_row_count(rows: &DMatrix<f64>) -> usize {
    use std::collections::HashSet;
    let mut seen: HashSet<Vec<u64>> = HashSet::new();
    for i in 0..rows.nrows() {
        let key: Vec<u64> = rows.row(i).iter().map(|v| v.to_bits()).collect();
        seen.insert(key);
    }
    seen.len()
}

/// Restarted Lloyd k-means with k-means++ seeding.
///
/// Deterministic given `config.stream`; the best restart by WCSS wins, ties
/// by restart index.
pub fn kmeans(rows: &DMatrix<f64>, k: usize, config: &KMeansConfig) -> Result<ClusteringResult> {
    let n = rows.nrows();
    if k < 1 || n < k {
        return Err(DfmError::Degenerate(format!(
            "cannot form {k} clusters from {n} points"
        )));
    }
    if config.restarts < 1 {
        return Err(DfmError::InvalidSpec("restarts must be >= 1".into()));
    }
    let degenerate = distinct_row_count(rows) < k;
    let mut best: Option<(Vec<usize>, DMatrix<f64>, f64)> = None;
    for r in 0..config.restarts {
        let mut rng = config.stream.child(r as u64).rng();
        let seeds = plus_plus_seed(rows, k, &mut rng);
        let run = lloyd(rows, k, config.max_iter, config.tol, seeds);
        let better = match &best {
            None => true,
            Some((_, _, w)) => run.2 < *w,
        };
        if better {
            best = Some(run);
        }
    }
    let (labels, centers, wcss) = best.unwrap();
    let labels = CommunityLabels::new(labels.iter().map(|&c| c + 1).collect(), k)?;
    Ok(ClusteringResult {
        labels,
        centers,
        wcss,
        degenerate,
    })
}

/// Spectral community recovery: top-K0 eigenvectors of the observed matrix,
/// then k-means on their rows with K clusters.
pub fn dfa(
    ahat: &DMatrix<f64>,
    k: usize,
    k0: usize,
    config: &KMeansConfig,
) -> Result<CommunityLabels> {
    if k0 > k {
        return Err(DfmError::InvalidSpec(format!("K0={k0} exceeds K={k}")));
    }
    let pair = top_eigs(ahat, k0)?;
    Ok(kmeans(&pair.u, k, config)?.labels)
}

/// [`dfa`] applied to the population matrix; recovers the ground-truth
/// partition exactly up to a label permutation.
pub fn ideal_dfa(
    omega: &PopulationMatrix,
    k: usize,
    k0: usize,
    config: &KMeansConfig,
) -> Result<CommunityLabels> {
    dfa(omega.as_matrix(), k, k0, config)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{
        build_omega, canonical_index_set, labels_to_membership, tests::random_spec,
        CommunityLabels, ConnectivityMatrix, ModelSpec,
    };
    use rand::SeedableRng;

    fn cfg(seed: u64) -> KMeansConfig {
        KMeansConfig::new(RandomStream::new(seed, 0))
    }

    #[test]
    fn top_eigs_diagonal_magnitude_order() {
        let s = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![5.0, -3.0, 1.0]));
        let pair = top_eigs(&s, 2).unwrap();
        assert!((pair.lambda[0] - 5.0).abs() < 1e-12);
        assert!((pair.lambda[1] + 3.0).abs() < 1e-12);
    }

    #[test]
    fn top_eigs_identity() {
        let s = DMatrix::identity(3, 3);
        let pair = top_eigs(&s, 1).unwrap();
        assert!((pair.lambda[0] - 1.0).abs() < 1e-12);
        let u = pair.u.column(0);
        assert!((u.norm() - 1.0).abs() < 1e-10);
        assert!((&s * u - pair.lambda[0] * u).norm() < 1e-10);
    }

    #[test]
    fn top_eigs_two_blocks() {
        let p = ConnectivityMatrix::new(DMatrix::identity(2, 2), 2).unwrap();
        let lab = CommunityLabels::new(vec![1, 1, 1, 2, 2, 2], 2).unwrap();
        let z = labels_to_membership(&lab, 2).unwrap();
        let spec = ModelSpec::new(1.0, p, z).unwrap();
        let omega = build_omega(&spec);
        let pair = top_eigs(omega.as_matrix(), 2).unwrap();
        assert!((pair.lambda[0] - 3.0).abs() < 1e-10);
        assert!((pair.lambda[1] - 3.0).abs() < 1e-10);
    }

    #[test]
    fn top_eigs_rejects_asymmetric() {
        let s = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 0.0, 1.0]);
        assert!(matches!(top_eigs(&s, 1), Err(DfmError::NotSymmetric(_))));
    }

    #[test]
    fn eigen_residual_random() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        use rand::Rng;
        for &n in &[5usize, 50, 200, 500] {
            let raw = DMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
            let s = (&raw + raw.transpose()) * 0.5;
            let k0 = 3.min(n);
            let pair = top_eigs(&s, k0).unwrap();
            let fro = s.norm();
            for c in 0..k0 {
                let u = pair.u.column(c);
                let res = (&s * u - pair.lambda[c] * u).norm();
                assert!(res <= 1e-6 * (fro + 1.0), "n={n} residual {res}");
            }
            // orthonormal columns
            let g = pair.u.transpose() * &pair.u;
            assert!((g - DMatrix::identity(k0, k0)).abs().max() < 1e-8);
        }
    }

    /// Jacobi rotation eigenvalue oracle, independent of the production path.
    fn jacobi_eigenvalues(mut a: DMatrix<f64>) -> Vec<f64> {
        let n = a.nrows();
        for _ in 0..200 {
            let mut off = 0.0;
            let (mut p, mut q) = (0, 1);
            for i in 0..n {
                for j in (i + 1)..n {
                    if a[(i, j)].abs() > off {
                        off = a[(i, j)].abs();
                        p = i;
                        q = j;
                    }
                }
            }
            if off < 1e-13 {
                break;
            }
            let theta = 0.5 * (2.0 * a[(p, q)]).atan2(a[(p, p)] - a[(q, q)]);
            let (c, s) = (theta.cos(), theta.sin());
            let mut g = DMatrix::identity(n, n);
            g[(p, p)] = c;
            g[(q, q)] = c;
            g[(p, q)] = -s;
            g[(q, p)] = s;
            a = g.transpose() * a * g;
        }
        let mut ev: Vec<f64> = (0..n).map(|i| a[(i, i)]).collect();
        ev.sort_by(|x, y| y.abs().partial_cmp(&x.abs()).unwrap());
        ev
    }

    #[test]
    fn eigen_oracle_equivalence_small() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(17);
        use rand::Rng;
        for _ in 0..30 {
            let n = rng.gen_range(2..=8usize);
            let raw = DMatrix::from_fn(n, n, |_, _| rng.gen_range(-2.0..2.0));
            let s = (&raw + raw.transpose()) * 0.5;
            let oracle = jacobi_eigenvalues(s.clone());
            let pair = top_eigs(&s, n).unwrap();
            for i in 0..n {
                assert!(
                    (pair.lambda[i].abs() - oracle[i].abs()).abs() < 1e-8,
                    "n={n} idx {i}: {} vs {}",
                    pair.lambda[i],
                    oracle[i]
                );
            }
        }
    }

    #[test]
    fn kmeans_exact_on_distinct_one_hot_rows() {
        let mut rows = DMatrix::zeros(9, 3);
        for i in 0..9 {
            rows[(i, i % 3)] = 1.0;
        }
        let res = kmeans(&rows, 3, &cfg(0)).unwrap();
        assert!(res.wcss < 1e-20);
        assert!(!res.degenerate);
        for i in 0..9 {
            for j in 0..9 {
                let same = i % 3 == j % 3;
                assert_eq!(res.labels.label(i) == res.labels.label(j), same);
            }
        }
    }

    #[test]
    fn kmeans_two_pairs() {
        // oracle: enumerate all 2-partitions of 4 points; minimum WCSS is
        // {1,2} | {3,4}
        let rows = DMatrix::from_row_slice(4, 2, &[0.0, 0.0, 0.1, 0.0, 10.0, 0.0, 10.1, 0.0]);
        let res = kmeans(&rows, 2, &cfg(3)).unwrap();
        assert_eq!(res.labels.label(0), res.labels.label(1));
        assert_eq!(res.labels.label(2), res.labels.label(3));
        assert_ne!(res.labels.label(0), res.labels.label(2));
        assert!((res.wcss - 2.0 * (0.05f64.powi(2) * 2.0)).abs() < 1e-12);
    }

    #[test]
    fn kmeans_degeneracy_flag() {
        let rows = DMatrix::from_row_slice(3, 2, &[1.0, 2.0, 1.0, 2.0, 1.0, 2.0]);
        let res = kmeans(&rows, 2, &cfg(1)).unwrap();
        assert!(res.degenerate);
        assert_eq!(res.labels.len(), 3);
    }

    #[test]
    fn lloyd_wcss_monotone() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(4);
        use rand::Rng;
        let rows = DMatrix::from_fn(60, 2, |_, _| rng.gen_range(-1.0..1.0));
        let mut seed_rng = RandomStream::new(9, 0).rng();
        let centers = plus_plus_seed(&rows, 4, &mut seed_rng);
        let (_, mut wcss_prev) = assign(&rows, &centers);
        let mut c = centers;
        for iters in 1..=12 {
            let (_, c2, w) = lloyd(&rows, 4, iters, 0.0, c.clone());
            assert!(w <= wcss_prev + 1e-12, "iter {iters}: {w} > {wcss_prev}");
            wcss_prev = w;
            c = c2;
        }
    }

    #[test]
    fn ideal_dfa_recovers_labels() {
        let p = ConnectivityMatrix::new(
            DMatrix::from_row_slice(2, 2, &[1.0, 0.2, 0.2, 0.8]),
            2,
        )
        .unwrap();
        let lab = CommunityLabels::new(vec![1, 1, 1, 2, 2, 2], 2).unwrap();
        let z = labels_to_membership(&lab, 2).unwrap();
        let spec = ModelSpec::new(1.0, p, z).unwrap();
        let omega = build_omega(&spec);
        let est = ideal_dfa(&omega, 2, 2, &cfg(7)).unwrap();
        let err = crate::eval::hamming_error(&spec.labels(), &est, 2).unwrap();
        assert_eq!(err.fraction, 0.0);
    }

    #[test]
    fn ideal_dfa_rank_deficient_p() {
        // K=3, rank-2 P: third row/column a scaled sum of the others.
        let base = DMatrix::from_row_slice(3, 2, &[1.0, 0.0, 0.0, 1.0, 0.6, 0.4]);
        let m = &base * base.transpose();
        let p = ConnectivityMatrix::normalize(m, 2).unwrap();
        let lab = CommunityLabels::new(vec![1, 1, 2, 2, 3, 3, 3], 3).unwrap();
        let z = labels_to_membership(&lab, 3).unwrap();
        let spec = ModelSpec::new(1.0, p, z).unwrap();
        let omega = build_omega(&spec);
        let pair = top_eigs(omega.as_matrix(), 2).unwrap();
        assert_eq!(pair.u.ncols(), 2);
        let est = ideal_dfa(&omega, 3, 2, &cfg(11)).unwrap();
        let err = crate::eval::hamming_error(&spec.labels(), &est, 3).unwrap();
        assert_eq!(err.fraction, 0.0);
    }

    #[test]
    fn ideal_dfa_experiment_one_spec() {
        let p = crate::model::tests::experiment_p_negative();
        let entries: Vec<usize> = (0..200).map(|i| i % 3 + 1).collect();
        let lab = CommunityLabels::new(entries, 3).unwrap();
        let z = labels_to_membership(&lab, 3).unwrap();
        let spec = ModelSpec::new(0.4, p, z).unwrap();
        let omega = build_omega(&spec);
        let est = ideal_dfa(&omega, 3, 3, &cfg(13)).unwrap();
        let err = crate::eval::hamming_error(&spec.labels(), &est, 3).unwrap();
        assert_eq!(err.fraction, 0.0);
    }

    #[test]
    fn lemma_u_equals_zb() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(23);
        use rand::Rng;
        for _ in 0..10 {
            let k = rng.gen_range(2..=4usize);
            let k0 = rng.gen_range(1..=k);
            let n = rng.gen_range(3 * k..=40);
            let rho = rng.gen_range(0.3..1.5);
            let spec = random_spec(&mut rng, n, k, k0, rho);
            let omega = build_omega(&spec);
            let pair = top_eigs(omega.as_matrix(), k0).unwrap();
            let idx = canonical_index_set(&spec.z);
            let mut b = DMatrix::zeros(k, k0);
            for (c, &i) in idx.indices().iter().enumerate() {
                b.row_mut(c).copy_from(&pair.u.row(i));
            }
            let zb = spec.z.as_matrix() * b;
            assert!((&pair.u - zb).abs().max() < 1e-8);
        }
    }

    #[test]
    fn dfa_invariant_under_column_rotation() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(31);
        use rand::Rng;
        let spec = random_spec(&mut rng, 30, 3, 3, 1.0);
        let omega = build_omega(&spec);
        let pair = top_eigs(omega.as_matrix(), 3).unwrap();
        let raw = DMatrix::from_fn(3, 3, |_, _| rng.gen_range(-1.0..1.0));
        let q = raw.qr().q();
        let rotated = &pair.u * q;
        let a = kmeans(&pair.u, 3, &cfg(2)).unwrap().labels;
        let b = kmeans(&rotated, 3, &cfg(2)).unwrap().labels;
        let err = crate::eval::hamming_error(&a, &b, 3).unwrap();
        assert_eq!(err.fraction, 0.0);
    }
}
