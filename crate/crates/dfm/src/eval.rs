//! Error criteria and diagnostic quantities: permutation-minimized Hamming
//! error, the min-max symmetric-difference criterion, spectral deviation,
//! row separation of the eigenvector basis, and the error-rate expressions
//! used for trend checks.

use crate::error::DfmError;
use crate::model::{
    canonical_index_set, community_sizes, CommunityLabels, MembershipMatrix, ModelSpec,
    PopulationMatrix,
};
use crate::sampling::{gamma_bound, EdgeDistribution, NoiseSpec};
use crate::spectral::{spectral_norm, top_eigs};
use crate::Result;
use nalgebra::DMatrix;
use std::collections::BTreeMap;

/// Permutation-minimized label disagreement.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HammingError {
    /// Misplaced-node fraction in [0,1].
    pub fraction: f64,
    /// Raw l0 count of differing one-hot entries (2 per misplaced node).
    pub raw_l0: f64,
}

fn confusion(truth: &CommunityLabels, est: &CommunityLabels, k: usize) -> Vec<Vec<usize>> {
    let mut c = vec![vec![0usize; k]; k];
    for i in 0..truth.len() {
        c[truth.label(i) - 1][est.label(i) - 1] += 1;
    }
    c
}

fn permutations(k: usize) -> Vec<Vec<usize>> {
    fn rec(prefix: &mut Vec<usize>, used: &mut Vec<bool>, out: &mut Vec<Vec<usize>>) {
        let k = used.len();
        if prefix.len() == k {
            out.push(prefix.clone());
            return;
        }
        for i in 0..k {
            if !used[i] {
                used[i] = true;
                prefix.push(i);
                rec(prefix, used, out);
                prefix.pop();
                used[i] = false;
            }
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::new(), &mut vec![false; k], &mut out);
    out
}

/// Maximum-total-agreement assignment on a K-by-K count matrix, by subset
/// dynamic programming. Exact for any K up to the bitmask width cap.
fn max_agreement_assignment(c: &[Vec<usize>]) -> usize {
    let k = c.len();
    assert!(k <= 24, "assignment cap exceeded: K={k}");
    const UNSET: usize = usize::MAX;
    let full = 1usize << k;
    let mut dp = vec![UNSET; full];
    dp[0] = 0;
    for mask in 0..full {
        if dp[mask] == UNSET {
            continue;
        }
        let row = mask.count_ones() as usize;
        if row == k {
            continue;
        }
        for col in 0..k {
            if mask & (1 << col) == 0 {
                let next = mask | (1 << col);
                let cand = dp[mask] + c[row][col];
                if dp[next] == UNSET || cand > dp[next] {
                    dp[next] = cand;
                }
            }
        }
    }
    dp[full - 1]
}

/// Permutation-minimized Hamming error between two label vectors over `k`
/// communities. Exhaustive over the `k!` permutations for `k <= 8`,
/// otherwise by optimal assignment on the confusion matrix.
pub fn hamming_error(
    truth: &CommunityLabels,
    est: &CommunityLabels,
    k: usize,
) -> Result<HammingError> {
    if truth.len() != est.len() {
        return Err(DfmError::Eval(format!(
            "length mismatch: {} vs {}",
            truth.len(),
            est.len()
        )));
    }
    if truth.k() > k || est.k() > k {
        return Err(DfmError::Eval("labels exceed K".into()));
    }
    let n = truth.len();
    let c = confusion(truth, est, k);
    let agree = if k <= 8 {
        permutations(k)
            .iter()
            .map(|perm| (0..k).map(|t| c[t][perm[t]]).sum::<usize>())
            .max()
            .unwrap()
    } else {
        max_agreement_assignment(&c)
    };
    let misplaced = n - agree;
    Ok(HammingError {
        fraction: misplaced as f64 / n as f64,
        raw_l0: 2.0 * misplaced as f64,
    })
}

fn fhat_cost_matrix(truth: &CommunityLabels, est: &CommunityLabels, k: usize) -> Vec<Vec<f64>> {
    let c = confusion(truth, est, k);
    let mut truth_sizes = vec![0usize; k];
    let mut est_sizes = vec![0usize; k];
    for i in 0..truth.len() {
        truth_sizes[truth.label(i) - 1] += 1;
        est_sizes[est.label(i) - 1] += 1;
    }
    let mut cost = vec![vec![0.0; k]; k];
    for a in 0..k {
        for b in 0..k {
            let inter = c[a][b];
            // |C_a \ Chat_b| + |Chat_b \ C_a|, over n_a
            cost[a][b] =
                ((truth_sizes[a] - inter) + (est_sizes[b] - inter)) as f64 / truth_sizes[a] as f64;
        }
    }
    cost
}

/// Kuhn matching feasibility: is there a perfect matching using only edges
/// with cost <= threshold?
fn has_perfect_matching(cost: &[Vec<f64>], threshold: f64) -> bool {
    let k = cost.len();
    let mut match_of = vec![usize::MAX; k];
    fn augment(
        a: usize,
        cost: &[Vec<f64>],
        threshold: f64,
        seen: &mut [bool],
        match_of: &mut [usize],
    ) -> bool {
        let k = cost.len();
        for b in 0..k {
            if cost[a][b] <= threshold && !seen[b] {
                seen[b] = true;
                if match_of[b] == usize::MAX
                    || augment(match_of[b], cost, threshold, seen, match_of)
                {
                    match_of[b] = a;
                    return true;
                }
            }
        }
        false
    }
    for a in 0..k {
        let mut seen = vec![false; k];
        if !augment(a, cost, threshold, &mut seen, &mut match_of) {
            return false;
        }
    }
    true
}

/// Min-max symmetric-difference criterion between two partitions with `k`
/// parts (empty estimated parts allowed). Exhaustive for `k <= 8`,
/// otherwise exact bottleneck assignment by threshold search.
pub fn f_hat(truth: &CommunityLabels, est: &CommunityLabels, k: usize) -> Result<f64> {
    if truth.len() != est.len() {
        return Err(DfmError::Eval(format!(
            "length mismatch: {} vs {}",
            truth.len(),
            est.len()
        )));
    }
    if !truth.covers_all_communities() || truth.k() != k {
        return Err(DfmError::Eval(
            "truth partition must cover all K communities".into(),
        ));
    }
    let cost = fhat_cost_matrix(truth, est, k);
    if k <= 8 {
        let best = permutations(k)
            .iter()
            .map(|perm| {
                (0..k)
                    .map(|t| cost[t][perm[t]])
                    .fold(0.0f64, f64::max)
            })
            .fold(f64::INFINITY, f64::min);
        Ok(best)
    } else {
        let mut values: Vec<f64> = cost.iter().flatten().copied().collect();
        values.sort_by(|a, b| a.partial_cmp(b).unwrap());
        values.dedup();
        let idx = values.partition_point(|&t| !has_perfect_matching(&cost, t));
        Ok(values[idx])
    }
}

/// Spectral norm of `Ahat - Omega`.
pub fn spectral_deviation(ahat: &DMatrix<f64>, omega: &DMatrix<f64>) -> Result<f64> {
    if ahat.shape() != omega.shape() {
        return Err(DfmError::ShapeMismatch(format!(
            "{:?} vs {:?}",
            ahat.shape(),
            omega.shape()
        )));
    }
    spectral_norm(&(ahat - omega))
}

/// Minimum pairwise row distance of the representative eigenvector rows.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeltaReport {
    /// `min_{k != l} ||B(k,:) - B(l,:)||`; infinite when K = 1.
    pub delta: f64,
    /// `sqrt(2 / n_max)`, a valid lower bound when K0 = K.
    pub reference: Option<f64>,
}

pub fn delta_separation(
    omega: &PopulationMatrix,
    z: &MembershipMatrix,
    k0: usize,
) -> Result<DeltaReport> {
    let k = z.k();
    let pair = top_eigs(omega.as_matrix(), k0)?;
    let idx = canonical_index_set(z);
    let mut delta = f64::INFINITY;
    for a in 0..k {
        for b in (a + 1)..k {
            let d = (pair.u.row(idx.indices()[a]) - pair.u.row(idx.indices()[b])).norm();
            delta = delta.min(d);
        }
    }
    let reference = if k0 == k {
        let sizes = community_sizes(z, k0);
        Some((2.0 / sizes.n_max as f64).sqrt())
    } else {
        None
    };
    Ok(DeltaReport { delta, reference })
}

/// Numerical check of the singular-value lower bound
/// `sigma_K0(Omega) >= rho * sigma_K0(P) * n_K0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SigmaBoundCheck {
    pub sigma_k0_omega: f64,
    pub bound: f64,
    pub holds: bool,
}

pub fn sigma_lower_bound_check(spec: &ModelSpec) -> Result<SigmaBoundCheck> {
    let omega = crate::model::build_omega(spec);
    let pair = top_eigs(omega.as_matrix(), spec.k0())?;
    let sigma_k0_omega = pair.lambda[spec.k0() - 1].abs();
    let sizes = community_sizes(&spec.z, spec.k0());
    let bound = spec.rho * spec.p.sigma_k0() * sizes.n_k0 as f64;
    Ok(SigmaBoundCheck {
        sigma_k0_omega,
        bound,
        holds: sigma_k0_omega >= bound - 1e-6 * bound,
    })
}

/// Evaluates the error-rate bound expressions as raw numbers, without the
/// suppressed constants. Useful only for ratio and trend diagnostics.
pub fn theoretical_rate(
    spec: &ModelSpec,
    dist: &EdgeDistribution,
    noise: &NoiseSpec,
    delta: f64,
) -> Result<BTreeMap<&'static str, f64>> {
    if !(delta > 0.0) {
        return Err(DfmError::Eval(format!(
            "delta={delta}; rate expressions undefined"
        )));
    }
    let n = spec.n() as f64;
    let k = spec.k() as f64;
    let k0 = spec.k0() as f64;
    let rho = spec.rho;
    let gamma = gamma_bound(dist, rho);
    let s2w = noise.variance;
    let sizes = community_sizes(&spec.z, spec.k0());
    let (n_min, n_max, n_k0) = (
        sizes.n_min as f64,
        sizes.n_max as f64,
        sizes.n_k0 as f64,
    );
    let sigma2_p = spec.p.sigma_k0().powi(2);
    let signal = gamma * rho * n + s2w * n;
    let mut out = BTreeMap::new();
    out.insert(
        "general",
        k0 * k * signal * n.ln() / (sigma2_p * rho * rho * delta * delta * n_k0 * n_k0 * n_min),
    );
    out.insert(
        "full_rank",
        k * k * signal * n_max * n.ln() / (sigma2_p * rho * rho * n_min.powi(3)),
    );
    out.insert(
        "balanced",
        signal * n.ln() / (sigma2_p * rho * rho * n * n),
    );
    out.insert(
        "noise_free_general",
        k0 * k * gamma * n * n.ln() / (sigma2_p * rho * delta * delta * n_k0 * n_k0 * n_min),
    );
    Ok(out)
}
