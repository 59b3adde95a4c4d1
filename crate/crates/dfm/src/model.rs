//! Model parameterization: community labels, membership matrices, the
//! connectivity matrix and the population matrix they induce.
//!
//! Community ids are 1-based everywhere in the public surface; internal row
//! and column indices are 0-based.

use crate::error::DfmError;
use crate::Result;
use nalgebra::DMatrix;

/// Relative threshold below which a singular value counts as zero when
/// computing numerical ranks.
pub const RANK_TOLERANCE: f64 = 1e-10;

/// A length-n vector of community ids in `1..=K`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CommunityLabels {
    entries: Vec<usize>,
    k: usize,
}

impl CommunityLabels {
    /// Builds a label vector, checking only that each entry lies in `1..=k`.
    /// Use [`labels_to_membership`] when full coverage of all `k` communities
    /// must hold as well.
    pub fn new(entries: Vec<usize>, k: usize) -> Result<Self> {
        if k == 0 {
            return Err(DfmError::InvalidLabels("K must be at least 1".into()));
        }
        if entries.is_empty() {
            return Err(DfmError::InvalidLabels("empty label vector".into()));
        }
        if let Some((i, &l)) = entries.iter().enumerate().find(|(_, &l)| l < 1 || l > k) {
            return Err(DfmError::InvalidLabels(format!(
                "label {l} at node {} outside 1..={k}",
                i + 1
            )));
        }
        Ok(Self { entries, k })
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// 1-based community id of node `i` (0-based node index).
    pub fn label(&self, i: usize) -> usize {
        self.entries[i]
    }

    pub fn entries(&self) -> &[usize] {
        &self.entries
    }

    /// True when every community in `1..=K` has at least one node.
    pub fn covers_all_communities(&self) -> bool {
        let mut seen = vec![false; self.k];
        for &l in &self.entries {
            seen[l - 1] = true;
        }
        seen.iter().all(|&s| s)
    }
}

/// An n-by-K one-hot membership matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct MembershipMatrix {
    matrix: DMatrix<f64>,
}

impl MembershipMatrix {
    /// Validates an explicit 0/1 matrix: one 1 per row, no empty column.
    pub fn new(matrix: DMatrix<f64>) -> Result<Self> {
        let (n, k) = matrix.shape();
        if n == 0 || k == 0 {
            return Err(DfmError::InvalidMembership("empty matrix".into()));
        }
        for i in 0..n {
            let mut ones = 0usize;
            for j in 0..k {
                let v = matrix[(i, j)];
                if v == 1.0 {
                    ones += 1;
                } else if v != 0.0 {
                    return Err(DfmError::InvalidMembership(format!(
                        "entry ({},{}) is {v}, expected 0 or 1",
                        i + 1,
                        j + 1
                    )));
                }
            }
            if ones != 1 {
                return Err(DfmError::InvalidMembership(format!(
                    "row {} has {ones} ones, expected exactly 1",
                    i + 1
                )));
            }
        }
        for j in 0..k {
            if (0..n).all(|i| matrix[(i, j)] == 0.0) {
                return Err(DfmError::InvalidMembership(format!(
                    "community {} is empty",
                    j + 1
                )));
            }
        }
        Ok(Self { matrix })
    }

    pub fn n(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn k(&self) -> usize {
        self.matrix.ncols()
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }
}

/// Builds the one-hot membership matrix of a label vector.
///
/// Fails when some community in `1..=K` is empty, which would make the
/// membership matrix rank-deficient.
pub fn labels_to_membership(labels: &CommunityLabels, k: usize) -> Result<MembershipMatrix> {
    if labels.k() != k {
        return Err(DfmError::InvalidLabels(format!(
            "labels declare K={}, requested K={k}",
            labels.k()
        )));
    }
    if !labels.covers_all_communities() {
        let mut seen = vec![false; k];
        for &l in labels.entries() {
            seen[l - 1] = true;
        }
        let missing = seen.iter().position(|&s| !s).unwrap() + 1;
        return Err(DfmError::InvalidLabels(format!(
            "empty community {missing}"
        )));
    }
    let n = labels.len();
    let mut m = DMatrix::zeros(n, k);
    for i in 0..n {
        m[(i, labels.label(i) - 1)] = 1.0;
    }
    Ok(MembershipMatrix { matrix: m })
}

/// Reads the label vector back out of a membership matrix.
pub fn membership_to_labels(z: &MembershipMatrix) -> Result<CommunityLabels> {
    let (n, k) = z.as_matrix().shape();
    let mut entries = Vec::with_capacity(n);
    for i in 0..n {
        let mut hits = (0..k).filter(|&j| z.as_matrix()[(i, j)] == 1.0);
        let first = hits.next().ok_or_else(|| {
            DfmError::InvalidMembership(format!("row {} has no 1", i + 1))
        })?;
        if hits.next().is_some() {
            return Err(DfmError::InvalidMembership(format!(
                "row {} has more than one 1",
                i + 1
            )));
        }
        entries.push(first + 1);
    }
    CommunityLabels::new(entries, k)
}

/// Singular values of a symmetric matrix are the magnitudes of its
/// eigenvalues; returned in descending order.
fn symmetric_singular_values(m: &DMatrix<f64>) -> Vec<f64> {
    let eig = m.clone().symmetric_eigen();
    let mut sv: Vec<f64> = eig.eigenvalues.iter().map(|l| l.abs()).collect();
    sv.sort_by(|a, b| b.partial_cmp(a).unwrap());
    sv
}

fn numerical_rank(sv: &[f64]) -> usize {
    let largest = sv.first().copied().unwrap_or(0.0);
    if largest == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s >= RANK_TOLERANCE * largest).count()
}

/// The K-by-K symmetric connectivity matrix; entries may be negative, the
/// largest magnitude equals 1, and the numerical rank equals the declared K0.
#[derive(Debug, Clone, PartialEq)]
pub struct ConnectivityMatrix {
    matrix: DMatrix<f64>,
    k0: usize,
}

impl ConnectivityMatrix {
    pub fn new(matrix: DMatrix<f64>, k0: usize) -> Result<Self> {
        let (r, c) = matrix.shape();
        if r != c || r == 0 {
            return Err(DfmError::InvalidConnectivity(format!(
                "expected a nonempty square matrix, got {r}x{c}"
            )));
        }
        let k = r;
        if k0 < 1 || k0 > k {
            return Err(DfmError::InvalidConnectivity(format!(
                "K0={k0} outside 1..=K={k}"
            )));
        }
        for i in 0..k {
            for j in (i + 1)..k {
                if (matrix[(i, j)] - matrix[(j, i)]).abs() > 1e-12 {
                    return Err(DfmError::InvalidConnectivity(format!(
                        "not symmetric at ({},{})",
                        i + 1,
                        j + 1
                    )));
                }
            }
        }
        let max_abs = matrix.iter().fold(0.0f64, |a, &v| a.max(v.abs()));
        if (max_abs - 1.0).abs() > 1e-12 {
            return Err(DfmError::InvalidConnectivity(format!(
                "max |entry| is {max_abs}, expected 1 (see normalize)"
            )));
        }
        let sv = symmetric_singular_values(&matrix);
        let rank = numerical_rank(&sv);
        if rank != k0 {
            return Err(DfmError::InvalidConnectivity(format!(
                "numerical rank {rank} does not match declared K0={k0}"
            )));
        }
        Ok(Self { matrix, k0 })
    }

    /// Rescales an arbitrary symmetric matrix so that its largest entry
    /// magnitude is 1, then validates it. Validation never rescales silently.
    pub fn normalize(matrix: DMatrix<f64>, k0: usize) -> Result<Self> {
        let max_abs = matrix.iter().fold(0.0f64, |a, &v| a.max(v.abs()));
        if max_abs == 0.0 {
            return Err(DfmError::InvalidConnectivity("zero matrix".into()));
        }
        Self::new(matrix / max_abs, k0)
    }

    pub fn k(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn k0(&self) -> usize {
        self.k0
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    /// K0-th largest singular value (the smallest one treated as nonzero).
    pub fn sigma_k0(&self) -> f64 {
        symmetric_singular_values(&self.matrix)[self.k0 - 1]
    }
}

/// Full model parameterization `(n, K, K0, rho, P, Z)`.
#[derive(Debug, Clone)]
pub struct ModelSpec {
    pub rho: f64,
    pub p: ConnectivityMatrix,
    pub z: MembershipMatrix,
}

impl ModelSpec {
    pub fn new(rho: f64, p: ConnectivityMatrix, z: MembershipMatrix) -> Result<Self> {
        if !(rho > 0.0) {
            return Err(DfmError::InvalidSpec(format!("rho={rho}, expected > 0")));
        }
        if p.k() != z.k() {
            return Err(DfmError::InvalidSpec(format!(
                "P is {0}x{0} but Z has {1} communities",
                p.k(),
                z.k()
            )));
        }
        if z.k() > z.n() {
            return Err(DfmError::InvalidSpec(format!(
                "K={} exceeds n={}",
                z.k(),
                z.n()
            )));
        }
        Ok(Self { rho, p, z })
    }

    pub fn n(&self) -> usize {
        self.z.n()
    }

    pub fn k(&self) -> usize {
        self.z.k()
    }

    pub fn k0(&self) -> usize {
        self.p.k0()
    }

    pub fn labels(&self) -> CommunityLabels {
        membership_to_labels(&self.z).expect("validated membership")
    }
}

/// The dense expectation matrix `rho * Z * P * Z'`.
#[derive(Debug, Clone, PartialEq)]
pub struct PopulationMatrix {
    matrix: DMatrix<f64>,
}

impl PopulationMatrix {
    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn n(&self) -> usize {
        self.matrix.nrows()
    }
}

/// Builds the population matrix of a model spec.
///
/// Entry `(i,j)` equals `rho * P(l(i), l(j))`; the construction is exact
/// rather than going through the matrix product.
pub fn build_omega(spec: &ModelSpec) -> PopulationMatrix {
    let labels = spec.labels();
    let n = spec.n();
    let p = spec.p.as_matrix();
    let mut omega = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            omega[(i, j)] = spec.rho * p[(labels.label(i) - 1, labels.label(j) - 1)];
        }
    }
    PopulationMatrix { matrix: omega }
}

/// Community size summary: per-community counts plus the order statistics
/// used in the error-rate expressions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CommunitySizes {
    pub sizes: Vec<usize>,
    pub n_min: usize,
    pub n_max: usize,
    /// K0-th largest community size.
    pub n_k0: usize,
}

pub fn community_sizes(z: &MembershipMatrix, k0: usize) -> CommunitySizes {
    let (n, k) = z.as_matrix().shape();
    assert!(k0 >= 1 && k0 <= k, "K0 outside 1..=K");
    let mut sizes = vec![0usize; k];
    for i in 0..n {
        for j in 0..k {
            if z.as_matrix()[(i, j)] == 1.0 {
                sizes[j] += 1;
            }
        }
    }
    let mut sorted = sizes.clone();
    sorted.sort_unstable_by(|a, b| b.cmp(a));
    CommunitySizes {
        n_min: *sorted.last().unwrap(),
        n_max: sorted[0],
        n_k0: sorted[k0 - 1],
        sizes,
    }
}

/// K node indices, one per community: the smallest node index of each.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IndexSet {
    /// 0-based node indices ordered by community id.
    indices: Vec<usize>,
}

impl IndexSet {
    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    /// 1-based node indices, ordered by community id.
    pub fn node_ids(&self) -> Vec<usize> {
        self.indices.iter().map(|&i| i + 1).collect()
    }
}

/// Deterministic representative set: the first node of each community.
pub fn canonical_index_set(z: &MembershipMatrix) -> IndexSet {
    let labels = membership_to_labels(z).expect("validated membership");
    let k = z.k();
    let mut indices = vec![usize::MAX; k];
    for i in (0..labels.len()).rev() {
        indices[labels.label(i) - 1] = i;
    }
    IndexSet { indices }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use proptest::prelude::*;

    fn labels(v: &[usize], k: usize) -> CommunityLabels {
        CommunityLabels::new(v.to_vec(), k).unwrap()
    }

    #[test]
    fn labels_to_membership_identity_case() {
        let z = labels_to_membership(&labels(&[1, 2], 2), 2).unwrap();
        assert_eq!(z.as_matrix(), &DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 1.0]));
    }

    #[test]
    fn labels_to_membership_column_sums() {
        let z = labels_to_membership(&labels(&[1, 1, 2, 2, 3], 3), 3).unwrap();
        assert_eq!(z.as_matrix().shape(), (5, 3));
        let sums: Vec<f64> = (0..3).map(|j| z.as_matrix().column(j).sum()).collect();
        assert_eq!(sums, vec![2.0, 2.0, 1.0]);
    }

    #[test]
    fn labels_to_membership_rejects_empty_community() {
        let err = labels_to_membership(&labels(&[1, 1, 1], 2), 2).unwrap_err();
        assert!(err.to_string().contains("empty community 2"));
    }

    #[test]
    fn membership_to_labels_reads_off() {
        let z = MembershipMatrix::new(DMatrix::from_row_slice(
            3,
            2,
            &[0.0, 1.0, 0.0, 1.0, 1.0, 0.0],
        ))
        .unwrap();
        assert_eq!(membership_to_labels(&z).unwrap().entries(), &[2, 2, 1]);
    }

    #[test]
    fn membership_rejects_row_sum_two() {
        let err = MembershipMatrix::new(DMatrix::from_row_slice(1, 2, &[1.0, 1.0])).unwrap_err();
        assert!(err.to_string().contains("row 1"));
    }

    #[test]
    fn build_omega_identity_z() {
        let p = ConnectivityMatrix::new(
            DMatrix::from_row_slice(2, 2, &[1.0, 0.4, 0.4, 0.9]),
            2,
        )
        .unwrap();
        let z = labels_to_membership(&labels(&[1, 2], 2), 2).unwrap();
        let spec = ModelSpec::new(0.5, p, z).unwrap();
        let omega = build_omega(&spec);
        let expected = DMatrix::from_row_slice(2, 2, &[0.5, 0.2, 0.2, 0.45]);
        assert!((omega.as_matrix() - expected).abs().max() < 1e-12);
    }

    #[test]
    fn build_omega_block_diagonal() {
        let p = ConnectivityMatrix::new(DMatrix::identity(2, 2), 2).unwrap();
        let z = labels_to_membership(&labels(&[1, 1, 2], 2), 2).unwrap();
        let spec = ModelSpec::new(1.0, p, z).unwrap();
        let omega = build_omega(&spec);
        let expected =
            DMatrix::from_row_slice(3, 3, &[1.0, 1.0, 0.0, 1.0, 1.0, 0.0, 0.0, 0.0, 1.0]);
        assert_eq!(omega.as_matrix(), &expected);
    }

    /// 3x3 connectivity matrix with a negative leading entry.
    pub(crate) fn experiment_p_negative() -> ConnectivityMatrix {
        ConnectivityMatrix::new(
            DMatrix::from_row_slice(
                3,
                3,
                &[-1.0, -0.4, 0.5, -0.4, 0.9, 0.2, 0.5, 0.2, 0.8],
            ),
            3,
        )
        .unwrap()
    }

    #[test]
    fn build_omega_negative_entry() {
        // n=200, rho=0.4: two nodes in community 1 get rho * P(1,1) = -0.4.
        let mut v = Vec::with_capacity(200);
        for i in 0..200 {
            v.push(i % 3 + 1);
        }
        let z = labels_to_membership(&labels(&v, 3), 3).unwrap();
        let spec = ModelSpec::new(0.4, experiment_p_negative(), z).unwrap();
        let omega = build_omega(&spec);
        // nodes 0 and 3 are both in community 1
        assert!((omega.as_matrix()[(0, 3)] - (-0.4)).abs() < 1e-12);
    }

    #[test]
    fn community_sizes_examples() {
        let z = labels_to_membership(
            &labels(&[1, 1, 1, 1, 1, 2, 2, 2, 3, 3], 3),
            3,
        )
        .unwrap();
        let s = community_sizes(&z, 2);
        assert_eq!((s.n_k0, s.n_min, s.n_max), (3, 2, 5));

        let z = labels_to_membership(&labels(&[1, 1, 1, 1, 2, 2, 2, 2], 2), 2).unwrap();
        assert_eq!(community_sizes(&z, 2).n_k0, 4);

        let z = labels_to_membership(&labels(&[1; 7], 1), 1).unwrap();
        let s = community_sizes(&z, 1);
        assert_eq!((s.n_k0, s.n_min, s.n_max), (7, 7, 7));
    }

    #[test]
    fn canonical_index_set_first_occurrence() {
        let z = labels_to_membership(&labels(&[1, 2, 1, 2], 2), 2).unwrap();
        assert_eq!(canonical_index_set(&z).node_ids(), vec![1, 2]);

        let z = labels_to_membership(&labels(&[2, 2, 1], 2), 2).unwrap();
        assert_eq!(canonical_index_set(&z).node_ids(), vec![3, 1]);

        let z = labels_to_membership(&labels(&[1], 1), 1).unwrap();
        assert_eq!(canonical_index_set(&z).node_ids(), vec![1]);
    }

    #[test]
    fn index_set_rows_are_identity() {
        let z = labels_to_membership(&labels(&[3, 1, 2, 3, 1], 3), 3).unwrap();
        let idx = canonical_index_set(&z);
        for (c, &i) in idx.indices().iter().enumerate() {
            for j in 0..3 {
                let expect = if j == c { 1.0 } else { 0.0 };
                assert_eq!(z.as_matrix()[(i, j)], expect);
            }
        }
    }

    #[test]
    fn connectivity_rejects_unnormalized_and_wrong_rank() {
        let m = DMatrix::from_row_slice(2, 2, &[0.5, 0.1, 0.1, 0.2]);
        assert!(ConnectivityMatrix::new(m.clone(), 2).is_err());
        assert!(ConnectivityMatrix::normalize(m, 2).is_ok());

        // rank-1 matrix declared as rank 2
        let r1 = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0]);
        assert!(ConnectivityMatrix::new(r1.clone(), 2).is_err());
        assert!(ConnectivityMatrix::new(r1, 1).is_ok());
    }

    /// Random valid spec used by the property tests below.
    pub(crate) fn random_spec(
        rng: &mut impl Rng,
        n: usize,
        k: usize,
        k0: usize,
        rho: f64,
    ) -> ModelSpec {
        let p = random_p(rng, k, k0);
        let mut entries: Vec<usize> = (0..n).map(|i| i % k + 1).collect();
        for i in k..n {
            entries[i] = rng.gen_range(1..=k);
        }
        let lab = CommunityLabels::new(entries, k).unwrap();
        let z = labels_to_membership(&lab, k).unwrap();
        ModelSpec::new(rho, p, z).unwrap()
    }

    /// Random connectivity matrix: P = Q D Q' with K - K0 zero diagonal
    /// entries, then max-normalized.
    pub(crate) fn random_p(rng: &mut impl Rng, k: usize, k0: usize) -> ConnectivityMatrix {
        loop {
            let raw = DMatrix::from_fn(k, k, |_, _| rng.gen_range(-1.0..1.0));
            let q = raw.qr().q();
            let mut d = DMatrix::zeros(k, k);
            for i in 0..k0 {
                let mut v: f64 = rng.gen_range(0.3..1.5);
                if rng.gen_bool(0.3) {
                    v = -v;
                }
                d[(i, i)] = v;
            }
            let m = &q * d * q.transpose();
            let m = (&m + m.transpose()) * 0.5;
            if let Ok(p) = ConnectivityMatrix::normalize(m, k0) {
                break p;
            }
        }
    }

    /// Like [`random_spec`] but with exactly equal community sizes; `n` is
    /// rounded down to a multiple of `k`.
    pub(crate) fn random_balanced_spec(
        rng: &mut impl Rng,
        n: usize,
        k: usize,
        k0: usize,
        rho: f64,
    ) -> ModelSpec {
        let p = random_p(rng, k, k0);
        let n = (n / k) * k;
        let entries: Vec<usize> = (0..n).map(|i| i % k + 1).collect();
        let lab = CommunityLabels::new(entries, k).unwrap();
        let z = labels_to_membership(&lab, k).unwrap();
        ModelSpec::new(rho, p, z).unwrap()
    }

    use rand::Rng;
    use rand::SeedableRng;

    #[test]
    fn omega_rank_matches_k0_including_deficient_p() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for case in 0..30 {
            let k = rng.gen_range(2..=5usize);
            let k0 = rng.gen_range(1..=k);
            let n = rng.gen_range(k..=40usize);
            let rho = rng.gen_range(0.2..2.0);
            let spec = random_spec(&mut rng, n, k, k0, rho);
            let omega = build_omega(&spec);
            let sv = symmetric_singular_values(omega.as_matrix());
            assert_eq!(numerical_rank(&sv), k0, "case {case}: rank mismatch");
            let max_abs = omega.as_matrix().iter().fold(0.0f64, |a, &v| a.max(v.abs()));
            assert!(max_abs <= spec.rho + 1e-12);
        }
    }

    #[test]
    fn identifiability_under_consistent_permutation() {
        // Permuting community ids in Z and P together leaves Omega unchanged,
        // and reading (Z, P) back off Omega restricted to the index set
        // recovers the permuted parameters.
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(9);
        for _ in 0..10 {
            let k = 3usize;
            let spec = random_spec(&mut rng, 12, k, k, 1.3);
            let perm = [2usize, 0, 1]; // community c -> perm[c]
            let labels = spec.labels();
            let permuted: Vec<usize> = labels
                .entries()
                .iter()
                .map(|&l| perm[l - 1] + 1)
                .collect();
            let z2 = labels_to_membership(&CommunityLabels::new(permuted, k).unwrap(), k).unwrap();
            let mut p2 = DMatrix::zeros(k, k);
            for a in 0..k {
                for b in 0..k {
                    p2[(perm[a], perm[b])] = spec.p.as_matrix()[(a, b)];
                }
            }
            let spec2 = ModelSpec::new(
                spec.rho,
                ConnectivityMatrix::new(p2, k).unwrap(),
                z2,
            )
            .unwrap();
            let om1 = build_omega(&spec);
            let om2 = build_omega(&spec2);
            assert!((om1.as_matrix() - om2.as_matrix()).abs().max() < 1e-12);

            // Omega over the canonical index set of each spec equals rho * P.
            for (s, om) in [(&spec, &om1), (&spec2, &om2)] {
                let idx = canonical_index_set(&s.z);
                for a in 0..k {
                    for b in 0..k {
                        let got = om.as_matrix()[(idx.indices()[a], idx.indices()[b])];
                        assert!((got - s.rho * s.p.as_matrix()[(a, b)]).abs() < 1e-12);
                    }
                }
            }
        }
    }

    proptest! {
        #[test]
        fn labels_membership_round_trip(v in proptest::collection::vec(1usize..=4, 4..32)) {
            let mut v = v;
            for c in 1..=4 {
                v[c - 1] = c; // force coverage
            }
            let lab = CommunityLabels::new(v.clone(), 4).unwrap();
            let z = labels_to_membership(&lab, 4).unwrap();
            let back = membership_to_labels(&z).unwrap();
            prop_assert_eq!(back.entries(), &v[..]);
        }

        #[test]
        fn omega_symmetric_and_bounded(seed in 0u64..200) {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let k = rng.gen_range(2..=4usize);
            let k0 = rng.gen_range(1..=k);
            let n = rng.gen_range(k..=20usize);
            let rho = rng.gen_range(0.1..3.0);
            let spec = random_spec(&mut rng, n, k, k0, rho);
            let omega = build_omega(&spec);
            let m = omega.as_matrix();
            for i in 0..n {
                for j in 0..n {
                    prop_assert_eq!(m[(i, j)], m[(j, i)]);
                    prop_assert!(m[(i, j)].abs() <= spec.rho + 1e-12);
                }
            }
        }
    }
}
