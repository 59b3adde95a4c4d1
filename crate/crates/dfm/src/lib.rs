//! Distribution-free modelling of weighted and unweighted networks.
//!
//! The crate builds population matrices of the form `rho * Z * P * Z'`,
//! samples adjacency matrices whose entries have that expectation under a
//! choice of edge distributions, perturbs them with symmetric noise, and
//! recovers community labels with a spectral pipeline (top eigenvectors
//! followed by k-means). An experiment harness sweeps model parameters and
//! writes per-repetition metrics to CSV.

pub mod config;
pub mod dataio;
pub mod error;
pub mod eval;
pub mod gml;
pub mod model;
pub mod rng;
pub mod sampling;
pub mod spectral;
pub mod sweep;

pub use error::DfmError;
pub use model::{
    CommunityLabels, ConnectivityMatrix, IndexSet, MembershipMatrix, ModelSpec, PopulationMatrix,
};
pub use rng::RandomStream;
pub use sampling::{AdjacencyBundle, EdgeDistribution, NoiseSpec};
pub use spectral::{ClusteringResult, KMeansConfig, SpectralPair};

/// Result alias used throughout the crate.
pub type Result<T> = std::result::Result<T, DfmError>;
