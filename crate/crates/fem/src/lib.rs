//! P1 finite-element validation toolkit for the eigenvalue-bound library:
//! graded cusp meshes, Neumann eigenvalues (p = 2 via the stiffness/mass
//! pencil, general p via Rayleigh-quotient descent), and variational
//! p-capacity of condensers with the quasiconformal transfer check.

pub mod assembly;
pub mod capacity;
pub mod eigen;
pub mod error;
pub mod fields;
pub mod mesh;
pub mod rayleigh;
mod solver;

pub use capacity::{
    annulus_capacity_oracle, capacity_p, capacity_transfer_check, CapacityReport, CondenserSpec,
    Plate, TransferReport,
};
pub use eigen::{mu2_fem, mu2_fem_report, EigenReport};
pub use error::FemError;
pub use fields::{lp_norm, p_mean, ScalarField};
pub use mesh::{mesh_annulus, mesh_cusp_2d, mesh_disc, mesh_rect, mesh_square, TriMesh};
pub use rayleigh::{mup_rayleigh, RayleighReport};
