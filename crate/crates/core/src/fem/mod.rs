//! Lagrange finite elements for `-div(a grad u)` with Dirichlet data.

mod assembly;
mod coefficient;
mod element;
mod function;
mod projection;
pub mod quadrature;
mod space;
mod transfer;

pub use assembly::{assemble, assemble_all_nodes, AssembledPair};
pub use coefficient::{check_ellipticity, sym_eigenvalues, CoefficientField, EllipticityReport};
pub use element::LagrangeElement;
pub use function::FeFunction;
pub use projection::{apply_ah, l2_project, l2_project_quad, load_vector, ritz_project};
pub use quadrature::QuadratureRule;
pub use space::{ElementGeometry, FeSpace};
pub use transfer::GridTransfer;
