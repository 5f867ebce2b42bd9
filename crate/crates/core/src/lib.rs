//! Numerical toolkit for lcs instantons on symplectizations of contact
//! 3-manifolds: contact models, discrete surfaces, the instanton residual and
//! energies, Hick's charges, Reeb orbit spectra, Conley-Zehnder indices,
//! Fredholm index bookkeeping and a projected Gauss-Newton solver.

pub mod error;
pub mod fourier;
pub mod index;
pub mod instanton;
pub mod linearization;
pub mod model;
pub mod ode;
pub mod reeb;
pub mod solver;
pub mod sparse;
pub mod surface;

pub use error::{LabError, Result};
pub use model::{ContactFrame, ContactModel, LcsPoint, ModelKind, Point};
pub use surface::{DiscreteOneForm, DiscreteScalar, DomainKind, DomainSpec, End, SurfaceDomain};
