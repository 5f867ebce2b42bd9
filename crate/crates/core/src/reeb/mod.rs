//! Closed Reeb orbits, linearized return maps, Conley-Zehnder indices and
//! the asymptotic operator.

pub mod cz;
pub mod orbit;
pub mod path;
pub mod spectrum;

pub use cz::{conley_zehnder, CzOptions, CzReport};
pub use orbit::{axis_orbits, find_orbit, OrbitSearchOptions, ReebOrbit};
pub use path::{linearized_path, SymplecticPath};
pub use spectrum::{action_spectrum, asymptotic_spectrum, weight_rule, ActionSpectrum, SpectralData};
