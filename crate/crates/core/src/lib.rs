pub mod bits;
pub mod geometry;
pub mod gf;
pub mod intmat;
pub mod intriguing;
pub mod scheme;

pub use geometry::{ProjPoint, QuadraticSpace, Subspace};
pub use gf::{FieldElement, FieldSpec};
