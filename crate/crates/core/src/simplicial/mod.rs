mod cohomology;
mod complex;
mod intmat;

pub use cohomology::{
    coboundary, coboundary_matrix, cohomology, integer_class, sort_with_sign, ClassCoordinates,
    CohomologyGroup, IntegerClass, IntegerCochain,
};
pub(crate) use cohomology::{compute_cohomology, delta};
pub use complex::{
    parse_simplex_key, simplex_key, SampleId, Simplex, SimplicialComplex, StarCover,
};
pub use intmat::{smith_normal_form, IntMatrix, SmithForm};
