//! Arithmetic of positive-definite integral quadratic forms: reduction,
//! canonical forms and isometries, local invariants, Kneser neighbours,
//! genus and spinor genus enumeration, the discriminant of the associated
//! homogeneous set, and a numerical harness for equidistribution of genera.

pub mod canonical;
pub mod disc;
pub mod enumerate;
pub mod equid;
pub mod error;
pub mod form;
pub mod genus;
pub mod isometry;
pub mod linalg;
pub mod lll;
pub mod local;
pub mod oracle;

pub use canonical::{canonical_form, CanonicalCertificate};
pub use disc::{disc_homogeneous, killing_unit_check, pluecker_primitive, so_lie_basis, DiscReport, LieBasis};
pub use enumerate::{minimum, short_vectors, ShortVector};
pub use equid::{
    ball_volume, equid_experiment, normalize_unit_det, power_fit, siegel_count, EquidReport, RateFit,
    UnitDetForm, Weighting,
};
pub use error::{Error, Result};
pub use form::{QuadraticForm, Unimodular};
pub use genus::{
    genus_enumerate, genus_mass, p_neighbors, spin_genus_partition, CompleteFlag, GenusEnumeration,
    GenusPolicy, MassValue, MassWeighting, PrimeSelection, SpinorPartition,
};
pub use isometry::{automorphism_order, is_isometric};
pub use lll::lll_reduce;
pub use local::{
    discriminant_field, good_place, hasse_invariant, hilbert_symbol, jordan_decomposition,
    local_spinor_norms, locally_equivalent, same_genus, DiscriminantField, GoodPlace, JordanSplitting,
    LocalInvariants, Place, SpinorNormGroup,
};
pub use oracle::{completeness_check, reduced_forms, CompletenessReport};
