//! Unital, trace-preserving completely positive maps on matrix algebras:
//! canonical representations, extremality tests and decompositions, ergodic
//! classification, conjugacy invariants, and the classical Birkhoff
//! decomposition of doubly stochastic matrices.

pub mod birkhoff;
pub mod catalog;
pub mod channel;
pub mod conjugacy;
pub mod error;
pub mod extremality;
pub mod faces;
pub mod io;
pub mod numerics;
pub mod sampling;
pub mod spectral;

pub use birkhoff::{birkhoff_decompose, embed_classical, is_doubly_stochastic, DsMatrix, PermutationDecomposition};
pub use channel::{
    adjoint_channel, choi_from_kraus, kraus_from_choi, superoperator, validate, Channel, ChoiMatrix, KrausFamily,
    Superoperator, Validation,
};
pub use conjugacy::{ConjugacyCertificate, DataMatrix};
pub use error::{Error, Result};
pub use extremality::{
    choi_extremal_test, decompose_extremal, landau_streater_test, DependencyCertificate, ExtremalDecomposition,
    ExtremalityKind, ExtremalityVerdict,
};
pub use faces::{FaceClass, M2CanonicalForm, SchurSpec};
pub use num_complex::Complex64;
pub use numerics::{CMatrix, CVector, Tolerance};
pub use spectral::{classify, CyclicFamily, CyclicOutcome, SpectralClassification};
