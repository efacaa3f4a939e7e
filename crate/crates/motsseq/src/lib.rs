//! Slice spectral sequence pages for the motivic sphere spectrum and very
//! effective hermitian K-theory over concrete base fields of odd or zero
//! characteristic, together with the assembly of the 0-, 1- and 2-lines of
//! the motivic stable stems as extension chains.
//!
//! The crate is organized bottom-up:
//!
//! * [`abelian`] — descriptors for the abelian groups that appear in page
//!   entries (finitely generated invariant-factor data plus tagged divisible
//!   summands) and exact integer linear algebra on maps between them.
//! * [`fields`] — base field models: mod-2 Milnor K-theory with its ring
//!   structure, integral motivic cohomology tables, Witt ring filtration,
//!   roots of unity. Built-ins for the complex and real numbers, odd finite
//!   fields and odd p-adic fields; arbitrary models load from JSON.
//! * [`motcoh`] — motivic cohomology classes over a model and the stable
//!   operations acting on them (Sq1, Sq2, their composites, Bockstein maps,
//!   tau- and rho-multiplications), with operation matrices between page
//!   entry groups.
//! * [`slices`] — slice summand tables for the four spectra, the first
//!   slice differential as an operation-valued matrix, and the unit map on
//!   slices.
//! * [`sseq`] — page entries (E1, E2, E-infinity columns), the rule set
//!   licensing vanishing of higher differentials, and the assembly of
//!   homotopy lines as chains of short exact sequences with named
//!   generators and relations.
//!
//! All model data is immutable after construction, so evaluation is freely
//! shareable across threads.

pub mod abelian;
pub mod fields;
pub mod motcoh;
pub mod slices;
pub mod sseq;

mod book;

pub use abelian::{AbGroup, DivKind, DivTag, Hom};
pub use fields::FieldModel;
pub use motcoh::{MotClass, OpName};
pub use sseq::{PageEntry, PiResult};

/// Errors shared across the crate. Computation errors carry the reason the
/// engine refused, including the rule tag when a vanishing license is
/// missing.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("unknown built-in field `{0}`")]
    UnknownField(String),
    #[error("residue characteristic 2 is not supported: `{0}`")]
    CharTwo(String),
    #[error("model violates `{0}`")]
    ModelInvariant(String),
    #[error("descriptor map is not well defined: {0}")]
    BadHom(String),
    #[error("slice table exhausted: {0}")]
    TableExhausted(String),
    #[error("no vanishing rule covers {0}")]
    NoRule(String),
    #[error("out of supported range: {0}")]
    OutOfRange(String),
    #[error("extension not resolved: {0}")]
    Unresolved(String),
    #[error("malformed model file: {0}")]
    Schema(String),
}

pub type Result<T> = std::result::Result<T, Error>;
