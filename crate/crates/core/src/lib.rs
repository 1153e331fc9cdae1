//! Finite doctrines: validation, internal language, power objects,
//! sheafification and the partial-equivalence-relation completion.

pub mod doctrine;
pub mod fincat;
pub mod fixtures;
pub mod format;
pub mod intlang;
pub mod lattice;
pub mod maps;
pub mod percompletion;
pub mod powerobj;
pub mod report;
pub mod sheafify;
