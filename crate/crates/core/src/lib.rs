//! Exact arithmetic in equal-characteristic higher local fields
//! `K = F_q((t_1))...((t_n))`: Milnor K-groups mod `p` with their unit
//! filtration, mod-`p` Galois cohomology with its pole filtration, the residue
//! reciprocity pairing between them, and Artin-Schreier norm maps.

pub mod error;
pub mod ext;
pub mod forms;
pub mod gf;
pub mod hcoh;
pub mod kmilnor;
pub mod linalg;
pub mod recip;
pub mod tower;
pub mod witt;

pub use error::{Error, Result};
