//! Coherence analysis of real unit-norm frames.
//!
//! The crate maps the vectors of a frame through the first and second
//! zero-mean tensor embeddings, compares the resulting Gram matrices with
//! Rankin's cap-packing bounds, and decides when a frame is provably
//! Grassmannian (has the smallest coherence possible for its size).
//!
//! Everything here is `no_std` + `alloc`. File formats, reports and the
//! command-line front end live in the `framekit` crate.
#![cfg_attr(not(test), no_std)]
#![deny(rust_2018_idioms)]

extern crate alloc;

pub mod bounds;
pub mod certify;
pub mod embeddings;
mod error;
pub mod frames;
pub mod gallery;
pub mod linalg;
pub mod oracle;

pub use bounds::{bound_report, BoundReport};
pub use certify::{certify_level1, certify_level2, Certificate, Route, Verdict};
pub use embeddings::{
    embedded_gram, embedding_dimension, k2_analytic, q1_embed, q2_embed, CoherenceTensor2,
    EmbedOptions, EmbeddedGram, GramMethod, Level,
};
pub use error::{Error, Result};
pub use frames::{antipodal_dedup, gram_profile, Frame, GramProfile};
pub use gallery::GalleryEntry;
