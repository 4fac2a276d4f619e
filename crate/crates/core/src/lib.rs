//! Learning with malicious and nasty noise on finite domains: corruption
//! models, learner wrappers, list-decodable codes, keyed functions and the
//! concept classes that separate the noise models.

// Negated float comparisons here also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod codes;
pub mod cryptoprim;
pub mod domain;
pub mod error;
pub mod icesep;
pub mod learn;
pub mod noise;
pub mod rng;
pub mod sep;
pub mod stats;

pub use domain::*;
pub use error::{Error, Result};
pub use rng::{RngHandle, SimRng};
