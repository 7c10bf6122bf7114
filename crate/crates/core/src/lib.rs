//! Positive definite matrices over finite fields and the functions that preserve them
//! entrywise.

pub mod error;
pub mod gf;
pub mod limits;
pub mod matpos;
pub mod numtheory;
pub mod paley;
pub mod preserver;

pub use error::{Error, Result};
pub use gf::{Congruence, Elem, Field, FieldInfo, Sign};
pub use matpos::SymMatrix;
pub use preserver::{ClassificationResult, ClassifyOptions, FnTable, Form, Mode};
