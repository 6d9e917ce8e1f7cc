#![no_std]
#![allow(clippy::neg_cmp_op_on_partial_ord)]
//! Quantum and classical precision limits for optical phase interferometry.

extern crate alloc;

// Float math comes from num_traits (libm). Builds that link std see the
// inherent f64 methods instead, hence the allow on each of those imports.

pub mod bayes;
pub mod bounds;
pub mod channels;
pub mod error;
pub mod errorprop;
pub mod estimation;
pub mod fock;
pub mod gaussian;
pub mod linalg;
pub mod numerics;
pub mod particle;
pub mod qfi;
pub mod seesaw;
pub mod tridiag;

pub use error::{Error, Result};
