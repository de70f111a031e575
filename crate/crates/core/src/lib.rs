//! Secrecy region of a cipher system whose receivers hold correlated side
//! information, sent over a degraded wiretap channel.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod error;
pub mod gamma;
pub mod prob;
pub mod rd;
pub mod region;
pub mod sim;

pub use error::{Error, Infeasibility, Result};
pub use prob::{Channel, Distribution, Joint2, Joint3};
pub use rd::DistortionMeasure;
