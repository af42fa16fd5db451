//! Symbolic coding and structural stability for expanding group actions.
//!
//! The crate is `no_std` with `alloc`. Enable the `std` feature to get
//! `std::error::Error` impls through `thiserror`.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod coding;
pub mod expansion;
pub mod geometry;
pub mod groups;
pub mod num;
pub mod stability;
pub mod tol;
pub mod zoo;

mod error;

pub use error::Error;

pub type Result<T> = core::result::Result<T, Error>;
