//! Tiered storage planning for video-on-demand repositories.
//!
//! A video is split into GOPs. Each GOP is either kept in one of four
//! object-storage tiers or deleted and transcoded again on request. The
//! crate synthesizes repositories, prices both options, and compares
//! placement policies across popularity, growth and CDN scenarios.

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod clustering;
pub mod costmodel;
pub mod error;
pub mod experiments;
pub mod policy;
pub mod workload;

pub use error::{Error, Result};
