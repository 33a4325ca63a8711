//! Runs every Rust snippet in the guide book as a doc-test.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}

#[doc = include_str!("../../../book/src/rubric.md")]
pub mod rubric {}

#[doc = include_str!("../../../book/src/data.md")]
pub mod data {}

#[doc = include_str!("../../../book/src/base-model.md")]
pub mod base_model {}

#[doc = include_str!("../../../book/src/guides.md")]
pub mod guides {}

#[doc = include_str!("../../../book/src/decoding.md")]
pub mod decoding {}

#[doc = include_str!("../../../book/src/sweeps.md")]
pub mod sweeps {}

#[doc = include_str!("../../../book/src/service.md")]
pub mod service {}
