//! Pipeline stages behind the `lob-arena` binary.

pub mod data;
pub mod eval;
pub mod manifest;
pub mod pipeline;
pub mod sim;
pub mod train;
