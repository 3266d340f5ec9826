//! Library side of the command-line driver: experiment orchestration and
//! deterministic export formats. The binary in `main.rs` is a thin argument
//! parser over these functions, and the acceptance tests call them directly.

pub mod experiments;
pub mod output;
