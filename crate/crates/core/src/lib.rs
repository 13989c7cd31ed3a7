pub mod bench;
pub mod cli;
pub mod error;
pub mod homotopy;
pub mod linalg;
pub mod prox;
pub mod signal;
