//! Command-line front end for expsum: JSON and CSV output, verification
//! suites and a file-based census of computed L-polynomials.

pub mod app;
pub mod record;
pub mod store;

pub use app::run;
