//! Operational side of anash: instance generators, game file formats, the
//! batch runner and the records it emits.

pub mod batch;
pub mod error;
pub mod format;
pub mod generate;
pub mod nfg;
pub mod run;

pub use error::{exit, HarnessError, ParseError, Result};
pub use format::LoadOptions;
pub use generate::{generate, Family, InstanceSpec};
pub use run::{run_solve, RunRecord};
