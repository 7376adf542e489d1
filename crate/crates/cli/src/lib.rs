//! Problem-spec parsing, command dispatch and result documents for the
//! `atypical` binary.

pub mod doc;
pub mod run;
pub mod spec;

pub use doc::{render, Format};
pub use run::{run_command, CliError, Command, DATA_DIR_VAR};
pub use spec::{ProblemSpec, Setting, SpecError, SpecErrors};
