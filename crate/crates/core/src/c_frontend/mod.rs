//! C front end: preprocessing, fragment extraction, dependency graph
//! construction and translation ordering.

pub mod clex;
pub mod fragments;
pub mod order;
pub mod preprocess;

use thiserror::Error;

pub use fragments::{extract_fragments, extract_fragments_unchecked, CodeFragment, FragmentKind};
pub use order::{build_graph, compute_translation_order, CyclePolicy, DependencyGraph, TranslationPlan};
pub use preprocess::{preprocess, preprocess_file, preprocess_text, CompileContext};

#[derive(Debug, Error)]
pub enum FrontendError {
    #[error("cannot locate non-system header \"{include}\" included from {from}")]
    MissingHeader { include: String, from: std::path::PathBuf },
    #[error("host preprocessor failed:\n{diagnostics}")]
    PreprocessorFailure { diagnostics: String },
    #[error("C source does not parse:\n{diagnostics}")]
    ParseError { diagnostics: String },
    #[error("unsupported construct in {name}: {reason}")]
    UnsupportedConstruct { name: String, reason: String },
    #[error("duplicate fragment name {name}")]
    DuplicateName { name: String },
    #[error("circular dependency between fragments: {members:?}")]
    CircularDependency { members: Vec<String> },
    #[error("required tool {tool} is unavailable: {hint}")]
    ToolMissing { tool: String, hint: String },
    #[error("i/o error on {context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },
}
