use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("table `{0}` already exists")]
    DuplicateTable(String),
    #[error("duplicate column `{column}` in table `{table}`")]
    DuplicateColumn { table: String, column: String },
    #[error("table `{0}` must have at least one column")]
    EmptySchema(String),
    #[error("unknown table `{0}`")]
    UnknownTable(String),
    #[error("unknown column `{0}`")]
    UnknownColumn(String),
    #[error("column reference `{0}` is ambiguous")]
    AmbiguousColumn(String),
    #[error("type mismatch: {0}")]
    TypeMismatch(String),

    #[error("{path}: {cause}")]
    Io {
        path: PathBuf,
        cause: std::io::Error,
    },
    #[error("{path}: {cause}")]
    Csv { path: PathBuf, cause: csv::Error },
    #[error("{path}: header mismatch, expected [{expected}] got [{found}]")]
    HeaderMismatch {
        path: PathBuf,
        expected: String,
        found: String,
    },
    #[error("{path}: row {row}: value `{value}` is not valid for column `{column}`")]
    ValueType {
        path: PathBuf,
        row: usize,
        column: String,
        value: String,
    },
    #[error("corrupt catalog: {0}")]
    Corrupt(String),

    #[error("syntax error at byte {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("unsupported construct: {0}")]
    Unsupported(String),

    #[error("a real index on {table}({columns}) already exists")]
    DuplicateIndex { table: String, columns: String },
    #[error("unknown index `{0}`")]
    UnknownIndex(String),
    #[error("index `{0}` is hypothetical and cannot be probed")]
    HypotheticalProbe(String),
    #[error("predicates do not form a usable prefix of index `{0}`")]
    NonPrefixPredicates(String),
    #[error("plan references hypothetical index `{0}`")]
    HypotheticalInPlan(String),
    #[error("result exceeds the limit of {0} rows")]
    ResultTooLarge(usize),

    #[error("dataset tables already exist")]
    TablesExist,
    #[error("no dataset loaded")]
    DatasetMissing,
    #[error("invalid configuration: {0}")]
    Config(String),

    /// Wraps an error with the query text that caused it. The inner error
    /// is part of the message rather than a separate source.
    #[error("query `{query}`: {inner}")]
    Query { query: String, inner: Box<Error> },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            cause: source,
        }
    }

    pub(crate) fn csv(path: impl Into<PathBuf>, source: csv::Error) -> Self {
        Error::Csv {
            path: path.into(),
            cause: source,
        }
    }

    pub(crate) fn in_query(self, query: &str) -> Self {
        match self {
            e @ Error::Query { .. } => e,
            e => Error::Query {
                query: query.to_string(),
                inner: Box::new(e),
            },
        }
    }

    /// True for errors caused by the query text or its references, as opposed
    /// to configuration or I/O problems.
    pub fn is_query_error(&self) -> bool {
        match self {
            Error::Query { inner, .. } => inner.is_query_error(),
            Error::Io { .. }
            | Error::Csv { .. }
            | Error::HeaderMismatch { .. }
            | Error::ValueType { .. }
            | Error::Corrupt(_)
            | Error::Config(_) => false,
            _ => true,
        }
    }
}
