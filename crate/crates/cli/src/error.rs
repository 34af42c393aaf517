use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("invalid request: {0}")]
    Invalid(String),
    #[error("{context}: {source}")]
    Numerical {
        context: String,
        #[source]
        source: liesys_core::Error,
    },
    #[error("cannot create {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("cannot write {}: {source}", path.display())]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
}

impl HarnessError {
    pub(crate) fn numerical(context: impl Into<String>) -> impl FnOnce(liesys_core::Error) -> Self {
        let context = context.into();
        move |source| HarnessError::Numerical { context, source }
    }
}
