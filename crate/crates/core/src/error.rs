use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Errors raised across the solver stack.
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("gradient blow-up at t = {t} near x = {x}")]
    BlowUp { t: f64, x: f64 },

    #[error("query x = {x} outside the fan span [{lo}, {hi}] at t = {t}")]
    Extrapolation { t: f64, x: f64, lo: f64, hi: f64 },

    #[error("shock position left the fan span at t = {t}")]
    Span { t: f64 },

    #[error("query at t = {t} beyond path validity (valid until {valid_until})")]
    Validity { t: f64, valid_until: f64 },

    #[error("spectral margin violated: Re(lambda) = {re_lambda} <= sup b = {sup_b}")]
    SpectralMargin { re_lambda: f64, sup_b: f64 },

    #[error("transport coefficient vanishes near x = {x}")]
    Ellipticity { x: f64 },

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("decay fit failed: {0}")]
    Fit(String),

    #[error("finite-volume instability at step {step} (t = {t}, cell {cell})")]
    Instability { step: usize, t: f64, cell: usize },

    #[error("window mismatch: {0}")]
    Window(String),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("{stage}: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn at_stage(self, stage: &'static str) -> Error {
        Error::Stage {
            stage,
            source: Box::new(self),
        }
    }

    /// Strips stage wrappers.
    pub fn root(&self) -> &Error {
        match self {
            Error::Stage { source, .. } => source.root(),
            other => other,
        }
    }
}

pub(crate) trait StageExt<T> {
    fn stage(self, stage: &'static str) -> Result<T>;
}

impl<T> StageExt<T> for Result<T> {
    fn stage(self, stage: &'static str) -> Result<T> {
        self.map_err(|e| e.at_stage(stage))
    }
}
