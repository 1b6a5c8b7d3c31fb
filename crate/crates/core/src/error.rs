use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Every failure the library can report.
///
/// [`Error::code`] gives a stable machine-readable identifier and
/// [`Error::category`] groups errors the way the CLI maps them to exit codes.
#[derive(Debug, Error)]
pub enum Error {
    #[error(
        "{count} tie row(s) present but the base model is 'bt'; use a davidson model or --solve-ties random|remove"
    )]
    TieWithoutDavidson { count: usize },
    #[error("missing column: {0}")]
    MissingColumn(String),
    #[error("covariate '{0}' is constant and cannot be standardized")]
    ConstantCovariate(String),
    #[error("at least two players are required, found {0}")]
    SinglePlayer(usize),
    #[error("contest {row}: player0 and player1 are both '{player}'")]
    SelfContest { row: usize, player: String },
    #[error("contest {0} has no subject but the model needs subject-indexed terms")]
    UnknownSubject(usize),
    #[error("unknown player '{0}'")]
    UnknownPlayer(String),
    #[error("missing covariate '{0}'")]
    MissingCovariate(String),
    #[error("parameter vector has length {found}, layout expects {expected}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("log density is not finite")]
    NonFiniteDensity,
    #[error("log density gradient is not finite")]
    NonFiniteGradient,
    #[error("invalid model specification: {0}")]
    InvalidSpec(String),
    #[error("unknown model token '{token}'; valid tokens: {valid}")]
    UnknownModelToken { token: String, valid: String },

    #[error("invalid sampler configuration: {0}")]
    InvalidConfig(String),
    #[error("no finite initial point found after {0} attempts")]
    NonFiniteInit(usize),
    #[error("{divergent} of {total} post-warmup transitions diverged in chain {chain}")]
    AllDivergent { chain: usize, divergent: usize, total: usize },

    #[error("all draws are identical; statistic undefined")]
    ZeroVariance,
    #[error("at least {needed} draws are required, found {found}")]
    DegenerateDraws { needed: usize, found: usize },
    #[error("at least 5 positive tail values are required, found {0}")]
    TooFewTailSamples(usize),
    #[error("{0} is not provided: it assumes flat priors and point estimates, which do not hold for these models; use waic or loo")]
    UnsupportedCriterion(String),

    #[error("row {row}: result value '{value}' is not one of 0, 1, 2")]
    BadResultValue { row: usize, value: String },
    #[error("row {row}: column '{column}' value '{value}' is not a number")]
    BadNumber { row: usize, column: String, value: String },
    #[error("no contests left after removing ties")]
    EmptyAfterTieRemoval,
    #[error("dataset has no rows")]
    EmptyDataset,
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("archive version {found} is not supported (expected {expected})")]
    VersionMismatch { expected: u32, found: u32 },
    #[error("corrupt archive: {0}")]
    CorruptArchive(String),
    #[error("data fingerprint {found} does not match the fitted data {expected}")]
    DataFingerprintMismatch { expected: String, found: String },
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

/// Coarse grouping used for process exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorCategory {
    Usage,
    Data,
    Sampler,
    Archive,
}

impl ErrorCategory {
    /// Process exit status used by the command-line tool.
    pub fn exit_code(self) -> u8 {
        match self {
            ErrorCategory::Usage => 1,
            ErrorCategory::Data => 2,
            ErrorCategory::Sampler => 3,
            ErrorCategory::Archive => 4,
        }
    }
}

impl Error {
    pub fn code(&self) -> &'static str {
        match self {
            Error::TieWithoutDavidson { .. } => "TieWithoutDavidson",
            Error::MissingColumn(_) => "MissingColumn",
            Error::ConstantCovariate(_) => "ConstantCovariate",
            Error::SinglePlayer(_) => "SinglePlayer",
            Error::SelfContest { .. } => "SelfContest",
            Error::UnknownSubject(_) => "UnknownSubject",
            Error::UnknownPlayer(_) => "UnknownPlayer",
            Error::MissingCovariate(_) => "MissingCovariate",
            Error::DimensionMismatch { .. } => "DimensionMismatch",
            Error::NonFiniteDensity => "NonFiniteDensity",
            Error::NonFiniteGradient => "NonFiniteGradient",
            Error::InvalidSpec(_) => "InvalidSpec",
            Error::UnknownModelToken { .. } => "UnknownModelToken",
            Error::InvalidConfig(_) => "InvalidConfig",
            Error::NonFiniteInit(_) => "NonFiniteInit",
            Error::AllDivergent { .. } => "AllDivergent",
            Error::ZeroVariance => "ZeroVariance",
            Error::DegenerateDraws { .. } => "DegenerateDraws",
            Error::TooFewTailSamples(_) => "TooFewTailSamples",
            Error::UnsupportedCriterion(_) => "UnsupportedCriterion",
            Error::BadResultValue { .. } => "BadResultValue",
            Error::BadNumber { .. } => "BadNumber",
            Error::EmptyAfterTieRemoval => "EmptyAfterTieRemoval",
            Error::EmptyDataset => "EmptyDataset",
            Error::Csv(_) => "Csv",
            Error::VersionMismatch { .. } => "VersionMismatch",
            Error::CorruptArchive(_) => "CorruptArchive",
            Error::DataFingerprintMismatch { .. } => "DataFingerprintMismatch",
            Error::Io(_) => "Io",
        }
    }

    pub fn category(&self) -> ErrorCategory {
        match self {
            Error::UnknownModelToken { .. }
            | Error::InvalidConfig(_)
            | Error::InvalidSpec(_)
            | Error::UnsupportedCriterion(_) => ErrorCategory::Usage,
            Error::NonFiniteInit(_)
            | Error::AllDivergent { .. }
            | Error::NonFiniteDensity
            | Error::NonFiniteGradient => ErrorCategory::Sampler,
            Error::VersionMismatch { .. } | Error::CorruptArchive(_) | Error::DataFingerprintMismatch { .. } => {
                ErrorCategory::Archive
            }
            _ => ErrorCategory::Data,
        }
    }
}
