//! Reading contest data and persisting fits.

mod archive;
mod ingest;

pub use archive::{load_fit, save_fit, FitArchive, FORMAT_VERSION, MAGIC};
pub use ingest::{load_dataset, IngestSpec, PlayerCovariateSource, ResultSource, TieStrategy};

/// Keeps the error kind but names the file in the message.
fn with_path(e: std::io::Error, path: &std::path::Path) -> crate::Error {
    crate::Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display())))
}
