use thiserror::Error;

use crate::checkpoint::CheckpointError;
use crate::distribute::DistributeError;
use crate::element::ElementError;
use crate::harness::HarnessError;
use crate::plex::{NumberingError, PlexError};
use crate::section::SectionError;
use crate::starforest::SfError;

/// Any error raised by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Sf(#[from] SfError),
    #[error(transparent)]
    Plex(#[from] PlexError),
    #[error(transparent)]
    Numbering(#[from] NumberingError),
    #[error(transparent)]
    Distribute(#[from] DistributeError),
    #[error(transparent)]
    Section(#[from] SectionError),
    #[error(transparent)]
    Element(#[from] ElementError),
    #[error(transparent)]
    Checkpoint(#[from] CheckpointError),
    #[error(transparent)]
    Harness(#[from] HarnessError),
}

/// Coarse error classes, each with its own process exit code.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ErrorClass {
    Usage,
    Io,
    Format,
    Missing,
    Mismatch,
    Topology,
    Internal,
}

impl ErrorClass {
    pub fn exit_code(self) -> i32 {
        match self {
            ErrorClass::Usage => 2,
            ErrorClass::Io => 3,
            ErrorClass::Format => 4,
            ErrorClass::Missing => 5,
            ErrorClass::Mismatch => 6,
            ErrorClass::Topology => 7,
            ErrorClass::Internal => 70,
        }
    }
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        use CheckpointError as C;
        match self {
            Error::Checkpoint(C::Io(_)) => ErrorClass::Io,
            Error::Checkpoint(C::VersionMismatch { .. } | C::DtypeMismatch { .. }) => ErrorClass::Format,
            Error::Checkpoint(C::MissingDataset { .. }) => ErrorClass::Missing,
            Error::Checkpoint(C::SizeMismatch { .. } | C::ElementMismatch { .. } | C::RankCountMismatch { .. }) => {
                ErrorClass::Mismatch
            }
            Error::Checkpoint(
                C::DuplicateMeshName { .. }
                | C::DuplicateSpaceName { .. }
                | C::DuplicateDataset { .. }
                | C::BadName { .. },
            ) => ErrorClass::Usage,
            Error::Checkpoint(C::Distribute(_) | C::Numbering(_))
            | Error::Distribute(_)
            | Error::Plex(_)
            | Error::Numbering(_) => ErrorClass::Topology,
            Error::Harness(h) => h.class(),
            Error::Element(ElementError::UnsupportedElement { .. }) => ErrorClass::Usage,
            _ => ErrorClass::Internal,
        }
    }

    pub fn exit_code(&self) -> i32 {
        self.class().exit_code()
    }
}
