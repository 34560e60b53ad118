use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),

    #[error("site {site} out of range for lattice with {site_count} sites")]
    InvalidSite { site: usize, site_count: usize },

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("contract violation: {0}")]
    ContractViolation(String),

    #[error("lattice with {site_count} sites exceeds the enumeration bound of {limit}")]
    TooLarge { site_count: usize, limit: usize },
}
