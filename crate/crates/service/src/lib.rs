//! HTTP service, CLI plumbing and simulated study on top of `oerec-core`.

pub mod cli;
pub mod config;
pub mod error;
pub mod http;
pub mod service;
pub mod study;

pub use config::Config;
pub use error::{ApiError, ApiResult, ErrorCode};
pub use service::Service;
