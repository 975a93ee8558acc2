//! Command-line front end for `pipedream` and its persistent ν cache.

pub mod app;
pub mod cache;

pub use app::run;
