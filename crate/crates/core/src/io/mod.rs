//! Configuration, time series, snapshots and plot scripts.

pub mod config;
pub mod plots;
pub mod series;
pub mod snapshot;

pub use config::RunConfig;
pub use series::{read_series, write_series};
pub use snapshot::{read_snapshot, write_snapshot, Snapshot};
