//! Synthetic drifting streams and CSV ingestion.

pub mod csv;
pub mod hyperplane;
pub mod sea;

pub use self::csv::{load_csv, scan_csv, write_csv, CsvShape, CsvSource};
pub use hyperplane::{gen_hyperplane, Hyperplane, HyperplaneConfig, HyperplaneStream};
pub use sea::{gen_sea, natural_minority_share, sea_label, SeaConfig, SeaStream, SEA_FEATURES};
