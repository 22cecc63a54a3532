pub mod analysis;
pub mod augment;
pub mod dataset;
pub mod dtw;
pub mod error;
pub mod interp;
pub mod mixing;
pub mod rng;
pub mod series;
pub mod transforms;

pub use error::{Error, Result, Warning};
pub use series::TimeSeries;
