//! Price-series ingestion, normalization, RoI extraction, and rolling
//! training windows.

mod normalize;
mod series;
mod window;

pub use normalize::{denormalize, normalize, NormalizedSeries, Scaler};
pub use series::{ingest_csv, PriceSeries};
pub use window::{
    roi_extract, rolling_windows, write_samples_csv, DecayScheme, RollingWindowSample,
};
