//! The base field K = F_q((t)): residue field arithmetic and truncated
//! Laurent series with tracked valuation and absolute precision.

pub mod fq;
pub mod series;

pub use fq::{FqCtx, FqElement};
pub use series::{random_series, LaurentSeries, SeriesCtx, EXACT};
