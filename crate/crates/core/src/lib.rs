//! Digital nets over GF(2) with exact t-values, the Walsh figure of merit
//! (WAFOM), WAFOM-guided random linear scrambling, and a Genz test-function
//! benchmark harness.
//!
//! The typical pipeline: build a net ([`sobol::build_sobol`] or
//! [`net::DigitalNet::load`]), score it ([`quality::quality_report`]), search
//! scramblings that keep its t-value and lower its WAFOM
//! ([`search::scramble_search`]), then compare integration errors
//! ([`genz::run_bench`]).

pub mod dd;
pub mod error;
pub mod genz;
pub mod gf2;
pub mod net;
pub mod quality;
pub mod rng;
pub mod search;
pub mod sobol;
mod textfmt;

pub use error::{Error, Result};
pub use gf2::Gf2Matrix;
pub use net::{interlace, DigitalNet, PointBits, ScrambleSet};
pub use quality::{quality_report, t_value, wafom, wafom_dual_oracle, wafom_fast, QualityReport, WafomTables};
pub use rng::RandomStream;
pub use search::{naive_column_search, scramble_search, Objective, SearchConfig, SearchResult};
pub use sobol::{build_sobol, bundled_direction_numbers, load_direction_numbers, DirectionEntry};
