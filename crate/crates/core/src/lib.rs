pub mod arith;
pub mod cli;
pub mod document;
pub mod error;
pub mod experiments;
pub mod fixtures;
pub mod geoheight;
pub mod hodge;
pub mod monodromy;
pub mod motives;
pub mod numeric;
pub mod poly;
pub mod qlinalg;
pub mod report;

pub use error::HeightError;
