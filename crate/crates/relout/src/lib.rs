//! Relative outer space of free products with finite vertex groups.

pub mod error;
pub mod fixture;
pub mod candidates;
pub mod freeprod;
pub mod graph;
pub mod group;
pub mod limits;
pub mod lipschitz;
pub mod lp;
pub mod marked_graph;
pub mod minset;
pub mod pf;
pub mod rational;
pub mod traintrack;

pub use error::{Error, Result};
