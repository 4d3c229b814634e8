//! Sequential placement algorithms.

mod epitaxial;
mod ls;

pub use epitaxial::{epitaxial_place, epitaxial_place_traced, EpitaxialStep};
pub use ls::{ls_run, ls_run_observed, LsParams};
