//! Heat kernel estimates for Lévy processes whose jump density is comparable
//! to an isotropic unimodal profile.

pub mod bound;
pub mod characteristics;
pub mod cli;
pub mod conditions;
pub mod density;
pub mod error;
pub mod harness;
pub mod model;
pub mod quad;
pub mod roots;
pub mod sampler;
pub mod special;

pub use error::{LevyError, Result};
pub use model::{LevyModel, UnimodalProfile};
