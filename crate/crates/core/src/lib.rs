//! Optimal investment for an exponential-utility investor holding two
//! defaultable names whose default times follow a Gumbel survival copula,
//! with contagion jumps on the survivor at the first default.

pub mod cli;
pub mod copula;
pub mod error;
pub mod linalg;
pub mod market;
pub mod optimizer;
pub mod quadrature;
pub mod recursion;
pub mod verify;

pub use copula::{Alpha1Formula, GumbelParams, Name};
pub use error::{Error, Result};
pub use market::{Constraints, Interval, MarketInputs, MarketParams};
pub use recursion::{Cascade, Model, TimeGrid};
pub use verify::{SimConfig, SimReport, Strategy};
