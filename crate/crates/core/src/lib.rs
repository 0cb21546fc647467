//! Rho-functions and strongly quasi-invariant measures on double coset spaces
//! `K\G/H`, with numerical verification of their defining identities on a
//! catalog of finite and coordinate-charted groups.

pub mod error;
pub mod function;
pub mod group;
pub mod haar;
pub mod integrate;
pub mod subgroup;
pub mod coset;
pub mod averaging;
pub mod rho;
pub mod measure;
pub mod harness;

pub use error::{Error, Result};
pub use function::{Support, TestFunction};
pub use group::{ChartLaw, Element, FiniteGroup, Group, Region};
pub use integrate::{Estimate, IntegrationScheme};
