//! Multiple-subordinated Levy models of asset returns.
//!
//! The crate builds up from base subordinator laws ([`subordinators`])
//! through their compositions ([`compound`]) to unit-increment return
//! distributions of subordinated log-price processes ([`logprice`]), with
//! shared numerical kernels ([`numerics`]), probability weighting functions
//! ([`behavioral`]), empirical-characteristic-function estimation
//! ([`estimation`]) and density-forecast diagnostics ([`diagnostics`]).

pub mod behavioral;
pub mod compound;
pub mod diagnostics;
pub mod error;
pub mod estimation;
pub mod logprice;
pub mod numerics;
pub mod subordinators;

#[doc(hidden)]
pub mod testutil;

pub use error::{Error, Result};
