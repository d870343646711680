//! Moudafi's iteration for zeros of `T - S` with `T`, `S` maximally monotone,
//! together with exact quantitative moduli (rates of metastability, Cauchy
//! moduli under regularity) and empirical certification of the inequalities
//! behind them on closed-form problems in R^d.

pub mod cli;
pub mod error;
pub mod iteration;
pub mod moduli;
pub mod operators;
pub mod regularity;
pub mod verification;

pub use error::{Error, Result};
