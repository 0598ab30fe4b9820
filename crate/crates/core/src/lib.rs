//! Log-domain numerics for transcendental entire functions: maximum and
//! minimum modulus, growth statistics, Baker-type infinite products and the
//! escape dynamics of their Fatou components.
//!
//! Everything is generic over [`scalar::Real`]; the aliases below fix the
//! scalar for the common cases.

pub mod baker;
pub mod config;
pub mod dynamics;
pub mod growth;
pub mod modulus;
pub mod scalar;

pub use f256::f256;

pub type EntireFunction32 = modulus::EntireFunction<f32>;
pub type EntireFunction64 = modulus::EntireFunction<f64>;
pub type EntireFunction256 = modulus::EntireFunction<f256>;
pub type SparseSeries64 = modulus::SparseSeries<f64>;
pub type SparseSeries256 = modulus::SparseSeries<f256>;
pub type BakerProduct64 = modulus::BakerProduct<f64>;
pub type BakerProduct256 = modulus::BakerProduct<f256>;
pub type RadiiTable64 = baker::RadiiTable<f64>;
pub type RadiiTable256 = baker::RadiiTable<f256>;
