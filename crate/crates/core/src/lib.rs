//! Gaussian prime ideals, Hecke angles and number-variance experiments in
//! narrow sectors, plus the real quadratic analogue over `Q(sqrt 2)`.
//!
//! The numerical types are generic over [`numeric::Real`]; the aliases below
//! fix the scalar to `f64`, which is what the command line tool uses.

// `!(x >= lo)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod experiment;
pub mod hecke;
pub mod ideals;
pub mod numeric;
pub mod realquad;
pub mod report;
pub mod sectors;
pub mod smoothed;
pub mod window;

pub use error::{Error, Result};

pub type PrimeIdeal = ideals::GaussianPrimeIdeal<f64>;
pub type Lambda = ideals::LambdaEntry<f64>;
pub type Window = window::SmoothWindow<f64>;
pub type Window32 = window::SmoothWindow<f32>;
pub type CharacterTable = hecke::CharacterSumTable<f64>;
pub type Sectors = sectors::SectorIndex<f64>;
pub type Smoothed = smoothed::SmoothedCount<f64>;
pub type Spectrum = smoothed::PsiSpectrum<f64>;
pub type RealPrimeIdeal = realquad::RealQuadPrimeIdeal<f64>;
