pub mod cli;
pub mod error;
pub(crate) mod fft;
pub mod hsdiag;
pub mod microlocal;
pub mod noise;
pub mod probab;
pub mod sobolev;
pub mod spectra;

pub use error::{Error, Result};
