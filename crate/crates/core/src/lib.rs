//! Link-level Monte-Carlo simulator and detector library for sparse-activity
//! multiuser uplinks (mMTC).
//!
//! The library covers the full receive chain for a grant-free uplink in which
//! `N` devices are sporadically active over `M` receive dimensions:
//!
//! - [`sysmodel`] — augmented-alphabet constellation, sparse activity, flat
//!   Rayleigh channel, noise and imperfect CSI generation.
//! - [`adaptive`] — the l0-regularized RLS decision-feedback filter bank with
//!   LSE-based detection ordering.
//! - [`listdetect`] — shadow-area reliability test and constellation-list
//!   branch machinery, composed into the AA-CL-DF detector family.
//! - [`baselines`] — LMMSE, oracle LMMSE, SA-SIC and AA-MF-SIC references.
//! - [`coding`] — regular LDPC construction, systematic encoding and
//!   sum-product decoding.
//! - [`idd`] — activity-aware priors, Gaussian-approximation LLRs and the
//!   outer iterative detection-and-decoding loop.
//! - [`harness`] — seeded Monte-Carlo trial engine with SER/NSER/BER metrics,
//!   complex-multiplication counters and CSV output.

pub mod adaptive;
pub mod baselines;
pub mod coding;
pub mod counter;
pub mod error;
pub mod harness;
pub mod idd;
pub mod linalg;
pub mod listdetect;
pub mod rng;
pub mod sysmodel;

pub use counter::OpCounter;
pub use error::{ConfigError, NumericalError};
pub use linalg::{CMat, Complex64};
