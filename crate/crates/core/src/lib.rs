//! Randomized coordinate gradient descent as a random dynamical system.
//!
//! The iteration `x_{t+1} = x_t - alpha_t partial_i f(x_t) e_i`, with
//! coordinate and stepsize drawn fresh each step, defines a random
//! dynamical system whose behavior near critical points is governed by
//! the Lyapunov spectrum of the linearized step products. This crate
//! provides:
//!
//! - [`objective`]: objective functions with exact per-coordinate
//!   partials and global curvature bounds;
//! - [`sample_path`]: counter-based, O(1)-shiftable draw sequences that
//!   make replay and composition identities exact;
//! - [`descent`]: the iteration itself, trajectory recording, and
//!   export;
//! - [`cocycle`]: linearized step products, Lyapunov spectrum
//!   estimation, and projectors onto the expanding subspace;
//! - [`certificate`]: quantitative saddle-escape certificates (decay
//!   constants, block lengths, amplification factors) with every
//!   inequality re-checkable after the fact;
//! - [`harness`]: Monte Carlo experiment drivers (escape sampling,
//!   limit classification, window statistics, decay/growth
//!   verification).

pub mod certificate;
pub mod cocycle;
pub mod descent;
pub mod error;
pub mod harness;
pub mod linalg;
pub mod objective;
pub mod sample_path;

pub use error::{Error, Result};
