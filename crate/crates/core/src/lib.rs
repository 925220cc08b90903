//! Sublinear expectations of one-dimensional G-diffusions.
//!
//! The crate computes `Ê[f(X_t^x)]` for `dX = b dt + h d⟨B⟩ + σ dB` driven by a
//! G-Brownian motion with variance interval `[σ_lo², σ_hi²]`, through a
//! monotone explicit scheme for the associated fully nonlinear PDE. On top of
//! that it extracts the long-time (invariant) value `λ̄^f`, the time-averaged
//! (ergodic) value `λ^f`, and cross-checks everything with scenario Monte Carlo.

pub mod checks;
pub mod error;
pub mod expr;
pub mod gfunc;
pub mod longtime;
pub mod mc;
pub mod measures;
pub mod model;
pub mod pde;
pub mod quad;

pub use error::{Error, Result};
pub use expr::{parse, Expr};
pub use gfunc::GFunction;
pub use model::{make_builtin, GDiffusionModel};
pub use pde::{Grid1D, PdeSolution, SliceSchedule, SolveOptions};
