//! Best Sobolev constants for `p = 2` and their extremal profiles: the dilation gauge,
//! gauge-fixed Rayleigh-quotient minimization, and Euler–Lagrange shooting.

mod banded;
mod dilation;
mod minimize;
pub mod ode;
mod problem;
mod residual;
mod shooting;

pub use banded::BandedSpd;
pub use dilation::{dilate, fix_gauge, half_mass_radius, mass_profile, DilationGauge, MassProfile};
pub use minimize::{default_initial, minimize_rayleigh, ExtremalResult, MinimizeOptions, TraceRecord};
pub use problem::{Discretization, TailClosure};
pub use residual::{el_residual, TestBumps, TEST_BUMPS};
pub use shooting::{shoot_el, ShootingResult};
