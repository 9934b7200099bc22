//! Optimal linear fusion: closed-form amplitudes for fixed directions, the
//! two-agent moment-based solver, and a direct empirical minimizer.

pub mod amplitude;
pub mod linalg;
pub mod linear_fit;
pub mod moments;
pub mod prop4;
pub mod simplex;

pub use amplitude::{amplitude_solution, objective_from_moments, stationarity_gradient, AmplitudeSolution, DirectionMoments};
pub use moments::{estimate_moments, MomentSet};
pub use prop4::{solve_prop4, solve_prop4_with, Prop4Form, Prop4Solution};
pub use linear_fit::{fit_linear_empirical, Evaluation, LinearFit, LinearProblem};
