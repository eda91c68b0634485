//! Classical dynamics in the duplicated phase space and the boundary-value problem.

mod bvp;
mod flow;
pub mod ode;
pub mod seeds;

pub use bvp::{enumerate_trajectories, solve_bvp, BvpOptions};
pub use flow::{
    eom_rhs, integrate_trajectory, integrate_with, metric_derivative, stability_blocks, EomField, EomRhs, Payload,
    Quadratures, StabilityBlocks, TangentState, Trajectory, TrajectoryDiagnostics,
};
pub(crate) use flow::b_second_form;
pub use seeds::{Cloud, Combined, Conjugate, Grid, SeedContext, SeedParams, SeedRegistry, SeedStrategy};
