//! Simulation, prediction and realization for directionally biased
//! diffusion-limited aggregation and ballistic deposition.

pub mod lattice;
pub mod realize1;
pub mod realize2;
pub mod ballistic;
pub mod circuits;
pub mod oracle;
pub mod simulator;

pub use lattice::{
    pad_figure, parse_figure, read_figure, render_figure, Cell, Direction, DirectionSet, Figure, FigureError, RenderFormat,
};
pub use simulator::{
    parse_script, predict, random_script, run_script, run_script_outcomes, run_trajectory, DiscardReason, Outcome,
    ScriptParseError, SimError, ThrowScript, Trajectory,
};
