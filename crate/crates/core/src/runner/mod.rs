//! Configuration-driven experiment runner behind the `relclock` binary.

pub mod commands;
pub mod config;

pub use commands::{
    bench_rows, cmd_clock_bench, cmd_compare, cmd_evolve, cmd_sweep, compare_trajectories, exit_code, prepare, run,
    sweep_rows, DistanceRow,
};
pub use config::{read_json, BenchConfig, Rho0Source, RunConfig, SweepConfig};
