//! Noise sweeps, scaling benchmarks and their output files.

mod anneal_bench;
mod emit;
mod shor_sweep;
mod stats;

pub use anneal_bench::{
    run_anneal_benchmark, splits, AnnealBenchResult, AnnealBenchSpec, AnnealRow, EmbedSpec,
    LevelSummary, SamplerSpec,
};
pub use emit::{
    from_csv, to_csv, to_dat, to_json, write_anneal_outputs, write_file, write_shor_outputs,
};
pub use shor_sweep::{
    generate_problem, random_semiprime_bits, run_shor_sweep, ShorProblem, ShorProblemRow,
    ShorSweepResult, ShorSweepRow, ShorSweepSpec,
};
pub use stats::{fit_scaling, mean_sem, median, percentile, MeanSem, ScalingFit, ScalingPoint};
