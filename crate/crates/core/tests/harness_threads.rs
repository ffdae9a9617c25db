//! Sweep and benchmark results do not depend on the worker count.

use qfactor_core::harness::{
    run_anneal_benchmark, run_shor_sweep, to_csv, AnnealBenchSpec, ShorSweepSpec,
};

fn pool(threads: usize) -> rayon::ThreadPool {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .unwrap()
}

#[test]
fn shor_sweep_thread_invariant() {
    let spec = ShorSweepSpec {
        bit_length: 8,
        deltas: vec![0.0, 0.6],
        problems_per_delta: 6,
        shots_per_problem: 8,
        seed: 11,
        ..Default::default()
    };
    let one = pool(1).install(|| run_shor_sweep(&spec)).unwrap();
    let three = pool(3).install(|| run_shor_sweep(&spec)).unwrap();
    assert_eq!(
        to_csv(&one.problems).unwrap(),
        to_csv(&three.problems).unwrap()
    );
    assert_eq!(one, three);
}

#[test]
fn anneal_bench_thread_invariant() {
    let spec = AnnealBenchSpec {
        l_values: vec![2, 4],
        semiprimes_per_l: 3,
        reads_per_problem: 50,
        seed: 5,
        ..Default::default()
    };
    let one = pool(1).install(|| run_anneal_benchmark(&spec)).unwrap();
    let four = pool(4).install(|| run_anneal_benchmark(&spec)).unwrap();
    assert_eq!(one, four);
}
