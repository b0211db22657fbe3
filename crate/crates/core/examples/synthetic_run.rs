//! Fits GCAE on synthetic blobs and prints scores and the loss trajectory.
//!
//! `cargo run --release -p gcae-core --example synthetic_run -- [seed] [bits] [rank]`

use gcae::metrics::evaluate;
use gcae::{run_gcae, Hyperparameters, SynthParams};

fn main() -> gcae::Result<()> {
    let args: Vec<u64> = std::env::args().skip(1).map(|a| a.parse().expect("integer argument")).collect();
    let seed = args.first().copied().unwrap_or(0);
    let ds = gcae::data::synth_multiview(&SynthParams {
        n_samples: 500,
        n_clusters: 5,
        dims: vec![20, 30, 25],
        separation: 8.0,
        noise: 1.0,
        seed,
    })?;
    let hyper = Hyperparameters {
        clusters: 5,
        bits: args.get(1).copied().unwrap_or(32) as usize,
        rank: args.get(2).copied().unwrap_or(20) as usize,
        outer_iter: 20,
        seed,
        ..Hyperparameters::default()
    };
    let fit = run_gcae(&ds, &hyper)?;
    let scores = evaluate(ds.labels().expect("synthetic labels"), fit.labels())?;
    for (name, value) in scores.entries() {
        println!("{name}={value:.4}");
    }
    for (i, l) in fit.trajectory.iter().enumerate() {
        println!("{i}\t{:.6e}\t{:.4e}\t{:.4e}\t{:.4e}", l.total(), l.graph, l.autoencoder, l.cluster);
    }
    println!("p={:?} eta={:?} seconds={:.2}", fit.state.p, fit.eta, fit.seconds);
    Ok(())
}
