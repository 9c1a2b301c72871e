//! Minimal end-to-end run: one problem, one embedding, one strength.

use chainbench::bench::GROUND_TOL;
use chainbench::decode::{decode_sample_set, ChainLayout, Strategy};
use chainbench::{
    brute_force_solve, clique_embed, embed_model, generate_suite, sample, AnnealSchedule,
    ChimeraGraph, NoiseConfig, SuiteConfig,
};

fn main() -> chainbench::Result<()> {
    let model = generate_suite(&SuiteConfig::new(2, 42), 1)?.pop().unwrap();
    let ground = brute_force_solve(&model)?;

    let graph = ChimeraGraph::new(16, 16, 4)?;
    let embedding = clique_embed(model.n(), &graph)?;
    let embedded = embed_model(&model, &embedding, -1.0)?;

    let samples = sample(
        &embedded,
        500,
        &AnnealSchedule::default_for(embedded.qubit_count()),
        &NoiseConfig::default(),
        7,
    )?;

    let layout = ChainLayout::new(&embedding)?;
    let decoded = decode_sample_set(&samples.samples, &layout, Strategy::Majority, None)?;
    let hits = decoded
        .samples
        .iter()
        .filter_map(|s| s.logical.as_ref())
        .filter(|s| ground.matches_energy(model.energy(s).unwrap(), GROUND_TOL))
        .count();
    let broken = decoded.samples.iter().filter(|s| s.broken_chains > 0).count();

    println!(
        "n={} on {} qubits, k=-1: {} of {} samples hit the ground state, {} had broken chains",
        model.n(),
        embedded.qubit_count(),
        hits,
        decoded.samples.len(),
        broken
    );
    Ok(())
}
