//! Benchmarking toolkit for chain breaks in embedded Ising models.
//!
//! The pipeline mirrors a hardware annealing workflow end to end, with a
//! classical simulated-annealing sampler standing in for the hardware:
//! generate portfolio-selection problems ([`portfolio`]), embed them as
//! clique minors on a Chimera graph ([`chimera`], [`embedding`]), anneal the
//! physical model ([`sampler`]), decode broken chains back to logical states
//! ([`decode`]), and score success and break rates across a chain-strength
//! sweep ([`bench`]). All randomness flows from explicit seeds, so every
//! result is reproducible independent of thread count.

pub mod bench;
pub mod chimera;
pub mod decode;
pub mod embedding;
pub mod error;
pub mod io;
pub mod ising;
pub mod portfolio;
pub mod rng;
pub mod sampler;

pub use bench::{run_sweep, run_sweep_checkpointed, SuiteProblem, SweepConfig, SweepOutcome};
pub use chimera::{ChimeraGraph, Shore};
pub use decode::{ChainLayout, FaultProfile, Strategy};
pub use embedding::{clique_embed, embed_model, validate_embedding, EmbeddedModel, Embedding};
pub use error::{Error, Result};
pub use ising::{brute_force_solve, GroundStateReport, IsingModel, Qubo, SpinVector};
pub use portfolio::{generate_suite, SuiteConfig};
pub use sampler::{sample, AnnealSchedule, NoiseConfig, PhysicalSampleSet};
