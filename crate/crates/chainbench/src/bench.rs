//! Success/break metrics and the chain-strength sweep harness.
//!
//! A sweep runs every (problem size, chain strength) cell: anneal each
//! problem, tally a pooled fault profile per cell, decode with each strategy,
//! and average the per-problem metrics. Cell results checkpoint to disk so an
//! interrupted sweep resumes instead of recomputing.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::chimera::ChimeraGraph;
use crate::decode::{
    decode_readouts, read_chains, ChainLayout, ChainReadout, DecodedSampleSet, FaultCounts,
    FaultProfile, Strategy,
};
use crate::embedding::{clique_embed, embed_model, Embedding};
use crate::error::{Error, Result};
use crate::ising::{brute_force_solve, GroundStateReport, IsingModel};
use crate::rng::derive_seed;
use crate::sampler::{sample, AnnealSchedule, NoiseConfig};
use crate::{io, rng};

/// Decoded energies within this tolerance of the ground energy count as hits.
pub const GROUND_TOL: f64 = 1e-9;

const SWEEP_STREAM: u64 = 0x5357_4550;

/// Per-problem sample statistics: success rate, break rate, mean break ratio.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProblemMetrics {
    pub p_s: f64,
    pub p_b: f64,
    pub r_b: f64,
    pub n_samples: usize,
}

/// Scores one decoded sample set against the exact ground truth. Discarded
/// samples count as misses but stay in the denominator.
pub fn problem_metrics(
    decoded: &DecodedSampleSet,
    logical: &IsingModel,
    ground: &GroundStateReport,
) -> Result<ProblemMetrics> {
    if decoded.samples.is_empty() {
        return Err(Error::EmptySamples);
    }
    if decoded.chain_count == 0 {
        return Err(Error::InvalidConfig("decoded set has no chains".into()));
    }
    let n = decoded.samples.len() as f64;
    let mut hits = 0usize;
    let mut broken = 0usize;
    let mut ratio_sum = 0.0;
    for s in &decoded.samples {
        if let Some(state) = &s.logical {
            if ground.matches_energy(logical.energy(state)?, GROUND_TOL) {
                hits += 1;
            }
        }
        if s.broken_chains > 0 {
            broken += 1;
        }
        ratio_sum += s.broken_chains as f64 / decoded.chain_count as f64;
    }
    Ok(ProblemMetrics {
        p_s: hits as f64 / n,
        p_b: broken as f64 / n,
        r_b: ratio_sum / n,
        n_samples: decoded.samples.len(),
    })
}

/// Unweighted mean over problems.
pub fn mean(values: &[f64]) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::EmptyProblems);
    }
    Ok(values.iter().sum::<f64>() / values.len() as f64)
}

/// One problem instance entering a sweep. `index` feeds seed derivation, so
/// (n, index) pairs must be unique.
#[derive(Debug, Clone)]
pub struct SuiteProblem {
    pub index: usize,
    pub model: IsingModel,
    pub ground: Option<GroundStateReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub k_values: Vec<f64>,
    pub strategies: Vec<Strategy>,
    pub samples_per_problem: usize,
    pub seed: u64,
    pub beta_start: f64,
    pub beta_end: f64,
    /// Total sweeps per anneal; `None` means 100 per physical qubit.
    pub sweeps: Option<usize>,
    pub restarts: usize,
    pub flip_probability: f64,
    /// Chimera grid as (rows, cols, shore).
    pub graph: (usize, usize, usize),
}

impl SweepConfig {
    /// Desk-scale defaults: the full strength ladder, all strategies,
    /// 500 samples per problem on a 16x16 shore-4 graph.
    pub fn new(seed: u64) -> Self {
        SweepConfig {
            k_values: vec![0.0, -0.25, -0.5, -1.0, -1.5, -2.0],
            strategies: vec![Strategy::Discard, Strategy::Majority, Strategy::Weighted],
            samples_per_problem: 500,
            seed,
            beta_start: 0.1,
            beta_end: 10.0,
            sweeps: None,
            restarts: 1,
            flip_probability: 0.0,
            graph: (16, 16, 4),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.k_values.is_empty() {
            return Err(Error::InvalidConfig("no chain strengths to sweep".into()));
        }
        for (i, a) in self.k_values.iter().enumerate() {
            if !a.is_finite() {
                return Err(Error::InvalidConfig(format!("chain strength {a} is not finite")));
            }
            if self.k_values[..i].contains(a) {
                return Err(Error::InvalidConfig(format!("duplicate chain strength {a}")));
            }
        }
        if self.strategies.is_empty() {
            return Err(Error::InvalidConfig("no decoding strategies selected".into()));
        }
        if self.samples_per_problem == 0 {
            return Err(Error::InvalidConfig("samples_per_problem must be positive".into()));
        }
        self.noise().validate()?;
        self.schedule_for(1)?.validate()
    }

    pub fn noise(&self) -> NoiseConfig {
        NoiseConfig {
            flip_probability: self.flip_probability,
        }
    }

    pub fn schedule_for(&self, n_qubits: usize) -> Result<AnnealSchedule> {
        AnnealSchedule::geometric(
            self.beta_start,
            self.beta_end,
            self.sweeps.unwrap_or(100 * n_qubits.max(1)),
            self.restarts,
        )
    }
}

/// One row of sweep.csv.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub n: usize,
    pub k: f64,
    pub strategy: Strategy,
    pub p_s: f64,
    pub p_b: f64,
    pub r_b: f64,
    pub n_problems: usize,
    pub n_samples: usize,
}

/// Pooled fault profile of one (n, k) cell.
#[derive(Debug, Clone, PartialEq)]
pub struct CellProfile {
    pub n: usize,
    pub k: f64,
    pub profile: FaultProfile,
}

/// A problem dropped from the sweep, with the reason.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemFailure {
    pub index: usize,
    pub n: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepOutcome {
    pub rows: Vec<SweepRow>,
    pub profiles: Vec<CellProfile>,
    pub failures: Vec<ProblemFailure>,
}

struct ResolvedProblem<'a> {
    index: usize,
    model: &'a IsingModel,
    ground: GroundStateReport,
}

/// Ground truth per problem: trust a supplied report, otherwise solve
/// exhaustively. Unsolvable problems become failures, not errors.
fn resolve_grounds<'a>(
    problems: &'a [SuiteProblem],
    failures: &mut Vec<ProblemFailure>,
) -> Result<BTreeMap<usize, Vec<ResolvedProblem<'a>>>> {
    let mut seen = std::collections::HashSet::new();
    for p in problems {
        if !seen.insert((p.model.n(), p.index)) {
            return Err(Error::InvalidConfig(format!(
                "duplicate problem index {} for size {}",
                p.index,
                p.model.n()
            )));
        }
    }
    let mut resolved: BTreeMap<usize, Vec<ResolvedProblem>> = BTreeMap::new();
    for p in problems {
        let ground = match &p.ground {
            Some(g) => Ok(g.clone()),
            None => brute_force_solve(&p.model),
        };
        match ground {
            Ok(ground) => resolved.entry(p.model.n()).or_default().push(ResolvedProblem {
                index: p.index,
                model: &p.model,
                ground,
            }),
            Err(e) => failures.push(ProblemFailure {
                index: p.index,
                n: p.model.n(),
                message: e.to_string(),
            }),
        }
    }
    Ok(resolved)
}

struct CellResult {
    rows: Vec<SweepRow>,
    profile: FaultProfile,
}

/// Anneals and scores one (n, k) cell.
fn compute_cell(
    probs: &[ResolvedProblem<'_>],
    embedding: &Embedding,
    layout: &ChainLayout,
    n: usize,
    k: f64,
    k_index: usize,
    cfg: &SweepConfig,
) -> Result<CellResult> {
    struct ProblemReadouts {
        readouts: Vec<Vec<ChainReadout>>,
        counts: FaultCounts,
    }

    let lengths = layout.chain_lengths();
    let noise = cfg.noise();
    let per_problem: Vec<ProblemReadouts> = probs
        .par_iter()
        .map(|rp| {
            let embedded = embed_model(rp.model, embedding, k)?;
            let schedule = cfg.schedule_for(embedded.qubit_count())?;
            let seed = derive_seed(
                cfg.seed,
                &[SWEEP_STREAM, n as u64, rp.index as u64, k_index as u64],
            );
            let set = sample(&embedded, cfg.samples_per_problem, &schedule, &noise, seed)?;
            let readouts = set
                .samples
                .iter()
                .map(|s| read_chains(s, layout))
                .collect::<Result<Vec<_>>>()?;
            let mut counts = FaultCounts::new(&lengths);
            for r in &readouts {
                counts.record(r, &rp.ground);
            }
            Ok(ProblemReadouts { readouts, counts })
        })
        .collect::<Result<Vec<_>>>()?;

    let mut pooled = FaultCounts::new(&lengths);
    for pr in &per_problem {
        pooled.merge(&pr.counts)?;
    }
    let profile = pooled.to_profile_or_zero();
    // With no break statistics the weighted vote needs a neutral prior.
    let decode_profile = if pooled.broken_samples() == 0 {
        FaultProfile::uniform(&lengths, 0.5)?
    } else {
        profile.clone()
    };

    let mut rows = Vec::with_capacity(cfg.strategies.len());
    for &strategy in &cfg.strategies {
        let mut ps = Vec::with_capacity(probs.len());
        let mut pb = Vec::with_capacity(probs.len());
        let mut rb = Vec::with_capacity(probs.len());
        for (pr, rp) in per_problem.iter().zip(probs) {
            let samples = pr
                .readouts
                .iter()
                .map(|r| {
                    Ok(crate::decode::DecodedSample {
                        logical: decode_readouts(r, strategy, Some(&decode_profile))?,
                        broken_chains: r.iter().filter(|c| c.broken).count(),
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            let decoded = DecodedSampleSet {
                samples,
                chain_count: layout.chain_count(),
            };
            let m = problem_metrics(&decoded, rp.model, &rp.ground)?;
            ps.push(m.p_s);
            pb.push(m.p_b);
            rb.push(m.r_b);
        }
        rows.push(SweepRow {
            n,
            k,
            strategy,
            p_s: mean(&ps)?,
            p_b: mean(&pb)?,
            r_b: mean(&rb)?,
            n_problems: probs.len(),
            n_samples: probs.len() * cfg.samples_per_problem,
        });
    }
    Ok(CellResult { rows, profile })
}

/// Runs the full sweep in memory.
pub fn run_sweep(problems: &[SuiteProblem], cfg: &SweepConfig) -> Result<SweepOutcome> {
    run_sweep_inner(problems, cfg, None, false)
}

/// Runs the sweep with per-cell checkpoints under `dir`, writing sweep.csv,
/// per-cell heatmap CSVs and a manifest. With `resume`, cells already
/// recorded in a matching manifest are loaded instead of recomputed.
pub fn run_sweep_checkpointed(
    problems: &[SuiteProblem],
    cfg: &SweepConfig,
    dir: &Path,
    resume: bool,
) -> Result<SweepOutcome> {
    run_sweep_inner(problems, cfg, Some(dir), resume)
}

#[derive(Debug, Serialize, Deserialize)]
struct CellCheckpoint {
    fingerprint: String,
    n: usize,
    k_index: usize,
    k: f64,
    rows: Vec<SweepRow>,
    profile: FaultProfile,
    broken_samples: usize,
}

#[derive(Debug, Default, Serialize, Deserialize)]
struct SweepManifest {
    #[serde(default)]
    format_version: u32,
    fingerprint: String,
    config: Option<SweepConfig>,
    completed: Vec<String>,
    finished: bool,
}

fn run_sweep_inner(
    problems: &[SuiteProblem],
    cfg: &SweepConfig,
    dir: Option<&Path>,
    resume: bool,
) -> Result<SweepOutcome> {
    cfg.validate()?;
    if problems.is_empty() {
        return Err(Error::EmptyProblems);
    }
    let graph = ChimeraGraph::new(cfg.graph.0, cfg.graph.1, cfg.graph.2)?;

    let mut failures = Vec::new();
    let resolved = resolve_grounds(problems, &mut failures)?;

    let mut checkpoint = match dir {
        Some(dir) => Some(Checkpointer::open(dir, cfg, problems, resume)?),
        None => None,
    };

    let mut rows = Vec::new();
    let mut profiles = Vec::new();
    for (&n, probs) in &resolved {
        if probs.is_empty() {
            continue;
        }
        let embedding = clique_embed(n, &graph)?;
        let layout = ChainLayout::new(&embedding)?;
        for (k_index, &k) in cfg.k_values.iter().enumerate() {
            let cached = checkpoint
                .as_mut()
                .and_then(|c| c.load_cell(n, k_index, k));
            let cell = match cached {
                Some(cell) => cell,
                None => {
                    let cell = compute_cell(probs, &embedding, &layout, n, k, k_index, cfg)?;
                    if let Some(c) = checkpoint.as_mut() {
                        c.store_cell(n, k_index, k, &cell)?;
                    }
                    cell
                }
            };
            rows.extend(cell.rows.iter().cloned());
            profiles.push(CellProfile {
                n,
                k,
                profile: cell.profile,
            });
        }
    }

    let outcome = SweepOutcome {
        rows,
        profiles,
        failures,
    };
    if let Some(c) = checkpoint.as_mut() {
        c.finalize(&outcome)?;
    }
    Ok(outcome)
}

/// Cell-level checkpoint state for one output directory.
struct Checkpointer {
    dir: PathBuf,
    fingerprint: String,
    manifest: SweepManifest,
}

impl Checkpointer {
    fn open(dir: &Path, cfg: &SweepConfig, problems: &[SuiteProblem], resume: bool) -> Result<Self> {
        fs::create_dir_all(dir)?;
        let fingerprint = fingerprint(cfg, problems);
        let manifest_path = dir.join("manifest.json");
        let manifest = if resume && manifest_path.exists() {
            let loaded: SweepManifest = serde_json::from_str(&fs::read_to_string(&manifest_path)?)?;
            if loaded.fingerprint == fingerprint {
                loaded
            } else {
                SweepManifest::default()
            }
        } else {
            SweepManifest::default()
        };
        let mut this = Checkpointer {
            dir: dir.to_path_buf(),
            fingerprint,
            manifest,
        };
        this.manifest.format_version = io::FORMAT_VERSION;
        this.manifest.fingerprint = this.fingerprint.clone();
        this.manifest.config = Some(cfg.clone());
        this.manifest.finished = false;
        this.write_manifest()?;
        Ok(this)
    }

    fn cell_name(n: usize, k_index: usize) -> String {
        format!("n{n}_ki{k_index}")
    }

    fn cell_path(&self, n: usize, k_index: usize) -> PathBuf {
        self.dir.join(format!("cell_{}.json", Self::cell_name(n, k_index)))
    }

    fn load_cell(&mut self, n: usize, k_index: usize, k: f64) -> Option<CellResult> {
        if !self.manifest.completed.contains(&Self::cell_name(n, k_index)) {
            return None;
        }
        let text = fs::read_to_string(self.cell_path(n, k_index)).ok()?;
        let cp: CellCheckpoint = serde_json::from_str(&text).ok()?;
        if cp.fingerprint != self.fingerprint || cp.n != n || cp.k_index != k_index || cp.k != k {
            return None;
        }
        Some(CellResult {
            rows: cp.rows,
            profile: cp.profile,
        })
    }

    fn store_cell(&mut self, n: usize, k_index: usize, k: f64, cell: &CellResult) -> Result<()> {
        let cp = CellCheckpoint {
            fingerprint: self.fingerprint.clone(),
            n,
            k_index,
            k,
            rows: cell.rows.clone(),
            profile: cell.profile.clone(),
            broken_samples: cell.profile.broken_samples(),
        };
        fs::write(self.cell_path(n, k_index), serde_json::to_string_pretty(&cp)?)?;
        let name = Self::cell_name(n, k_index);
        if !self.manifest.completed.contains(&name) {
            self.manifest.completed.push(name);
        }
        self.write_manifest()
    }

    fn finalize(&mut self, outcome: &SweepOutcome) -> Result<()> {
        io::write_sweep_csv(&self.dir.join("sweep.csv"), &outcome.rows)?;
        for cp in &outcome.profiles {
            let path = self.dir.join(format!("heatmap_n{}_k{}.csv", cp.n, cp.k));
            io::write_profile_csv(&path, &cp.profile)?;
        }
        self.manifest.finished = true;
        self.write_manifest()
    }

    fn write_manifest(&self) -> Result<()> {
        let text = serde_json::to_string_pretty(&self.manifest)?;
        fs::write(self.dir.join("manifest.json"), text)?;
        Ok(())
    }
}

/// Order-sensitive digest of the sweep inputs; guards checkpoint reuse.
fn fingerprint(cfg: &SweepConfig, problems: &[SuiteProblem]) -> String {
    let text = format!("{cfg:?}|{problems:?}");
    let mut state: u64 = 0x5157_4545_5046_5250;
    for chunk in text.as_bytes().chunks(8) {
        let mut word = [0u8; 8];
        word[..chunk.len()].copy_from_slice(chunk);
        state = rng::derive_seed(state, &[u64::from_le_bytes(word), chunk.len() as u64]);
    }
    format!("{state:016x}")
}
