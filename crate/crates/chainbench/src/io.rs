//! File interchange: problem and embedding JSON, sample/decode/profile CSVs,
//! suite manifests. CSV values are written with plain `Display` formatting so
//! identical inputs always produce byte-identical files.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::bench::{SuiteProblem, SweepRow};
use crate::chimera::ChimeraGraph;
use crate::decode::{DecodedSampleSet, FaultProfile};
use crate::embedding::{EmbeddedModel, Embedding};
use crate::error::{Error, Result};
use crate::ising::{CouplingMap, GroundStateReport, IsingModel, SpinVector};
use crate::sampler::PhysicalSampleSet;

/// Version stamp for the JSON manifests this module writes.
pub const FORMAT_VERSION: u32 = 1;

fn malformed(kind: &'static str, path: &Path, message: impl Into<String>) -> Error {
    Error::Malformed {
        kind,
        path: path.display().to_string(),
        message: message.into(),
    }
}

fn parse_field<T: FromStr>(
    field: &str,
    kind: &'static str,
    path: &Path,
    line: usize,
) -> Result<T> {
    field
        .trim()
        .parse()
        .map_err(|_| malformed(kind, path, format!("line {line}: cannot parse {field:?}")))
}

// ---------------------------------------------------------------------------
// Problem JSON

#[derive(Serialize, Deserialize)]
struct ProblemDoc {
    n: usize,
    h: Vec<f64>,
    j: Vec<(usize, usize, f64)>,
    beta: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    ground: Option<GroundDoc>,
}

#[derive(Serialize, Deserialize)]
struct GroundDoc {
    energy: f64,
    states: Vec<Vec<i8>>,
}

fn problem_doc(model: &IsingModel, ground: Option<&GroundStateReport>) -> ProblemDoc {
    ProblemDoc {
        n: model.n(),
        h: model.h().to_vec(),
        j: model
            .couplings()
            .iter()
            .map(|(&(i, j), &v)| (i, j, v))
            .collect(),
        beta: model.beta(),
        ground: ground.map(|g| GroundDoc {
            energy: g.energy,
            states: g.states.iter().map(|s| s.spins().to_vec()).collect(),
        }),
    }
}

fn problem_from_doc(doc: ProblemDoc, path: &Path) -> Result<(IsingModel, Option<GroundStateReport>)> {
    if doc.h.len() != doc.n {
        return Err(malformed(
            "problem",
            path,
            format!("n = {} but h has {} entries", doc.n, doc.h.len()),
        ));
    }
    let couplings: CouplingMap = doc.j.into_iter().map(|(i, j, v)| ((i, j), v)).collect();
    let model = IsingModel::new(doc.h, couplings, doc.beta)?;
    let ground = doc
        .ground
        .map(|g| -> Result<GroundStateReport> {
            let states = g
                .states
                .into_iter()
                .map(|s| {
                    if s.len() != model.n() {
                        return Err(malformed(
                            "problem",
                            path,
                            "ground state length does not match n",
                        ));
                    }
                    SpinVector::new(s)
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(GroundStateReport {
                energy: g.energy,
                states,
            })
        })
        .transpose()?;
    Ok((model, ground))
}

pub fn write_problem(
    path: &Path,
    model: &IsingModel,
    ground: Option<&GroundStateReport>,
) -> Result<()> {
    let text = serde_json::to_string_pretty(&problem_doc(model, ground))?;
    fs::write(path, text)?;
    Ok(())
}

pub fn read_problem(path: &Path) -> Result<(IsingModel, Option<GroundStateReport>)> {
    let doc: ProblemDoc = serde_json::from_str(&fs::read_to_string(path)?)?;
    problem_from_doc(doc, path)
}

// ---------------------------------------------------------------------------
// Embedding JSON

#[derive(Serialize, Deserialize)]
struct GraphDoc {
    m: usize,
    n: usize,
    l: usize,
}

#[derive(Serialize, Deserialize)]
struct EmbeddingDoc {
    n: usize,
    graph: GraphDoc,
    chains: Vec<Vec<u32>>,
}

fn embedding_doc(embedding: &Embedding) -> EmbeddingDoc {
    let g = embedding.graph();
    EmbeddingDoc {
        n: embedding.chain_count(),
        graph: GraphDoc {
            m: g.rows(),
            n: g.cols(),
            l: g.shore(),
        },
        chains: embedding.chains().to_vec(),
    }
}

fn embedding_from_doc(doc: EmbeddingDoc, path: &Path) -> Result<Embedding> {
    if doc.chains.len() != doc.n {
        return Err(malformed(
            "embedding",
            path,
            format!("n = {} but {} chains listed", doc.n, doc.chains.len()),
        ));
    }
    let graph = ChimeraGraph::new(doc.graph.m, doc.graph.n, doc.graph.l)?;
    Ok(Embedding::new(graph, doc.chains))
}

pub fn write_embedding(path: &Path, embedding: &Embedding) -> Result<()> {
    let text = serde_json::to_string_pretty(&embedding_doc(embedding))?;
    fs::write(path, text)?;
    Ok(())
}

pub fn read_embedding(path: &Path) -> Result<Embedding> {
    let doc: EmbeddingDoc = serde_json::from_str(&fs::read_to_string(path)?)?;
    embedding_from_doc(doc, path)
}

// ---------------------------------------------------------------------------
// Embedded model JSON

#[derive(Serialize, Deserialize)]
struct EmbeddedDoc {
    chain_strength: f64,
    h: Vec<(u32, f64)>,
    inter: Vec<(u32, u32, f64)>,
    intra: Vec<(u32, u32, f64)>,
    embedding: EmbeddingDoc,
    logical: ProblemDoc,
}

pub fn write_embedded(path: &Path, model: &EmbeddedModel) -> Result<()> {
    let doc = EmbeddedDoc {
        chain_strength: model.chain_strength(),
        h: model.physical_h().iter().map(|(&q, &v)| (q, v)).collect(),
        inter: model
            .inter_couplings()
            .iter()
            .map(|(&(a, b), &v)| (a, b, v))
            .collect(),
        intra: model
            .intra_couplings()
            .iter()
            .map(|(&(a, b), &v)| (a, b, v))
            .collect(),
        embedding: embedding_doc(model.embedding()),
        logical: problem_doc(model.logical(), None),
    };
    fs::write(path, serde_json::to_string_pretty(&doc)?)?;
    Ok(())
}

pub fn read_embedded(path: &Path) -> Result<EmbeddedModel> {
    let doc: EmbeddedDoc = serde_json::from_str(&fs::read_to_string(path)?)?;
    let embedding = embedding_from_doc(doc.embedding, path)?;
    let (logical, _) = problem_from_doc(doc.logical, path)?;
    let physical_h: BTreeMap<u32, f64> = doc.h.into_iter().collect();
    let inter: BTreeMap<(u32, u32), f64> =
        doc.inter.into_iter().map(|(a, b, v)| ((a, b), v)).collect();
    let intra: BTreeMap<(u32, u32), f64> =
        doc.intra.into_iter().map(|(a, b, v)| ((a, b), v)).collect();
    Ok(EmbeddedModel::from_parts(
        physical_h,
        inter,
        intra,
        doc.chain_strength,
        embedding,
        logical,
    ))
}

// ---------------------------------------------------------------------------
// Samples CSV + run metadata sidecar

/// Parameters that produced a sample file; stored as a JSON sidecar.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunMeta {
    pub seed: u64,
    pub n_samples: usize,
    pub beta_start: f64,
    pub beta_end: f64,
    pub sweeps: usize,
    pub restarts: usize,
    pub flip_probability: f64,
    pub qubits: Vec<u32>,
}

pub fn write_run_meta(path: &Path, meta: &RunMeta) -> Result<()> {
    fs::write(path, serde_json::to_string_pretty(meta)?)?;
    Ok(())
}

pub fn read_run_meta(path: &Path) -> Result<RunMeta> {
    Ok(serde_json::from_str(&fs::read_to_string(path)?)?)
}

pub fn write_samples_csv(path: &Path, set: &PhysicalSampleSet) -> Result<()> {
    let mut out = String::from("sample");
    for q in &set.qubits {
        write!(out, ",q{q}").unwrap();
    }
    out.push_str(",energy\n");
    for (i, (sample, energy)) in set.samples.iter().zip(&set.energies).enumerate() {
        write!(out, "{i}").unwrap();
        for &s in sample {
            write!(out, ",{s}").unwrap();
        }
        writeln!(out, ",{energy}").unwrap();
    }
    fs::write(path, out)?;
    Ok(())
}

pub fn read_samples_csv(path: &Path) -> Result<PhysicalSampleSet> {
    const KIND: &str = "samples";
    let text = fs::read_to_string(path)?;
    let mut lines = text.lines().enumerate();
    let (_, header) = lines
        .next()
        .ok_or_else(|| malformed(KIND, path, "empty file"))?;
    let columns: Vec<&str> = header.split(',').collect();
    if columns.len() < 3 || columns[0] != "sample" || *columns.last().unwrap() != "energy" {
        return Err(malformed(KIND, path, "expected header sample,q...,energy"));
    }
    let qubits: Vec<u32> = columns[1..columns.len() - 1]
        .iter()
        .map(|c| {
            c.strip_prefix('q')
                .ok_or_else(|| malformed(KIND, path, format!("bad qubit column {c:?}")))
                .and_then(|id| parse_field(id, KIND, path, 1))
        })
        .collect::<Result<_>>()?;

    let mut samples = Vec::new();
    let mut energies = Vec::new();
    for (li, line) in lines {
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != columns.len() {
            return Err(malformed(
                KIND,
                path,
                format!("line {}: expected {} fields, got {}", li + 1, columns.len(), fields.len()),
            ));
        }
        let spins = fields[1..fields.len() - 1]
            .iter()
            .map(|f| {
                let v: i8 = parse_field(f, KIND, path, li + 1)?;
                if v != 1 && v != -1 {
                    return Err(malformed(KIND, path, format!("line {}: {v} is not a spin", li + 1)));
                }
                Ok(v)
            })
            .collect::<Result<Vec<i8>>>()?;
        samples.push(spins);
        energies.push(parse_field(fields[fields.len() - 1], KIND, path, li + 1)?);
    }
    Ok(PhysicalSampleSet {
        qubits,
        samples,
        energies,
    })
}

// ---------------------------------------------------------------------------
// Decoded CSV

/// Rows are `sample,s0..s{n-1},discarded,broken_chains`; discarded samples
/// leave the spin cells empty and set the flag.
pub fn write_decoded_csv(path: &Path, decoded: &DecodedSampleSet) -> Result<()> {
    let mut out = String::from("sample");
    for i in 0..decoded.chain_count {
        write!(out, ",s{i}").unwrap();
    }
    out.push_str(",discarded,broken_chains\n");
    for (i, sample) in decoded.samples.iter().enumerate() {
        write!(out, "{i}").unwrap();
        match &sample.logical {
            Some(state) => {
                for &s in state.spins() {
                    write!(out, ",{s}").unwrap();
                }
                write!(out, ",0").unwrap();
            }
            None => {
                out.push_str(&",".repeat(decoded.chain_count));
                write!(out, ",1").unwrap();
            }
        }
        writeln!(out, ",{}", sample.broken_chains).unwrap();
    }
    fs::write(path, out)?;
    Ok(())
}

// ---------------------------------------------------------------------------
// Fault profile CSV (also the sweep heatmap format)

pub fn write_profile_csv(path: &Path, profile: &FaultProfile) -> Result<()> {
    let mut out = String::from("chain,position,p_hat,n_b\n");
    for (chain, row) in profile.rates().iter().enumerate() {
        for (position, &rate) in row.iter().enumerate() {
            writeln!(out, "{chain},{position},{rate},{}", profile.broken_samples()).unwrap();
        }
    }
    fs::write(path, out)?;
    Ok(())
}

pub fn read_profile_csv(path: &Path) -> Result<FaultProfile> {
    const KIND: &str = "profile";
    let text = fs::read_to_string(path)?;
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, "chain,position,p_hat,n_b")) => {}
        _ => return Err(malformed(KIND, path, "expected header chain,position,p_hat,n_b")),
    }
    let mut rates: Vec<Vec<f64>> = Vec::new();
    let mut broken: Option<usize> = None;
    for (li, line) in lines {
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 4 {
            return Err(malformed(KIND, path, format!("line {}: expected 4 fields", li + 1)));
        }
        let chain: usize = parse_field(fields[0], KIND, path, li + 1)?;
        let position: usize = parse_field(fields[1], KIND, path, li + 1)?;
        let rate: f64 = parse_field(fields[2], KIND, path, li + 1)?;
        let nb: usize = parse_field(fields[3], KIND, path, li + 1)?;
        if chain == rates.len() {
            rates.push(Vec::new());
        }
        if chain >= rates.len() || position != rates[chain].len() {
            return Err(malformed(
                KIND,
                path,
                format!("line {}: rows must be grouped by chain with contiguous positions", li + 1),
            ));
        }
        rates[chain].push(rate);
        match broken {
            None => broken = Some(nb),
            Some(b) if b == nb => {}
            Some(b) => {
                return Err(malformed(
                    KIND,
                    path,
                    format!("line {}: inconsistent n_b ({b} vs {nb})", li + 1),
                ))
            }
        }
    }
    if rates.is_empty() {
        return Err(malformed(KIND, path, "no profile rows"));
    }
    FaultProfile::new(rates, broken.unwrap_or(0))
}

// ---------------------------------------------------------------------------
// Sweep CSV

pub fn write_sweep_csv(path: &Path, rows: &[SweepRow]) -> Result<()> {
    let mut out = String::from("n,k,strategy,p_s,p_b,r_b,n_problems,n_samples\n");
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            r.n, r.k, r.strategy, r.p_s, r.p_b, r.r_b, r.n_problems, r.n_samples
        )
        .unwrap();
    }
    fs::write(path, out)?;
    Ok(())
}

pub fn read_sweep_csv(path: &Path) -> Result<Vec<SweepRow>> {
    const KIND: &str = "sweep";
    let text = fs::read_to_string(path)?;
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, "n,k,strategy,p_s,p_b,r_b,n_problems,n_samples")) => {}
        _ => return Err(malformed(KIND, path, "unexpected header")),
    }
    let mut rows = Vec::new();
    for (li, line) in lines {
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 8 {
            return Err(malformed(KIND, path, format!("line {}: expected 8 fields", li + 1)));
        }
        rows.push(SweepRow {
            n: parse_field(fields[0], KIND, path, li + 1)?,
            k: parse_field(fields[1], KIND, path, li + 1)?,
            strategy: fields[2]
                .parse()
                .map_err(|e: Error| malformed(KIND, path, format!("line {}: {e}", li + 1)))?,
            p_s: parse_field(fields[3], KIND, path, li + 1)?,
            p_b: parse_field(fields[4], KIND, path, li + 1)?,
            r_b: parse_field(fields[5], KIND, path, li + 1)?,
            n_problems: parse_field(fields[6], KIND, path, li + 1)?,
            n_samples: parse_field(fields[7], KIND, path, li + 1)?,
        });
    }
    Ok(rows)
}

// ---------------------------------------------------------------------------
// Suite manifest

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteEntry {
    pub file: String,
    pub n: usize,
    pub index: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteManifest {
    pub seed: u64,
    pub problems: Vec<SuiteEntry>,
}

pub fn write_suite_manifest(path: &Path, manifest: &SuiteManifest) -> Result<()> {
    fs::write(path, serde_json::to_string_pretty(manifest)?)?;
    Ok(())
}

pub fn read_suite_manifest(path: &Path) -> Result<SuiteManifest> {
    Ok(serde_json::from_str(&fs::read_to_string(path)?)?)
}

/// Loads every problem a suite manifest references, relative to its directory.
pub fn read_suite(manifest_path: &Path) -> Result<Vec<SuiteProblem>> {
    let manifest = read_suite_manifest(manifest_path)?;
    let dir = manifest_path.parent().unwrap_or_else(|| Path::new("."));
    manifest
        .problems
        .iter()
        .map(|entry| {
            let path = dir.join(&entry.file);
            let (model, ground) = read_problem(&path)?;
            if model.n() != entry.n {
                return Err(malformed(
                    "suite",
                    &path,
                    format!("manifest says n = {}, file has n = {}", entry.n, model.n()),
                ));
            }
            Ok(SuiteProblem {
                index: entry.index,
                model,
                ground,
            })
        })
        .collect()
}

/// Flattened coupling table across a suite: `n,instance,i,j,value` rows.
pub fn write_j_values_csv(path: &Path, problems: &[SuiteProblem]) -> Result<()> {
    let mut out = String::from("n,instance,i,j,value\n");
    for p in problems {
        for (&(i, j), &v) in p.model.couplings() {
            writeln!(out, "{},{},{i},{j},{v}", p.model.n(), p.index).unwrap();
        }
    }
    fs::write(path, out)?;
    Ok(())
}
