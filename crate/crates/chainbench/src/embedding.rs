//! Minor embedding of complete logical graphs into Chimera hardware, plus the
//! physical model an embedding induces.
//!
//! The clique layout is the triangular one: logical spin i = L*a + t maps to
//! the horizontal shore-t qubits of row a, cells 0..=a, followed by the
//! vertical shore-t qubits of column a, rows a..m-1. The two segments meet in
//! the diagonal cell (a, a), so each chain is a hardware path of m + 1 qubits
//! where m = n / L. Two chains in the same row block meet twice (in the
//! diagonal cell), chains from different blocks meet once.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet, VecDeque};
use std::fmt;

use crate::chimera::{ChimeraGraph, Shore};
use crate::error::{Error, Result};
use crate::ising::{IsingModel, SpinVector};

/// Assignment of each logical spin to a chain of physical qubits.
#[derive(Debug, Clone)]
pub struct Embedding {
    graph: ChimeraGraph,
    chains: Vec<Vec<u32>>,
}

impl Embedding {
    /// Wraps chains without validating them; run [`validate_embedding`] to
    /// check an untrusted layout.
    pub fn new(graph: ChimeraGraph, chains: Vec<Vec<u32>>) -> Self {
        Embedding { graph, chains }
    }

    pub fn graph(&self) -> &ChimeraGraph {
        &self.graph
    }

    pub fn chains(&self) -> &[Vec<u32>] {
        &self.chains
    }

    pub fn chain_count(&self) -> usize {
        self.chains.len()
    }

    pub fn max_chain_length(&self) -> usize {
        self.chains.iter().map(Vec::len).max().unwrap_or(0)
    }

    /// All physical qubits used by any chain, ascending.
    pub fn qubits(&self) -> Vec<u32> {
        let set: BTreeSet<u32> = self.chains.iter().flatten().copied().collect();
        set.into_iter().collect()
    }
}

/// Embeds an n-spin clique, anchored at the top-left corner of the graph.
pub fn clique_embed(n: usize, graph: &ChimeraGraph) -> Result<Embedding> {
    clique_embed_at(n, graph, 0, 0)
}

/// Embeds an n-spin clique into the m x m cell block whose top-left cell is
/// (row0, col0), where m = n / shore.
pub fn clique_embed_at(
    n: usize,
    graph: &ChimeraGraph,
    row0: usize,
    col0: usize,
) -> Result<Embedding> {
    let l = graph.shore();
    if n == 0 || !n.is_multiple_of(l) {
        return Err(Error::CliqueSizeUnsupported { n, shore: l });
    }
    let m = n / l;
    if row0 + m > graph.rows() || col0 + m > graph.cols() {
        return Err(Error::GraphTooSmall {
            need_rows: m,
            need_cols: m,
            row: row0,
            col: col0,
            rows: graph.rows(),
            cols: graph.cols(),
        });
    }

    let chains = (0..n)
        .map(|i| {
            let a = i / l;
            let t = i % l;
            let mut chain = Vec::with_capacity(m + 1);
            for c in 0..=a {
                chain.push(graph.qubit(row0 + a, col0 + c, Shore::Horizontal, t));
            }
            for r in a..m {
                chain.push(graph.qubit(row0 + r, col0 + a, Shore::Vertical, t));
            }
            chain
        })
        .collect();
    Ok(Embedding::new(graph.clone(), chains))
}

/// A specific defect in an embedding.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    ChainCountMismatch { expected: usize, actual: usize },
    EmptyChain { chain: usize },
    QubitOutsideGraph { chain: usize, qubit: u32 },
    /// `first == second` means the qubit repeats within one chain.
    DuplicateQubit { qubit: u32, first: usize, second: usize },
    DisconnectedChain { chain: usize },
    UncoveredEdge { i: usize, j: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::ChainCountMismatch { expected, actual } => {
                write!(f, "expected {expected} chains, found {actual}")
            }
            Violation::EmptyChain { chain } => write!(f, "chain {chain} is empty"),
            Violation::QubitOutsideGraph { chain, qubit } => {
                write!(f, "chain {chain} uses qubit {qubit} outside the graph")
            }
            Violation::DuplicateQubit { qubit, first, second } if first == second => {
                write!(f, "qubit {qubit} repeats within chain {first}")
            }
            Violation::DuplicateQubit { qubit, first, second } => {
                write!(f, "qubit {qubit} appears in chains {first} and {second}")
            }
            Violation::DisconnectedChain { chain } => {
                write!(f, "chain {chain} does not induce a connected subgraph")
            }
            Violation::UncoveredEdge { i, j } => {
                write!(f, "no hardware edge joins the chains of logical spins {i} and {j}")
            }
        }
    }
}

/// Checks an embedding against a logical model: chain count, qubit validity,
/// disjointness, per-chain connectivity, and coverage of every logical edge.
/// Returns every violation found (empty means valid).
pub fn validate_embedding(embedding: &Embedding, logical: &IsingModel) -> Vec<Violation> {
    let mut violations = Vec::new();
    let graph = embedding.graph();
    let chains = embedding.chains();

    if chains.len() != logical.n() {
        violations.push(Violation::ChainCountMismatch {
            expected: logical.n(),
            actual: chains.len(),
        });
    }

    let mut owner: HashMap<u32, usize> = HashMap::new();
    for (ci, chain) in chains.iter().enumerate() {
        if chain.is_empty() {
            violations.push(Violation::EmptyChain { chain: ci });
        }
        let mut in_graph = true;
        for &q in chain {
            if !graph.contains(q) {
                violations.push(Violation::QubitOutsideGraph { chain: ci, qubit: q });
                in_graph = false;
                continue;
            }
            match owner.get(&q) {
                Some(&prev) => violations.push(Violation::DuplicateQubit {
                    qubit: q,
                    first: prev,
                    second: ci,
                }),
                None => {
                    owner.insert(q, ci);
                }
            }
        }
        if in_graph && !chain.is_empty() && !chain_connected(graph, chain) {
            violations.push(Violation::DisconnectedChain { chain: ci });
        }
    }

    if chains.len() == logical.n() {
        for &(i, j) in logical.couplings().keys() {
            let covered = chains[i]
                .iter()
                .any(|&a| chains[j].iter().any(|&b| graph.contains(a) && graph.contains(b) && graph.has_edge(a, b)));
            if !covered {
                violations.push(Violation::UncoveredEdge { i, j });
            }
        }
    }

    violations
}

fn chain_connected(graph: &ChimeraGraph, chain: &[u32]) -> bool {
    let members: HashSet<u32> = chain.iter().copied().collect();
    let mut seen = HashSet::with_capacity(members.len());
    let mut queue = VecDeque::new();
    seen.insert(chain[0]);
    queue.push_back(chain[0]);
    while let Some(q) = queue.pop_front() {
        for &nb in graph.neighbors(q) {
            if members.contains(&nb) && seen.insert(nb) {
                queue.push_back(nb);
            }
        }
    }
    seen.len() == members.len()
}

/// The physical Ising model an embedding induces from a logical one.
///
/// Logical biases are split evenly over chain members, each logical coupling
/// is split evenly over the hardware edges joining the two chains, and every
/// intra-chain coupler carries the chain strength k. The logical offset is
/// kept, so for chain-unanimous configurations the physical energy equals the
/// logical energy plus k times the number of intra-chain couplers.
#[derive(Debug, Clone)]
pub struct EmbeddedModel {
    physical_h: BTreeMap<u32, f64>,
    inter: BTreeMap<(u32, u32), f64>,
    intra: BTreeMap<(u32, u32), f64>,
    chain_strength: f64,
    embedding: Embedding,
    logical: IsingModel,
}

pub fn embed_model(logical: &IsingModel, embedding: &Embedding, k: f64) -> Result<EmbeddedModel> {
    let violations = validate_embedding(embedding, logical);
    if !violations.is_empty() {
        let msgs: Vec<String> = violations.iter().map(Violation::to_string).collect();
        return Err(Error::InvalidEmbedding(msgs.join("; ")));
    }
    let graph = embedding.graph();
    let chains = embedding.chains();

    let mut physical_h = BTreeMap::new();
    for (i, chain) in chains.iter().enumerate() {
        let share = logical.h()[i] / chain.len() as f64;
        for &q in chain {
            physical_h.insert(q, share);
        }
    }

    let mut inter = BTreeMap::new();
    for (&(i, j), &jv) in logical.couplings() {
        let mut cross = Vec::new();
        for &a in &chains[i] {
            for &b in &chains[j] {
                if graph.has_edge(a, b) {
                    cross.push((a.min(b), a.max(b)));
                }
            }
        }
        let share = jv / cross.len() as f64;
        for key in cross {
            inter.insert(key, share);
        }
    }

    let mut intra = BTreeMap::new();
    for chain in chains {
        for (a, b) in chain_spanning_edges(graph, chain) {
            intra.insert((a.min(b), a.max(b)), k);
        }
    }

    Ok(EmbeddedModel {
        physical_h,
        inter,
        intra,
        chain_strength: k,
        embedding: embedding.clone(),
        logical: logical.clone(),
    })
}

/// Edges that tie a chain together: the consecutive pairs when the listed
/// order is a hardware path (the clique layout guarantees this), otherwise a
/// deterministic spanning tree.
fn chain_spanning_edges(graph: &ChimeraGraph, chain: &[u32]) -> Vec<(u32, u32)> {
    if chain.windows(2).all(|w| graph.has_edge(w[0], w[1])) {
        return chain.windows(2).map(|w| (w[0], w[1])).collect();
    }
    let members: HashSet<u32> = chain.iter().copied().collect();
    let mut edges = Vec::new();
    let mut seen = HashSet::new();
    let mut queue = VecDeque::new();
    seen.insert(chain[0]);
    queue.push_back(chain[0]);
    while let Some(q) = queue.pop_front() {
        for &nb in graph.neighbors(q) {
            if members.contains(&nb) && seen.insert(nb) {
                edges.push((q, nb));
                queue.push_back(nb);
            }
        }
    }
    edges
}

impl EmbeddedModel {
    pub(crate) fn from_parts(
        physical_h: BTreeMap<u32, f64>,
        inter: BTreeMap<(u32, u32), f64>,
        intra: BTreeMap<(u32, u32), f64>,
        chain_strength: f64,
        embedding: Embedding,
        logical: IsingModel,
    ) -> Self {
        EmbeddedModel {
            physical_h,
            inter,
            intra,
            chain_strength,
            embedding,
            logical,
        }
    }

    /// Physical qubits in ascending id order; the canonical readout order.
    pub fn qubits(&self) -> Vec<u32> {
        self.physical_h.keys().copied().collect()
    }

    pub fn qubit_count(&self) -> usize {
        self.physical_h.len()
    }

    pub fn physical_h(&self) -> &BTreeMap<u32, f64> {
        &self.physical_h
    }

    pub fn inter_couplings(&self) -> &BTreeMap<(u32, u32), f64> {
        &self.inter
    }

    pub fn intra_couplings(&self) -> &BTreeMap<(u32, u32), f64> {
        &self.intra
    }

    pub fn intra_edge_count(&self) -> usize {
        self.intra.len()
    }

    pub fn chain_strength(&self) -> f64 {
        self.chain_strength
    }

    pub fn embedding(&self) -> &Embedding {
        &self.embedding
    }

    pub fn logical(&self) -> &IsingModel {
        &self.logical
    }

    /// Energy of a physical configuration given in [`Self::qubits`] order,
    /// including the logical offset.
    pub fn energy(&self, spins: &[i8]) -> Result<f64> {
        if spins.len() != self.physical_h.len() {
            return Err(Error::DimensionMismatch {
                expected: self.physical_h.len(),
                actual: spins.len(),
            });
        }
        let index: BTreeMap<u32, usize> = self
            .physical_h
            .keys()
            .enumerate()
            .map(|(pos, &q)| (q, pos))
            .collect();
        let mut e = self.logical.beta();
        for (pos, (_, &hv)) in self.physical_h.iter().enumerate() {
            e += hv * spins[pos] as f64;
        }
        for (&(a, b), &jv) in self.inter.iter().chain(self.intra.iter()) {
            e += jv * (spins[index[&a]] * spins[index[&b]]) as f64;
        }
        Ok(e)
    }

    /// Physical configuration (in [`Self::qubits`] order) where every chain
    /// unanimously takes its logical value.
    pub fn extend(&self, logical_state: &SpinVector) -> Result<Vec<i8>> {
        if logical_state.len() != self.embedding.chain_count() {
            return Err(Error::DimensionMismatch {
                expected: self.embedding.chain_count(),
                actual: logical_state.len(),
            });
        }
        let mut by_qubit = BTreeMap::new();
        for (i, chain) in self.embedding.chains().iter().enumerate() {
            for &q in chain {
                by_qubit.insert(q, logical_state[i]);
            }
        }
        Ok(by_qubit.into_values().collect())
    }
}
