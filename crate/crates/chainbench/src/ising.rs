//! QUBO and Ising model types, exact conversions between them, and an
//! exhaustive ground-state solver for small instances.
//!
//! Sign convention used throughout:
//!   Ising:  E(s) = sum_i h_i s_i + sum_{i<j} J_ij s_i s_j + beta,  s_i in {-1,+1}
//!   QUBO:   E(x) = sum_i q_i x_i + sum_{i<j} Q_ij x_i x_j + gamma, x_i in {0,1}
//! with x = (s + 1) / 2. Couplings are stored upper-triangular (i < j).

use std::collections::BTreeMap;

use crate::error::{Error, Result};

/// Upper-triangular coupling map keyed by (i, j) with i < j.
pub type CouplingMap = BTreeMap<(usize, usize), f64>;

/// Largest spin count `brute_force_solve` accepts; prevents accidental 2^40 runs.
pub const BRUTE_FORCE_CAP: usize = 26;

fn canonical_pair(i: usize, j: usize, n: usize) -> Result<(usize, usize)> {
    if i == j {
        return Err(Error::SelfCoupling(i));
    }
    for idx in [i, j] {
        if idx >= n {
            return Err(Error::IndexOutOfRange { index: idx, n });
        }
    }
    Ok((i.min(j), i.max(j)))
}

/// A spin configuration with entries in {-1, +1}.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SpinVector(Vec<i8>);

impl SpinVector {
    pub fn new(spins: Vec<i8>) -> Result<Self> {
        for (index, &s) in spins.iter().enumerate() {
            if s != 1 && s != -1 {
                return Err(Error::NonSpin {
                    index,
                    value: s as i64,
                });
            }
        }
        Ok(SpinVector(spins))
    }

    /// Spin i is up iff bit i of `bits` is set.
    pub fn from_bits(bits: u64, n: usize) -> Self {
        SpinVector(
            (0..n)
                .map(|i| if bits >> i & 1 == 1 { 1 } else { -1 })
                .collect(),
        )
    }

    /// Inverse of `from_bits`.
    pub fn to_bits(&self) -> u64 {
        self.0
            .iter()
            .enumerate()
            .fold(0, |acc, (i, &s)| if s == 1 { acc | 1 << i } else { acc })
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn spins(&self) -> &[i8] {
        &self.0
    }

    /// Number of positions where the two vectors disagree.
    pub fn hamming_distance(&self, other: &SpinVector) -> usize {
        debug_assert_eq!(self.len(), other.len());
        self.0
            .iter()
            .zip(&other.0)
            .filter(|(a, b)| a != b)
            .count()
    }

    /// The {0,1} view of this configuration, x = (s + 1) / 2.
    pub fn to_binary(&self) -> Vec<u8> {
        self.0.iter().map(|&s| ((s + 1) / 2) as u8).collect()
    }
}

impl std::ops::Index<usize> for SpinVector {
    type Output = i8;
    fn index(&self, i: usize) -> &i8 {
        &self.0[i]
    }
}

/// Quadratic unconstrained binary optimization problem.
#[derive(Debug, Clone, PartialEq)]
pub struct Qubo {
    linear: Vec<f64>,
    quadratic: CouplingMap,
    offset: f64,
}

impl Qubo {
    pub fn new(linear: Vec<f64>, quadratic: CouplingMap, offset: f64) -> Result<Self> {
        let n = linear.len();
        let mut canon = CouplingMap::new();
        for ((i, j), v) in quadratic {
            let key = canonical_pair(i, j, n)?;
            *canon.entry(key).or_insert(0.0) += v;
        }
        Ok(Qubo {
            linear,
            quadratic: canon,
            offset,
        })
    }

    pub fn n(&self) -> usize {
        self.linear.len()
    }

    pub fn linear(&self) -> &[f64] {
        &self.linear
    }

    pub fn quadratic(&self) -> &CouplingMap {
        &self.quadratic
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    /// Objective value at a {0,1} assignment.
    pub fn energy(&self, x: &[u8]) -> Result<f64> {
        if x.len() != self.n() {
            return Err(Error::DimensionMismatch {
                expected: self.n(),
                actual: x.len(),
            });
        }
        for (index, &b) in x.iter().enumerate() {
            if b > 1 {
                return Err(Error::NonSpin {
                    index,
                    value: b as i64,
                });
            }
        }
        let mut e = self.offset;
        for (i, &q) in self.linear.iter().enumerate() {
            e += q * x[i] as f64;
        }
        for (&(i, j), &v) in &self.quadratic {
            e += v * (x[i] * x[j]) as f64;
        }
        Ok(e)
    }

    /// Exact change of variables x = (s + 1) / 2. Energies match pointwise:
    /// the Ising energy of s equals the QUBO energy of the corresponding x.
    pub fn to_ising(&self) -> IsingModel {
        let n = self.n();
        let mut j = CouplingMap::new();
        for (&key, &v) in &self.quadratic {
            j.insert(key, v / 4.0);
        }
        let mut h = vec![0.0; n];
        for (i, &q) in self.linear.iter().enumerate() {
            h[i] = q / 2.0;
        }
        for (&(a, b), &jv) in &j {
            h[a] += jv;
            h[b] += jv;
        }
        let qsum: f64 = self.quadratic.values().sum();
        let lsum: f64 = self.linear.iter().sum();
        let beta = qsum / 4.0 + lsum / 2.0 + self.offset;
        IsingModel {
            h,
            j,
            beta,
        }
    }
}

/// Ising model over {-1,+1} spins with a constant offset.
#[derive(Debug, Clone, PartialEq)]
pub struct IsingModel {
    h: Vec<f64>,
    j: CouplingMap,
    beta: f64,
}

impl IsingModel {
    pub fn new(h: Vec<f64>, j: CouplingMap, beta: f64) -> Result<Self> {
        let n = h.len();
        let mut canon = CouplingMap::new();
        for ((i, jdx), v) in j {
            let key = canonical_pair(i, jdx, n)?;
            *canon.entry(key).or_insert(0.0) += v;
        }
        Ok(IsingModel {
            h,
            j: canon,
            beta,
        })
    }

    pub fn n(&self) -> usize {
        self.h.len()
    }

    pub fn h(&self) -> &[f64] {
        &self.h
    }

    pub fn couplings(&self) -> &CouplingMap {
        &self.j
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn energy(&self, s: &SpinVector) -> Result<f64> {
        if s.len() != self.n() {
            return Err(Error::DimensionMismatch {
                expected: self.n(),
                actual: s.len(),
            });
        }
        let mut e = self.beta;
        for (i, &hv) in self.h.iter().enumerate() {
            e += hv * s[i] as f64;
        }
        for (&(i, j), &jv) in &self.j {
            e += jv * (s[i] * s[j]) as f64;
        }
        Ok(e)
    }

    /// Exact inverse of `Qubo::to_ising`.
    pub fn to_qubo(&self) -> Qubo {
        let mut quadratic = CouplingMap::new();
        for (&key, &jv) in &self.j {
            quadratic.insert(key, 4.0 * jv);
        }
        let mut linear: Vec<f64> = self.h.iter().map(|&hv| 2.0 * hv).collect();
        for (&(a, b), &jv) in &self.j {
            linear[a] -= 2.0 * jv;
            linear[b] -= 2.0 * jv;
        }
        let hsum: f64 = self.h.iter().sum();
        let jsum: f64 = self.j.values().sum();
        let offset = self.beta - hsum + jsum;
        Qubo {
            linear,
            quadratic,
            offset,
        }
    }

    /// Rescales h, J and beta by 1 / max(max|h|, max|J|) so the largest
    /// coefficient has magnitude one. No-op when all coefficients are zero.
    pub fn normalized(&self) -> IsingModel {
        let hmax = self.h.iter().fold(0.0f64, |m, &v| m.max(v.abs()));
        let jmax = self.j.values().fold(0.0f64, |m, &v| m.max(v.abs()));
        let scale = hmax.max(jmax);
        if scale == 0.0 {
            return self.clone();
        }
        IsingModel {
            h: self.h.iter().map(|&v| v / scale).collect(),
            j: self.j.iter().map(|(&k, &v)| (k, v / scale)).collect(),
            beta: self.beta / scale,
        }
    }
}

/// Exhaustive-search result: the minimum energy and every state attaining it.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundStateReport {
    pub energy: f64,
    /// All minimizers, sorted by their binary encoding.
    pub states: Vec<SpinVector>,
}

impl GroundStateReport {
    /// True when `e` matches the ground energy within `tol`.
    pub fn matches_energy(&self, e: f64, tol: f64) -> bool {
        (e - self.energy).abs() <= tol
    }

    /// Index of the ground state nearest to `s` in Hamming distance,
    /// ties broken by lowest index.
    pub fn nearest(&self, s: &SpinVector) -> usize {
        let mut best = 0;
        let mut best_d = usize::MAX;
        for (idx, g) in self.states.iter().enumerate() {
            let d = g.hamming_distance(s);
            if d < best_d {
                best_d = d;
                best = idx;
            }
        }
        best
    }
}

/// Finds the exact ground state(s) of `model` by enumerating all 2^n spin
/// configurations.
///
/// A Gray-code walk updates the energy incrementally (one spin flip per step);
/// every configuration within 1e-6 of the provisional minimum is then
/// re-evaluated from scratch, which removes the walk's floating-point drift.
/// States within 1e-12 of the exact minimum are reported as degenerate.
pub fn brute_force_solve(model: &IsingModel) -> Result<GroundStateReport> {
    brute_force_solve_capped(model, BRUTE_FORCE_CAP)
}

pub fn brute_force_solve_capped(model: &IsingModel, cap: usize) -> Result<GroundStateReport> {
    let n = model.n();
    if n > cap {
        return Err(Error::EnumerationCap { n, cap });
    }
    if n == 0 {
        return Ok(GroundStateReport {
            energy: model.beta,
            states: vec![SpinVector(Vec::new())],
        });
    }

    // Walk once to locate the approximate minimum, walk again collecting
    // candidates near it. The flip margin (1e-6) dwarfs any accumulated
    // rounding over 2^26 incremental updates.
    const MARGIN: f64 = 1e-6;
    const DEGENERACY_TOL: f64 = 1e-12;

    let approx_min = gray_walk(model, f64::INFINITY, |_, _| {});
    let mut candidates: Vec<(u64, f64)> = Vec::new();
    gray_walk(model, approx_min + MARGIN, |bits, _| {
        let state = SpinVector::from_bits(bits, n);
        let exact = model.energy(&state).expect("state has model dimension");
        candidates.push((bits, exact));
    });

    let energy = candidates
        .iter()
        .map(|&(_, e)| e)
        .fold(f64::INFINITY, f64::min);
    let mut bits: Vec<u64> = candidates
        .into_iter()
        .filter(|&(_, e)| e - energy <= DEGENERACY_TOL)
        .map(|(b, _)| b)
        .collect();
    bits.sort_unstable();
    bits.dedup();
    Ok(GroundStateReport {
        energy,
        states: bits
            .into_iter()
            .map(|b| SpinVector::from_bits(b, n))
            .collect(),
    })
}

/// Gray-code enumeration of all 2^n states with incremental energy updates.
/// Calls `visit` for every state at or below `threshold`; returns the minimum
/// incremental energy seen.
fn gray_walk(model: &IsingModel, threshold: f64, mut visit: impl FnMut(u64, f64)) -> f64 {
    let n = model.n();
    // Dense adjacency keeps the flip update branch-free for small n.
    let mut weights = vec![0.0f64; n * n];
    for (&(i, j), &v) in &model.j {
        weights[i * n + j] = v;
        weights[j * n + i] = v;
    }

    let mut spins: Vec<f64> = vec![-1.0; n];
    let mut energy =
        model.beta - model.h.iter().sum::<f64>() + model.j.values().sum::<f64>();
    let mut bits: u64 = 0;

    let mut min_seen = energy;
    if energy <= threshold {
        visit(bits, energy);
    }
    for t in 1u64..1u64 << n {
        let flip = t.trailing_zeros() as usize;
        let row = &weights[flip * n..(flip + 1) * n];
        let mut field = model.h[flip];
        for (w, s) in row.iter().zip(&spins) {
            field += w * s;
        }
        energy -= 2.0 * spins[flip] * field;
        spins[flip] = -spins[flip];
        bits ^= 1 << flip;
        min_seen = min_seen.min(energy);
        if energy <= threshold {
            visit(bits, energy);
        }
    }
    min_seen
}
