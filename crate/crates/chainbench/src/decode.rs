//! Broken-chain detection and the three decoding strategies: discard,
//! majority vote, and fault-probability-weighted vote.
//!
//! The weighted vote scores each logical value x by
//!   W(x) = (1 - prod_{agree x} p_l) * prod_{disagree x} p_l
//! where p_l is the estimated fault rate of chain position l; the value with
//! the larger score wins. W(+1) - W(-1) reduces to
//! prod_{disagree +1} p - prod_{agree +1} p, so unanimous chains always keep
//! their value.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::embedding::Embedding;
use crate::error::{Error, Result};
use crate::ising::{GroundStateReport, SpinVector};

/// Fault rates are clamped into [CLAMP, 1 - CLAMP] before multiplying, so a
/// rate estimated as exactly 0 or 1 cannot freeze a chain's vote.
pub const CLAMP: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Strategy {
    Discard,
    Majority,
    Weighted,
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Strategy::Discard => "discard",
            Strategy::Majority => "majority",
            Strategy::Weighted => "weighted",
        };
        f.write_str(name)
    }
}

impl FromStr for Strategy {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "discard" => Ok(Strategy::Discard),
            "majority" => Ok(Strategy::Majority),
            "weighted" => Ok(Strategy::Weighted),
            other => Err(Error::InvalidConfig(format!(
                "unknown strategy {other:?}; expected discard, majority or weighted"
            ))),
        }
    }
}

/// Maps chain positions to indices of a flat readout vector ordered by
/// ascending qubit id.
#[derive(Debug, Clone)]
pub struct ChainLayout {
    qubits: Vec<u32>,
    positions: Vec<Vec<usize>>,
}

impl ChainLayout {
    pub fn new(embedding: &Embedding) -> Result<Self> {
        let qubits = embedding.qubits();
        let index: BTreeMap<u32, usize> = qubits.iter().enumerate().map(|(i, &q)| (q, i)).collect();
        let mut total = 0;
        let positions = embedding
            .chains()
            .iter()
            .map(|chain| {
                total += chain.len();
                chain.iter().map(|q| index[q]).collect()
            })
            .collect();
        if total != qubits.len() {
            return Err(Error::InvalidEmbedding(
                "chains overlap; readout positions are ambiguous".into(),
            ));
        }
        Ok(ChainLayout { qubits, positions })
    }

    /// Readout order: ascending qubit id.
    pub fn qubits(&self) -> &[u32] {
        &self.qubits
    }

    pub fn qubit_count(&self) -> usize {
        self.qubits.len()
    }

    pub fn chain_count(&self) -> usize {
        self.positions.len()
    }

    pub fn chain_lengths(&self) -> Vec<usize> {
        self.positions.iter().map(Vec::len).collect()
    }
}

/// One chain's slice of a physical sample, in chain-path order.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainReadout {
    pub values: Vec<i8>,
    /// Qubit id at each position; used for lowest-qubit tie-breaks.
    pub qubits: Vec<u32>,
    pub broken: bool,
}

/// Splits a physical sample (in layout order) into per-chain readouts.
pub fn read_chains(sample: &[i8], layout: &ChainLayout) -> Result<Vec<ChainReadout>> {
    if sample.len() != layout.qubit_count() {
        return Err(Error::DimensionMismatch {
            expected: layout.qubit_count(),
            actual: sample.len(),
        });
    }
    for (index, &v) in sample.iter().enumerate() {
        if v != 1 && v != -1 {
            return Err(Error::NonSpin {
                index,
                value: v as i64,
            });
        }
    }
    Ok(layout
        .positions
        .iter()
        .map(|positions| {
            let values: Vec<i8> = positions.iter().map(|&p| sample[p]).collect();
            let qubits = positions.iter().map(|&p| layout.qubits[p]).collect();
            let broken = values.windows(2).any(|w| w[0] != w[1]);
            ChainReadout {
                values,
                qubits,
                broken,
            }
        })
        .collect())
}

/// Estimated per-position fault rates, plus how many broken samples they came
/// from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FaultProfile {
    rates: Vec<Vec<f64>>,
    broken_samples: usize,
}

impl FaultProfile {
    pub fn new(rates: Vec<Vec<f64>>, broken_samples: usize) -> Result<Self> {
        for (chain, row) in rates.iter().enumerate() {
            for (position, &value) in row.iter().enumerate() {
                if !(0.0..=1.0).contains(&value) {
                    return Err(Error::FaultProbabilityRange {
                        chain,
                        position,
                        value,
                    });
                }
            }
        }
        Ok(FaultProfile {
            rates,
            broken_samples,
        })
    }

    /// Flat profile; `rate` 0.5 makes the weighted vote match majority.
    pub fn uniform(chain_lengths: &[usize], rate: f64) -> Result<Self> {
        FaultProfile::new(
            chain_lengths.iter().map(|&l| vec![rate; l]).collect(),
            0,
        )
    }

    pub fn rates(&self) -> &[Vec<f64>] {
        &self.rates
    }

    pub fn broken_samples(&self) -> usize {
        self.broken_samples
    }

    fn chain(&self, i: usize, len: usize) -> Result<&[f64]> {
        let row = self.rates.get(i).ok_or(Error::ProfileShapeMismatch {
            chain: i,
            expected: len,
            actual: 0,
        })?;
        if row.len() != len {
            return Err(Error::ProfileShapeMismatch {
                chain: i,
                expected: len,
                actual: row.len(),
            });
        }
        Ok(row)
    }
}

/// Raw per-position fault tallies; mergeable across sample sets so profiles
/// can be pooled over many problems.
#[derive(Debug, Clone, PartialEq)]
pub struct FaultCounts {
    faults: Vec<Vec<usize>>,
    broken_samples: usize,
}

impl FaultCounts {
    pub fn new(chain_lengths: &[usize]) -> Self {
        FaultCounts {
            faults: chain_lengths.iter().map(|&l| vec![0; l]).collect(),
            broken_samples: 0,
        }
    }

    /// Folds in one sample. Only samples with at least one broken chain
    /// count; every chain position is then compared against the nearest
    /// ground state (nearest in logical Hamming distance to the sample's
    /// majority decode, ties to the lowest-index ground state).
    pub fn record(&mut self, readouts: &[ChainReadout], ground: &GroundStateReport) {
        if !readouts.iter().any(|r| r.broken) {
            return;
        }
        let majority = decode_majority(readouts, None);
        let reference = &ground.states[ground.nearest(&majority)];
        self.broken_samples += 1;
        for (i, readout) in readouts.iter().enumerate() {
            for (l, &v) in readout.values.iter().enumerate() {
                if v != reference[i] {
                    self.faults[i][l] += 1;
                }
            }
        }
    }

    pub fn merge(&mut self, other: &FaultCounts) -> Result<()> {
        if self.faults.len() != other.faults.len() {
            return Err(Error::DimensionMismatch {
                expected: self.faults.len(),
                actual: other.faults.len(),
            });
        }
        for (i, (a, b)) in self.faults.iter_mut().zip(&other.faults).enumerate() {
            if a.len() != b.len() {
                return Err(Error::ProfileShapeMismatch {
                    chain: i,
                    expected: a.len(),
                    actual: b.len(),
                });
            }
            for (x, y) in a.iter_mut().zip(b) {
                *x += y;
            }
        }
        self.broken_samples += other.broken_samples;
        Ok(())
    }

    pub fn broken_samples(&self) -> usize {
        self.broken_samples
    }

    pub fn to_profile(&self) -> Result<FaultProfile> {
        if self.broken_samples == 0 {
            return Err(Error::NoBrokenSamples);
        }
        let nb = self.broken_samples as f64;
        FaultProfile::new(
            self.faults
                .iter()
                .map(|row| row.iter().map(|&c| c as f64 / nb).collect())
                .collect(),
            self.broken_samples,
        )
    }

    /// Like `to_profile`, but zero rates (with zero count) when nothing broke.
    pub fn to_profile_or_zero(&self) -> FaultProfile {
        self.to_profile().unwrap_or_else(|_| {
            FaultProfile {
                rates: self.faults.iter().map(|row| vec![0.0; row.len()]).collect(),
                broken_samples: 0,
            }
        })
    }
}

/// Estimates fault rates from raw samples: Eq. counts over broken samples.
pub fn estimate_fault_profile(
    samples: &[Vec<i8>],
    layout: &ChainLayout,
    ground: &GroundStateReport,
) -> Result<FaultProfile> {
    let mut counts = FaultCounts::new(&layout.chain_lengths());
    for sample in samples {
        counts.record(&read_chains(sample, layout)?, ground);
    }
    counts.to_profile()
}

/// Majority vote per chain. Ties (even chains split in half) go to the
/// position with the smallest fault rate when a profile is supplied,
/// otherwise to the lowest-id physical qubit; equal rates also fall back to
/// the lowest-id qubit among the tied positions.
pub fn decode_majority(readouts: &[ChainReadout], profile: Option<&FaultProfile>) -> SpinVector {
    let spins = readouts
        .iter()
        .enumerate()
        .map(|(i, readout)| {
            let sum: i32 = readout.values.iter().map(|&v| v as i32).sum();
            if sum > 0 {
                1
            } else if sum < 0 {
                -1
            } else {
                tie_break(readout, profile.and_then(|p| p.rates().get(i).map(|r| r.as_slice())))
            }
        })
        .collect();
    SpinVector::new(spins).expect("chain votes are spins")
}

/// Position whose value wins a tied chain; see `decode_majority`.
fn tie_break(readout: &ChainReadout, rates: Option<&[f64]>) -> i8 {
    let candidates: Vec<usize> = match rates {
        Some(rates) if rates.len() == readout.values.len() => {
            let min = rates.iter().cloned().fold(f64::INFINITY, f64::min);
            (0..readout.values.len()).filter(|&l| rates[l] == min).collect()
        }
        _ => (0..readout.values.len()).collect(),
    };
    let best = candidates
        .into_iter()
        .min_by_key(|&l| readout.qubits[l])
        .expect("chains are non-empty");
    readout.values[best]
}

/// Discards any sample with a broken chain; unanimous samples decode to their
/// chains' common values.
pub fn decode_discard(readouts: &[ChainReadout]) -> Option<SpinVector> {
    if readouts.iter().any(|r| r.broken) {
        return None;
    }
    let spins = readouts.iter().map(|r| r.values[0]).collect();
    Some(SpinVector::new(spins).expect("chain values are spins"))
}

/// The two weighted-vote scores (W(+1), W(-1)) for one chain, computed
/// directly from the given rates with no clamping.
pub fn weighted_scores(values: &[i8], rates: &[f64]) -> (f64, f64) {
    let mut agree_plus = 1.0;
    let mut agree_minus = 1.0;
    for (&v, &p) in values.iter().zip(rates) {
        if v == 1 {
            agree_plus *= p;
        } else {
            agree_minus *= p;
        }
    }
    ((1.0 - agree_plus) * agree_minus, (1.0 - agree_minus) * agree_plus)
}

/// Fault-probability-weighted vote per chain.
pub fn decode_weighted(readouts: &[ChainReadout], profile: &FaultProfile) -> Result<SpinVector> {
    let spins = readouts
        .iter()
        .enumerate()
        .map(|(i, readout)| {
            let rates = profile.chain(i, readout.values.len())?;
            if !readout.broken {
                return Ok(readout.values[0]);
            }
            let clamped: Vec<f64> = rates
                .iter()
                .map(|&p| p.clamp(CLAMP, 1.0 - CLAMP))
                .collect();
            let (w_plus, w_minus) = weighted_scores(&readout.values, &clamped);
            Ok(if w_plus > w_minus {
                1
            } else if w_minus > w_plus {
                -1
            } else {
                tie_break(readout, Some(rates))
            })
        })
        .collect::<Result<Vec<i8>>>()?;
    Ok(SpinVector::new(spins).expect("chain votes are spins"))
}

/// Applies one strategy to one sample's readouts. `None` means discarded.
pub fn decode_readouts(
    readouts: &[ChainReadout],
    strategy: Strategy,
    profile: Option<&FaultProfile>,
) -> Result<Option<SpinVector>> {
    match strategy {
        Strategy::Discard => Ok(decode_discard(readouts)),
        Strategy::Majority => Ok(Some(decode_majority(readouts, profile))),
        Strategy::Weighted => {
            let profile = profile.ok_or(Error::MissingProfile)?;
            decode_weighted(readouts, profile).map(Some)
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecodedSample {
    /// `None` when the discard strategy dropped the sample.
    pub logical: Option<SpinVector>,
    pub broken_chains: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecodedSampleSet {
    pub samples: Vec<DecodedSample>,
    pub chain_count: usize,
}

/// Decodes a whole physical sample set with one strategy.
pub fn decode_sample_set(
    samples: &[Vec<i8>],
    layout: &ChainLayout,
    strategy: Strategy,
    profile: Option<&FaultProfile>,
) -> Result<DecodedSampleSet> {
    let decoded = samples
        .iter()
        .map(|sample| {
            let readouts = read_chains(sample, layout)?;
            let broken_chains = readouts.iter().filter(|r| r.broken).count();
            Ok(DecodedSample {
                logical: decode_readouts(&readouts, strategy, profile)?,
                broken_chains,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(DecodedSampleSet {
        samples: decoded,
        chain_count: layout.chain_count(),
    })
}
