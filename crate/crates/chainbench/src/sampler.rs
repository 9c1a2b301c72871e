//! Simulated-annealing sampler over embedded models.
//!
//! Each sample anneals an independent random start through a geometric
//! inverse-temperature ladder with fixed-order Metropolis sweeps. Sample i,
//! restart r always draws from the stream derived for (i, r), so results are
//! identical no matter how samples are distributed over threads.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::embedding::EmbeddedModel;
use crate::error::{Error, Result};
use crate::rng::stream;

const ANNEAL_STREAM: u64 = 0x414e_4e4c;
const NOISE_STREAM: u64 = 0x4e4f_4953;

#[derive(Debug, Clone, PartialEq)]
pub struct AnnealSchedule {
    pub beta_start: f64,
    pub beta_end: f64,
    pub sweeps: usize,
    pub restarts: usize,
}

impl AnnealSchedule {
    pub fn geometric(beta_start: f64, beta_end: f64, sweeps: usize, restarts: usize) -> Result<Self> {
        let s = AnnealSchedule {
            beta_start,
            beta_end,
            sweeps,
            restarts,
        };
        s.validate()?;
        Ok(s)
    }

    /// Default ladder: beta 0.1 -> 10, 100 sweeps per qubit, single restart.
    pub fn default_for(n_qubits: usize) -> Self {
        AnnealSchedule {
            beta_start: 0.1,
            beta_end: 10.0,
            sweeps: 100 * n_qubits.max(1),
            restarts: 1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.beta_start > 0.0 && self.beta_start.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "beta_start must be positive and finite, got {}",
                self.beta_start
            )));
        }
        if !(self.beta_end >= self.beta_start && self.beta_end.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "beta_end must be finite and >= beta_start, got {}",
                self.beta_end
            )));
        }
        if self.sweeps == 0 || self.restarts == 0 {
            return Err(Error::InvalidConfig(
                "sweeps and restarts must be positive".into(),
            ));
        }
        Ok(())
    }

    /// One beta per sweep, geometrically spaced from start to end inclusive.
    pub fn betas(&self) -> Vec<f64> {
        if self.sweeps == 1 {
            return vec![self.beta_end];
        }
        let ratio = (self.beta_end / self.beta_start).powf(1.0 / (self.sweeps - 1) as f64);
        let mut beta = self.beta_start;
        (0..self.sweeps)
            .map(|_| {
                let b = beta;
                beta *= ratio;
                b
            })
            .collect()
    }
}

/// Post-anneal readout noise: each physical spin flips independently.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct NoiseConfig {
    pub flip_probability: f64,
}

impl NoiseConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=0.5).contains(&self.flip_probability) {
            return Err(Error::InvalidConfig(format!(
                "flip probability must be in [0, 0.5], got {}",
                self.flip_probability
            )));
        }
        Ok(())
    }
}

/// Flattened coupler layout (CSR) for fast local-field evaluation.
#[derive(Debug, Clone)]
pub struct PhysicalModel {
    qubits: Vec<u32>,
    h: Vec<f64>,
    offsets: Vec<u32>,
    targets: Vec<u32>,
    weights: Vec<f64>,
    edges: Vec<(u32, u32, f64)>,
    constant: f64,
}

impl PhysicalModel {
    /// `qubits` must be strictly ascending; couplings reference qubit ids.
    pub fn new(
        qubits: Vec<u32>,
        h: Vec<f64>,
        couplings: &[(u32, u32, f64)],
        constant: f64,
    ) -> Result<Self> {
        if h.len() != qubits.len() {
            return Err(Error::DimensionMismatch {
                expected: qubits.len(),
                actual: h.len(),
            });
        }
        if !qubits.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::InvalidConfig(
                "qubit ids must be strictly ascending".into(),
            ));
        }
        let locate = |q: u32| -> Result<u32> {
            qubits
                .binary_search(&q)
                .map(|p| p as u32)
                .map_err(|_| Error::UnknownQubit { qubit: q })
        };
        let n = qubits.len();
        let mut adjacency: Vec<Vec<(u32, f64)>> = vec![Vec::new(); n];
        let mut edges = Vec::with_capacity(couplings.len());
        for &(a, b, w) in couplings {
            let (pa, pb) = (locate(a)?, locate(b)?);
            if pa == pb {
                return Err(Error::SelfCoupling(pa as usize));
            }
            adjacency[pa as usize].push((pb, w));
            adjacency[pb as usize].push((pa, w));
            edges.push((pa.min(pb), pa.max(pb), w));
        }
        let mut offsets = Vec::with_capacity(n + 1);
        let mut targets = Vec::new();
        let mut weights = Vec::new();
        offsets.push(0);
        for row in &mut adjacency {
            row.sort_unstable_by_key(|&(t, _)| t);
            for &(t, w) in row.iter() {
                targets.push(t);
                weights.push(w);
            }
            offsets.push(targets.len() as u32);
        }
        Ok(PhysicalModel {
            qubits,
            h,
            offsets,
            targets,
            weights,
            edges,
            constant,
        })
    }

    pub fn from_embedded(model: &EmbeddedModel) -> Self {
        let qubits = model.qubits();
        let h = model.physical_h().values().copied().collect();
        let couplings: Vec<(u32, u32, f64)> = model
            .inter_couplings()
            .iter()
            .chain(model.intra_couplings())
            .map(|(&(a, b), &w)| (a, b, w))
            .collect();
        PhysicalModel::new(qubits, h, &couplings, model.logical().beta())
            .expect("embedded models are internally consistent")
    }

    pub fn qubit_count(&self) -> usize {
        self.qubits.len()
    }

    pub fn qubits(&self) -> &[u32] {
        &self.qubits
    }

    pub fn energy(&self, spins: &[i8]) -> f64 {
        debug_assert_eq!(spins.len(), self.qubits.len());
        let mut e = self.constant;
        for (i, &hv) in self.h.iter().enumerate() {
            e += hv * spins[i] as f64;
        }
        for &(a, b, w) in &self.edges {
            e += w * (spins[a as usize] * spins[b as usize]) as f64;
        }
        e
    }

    /// h_l plus the coupling-weighted sum of neighbor spins.
    pub fn local_field(&self, spins: &[i8], l: usize) -> f64 {
        let mut field = self.h[l];
        let (start, end) = (self.offsets[l] as usize, self.offsets[l + 1] as usize);
        for e in start..end {
            field += self.weights[e] * spins[self.targets[e] as usize] as f64;
        }
        field
    }

    /// Energy change from flipping spin l.
    pub fn delta_energy(&self, spins: &[i8], l: usize) -> f64 {
        -2.0 * spins[l] as f64 * self.local_field(spins, l)
    }
}

/// One Metropolis sweep at fixed beta, proposing flips in index order.
/// Downhill and level moves are accepted outright and consume no randomness.
pub fn sweep_metropolis(
    state: &mut [i8],
    model: &PhysicalModel,
    beta: f64,
    rng: &mut ChaCha8Rng,
) {
    for l in 0..state.len() {
        let delta = model.delta_energy(state, l);
        if delta <= 0.0 || rng.gen::<f64>() < (-beta * delta).exp() {
            state[l] = -state[l];
        }
    }
}

/// Annealed physical readouts; `samples[i]` is ordered like `qubits`.
#[derive(Debug, Clone, PartialEq)]
pub struct PhysicalSampleSet {
    pub qubits: Vec<u32>,
    pub samples: Vec<Vec<i8>>,
    pub energies: Vec<f64>,
}

/// Draws `n_samples` independent annealed samples from an embedded model.
pub fn sample(
    model: &EmbeddedModel,
    n_samples: usize,
    schedule: &AnnealSchedule,
    noise: &NoiseConfig,
    seed: u64,
) -> Result<PhysicalSampleSet> {
    sample_physical(&PhysicalModel::from_embedded(model), n_samples, schedule, noise, seed)
}

pub fn sample_physical(
    model: &PhysicalModel,
    n_samples: usize,
    schedule: &AnnealSchedule,
    noise: &NoiseConfig,
    seed: u64,
) -> Result<PhysicalSampleSet> {
    schedule.validate()?;
    noise.validate()?;
    if n_samples == 0 {
        return Err(Error::EmptySamples);
    }
    if model.qubit_count() == 0 {
        return Err(Error::InvalidConfig("model has no qubits".into()));
    }
    let betas = schedule.betas();

    let results: Vec<(Vec<i8>, f64)> = (0..n_samples)
        .into_par_iter()
        .map(|i| anneal_one(model, schedule, noise, &betas, seed, i))
        .collect();

    let mut samples = Vec::with_capacity(n_samples);
    let mut energies = Vec::with_capacity(n_samples);
    for (s, e) in results {
        samples.push(s);
        energies.push(e);
    }
    Ok(PhysicalSampleSet {
        qubits: model.qubits().to_vec(),
        samples,
        energies,
    })
}

fn anneal_one(
    model: &PhysicalModel,
    schedule: &AnnealSchedule,
    noise: &NoiseConfig,
    betas: &[f64],
    seed: u64,
    index: usize,
) -> (Vec<i8>, f64) {
    let n = model.qubit_count();
    let mut best: Option<(Vec<i8>, f64)> = None;
    for restart in 0..schedule.restarts {
        let mut rng = stream(seed, &[ANNEAL_STREAM, index as u64, restart as u64]);
        let mut state: Vec<i8> = (0..n).map(|_| if rng.gen::<bool>() { 1 } else { -1 }).collect();
        for &beta in betas {
            sweep_metropolis(&mut state, model, beta, &mut rng);
        }
        let e = model.energy(&state);
        if best.as_ref().is_none_or(|(_, be)| e < *be) {
            best = Some((state, e));
        }
    }
    let (mut state, mut energy) = best.expect("restarts >= 1");
    if noise.flip_probability > 0.0 {
        let mut rng = stream(seed, &[NOISE_STREAM, index as u64]);
        for s in state.iter_mut() {
            if rng.gen::<f64>() < noise.flip_probability {
                *s = -*s;
            }
        }
        energy = model.energy(&state);
    }
    (state, energy)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chimera::ChimeraGraph;
    use crate::embedding::{clique_embed, embed_model};
    use crate::ising::{brute_force_solve, CouplingMap, IsingModel, SpinVector};
    use proptest::prelude::*;
    use rand::Rng;

    fn ferro_clique(n: usize, cells: usize, k: f64) -> EmbeddedModel {
        let g = ChimeraGraph::new(cells, cells, 4).unwrap();
        let mut j = CouplingMap::new();
        for i in 0..n {
            for l in i + 1..n {
                j.insert((i, l), -1.0);
            }
        }
        let m = IsingModel::new(vec![0.0; n], j, 0.0).unwrap();
        embed_model(&m, &clique_embed(n, &g).unwrap(), k).unwrap()
    }

    #[test]
    fn schedule_betas_are_geometric_and_inclusive() {
        let s = AnnealSchedule::geometric(0.1, 10.0, 5, 1).unwrap();
        let betas = s.betas();
        assert_eq!(betas.len(), 5);
        assert!((betas[0] - 0.1).abs() < 1e-12);
        assert!((betas[4] - 10.0).abs() < 1e-9);
        for w in betas.windows(2) {
            assert!((w[1] / w[0] - (100.0f64).powf(0.25)).abs() < 1e-9);
        }
        assert_eq!(AnnealSchedule::geometric(2.0, 2.0, 1, 1).unwrap().betas(), vec![2.0]);
    }

    #[test]
    fn schedule_validation() {
        assert!(AnnealSchedule::geometric(0.0, 1.0, 10, 1).is_err());
        assert!(AnnealSchedule::geometric(1.0, 0.5, 10, 1).is_err());
        assert!(AnnealSchedule::geometric(0.1, 10.0, 0, 1).is_err());
        assert!(AnnealSchedule::geometric(0.1, 10.0, 10, 0).is_err());
        assert!(NoiseConfig { flip_probability: 0.6 }.validate().is_err());
        assert!(NoiseConfig { flip_probability: -0.1 }.validate().is_err());
    }

    #[test]
    fn physical_model_rejects_inconsistencies() {
        assert!(PhysicalModel::new(vec![3, 1], vec![0.0; 2], &[], 0.0).is_err());
        assert!(PhysicalModel::new(vec![1, 3], vec![0.0; 3], &[], 0.0).is_err());
        assert!(matches!(
            PhysicalModel::new(vec![1, 3], vec![0.0; 2], &[(1, 5, 1.0)], 0.0),
            Err(Error::UnknownQubit { qubit: 5 })
        ));
    }

    #[test]
    fn delta_energy_matches_full_recomputation() {
        let pm = PhysicalModel::new(
            vec![0, 2, 5, 6],
            vec![0.3, -0.7, 0.1, 0.9],
            &[(0, 2, -0.8), (2, 5, 0.4), (5, 6, -0.2), (0, 6, 0.6)],
            1.25,
        )
        .unwrap();
        let mut spins = vec![1i8, -1, -1, 1];
        for l in 0..4 {
            let before = pm.energy(&spins);
            let delta = pm.delta_energy(&spins, l);
            spins[l] = -spins[l];
            let after = pm.energy(&spins);
            spins[l] = -spins[l];
            assert!((after - before - delta).abs() < 1e-12, "site {l}");
        }
    }

    #[test]
    fn embedded_and_physical_energies_agree() {
        let em = ferro_clique(8, 2, -1.0);
        let pm = PhysicalModel::from_embedded(&em);
        let mut rng = crate::rng::stream(5, &[1]);
        for _ in 0..20 {
            let spins: Vec<i8> = (0..pm.qubit_count())
                .map(|_| if rng.gen::<bool>() { 1 } else { -1 })
                .collect();
            let a = em.energy(&spins).unwrap();
            let b = pm.energy(&spins);
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_temperature_sweeps_never_raise_energy() {
        let em = ferro_clique(8, 2, -0.5);
        let pm = PhysicalModel::from_embedded(&em);
        let mut rng = crate::rng::stream(6, &[2]);
        let mut state: Vec<i8> = (0..pm.qubit_count())
            .map(|_| if rng.gen::<bool>() { 1 } else { -1 })
            .collect();
        let mut prev = pm.energy(&state);
        for _ in 0..30 {
            sweep_metropolis(&mut state, &pm, 1e12, &mut rng);
            let e = pm.energy(&state);
            assert!(e <= prev + 1e-9);
            prev = e;
        }
    }

    #[test]
    fn single_spin_matches_boltzmann_statistics() {
        // One spin with bias h at fixed beta: P(up) = 1 / (1 + exp(2*beta*h)).
        let (beta, h) = (0.7, 0.6);
        let pm = PhysicalModel::new(vec![0], vec![h], &[], 0.0).unwrap();
        let schedule = AnnealSchedule::geometric(beta, beta, 60, 1).unwrap();
        let set = sample_physical(&pm, 4000, &schedule, &NoiseConfig::default(), 99).unwrap();
        let ups = set.samples.iter().filter(|s| s[0] == 1).count() as f64;
        let p_up = ups / 4000.0;
        let expect = 1.0 / (1.0 + (2.0 * beta * h).exp());
        assert!(
            (p_up - expect).abs() < 0.03,
            "empirical {p_up} vs stationary {expect}"
        );
    }

    #[test]
    fn strong_chains_recover_the_ferromagnetic_ground() {
        let em = ferro_clique(4, 1, -2.0);
        let pm = PhysicalModel::from_embedded(&em);
        // Independent check value: exact physical ground energy.
        let phys = IsingModel::new(
            pm.h.clone(),
            pm.edges
                .iter()
                .map(|&(a, b, w)| ((a as usize, b as usize), w))
                .collect(),
            0.0,
        )
        .unwrap();
        let ground = brute_force_solve(&phys).unwrap();
        let schedule = AnnealSchedule::default_for(pm.qubit_count());
        let set = sample_physical(&pm, 50, &schedule, &NoiseConfig::default(), 7).unwrap();
        let hits = set
            .energies
            .iter()
            .filter(|&&e| (e - ground.energy).abs() < 1e-9)
            .count();
        assert!(hits >= 40, "only {hits}/50 samples reached the ground state");
        // Ground of the fully ferromagnetic clique is all-aligned.
        let logical_ground = em.logical().energy(&SpinVector::new(vec![1; 4]).unwrap()).unwrap();
        assert!((ground.energy - logical_ground - (-2.0) * em.intra_edge_count() as f64).abs() < 1e-9);
    }

    #[test]
    fn loose_chains_break() {
        let em = ferro_clique(8, 2, 0.0);
        let schedule = AnnealSchedule::geometric(0.1, 10.0, 200, 1).unwrap();
        let set = sample(&em, 40, &schedule, &NoiseConfig::default(), 13).unwrap();
        let chains = em.embedding().chains().to_vec();
        let index: std::collections::BTreeMap<u32, usize> = set
            .qubits
            .iter()
            .enumerate()
            .map(|(p, &q)| (q, p))
            .collect();
        let broken = set
            .samples
            .iter()
            .filter(|s| {
                chains.iter().any(|chain| {
                    let first = s[index[&chain[0]]];
                    chain.iter().any(|q| s[index[q]] != first)
                })
            })
            .count();
        assert!(broken > 0, "expected some broken chains at k = 0");
    }

    #[test]
    fn sampling_is_deterministic_and_thread_invariant() {
        let em = ferro_clique(8, 2, -1.0);
        let schedule = AnnealSchedule::geometric(0.1, 10.0, 100, 2).unwrap();
        let noise = NoiseConfig { flip_probability: 0.02 };
        let run = |threads: usize| {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap();
            pool.install(|| sample(&em, 24, &schedule, &noise, 31).unwrap())
        };
        let one = run(1);
        let four = run(4);
        assert_eq!(one, four);
        assert_eq!(one, run(2));
    }

    #[test]
    fn readout_noise_flips_spins_and_reprices_energies() {
        let em = ferro_clique(4, 1, -2.0);
        let pm = PhysicalModel::from_embedded(&em);
        let schedule = AnnealSchedule::geometric(0.1, 10.0, 200, 1).unwrap();
        let clean = sample_physical(&pm, 30, &schedule, &NoiseConfig::default(), 55).unwrap();
        let noisy = sample_physical(
            &pm,
            30,
            &schedule,
            &NoiseConfig { flip_probability: 0.25 },
            55,
        )
        .unwrap();
        assert_ne!(clean.samples, noisy.samples);
        for (s, &e) in noisy.samples.iter().zip(&noisy.energies) {
            assert!((pm.energy(s) - e).abs() < 1e-12);
        }
        // Noise leaves the anneal untouched: zero probability reproduces clean.
        let zero = sample_physical(&pm, 30, &schedule, &NoiseConfig { flip_probability: 0.0 }, 55)
            .unwrap();
        assert_eq!(clean, zero);
    }

    #[test]
    fn rejects_empty_requests() {
        let em = ferro_clique(4, 1, -1.0);
        let schedule = AnnealSchedule::geometric(0.1, 10.0, 10, 1).unwrap();
        assert!(matches!(
            sample(&em, 0, &schedule, &NoiseConfig::default(), 1),
            Err(Error::EmptySamples)
        ));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn delta_energy_is_exact_for_random_models(
            h in proptest::collection::vec(-2.0f64..2.0, 2..6),
            seed in any::<u64>(),
        ) {
            let n = h.len();
            let mut rng = crate::rng::stream(seed, &[7]);
            let mut couplings = Vec::new();
            for a in 0..n as u32 {
                for b in a + 1..n as u32 {
                    if rng.gen_bool(0.7) {
                        couplings.push((a, b, rng.gen_range(-2.0..2.0)));
                    }
                }
            }
            let pm = PhysicalModel::new((0..n as u32).collect(), h, &couplings, 0.5).unwrap();
            let spins: Vec<i8> = (0..n).map(|_| if rng.gen::<bool>() { 1 } else { -1 }).collect();
            for l in 0..n {
                let mut flipped = spins.clone();
                flipped[l] = -flipped[l];
                let direct = pm.energy(&flipped) - pm.energy(&spins);
                prop_assert!((pm.delta_energy(&spins, l) - direct).abs() < 1e-9);
            }
        }
    }
}
