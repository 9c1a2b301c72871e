//! Portfolio-selection problem generator: synthetic price walks, per-asset
//! returns and covariances, and the QUBO that balances return against a
//! squared budget penalty and covariance risk. Each asset's holding fraction
//! is binary-expanded over w bits with granularity 2^(1-w).

use rand::Rng;

use crate::error::{Error, Result};
use crate::ising::{CouplingMap, IsingModel, Qubo};
use crate::rng::{derive_seed, stream};

const MARKET_STREAM: u64 = 0x4d41_524b;
const INSTANCE_STREAM: u64 = 0x494e_5354;

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteConfig {
    pub assets: usize,
    pub bits_per_asset: usize,
    pub budget: f64,
    /// Price points per asset; returns and covariance use consecutive pairs.
    pub price_points: usize,
    /// Objective weights: [return, budget penalty, risk].
    pub theta: [f64; 3],
    /// Per-step relative price change is uniform on [-volatility, volatility].
    pub volatility: f64,
    pub seed: u64,
}

impl SuiteConfig {
    pub fn new(assets: usize, seed: u64) -> Self {
        SuiteConfig {
            assets,
            bits_per_asset: 4,
            budget: 1.0,
            price_points: 20,
            theta: [1.0, 10.0, 1.0],
            volatility: 0.25,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::InvalidConfig(msg));
        if self.assets == 0 {
            return fail("assets must be positive".into());
        }
        if self.bits_per_asset == 0 || self.bits_per_asset > 32 {
            return fail(format!(
                "bits_per_asset must be in 1..=32, got {}",
                self.bits_per_asset
            ));
        }
        if self.price_points < 2 {
            return fail(format!(
                "need at least 2 price points, got {}",
                self.price_points
            ));
        }
        if !(self.volatility >= 0.0 && self.volatility < 1.0) {
            return fail(format!("volatility must be in [0,1), got {}", self.volatility));
        }
        if !(self.budget > 0.0 && self.budget.is_finite()) {
            return fail(format!("budget must be positive, got {}", self.budget));
        }
        for (i, &t) in self.theta.iter().enumerate() {
            if !(t >= 0.0 && t.is_finite()) {
                return fail(format!("theta[{i}] must be non-negative, got {t}"));
            }
        }
        Ok(())
    }

    pub fn spin_count(&self) -> usize {
        self.assets * self.bits_per_asset
    }

    /// Holding-fraction step 2^(1-w): bit k of an asset contributes
    /// granularity * 2^(k-1) of the budget.
    pub fn granularity(&self) -> f64 {
        (2.0f64).powi(1 - self.bits_per_asset as i32)
    }
}

/// Synthetic market observations for one problem instance.
#[derive(Debug, Clone, PartialEq)]
pub struct MarketData {
    /// prices[asset][time].
    pub prices: Vec<Vec<f64>>,
    /// Mean per-step simple return of each asset.
    pub returns: Vec<f64>,
    /// Granularity-scaled sample covariance of the price series.
    pub covariance: Vec<Vec<f64>>,
}

impl MarketData {
    /// Derives returns and covariance from raw price series. All series must
    /// have the same positive length >= 2; prices must be positive.
    pub fn from_prices(prices: Vec<Vec<f64>>, granularity: f64) -> Result<Self> {
        let points = prices.first().map(|p| p.len()).unwrap_or(0);
        if prices.is_empty() || points < 2 {
            return Err(Error::InvalidConfig(
                "need at least one asset with two price points".into(),
            ));
        }
        for series in &prices {
            if series.len() != points {
                return Err(Error::DimensionMismatch {
                    expected: points,
                    actual: series.len(),
                });
            }
            // NaN is caught here too, not just non-positive values.
            if series.iter().any(|&p| p.is_nan() || p <= 0.0) {
                return Err(Error::InvalidConfig("prices must be positive".into()));
            }
        }

        let returns = prices
            .iter()
            .map(|s| {
                s.windows(2).map(|w| w[1] / w[0] - 1.0).sum::<f64>() / (points - 1) as f64
            })
            .collect();

        let means: Vec<f64> = prices
            .iter()
            .map(|s| s.iter().sum::<f64>() / points as f64)
            .collect();
        let scale = granularity * granularity / (points - 1) as f64;
        let m = prices.len();
        let mut covariance = vec![vec![0.0; m]; m];
        for i in 0..m {
            for j in i..m {
                let c: f64 = (0..points)
                    .map(|l| (prices[i][l] - means[i]) * (prices[j][l] - means[j]))
                    .sum();
                covariance[i][j] = scale * c;
                covariance[j][i] = scale * c;
            }
        }
        Ok(MarketData {
            prices,
            returns,
            covariance,
        })
    }
}

/// Draws one market: initial prices uniform on [1, 100], then a multiplicative
/// walk with uniform per-step changes. Deterministic in `cfg.seed`.
pub fn generate_market(cfg: &SuiteConfig) -> Result<MarketData> {
    cfg.validate()?;
    let mut rng = stream(cfg.seed, &[MARKET_STREAM]);
    let prices = (0..cfg.assets)
        .map(|_| {
            let mut series = Vec::with_capacity(cfg.price_points);
            series.push(rng.gen_range(1.0..=100.0));
            for _ in 1..cfg.price_points {
                let step = rng.gen_range(-cfg.volatility..=cfg.volatility);
                let last = *series.last().unwrap();
                series.push(last * (1.0 + step));
            }
            series
        })
        .collect();
    MarketData::from_prices(prices, cfg.granularity())
}

/// Builds the selection QUBO for one market.
///
/// With y_i the binary-expanded holding of asset i, the objective being
/// minimized is
///   -t1 * sum_i r_i y_i + t2 * b^2 * (p_w sum_i y_i - 1)^2 + t3 * y' C y,
/// fully expanded to linear and pairwise terms (diagonal quadratic terms fold
/// into the linear ones since x^2 = x).
pub fn build_qubo(cfg: &SuiteConfig, market: &MarketData) -> Result<Qubo> {
    cfg.validate()?;
    if market.returns.len() != cfg.assets {
        return Err(Error::DimensionMismatch {
            expected: cfg.assets,
            actual: market.returns.len(),
        });
    }
    let n = cfg.spin_count();
    let w = cfg.bits_per_asset;
    let pw = cfg.granularity();
    let b2 = cfg.budget * cfg.budget;
    let [t1, t2, t3] = cfg.theta;
    let weight = |u: usize| (1u64 << (u % w)) as f64;
    let asset = |u: usize| u / w;

    let mut linear = vec![0.0; n];
    for (u, q) in linear.iter_mut().enumerate() {
        let g = weight(u);
        let a = asset(u);
        *q = -t1 * g * market.returns[a] - 2.0 * t2 * b2 * pw * g
            + t2 * b2 * pw * pw * g * g
            + t3 * market.covariance[a][a] * g * g;
    }
    let mut quadratic = CouplingMap::new();
    for u in 0..n {
        for v in u + 1..n {
            let gg = weight(u) * weight(v);
            let q = 2.0 * t2 * b2 * pw * pw * gg
                + 2.0 * t3 * market.covariance[asset(u)][asset(v)] * gg;
            if q != 0.0 {
                quadratic.insert((u, v), q);
            }
        }
    }
    Qubo::new(linear, quadratic, t2 * b2)
}

/// Generates `count` independent instances: market draw, QUBO, Ising
/// conversion, then normalization so the largest |h| or |J| is one.
pub fn generate_suite(cfg: &SuiteConfig, count: usize) -> Result<Vec<IsingModel>> {
    cfg.validate()?;
    (0..count)
        .map(|i| {
            let mut instance = cfg.clone();
            instance.seed = derive_seed(cfg.seed, &[INSTANCE_STREAM, i as u64]);
            let market = generate_market(&instance)?;
            Ok(build_qubo(&instance, &market)?.to_ising().normalized())
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    /// The objective the QUBO must reproduce (negated), evaluated directly
    /// from market data: return reward minus budget and risk penalties.
    fn objective(cfg: &SuiteConfig, market: &MarketData, x: &[u8]) -> f64 {
        let w = cfg.bits_per_asset;
        let pw = cfg.granularity();
        let [t1, t2, t3] = cfg.theta;
        let holdings: Vec<f64> = (0..cfg.assets)
            .map(|a| {
                (0..w)
                    .map(|k| (1u64 << k) as f64 * x[a * w + k] as f64)
                    .sum()
            })
            .collect();
        let reward: f64 = (0..cfg.assets).map(|a| market.returns[a] * holdings[a]).sum();
        let total: f64 = holdings.iter().sum();
        let budget = cfg.budget * cfg.budget * (pw * total - 1.0) * (pw * total - 1.0);
        let mut risk = 0.0;
        for i in 0..cfg.assets {
            for j in 0..cfg.assets {
                risk += market.covariance[i][j] * holdings[i] * holdings[j];
            }
        }
        t1 * reward - t2 * budget - t3 * risk
    }

    #[test]
    fn granularity_matches_bit_count() {
        let mut cfg = SuiteConfig::new(2, 0);
        assert_eq!(cfg.granularity(), 0.125);
        cfg.bits_per_asset = 1;
        assert_eq!(cfg.granularity(), 1.0);
        cfg.bits_per_asset = 2;
        assert_eq!(cfg.granularity(), 0.5);
    }

    #[test]
    fn returns_and_covariance_from_known_prices() {
        let md = MarketData::from_prices(
            vec![vec![1.0, 2.0, 3.0], vec![2.0, 4.0, 6.0]],
            0.125,
        )
        .unwrap();
        // Per-step returns: asset 0: (1.0 + 0.5)/2, asset 1 identical.
        assert_eq!(md.returns, vec![0.75, 0.75]);
        // Deviations (-1,0,1) and (-2,0,2); sample covariance over 2 dof,
        // scaled by granularity^2 = 1/64.
        assert!((md.covariance[0][0] - 0.015625).abs() < 1e-15);
        assert!((md.covariance[0][1] - 0.03125).abs() < 1e-15);
        assert!((md.covariance[1][0] - 0.03125).abs() < 1e-15);
        assert!((md.covariance[1][1] - 0.0625).abs() < 1e-15);
    }

    #[test]
    fn from_prices_rejects_bad_series() {
        assert!(MarketData::from_prices(vec![], 0.125).is_err());
        assert!(MarketData::from_prices(vec![vec![1.0]], 0.125).is_err());
        assert!(MarketData::from_prices(vec![vec![1.0, 2.0], vec![1.0]], 0.125).is_err());
        assert!(MarketData::from_prices(vec![vec![1.0, -2.0]], 0.125).is_err());
    }

    #[test]
    fn market_prices_stay_positive_and_start_in_range() {
        for seed in 0..5 {
            let cfg = SuiteConfig::new(3, seed);
            let md = generate_market(&cfg).unwrap();
            assert_eq!(md.prices.len(), 3);
            for series in &md.prices {
                assert_eq!(series.len(), 20);
                assert!((1.0..=100.0).contains(&series[0]));
                assert!(series.iter().all(|&p| p > 0.0));
            }
        }
    }

    #[test]
    fn zero_volatility_gives_zero_covariance() {
        let mut cfg = SuiteConfig::new(2, 9);
        cfg.volatility = 0.0;
        let md = generate_market(&cfg).unwrap();
        for series in &md.prices {
            assert!(series.windows(2).all(|w| w[0] == w[1]));
        }
        // Constant series: returns are exactly zero (p/p - 1), covariance is
        // zero up to the rounding of the series mean.
        for row in &md.covariance {
            assert!(row.iter().all(|&c| c.abs() < 1e-20));
        }
        assert!(md.returns.iter().all(|&r| r == 0.0));
    }

    #[test]
    fn qubo_negates_the_market_objective_exhaustively() {
        let mut cfg = SuiteConfig::new(2, 17);
        cfg.bits_per_asset = 2;
        let small = generate_market(&cfg).unwrap();
        check_duality(&cfg, &small);

        let mut cfg = SuiteConfig::new(3, 18);
        cfg.theta = [2.5, 7.0, 0.75];
        cfg.budget = 1.5;
        let md = generate_market(&cfg).unwrap();
        check_duality(&cfg, &md);
    }

    fn check_duality(cfg: &SuiteConfig, market: &MarketData) {
        let qubo = build_qubo(cfg, market).unwrap();
        let n = cfg.spin_count();
        for bits in 0..1u64 << n {
            let x: Vec<u8> = (0..n).map(|u| (bits >> u & 1) as u8).collect();
            let e = qubo.energy(&x).unwrap();
            let f = objective(cfg, market, &x);
            assert!(
                (e + f).abs() < 1e-9,
                "bits {bits}: qubo {e} vs objective {f}"
            );
        }
    }

    #[test]
    fn disabling_penalties_leaves_a_linear_problem() {
        let mut cfg = SuiteConfig::new(2, 3);
        cfg.theta = [1.0, 0.0, 0.0];
        let md = generate_market(&cfg).unwrap();
        let qubo = build_qubo(&cfg, &md).unwrap();
        assert!(qubo.quadratic().is_empty());
        assert_eq!(qubo.offset(), 0.0);
        // Return-only objective: pick every bit of positive-return assets.
        let ising = qubo.to_ising();
        let ground = crate::ising::brute_force_solve(&ising).unwrap();
        let best = &ground.states[0];
        for u in 0..cfg.spin_count() {
            let expect = if md.returns[u / 4] > 0.0 { 1 } else { -1 };
            assert_eq!(best[u], expect, "bit {u}");
        }
    }

    #[test]
    fn suite_is_normalized_and_deterministic() {
        let cfg = SuiteConfig::new(2, 41);
        let a = generate_suite(&cfg, 4).unwrap();
        let b = generate_suite(&cfg, 4).unwrap();
        assert_eq!(a, b);
        for m in &a {
            assert_eq!(m.n(), 8);
            let hmax = m.h().iter().fold(0.0f64, |acc, &v| acc.max(v.abs()));
            let jmax = m
                .couplings()
                .values()
                .fold(0.0f64, |acc, &v| acc.max(v.abs()));
            let top = hmax.max(jmax);
            assert!((top - 1.0).abs() < 1e-12, "largest coefficient {top}");
        }
        // Instances differ from each other and across seeds.
        assert_ne!(a[0], a[1]);
        let c = generate_suite(&SuiteConfig::new(2, 42), 1).unwrap();
        assert_ne!(a[0], c[0]);
    }

    #[test]
    fn invalid_configs_are_rejected() {
        let mut cfg = SuiteConfig::new(0, 1);
        assert!(cfg.validate().is_err());
        cfg.assets = 2;
        cfg.volatility = 1.0;
        assert!(cfg.validate().is_err());
        cfg.volatility = 0.25;
        cfg.theta = [1.0, -0.5, 1.0];
        assert!(cfg.validate().is_err());
        cfg.theta = [1.0, 10.0, 1.0];
        cfg.price_points = 1;
        assert!(cfg.validate().is_err());
        cfg.price_points = 20;
        assert!(cfg.validate().is_ok());
    }
}
