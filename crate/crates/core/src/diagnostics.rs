//! Sample-size requirements of the recovery guarantee and related
//! run-time diagnostics. Everything here is reporting only; the unspecified
//! universal constant is a parameter.

use rand::Rng;
use rand_distr::{Binomial, Distribution};

use crate::pipeline::Clamp;
use crate::{ComparisonDataset, Error, Link, PreferenceMatrix, Result};

/// Inputs of the pair-count and per-pair-count bounds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GuaranteeInputs {
    pub n: f64,
    pub d: f64,
    pub kappa: f64,
    /// Minimum link-scale margin `min |psi(P_ij) - psi(1/2)|`.
    pub delta: f64,
    pub epsilon: f64,
    pub gamma: f64,
    /// Lipschitz constant of the link on `[P_min/2, 1 - P_min/2]`.
    pub lipschitz: f64,
    /// Universal constant of the completion risk bound.
    pub c2: f64,
    /// Pairs actually observed; `None` plugs the required count into the
    /// per-pair bound instead.
    pub observed_pairs: Option<f64>,
}

impl GuaranteeInputs {
    pub fn new(n: usize, d: usize, kappa: f64, delta: f64, epsilon: f64, gamma: f64, lipschitz: f64) -> Self {
        Self { n: n as f64, d: d as f64, kappa, delta, epsilon, gamma, lipschitz, c2: 1.0, observed_pairs: None }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampleRequirements {
    /// `48 C2^2 d^2 log(n) (1+gamma)^2 / (kappa^8 eps^2 Delta^4)`.
    pub m_required: f64,
    /// The same bound written with the failure probability left explicit,
    /// `16 C2^2 d^2 log(2/delta) (1+gamma)^2 / (kappa^8 eps^2 Delta^4)` at
    /// `delta = 2/n^3`; it equals `m_required`.
    pub m_required_explicit: f64,
    /// `16 (1+gamma) m L^2 log(n) / (n^2 Delta^2 eps)`.
    pub k_required: f64,
}

pub fn sample_requirements(inp: &GuaranteeInputs) -> SampleRequirements {
    let ln_n = inp.n.ln();
    let common = inp.c2.powi(2) * inp.d.powi(2) * (1.0 + inp.gamma).powi(2)
        / (inp.kappa.powi(8) * inp.epsilon.powi(2) * inp.delta.powi(4));
    let m_required = 48.0 * common * ln_n;
    let failure = 2.0 / inp.n.powi(3);
    let m_required_explicit = 16.0 * common * (2.0 / failure).ln();
    let m = inp.observed_pairs.unwrap_or(m_required);
    let k_required = 16.0 * (1.0 + inp.gamma) * m * inp.lipschitz.powi(2) * ln_n
        / (inp.n.powi(2) * inp.delta.powi(2) * inp.epsilon);
    SampleRequirements { m_required, m_required_explicit, k_required }
}

/// Noise budget `tau = n sqrt(eps / (1+gamma)) Delta / 4`.
pub fn noise_threshold(n: usize, epsilon: f64, gamma: f64, delta: f64) -> f64 {
    n as f64 * (epsilon / (1.0 + gamma)).sqrt() * delta / 4.0
}

/// Comparisons per pair that bound the link-scale noise by `tau`:
/// `m L^2 log(n) / tau^2`.
pub fn noise_trials(m: usize, lipschitz: f64, n: usize, tau: f64) -> f64 {
    m as f64 * lipschitz.powi(2) * (n as f64).ln() / tau.powi(2)
}

/// Smallest off-diagonal entry.
pub fn min_probability(p: &PreferenceMatrix) -> f64 {
    let n = p.n();
    (0..n)
        .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
        .map(|(i, j)| p.get(i, j))
        .fold(f64::INFINITY, f64::min)
}

/// `min_{i != j} |psi(P_ij) - psi(1/2)|`.
pub fn link_margin(p: &PreferenceMatrix, link: Link) -> f64 {
    let n = p.n();
    let centre = link.forward(0.5);
    (0..n)
        .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
        .map(|(i, j)| (link.forward(p.get(i, j)) - centre).abs())
        .fold(f64::INFINITY, f64::min)
}

/// Simulates `trials` rounds of `k` comparisons per support pair and
/// returns the fraction of rounds whose link-scale noise matrix
/// `N_ij = psi(P^_ij) - psi(P_ij)` (one entry per pair) has Frobenius norm at
/// most `tau`. Empirical rates are clamped to `[1/(2k), 1 - 1/(2k)]`.
#[allow(clippy::too_many_arguments)]
pub fn noise_bound_check<R: Rng + ?Sized>(
    p: &PreferenceMatrix,
    support: &[(usize, usize)],
    k: u64,
    link: Link,
    tau: f64,
    trials: usize,
    rng: &mut R,
) -> Result<f64> {
    if trials == 0 || k == 0 {
        return Err(Error::InvalidInput("need at least one trial and one comparison".into()));
    }
    let n = p.n();
    if support.is_empty() {
        return Ok(1.0);
    }
    let p_min = min_probability(p);
    let lipschitz = link.lipschitz_on(p_min / 2.0);
    let needed = noise_trials(support.len(), lipschitz, n, tau);
    if (k as f64) < needed {
        log::warn!("K = {k} below the noise premise m L^2 log n / tau^2 = {needed:.1}");
    }
    let level = 1.0 / (2.0 * k as f64);
    let laws = support
        .iter()
        .map(|&(i, j)| {
            Binomial::new(k, p.get(i, j))
                .map(|b| (b, link.forward(p.get(i, j))))
                .map_err(|e| Error::InvalidInput(format!("binomial for pair ({i}, {j}): {e}")))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut within = 0usize;
    for _ in 0..trials {
        let norm2: f64 = laws
            .iter()
            .map(|(law, truth)| {
                let rate = (law.sample(rng) as f64 / k as f64).clamp(level, 1.0 - level);
                (link.forward(rate) - truth).powi(2)
            })
            .sum();
        if norm2.sqrt() <= tau {
            within += 1;
        }
    }
    Ok(within as f64 / trials as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MarginSource {
    GroundTruth,
    /// Computed on the clamped empirical matrix over the observed pairs.
    Empirical,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiagnosticSettings {
    pub link: Link,
    pub epsilon: f64,
    pub gamma: f64,
    pub c2: f64,
    pub clamp: Clamp,
}

impl Default for DiagnosticSettings {
    fn default() -> Self {
        Self { link: Link::Logit, epsilon: 0.1, gamma: 5.0, c2: 1.0, clamp: Clamp::PerPair }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Diagnostics {
    pub n: usize,
    pub d: usize,
    pub m: usize,
    pub p_min: f64,
    pub delta: f64,
    pub delta_source: MarginSource,
    pub kappa: f64,
    pub gamma: f64,
    pub epsilon: f64,
    pub lipschitz: f64,
    pub tau: f64,
    pub requirements: SampleRequirements,
    /// Mean comparisons per observed pair.
    pub mean_trials: f64,
}

pub fn diagnose(
    data: &ComparisonDataset,
    truth: Option<&PreferenceMatrix>,
    settings: &DiagnosticSettings,
) -> Result<Diagnostics> {
    let n = data.n();
    if let Some(t) = truth {
        if t.n() != n {
            return Err(Error::DimensionMismatch(format!("truth over {} items, data over {n}", t.n())));
        }
    }
    if data.m() == 0 {
        return Err(Error::InvalidInput("dataset has no compared pairs".into()));
    }
    let link = settings.link;
    let clamped: Vec<f64> = data
        .pairs()
        .iter()
        .map(|c| {
            let level = settings.clamp.level(c.trials);
            c.rate().clamp(level, 1.0 - level)
        })
        .collect();
    let p_min = clamped.iter().map(|&p| p.min(1.0 - p)).fold(f64::INFINITY, f64::min);
    let (delta, delta_source) = match truth {
        Some(t) => (link_margin(t, link), MarginSource::GroundTruth),
        None => {
            let centre = link.forward(0.5);
            let margin = clamped.iter().map(|&p| (link.forward(p) - centre).abs()).fold(f64::INFINITY, f64::min);
            (margin, MarginSource::Empirical)
        }
    };
    let lipschitz = link.lipschitz_on(p_min / 2.0);
    let kappa = data.features().kappa();
    let inputs = GuaranteeInputs {
        c2: settings.c2,
        observed_pairs: Some(data.m() as f64),
        ..GuaranteeInputs::new(n, data.d(), kappa, delta, settings.epsilon, settings.gamma, lipschitz)
    };
    Ok(Diagnostics {
        n,
        d: data.d(),
        m: data.m(),
        p_min,
        delta,
        delta_source,
        kappa,
        gamma: settings.gamma,
        epsilon: settings.epsilon,
        lipschitz,
        tau: noise_threshold(n, settings.epsilon, settings.gamma, delta),
        requirements: sample_requirements(&inputs),
        mean_trials: data.pairs().iter().map(|c| c.trials as f64).sum::<f64>() / data.m() as f64,
    })
}
