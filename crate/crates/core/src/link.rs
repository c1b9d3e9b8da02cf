//! Link functions mapping win probabilities onto the real line.

use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::fmt;
use std::str::FromStr;

use crate::Error;

/// A strictly increasing bijection `[0, 1] -> R` with `psi(1 - p) = -psi(p)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Link {
    /// `log(p / (1 - p))`, inverse of the logistic sigmoid.
    #[default]
    Logit,
    /// Inverse of the standard normal CDF.
    Probit,
}

impl Link {
    pub fn forward(self, p: f64) -> f64 {
        match self {
            Link::Logit => logit(p),
            Link::Probit => normal_quantile(p),
        }
    }

    pub fn inverse(self, x: f64) -> f64 {
        match self {
            Link::Logit => logistic(x),
            Link::Probit => normal_cdf(x),
        }
    }

    /// Derivative `psi'(p)`.
    pub fn derivative(self, p: f64) -> f64 {
        match self {
            Link::Logit => 1.0 / (p * (1.0 - p)),
            Link::Probit => {
                let x = normal_quantile(p);
                (2.0 * PI).sqrt() * (0.5 * x * x).exp()
            }
        }
    }

    /// Lipschitz constant of the link on `[lo, 1 - lo]`.
    ///
    /// Both links have `|psi'|` minimal at 1/2 and growing symmetrically
    /// towards the ends, so the maximum sits at the interval endpoint.
    pub fn lipschitz_on(self, lo: f64) -> f64 {
        let lo = lo.min(1.0 - lo);
        self.derivative(lo)
    }
}

impl fmt::Display for Link {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Link::Logit => f.write_str("logit"),
            Link::Probit => f.write_str("probit"),
        }
    }
}

impl FromStr for Link {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "logit" => Ok(Link::Logit),
            "probit" => Ok(Link::Probit),
            other => Err(Error::Parse(format!("unknown link function `{other}`"))),
        }
    }
}

fn logit(p: f64) -> f64 {
    p.ln() - (-p).ln_1p()
}

fn logistic(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// Standard normal CDF through the complementary error function.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x * FRAC_1_SQRT_2)
}

// Acklam's rational approximation (relative error below 1.15e-9).
const A: [f64; 6] = [
    -3.969_683_028_665_376e1,
    2.209_460_984_245_205e2,
    -2.759_285_104_469_687e2,
    1.383_577_518_672_690e2,
    -3.066_479_806_614_716e1,
    2.506_628_277_459_239,
];
const B: [f64; 5] = [
    -5.447_609_879_822_406e1,
    1.615_858_368_580_409e2,
    -1.556_989_798_598_866e2,
    6.680_131_188_771_972e1,
    -1.328_068_155_288_572e1,
];
const C: [f64; 6] = [
    -7.784_894_002_430_293e-3,
    -3.223_964_580_411_365e-1,
    -2.400_758_277_161_838,
    -2.549_732_539_343_734,
    4.374_664_141_464_968,
    2.938_163_982_698_783,
];
const D: [f64; 4] = [
    7.784_695_709_041_462e-3,
    3.224_671_290_700_398e-1,
    2.445_134_137_142_996,
    3.754_408_661_907_416,
];
const P_LOW: f64 = 0.024_25;

/// Inverse standard normal CDF.
///
/// Acklam's piecewise rational approximation followed by one Halley step
/// against `erfc`, which brings the result to within a few ulps of the
/// exact quantile over the open unit interval.
pub fn normal_quantile(p: f64) -> f64 {
    if p <= 0.0 {
        return f64::NEG_INFINITY;
    }
    if p >= 1.0 {
        return f64::INFINITY;
    }
    let x = if p < P_LOW {
        let q = (-2.0 * p.ln()).sqrt();
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else if p <= 1.0 - P_LOW {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    } else {
        let q = (-2.0 * (-p).ln_1p()).sqrt();
        -(((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    };
    let e = normal_cdf(x) - p;
    let u = e * (2.0 * PI).sqrt() * (0.5 * x * x).exp();
    x - u / (1.0 + 0.5 * x * u)
}
