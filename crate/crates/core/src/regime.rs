//! Scaling laws `σ = c_σ δ^{p_σ}`, `μ = c_μ δ^{p_μ}` and their limit cells.
//!
//! The limits are
//!
//! ```text
//! b = lim σ/δ,    γ = lim √(σμ),    β = lim μδ
//! ```
//!
//! and follow from exponent arithmetic alone.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::dtn::Height;
use crate::ebc::EbcFamily;
use crate::error::{Error, Result};

/// Exponents closer to zero than this are treated as zero.
const EXPONENT_TOL: f64 = 1e-12;
/// Relative tolerance of the identity `β = γ²/b` between finite limits.
const IDENTITY_RTOL: f64 = 1e-10;

/// Power-law layer conductivities.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScalingLaw {
    pub c_sigma: f64,
    pub p_sigma: f64,
    pub c_mu: f64,
    pub p_mu: f64,
}

impl ScalingLaw {
    pub fn new(c_sigma: f64, p_sigma: f64, c_mu: f64, p_mu: f64) -> Result<Self> {
        let law = Self { c_sigma, p_sigma, c_mu, p_mu };
        law.validate()?;
        Ok(law)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.c_sigma > 0.0 && self.c_mu > 0.0 && self.c_sigma.is_finite() && self.c_mu.is_finite()) {
            return Err(Error::InvalidArgument("scaling coefficients must be positive and finite".into()));
        }
        if !(self.p_sigma.is_finite() && self.p_mu.is_finite()) {
            return Err(Error::InvalidArgument("scaling exponents must be finite".into()));
        }
        Ok(())
    }

    pub fn sigma(&self, delta: f64) -> f64 {
        self.c_sigma * delta.powf(self.p_sigma)
    }

    pub fn mu(&self, delta: f64) -> f64 {
        self.c_mu * delta.powf(self.p_mu)
    }
}

/// A limit in `[0, ∞]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value")]
pub enum ExtendedLimit {
    Zero,
    Finite(f64),
    Infinite,
}

impl ExtendedLimit {
    /// Limit of `c δ^p` as `δ → 0`.
    pub fn of_power(c: f64, p: f64) -> Self {
        if p.abs() <= EXPONENT_TOL {
            ExtendedLimit::Finite(c)
        } else if p > 0.0 {
            ExtendedLimit::Zero
        } else {
            ExtendedLimit::Infinite
        }
    }

    fn rank(self) -> u8 {
        match self {
            ExtendedLimit::Zero => 0,
            ExtendedLimit::Finite(_) => 1,
            ExtendedLimit::Infinite => 2,
        }
    }

    pub fn value(self) -> Option<f64> {
        match self {
            ExtendedLimit::Finite(v) => Some(v),
            _ => None,
        }
    }

    /// The three categories, with `finite` standing in for the finite value.
    pub fn categories(finite: f64) -> [ExtendedLimit; 3] {
        [ExtendedLimit::Zero, ExtendedLimit::Finite(finite), ExtendedLimit::Infinite]
    }
}

impl fmt::Display for ExtendedLimit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtendedLimit::Zero => f.write_str("0"),
            ExtendedLimit::Finite(v) => write!(f, "{v}"),
            ExtendedLimit::Infinite => f.write_str("∞"),
        }
    }
}

/// `(b, γ, β)` of a law.
pub fn limits_of(law: &ScalingLaw) -> (ExtendedLimit, ExtendedLimit, ExtendedLimit) {
    (
        ExtendedLimit::of_power(law.c_sigma, law.p_sigma - 1.0),
        ExtendedLimit::of_power((law.c_sigma * law.c_mu).sqrt(), 0.5 * (law.p_sigma + law.p_mu)),
        ExtendedLimit::of_power(law.c_mu, law.p_mu + 1.0),
    )
}

/// Classification of one limit triple.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegimeCell {
    pub case_id: u8,
    pub b: ExtendedLimit,
    pub gamma: ExtendedLimit,
    pub beta: ExtendedLimit,
    /// Present exactly when the triple is feasible.
    pub family: Option<EbcFamily>,
    pub requires_sigma_delta_cubed: bool,
    pub feasible: bool,
    pub reason: Option<String>,
}

/// `γ²/b` in the extended sense; `None` for the indeterminate forms `0/0` and `∞/∞`.
fn gamma_sq_over_b(b: ExtendedLimit, gamma: ExtendedLimit) -> Option<ExtendedLimit> {
    use ExtendedLimit::*;
    match (gamma, b) {
        (Zero, Zero) | (Infinite, Infinite) => None,
        (Zero, _) | (Finite(_), Infinite) => Some(Zero),
        (Finite(_), Zero) | (Infinite, _) => Some(Infinite),
        (Finite(g), Finite(b)) => Some(Finite(g * g / b)),
    }
}

fn identity_holds(b: ExtendedLimit, gamma: ExtendedLimit, beta: ExtendedLimit) -> Option<String> {
    let expected = gamma_sq_over_b(b, gamma)?;
    let ok = match (expected, beta) {
        (ExtendedLimit::Finite(e), ExtendedLimit::Finite(v)) => (e - v).abs() <= IDENTITY_RTOL * e.abs().max(v.abs()),
        (e, v) => e.rank() == v.rank(),
    };
    (!ok).then(|| format!("β = γ²/b violated: β = {beta} but γ²/b = {expected} (b = {b}, γ = {gamma})"))
}

fn family_of(b: ExtendedLimit, gamma: ExtendedLimit, beta: ExtendedLimit) -> EbcFamily {
    use ExtendedLimit::*;
    match (b, gamma, beta) {
        (Zero, Zero, _) => EbcFamily::DecoupledNeumann,
        (Zero, Finite(g), Infinite) => EbcFamily::DtnCoupling { gamma: g, height: Height::Infinite },
        (Zero, Infinite, Infinite) => EbcFamily::ConstantTraceDecoupled,
        (Finite(b), Zero, Zero) => EbcFamily::RobinContact { b },
        (Finite(_), Finite(g), Finite(beta)) => EbcFamily::DtnCoupling { gamma: g, height: Height::Finite(beta / g) },
        (Finite(b), Infinite, Infinite) => EbcFamily::ConstantTraceRobin { b },
        (Infinite, _, Zero) => EbcFamily::PerfectTransmission,
        (Infinite, Infinite, Finite(beta)) => EbcFamily::FluxJumpLB { beta },
        (Infinite, Infinite, Infinite) => EbcFamily::ConstantTraceTransmission,
        other => unreachable!("feasible triple without a family: {other:?}"),
    }
}

/// Classify a limit triple directly (the side-condition flag is left unset).
pub fn classify_limits(b: ExtendedLimit, gamma: ExtendedLimit, beta: ExtendedLimit) -> RegimeCell {
    let case_id = b.rank() + 1;
    let reason = identity_holds(b, gamma, beta);
    let feasible = reason.is_none();
    RegimeCell {
        case_id,
        b,
        gamma,
        beta,
        family: feasible.then(|| family_of(b, gamma, beta)),
        requires_sigma_delta_cubed: false,
        feasible,
        reason,
    }
}

/// Table cell of a scaling law.
pub fn classify(law: &ScalingLaw) -> RegimeCell {
    let (b, gamma, beta) = limits_of(law);
    let mut cell = classify_limits(b, gamma, beta);
    cell.requires_sigma_delta_cubed = cell.case_id == 3 && law.p_mu > law.p_sigma;
    cell
}

/// Whether `σ δ³ → 0`.
pub fn check_sigma_delta_cubed(law: &ScalingLaw) -> bool {
    law.p_sigma + 3.0 > 0.0
}
