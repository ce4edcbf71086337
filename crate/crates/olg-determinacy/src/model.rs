//! Primitives of the production economy: utility families, production
//! functions, factor prices, and the young agent's savings problem.
//!
//! A model is a tuple `(beta, f, u, v)`: discount factor, production
//! function, and period utilities of the young and the old. The young earn
//! the wage `w(k) = f(k) - k f'(k)`, split it between consumption and
//! savings `s`, and consume `R s` when old, where `R = f'(k)` is the rental
//! rate. Savings solve the first-order condition
//!
//! ```text
//! -u'(w - s) + beta * R * v'(R s) = 0.
//! ```
//!
//! Utility convention: the `log` family for the young carries a marginal
//! weight of `1 - beta` in model configs, which makes the log/log economy's
//! savings rule exactly `s = beta * w` (the share form of log preferences).
//! Explicit weights override this; CRRA utilities are unweighted.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::roots;

/// Absolute tolerance on the savings first-order condition.
pub const DEFAULT_FOC_TOL: f64 = 1e-12;

/// `|rho - 1|` below this routes CES evaluation to the Cobb-Douglas branch,
/// where the exponent `1/(1-rho)` is singular.
pub const CD_BRANCH_TOL: f64 = 1e-9;

pub type DerivFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Clone)]
enum UtilityFamily {
    Log,
    Crra { gamma: f64 },
    /// First and second derivative evaluators supplied by the caller.
    Custom { first: DerivFn, second: DerivFn },
}

/// A period utility, represented by its first two derivatives on `(0, inf)`.
///
/// Invariants: `u' > 0`, `u'' < 0`, and `u'(x) -> inf` as `x -> 0` so that
/// savings problems always have an interior solution.
#[derive(Clone)]
pub struct UtilitySpec {
    family: UtilityFamily,
    weight: f64,
}

impl UtilitySpec {
    /// `u(x) = ln x`, so `u'(x) = 1/x`.
    pub fn log() -> Self {
        UtilitySpec {
            family: UtilityFamily::Log,
            weight: 1.0,
        }
    }

    /// Constant relative risk aversion: `u'(x) = x^(-gamma)`, `gamma > 0`.
    pub fn crra(gamma: f64) -> Result<Self> {
        if !(gamma > 0.0) || !gamma.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "crra gamma must be positive, got {gamma}"
            )));
        }
        Ok(UtilitySpec {
            family: UtilityFamily::Crra { gamma },
            weight: 1.0,
        })
    }

    /// Plug in arbitrary first/second derivative evaluators.
    pub fn custom(first: DerivFn, second: DerivFn) -> Self {
        UtilitySpec {
            family: UtilityFamily::Custom { first, second },
            weight: 1.0,
        }
    }

    /// Scales marginal utility by a positive constant.
    pub fn with_weight(mut self, weight: f64) -> Result<Self> {
        if !(weight > 0.0) || !weight.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "utility weight must be positive, got {weight}"
            )));
        }
        self.weight = weight;
        Ok(self)
    }

    pub fn weight(&self) -> f64 {
        self.weight
    }

    /// Marginal utility `u'(x)`.
    pub fn mu(&self, x: f64) -> f64 {
        self.weight
            * match &self.family {
                UtilityFamily::Log => 1.0 / x,
                UtilityFamily::Crra { gamma } => x.powf(-gamma),
                UtilityFamily::Custom { first, .. } => first(x),
            }
    }

    /// `u''(x)`.
    pub fn mu_prime(&self, x: f64) -> f64 {
        self.weight
            * match &self.family {
                UtilityFamily::Log => -1.0 / (x * x),
                UtilityFamily::Crra { gamma } => -gamma * x.powf(-gamma - 1.0),
                UtilityFamily::Custom { second, .. } => second(x),
            }
    }

    /// Relative risk aversion `-x u''(x) / u'(x)`. Exact (weight-free) for
    /// the analytic families.
    pub fn rra(&self, x: f64) -> f64 {
        match &self.family {
            UtilityFamily::Log => 1.0,
            UtilityFamily::Crra { gamma } => *gamma,
            UtilityFamily::Custom { first, second } => -x * second(x) / first(x),
        }
    }

    /// Constant relative risk aversion of the family, if it has one.
    pub fn constant_rra(&self) -> Option<f64> {
        match &self.family {
            UtilityFamily::Log => Some(1.0),
            UtilityFamily::Crra { gamma } => Some(*gamma),
            UtilityFamily::Custom { .. } => None,
        }
    }

    fn family_name(&self) -> &'static str {
        match self.family {
            UtilityFamily::Log => "log",
            UtilityFamily::Crra { .. } => "crra",
            UtilityFamily::Custom { .. } => "custom",
        }
    }
}

impl fmt::Debug for UtilitySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.family {
            UtilityFamily::Log => write!(f, "UtilitySpec::log(weight={})", self.weight),
            UtilityFamily::Crra { gamma } => {
                write!(f, "UtilitySpec::crra({gamma}, weight={})", self.weight)
            }
            UtilityFamily::Custom { .. } => {
                write!(f, "UtilitySpec::custom(weight={})", self.weight)
            }
        }
    }
}

/// Production technology `f(k) = F(k, 1)`, gross of undepreciated capital.
#[derive(Debug, Clone, PartialEq)]
pub enum ProductionSpec {
    /// CES technology with elasticity of substitution `1/rho`:
    /// `f(k) = A (alpha k^(1-rho) + 1 - alpha)^(1/(1-rho)) + (1-delta) k`,
    /// collapsing to `A k^alpha + (1-delta) k` at `rho = 1`.
    Ces {
        tfp: f64,
        alpha: f64,
        rho: f64,
        delta: f64,
    },
    /// Quadratic around `kstar` with prescribed level, slope, and curvature,
    /// linearly extrapolated outside `[kstar - epsilon, kstar + epsilon]`:
    /// `f(k) = wage + rental * k + curvature/2 (k - kstar)^2` on the window.
    LocalQuadratic {
        wage: f64,
        rental: f64,
        curvature: f64,
        kstar: f64,
        epsilon: f64,
    },
}

impl ProductionSpec {
    pub fn ces(tfp: f64, alpha: f64, rho: f64, delta: f64) -> Result<Self> {
        if !(tfp > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "CES productivity A must be positive, got {tfp}"
            )));
        }
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "CES alpha must lie in (0, 1), got {alpha}"
            )));
        }
        if !(rho > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "CES rho must be positive, got {rho}"
            )));
        }
        if !(delta > 0.0 && delta <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "depreciation delta must lie in (0, 1], got {delta}"
            )));
        }
        Ok(ProductionSpec::Ces {
            tfp,
            alpha,
            rho,
            delta,
        })
    }

    /// Local quadratic with the default window half-width
    /// `epsilon = min(kstar, wage / (2 |curvature| + 1)) / 4`, which keeps
    /// `f` positive on the window.
    pub fn local_quadratic(wage: f64, rental: f64, curvature: f64, kstar: f64) -> Result<Self> {
        let epsilon = (kstar.min(wage / (2.0 * curvature.abs() + 1.0))) / 4.0;
        Self::local_quadratic_with_epsilon(wage, rental, curvature, kstar, epsilon)
    }

    pub fn local_quadratic_with_epsilon(
        wage: f64,
        rental: f64,
        curvature: f64,
        kstar: f64,
        epsilon: f64,
    ) -> Result<Self> {
        if !(wage > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "wage must be positive, got {wage}"
            )));
        }
        if !(rental > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "rental rate must be positive, got {rental}"
            )));
        }
        if !(curvature <= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "curvature must be <= 0, got {curvature}"
            )));
        }
        if !(kstar > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "kstar must be positive, got {kstar}"
            )));
        }
        if !(epsilon > 0.0 && epsilon < kstar) {
            return Err(Error::InvalidParameter(format!(
                "epsilon must lie in (0, kstar), got {epsilon}"
            )));
        }
        Ok(ProductionSpec::LocalQuadratic {
            wage,
            rental,
            curvature,
            kstar,
            epsilon,
        })
    }
}

/// `f`, `f'`, `f''` at one point.
#[derive(Debug, Clone, Copy)]
pub struct ProductionValues {
    pub f: f64,
    pub fp: f64,
    pub fpp: f64,
}

/// Competitive factor prices at capital `k`.
#[derive(Debug, Clone, Copy)]
pub struct FactorPrices {
    /// Rental rate `R = f'(k)`.
    pub r: f64,
    /// Wage `w = f(k) - k f'(k)`.
    pub w: f64,
}

/// Evaluates `f, f', f''`. CES powers go through log space so large
/// exponents like `1/(1-rho)` stay accurate.
pub fn production_eval(prod: &ProductionSpec, k: f64) -> Result<ProductionValues> {
    if !(k > 0.0) || !k.is_finite() {
        return Err(Error::NonpositiveCapital(k));
    }
    match *prod {
        ProductionSpec::Ces {
            tfp,
            alpha,
            rho,
            delta,
        } => {
            let ln_k = k.ln();
            if (rho - 1.0).abs() < CD_BRANCH_TOL {
                let f = tfp * (alpha * ln_k).exp() + (1.0 - delta) * k;
                let fp = tfp * alpha * ((alpha - 1.0) * ln_k).exp() + 1.0 - delta;
                let fpp = tfp * alpha * (alpha - 1.0) * ((alpha - 2.0) * ln_k).exp();
                Ok(ProductionValues { f, fp, fpp })
            } else {
                let one_m_rho = 1.0 - rho;
                let x = alpha * (one_m_rho * ln_k).exp();
                let ln_g = (x + 1.0 - alpha).ln() / one_m_rho;
                let f = tfp * ln_g.exp() + (1.0 - delta) * k;
                let fp = tfp * alpha * (rho * (ln_g - ln_k)).exp() + 1.0 - delta;
                let fpp = -tfp
                    * rho
                    * alpha
                    * (1.0 - alpha)
                    * ((-rho - 1.0) * ln_k + (2.0 * rho - 1.0) * ln_g).exp();
                Ok(ProductionValues { f, fp, fpp })
            }
        }
        ProductionSpec::LocalQuadratic {
            wage,
            rental,
            curvature,
            kstar,
            epsilon,
        } => {
            let lo = kstar - epsilon;
            let hi = kstar + epsilon;
            let vals = if k < lo {
                let slope = rental + curvature * (lo - kstar);
                let f_lo = wage + rental * lo + 0.5 * curvature * epsilon * epsilon;
                ProductionValues {
                    f: f_lo + slope * (k - lo),
                    fp: slope,
                    fpp: 0.0,
                }
            } else if k > hi {
                let slope = rental + curvature * (hi - kstar);
                let f_hi = wage + rental * hi + 0.5 * curvature * epsilon * epsilon;
                ProductionValues {
                    f: f_hi + slope * (k - hi),
                    fp: slope,
                    fpp: 0.0,
                }
            } else {
                let dk = k - kstar;
                ProductionValues {
                    f: wage + rental * k + 0.5 * curvature * dk * dk,
                    fp: rental + curvature * dk,
                    fpp: curvature,
                }
            };
            Ok(vals)
        }
    }
}

/// Rental rate and wage at capital `k`. Errors when the implied wage is
/// nonpositive (degenerate economy).
pub fn factor_prices(prod: &ProductionSpec, k: f64) -> Result<FactorPrices> {
    if !(k > 0.0) || !k.is_finite() {
        return Err(Error::NonpositiveCapital(k));
    }
    match *prod {
        ProductionSpec::Ces {
            tfp,
            alpha,
            rho,
            delta,
        } => {
            let ln_k = k.ln();
            // closed-form wage A (1-alpha) g^rho; better conditioned than f - k f'
            let (r, w) = if (rho - 1.0).abs() < CD_BRANCH_TOL {
                (
                    tfp * alpha * ((alpha - 1.0) * ln_k).exp() + 1.0 - delta,
                    tfp * (1.0 - alpha) * (alpha * ln_k).exp(),
                )
            } else {
                let one_m_rho = 1.0 - rho;
                let x = alpha * (one_m_rho * ln_k).exp();
                let ln_g = (x + 1.0 - alpha).ln() / one_m_rho;
                (
                    tfp * alpha * (rho * (ln_g - ln_k)).exp() + 1.0 - delta,
                    tfp * (1.0 - alpha) * (rho * ln_g).exp(),
                )
            };
            if !(w > 0.0) {
                return Err(Error::NonpositiveWage { k, w });
            }
            Ok(FactorPrices { r, w })
        }
        ProductionSpec::LocalQuadratic { .. } => {
            let v = production_eval(prod, k)?;
            let w = v.f - k * v.fp;
            if !(w > 0.0) {
                return Err(Error::NonpositiveWage { k, w });
            }
            Ok(FactorPrices { r: v.fp, w })
        }
    }
}

/// Solved savings and its partial derivatives at a `(w, R)` point.
#[derive(Debug, Clone, Copy)]
pub struct SavingsResult {
    pub s: f64,
    /// `ds/dw`, always in `(0, 1)`.
    pub s_w: f64,
    /// `ds/dR`; zero when the old's utility is logarithmic.
    pub s_r: f64,
}

/// Solves `-u'(w - s) + beta R v'(R s) = 0` for `s` in `(0, w)`.
///
/// The residual is strictly decreasing in `s` and diverges to `+inf` at 0
/// and `-inf` at `w`, so a bracketed Newton iteration always converges.
/// The partials come from the implicit function theorem:
///
/// ```text
/// s_w = u'' / (u'' + beta R^2 v''),
/// s_R = -beta v'(Rs) (1 - gamma_v(Rs)) / (u'' + beta R^2 v''),
/// ```
/// with `u''` at `w - s` and `v''` at `R s`.
pub fn solve_savings(
    u: &UtilitySpec,
    v: &UtilitySpec,
    beta: f64,
    w: f64,
    r: f64,
    tol: f64,
) -> Result<SavingsResult> {
    if !(w > 0.0) || !w.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "savings problem needs a positive wage, got {w}"
        )));
    }
    if !(r > 0.0) || !r.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "savings problem needs a positive return, got {r}"
        )));
    }
    if !(beta > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "discount factor must be positive, got {beta}"
        )));
    }
    let foc = |s: f64| beta * r * v.mu(r * s) - u.mu(w - s);
    let dfoc = |s: f64| u.mu_prime(w - s) + beta * r * r * v.mu_prime(r * s);
    // Inada makes the residual +inf at 0 and -inf at w; widen the default
    // endpoints until both signs show up in floating point.
    let mut lo = 1e-12 * w;
    while foc(lo) <= 0.0 && lo > 1e-290 {
        lo *= 1e-3;
    }
    let mut hi = w - 1e-12 * w;
    while foc(hi) >= 0.0 && hi < w {
        hi = w - (w - hi) * 1e-3;
    }
    let s = roots::newton_bracketed(foc, dfoc, lo, hi, 0.5 * w, tol, 200)?;
    let upp = u.mu_prime(w - s);
    let z = r * s;
    let denom = upp + beta * r * r * v.mu_prime(z);
    let s_w = upp / denom;
    let s_r = -beta * v.mu(z) * (1.0 - v.rra(z)) / denom;
    Ok(SavingsResult { s, s_w, s_r })
}

/// One production economy: technology, utilities, and the discount factor.
///
/// All fields are immutable after construction and every operation on the
/// type is pure, so values can be shared freely across threads.
#[derive(Debug, Clone)]
pub struct ModelParams {
    pub beta: f64,
    pub production: ProductionSpec,
    pub u: UtilitySpec,
    pub v: UtilitySpec,
}

impl ModelParams {
    /// `beta > 0`; values above 1 are admitted for reverse-engineered
    /// economies, the usual calibration range is `(0, 1]`.
    pub fn new(beta: f64, production: ProductionSpec, u: UtilitySpec, v: UtilitySpec) -> Result<Self> {
        if !(beta > 0.0) || !beta.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "discount factor must be positive, got {beta}"
            )));
        }
        Ok(ModelParams {
            beta,
            production,
            u,
            v,
        })
    }

    pub fn production_at(&self, k: f64) -> Result<ProductionValues> {
        production_eval(&self.production, k)
    }

    pub fn prices_at(&self, k: f64) -> Result<FactorPrices> {
        factor_prices(&self.production, k)
    }

    pub fn savings(&self, w: f64, r: f64) -> Result<SavingsResult> {
        solve_savings(&self.u, &self.v, self.beta, w, r, DEFAULT_FOC_TOL)
    }

    pub fn savings_tol(&self, w: f64, r: f64, tol: f64) -> Result<SavingsResult> {
        solve_savings(&self.u, &self.v, self.beta, w, r, tol)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: ModelConfig = serde_json::from_str(text)?;
        cfg.build()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.to_config()?)?)
    }

    /// Serializable form. Fails for custom (closure-backed) utilities.
    pub fn to_config(&self) -> Result<ModelConfig> {
        let production = match self.production {
            ProductionSpec::Ces {
                tfp,
                alpha,
                rho,
                delta,
            } => ProductionConfig::Ces {
                tfp,
                alpha,
                rho,
                delta,
            },
            ProductionSpec::LocalQuadratic {
                wage,
                rental,
                curvature,
                kstar,
                epsilon,
            } => ProductionConfig::LocalQuadratic {
                wage,
                rental,
                curvature,
                kstar,
                epsilon: Some(epsilon),
            },
        };
        let u = utility_to_config(&self.u, default_young_log_weight(self.beta))?;
        let v = utility_to_config(&self.v, Some(1.0))?;
        Ok(ModelConfig {
            beta: self.beta,
            production,
            utility: UtilityPairConfig { u, v },
        })
    }
}

fn default_young_log_weight(beta: f64) -> Option<f64> {
    if beta < 1.0 {
        Some(1.0 - beta)
    } else {
        None
    }
}

fn utility_to_config(u: &UtilitySpec, default_log_weight: Option<f64>) -> Result<UtilityConfig> {
    let family = match u.family_name() {
        "log" => UtilityFamilyName::Log,
        "crra" => UtilityFamilyName::Crra,
        _ => {
            return Err(Error::Config(
                "custom utilities have no JSON representation".into(),
            ))
        }
    };
    let gamma = match u.family {
        UtilityFamily::Crra { gamma } => Some(gamma),
        _ => None,
    };
    let default_weight = match family {
        UtilityFamilyName::Log => default_log_weight,
        UtilityFamilyName::Crra => Some(1.0),
    };
    let weight = match default_weight {
        Some(d) if (u.weight - d).abs() <= 1e-15 * d.max(1.0) => None,
        _ => Some(u.weight),
    };
    Ok(UtilityConfig {
        family,
        gamma,
        weight,
    })
}

// ---------------------------------------------------------------------------
// JSON schema
// ---------------------------------------------------------------------------

/// On-disk model description:
///
/// ```json
/// {"beta":0.5,
///  "production":{"variant":"ces","A":1.0,"alpha":0.3,"rho":1.0,"delta":1.0},
///  "utility":{"u":{"family":"log"},"v":{"family":"crra","gamma":2.0}}}
/// ```
///
/// The local-quadratic variant reads
/// `{"variant":"local_quadratic","w":...,"R":...,"c":...,"kstar":...,"epsilon":...}`
/// with `epsilon` optional. An omitted `weight` on the young's log utility
/// defaults to `1 - beta` (share-form log preferences); the old's defaults
/// to 1.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModelConfig {
    pub beta: f64,
    pub production: ProductionConfig,
    pub utility: UtilityPairConfig,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "snake_case")]
pub enum ProductionConfig {
    Ces {
        #[serde(rename = "A")]
        tfp: f64,
        alpha: f64,
        rho: f64,
        delta: f64,
    },
    LocalQuadratic {
        #[serde(rename = "w")]
        wage: f64,
        #[serde(rename = "R")]
        rental: f64,
        #[serde(rename = "c")]
        curvature: f64,
        kstar: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        epsilon: Option<f64>,
    },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct UtilityPairConfig {
    pub u: UtilityConfig,
    pub v: UtilityConfig,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UtilityFamilyName {
    Log,
    Crra,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct UtilityConfig {
    pub family: UtilityFamilyName,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weight: Option<f64>,
}

impl ModelConfig {
    pub fn build(&self) -> Result<ModelParams> {
        let production = match self.production {
            ProductionConfig::Ces {
                tfp,
                alpha,
                rho,
                delta,
            } => ProductionSpec::ces(tfp, alpha, rho, delta)?,
            ProductionConfig::LocalQuadratic {
                wage,
                rental,
                curvature,
                kstar,
                epsilon,
            } => match epsilon {
                Some(e) => {
                    ProductionSpec::local_quadratic_with_epsilon(wage, rental, curvature, kstar, e)?
                }
                None => ProductionSpec::local_quadratic(wage, rental, curvature, kstar)?,
            },
        };
        let u = build_utility(&self.utility.u, default_young_log_weight(self.beta), "u")?;
        let v = build_utility(&self.utility.v, Some(1.0), "v")?;
        ModelParams::new(self.beta, production, u, v)
    }
}

fn build_utility(
    cfg: &UtilityConfig,
    default_log_weight: Option<f64>,
    which: &str,
) -> Result<UtilitySpec> {
    let base = match cfg.family {
        UtilityFamilyName::Log => UtilitySpec::log(),
        UtilityFamilyName::Crra => {
            let gamma = cfg.gamma.ok_or_else(|| {
                Error::Config(format!("utility {which}: crra requires a gamma field"))
            })?;
            UtilitySpec::crra(gamma)?
        }
    };
    let weight = match (cfg.weight, cfg.family) {
        (Some(w), _) => w,
        (None, UtilityFamilyName::Crra) => 1.0,
        (None, UtilityFamilyName::Log) => default_log_weight.ok_or_else(|| {
            Error::Config(format!(
                "utility {which}: log with beta >= 1 needs an explicit weight"
            ))
        })?,
    };
    base.with_weight(weight)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn ces_at_unit_capital_collapses_powers() {
        let prod = ProductionSpec::ces(1.0, 0.3, 1.0, 1.0).unwrap();
        let v = production_eval(&prod, 1.0).unwrap();
        assert!(close(v.f, 1.0, 1e-15));
        assert!(close(v.fp, 0.3, 1e-15));
        assert!(close(v.fpp, -0.21, 1e-15));
        let p = factor_prices(&prod, 1.0).unwrap();
        assert!(close(p.r, 0.3, 1e-15));
        assert!(close(p.w, 0.7, 1e-15));
    }

    #[test]
    fn ces_is_continuous_across_the_cobb_douglas_branch() {
        // evaluate rho = 1 +/- 1e-8 against the exact rho = 1 branch
        let cd = ProductionSpec::ces(1.0, 0.3, 1.0, 1.0).unwrap();
        for &rho in &[1.0 - 1e-8, 1.0 + 1e-8] {
            let near = ProductionSpec::ces(1.0, 0.3, rho, 1.0).unwrap();
            let mut k = 0.01;
            while k <= 100.0 {
                let a = production_eval(&cd, k).unwrap();
                let b = production_eval(&near, k).unwrap();
                assert!(close(a.f, b.f, 1e-6), "f mismatch at k={k} rho={rho}");
                assert!(close(a.fp, b.fp, 1e-6 * a.fp.abs().max(1.0)));
                assert!(close(a.fpp, b.fpp, 1e-6 * a.fpp.abs().max(1.0)));
                k *= 1.7;
            }
        }
    }

    #[test]
    fn cobb_douglas_wage_at_low_capital() {
        // w = 0.7 * 0.1^0.3, evaluated independently with mpmath
        let prod = ProductionSpec::ces(1.0, 0.3, 1.0, 1.0).unwrap();
        let p = factor_prices(&prod, 0.1).unwrap();
        assert!(close(p.w, 0.350831063539090600, 1e-15));
    }

    #[test]
    fn local_quadratic_matches_its_anchors() {
        let prod = ProductionSpec::local_quadratic(2.0, 0.9, 0.0, 1.0).unwrap();
        let v = production_eval(&prod, 1.0).unwrap();
        assert!(close(v.f, 2.9, 1e-15));
        assert!(close(v.fp, 0.9, 1e-15));
        assert_eq!(v.fpp, 0.0);
        let p = factor_prices(&prod, 1.0).unwrap();
        assert!(close(p.r, 0.9, 1e-15));
        assert!(close(p.w, 2.0, 1e-15));

        let curved = ProductionSpec::local_quadratic(2.0, 0.9, -0.1, 1.0).unwrap();
        let v = production_eval(&curved, 1.0).unwrap();
        assert!(close(v.fpp, -0.1, 1e-15));
    }

    #[test]
    fn local_quadratic_extrapolates_continuously() {
        let prod = ProductionSpec::local_quadratic(2.0, 0.9, -0.5, 1.0).unwrap();
        let eps = match prod {
            ProductionSpec::LocalQuadratic { epsilon, .. } => epsilon,
            _ => unreachable!(),
        };
        let hi = 1.0 + eps;
        let inside = production_eval(&prod, hi - 1e-10).unwrap();
        let outside = production_eval(&prod, hi + 1e-10).unwrap();
        assert!(close(inside.f, outside.f, 1e-8));
        assert!(close(inside.fp, outside.fp, 1e-8));
        assert_eq!(outside.fpp, 0.0);
    }

    #[test]
    fn ces_stays_concave_with_marginal_product_above_depreciation() {
        let mut seen = 0;
        for &(a, alpha, rho, delta) in &[
            (1.0, 0.3, 1.0, 1.0),
            (3.5, 3.0 / 7.0, 2.8, 1.0),
            (0.2, 0.6, 0.45, 0.5),
            (10.0, 0.9, 0.31, 0.9),
        ] {
            let prod = ProductionSpec::ces(a, alpha, rho, delta).unwrap();
            let mut k = 1e-3;
            while k < 1e3 {
                let v = production_eval(&prod, k).unwrap();
                assert!(v.fpp < 0.0, "f'' >= 0 at k={k}");
                assert!(v.fp > 1.0 - delta);
                k *= 2.3;
                seen += 1;
            }
        }
        assert!(seen > 30);
    }

    #[test]
    fn share_log_savings_rule_is_beta_w() {
        // weighted log/log: s = beta w regardless of R
        let u = UtilitySpec::log().with_weight(0.5).unwrap();
        let v = UtilitySpec::log();
        for &r in &[0.3, 1.0, 4.2] {
            let res = solve_savings(&u, &v, 0.5, 0.7, r, DEFAULT_FOC_TOL).unwrap();
            assert!(close(res.s, 0.35, 1e-12), "s = {}", res.s);
            assert!(close(res.s_w, 0.5, 1e-12));
            assert!(res.s_r.abs() < 1e-10);
        }
    }

    #[test]
    fn plain_log_savings_rule() {
        let u = UtilitySpec::log();
        let v = UtilitySpec::log();
        let res = solve_savings(&u, &v, 0.5, 0.7, 1.3, DEFAULT_FOC_TOL).unwrap();
        // s = beta w / (1 + beta)
        assert!(close(res.s, 0.5 * 0.7 / 1.5, 1e-12));
    }

    #[test]
    fn symmetric_crra_splits_the_wage() {
        let u = UtilitySpec::crra(2.0).unwrap();
        let v = UtilitySpec::crra(2.0).unwrap();
        let res = solve_savings(&u, &v, 1.0, 1.0, 1.0, DEFAULT_FOC_TOL).unwrap();
        assert!(close(res.s, 0.5, 1e-12));
        // (1-s)^-2 = 4 (4s)^-2  =>  2s = 1 - s  =>  s = 1/3
        let res = solve_savings(&u, &v, 1.0, 1.0, 4.0, DEFAULT_FOC_TOL).unwrap();
        assert!(close(res.s, 1.0 / 3.0, 1e-12));
    }

    #[test]
    fn savings_partials_match_finite_differences() {
        let h = 1e-5;
        let cases = [
            (0.4, 1.7, 0.9, 2.5, 1.3),
            (0.9, 0.6, 0.4, 0.7, 3.0),
            (0.2, 5.0, 2.0, 1.0, 1.0),
            (0.7, 1.0, 1.2, 0.5, 0.5),
        ];
        for &(beta, w, r, gu, gv) in &cases {
            let u = UtilitySpec::crra(gu).unwrap();
            let v = UtilitySpec::crra(gv).unwrap();
            let at = |w: f64, r: f64| solve_savings(&u, &v, beta, w, r, 1e-14).unwrap().s;
            let base = solve_savings(&u, &v, beta, w, r, 1e-14).unwrap();
            let fd_w = (at(w + h, r) - at(w - h, r)) / (2.0 * h);
            let fd_r = (at(w, r + h) - at(w, r - h)) / (2.0 * h);
            assert!(
                close(fd_w, base.s_w, 1e-6),
                "s_w fd {fd_w} vs {}",
                base.s_w
            );
            assert!(
                close(fd_r, base.s_r, 1e-6),
                "s_r fd {fd_r} vs {}",
                base.s_r
            );
            assert!(base.s_w > 0.0 && base.s_w < 1.0);
        }
    }

    #[test]
    fn savings_share_of_wage_stays_interior_on_random_grid() {
        let mut rng = crate::rng::Lcg64::new(9);
        for _ in 0..200 {
            let beta = rng.uniform(0.05, 1.5);
            let w = rng.log_uniform(0.05, 20.0);
            let r = rng.log_uniform(0.05, 5.0);
            let gu = rng.uniform(0.3, 4.0);
            let gv = rng.uniform(0.3, 4.0);
            let u = UtilitySpec::crra(gu).unwrap();
            let v = UtilitySpec::crra(gv).unwrap();
            let res = solve_savings(&u, &v, beta, w, r, DEFAULT_FOC_TOL).unwrap();
            assert!(res.s > 0.0 && res.s < w);
            assert!(res.s_w > 0.0 && res.s_w < 1.0);
            // residual at the solution; the attainable floor is one ulp of s
            // through the residual slope when the solution hugs a boundary
            let foc = beta * r * v.mu(r * res.s) - u.mu(w - res.s);
            let slope = u.mu_prime(w - res.s).abs() + beta * r * r * v.mu_prime(r * res.s).abs();
            let floor = 8.0 * slope * f64::EPSILON * res.s;
            assert!(
                foc.abs() < (1e-10 * u.mu(w - res.s).max(1.0)).max(floor),
                "foc {foc:e} too large"
            );
        }
    }

    #[test]
    fn log_old_utility_kills_the_return_derivative() {
        let mut rng = crate::rng::Lcg64::new(10);
        for _ in 0..50 {
            let u = UtilitySpec::crra(rng.uniform(0.5, 3.0)).unwrap();
            let v = UtilitySpec::log();
            let res = solve_savings(
                &u,
                &v,
                rng.uniform(0.2, 0.99),
                rng.log_uniform(0.1, 10.0),
                rng.log_uniform(0.1, 5.0),
                DEFAULT_FOC_TOL,
            )
            .unwrap();
            assert!(res.s_r.abs() < 1e-10);
        }
    }

    #[test]
    fn custom_derivatives_behave_like_their_analytic_twin() {
        let u = UtilitySpec::custom(
            Arc::new(|x: f64| x.powf(-1.5)),
            Arc::new(|x: f64| -1.5 * x.powf(-2.5)),
        );
        let twin = UtilitySpec::crra(1.5).unwrap();
        let v = UtilitySpec::log();
        let a = solve_savings(&u, &v, 0.8, 2.0, 1.1, DEFAULT_FOC_TOL).unwrap();
        let b = solve_savings(&twin, &v, 0.8, 2.0, 1.1, DEFAULT_FOC_TOL).unwrap();
        assert!(close(a.s, b.s, 1e-12));
        assert!(close(u.rra(0.7), 1.5, 1e-12));
    }

    #[test]
    fn spec_schema_round_trips() {
        let text = r#"{"beta":0.5,"production":{"variant":"ces","A":1.0,"alpha":0.3,"rho":1.0,"delta":1.0},"utility":{"u":{"family":"log"},"v":{"family":"crra","gamma":2.0}}}"#;
        let model = ModelParams::from_json(text).unwrap();
        assert!(close(model.u.weight(), 0.5, 1e-15)); // 1 - beta
        assert!(close(model.v.weight(), 1.0, 1e-15));
        let back = model.to_json().unwrap();
        let reparsed = ModelParams::from_json(&back).unwrap();
        assert!(close(reparsed.u.weight(), 0.5, 1e-15));
        // default weight is omitted on the wire
        assert!(!back.contains("weight"));

        let lq = r#"{"beta":1.0,"production":{"variant":"local_quadratic","w":2.0,"R":0.9,"c":0.0,"kstar":1.0},"utility":{"u":{"family":"log","weight":1.0},"v":{"family":"log"}}}"#;
        let model = ModelParams::from_json(lq).unwrap();
        assert!(close(model.u.weight(), 1.0, 1e-15));
        // beta = 1 plus log u without a weight must be rejected
        let bad = r#"{"beta":1.0,"production":{"variant":"ces","A":1.0,"alpha":0.3,"rho":1.0,"delta":1.0},"utility":{"u":{"family":"log"},"v":{"family":"log"}}}"#;
        assert!(ModelParams::from_json(bad).is_err());
    }

    #[test]
    fn out_of_range_parameters_are_named() {
        let bad = r#"{"beta":0.5,"production":{"variant":"ces","A":1.0,"alpha":1.5,"rho":1.0,"delta":1.0},"utility":{"u":{"family":"log"},"v":{"family":"log"}}}"#;
        let err = ModelParams::from_json(bad).unwrap_err();
        assert!(err.to_string().contains("alpha"));
        assert!(production_eval(&ProductionSpec::ces(1.0, 0.3, 1.0, 1.0).unwrap(), -1.0).is_err());
    }
}
