//! Model constants and the existence conditions they must satisfy.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Couplings, charges, winding numbers and twist of the two-component model.
///
/// `omega` is stored exactly as given; only `omega²` and products with `b`
/// enter the equations, so its sign is never normalized.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParameterSet {
    pub beta1: f64,
    pub beta2: f64,
    pub beta_prime: f64,
    pub alpha: f64,
    pub e1: f64,
    pub e2: f64,
    /// Winding `N` of the first component.
    pub n_wind: i64,
    /// Winding `M` of the second component.
    pub m_wind: i64,
    pub omega: f64,
}

/// One failed inequality.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    /// The inequality as written, e.g. `"α≥β′>0"`.
    pub inequality: String,
    /// Offending values.
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub valid: bool,
    pub violations: Vec<Violation>,
}

impl std::fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.valid {
            return write!(f, "parameters valid");
        }
        writeln!(f, "parameters invalid:")?;
        for v in &self.violations {
            writeln!(f, "  violated {}: {}", v.inequality, v.detail)?;
        }
        Ok(())
    }
}

pub const NON_FINITE: &str = "non-finite";
pub const BETA1_POSITIVE: &str = "β₁>0";
pub const BETA2_POSITIVE: &str = "β₂>0";
pub const ALPHA_BETA_PRIME: &str = "α≥β′>0";
pub const COUPLING_DOMINANCE: &str = "β₁β₂>β′α";
pub const WINDING_ORDER: &str = "M>N>0";
pub const TWIST_BOUND: &str = "ω²>α−β′";

impl ParameterSet {
    /// β₁=β₂=2, β′=α=1, e₁=e₂=1, N=1, M=2, ω=1.
    pub fn baseline() -> Self {
        Self {
            beta1: 2.0,
            beta2: 2.0,
            beta_prime: 1.0,
            alpha: 1.0,
            e1: 1.0,
            e2: 1.0,
            n_wind: 1,
            m_wind: 2,
            omega: 1.0,
        }
    }

    pub fn n(&self) -> f64 {
        self.n_wind as f64
    }

    pub fn m(&self) -> f64 {
        self.m_wind as f64
    }

    /// Checks every existence inequality and reports all failures.
    pub fn validate(&self) -> ValidationReport {
        let mut violations = Vec::new();
        let reals = [
            ("beta1", self.beta1),
            ("beta2", self.beta2),
            ("beta_prime", self.beta_prime),
            ("alpha", self.alpha),
            ("e1", self.e1),
            ("e2", self.e2),
            ("omega", self.omega),
        ];
        let bad: Vec<String> = reals
            .iter()
            .filter(|(_, v)| !v.is_finite())
            .map(|(k, v)| format!("{k}={v}"))
            .collect();
        if !bad.is_empty() {
            violations.push(Violation {
                inequality: NON_FINITE.to_string(),
                detail: bad.join(", "),
            });
            return ValidationReport {
                valid: false,
                violations,
            };
        }

        let mut check = |ok: bool, inequality: &str, detail: String| {
            if !ok {
                violations.push(Violation {
                    inequality: inequality.to_string(),
                    detail,
                });
            }
        };
        check(self.beta1 > 0.0, BETA1_POSITIVE, format!("β₁={}", self.beta1));
        check(self.beta2 > 0.0, BETA2_POSITIVE, format!("β₂={}", self.beta2));
        check(
            self.alpha >= self.beta_prime && self.beta_prime > 0.0,
            ALPHA_BETA_PRIME,
            format!("α={}, β′={}", self.alpha, self.beta_prime),
        );
        let b12 = self.beta1 * self.beta2;
        let ba = self.beta_prime * self.alpha;
        check(
            b12 > ba,
            COUPLING_DOMINANCE,
            format!("β₁β₂={b12}, β′α={ba}"),
        );
        check(
            self.m_wind > self.n_wind && self.n_wind > 0,
            WINDING_ORDER,
            format!("M={}, N={}", self.m_wind, self.n_wind),
        );
        let w2 = self.omega * self.omega;
        let gap = self.alpha - self.beta_prime;
        check(w2 > gap, TWIST_BOUND, format!("ω²={w2}, α−β′={gap}"));

        let valid = violations.is_empty();
        if valid {
            // α ≥ β′ > 0 and β₁β₂ > β′α imply β₁β₂ > β′².
            assert!(
                self.hessian_det() > 0.0,
                "β₁β₂ > β′² must follow from the validated inequalities"
            );
        }
        ValidationReport { valid, violations }
    }

    pub fn ensure_valid(&self) -> Result<()> {
        let report = self.validate();
        if report.valid {
            Ok(())
        } else {
            Err(Error::InvalidParams(report.to_string().trim_end().to_string()))
        }
    }

    /// β₁β₂ − β′², the determinant of the potential's Hessian in (f², g²).
    pub fn hessian_det(&self) -> f64 {
        self.beta1 * self.beta2 - self.beta_prime * self.beta_prime
    }

    /// Returns a copy with the named field replaced. Winding numbers must be
    /// integral.
    pub fn with_field(&self, key: &str, value: f64) -> Result<Self> {
        let mut p = *self;
        match key {
            "beta1" => p.beta1 = value,
            "beta2" => p.beta2 = value,
            "beta_prime" => p.beta_prime = value,
            "alpha" => p.alpha = value,
            "e1" => p.e1 = value,
            "e2" => p.e2 = value,
            "omega" => p.omega = value,
            "N" | "M" => {
                if value.fract() != 0.0 || !value.is_finite() {
                    return Err(Error::InvalidParams(format!(
                        "winding {key} must be an integer, got {value}"
                    )));
                }
                if key == "N" {
                    p.n_wind = value as i64;
                } else {
                    p.m_wind = value as i64;
                }
            }
            _ => {
                return Err(Error::InvalidParams(format!(
                    "unknown parameter '{key}'"
                )))
            }
        }
        Ok(p)
    }

    /// Keys accepted by [`ParameterSet::with_field`].
    pub const KEYS: [&'static str; 9] = [
        "beta1",
        "beta2",
        "beta_prime",
        "alpha",
        "e1",
        "e2",
        "N",
        "M",
        "omega",
    ];
}
