//! The U(1)×U(1) self-interaction potential and its sign landscape.
//!
//! In the variables `x = f²`, `y = g²` the potential is the quadratic
//! `V = β₁(x−1)²/2 + β₂y²/2 + β′xy − αy`, so its Hessian is constant and its
//! stationary point solves a 2×2 linear system.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::params::ParameterSet;

/// Tolerance used to call a landscape minimum nonnegative.
pub const SIGN_TOLERANCE: f64 = -1e-12;

pub fn evaluate(p: &ParameterSet, f: f64, g: f64) -> f64 {
    evaluate_xy(p, f * f, g * g)
}

pub fn evaluate_xy(p: &ParameterSet, x: f64, y: f64) -> f64 {
    let dx = x - 1.0;
    0.5 * p.beta1 * dx * dx + 0.5 * p.beta2 * y * y + p.beta_prime * x * y - p.alpha * y
}

/// (∂V/∂x, ∂V/∂y).
pub fn gradient_xy(p: &ParameterSet, x: f64, y: f64) -> [f64; 2] {
    [
        p.beta1 * (x - 1.0) + p.beta_prime * y,
        p.beta2 * y + p.beta_prime * x - p.alpha,
    ]
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Classification {
    Minimum,
    Maximum,
    Saddle,
    Degenerate,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CriticalPoint {
    pub x0: f64,
    pub y0: f64,
    pub value_at_cp: f64,
    pub hessian: [[f64; 2]; 2],
    pub eigenvalues: [f64; 2],
    pub classification: Classification,
    /// The closed form `β₁(α−β′)(α β′² + (β₁β₂−β′²)β′)/2` quoted in the
    /// literature for the stationary value.
    pub reference_value: f64,
    /// The classification quoted in the literature for this point.
    pub reference_classification: Classification,
    pub value_agrees: bool,
    pub classification_agrees: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SignScan {
    pub landscape_min: f64,
    pub landscape_argmin: (f64, f64),
    pub nonneg_over_domain: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CriticalPointReport {
    pub x0: f64,
    pub y0: f64,
    pub value_at_cp: f64,
    pub hessian: [[f64; 2]; 2],
    pub eigenvalues: [f64; 2],
    pub classification: Classification,
    pub landscape_min: f64,
    pub landscape_argmin: (f64, f64),
    pub nonneg_over_domain: bool,
    pub reference_value: f64,
    pub reference_classification: Classification,
    pub value_agrees: bool,
    pub classification_agrees: bool,
    /// Human-readable note when the computed and quoted facts disagree.
    pub discrepancy: Option<String>,
}

/// Stationary point of `V(x, y)` classified from its Hessian eigenvalues.
pub fn critical_point(p: &ParameterSet) -> Result<CriticalPoint> {
    p.ensure_valid()?;
    let det = p.hessian_det();
    let x0 = (p.beta1 * p.beta2 - p.beta_prime * p.alpha) / det;
    let y0 = p.beta1 * (p.alpha - p.beta_prime) / det;
    let hessian = [[p.beta1, p.beta_prime], [p.beta_prime, p.beta2]];
    let eigenvalues = symmetric_eigenvalues(hessian);
    let classification = classify(eigenvalues);
    let value_at_cp = evaluate_xy(p, x0, y0);
    let reference_value = 0.5
        * p.beta1
        * (p.alpha - p.beta_prime)
        * (p.alpha * p.beta_prime * p.beta_prime + det * p.beta_prime);
    let scale = 1.0 + value_at_cp.abs().max(reference_value.abs());
    Ok(CriticalPoint {
        x0,
        y0,
        value_at_cp,
        hessian,
        eigenvalues,
        classification,
        reference_value,
        reference_classification: Classification::Maximum,
        value_agrees: (value_at_cp - reference_value).abs() <= 1e-12 * scale,
        classification_agrees: classification == Classification::Maximum,
    })
}

fn symmetric_eigenvalues(h: [[f64; 2]; 2]) -> [f64; 2] {
    let tr = h[0][0] + h[1][1];
    let diff = h[0][0] - h[1][1];
    let disc = (diff * diff + 4.0 * h[0][1] * h[0][1]).sqrt();
    [0.5 * (tr - disc), 0.5 * (tr + disc)]
}

fn classify(ev: [f64; 2]) -> Classification {
    let tol = 1e-14 * (ev[0].abs() + ev[1].abs()).max(f64::MIN_POSITIVE);
    if ev[0].abs() <= tol || ev[1].abs() <= tol {
        Classification::Degenerate
    } else if ev[0] > 0.0 {
        Classification::Minimum
    } else if ev[1] < 0.0 {
        Classification::Maximum
    } else {
        Classification::Saddle
    }
}

/// Brute-force lattice scan of `V(x, y)` over `[0, x_max]×[0, y_max]`.
///
/// The stationary point is added to the sample set when it lies in the
/// rectangle, so an interior minimum is never missed between lattice nodes.
pub fn scan_sign(p: &ParameterSet, x_max: f64, y_max: f64, resolution: usize) -> SignScan {
    assert!(x_max > 0.0 && y_max > 0.0, "scan domain must be nonempty");
    assert!(resolution >= 16, "scan resolution must be at least 16");
    let mut best = (f64::INFINITY, (0.0, 0.0));
    let mut consider = |x: f64, y: f64| {
        let v = evaluate_xy(p, x, y);
        if v < best.0 {
            best = (v, (x, y));
        }
    };
    for i in 0..=resolution {
        let x = x_max * i as f64 / resolution as f64;
        for j in 0..=resolution {
            let y = y_max * j as f64 / resolution as f64;
            consider(x, y);
        }
    }
    let det = p.hessian_det();
    if det != 0.0 {
        let x0 = (p.beta1 * p.beta2 - p.beta_prime * p.alpha) / det;
        let y0 = p.beta1 * (p.alpha - p.beta_prime) / det;
        if (0.0..=x_max).contains(&x0) && (0.0..=y_max).contains(&y0) {
            consider(x0, y0);
        }
    }
    SignScan {
        landscape_min: best.0,
        landscape_argmin: best.1,
        nonneg_over_domain: best.0 >= SIGN_TOLERANCE,
    }
}

/// Critical point plus sign scan, with disagreements spelled out.
pub fn analyze(
    p: &ParameterSet,
    x_max: f64,
    y_max: f64,
    resolution: usize,
) -> Result<CriticalPointReport> {
    let cp = critical_point(p)?;
    let scan = scan_sign(p, x_max, y_max, resolution);
    let mut notes = Vec::new();
    if !cp.classification_agrees {
        notes.push(format!(
            "Hessian eigenvalues {:?} give a {:?}, not the quoted local maximum",
            cp.eigenvalues, cp.classification
        ));
    }
    if !cp.value_agrees {
        notes.push(format!(
            "direct evaluation V(x0,y0)={} differs from the quoted closed form {}",
            cp.value_at_cp, cp.reference_value
        ));
    }
    if !scan.nonneg_over_domain {
        notes.push(format!(
            "V attains {} < 0 at (x,y)={:?}; the potential is not bounded below by zero",
            scan.landscape_min, scan.landscape_argmin
        ));
    }
    Ok(CriticalPointReport {
        x0: cp.x0,
        y0: cp.y0,
        value_at_cp: cp.value_at_cp,
        hessian: cp.hessian,
        eigenvalues: cp.eigenvalues,
        classification: cp.classification,
        landscape_min: scan.landscape_min,
        landscape_argmin: scan.landscape_argmin,
        nonneg_over_domain: scan.nonneg_over_domain,
        reference_value: cp.reference_value,
        reference_classification: cp.reference_classification,
        value_agrees: cp.value_agrees,
        classification_agrees: cp.classification_agrees,
        discrepancy: if notes.is_empty() {
            None
        } else {
            Some(notes.join("; "))
        },
    })
}
