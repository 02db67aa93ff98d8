//! Nodal profiles `(a, b, f, g)` with their boundary pinning.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mesh::RadialGrid;
use crate::params::ParameterSet;

/// Degrees of freedom per node.
pub const FIELDS: usize = 4;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Field {
    A = 0,
    B = 1,
    F = 2,
    G = 3,
}

impl Field {
    pub const ALL: [Field; 4] = [Field::A, Field::B, Field::F, Field::G];

    pub fn name(self) -> &'static str {
        match self {
            Field::A => "a",
            Field::B => "b",
            Field::F => "f",
            Field::G => "g",
        }
    }
}

/// Which boundary values are held fixed.
///
/// The admissible space pins `a(0)=0, f(0)=0, g(0)=0, b(R)=0, f(R)=1,
/// g(R)=0`. `a(R)` and `b(0)` are free so that their limits emerge from the
/// minimization; `a_end` pins `a(R)=1/e₁` for cross-checks.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PinSet {
    pub a_origin: bool,
    pub f_origin: bool,
    pub g_origin: bool,
    pub b_end: bool,
    pub f_end: bool,
    pub g_end: bool,
    pub a_end: bool,
}

impl PinSet {
    pub const fn admissible() -> Self {
        Self {
            a_origin: true,
            f_origin: true,
            g_origin: true,
            b_end: true,
            f_end: true,
            g_end: true,
            a_end: false,
        }
    }

    pub const fn none() -> Self {
        Self {
            a_origin: false,
            f_origin: false,
            g_origin: false,
            b_end: false,
            f_end: false,
            g_end: false,
            a_end: false,
        }
    }

    pub fn with_a_end(mut self, pin: bool) -> Self {
        self.a_end = pin;
        self
    }
}

impl Default for PinSet {
    fn default() -> Self {
        Self::admissible()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FieldConfiguration {
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub f: Vec<f64>,
    pub g: Vec<f64>,
    pub pins: PinSet,
}

impl FieldConfiguration {
    pub fn new(a: Vec<f64>, b: Vec<f64>, f: Vec<f64>, g: Vec<f64>, pins: PinSet) -> Result<Self> {
        let n = a.len();
        for len in [b.len(), f.len(), g.len()] {
            if len != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    got: len,
                });
            }
        }
        if n < 2 {
            return Err(Error::InvalidGrid("a configuration needs at least two nodes".into()));
        }
        Ok(Self { a, b, f, g, pins })
    }

    /// `(1/e₁, 0, 1, 0)` everywhere with the origin pins on `a` and `f`
    /// released, since the vacuum does not satisfy them.
    pub fn vacuum(params: &ParameterSet, nodes: usize) -> Self {
        let pins = PinSet {
            a_origin: false,
            f_origin: false,
            ..PinSet::admissible()
        };
        Self {
            a: vec![1.0 / params.e1; nodes],
            b: vec![0.0; nodes],
            f: vec![1.0; nodes],
            g: vec![0.0; nodes],
            pins,
        }
    }

    /// All four profiles identically zero, nothing pinned.
    pub fn zero(nodes: usize) -> Self {
        Self {
            a: vec![0.0; nodes],
            b: vec![0.0; nodes],
            f: vec![0.0; nodes],
            g: vec![0.0; nodes],
            pins: PinSet::none(),
        }
    }

    pub fn node_count(&self) -> usize {
        self.a.len()
    }

    pub fn field(&self, field: Field) -> &[f64] {
        match field {
            Field::A => &self.a,
            Field::B => &self.b,
            Field::F => &self.f,
            Field::G => &self.g,
        }
    }

    pub fn field_mut(&mut self, field: Field) -> &mut Vec<f64> {
        match field {
            Field::A => &mut self.a,
            Field::B => &mut self.b,
            Field::F => &mut self.f,
            Field::G => &mut self.g,
        }
    }

    pub fn check_grid(&self, grid: &RadialGrid) -> Result<()> {
        for field in Field::ALL {
            let got = self.field(field).len();
            if got != grid.node_count() {
                return Err(Error::DimensionMismatch {
                    expected: grid.node_count(),
                    got,
                });
            }
        }
        Ok(())
    }

    pub fn is_pinned(&self, field: Field, node: usize) -> bool {
        let last = self.node_count() - 1;
        let p = &self.pins;
        match field {
            Field::A => (node == 0 && p.a_origin) || (node == last && p.a_end),
            Field::B => node == last && p.b_end,
            Field::F => (node == 0 && p.f_origin) || (node == last && p.f_end),
            Field::G => (node == 0 && p.g_origin) || (node == last && p.g_end),
        }
    }

    /// Interleaved mask `[a₀ b₀ f₀ g₀ a₁ …]`; `true` for free entries.
    pub fn free_mask(&self) -> Vec<bool> {
        let n = self.node_count();
        let mut mask = Vec::with_capacity(FIELDS * n);
        for i in 0..n {
            for field in Field::ALL {
                mask.push(!self.is_pinned(field, i));
            }
        }
        mask
    }

    /// Free degrees of freedom in interleaved order.
    pub fn free_dofs(&self) -> Vec<(Field, usize)> {
        let n = self.node_count();
        (0..n)
            .flat_map(|i| Field::ALL.into_iter().map(move |f| (f, i)))
            .filter(|&(f, i)| !self.is_pinned(f, i))
            .collect()
    }

    /// Overwrites every pinned entry with its exact boundary value.
    pub fn apply_pins(&mut self, params: &ParameterSet) {
        let last = self.node_count() - 1;
        let p = self.pins;
        if p.a_origin {
            self.a[0] = 0.0;
        }
        if p.f_origin {
            self.f[0] = 0.0;
        }
        if p.g_origin {
            self.g[0] = 0.0;
        }
        if p.b_end {
            self.b[last] = 0.0;
        }
        if p.f_end {
            self.f[last] = 1.0;
        }
        if p.g_end {
            self.g[last] = 0.0;
        }
        if p.a_end {
            self.a[last] = 1.0 / params.e1;
        }
    }

    pub fn to_interleaved(&self) -> Vec<f64> {
        let n = self.node_count();
        let mut x = Vec::with_capacity(FIELDS * n);
        for i in 0..n {
            x.extend([self.a[i], self.b[i], self.f[i], self.g[i]]);
        }
        x
    }

    pub fn set_from_interleaved(&mut self, x: &[f64]) {
        assert_eq!(x.len(), FIELDS * self.node_count());
        for (i, chunk) in x.chunks_exact(FIELDS).enumerate() {
            self.a[i] = chunk[0];
            self.b[i] = chunk[1];
            self.f[i] = chunk[2];
            self.g[i] = chunk[3];
        }
    }

    /// Largest absolute nodal difference over all four profiles.
    pub fn sup_distance(&self, other: &Self) -> f64 {
        Field::ALL
            .iter()
            .flat_map(|&fl| self.field(fl).iter().zip(other.field(fl)))
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max)
    }
}

/// Amplitude of the `g` seed `g_amp · r^M e^{−r}`.
pub const DEFAULT_G_AMPLITUDE: f64 = 1.0;

/// Default starting profile for the minimizer.
///
/// `a = (1 − e^{−r²})/e₁`, `b = e^{−r²}/e₂`, `f = tanh(r)^N`,
/// `g = r^M e^{−r}`, then pins enforced.
pub fn initial_profile(params: &ParameterSet, grid: &RadialGrid) -> FieldConfiguration {
    initial_profile_with_amplitude(params, grid, DEFAULT_G_AMPLITUDE)
}

pub fn initial_profile_with_amplitude(
    params: &ParameterSet,
    grid: &RadialGrid,
    g_amp: f64,
) -> FieldConfiguration {
    let r = grid.nodes();
    let n_wind = params.n_wind as i32;
    let m_wind = params.m_wind as i32;
    let mut c = FieldConfiguration {
        a: r.iter().map(|&r| -(-r * r).exp_m1() / params.e1).collect(),
        b: r.iter().map(|&r| (-r * r).exp() / params.e2).collect(),
        f: r.iter().map(|&r| r.tanh().powi(n_wind)).collect(),
        g: r.iter().map(|&r| g_amp * r.powi(m_wind) * (-r).exp()).collect(),
        pins: PinSet::admissible(),
    };
    c.apply_pins(params);
    c
}

/// Clamps `a` into `[0, 1/e₁]` and `f` into `[0, 1]`; `b` and `g` are left
/// alone. Pinned entries already lie inside the bounds.
pub fn truncate(config: &FieldConfiguration, params: &ParameterSet) -> FieldConfiguration {
    let a_max = 1.0 / params.e1;
    let mut out = config.clone();
    for v in &mut out.a {
        *v = v.clamp(0.0, a_max);
    }
    for v in &mut out.f {
        *v = v.clamp(0.0, 1.0);
    }
    out
}

/// Outcome of checking `0 < a < 1/e₁` and `0 < f < 1` on interior nodes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundsCheck {
    pub holds: bool,
    /// Interior nodes at or a few ulps above the upper limit. These are
    /// accepted only in a saturated tail where every later node is within
    /// `8·eps` of the limit, since there the exact gap is below one ulp.
    pub rounded_to_limit: usize,
    pub first_violation: Option<(Field, usize, f64)>,
}

/// Checks the interior bounds on `a` and `f`.
pub fn check_bounds(config: &FieldConfiguration, params: &ParameterSet) -> BoundsCheck {
    let k = config.node_count().saturating_sub(1);
    let mut rounded = 0;
    let mut violation = None;
    for (field, upper) in [(Field::A, 1.0 / params.e1), (Field::F, 1.0)] {
        let u = config.field(field);
        let saturated = |i: usize| u[i..k].iter().all(|v| (upper - v).abs() <= 8.0 * f64::EPSILON * upper);
        for i in 1..k {
            let v = u[i];
            let ok = v > 0.0 && (v < upper || saturated(i));
            if v >= upper && ok {
                rounded += 1;
            }
            if !ok && violation.is_none() {
                violation = Some((field, i, v));
            }
        }
    }
    BoundsCheck {
        holds: violation.is_none(),
        rounded_to_limit: rounded,
        first_violation: violation,
    }
}
