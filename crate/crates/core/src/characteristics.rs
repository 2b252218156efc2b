//! The functions h, K, Ψ, Ψ* of a model, their inverses, the truncated drift
//! b_r and the directional form ⟨x,Ax⟩ + ∫_{|⟨x,z⟩|<1}|⟨x,z⟩|² n(z) dz.

use std::f64::consts::PI;
use std::io::Write;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{LevyError, Result};
use crate::model::{sphere_directions, Anisotropy, LevyModel, ProfileKind, UnimodalProfile};
use crate::quad::{self, Estimate, Tolerance};
use crate::roots::{decade_grid, log_bisect};
use crate::special::{kernel_zero, one_minus_kernel, sin_minus_identity, sphere_area, sphere_kernel};

pub const TABLE_LO: f64 = 1e-6;
pub const TABLE_HI: f64 = 1e6;
pub const TABLE_PER_DECADE: usize = 32;

const FINE: Tolerance = Tolerance::new(1e-300, 1e-13);
const PSI_TOL: Tolerance = Tolerance::new(1e-300, 1e-12);
const SPHERE_TOL: Tolerance = Tolerance::new(1e-300, 1e-11);
const ANISO_TOL: Tolerance = Tolerance::new(1e-300, 1e-9);
const MAX_CYCLES: usize = 6000;
const EXPLICIT_CYCLES: f64 = 400.0;
const UNRESOLVED_PHASE: f64 = 1e14;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComplexExponent {
    pub re: f64,
    pub im: f64,
}

impl ComplexExponent {
    pub const ZERO: ComplexExponent = ComplexExponent { re: 0.0, im: 0.0 };
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Monotone {
    Increasing,
    Decreasing,
}

/// Monotone radial function tabulated on a log grid, interpolated linearly in
/// log-log coordinates with power-law tails fitted on the boundary decades.
#[derive(Clone, Debug)]
pub struct RadialTable {
    log_r: Vec<f64>,
    log_v: Vec<f64>,
    raw: Vec<f64>,
    direction: Monotone,
    tail_lo: f64,
    tail_hi: f64,
}

impl RadialTable {
    pub fn new(radii: &[f64], values: &[f64], direction: Monotone) -> Result<Self> {
        if radii.len() < 2 || radii.len() != values.len() {
            return Err(LevyError::EmptyGrid);
        }
        for (i, w) in values.windows(2).enumerate() {
            let ok = match direction {
                Monotone::Decreasing => w[1] < w[0],
                Monotone::Increasing => w[1] >= w[0],
            };
            if !ok || !(radii[i + 1] > radii[i]) {
                return Err(LevyError::NonMonotoneTable { radius: radii[i + 1] });
            }
        }
        if values.iter().any(|v| !(*v > 0.0) || !v.is_finite()) {
            return Err(LevyError::InvalidParameter("table values must be positive and finite".into()));
        }
        let log_r: Vec<f64> = radii.iter().map(|r| r.ln()).collect();
        let log_v: Vec<f64> = values.iter().map(|v| v.ln()).collect();
        let n = log_r.len();
        let decade = 10f64.ln();
        let j_lo = (0..n).find(|&j| log_r[j] - log_r[0] >= decade * (1.0 - 1e-9)).unwrap_or(n - 1);
        let j_hi = (0..n).rev().find(|&j| log_r[n - 1] - log_r[j] >= decade * (1.0 - 1e-9)).unwrap_or(0);
        let tail_lo = (log_v[j_lo] - log_v[0]) / (log_r[j_lo] - log_r[0]);
        let tail_hi = (log_v[n - 1] - log_v[j_hi]) / (log_r[n - 1] - log_r[j_hi]);
        Ok(RadialTable {
            log_r,
            log_v,
            raw: values.to_vec(),
            direction,
            tail_lo,
            tail_hi,
        })
    }

    pub fn len(&self) -> usize {
        self.log_r.len()
    }

    pub fn is_empty(&self) -> bool {
        self.log_r.is_empty()
    }

    pub fn direction(&self) -> Monotone {
        self.direction
    }

    pub fn radii(&self) -> Vec<f64> {
        self.log_r.iter().map(|u| u.exp()).collect()
    }

    pub fn values(&self) -> &[f64] {
        &self.raw
    }

    pub fn tail_exponents(&self) -> (f64, f64) {
        (self.tail_lo, self.tail_hi)
    }

    pub fn eval(&self, r: f64) -> f64 {
        let u = r.ln();
        let n = self.log_r.len();
        if u == self.log_r[n - 1] {
            return self.raw[n - 1];
        }
        if u == self.log_r[0] {
            return self.raw[0];
        }
        if u <= self.log_r[0] {
            return (self.log_v[0] + self.tail_lo * (u - self.log_r[0])).exp();
        }
        if u >= self.log_r[n - 1] {
            return (self.log_v[n - 1] + self.tail_hi * (u - self.log_r[n - 1])).exp();
        }
        let i = self.log_r.partition_point(|&x| x <= u) - 1;
        if u == self.log_r[i] {
            return self.raw[i];
        }
        let w = (u - self.log_r[i]) / (self.log_r[i + 1] - self.log_r[i]);
        (self.log_v[i] + w * (self.log_v[i + 1] - self.log_v[i])).exp()
    }

    /// Adjacent nodes whose values enclose `v`, or None outside the table.
    pub fn bracket(&self, v: f64) -> Option<(f64, f64)> {
        let lv = v.ln();
        let n = self.log_v.len();
        let i = match self.direction {
            Monotone::Decreasing => {
                if lv > self.log_v[0] || lv < self.log_v[n - 1] {
                    return None;
                }
                self.log_v.partition_point(|&x| x >= lv)
            }
            Monotone::Increasing => {
                if lv < self.log_v[0] || lv > self.log_v[n - 1] {
                    return None;
                }
                self.log_v.partition_point(|&x| x <= lv)
            }
        };
        let lo = i.saturating_sub(2);
        let hi = (i + 1).min(n - 1);
        Some((self.log_r[lo].exp(), self.log_r[hi].exp()))
    }
}

/// Generalized inverse of Ψ*; `plateau` marks a locally constant Ψ*.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PsiStarInverse {
    pub radius: f64,
    pub plateau: bool,
}

#[derive(Clone, Copy, Debug)]
enum Osc {
    Cos,
    Sin,
    Sphere(usize),
}

impl Osc {
    fn value(self, s: f64) -> f64 {
        match self {
            Osc::Cos => s.cos(),
            Osc::Sin => s.sin(),
            Osc::Sphere(d) => sphere_kernel(d, s),
        }
    }

    fn one_minus(self, s: f64) -> f64 {
        match self {
            Osc::Cos => one_minus_kernel(1, s),
            Osc::Sphere(d) => one_minus_kernel(d, s),
            Osc::Sin => sin_minus_identity(s),
        }
    }

    /// k-th positive zero, k ≥ 1.
    fn zero(self, k: usize) -> f64 {
        match self {
            Osc::Cos => (k as f64 - 0.5) * PI,
            Osc::Sin => k as f64 * PI,
            Osc::Sphere(1) => (k as f64 - 0.5) * PI,
            Osc::Sphere(d) => kernel_zero(d, k),
        }
    }
}

fn ln_weight(profile: &UnimodalProfile, p: f64, u: f64) -> f64 {
    profile.ln_eval_weighted(u, p)
}

/// ∫_{a}^{∞} Λ(s) g(s) ds with g(s) = ω⁻¹ (s/ω)^p ν₀(s/ω), summed over
/// half-periods with epsilon extrapolation.
fn oscillatory_tail(profile: &UnimodalProfile, osc: Osc, p: f64, omega: f64, a: f64) -> Estimate {
    let support = profile.support_max() * omega;
    if a >= support {
        return Estimate::ZERO;
    }
    if support.is_finite() && (support - a) / PI > EXPLICIT_CYCLES {
        if let Some(ext) = untruncated(profile) {
            let full = oscillatory_tail(&ext, osc, p, omega, a);
            let beyond = oscillatory_tail(&ext, osc, p, omega, support);
            return Estimate {
                value: full.value - beyond.value,
                error: full.error + beyond.error,
                evaluations: full.evaluations + beyond.evaluations,
                converged: full.converged && beyond.converged,
            };
        }
    }
    let lw = omega.ln();
    let breaks: Vec<f64> = profile.breakpoints().iter().map(|r| r * omega).collect();
    let g = |s: f64| {
        let l = ln_weight(profile, p, s.ln() - lw) - lw;
        if l == f64::NEG_INFINITY {
            0.0
        } else {
            osc.value(s) * l.exp()
        }
    };
    if a > UNRESOLVED_PHASE {
        // half-periods no longer resolve in f64; the alternating tail is
        // bounded by its first lobe
        let w = ln_weight(profile, p, a.ln() - lw) - lw;
        return Estimate {
            value: 0.0,
            error: PI * w.exp(),
            evaluations: 1,
            converged: true,
        };
    }
    let mut k0 = ((a / PI).floor() as usize).max(1);
    while k0 > 1 && osc.zero(k0 - 1) > a {
        k0 -= 1;
    }
    while osc.zero(k0) <= a {
        k0 += 1;
    }
    let endpoint = |j: usize| if j == 0 { a } else { osc.zero(k0 + j - 1) };
    let scale = profile
        .power_moment_estimate(p, a / omega, f64::INFINITY, Tolerance::new(1e-300, 1e-6))
        .value
        .abs();
    let exhausted = if support.is_finite() {
        let mut j = 0;
        while endpoint(j) < support {
            j += 1;
        }
        Some(j)
    } else {
        None
    };
    let mut gm = g;
    quad::sum_cycles(
        |j| {
            let (lo, hi) = (endpoint(j), endpoint(j + 1));
            quad::adaptive(&mut gm, lo, hi, &breaks, Tolerance::new(1e-16 * scale, 1e-13), 200)
        },
        PSI_TOL,
        scale,
        MAX_CYCLES,
        exhausted,
    )
}

fn untruncated(profile: &UnimodalProfile) -> Option<UnimodalProfile> {
    match profile.kind() {
        ProfileKind::Truncated { alpha, .. } => UnimodalProfile::stable(*alpha, profile.dim())
            .ok()
            .map(|p| p.scaled(profile.scale())),
        _ => None,
    }
}

/// ∫_0^∞ (1 − Λ(ωρ)) ρ^p ν₀(ρ) dρ.
fn cos_transform(profile: &UnimodalProfile, osc: Osc, p: f64, omega: f64) -> Estimate {
    if profile.is_zero() {
        return Estimate { converged: true, ..Estimate::ZERO };
    }
    if omega == 0.0 {
        return Estimate::ZERO;
    }
    let s1 = osc.zero(1);
    let r1 = s1 / omega;
    let breaks: Vec<f64> = profile.breakpoints().iter().map(|r| r.ln()).collect();
    let mut fa = |u: f64| {
        let l = ln_weight(profile, p + 1.0, u);
        if l == f64::NEG_INFINITY {
            0.0
        } else {
            let k = osc.one_minus(omega * u.exp());
            if k > 0.0 {
                (k.ln() + l).exp()
            } else {
                0.0
            }
        }
    };
    let region_a = quad::integrate_from_neg_infinity(&mut fa, r1.ln(), &breaks, FINE);
    let mass = profile.power_moment_estimate(p, r1, f64::INFINITY, FINE);
    let wave = oscillatory_tail(profile, osc, p, omega, s1);
    Estimate {
        value: (region_a.value + mass.value - wave.value).max(0.0),
        error: region_a.error + mass.error + wave.error,
        evaluations: region_a.evaluations + mass.evaluations + wave.evaluations,
        converged: region_a.converged && mass.converged && wave.converged,
    }
}

/// ∫_0^∞ (sin ωρ − ωρ 1_{ρ<1}) ρ^p ν₀(ρ) dρ for ω > 0.
fn sin_transform(profile: &UnimodalProfile, p: f64, omega: f64) -> Estimate {
    if profile.is_zero() {
        return Estimate { converged: true, ..Estimate::ZERO };
    }
    if omega == 0.0 {
        return Estimate::ZERO;
    }
    let r1 = PI / omega;
    let breaks: Vec<f64> = profile.breakpoints().iter().map(|r| r.ln()).collect();
    let mut fa = |u: f64| {
        let l = ln_weight(profile, p + 1.0, u);
        if l == f64::NEG_INFINITY {
            0.0
        } else {
            let k = sin_minus_identity(omega * u.exp());
            if k < 0.0 {
                -((-k).ln() + l).exp()
            } else {
                0.0
            }
        }
    };
    let region_a = quad::integrate_from_neg_infinity(&mut fa, r1.ln(), &breaks, FINE);
    let wave = oscillatory_tail(profile, Osc::Sin, p, omega, PI);
    let comp = if r1 < 1.0 {
        profile.power_moment_estimate(p + 1.0, r1, 1.0, FINE)
    } else {
        profile.power_moment_estimate(p + 1.0, 1.0, r1, FINE).scaled(-1.0)
    };
    Estimate {
        value: region_a.value + wave.value - omega * comp.value,
        error: region_a.error + wave.error + omega * comp.error,
        evaluations: region_a.evaluations + wave.evaluations + comp.evaluations,
        converged: region_a.converged && wave.converged && comp.converged,
    }
}

/// ln C(ω) and S(ω)/C(ω) for the one-dimensional transforms of ρ^{d−1}ν₀,
/// tabulated on ln ω with cubic interpolation.
#[derive(Debug)]
struct TransformTable {
    ln_w: Vec<f64>,
    ln_c: Vec<f64>,
    ratio: Vec<f64>,
}

const TRANSFORM_LO: f64 = 1e-8;
const TRANSFORM_HI: f64 = 1e9;

impl TransformTable {
    fn build(profile: &UnimodalProfile) -> Result<Self> {
        let p = profile.dim() as f64 - 1.0;
        let grid = decade_grid(TRANSFORM_LO, TRANSFORM_HI, 32);
        let rows: Vec<(f64, f64, f64)> = {
            use rayon::prelude::*;
            grid.par_iter()
                .map(|&w| {
                    let c = cos_transform(profile, Osc::Cos, p, w);
                    let s = sin_transform(profile, p, w);
                    (w, c.value, s.value)
                })
                .collect()
        };
        let mut ln_w = Vec::with_capacity(rows.len());
        let mut ln_c = Vec::with_capacity(rows.len());
        let mut ratio = Vec::with_capacity(rows.len());
        for (w, c, s) in rows {
            if !(c > 0.0) {
                return Err(LevyError::QuadratureFailure {
                    context: format!("cosine transform at frequency {w}"),
                    value: c,
                    error: f64::NAN,
                });
            }
            ln_w.push(w.ln());
            ln_c.push(c.ln());
            ratio.push(s / c);
        }
        Ok(TransformTable { ln_w, ln_c, ratio })
    }

    fn interp(xs: &[f64], ys: &[f64], x: f64) -> f64 {
        let n = xs.len();
        let i = xs.partition_point(|&v| v <= x).clamp(2, n - 2) - 1;
        let (i0, i3) = (i - 1, i + 2);
        let mut sum = 0.0;
        for j in i0..=i3 {
            let mut l = 1.0;
            for m in i0..=i3 {
                if m != j {
                    l *= (x - xs[m]) / (xs[j] - xs[m]);
                }
            }
            sum += l * ys[j];
        }
        sum
    }

    /// (C(ω), S(ω)) for ω within the table, power-law extrapolated below.
    fn eval(&self, omega: f64) -> Option<(f64, f64)> {
        if omega <= 0.0 {
            return Some((0.0, 0.0));
        }
        let x = omega.ln();
        let n = self.ln_w.len();
        if x > self.ln_w[n - 1] {
            return None;
        }
        if x < self.ln_w[0] {
            let slope = (self.ln_c[1] - self.ln_c[0]) / (self.ln_w[1] - self.ln_w[0]);
            let c = (self.ln_c[0] + slope * (x - self.ln_w[0])).exp();
            return Some((c, c * self.ratio[0]));
        }
        let c = Self::interp(&self.ln_w, &self.ln_c, x).exp();
        let q = Self::interp(&self.ln_w, &self.ratio, x);
        Some((c, c * q))
    }
}

#[derive(Debug)]
struct ProfileTable {
    radii: Vec<f64>,
    inner: Vec<f64>,
    outer: Vec<f64>,
    h: RadialTable,
    h0: RadialTable,
}

#[derive(Debug)]
struct PsiStarTable {
    radii: Vec<f64>,
    running: Vec<f64>,
    table: RadialTable,
}

/// Characteristic functions of a model, with lazily built tables.
#[derive(Debug)]
pub struct Characteristics {
    model: LevyModel,
    directions: Vec<Vec<f64>>,
    profile_table: OnceLock<Result<ProfileTable>>,
    psi_star_table: OnceLock<Result<PsiStarTable>>,
    transform_table: OnceLock<Result<TransformTable>>,
}

fn copy_err(e: &LevyError) -> LevyError {
    e.clone()
}

impl Characteristics {
    pub fn new(model: LevyModel) -> Self {
        let d = model.dim();
        let directions = if d == 1 || model.anisotropy().is_isotropic() {
            Vec::new()
        } else if d == 2 {
            sphere_directions(2, 32)
        } else {
            sphere_directions(3, 128)
        };
        Characteristics {
            model,
            directions,
            profile_table: OnceLock::new(),
            psi_star_table: OnceLock::new(),
            transform_table: OnceLock::new(),
        }
    }

    pub fn model(&self) -> &LevyModel {
        &self.model
    }

    pub fn dim(&self) -> usize {
        self.model.dim()
    }

    fn profile(&self) -> &UnimodalProfile {
        self.model.profile()
    }

    /// ∫_0^r ρ^{d+1} ν₀(ρ) dρ.
    pub fn inner_moment(&self, r: f64) -> Result<f64> {
        self.profile().inner_second_moment(r)
    }

    /// ∫_r^∞ ρ^{d−1} ν₀(ρ) dρ.
    pub fn outer_moment(&self, r: f64) -> Result<f64> {
        self.profile().outer_mass(r)
    }

    fn check_radius(r: f64) -> Result<()> {
        if r > 0.0 && r.is_finite() {
            Ok(())
        } else {
            Err(LevyError::InvalidParameter(format!("radius must be positive and finite, got {r}")))
        }
    }

    /// h(r) = ‖A‖/r² + ∫(1 ∧ |x|²/r²) n(x) dx.
    pub fn h(&self, r: f64) -> Result<f64> {
        Self::check_radius(r)?;
        let jump = self.inner_moment(r)? / (r * r) + self.outer_moment(r)?;
        Ok(self.model.gaussian_norm() / (r * r) + self.model.moments().mass * jump)
    }

    /// K(r) = ‖A‖/r² + r⁻² ∫_{|x|<r} |x|² n(x) dx.
    pub fn k(&self, r: f64) -> Result<f64> {
        Self::check_radius(r)?;
        Ok((self.model.gaussian_norm() + self.model.moments().mass * self.inner_moment(r)?) / (r * r))
    }

    /// h of the isotropic measure ν₀(|x|) dx alone.
    pub fn h0(&self, r: f64) -> Result<f64> {
        Self::check_radius(r)?;
        let w = sphere_area(self.dim());
        Ok(w * (self.inner_moment(r)? / (r * r) + self.outer_moment(r)?))
    }

    /// K of the isotropic measure ν₀(|x|) dx alone.
    pub fn k0(&self, r: f64) -> Result<f64> {
        Self::check_radius(r)?;
        Ok(sphere_area(self.dim()) * self.inner_moment(r)? / (r * r))
    }

    /// ∫_{|z|≥r} n(z) dz.
    pub fn tail_mass(&self, r: f64) -> Result<f64> {
        Ok(self.model.moments().mass * self.outer_moment(r)?)
    }

    fn profile_table(&self) -> Result<&ProfileTable> {
        self.profile_table
            .get_or_init(|| self.build_profile_table())
            .as_ref()
            .map_err(copy_err)
    }

    fn build_profile_table(&self) -> Result<ProfileTable> {
        let radii = decade_grid(TABLE_LO, TABLE_HI, TABLE_PER_DECADE);
        let p = self.profile();
        let d = self.dim() as f64;
        let n = radii.len();
        let mut inner = vec![0.0; n];
        let mut outer = vec![0.0; n];
        inner[0] = p.power_moment(d + 1.0, 0.0, radii[0])?;
        for i in 1..n {
            inner[i] = inner[i - 1] + p.power_moment(d + 1.0, radii[i - 1], radii[i])?;
        }
        outer[n - 1] = p.power_moment(d - 1.0, radii[n - 1], f64::INFINITY)?;
        for i in (0..n - 1).rev() {
            outer[i] = outer[i + 1] + p.power_moment(d - 1.0, radii[i], radii[i + 1])?;
        }
        let w = sphere_area(self.dim());
        let m = self.model.moments().mass;
        let g = self.model.gaussian_norm();
        let h0: Vec<f64> = (0..n).map(|i| w * (inner[i] / (radii[i] * radii[i]) + outer[i])).collect();
        let h: Vec<f64> = (0..n)
            .map(|i| g / (radii[i] * radii[i]) + m * (inner[i] / (radii[i] * radii[i]) + outer[i]))
            .collect();
        Ok(ProfileTable {
            h: RadialTable::new(&radii, &h, Monotone::Decreasing)?,
            h0: RadialTable::new(&radii, &h0, Monotone::Decreasing)?,
            radii,
            inner,
            outer,
        })
    }

    /// Tabulated h on the default grid.
    pub fn h_table(&self) -> Result<&RadialTable> {
        Ok(&self.profile_table()?.h)
    }

    fn invert_decreasing<F: Fn(f64) -> Result<f64>>(&self, f: F, table: Option<&RadialTable>, u: f64) -> Result<f64> {
        if !(u > 0.0) || !u.is_finite() {
            return Err(LevyError::InvalidParameter(format!("cannot invert at level {u}")));
        }
        let (mut lo, mut hi) = match table.and_then(|t| t.bracket(u)) {
            Some(b) => b,
            None => (1.0, 1.0),
        };
        let mut guard = 0;
        while f(lo)? < u {
            lo /= 10.0;
            guard += 1;
            if lo < 1e-300 || guard > 400 {
                return Err(LevyError::BracketFailure(format!("level {u} exceeds the function near 0")));
            }
        }
        while f(hi)? > u {
            hi *= 10.0;
            guard += 1;
            if hi > 1e300 || guard > 800 {
                return Err(LevyError::BracketFailure(format!("level {u} below the function at large radius")));
            }
        }
        let mut err = None;
        let r = log_bisect(
            |r| match f(r) {
                Ok(v) => v >= u,
                Err(e) => {
                    err.get_or_insert(e);
                    false
                }
            },
            lo,
            hi,
            1e-14,
            200,
        );
        match err {
            Some(e) => Err(e),
            None => Ok(r),
        }
    }

    /// h⁻¹(u).
    pub fn h_inv(&self, u: f64) -> Result<f64> {
        let table = self.profile_table().ok().map(|t| &t.h);
        self.invert_decreasing(|r| self.h(r), table, u)
    }

    /// h₀⁻¹(u).
    pub fn h0_inv(&self, u: f64) -> Result<f64> {
        let table = self.profile_table().ok().map(|t| &t.h0);
        self.invert_decreasing(|r| self.h0(r), table, u)
    }

    fn transform_table(&self) -> Result<&TransformTable> {
        self.transform_table
            .get_or_init(|| TransformTable::build(self.profile()))
            .as_ref()
            .map_err(copy_err)
    }

    fn transforms(&self, omega: f64) -> Result<(f64, f64)> {
        if let Some(v) = self.transform_table()?.eval(omega) {
            return Ok(v);
        }
        let p = self.dim() as f64 - 1.0;
        let c = cos_transform(self.profile(), Osc::Cos, p, omega);
        let s = sin_transform(self.profile(), p, omega);
        if !(c.converged && s.converged) {
            return Err(LevyError::OscillatoryQuadratureFailure {
                frequency: omega,
                context: "directional transform".into(),
            });
        }
        Ok((c.value, s.value))
    }

    fn isotropic_weight(&self) -> Option<f64> {
        match self.model.anisotropy() {
            Anisotropy::Isotropic => Some(1.0),
            Anisotropy::HalfSpace { plus, minus, .. } if plus == minus => Some(*plus),
            _ => None,
        }
    }

    /// ∫_S a(θ) F(⟨axis, θ⟩) dσ(θ) for a unit vector `axis`.
    pub fn sphere_integral<F: FnMut(f64) -> f64>(&self, axis: &[f64], tol: Tolerance, mut f: F) -> Estimate {
        let d = self.dim();
        let an = self.model.anisotropy();
        if d == 1 {
            let s = axis[0].signum();
            let v = an.eval(&[s]) * f(1.0) + an.eval(&[-s]) * f(-1.0);
            return Estimate { value: v, ..Estimate::ZERO };
        }
        if let Some(c) = self.isotropic_weight() {
            let w = sphere_area(d - 1);
            let e = quad::integrate(
                &mut |phi: f64| f(phi.cos()) * phi.sin().powi(d as i32 - 2),
                0.0,
                PI,
                &[0.5 * PI],
                tol,
            );
            return e.scaled(c * w);
        }
        match (d, an) {
            (2, _) => {
                let perp = [-axis[1], axis[0]];
                let mut breaks = vec![0.5 * PI, PI, 1.5 * PI];
                if let Anisotropy::HalfSpace { direction, .. } = an {
                    let psi = (axis[0] * direction[1] - axis[1] * direction[0])
                        .atan2(axis[0] * direction[0] + axis[1] * direction[1]);
                    for b in [psi + 0.5 * PI, psi - 0.5 * PI] {
                        breaks.push(b.rem_euclid(2.0 * PI));
                    }
                }
                quad::adaptive(
                    &mut |phi: f64| {
                        let (c, s) = (phi.cos(), phi.sin());
                        let theta = [c * axis[0] + s * perp[0], c * axis[1] + s * perp[1]];
                        an.eval(&theta) * f(c)
                    },
                    0.0,
                    2.0 * PI,
                    &breaks,
                    tol,
                    800,
                )
            }
            (3, Anisotropy::HalfSpace { direction, plus, minus }) => {
                let uz: f64 = axis.iter().zip(direction).map(|(a, b)| a * b).sum();
                let uperp = (1.0 - uz * uz).max(0.0).sqrt();
                let mut breaks = vec![0.0];
                if uperp > 0.0 && uperp < 1.0 {
                    breaks.push(uperp);
                    breaks.push(-uperp);
                }
                quad::adaptive(
                    &mut |c: f64| {
                        let frac = if uperp <= 1e-15 {
                            if c * uz > 0.0 {
                                2.0 * PI
                            } else {
                                0.0
                            }
                        } else {
                            let kappa = -c * uz / ((1.0 - c * c).max(0.0).sqrt() * uperp);
                            2.0 * kappa.clamp(-1.0, 1.0).acos()
                        };
                        (plus * frac + minus * (2.0 * PI - frac)) * f(c)
                    },
                    -1.0,
                    1.0,
                    &breaks,
                    tol,
                    800,
                )
            }
            _ => {
                // generic direction function in d = 3: azimuth trapezoid inside
                let (e1, e2) = orthonormal_complement(axis);
                let m = 64;
                quad::adaptive(
                    &mut |c: f64| {
                        let s = (1.0 - c * c).max(0.0).sqrt();
                        let mut acc = 0.0;
                        for j in 0..m {
                            let phi = 2.0 * PI * (j as f64 + 0.5) / m as f64;
                            let theta: Vec<f64> = (0..3)
                                .map(|k| c * axis[k] + s * (phi.cos() * e1[k] + phi.sin() * e2[k]))
                                .collect();
                            acc += an.eval(&theta);
                        }
                        acc * 2.0 * PI / m as f64 * f(c)
                    },
                    -1.0,
                    1.0,
                    &[0.0],
                    tol,
                    400,
                )
            }
        }
    }

    /// Jump part of Re Ψ along a ray, for models where it is radial.
    fn radial_jump_re(&self, omega: f64) -> Result<f64> {
        let d = self.dim();
        let e = if d == 1 {
            let an = self.model.anisotropy();
            cos_transform(self.profile(), Osc::Cos, 0.0, omega).scaled(an.eval(&[1.0]) + an.eval(&[-1.0]))
        } else {
            let c = self.isotropic_weight().expect("radial model");
            cos_transform(self.profile(), Osc::Sphere(d), d as f64 - 1.0, omega).scaled(c * sphere_area(d))
        };
        if !e.converged {
            return Err(LevyError::OscillatoryQuadratureFailure {
                frequency: omega,
                context: "real part of the exponent".into(),
            });
        }
        Ok(e.value)
    }

    fn jump_radial(&self) -> bool {
        self.dim() == 1 || self.isotropic_weight().is_some()
    }

    /// Ψ(z) = ⟨z,Az⟩ − i⟨z,b⟩ − ∫(e^{i⟨z,x⟩} − 1 − i⟨z,x⟩1_{|x|<1}) n(x) dx.
    pub fn psi(&self, z: &[f64]) -> Result<ComplexExponent> {
        let d = self.dim();
        if z.len() != d {
            return Err(LevyError::InvalidParameter("argument has wrong dimension".into()));
        }
        let omega = z.iter().map(|v| v * v).sum::<f64>().sqrt();
        if omega == 0.0 {
            return Ok(ComplexExponent::ZERO);
        }
        let quad_form = self.model.quadratic_form(z);
        let drift: f64 = z.iter().zip(self.model.drift()).map(|(a, b)| a * b).sum();
        if d == 1 {
            let an = self.model.anisotropy();
            let (ap, am) = (an.eval(&[1.0]), an.eval(&[-1.0]));
            let re = self.radial_jump_re(omega)?;
            let im_jump = if ap != am {
                let s = sin_transform(self.profile(), 0.0, omega);
                if !s.converged {
                    return Err(LevyError::OscillatoryQuadratureFailure {
                        frequency: omega,
                        context: "imaginary part of the exponent".into(),
                    });
                }
                (ap - am) * z[0].signum() * s.value
            } else {
                0.0
            };
            return Ok(ComplexExponent {
                re: quad_form + re,
                im: -drift - im_jump,
            });
        }
        if self.isotropic_weight().is_some() {
            return Ok(ComplexExponent {
                re: quad_form + self.radial_jump_re(omega)?,
                im: -drift,
            });
        }
        let axis: Vec<f64> = z.iter().map(|v| v / omega).collect();
        let mut failure = None;
        let re = self.sphere_integral(&axis, ANISO_TOL, |c| match self.transforms(omega * c.abs()) {
            Ok((cv, _)) => cv,
            Err(e) => {
                failure.get_or_insert(e);
                0.0
            }
        });
        let im = if self.model.is_symmetric() {
            Estimate::ZERO
        } else {
            self.sphere_integral(&axis, ANISO_TOL, |c| match self.transforms(omega * c.abs()) {
                Ok((_, sv)) => c.signum() * sv,
                Err(e) => {
                    failure.get_or_insert(e);
                    0.0
                }
            })
        };
        if let Some(e) = failure {
            return Err(e);
        }
        Ok(ComplexExponent {
            re: quad_form + re.value.max(0.0),
            im: -drift - im.value,
        })
    }

    /// Re Ψ(ρθ) − ⟨ρθ, Aρθ⟩ + λ_max ρ² for radial models, or Re Ψ(ρθ).
    fn ray_value(&self, rho: f64, theta: Option<&[f64]>) -> Result<f64> {
        match theta {
            None => Ok(self.model.gaussian_norm() * rho * rho + self.radial_jump_re(rho)?),
            Some(th) => {
                let z: Vec<f64> = th.iter().map(|v| v * rho).collect();
                Ok(self.psi(&z)?.re)
            }
        }
    }

    fn max_over_directions(&self, rho: f64) -> Result<f64> {
        if self.directions.is_empty() {
            return self.ray_value(rho, None);
        }
        let mut m: f64 = 0.0;
        for th in &self.directions {
            m = m.max(self.ray_value(rho, Some(th))?);
        }
        Ok(m)
    }

    fn psi_star_table(&self) -> Result<&PsiStarTable> {
        self.psi_star_table
            .get_or_init(|| self.build_psi_star_table())
            .as_ref()
            .map_err(copy_err)
    }

    fn build_psi_star_table(&self) -> Result<PsiStarTable> {
        use rayon::prelude::*;
        let radii = decade_grid(TABLE_LO, TABLE_HI, TABLE_PER_DECADE);
        let values: Vec<Result<f64>> = radii.par_iter().map(|&r| self.max_over_directions(r)).collect();
        let mut running = Vec::with_capacity(radii.len());
        let mut m: f64 = 0.0;
        for v in values {
            m = m.max(v?);
            running.push(m);
        }
        Ok(PsiStarTable {
            table: RadialTable::new(&radii, &running, Monotone::Increasing)?,
            radii,
            running,
        })
    }

    /// Number of sphere directions sampled for Ψ* (0 for radial models).
    pub fn psi_star_directions(&self) -> usize {
        self.directions.len()
    }

    /// Ψ*(r) = sup_{|z| ≤ r} Re Ψ(z).
    pub fn psi_star(&self, r: f64) -> Result<f64> {
        Self::check_radius(r)?;
        if !self.jump_radial() && self.directions.is_empty() {
            return Err(LevyError::DirectionSamplingExhausted("no sphere directions available".into()));
        }
        let t = self.psi_star_table()?;
        let here = self.max_over_directions(r)?;
        let n = t.radii.len();
        if r < t.radii[0] {
            let mut m = here;
            for rho in decade_grid(r * 1e-2, r, 8) {
                m = m.max(self.max_over_directions(rho)?);
            }
            return Ok(m);
        }
        if r > t.radii[n - 1] {
            let mut m = t.running[n - 1].max(here);
            for rho in decade_grid(t.radii[n - 1], r, TABLE_PER_DECADE) {
                m = m.max(self.max_over_directions(rho)?);
            }
            return Ok(m);
        }
        let i = t.radii.partition_point(|&x| x <= r * (1.0 + 1e-15)).max(1) - 1;
        Ok(t.running[i].max(here))
    }

    /// Tabulated running maximum of Ψ* on the default grid.
    pub fn psi_star_table_values(&self) -> Result<&RadialTable> {
        Ok(&self.psi_star_table()?.table)
    }

    /// sup{r : Ψ*(r) ≤ s}, flagged when Ψ* is flat there.
    pub fn psi_star_inv(&self, s: f64) -> Result<PsiStarInverse> {
        if !(s > 0.0) || !s.is_finite() {
            return Err(LevyError::InvalidParameter(format!("cannot invert Ψ* at level {s}")));
        }
        let (mut lo, mut hi) = match self.psi_star_table().ok().and_then(|t| t.table.bracket(s)) {
            Some(b) => b,
            None => (1.0, 1.0),
        };
        while self.psi_star(lo)? > s {
            lo /= 10.0;
            if lo < 1e-300 {
                return Err(LevyError::BracketFailure(format!("Ψ* exceeds {s} near the origin")));
            }
        }
        while self.psi_star(hi)? <= s {
            hi *= 10.0;
            if hi > 1e30 {
                return Err(LevyError::BracketFailure(format!("Ψ* stays below {s}")));
            }
        }
        let mut err = None;
        let r = log_bisect(
            |r| match self.psi_star(r) {
                Ok(v) => v <= s,
                Err(e) => {
                    err.get_or_insert(e);
                    false
                }
            },
            lo,
            hi,
            1e-14,
            200,
        );
        if let Some(e) = err {
            return Err(e);
        }
        let at = self.psi_star(r)?;
        let before = self.psi_star(r * (1.0 - 1e-3))?;
        Ok(PsiStarInverse {
            radius: r,
            plateau: (at - before).abs() <= 1e-12 * at,
        })
    }

    /// b_r = b + ∫ z (1_{|z|<r} − 1_{|z|<1}) n(z) dz.
    pub fn drift_br(&self, r: f64) -> Result<Vec<f64>> {
        Self::check_radius(r)?;
        let b = self.model.drift().to_vec();
        if self.model.is_symmetric() || r == 1.0 {
            return Ok(b);
        }
        let d = self.dim() as f64;
        let radial = if r > 1.0 {
            self.profile().power_moment(d, 1.0, r)?
        } else {
            -self.profile().power_moment(d, r, 1.0)?
        };
        let m1 = &self.model.moments().first;
        Ok(b.iter().zip(m1).map(|(bi, mi)| bi + mi * radial).collect())
    }

    /// ⟨x,Ax⟩ + ∫_{|⟨x,z⟩|<1} |⟨x,z⟩|² n(z) dz.
    pub fn directional_k(&self, x: &[f64]) -> Result<f64> {
        let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        if !(norm > 0.0) || x.len() != self.dim() {
            return Err(LevyError::InvalidParameter("directional form needs a nonzero d-vector".into()));
        }
        let axis: Vec<f64> = x.iter().map(|v| v / norm).collect();
        let p = self.profile();
        let d = self.dim() as f64;
        let mut failure = None;
        let e = self.sphere_integral(&axis, SPHERE_TOL, |c| {
            let y = norm * c.abs();
            if y == 0.0 {
                return 0.0;
            }
            match p.power_moment(d + 1.0, 0.0, 1.0 / y) {
                Ok(j) => y * y * j,
                Err(err) => {
                    failure.get_or_insert(err);
                    0.0
                }
            }
        });
        if let Some(err) = failure {
            return Err(err);
        }
        Ok(self.model.quadratic_form(x) + e.value)
    }

    /// Write r, h, K, Ψ* on the table grid as CSV.
    pub fn write_table_csv<W: Write>(&self, mut w: W, comment: &str) -> Result<()> {
        let pt = self.profile_table()?;
        let ps = self.psi_star_table()?;
        for line in comment.lines() {
            writeln!(w, "# {line}")?;
        }
        writeln!(w, "r,h,K,T,psi_star")?;
        let g = self.model.gaussian_norm();
        let m = self.model.moments().mass;
        let hv = pt.h.values();
        for (i, &r) in pt.radii.iter().enumerate() {
            let k = (g + m * pt.inner[i]) / (r * r);
            writeln!(
                w,
                "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
                r,
                hv[i],
                k,
                m * pt.outer[i],
                ps.running[i]
            )?;
        }
        Ok(())
    }
}

fn orthonormal_complement(axis: &[f64]) -> ([f64; 3], [f64; 3]) {
    let helper = if axis[0].abs() < 0.9 { [1.0, 0.0, 0.0] } else { [0.0, 1.0, 0.0] };
    let dot: f64 = (0..3).map(|k| helper[k] * axis[k]).sum();
    let mut e1 = [0.0; 3];
    for k in 0..3 {
        e1[k] = helper[k] - dot * axis[k];
    }
    let n = (e1[0] * e1[0] + e1[1] * e1[1] + e1[2] * e1[2]).sqrt();
    for v in &mut e1 {
        *v /= n;
    }
    let e2 = [
        axis[1] * e1[2] - axis[2] * e1[1],
        axis[2] * e1[0] - axis[0] * e1[2],
        axis[0] * e1[1] - axis[1] * e1[0],
    ];
    (e1, e2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::builtin;

    fn cauchy() -> Characteristics {
        Characteristics::new(builtin::cauchy(1))
    }

    #[test]
    fn cauchy_h_and_k() {
        let c = cauchy();
        for &r in &[1e-3, 0.5, 1.0, 2.0, 1e4] {
            assert!((c.h(r).unwrap() * r / 4.0 - 1.0).abs() < 1e-12, "r={r}");
            assert!((c.k(r).unwrap() * r / 2.0 - 1.0).abs() < 1e-12, "r={r}");
        }
    }

    #[test]
    fn cauchy_inverse_h() {
        let c = cauchy();
        assert!((c.h_inv(4.0).unwrap() - 1.0).abs() < 1e-12);
        assert!((c.h_inv(1.0).unwrap() - 4.0).abs() < 1e-11);
        for &u in &[0.1, 1.0, 10.0] {
            let r = c.h_inv(u).unwrap();
            assert!((c.h(r).unwrap() / u - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn cauchy_exponent() {
        let c = cauchy();
        for &z in &[1e-6, 0.3, 1.0, -2.5, 40.0, 1e5] {
            let p = c.psi(&[z]).unwrap();
            assert!((p.re / (PI * z.abs()) - 1.0).abs() < 1e-10, "z={z} re={}", p.re);
            assert_eq!(p.im, 0.0);
        }
        assert_eq!(c.psi(&[0.0]).unwrap(), ComplexExponent::ZERO);
    }

    #[test]
    fn cauchy_psi_star() {
        let c = cauchy();
        assert!((c.psi_star(1.0).unwrap() - PI).abs() < 1e-9);
        let inv = c.psi_star_inv(PI).unwrap();
        assert!((inv.radius - 1.0).abs() < 1e-9);
        assert!(!inv.plateau);
    }

    #[test]
    fn one_sided_drift() {
        let c = Characteristics::new(builtin::one_sided(1.0, 1));
        let b = c.drift_br(2.0).unwrap();
        assert!((b[0] - 2f64.ln()).abs() < 1e-12);
        let b = c.drift_br(0.5).unwrap();
        assert!((b[0] + 2f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn cauchy_directional() {
        let c = cauchy();
        assert!((c.directional_k(&[2.0]).unwrap() - 4.0).abs() < 1e-12);
        assert!((c.directional_k(&[1.0]).unwrap() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn table_interpolation_exact_at_nodes() {
        let r = [1.0, 2.0, 4.0];
        let v = [8.0, 4.0, 2.0];
        let t = RadialTable::new(&r, &v, Monotone::Decreasing).unwrap();
        for i in 0..3 {
            assert_eq!(t.eval(r[i]), v[i]);
        }
        assert!((t.eval(8.0) - 1.0).abs() < 1e-12);
        assert!(RadialTable::new(&r, &[1.0, 2.0, 0.5], Monotone::Decreasing).is_err());
    }
}
