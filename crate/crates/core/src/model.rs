//! Lévy triplets with jump densities comparable to an isotropic unimodal
//! profile: n(x) = a(x/|x|) ν₀(|x|).

use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{LevyError, Result};
use crate::quad::{self, Estimate, Tolerance};
use crate::special::{half_sphere_moment, sphere_area};

pub type RadialFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;
pub type DirectionFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

/// Profile descriptor as read from JSON.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ProfileSpec {
    Stable {
        alpha: f64,
        #[serde(default)]
        scale: Option<f64>,
    },
    StableMixture {
        alpha: f64,
        beta: f64,
        #[serde(default)]
        scale: Option<f64>,
    },
    Tempered {
        alpha: f64,
        lambda: f64,
        #[serde(default)]
        scale: Option<f64>,
    },
    Truncated {
        alpha: f64,
        radius: f64,
        #[serde(default)]
        scale: Option<f64>,
    },
    LogHeavy {
        alpha: f64,
        #[serde(default)]
        scale: Option<f64>,
    },
    Table {
        points: Vec<[f64; 2]>,
    },
}

#[derive(Clone, Debug)]
pub struct LogTable {
    ln_r: Vec<f64>,
    ln_v: Vec<f64>,
    slope_lo: f64,
    slope_hi: f64,
}

impl LogTable {
    fn eval_ln(&self, u: f64) -> f64 {
        let n = self.ln_r.len();
        if u <= self.ln_r[0] {
            return self.ln_v[0] + self.slope_lo * (u - self.ln_r[0]);
        }
        if u >= self.ln_r[n - 1] {
            return self.ln_v[n - 1] + self.slope_hi * (u - self.ln_r[n - 1]);
        }
        let i = self.ln_r.partition_point(|&x| x <= u) - 1;
        let w = (u - self.ln_r[i]) / (self.ln_r[i + 1] - self.ln_r[i]);
        self.ln_v[i] + w * (self.ln_v[i + 1] - self.ln_v[i])
    }
}

#[derive(Clone)]
pub enum ProfileKind {
    Stable { alpha: f64 },
    StableMixture { alpha: f64, beta: f64 },
    Tempered { alpha: f64, lambda: f64 },
    Truncated { alpha: f64, radius: f64 },
    LogHeavy { alpha: f64 },
    Table(Arc<LogTable>),
    Custom { f: RadialFn, breakpoints: Vec<f64>, label: String },
}

impl fmt::Debug for ProfileKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ProfileKind::Stable { alpha } => write!(f, "stable(alpha={alpha})"),
            ProfileKind::StableMixture { alpha, beta } => write!(f, "stable-mixture(alpha={alpha}, beta={beta})"),
            ProfileKind::Tempered { alpha, lambda } => write!(f, "tempered(alpha={alpha}, lambda={lambda})"),
            ProfileKind::Truncated { alpha, radius } => write!(f, "truncated(alpha={alpha}, radius={radius})"),
            ProfileKind::LogHeavy { alpha } => write!(f, "log-heavy(alpha={alpha})"),
            ProfileKind::Table(t) => write!(f, "table({} nodes)", t.ln_r.len()),
            ProfileKind::Custom { label, .. } => write!(f, "custom({label})"),
        }
    }
}

/// Non-increasing radial jump intensity ν₀ on (0, ∞).
#[derive(Clone, Debug)]
pub struct UnimodalProfile {
    kind: ProfileKind,
    dim: usize,
    scale: f64,
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 2.0 {
        Ok(())
    } else {
        Err(LevyError::InvalidParameter(format!("alpha = {alpha} outside (0, 2)")))
    }
}

fn check_scale(scale: Option<f64>) -> Result<f64> {
    let s = scale.unwrap_or(1.0);
    if s > 0.0 && s.is_finite() {
        Ok(s)
    } else {
        Err(LevyError::InvalidParameter(format!("scale = {s} must be positive")))
    }
}

fn ln_add(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let m = a.max(b);
    m + ((a - m).exp() + (b - m).exp()).ln()
}

/// Build a profile from its descriptor in dimension `dim`.
pub fn make_profile(spec: &ProfileSpec, dim: usize) -> Result<UnimodalProfile> {
    if dim == 0 {
        return Err(LevyError::InvalidParameter("dimension must be positive".into()));
    }
    let (kind, scale) = match spec {
        ProfileSpec::Stable { alpha, scale } => {
            check_alpha(*alpha)?;
            (ProfileKind::Stable { alpha: *alpha }, check_scale(*scale)?)
        }
        ProfileSpec::StableMixture { alpha, beta, scale } => {
            check_alpha(*alpha)?;
            check_alpha(*beta)?;
            if beta >= alpha {
                return Err(LevyError::InvalidParameter(format!(
                    "stable-mixture needs beta < alpha, got alpha={alpha}, beta={beta}"
                )));
            }
            (ProfileKind::StableMixture { alpha: *alpha, beta: *beta }, check_scale(*scale)?)
        }
        ProfileSpec::Tempered { alpha, lambda, scale } => {
            check_alpha(*alpha)?;
            if !(*lambda > 0.0) {
                return Err(LevyError::InvalidParameter(format!("lambda = {lambda} must be positive")));
            }
            (ProfileKind::Tempered { alpha: *alpha, lambda: *lambda }, check_scale(*scale)?)
        }
        ProfileSpec::Truncated { alpha, radius, scale } => {
            check_alpha(*alpha)?;
            if !(*radius > 0.0) {
                return Err(LevyError::InvalidParameter(format!("radius = {radius} must be positive")));
            }
            (ProfileKind::Truncated { alpha: *alpha, radius: *radius }, check_scale(*scale)?)
        }
        ProfileSpec::LogHeavy { alpha, scale } => {
            check_alpha(*alpha)?;
            (ProfileKind::LogHeavy { alpha: *alpha }, check_scale(*scale)?)
        }
        ProfileSpec::Table { points } => (ProfileKind::Table(Arc::new(build_table(points)?)), 1.0),
    };
    let p = UnimodalProfile { kind, dim, scale };
    p.check_monotone()?;
    Ok(p)
}

fn build_table(points: &[[f64; 2]]) -> Result<LogTable> {
    if points.len() < 2 {
        return Err(LevyError::InvalidParameter("table needs at least two points".into()));
    }
    for w in points.windows(2) {
        if !(w[1][0] > w[0][0]) {
            return Err(LevyError::InvalidParameter("table radii must be strictly increasing".into()));
        }
        if w[1][1] > w[0][1] {
            return Err(LevyError::NonMonotoneTable { radius: w[1][0] });
        }
    }
    if points.iter().any(|p| !(p[0] > 0.0) || !(p[1] > 0.0) || !p[1].is_finite()) {
        return Err(LevyError::InvalidParameter("table radii and values must be positive and finite".into()));
    }
    let ln_r: Vec<f64> = points.iter().map(|p| p[0].ln()).collect();
    let ln_v: Vec<f64> = points.iter().map(|p| p[1].ln()).collect();
    let n = ln_r.len();
    let decade = 10f64.ln();
    let j_hi = (0..n).rev().find(|&j| ln_r[n - 1] - ln_r[j] >= decade).unwrap_or(0);
    let j_lo = (0..n).find(|&j| ln_r[j] - ln_r[0] >= decade).unwrap_or(n - 1);
    let slope_hi = (ln_v[n - 1] - ln_v[j_hi]) / (ln_r[n - 1] - ln_r[j_hi]);
    let slope_lo = (ln_v[j_lo] - ln_v[0]) / (ln_r[j_lo] - ln_r[0]);
    Ok(LogTable {
        ln_r,
        ln_v,
        slope_lo,
        slope_hi,
    })
}

const MOMENT_TOL: Tolerance = Tolerance::new(1e-300, 1e-13);

impl UnimodalProfile {
    pub fn stable(alpha: f64, dim: usize) -> Result<Self> {
        make_profile(&ProfileSpec::Stable { alpha, scale: None }, dim)
    }

    /// A user supplied radial function; `breakpoints` lists radii where it
    /// is not smooth.
    pub fn custom<F>(f: F, breakpoints: Vec<f64>, label: &str, dim: usize) -> Result<Self>
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        let p = UnimodalProfile {
            kind: ProfileKind::Custom {
                f: Arc::new(f),
                breakpoints,
                label: label.to_string(),
            },
            dim,
            scale: 1.0,
        };
        p.check_monotone()?;
        Ok(p)
    }

    pub fn kind(&self) -> &ProfileKind {
        &self.kind
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// The same shape multiplied by `c > 0`.
    pub fn scaled(&self, c: f64) -> Self {
        UnimodalProfile {
            scale: self.scale * c,
            ..self.clone()
        }
    }

    /// The identically zero profile, for models without jumps.
    pub fn zero(dim: usize) -> Self {
        UnimodalProfile {
            kind: ProfileKind::Stable { alpha: 1.0 },
            dim,
            scale: 0.0,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.scale == 0.0
    }

    pub fn with_dim(&self, dim: usize) -> Self {
        UnimodalProfile { dim, ..self.clone() }
    }

    pub fn describe(&self) -> String {
        if self.scale == 1.0 {
            format!("{:?}", self.kind)
        } else {
            format!("{} * {:?}", self.scale, self.kind)
        }
    }

    /// ln ν₀(eᵘ); −∞ where ν₀ vanishes.
    pub fn ln_eval(&self, u: f64) -> f64 {
        self.ln_eval_weighted(u, 0.0)
    }

    /// ln(r^q ν₀(r)) at r = eᵘ, with the power folded into the exponent so
    /// that large |u| does not cancel.
    pub fn ln_eval_weighted(&self, u: f64, q: f64) -> f64 {
        let d = self.dim as f64;
        let base = match &self.kind {
            ProfileKind::Stable { alpha } => (q - d - alpha) * u,
            ProfileKind::StableMixture { alpha, beta } => ln_add((q - d - alpha) * u, (q - d - beta) * u),
            ProfileKind::Tempered { alpha, lambda } => (q - d - alpha) * u - lambda * u.exp(),
            ProfileKind::Truncated { alpha, radius } => {
                if u.exp() < *radius {
                    (q - d - alpha) * u
                } else {
                    f64::NEG_INFINITY
                }
            }
            ProfileKind::LogHeavy { alpha } => {
                // ln(1 + r^{α/2}) computed stably on both ends
                let x = 0.5 * alpha * u;
                let l = if x > 30.0 { x + (-x).exp().ln_1p() } else { x.exp().ln_1p() };
                (q - d) * u - 2.0 * l.ln()
            }
            ProfileKind::Table(t) => t.eval_ln(u) + q * u,
            ProfileKind::Custom { f, .. } => {
                let v = f(u.exp());
                if v > 0.0 {
                    v.ln() + q * u
                } else {
                    f64::NEG_INFINITY
                }
            }
        };
        base + self.scale.ln()
    }

    /// ν₀(r).
    pub fn eval(&self, r: f64) -> f64 {
        if r <= 0.0 {
            return f64::INFINITY;
        }
        match &self.kind {
            ProfileKind::Custom { f, .. } => self.scale * f(r),
            _ => self.ln_eval(r.ln()).exp(),
        }
    }

    /// Radii where ν₀ is not smooth.
    pub fn breakpoints(&self) -> Vec<f64> {
        match &self.kind {
            ProfileKind::Truncated { radius, .. } => vec![*radius],
            ProfileKind::Table(t) => t.ln_r.iter().map(|u| u.exp()).collect(),
            ProfileKind::Custom { breakpoints, .. } => breakpoints.clone(),
            _ => Vec::new(),
        }
    }

    pub fn support_max(&self) -> f64 {
        match &self.kind {
            ProfileKind::Truncated { radius, .. } => *radius,
            _ => f64::INFINITY,
        }
    }

    fn check_monotone(&self) -> Result<()> {
        let mut prev = f64::INFINITY;
        for i in 0..=240 {
            let r = 10f64.powf(-12.0 + 24.0 * i as f64 / 240.0);
            let v = self.eval(r);
            if v.is_nan() || v < 0.0 {
                return Err(LevyError::InvalidParameter(format!("profile value {v} at r = {r}")));
            }
            if v > prev * (1.0 + 1e-12) {
                return Err(LevyError::NonMonotoneTable { radius: r });
            }
            prev = v;
        }
        Ok(())
    }

    /// ∫_lo^hi r^p ν₀(r) dr in log radius. `lo` may be 0 and `hi` may be ∞.
    pub fn power_moment_estimate(&self, p: f64, lo: f64, hi: f64, tol: Tolerance) -> Estimate {
        if !(hi > lo) {
            return Estimate::ZERO;
        }
        let hi = hi.min(self.support_max());
        if !(hi > lo) {
            return Estimate::ZERO;
        }
        let breaks: Vec<f64> = self.breakpoints().iter().map(|r| r.ln()).collect();
        let mut f = |u: f64| {
            let l = self.ln_eval_weighted(u, p + 1.0);
            if l == f64::NEG_INFINITY {
                0.0
            } else {
                l.exp()
            }
        };
        let a = if lo > 0.0 { lo.ln() } else { f64::NEG_INFINITY };
        let b = if hi.is_finite() { hi.ln() } else { f64::INFINITY };
        match (a.is_finite(), b.is_finite()) {
            (true, true) => quad::adaptive(&mut f, a, b, &breaks, tol, 2000),
            (false, true) => quad::integrate_from_neg_infinity(&mut f, b, &breaks, tol),
            (true, false) => quad::integrate_to_infinity(&mut f, a, &breaks, tol),
            (false, false) => {
                quad::integrate_from_neg_infinity(&mut f, 0.0, &breaks, tol)
                    + quad::integrate_to_infinity(&mut f, 0.0, &breaks, tol)
            }
        }
    }

    /// ∫_lo^hi r^p ν₀(r) dr, failing on divergence or missed tolerance.
    pub fn power_moment(&self, p: f64, lo: f64, hi: f64) -> Result<f64> {
        let e = self.power_moment_estimate(p, lo, hi, MOMENT_TOL);
        if !e.value.is_finite() || (!e.converged && !(e.error <= 1e-9 * e.value.abs())) {
            if !e.value.is_finite() || e.error > 1e-3 * e.value.abs() {
                return Err(LevyError::DivergentIntegral(format!(
                    "∫ r^{p} ν0(r) dr over [{lo}, {hi}] ({})",
                    self.describe()
                )));
            }
            return Err(LevyError::QuadratureFailure {
                context: format!("∫ r^{p} ν0(r) dr over [{lo}, {hi}]"),
                value: e.value,
                error: e.error,
            });
        }
        Ok(e.value)
    }

    /// ∫_0^r ρ^{d+1} ν₀(ρ) dρ.
    pub fn inner_second_moment(&self, r: f64) -> Result<f64> {
        self.power_moment(self.dim as f64 + 1.0, 0.0, r)
    }

    /// ∫_r^∞ ρ^{d−1} ν₀(ρ) dρ.
    pub fn outer_mass(&self, r: f64) -> Result<f64> {
        self.power_moment(self.dim as f64 - 1.0, r, f64::INFINITY)
    }
}

/// Direction-dependent factor a(θ) of the jump density.
#[derive(Clone)]
pub enum Anisotropy {
    Isotropic,
    /// a = plus on ⟨u,θ⟩ > 0 and minus otherwise.
    HalfSpace { direction: Vec<f64>, plus: f64, minus: f64 },
    Custom { f: DirectionFn, symmetric: bool, label: String },
}

impl fmt::Debug for Anisotropy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Anisotropy::Isotropic => write!(f, "isotropic"),
            Anisotropy::HalfSpace { direction, plus, minus } => {
                write!(f, "half-space(u={direction:?}, plus={plus}, minus={minus})")
            }
            Anisotropy::Custom { label, .. } => write!(f, "custom({label})"),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum AnisotropySpec {
    Isotropic,
    HalfSpace { direction: Vec<f64>, plus: f64, minus: f64 },
}

/// Quadrature points on the unit sphere with weights summing to its area.
pub fn sphere_rule(d: usize, n: usize) -> Vec<(Vec<f64>, f64)> {
    match d {
        1 => vec![(vec![1.0], 1.0), (vec![-1.0], 1.0)],
        2 => (0..n)
            .map(|i| {
                let phi = 2.0 * std::f64::consts::PI * (i as f64 + 0.5) / n as f64;
                (vec![phi.cos(), phi.sin()], 2.0 * std::f64::consts::PI / n as f64)
            })
            .collect(),
        3 => {
            let (x, w) = quad::gauss_legendre(n);
            let m = 2 * n;
            let mut out = Vec::with_capacity(n * m);
            for (c, wc) in x.iter().zip(&w) {
                let s = (1.0 - c * c).max(0.0).sqrt();
                for j in 0..m {
                    let phi = 2.0 * std::f64::consts::PI * (j as f64 + 0.5) / m as f64;
                    out.push((vec![s * phi.cos(), s * phi.sin(), *c], wc * 2.0 * std::f64::consts::PI / m as f64));
                }
            }
            out
        }
        _ => Vec::new(),
    }
}

/// Quasi-uniform directions on the sphere (d ≤ 3), used for sampled checks.
pub fn sphere_directions(d: usize, n: usize) -> Vec<Vec<f64>> {
    match d {
        1 => vec![vec![1.0], vec![-1.0]],
        2 => (0..n)
            .map(|i| {
                let phi = 2.0 * std::f64::consts::PI * i as f64 / n as f64;
                vec![phi.cos(), phi.sin()]
            })
            .collect(),
        _ => {
            // Fibonacci lattice
            let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
            (0..n)
                .map(|i| {
                    let z = 1.0 - 2.0 * (i as f64 + 0.5) / n as f64;
                    let s = (1.0 - z * z).sqrt();
                    let phi = golden * i as f64;
                    vec![s * phi.cos(), s * phi.sin(), z]
                })
                .collect()
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn normalize(v: &[f64]) -> Result<Vec<f64>> {
    let n = dot(v, v).sqrt();
    if !(n > 0.0) || !n.is_finite() {
        return Err(LevyError::InvalidParameter("direction must be a nonzero finite vector".into()));
    }
    Ok(v.iter().map(|x| x / n).collect())
}

impl Anisotropy {
    pub fn eval(&self, theta: &[f64]) -> f64 {
        match self {
            Anisotropy::Isotropic => 1.0,
            Anisotropy::HalfSpace { direction, plus, minus } => {
                if dot(direction, theta) > 0.0 {
                    *plus
                } else {
                    *minus
                }
            }
            Anisotropy::Custom { f, .. } => f(theta),
        }
    }

    pub fn is_isotropic(&self) -> bool {
        match self {
            Anisotropy::Isotropic => true,
            Anisotropy::HalfSpace { plus, minus, .. } => plus == minus,
            Anisotropy::Custom { .. } => false,
        }
    }

    /// a(θ) = a(−θ) for all θ.
    pub fn is_symmetric(&self) -> bool {
        match self {
            Anisotropy::Isotropic => true,
            Anisotropy::HalfSpace { plus, minus, .. } => plus == minus,
            Anisotropy::Custom { symmetric, .. } => *symmetric,
        }
    }

    fn spec(&self) -> Option<AnisotropySpec> {
        match self {
            Anisotropy::Isotropic => Some(AnisotropySpec::Isotropic),
            Anisotropy::HalfSpace { direction, plus, minus } => Some(AnisotropySpec::HalfSpace {
                direction: direction.clone(),
                plus: *plus,
                minus: *minus,
            }),
            Anisotropy::Custom { .. } => None,
        }
    }
}

/// Sphere moments of the anisotropy: ∫a, ∫θ a, ∫θθᵀ a over the unit sphere.
#[derive(Clone, Debug)]
pub struct SphereMoments {
    pub mass: f64,
    pub first: Vec<f64>,
    pub second: Vec<f64>,
}

fn sphere_moments(an: &Anisotropy, d: usize) -> SphereMoments {
    let area = sphere_area(d);
    match an {
        Anisotropy::Isotropic => {
            let mut second = vec![0.0; d * d];
            for i in 0..d {
                second[i * d + i] = area / d as f64;
            }
            SphereMoments {
                mass: area,
                first: vec![0.0; d],
                second,
            }
        }
        Anisotropy::HalfSpace { direction, plus, minus } => {
            let mean = 0.5 * (plus + minus);
            let mut second = vec![0.0; d * d];
            for i in 0..d {
                second[i * d + i] = mean * area / d as f64;
            }
            let m = (plus - minus) * half_sphere_moment(d);
            SphereMoments {
                mass: mean * area,
                first: direction.iter().map(|u| u * m).collect(),
                second,
            }
        }
        Anisotropy::Custom { f, .. } => {
            let rule = sphere_rule(d, if d == 3 { 96 } else { 4096 });
            let mut mass = 0.0;
            let mut first = vec![0.0; d];
            let mut second = vec![0.0; d * d];
            for (theta, w) in &rule {
                let a = f(theta) * w;
                mass += a;
                for i in 0..d {
                    first[i] += a * theta[i];
                    for j in 0..d {
                        second[i * d + j] += a * theta[i] * theta[j];
                    }
                }
            }
            SphereMoments { mass, first, second }
        }
    }
}

/// Model descriptor as read from JSON.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct ModelSpec {
    pub dim: usize,
    #[serde(rename = "A", default)]
    pub a: Option<Vec<Vec<f64>>>,
    #[serde(default)]
    pub drift: Option<Vec<f64>>,
    pub profile: ProfileSpec,
    #[serde(default)]
    pub comp_lower: Option<f64>,
    #[serde(default)]
    pub comp_upper: Option<f64>,
    #[serde(default)]
    pub symmetric: Option<bool>,
    #[serde(default)]
    pub anisotropy: Option<AnisotropySpec>,
    #[serde(default)]
    pub name: Option<String>,
}

/// Lévy triplet (A, n(x)dx, b) with n(x) = a(x/|x|) ν₀(|x|).
#[derive(Clone, Debug)]
pub struct LevyModel {
    name: String,
    dim: usize,
    gauss: Vec<f64>,
    gauss_max: f64,
    gauss_min: f64,
    drift: Vec<f64>,
    profile: UnimodalProfile,
    anisotropy: Anisotropy,
    comp_lower: f64,
    comp_upper: f64,
    symmetric: bool,
    moments: SphereMoments,
    profile_spec: Option<ProfileSpec>,
}

fn eigen_range(a: &[f64], d: usize) -> (f64, f64) {
    if d == 0 {
        return (0.0, 0.0);
    }
    let m = DMatrix::from_row_slice(d, d, a);
    let e = SymmetricEigen::new(m);
    let max = e.eigenvalues.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min = e.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
    (min, max)
}

impl LevyModel {
    /// Pure-jump isotropic model with zero drift.
    pub fn isotropic(profile: UnimodalProfile) -> Result<Self> {
        let d = profile.dim();
        LevyModel::new(
            d,
            vec![0.0; d * d],
            vec![0.0; d],
            profile,
            Anisotropy::Isotropic,
            1.0,
            1.0,
        )
    }

    /// Brownian motion with exponent ⟨z, Az⟩ and no jumps.
    pub fn brownian(dim: usize, gauss: Vec<f64>) -> Result<Self> {
        LevyModel::new(
            dim,
            gauss,
            vec![0.0; dim],
            UnimodalProfile::zero(dim),
            Anisotropy::Isotropic,
            1.0,
            1.0,
        )
        .map(|m| m.with_name("gaussian"))
    }

    /// General constructor; `gauss` is the row-major d×d matrix A.
    pub fn new(
        dim: usize,
        gauss: Vec<f64>,
        drift: Vec<f64>,
        profile: UnimodalProfile,
        anisotropy: Anisotropy,
        comp_lower: f64,
        comp_upper: f64,
    ) -> Result<Self> {
        if dim == 0 {
            return Err(LevyError::InvalidParameter("dimension must be positive".into()));
        }
        if profile.dim() != dim {
            return Err(LevyError::InvalidParameter(format!(
                "profile dimension {} differs from model dimension {dim}",
                profile.dim()
            )));
        }
        if gauss.len() != dim * dim || drift.len() != dim {
            return Err(LevyError::InvalidParameter("A must be d×d and drift a d-vector".into()));
        }
        if gauss.iter().chain(drift.iter()).any(|x| !x.is_finite()) {
            return Err(LevyError::InvalidParameter("A and drift must be finite".into()));
        }
        for i in 0..dim {
            for j in 0..i {
                let (x, y) = (gauss[i * dim + j], gauss[j * dim + i]);
                if (x - y).abs() > 1e-12 * (1.0 + x.abs().max(y.abs())) {
                    return Err(LevyError::InvalidParameter("A must be symmetric".into()));
                }
            }
        }
        let (gmin, gmax) = eigen_range(&gauss, dim);
        if gmin < -1e-12 * (1.0 + gmax.abs()) {
            return Err(LevyError::InvalidParameter(format!("A has negative eigenvalue {gmin}")));
        }
        if !(comp_lower >= 0.0) || !(comp_upper > 0.0) || comp_lower > comp_upper {
            return Err(LevyError::InvalidParameter(format!(
                "comparability constants must satisfy 0 <= lower <= upper, got {comp_lower}, {comp_upper}"
            )));
        }
        let anisotropy = match anisotropy {
            Anisotropy::HalfSpace { direction, plus, minus } => {
                if direction.len() != dim {
                    return Err(LevyError::InvalidParameter("half-space direction has wrong length".into()));
                }
                if !(plus >= 0.0) || !(minus >= 0.0) || !(plus.max(minus) > 0.0) {
                    return Err(LevyError::InvalidParameter("half-space weights must be non-negative".into()));
                }
                Anisotropy::HalfSpace {
                    direction: normalize(&direction)?,
                    plus,
                    minus,
                }
            }
            other => other,
        };
        if !anisotropy.is_isotropic() && dim > 3 {
            return Err(LevyError::Unsupported("anisotropic models need d <= 3".into()));
        }
        let probe = if dim == 1 {
            sphere_directions(1, 2)
        } else {
            sphere_directions(dim, if dim == 2 { 256 } else { 1024 })
        };
        for theta in &probe {
            let a = anisotropy.eval(theta);
            if !(a >= comp_lower * (1.0 - 1e-12) && a <= comp_upper * (1.0 + 1e-12)) {
                return Err(LevyError::InvalidParameter(format!(
                    "a(θ) = {a} at θ = {theta:?} outside [{comp_lower}, {comp_upper}]"
                )));
            }
        }
        let moments = sphere_moments(&anisotropy, dim);
        let symmetric = anisotropy.is_symmetric();
        Ok(LevyModel {
            name: String::from("model"),
            dim,
            gauss,
            gauss_max: gmax.max(0.0),
            gauss_min: gmin.max(0.0),
            drift,
            profile,
            anisotropy,
            comp_lower,
            comp_upper,
            symmetric,
            moments,
            profile_spec: None,
        })
    }

    pub fn from_spec(spec: &ModelSpec) -> Result<Self> {
        let d = spec.dim;
        let profile = make_profile(&spec.profile, d)?;
        let gauss = match &spec.a {
            None => vec![0.0; d * d],
            Some(rows) => {
                if rows.len() != d || rows.iter().any(|r| r.len() != d) {
                    return Err(LevyError::InvalidParameter("A must be a d×d array".into()));
                }
                rows.iter().flatten().copied().collect()
            }
        };
        let drift = spec.drift.clone().unwrap_or_else(|| vec![0.0; d]);
        let anisotropy = match &spec.anisotropy {
            None | Some(AnisotropySpec::Isotropic) => Anisotropy::Isotropic,
            Some(AnisotropySpec::HalfSpace { direction, plus, minus }) => Anisotropy::HalfSpace {
                direction: direction.clone(),
                plus: *plus,
                minus: *minus,
            },
        };
        let (lo_default, hi_default) = match &anisotropy {
            Anisotropy::HalfSpace { plus, minus, .. } => (plus.min(*minus), plus.max(*minus)),
            _ => (1.0, 1.0),
        };
        let mut m = LevyModel::new(
            d,
            gauss,
            drift,
            profile,
            anisotropy,
            spec.comp_lower.unwrap_or(lo_default),
            spec.comp_upper.unwrap_or(hi_default),
        )?;
        if let Some(sym) = spec.symmetric {
            if sym && !m.symmetric {
                return Err(LevyError::InvalidParameter(
                    "model declared symmetric but n(-x) != n(x) on sampled directions".into(),
                ));
            }
        }
        m.profile_spec = Some(spec.profile.clone());
        if let Some(n) = &spec.name {
            m.name = n.clone();
        }
        Ok(m)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let spec: ModelSpec = serde_json::from_str(text)?;
        LevyModel::from_spec(&spec)
    }

    /// Descriptor of this model, when it is expressible in JSON.
    pub fn to_spec(&self) -> Option<ModelSpec> {
        let d = self.dim;
        Some(ModelSpec {
            dim: d,
            a: Some((0..d).map(|i| self.gauss[i * d..(i + 1) * d].to_vec()).collect()),
            drift: Some(self.drift.clone()),
            profile: self.profile_spec.clone()?,
            comp_lower: Some(self.comp_lower),
            comp_upper: Some(self.comp_upper),
            symmetric: Some(self.symmetric),
            anisotropy: self.anisotropy.spec(),
            name: Some(self.name.clone()),
        })
    }

    pub fn with_name(mut self, name: &str) -> Self {
        self.name = name.to_string();
        self
    }

    pub fn with_drift(mut self, drift: Vec<f64>) -> Result<Self> {
        if drift.len() != self.dim || drift.iter().any(|x| !x.is_finite()) {
            return Err(LevyError::InvalidParameter("drift must be a finite d-vector".into()));
        }
        self.drift = drift;
        Ok(self)
    }

    pub fn with_gaussian(self, gauss: Vec<f64>) -> Result<Self> {
        let mut m = LevyModel::new(
            self.dim,
            gauss,
            self.drift.clone(),
            self.profile.clone(),
            self.anisotropy.clone(),
            self.comp_lower,
            self.comp_upper,
        )?;
        m.name = self.name;
        m.profile_spec = self.profile_spec;
        Ok(m)
    }

    pub fn with_anisotropy(self, anisotropy: Anisotropy, comp_lower: f64, comp_upper: f64) -> Result<Self> {
        let mut m = LevyModel::new(
            self.dim,
            self.gauss.clone(),
            self.drift.clone(),
            self.profile.clone(),
            anisotropy,
            comp_lower,
            comp_upper,
        )?;
        m.name = self.name;
        m.profile_spec = self.profile_spec;
        Ok(m)
    }

    pub(crate) fn set_profile_spec(mut self, spec: ProfileSpec) -> Self {
        self.profile_spec = Some(spec);
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }
    pub fn dim(&self) -> usize {
        self.dim
    }
    /// Row-major Gaussian matrix A.
    pub fn gaussian(&self) -> &[f64] {
        &self.gauss
    }
    /// ‖A‖, the largest eigenvalue.
    pub fn gaussian_norm(&self) -> f64 {
        self.gauss_max
    }
    pub fn gaussian_min_eigenvalue(&self) -> f64 {
        self.gauss_min
    }
    pub fn has_gaussian(&self) -> bool {
        self.gauss_max > 0.0
    }
    pub fn drift(&self) -> &[f64] {
        &self.drift
    }
    pub fn profile(&self) -> &UnimodalProfile {
        &self.profile
    }
    pub fn anisotropy(&self) -> &Anisotropy {
        &self.anisotropy
    }
    pub fn comp_lower(&self) -> f64 {
        self.comp_lower
    }
    pub fn comp_upper(&self) -> f64 {
        self.comp_upper
    }
    pub fn is_symmetric(&self) -> bool {
        self.symmetric
    }
    pub fn moments(&self) -> &SphereMoments {
        &self.moments
    }
    /// The C_ν of the comparability assumption, max(upper, 1/lower).
    pub fn comparability_constant(&self) -> f64 {
        if self.comp_lower > 0.0 {
            self.comp_upper.max(1.0 / self.comp_lower)
        } else {
            f64::INFINITY
        }
    }
    /// True when the jump part, and A, are rotation invariant.
    pub fn is_radial(&self) -> bool {
        self.anisotropy.is_isotropic() && (self.gauss_max - self.gauss_min) <= 1e-14 * (1.0 + self.gauss_max)
    }

    /// ⟨x, A x⟩.
    pub fn quadratic_form(&self, x: &[f64]) -> f64 {
        let d = self.dim;
        let mut s = 0.0;
        for i in 0..d {
            for j in 0..d {
                s += x[i] * self.gauss[i * d + j] * x[j];
            }
        }
        s
    }

    /// Jump density n(x).
    pub fn jump_density(&self, x: &[f64]) -> f64 {
        let r = dot(x, x).sqrt();
        if r == 0.0 {
            return f64::INFINITY;
        }
        let theta: Vec<f64> = x.iter().map(|v| v / r).collect();
        self.anisotropy.eval(&theta) * self.profile.eval(r)
    }

    /// Default symmetric minorant comp_lower·ν₀ with a₁ = 1, a₂ = upper/lower.
    pub fn default_minorant(&self) -> Result<SymmetricMinorant> {
        if !(self.comp_lower > 0.0) {
            return Err(LevyError::InvalidParameter(
                "no isotropic minorant: comp_lower is zero".into(),
            ));
        }
        Ok(SymmetricMinorant {
            profile_s: self.profile.scaled(self.comp_lower),
            a1: 1.0,
            a2: self.comp_upper / self.comp_lower,
            threshold: 0.0,
        })
    }
}

/// Isotropic minorant ν_s of the jump measure, a₁ν_s ≤ N and
/// Re Ψ ≤ a₂ Re Ψ_s for |x| > threshold.
#[derive(Clone, Debug)]
pub struct SymmetricMinorant {
    pub profile_s: UnimodalProfile,
    pub a1: f64,
    pub a2: f64,
    pub threshold: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct ValidationReport {
    /// ∫(1 ∧ |z|²) n(z) dz.
    pub levy_integral: f64,
    /// ∫_{|z|<1} n(z) dz, +∞ when divergent.
    pub mass_near_zero: f64,
    pub infinite_mass: bool,
    /// h(0⁺) = ∞.
    pub h_unbounded_at_zero: bool,
    pub comparable: bool,
    pub symmetric: bool,
}

/// Check ∫(1 ∧ |z|²) n < ∞ and that the jump mass is infinite.
pub fn validate_levy_measure(model: &LevyModel) -> Result<ValidationReport> {
    let p = model.profile();
    let d = model.dim() as f64;
    let m = model.moments().mass;
    let inner = p.power_moment(d + 1.0, 0.0, 1.0).map_err(|e| match e {
        LevyError::DivergentIntegral(s) => LevyError::DivergentLevyIntegral(format!("near the origin: {s}")),
        other => other,
    })?;
    let outer = p.power_moment(d - 1.0, 1.0, f64::INFINITY).map_err(|e| match e {
        LevyError::DivergentIntegral(s) => LevyError::DivergentLevyIntegral(format!("at infinity: {s}")),
        other => other,
    })?;
    let levy_integral = m * (inner + outer);
    let near = p.power_moment_estimate(d - 1.0, 0.0, 1.0, MOMENT_TOL);
    let infinite = !near.converged || !near.value.is_finite();
    let mass_near_zero = if infinite { f64::INFINITY } else { m * near.value };
    if !infinite && !model.has_gaussian() {
        return Err(LevyError::CompoundPoisson {
            total_mass: mass_near_zero + m * outer_mass_finite(p, d)?,
        });
    }
    Ok(ValidationReport {
        levy_integral,
        mass_near_zero,
        infinite_mass: infinite,
        h_unbounded_at_zero: infinite || model.has_gaussian(),
        comparable: model.comp_lower() > 0.0,
        symmetric: model.is_symmetric(),
    })
}

fn outer_mass_finite(p: &UnimodalProfile, d: f64) -> Result<f64> {
    p.power_moment(d - 1.0, 1.0, f64::INFINITY)
}

/// Builtin models used by tests and the CLI.
pub mod builtin {
    use super::*;

    fn iso(spec: ProfileSpec, dim: usize, name: &str) -> LevyModel {
        let p = make_profile(&spec, dim).expect("builtin profile");
        LevyModel::isotropic(p)
            .expect("builtin model")
            .with_name(name)
            .set_profile_spec(spec)
    }

    /// ν₀(r) = r^{−d−1}; in d = 1 this is the Cauchy-type model, Ψ(z) = π|z|.
    pub fn cauchy(dim: usize) -> LevyModel {
        stable(1.0, dim).with_name("cauchy")
    }

    pub fn stable(alpha: f64, dim: usize) -> LevyModel {
        iso(ProfileSpec::Stable { alpha, scale: None }, dim, &format!("stable-{alpha}"))
    }

    pub fn stable_mixture(alpha: f64, beta: f64, dim: usize) -> LevyModel {
        iso(
            ProfileSpec::StableMixture { alpha, beta, scale: None },
            dim,
            &format!("stable-mixture-{alpha}-{beta}"),
        )
    }

    pub fn tempered(alpha: f64, lambda: f64, dim: usize) -> LevyModel {
        iso(
            ProfileSpec::Tempered { alpha, lambda, scale: None },
            dim,
            &format!("tempered-{alpha}-{lambda}"),
        )
    }

    pub fn truncated(alpha: f64, radius: f64, dim: usize) -> LevyModel {
        iso(
            ProfileSpec::Truncated { alpha, radius, scale: None },
            dim,
            &format!("truncated-{alpha}-{radius}"),
        )
    }

    pub fn log_heavy(alpha: f64, dim: usize) -> LevyModel {
        iso(ProfileSpec::LogHeavy { alpha, scale: None }, dim, &format!("log-heavy-{alpha}"))
    }

    /// One-sided model n(x) = ν₀(|x|) 1_{⟨x,u⟩>0} for the first basis vector u.
    pub fn one_sided(alpha: f64, dim: usize) -> LevyModel {
        let mut u = vec![0.0; dim];
        u[0] = 1.0;
        stable(alpha, dim)
            .with_anisotropy(
                Anisotropy::HalfSpace {
                    direction: u,
                    plus: 1.0,
                    minus: 0.0,
                },
                0.0,
                1.0,
            )
            .expect("one-sided model")
            .with_name(&format!("one-sided-{alpha}"))
    }

    /// The standard builtin set in dimension d.
    pub fn all(dim: usize) -> Vec<LevyModel> {
        vec![
            cauchy(dim),
            stable(1.5, dim),
            stable(0.5, dim),
            stable_mixture(1.5, 0.5, dim),
            tempered(1.0, 1.0, dim),
            truncated(1.0, 1.0, dim),
            log_heavy(1.0, dim),
        ]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stable_profile_values() {
        let p = UnimodalProfile::stable(1.0, 1).unwrap();
        assert!((p.eval(2.0) - 0.25).abs() < 1e-15);
        let p = UnimodalProfile::stable(1.5, 2).unwrap();
        for &r in &[0.01, 1.0, 37.0] {
            for &l in &[0.5, 2.0] {
                let ratio = p.eval(l * r) / p.eval(r);
                assert!((ratio / l.powf(-3.5) - 1.0).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn invalid_alpha() {
        assert!(matches!(
            make_profile(&ProfileSpec::Stable { alpha: 2.0, scale: None }, 1),
            Err(LevyError::InvalidParameter(_))
        ));
    }

    #[test]
    fn table_must_decrease() {
        let spec = ProfileSpec::Table {
            points: vec![[1.0, 1.0], [2.0, 3.0]],
        };
        assert!(matches!(make_profile(&spec, 1), Err(LevyError::NonMonotoneTable { .. })));
    }

    #[test]
    fn table_interpolates_power_law() {
        let pts: Vec<[f64; 2]> = (0..41)
            .map(|i| {
                let r = 10f64.powf(-2.0 + 0.1 * i as f64);
                [r, r.powf(-2.5)]
            })
            .collect();
        let p = make_profile(&ProfileSpec::Table { points: pts }, 1).unwrap();
        for &r in &[1e-5, 0.0333, 1.7, 1e4] {
            assert!((p.eval(r) / r.powf(-2.5) - 1.0).abs() < 1e-10, "r={r}");
        }
    }

    #[test]
    fn log_heavy_stable_at_extremes() {
        let p = make_profile(&ProfileSpec::LogHeavy { alpha: 1.0, scale: None }, 1).unwrap();
        let r: f64 = 1e-30;
        assert!((p.eval(r) / r.powi(-2) - 1.0).abs() < 1e-10);
        let r: f64 = 1e200;
        let expect = 1.0 / (r * (0.5 * r.ln()).powi(2));
        assert!((p.eval(r) / expect - 1.0).abs() < 1e-10);
    }

    #[test]
    fn cauchy_levy_integral() {
        let rep = validate_levy_measure(&builtin::cauchy(1)).unwrap();
        assert!((rep.levy_integral - 4.0).abs() < 1e-9);
        assert!(rep.infinite_mass && rep.h_unbounded_at_zero);
    }

    #[test]
    fn divergent_near_zero() {
        let p = UnimodalProfile::custom(|r| r.powi(-4), vec![], "r^-4", 1).unwrap();
        let m = LevyModel::isotropic(p).unwrap();
        assert!(matches!(validate_levy_measure(&m), Err(LevyError::DivergentLevyIntegral(_))));
    }

    #[test]
    fn compound_poisson_detected() {
        let p = UnimodalProfile::custom(|r| if r > 1.0 && r < 2.0 { 1.0 } else { 0.0 }, vec![1.0, 2.0], "band", 1);
        // not non-increasing on (0, 1): rejected as a profile
        assert!(p.is_err());
    }

    #[test]
    fn half_space_moments() {
        let m = builtin::one_sided(1.5, 2);
        let mo = m.moments();
        assert!((mo.mass - std::f64::consts::PI).abs() < 1e-12);
        assert!((mo.first[0] - 2.0).abs() < 1e-12);
        assert!(!m.is_symmetric());
    }

    #[test]
    fn json_round_trip() {
        let text = r#"{"dim":1, "A":[[0.0]], "drift":[0.0], "profile":{"kind":"stable","alpha":1.0},
                      "comp_lower":1.0, "comp_upper":1.0, "symmetric":true}"#;
        let m = LevyModel::from_json(text).unwrap();
        assert_eq!(m.dim(), 1);
        let spec = m.to_spec().unwrap();
        let again = LevyModel::from_spec(&spec).unwrap();
        assert!((again.profile().eval(3.0) - 1.0 / 9.0).abs() < 1e-15);
    }

    #[test]
    fn rejects_non_psd_gaussian() {
        let p = UnimodalProfile::stable(1.0, 2).unwrap();
        let m = LevyModel::isotropic(p).unwrap();
        assert!(m.with_gaussian(vec![1.0, 2.0, 2.0, 1.0]).is_err());
    }
}
