//! Transition densities by Fourier inversion of e^{−tΨ}.
//!
//! The integral is taken in polar form, ρ along rays, on a panel grid shared
//! by all evaluation points at a fixed t. Ψ is evaluated once per node;
//! panels are split where the 10/21-point Gauss–Kronrod pair disagrees for
//! any requested point.

use std::f64::consts::{FRAC_PI_2, PI};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bound::{BoundContext, CenterMode};
use crate::characteristics::Characteristics;
use crate::error::{LevyError, Result};
use crate::model::sphere_rule;
use crate::quad::{gk21_nodes, gk21_weights};
use crate::roots::{golden_max, lin_space};
use crate::special::{sphere_area, sphere_kernel};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct InversionSettings {
    /// Truncate where e^{−t Re Ψ} times the radial weight drops below this.
    pub tail_epsilon: f64,
    pub panel_budget: usize,
    pub rel_tol: f64,
    /// Angular nodes per sphere coordinate; `None` adapts to |x|.
    pub directions: Option<usize>,
}

impl Default for InversionSettings {
    fn default() -> Self {
        InversionSettings {
            tail_epsilon: 1e-13,
            panel_budget: 200_000,
            rel_tol: 1e-10,
            directions: None,
        }
    }
}

impl InversionSettings {
    pub fn validate(&self) -> Result<()> {
        if !(self.tail_epsilon > 0.0 && self.tail_epsilon <= 1e-6) {
            return Err(LevyError::InvalidParameter(format!(
                "tail_epsilon {} must lie in (0, 1e-6]",
                self.tail_epsilon
            )));
        }
        if !(self.rel_tol >= 1e-12) {
            return Err(LevyError::InvalidParameter(format!("rel_tol {} must be at least 1e-12", self.rel_tol)));
        }
        if self.panel_budget < 64 {
            return Err(LevyError::InvalidParameter("panel_budget must be at least 64".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DensityValue {
    pub value: f64,
    pub error: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DensityGrid {
    pub t: f64,
    pub points: Vec<Vec<f64>>,
    pub values: Vec<f64>,
    pub center: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SupDensity {
    pub value: f64,
    pub argmax: Vec<f64>,
    /// The maximiser sits on the edge of the scanned region.
    pub on_boundary: bool,
}

const GEOMETRIC_PANELS: usize = 40;
const MAX_ROUNDS: usize = 24;
const MAX_RANGE: f64 = 1e9;

enum Layout {
    /// Radial model, value only: ω_d ∫ ρ^{d−1} e^{−tReΨ(ρ)} Λ_d(ρ|x|) dρ.
    Bessel,
    /// ∑_θ w_θ ∫ ρ^{d−1} e^{−tReΨ(ρθ)} cos(ρ⟨x,θ⟩ + φ(ρθ)) dρ; `shared`
    /// when Re Ψ is radial and φ vanishes.
    Rays { dirs: Vec<(Vec<f64>, f64)>, shared: bool },
}

struct Panel {
    nodes: [f64; 21],
    wk: [f64; 21],
    wg: [f64; 21],
    // per direction (or one shared row): amplitude ρ^{d−1}e^{−tReΨ} and phase tφ
    amp: Vec<[f64; 21]>,
    phase: Vec<[f64; 21]>,
}

struct Inverter<'a> {
    ch: &'a Characteristics,
    t: f64,
    d: usize,
    settings: InversionSettings,
    layout: Layout,
    shift: Vec<f64>,
    beta: Vec<usize>,
    order: usize,
    grid: Option<PanelGrid>,
}

struct PanelGrid {
    cuts: Vec<(f64, f64)>,
    panels: Vec<Panel>,
    floor: f64,
    /// largest |x| the oscillation width was chosen for
    reach: f64,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn directions(d: usize, reach: f64, fixed: Option<usize>) -> Vec<(Vec<f64>, f64)> {
    match d {
        1 => vec![(vec![1.0], 2.0)],
        2 => {
            // half circle, each node standing for ±θ
            let n = fixed.unwrap_or_else(|| ((reach * 1.2) as usize + 24).clamp(32, 4096));
            (0..n)
                .map(|k| {
                    let phi = PI * (k as f64 + 0.5) / n as f64;
                    (vec![phi.cos(), phi.sin()], 2.0 * PI / n as f64)
                })
                .collect()
        }
        _ => {
            let n = fixed.unwrap_or_else(|| ((reach * 0.6) as usize + 12).clamp(12, 256));
            sphere_rule(d, n)
        }
    }
}

impl<'a> Inverter<'a> {
    fn new(ch: &'a Characteristics, t: f64, beta: &[usize], settings: InversionSettings) -> Result<Self> {
        settings.validate()?;
        if !(t > 0.0) || !t.is_finite() {
            return Err(LevyError::InvalidParameter(format!("time must be positive, got {t}")));
        }
        let d = ch.dim();
        if d > 3 && !ch.model().is_radial() {
            return Err(LevyError::Unsupported("anisotropic inversion needs d <= 3".into()));
        }
        let beta = if beta.is_empty() { vec![0; d] } else { beta.to_vec() };
        if beta.len() != d {
            return Err(LevyError::InvalidParameter("multi-index has wrong length".into()));
        }
        let order: usize = beta.iter().sum();
        if order > 4 {
            return Err(LevyError::InvalidParameter("derivative order above 4".into()));
        }
        let shift = ch.model().drift().iter().map(|b| t * b).collect();
        Ok(Inverter {
            ch,
            t,
            d,
            settings,
            layout: Layout::Bessel,
            shift,
            beta,
            order,
            grid: None,
        })
    }

    fn radial(&self) -> bool {
        self.ch.model().is_radial() && self.ch.model().is_symmetric()
    }

    fn choose_layout(&mut self, reach: f64) {
        let radial = self.radial();
        self.layout = if self.d == 1 {
            Layout::Rays {
                dirs: directions(1, 0.0, None),
                shared: radial,
            }
        } else if radial && self.order == 0 {
            Layout::Bessel
        } else {
            Layout::Rays {
                dirs: directions(self.d, reach, self.settings.directions),
                shared: radial,
            }
        };
    }

    fn ray_dirs(&self) -> Vec<Vec<f64>> {
        match &self.layout {
            Layout::Bessel => vec![{
                let mut e = vec![0.0; self.d];
                e[0] = 1.0;
                e
            }],
            Layout::Rays { dirs, shared } => {
                if *shared {
                    vec![dirs[0].0.clone()]
                } else {
                    dirs.iter().map(|(th, _)| th.clone()).collect()
                }
            }
        }
    }

    /// Re Ψ and the non-drift part of Im Ψ at z.
    fn exponent(&self, z: &[f64]) -> Result<(f64, f64)> {
        let p = self.ch.psi(z)?;
        Ok((p.re, p.im + dot(z, self.ch.model().drift())))
    }

    fn panel(&self, a: f64, b: f64, rays: &[Vec<f64>]) -> Result<Panel> {
        let nodes = gk21_nodes(a, b);
        let (wk, wg) = gk21_weights(a, b);
        let dm1 = self.d as i32 - 1;
        let mut amp = Vec::with_capacity(rays.len());
        let mut phase = Vec::with_capacity(rays.len());
        for th in rays {
            let mut ar = [0.0; 21];
            let mut pr = [0.0; 21];
            for i in 0..21 {
                let rho = nodes[i];
                let z: Vec<f64> = th.iter().map(|c| c * rho).collect();
                let (re, im) = self.exponent(&z)?;
                ar[i] = rho.powi(dm1) * (-self.t * re).exp();
                pr[i] = self.t * im;
            }
            amp.push(ar);
            phase.push(pr);
        }
        Ok(Panel { nodes, wk, wg, amp, phase })
    }

    fn build_panels(&self, cuts: &[(f64, f64)]) -> Result<Vec<Panel>> {
        let rays = self.ray_dirs();
        cuts.par_iter().map(|&(a, b)| self.panel(a, b, &rays)).collect()
    }

    /// (Kronrod, Gauss) sums of one panel at a shifted point.
    fn panel_sums(&self, p: &Panel, x: &[f64]) -> (f64, f64) {
        let mut k = 0.0;
        let mut g = 0.0;
        match &self.layout {
            Layout::Bessel => {
                let r = norm(x);
                let w = sphere_area(self.d);
                for i in 0..21 {
                    let f = w * p.amp[0][i] * sphere_kernel(self.d, p.nodes[i] * r);
                    k += p.wk[i] * f;
                    g += p.wg[i] * f;
                }
            }
            Layout::Rays { dirs, shared } => {
                let lift = self.order as f64 * FRAC_PI_2;
                for (j, (th, w)) in dirs.iter().enumerate() {
                    let row = if *shared { 0 } else { j };
                    let proj = dot(x, th);
                    let mono: f64 = th.iter().zip(&self.beta).map(|(c, &b)| c.powi(b as i32)).product();
                    if mono == 0.0 {
                        continue;
                    }
                    let (mut kd, mut gd) = (0.0, 0.0);
                    for i in 0..21 {
                        let rho = p.nodes[i];
                        let f = p.amp[row][i]
                            * rho.powi(self.order as i32)
                            * (rho * proj + p.phase[row][i] + lift).cos();
                        kd += p.wk[i] * f;
                        gd += p.wg[i] * f;
                    }
                    k += w * mono * kd;
                    g += w * mono * gd;
                }
            }
        }
        (k, g)
    }

    /// Upper bound ∫|integrand| used as the absolute error floor.
    fn magnitude(&self, panels: &[Panel]) -> f64 {
        let mut total = 0.0;
        for p in panels {
            let rows = p.amp.len();
            let (weights, _): (Vec<f64>, Vec<f64>) = match &self.layout {
                Layout::Bessel => (vec![sphere_area(self.d)], vec![]),
                Layout::Rays { dirs, shared } => {
                    if *shared {
                        (vec![dirs.iter().map(|(_, w)| w).sum()], vec![])
                    } else {
                        (dirs.iter().map(|(_, w)| *w).collect(), vec![])
                    }
                }
            };
            for r in 0..rows {
                for i in 0..21 {
                    total += weights[r] * p.wk[i] * p.amp[r][i] * p.nodes[i].powi(self.order as i32);
                }
            }
        }
        total
    }

    fn min_re_on_sphere(&self, r: f64, rays: &[Vec<f64>]) -> Result<f64> {
        let mut m = f64::INFINITY;
        for th in rays {
            let z: Vec<f64> = th.iter().map(|c| c * r).collect();
            m = m.min(self.exponent(&z)?.0);
        }
        Ok(m)
    }

    fn prepare(&mut self, f_max: f64) -> Result<()> {
        let d = self.d;
        let t = self.t;
        let not_integrable = |reason: String| LevyError::NotIntegrable { t, reason };
        let star = match self.ch.psi_star_inv(1.0 / t) {
            Ok(s) => s.radius,
            Err(LevyError::BracketFailure(m)) => return Err(not_integrable(m)),
            Err(e) => return Err(e),
        };
        let eps = self.settings.tail_epsilon;
        let mut reach = match self.ch.psi_star_inv(eps.recip().ln() / t) {
            Ok(s) => s.radius,
            Err(LevyError::BracketFailure(m)) => return Err(not_integrable(m)),
            Err(e) => return Err(e),
        };
        self.choose_layout(reach * f_max);
        let probe = crate::model::sphere_directions(d, if self.radial() { 1 } else { 16 });
        let probe: Vec<Vec<f64>> = if self.radial() { vec![probe[0].clone()] } else { probe };
        let power = (d + self.order) as i32;
        loop {
            let m = self.min_re_on_sphere(reach, &probe)?;
            let weight = (-t * m).exp() * (reach / star).powi(power);
            if weight <= eps {
                break;
            }
            reach *= 1.5;
            if reach / star > MAX_RANGE {
                return Err(not_integrable(format!(
                    "e^(-tReΨ) still {weight:.3e} at |z| = {reach:.3e}, {:.1e} times the natural scale",
                    reach / star
                )));
            }
        }
        if matches!(self.layout, Layout::Rays { .. }) && d > 1 {
            self.choose_layout(reach * f_max);
        }

        let mut cuts = Vec::new();
        let mut a = 0.0;
        for k in (0..GEOMETRIC_PANELS).rev() {
            let b = star * 0.5f64.powi(k as i32);
            cuts.push((a, b));
            a = b;
        }
        let osc = if f_max > 0.0 { FRAC_PI_2 / f_max } else { f64::INFINITY };
        while a < reach {
            let b = (a + (0.25 * a).min(osc)).min(reach);
            cuts.push((a, b));
            a = b;
            if cuts.len() > self.settings.panel_budget {
                return Err(LevyError::OscillationBudgetExceeded {
                    x: f_max,
                    panels: cuts.len(),
                });
            }
        }
        let panels = self.build_panels(&cuts)?;
        let floor = eps * self.magnitude(&panels);
        self.grid = Some(PanelGrid {
            cuts,
            panels,
            floor,
            reach: f_max,
        });
        Ok(())
    }

    fn evaluate(&mut self, points: &[Vec<f64>]) -> Result<Vec<DensityValue>> {
        let d = self.d;
        if points.iter().any(|x| x.len() != d) {
            return Err(LevyError::InvalidParameter("evaluation point has wrong dimension".into()));
        }
        let shifted: Vec<Vec<f64>> = points
            .iter()
            .map(|x| x.iter().zip(&self.shift).map(|(a, b)| a - b).collect())
            .collect();
        let f_max = shifted.iter().map(|x| norm(x)).fold(0.0, f64::max);
        if self.grid.as_ref().is_none_or(|g| f_max > g.reach * (1.0 + 1e-12)) {
            self.prepare(f_max)?;
        }
        let PanelGrid {
            mut cuts,
            mut panels,
            floor,
            reach,
        } = self.grid.take().unwrap();
        let norm_c = (2.0 * PI).powi(-(d as i32));
        let rel = self.settings.rel_tol;

        for _round in 0..MAX_ROUNDS {
            let sums: Vec<Vec<(f64, f64)>> = shifted
                .par_iter()
                .map(|x| panels.iter().map(|p| self.panel_sums(p, x)).collect())
                .collect();
            let n = panels.len();
            let mut split = vec![false; n];
            let mut any = false;
            let mut out = Vec::with_capacity(shifted.len());
            for s in &sums {
                let total: f64 = s.iter().map(|(k, _)| k).sum();
                let err: f64 = s.iter().map(|(k, g)| (k - g).abs()).sum();
                let target = (rel * total.abs()).max(floor);
                out.push(DensityValue {
                    value: norm_c * total,
                    error: norm_c * err,
                });
                if err > target {
                    any = true;
                    let share = target / n as f64;
                    for (j, (k, g)) in s.iter().enumerate() {
                        if (k - g).abs() > share {
                            split[j] = true;
                        }
                    }
                }
            }
            if !any {
                self.grid = Some(PanelGrid {
                    cuts,
                    panels,
                    floor,
                    reach,
                });
                return Ok(out);
            }
            let extra = split.iter().filter(|&&s| s).count();
            if n + extra > self.settings.panel_budget {
                return Err(LevyError::OscillationBudgetExceeded { x: f_max, panels: n + extra });
            }
            let mut new_cuts = Vec::with_capacity(n + extra);
            let mut keep = Vec::with_capacity(n + extra);
            for (j, &(a, b)) in cuts.iter().enumerate() {
                if split[j] {
                    let m = 0.5 * (a + b);
                    new_cuts.push((a, m));
                    new_cuts.push((m, b));
                    keep.push(None);
                    keep.push(None);
                } else {
                    new_cuts.push((a, b));
                    keep.push(Some(j));
                }
            }
            let fresh: Vec<(f64, f64)> = new_cuts
                .iter()
                .zip(&keep)
                .filter(|(_, k)| k.is_none())
                .map(|(c, _)| *c)
                .collect();
            let mut built = self.build_panels(&fresh)?.into_iter();
            let mut old: Vec<Option<Panel>> = panels.into_iter().map(Some).collect();
            panels = keep
                .iter()
                .map(|k| match k {
                    Some(j) => old[*j].take().unwrap(),
                    None => built.next().unwrap(),
                })
                .collect();
            cuts = new_cuts;
        }
        Err(LevyError::QuadratureFailure {
            context: format!("density panels did not settle after {MAX_ROUNDS} refinements"),
            value: f64::NAN,
            error: f64::NAN,
        })
    }
}

/// Inversion at a fixed (t, β) that keeps its panel grid between calls.
pub struct DensityEngine<'a> {
    inner: Inverter<'a>,
}

impl<'a> DensityEngine<'a> {
    pub fn new(ch: &'a Characteristics, t: f64, beta: &[usize], settings: &InversionSettings) -> Result<Self> {
        Ok(DensityEngine {
            inner: Inverter::new(ch, t, beta, *settings)?,
        })
    }

    pub fn values(&mut self, points: &[Vec<f64>]) -> Result<Vec<DensityValue>> {
        if points.is_empty() {
            return Err(LevyError::EmptyGrid);
        }
        self.inner.evaluate(points)
    }

    pub fn value(&mut self, x: &[f64]) -> Result<f64> {
        Ok(self.inner.evaluate(&[x.to_vec()])?[0].value)
    }
}

/// Density values (or a derivative ∂^β, |β| ≤ 4) at many points, sharing one
/// tabulation of Ψ.
pub fn density_values(
    ch: &Characteristics,
    t: f64,
    points: &[Vec<f64>],
    beta: &[usize],
    settings: &InversionSettings,
) -> Result<Vec<DensityValue>> {
    if points.is_empty() {
        return Err(LevyError::EmptyGrid);
    }
    let mut inv = Inverter::new(ch, t, beta, *settings)?;
    inv.evaluate(points)
}

pub fn density_at(ch: &Characteristics, t: f64, x: &[f64], settings: &InversionSettings) -> Result<f64> {
    Ok(density_values(ch, t, &[x.to_vec()], &[], settings)?[0].value)
}

pub fn density_derivative_at(
    ch: &Characteristics,
    t: f64,
    x: &[f64],
    beta: &[usize],
    settings: &InversionSettings,
) -> Result<f64> {
    Ok(density_values(ch, t, &[x.to_vec()], beta, settings)?[0].value)
}

/// Centering used by the density reports: t·b_r at r = h₀⁻¹(1/t), or t·b
/// without jumps.
pub fn default_center(ch: &Characteristics, t: f64) -> Result<Vec<f64>> {
    if ch.model().profile().is_zero() {
        return Ok(ch.model().drift().iter().map(|b| t * b).collect());
    }
    BoundContext::new(ch, t, CenterMode::HInverse)?.drift_center()
}

/// Natural length scale h₀⁻¹(1/t), or h⁻¹(1/t) without jumps.
pub fn natural_scale(ch: &Characteristics, t: f64) -> Result<f64> {
    if ch.model().profile().is_zero() {
        ch.h_inv(1.0 / t)
    } else {
        ch.h0_inv(1.0 / t)
    }
}

pub fn density_grid(
    ch: &Characteristics,
    t: f64,
    points: Vec<Vec<f64>>,
    settings: &InversionSettings,
) -> Result<DensityGrid> {
    let center = default_center(ch, t)?;
    let values = density_values(ch, t, &points, &[], settings)?
        .into_iter()
        .map(|v| v.value)
        .collect();
    Ok(DensityGrid { t, points, values, center })
}

/// sup_x p(t, x): a scan of |x − center| ≤ 4 h₀⁻¹(1/t) refined locally.
pub fn sup_density(ch: &Characteristics, t: f64, settings: &InversionSettings) -> Result<SupDensity> {
    let d = ch.dim();
    let center = default_center(ch, t)?;
    let reach = 4.0 * natural_scale(ch, t)?;
    let radial = ch.model().is_radial() && ch.model().is_symmetric();
    let axis = lin_space(-reach, reach, if d == 1 { 161 } else { 41 });
    let mut points = Vec::new();
    if d == 1 || radial {
        for &s in &axis {
            let mut x = center.clone();
            x[0] += s;
            points.push(x);
        }
    } else {
        let side = lin_space(-reach, reach, if d == 2 { 41 } else { 17 });
        let total = side.len().pow(d as u32);
        for idx in 0..total {
            let mut x = center.clone();
            let mut rest = idx;
            for xi in x.iter_mut() {
                *xi += side[rest % side.len()];
                rest /= side.len();
            }
            points.push(x);
        }
    }
    let mut engine = DensityEngine::new(ch, t, &[], settings)?;
    let values = engine.values(&points)?;
    let (best, _) = values
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.value.total_cmp(&b.1.value))
        .unwrap();
    let mut argmax = points[best].clone();
    let step = if d == 1 || radial {
        axis[1] - axis[0]
    } else {
        2.0 * reach / (if d == 2 { 40.0 } else { 16.0 })
    };
    let on_boundary = argmax.iter().zip(&center).any(|(a, c)| (a - c).abs() >= reach * (1.0 - 1e-12));
    let coords = if radial { 1 } else { d };
    let mut value = values[best].value;
    let mut failure = None;
    for _sweep in 0..2 {
        for i in 0..coords {
            let base = argmax.clone();
            let (xi, v) = golden_max(
                |s| {
                    let mut x = base.clone();
                    x[i] = s;
                    match engine.value(&x) {
                        Ok(v) => v,
                        Err(e) => {
                            failure.get_or_insert(e);
                            f64::NEG_INFINITY
                        }
                    }
                },
                base[i] - step,
                base[i] + step,
                step * 1e-6,
            );
            if let Some(e) = failure.take() {
                return Err(e);
            }
            if v > value {
                value = v;
                argmax[i] = xi;
            }
        }
        if d == 1 || radial {
            break;
        }
    }
    Ok(SupDensity { value, argmax, on_boundary })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{builtin, LevyModel};

    fn cauchy_density(t: f64, x: f64) -> f64 {
        t / (PI * PI * t * t + x * x)
    }

    #[test]
    fn cauchy_closed_form() {
        let ch = Characteristics::new(builtin::cauchy(1));
        let s = InversionSettings::default();
        let pts: Vec<Vec<f64>> = [0.0, 1.0, PI, 7.5, -20.0].iter().map(|&x| vec![x]).collect();
        let v = density_values(&ch, 1.0, &pts, &[], &s).unwrap();
        for (p, dv) in pts.iter().zip(&v) {
            let exact = cauchy_density(1.0, p[0]);
            assert!((dv.value / exact - 1.0).abs() < 1e-8, "x={} {} vs {}", p[0], dv.value, exact);
        }
        assert!((v[0].value - 1.0 / (PI * PI)).abs() < 1e-10);
        assert!((v[2].value - 0.5 / (PI * PI)).abs() < 1e-10);
    }

    #[test]
    fn gaussian_density_and_second_derivative() {
        // Ψ = z²/2, so p(t,x) is N(0, t)
        let ch = Characteristics::new(LevyModel::brownian(1, vec![0.5]).unwrap());
        let s = InversionSettings::default();
        let p0 = density_at(&ch, 1.0, &[0.0], &s).unwrap();
        assert!((p0 - 1.0 / (2.0 * PI).sqrt()).abs() < 1e-10);
        let p2 = density_derivative_at(&ch, 1.0, &[0.0], &[2], &s).unwrap();
        assert!((p2 + 1.0 / (2.0 * PI).sqrt()).abs() < 1e-9);
    }

    #[test]
    fn odd_derivative_vanishes_at_center() {
        let ch = Characteristics::new(builtin::stable(1.5, 1));
        let v = density_derivative_at(&ch, 1.0, &[0.0], &[1], &InversionSettings::default()).unwrap();
        assert!(v.abs() < 1e-12);
    }

    #[test]
    fn derivative_matches_finite_difference() {
        let ch = Characteristics::new(builtin::cauchy(1));
        let s = InversionSettings::default();
        let h = 1e-4;
        let v = density_values(&ch, 1.0, &[vec![1.0 - h], vec![1.0 + h]], &[], &s).unwrap();
        let fd = (v[1].value - v[0].value) / (2.0 * h);
        let d1 = density_derivative_at(&ch, 1.0, &[1.0], &[1], &s).unwrap();
        assert!((d1 / fd - 1.0).abs() < 1e-5, "{d1} vs {fd}");
    }

    #[test]
    fn isotropic_cauchy_in_two_dimensions() {
        // d = 2, Ψ = 2π|z|: p(t,x) = c t / (c²t² + |x|²)^{3/2} / (2π), c = 2π
        let ch = Characteristics::new(builtin::cauchy(2));
        let s = InversionSettings::default();
        let c = 2.0 * PI;
        for &r in &[0.0, 1.5, 6.0] {
            let v = density_at(&ch, 1.0, &[r, 0.0], &s).unwrap();
            let exact = c / (2.0 * PI * (c * c + r * r).powf(1.5));
            assert!((v / exact - 1.0).abs() < 1e-8, "r={r}: {v} vs {exact}");
        }
    }

    #[test]
    fn sup_of_cauchy() {
        let ch = Characteristics::new(builtin::cauchy(1));
        let s = sup_density(&ch, 1.0, &InversionSettings::default()).unwrap();
        assert!((s.value - 1.0 / (PI * PI)).abs() < 1e-10);
        assert!(s.argmax[0].abs() < 1e-3);
        assert!(!s.on_boundary);
    }

    #[test]
    fn settings_are_validated() {
        let ch = Characteristics::new(builtin::cauchy(1));
        let s = InversionSettings {
            tail_epsilon: 1e-3,
            ..Default::default()
        };
        assert!(density_at(&ch, 1.0, &[0.0], &s).is_err());
    }
}
