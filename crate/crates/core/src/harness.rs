//! End-to-end reports: density against bound functions, the equivalence
//! chain, the worked examples, and the lemma suite.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use rand::{seq::index::sample, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bound::{BoundContext, CenterMode};
use crate::characteristics::Characteristics;
use crate::conditions::{exp_moment, trend_diverges, Verdict};
use crate::density::{default_center, natural_scale, sup_density, DensityEngine, InversionSettings};
use crate::error::{LevyError, Result};
use crate::model::{builtin, LevyModel};
use crate::quad::{self, gauss_legendre, Tolerance};
use crate::roots::{decade_grid, lin_space, log_bisect};
use crate::sampler::{IncrementSampler, SamplerSettings};
use crate::special::{ball_volume, sphere_area};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundId {
    Rho,
    FExample1,
    FExample2,
    OnDiagonal,
    NuTail,
}

impl std::str::FromStr for BoundId {
    type Err = LevyError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rho" => Ok(BoundId::Rho),
            "f-example1" => Ok(BoundId::FExample1),
            "f-example2" => Ok(BoundId::FExample2),
            "on-diagonal" => Ok(BoundId::OnDiagonal),
            "nu-tail" => Ok(BoundId::NuTail),
            _ => Err(LevyError::Parse(format!("unknown bound '{s}'"))),
        }
    }
}

/// A length given outright or as a multiple of h₀⁻¹(1/t).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Extent {
    Absolute(f64),
    Relative(f64),
}

impl Extent {
    fn resolve(self, scale: f64) -> f64 {
        match self {
            Extent::Absolute(v) => v,
            Extent::Relative(v) => v * scale,
        }
    }
}

/// Offsets x from the center at which p(t, x + center) is compared.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum XGrid {
    Points(Vec<Vec<f64>>),
    Radial {
        rays: Vec<Vec<f64>>,
        lo: Extent,
        hi: Extent,
        per_decade: usize,
        origin: bool,
    },
}

impl XGrid {
    /// 4 rays (both signs in d = 1), 0.01 to 100 natural scales at 8 per decade.
    pub fn standard(dim: usize) -> Self {
        let rays = if dim == 1 {
            vec![vec![1.0], vec![-1.0]]
        } else {
            let mut rays = Vec::new();
            for k in 0..4 {
                let a = PI * k as f64 / 4.0;
                let mut e = vec![0.0; dim];
                e[0] = a.cos();
                e[1] = a.sin();
                rays.push(e);
            }
            rays
        };
        XGrid::Radial {
            rays,
            lo: Extent::Relative(0.01),
            hi: Extent::Relative(100.0),
            per_decade: 8,
            origin: false,
        }
    }

    /// ±x in d = 1 from `lo` to `hi` with the origin.
    pub fn line(lo: Extent, hi: Extent, per_decade: usize) -> Self {
        XGrid::Radial {
            rays: vec![vec![1.0], vec![-1.0]],
            lo,
            hi,
            per_decade,
            origin: true,
        }
    }

    pub fn points(&self, dim: usize, scale: f64) -> Result<Vec<Vec<f64>>> {
        let pts = match self {
            XGrid::Points(p) => p.clone(),
            XGrid::Radial {
                rays,
                lo,
                hi,
                per_decade,
                origin,
            } => {
                let (a, b) = (lo.resolve(scale), hi.resolve(scale));
                if !(a > 0.0 && b >= a) || *per_decade == 0 {
                    return Err(LevyError::InvalidParameter(format!("bad radial grid [{a}, {b}]")));
                }
                let radii = if b > a { decade_grid(a, b, *per_decade) } else { vec![a] };
                let mut pts = Vec::new();
                if *origin {
                    pts.push(vec![0.0; dim]);
                }
                for ray in rays {
                    let n = ray.iter().map(|v| v * v).sum::<f64>().sqrt();
                    for &r in &radii {
                        pts.push(ray.iter().map(|v| v * r / n).collect());
                    }
                }
                pts
            }
        };
        if pts.is_empty() {
            return Err(LevyError::EmptyGrid);
        }
        if pts.iter().any(|x| x.len() != dim) {
            return Err(LevyError::InvalidParameter("grid point has wrong dimension".into()));
        }
        Ok(pts)
    }
}

/// Default time grid: 5 per decade over [0.01, 10].
pub fn standard_times() -> Vec<f64> {
    decade_grid(0.01, 10.0, 5)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RatioPoint {
    pub t: f64,
    pub x: Vec<f64>,
    pub density: f64,
    pub density_error: f64,
    pub bound: f64,
    pub ratio: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComparabilityReport {
    pub model_id: String,
    pub t_grid: Vec<f64>,
    pub x_grid: XGrid,
    pub ratio_min: f64,
    pub ratio_max: f64,
    /// (t, x) of the extremes.
    pub argmin: (f64, Vec<f64>),
    pub argmax: (f64, Vec<f64>),
    pub center_mode: CenterMode,
    pub bound_id: BoundId,
    pub verdict: Verdict,
    pub verdict_text: String,
    pub points: Vec<RatioPoint>,
}

impl ComparabilityReport {
    /// max(ratio_max, 1/ratio_min): the two-sided constant on the grid.
    pub fn c0(&self) -> f64 {
        self.ratio_max.max(1.0 / self.ratio_min)
    }
}

/// f of the Aronson-type example: on-diagonal ∧ jump tail.
pub fn f_example1(t: f64, x: &[f64], alpha: f64, beta: f64) -> f64 {
    let d = x.len() as f64;
    let r = norm(x);
    let diag = t.powf(-d / alpha).min(t.powf(-d / beta));
    if r == 0.0 {
        return diag;
    }
    diag.min(t * r.powf(-d - alpha) + t * r.powf(-d - beta))
}

/// f of the very-heavy-tail example.
pub fn f_example2(t: f64, x: &[f64], alpha: f64) -> f64 {
    let d = x.len() as f64;
    let r = norm(x);
    let diag = t.powf(-d / alpha);
    if r == 0.0 {
        return diag;
    }
    let l = r.powf(0.5 * alpha).ln_1p();
    diag.min(t / (l * l * r.powf(d)))
}

fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Profile exponents for the example bounds, read from the model.
fn example_params(ch: &Characteristics, id: BoundId) -> Result<(f64, f64)> {
    use crate::model::ProfileKind;
    match (id, ch.model().profile().kind()) {
        (BoundId::FExample1, ProfileKind::StableMixture { alpha, beta }) => Ok((*alpha, *beta)),
        (BoundId::FExample2, ProfileKind::LogHeavy { alpha }) => Ok((*alpha, 0.0)),
        (BoundId::FExample1, _) => Err(LevyError::InvalidParameter(
            "f-example1 needs a stable-mixture profile".into(),
        )),
        (BoundId::FExample2, _) => Err(LevyError::InvalidParameter("f-example2 needs a log-heavy profile".into())),
        _ => Ok((0.0, 0.0)),
    }
}

fn center_for(ch: &Characteristics, t: f64, mode: CenterMode) -> Result<Vec<f64>> {
    if ch.model().profile().is_zero() {
        return default_center(ch, t);
    }
    BoundContext::new(ch, t, mode)?.drift_center()
}

/// Extremes of p(t, x + center)/bound(t, x) over the grids.
pub fn comparability_report(
    ch: &Characteristics,
    t_grid: &[f64],
    x_grid: &XGrid,
    bound_id: BoundId,
    center_mode: CenterMode,
    settings: &InversionSettings,
) -> Result<ComparabilityReport> {
    if t_grid.is_empty() {
        return Err(LevyError::EmptyGrid);
    }
    let d = ch.dim();
    let (alpha, beta) = example_params(ch, bound_id)?;
    let mut points = Vec::new();
    let mut per_t_max = Vec::new();
    let mut per_t_inv_min = Vec::new();
    for &t in t_grid {
        let scale = natural_scale(ch, t)?;
        let center = center_for(ch, t, center_mode)?;
        let offsets = x_grid.points(d, scale)?;
        let abs: Vec<Vec<f64>> = offsets
            .iter()
            .map(|x| x.iter().zip(&center).map(|(a, b)| a + b).collect())
            .collect();
        let mut engine = DensityEngine::new(ch, t, &[], settings)?;
        let values = engine.values(&abs).map_err(|e| at_point(e, t, &abs))?;
        let ctx = match bound_id {
            BoundId::Rho | BoundId::OnDiagonal => Some(BoundContext::new(ch, t, center_mode)?),
            _ => None,
        };
        let mut hi = f64::NEG_INFINITY;
        let mut lo = f64::INFINITY;
        for (x, v) in offsets.iter().zip(&values) {
            let bound = match bound_id {
                BoundId::Rho => ctx.as_ref().unwrap().rho(x)?,
                BoundId::OnDiagonal => ctx.as_ref().unwrap().on_diagonal(),
                BoundId::NuTail => t * ch.model().profile().eval(norm(x)),
                BoundId::FExample1 => f_example1(t, x, alpha, beta),
                BoundId::FExample2 => f_example2(t, x, alpha),
            };
            let ratio = v.value / bound;
            hi = hi.max(ratio);
            lo = lo.min(ratio);
            points.push(RatioPoint {
                t,
                x: x.clone(),
                density: v.value,
                density_error: v.error,
                bound,
                ratio,
            });
        }
        per_t_max.push(hi);
        per_t_inv_min.push(1.0 / lo);
    }
    let imax = (0..points.len()).max_by(|&a, &b| points[a].ratio.total_cmp(&points[b].ratio)).unwrap();
    let imin = (0..points.len()).min_by(|&a, &b| points[a].ratio.total_cmp(&points[b].ratio)).unwrap();
    let (pmin, pmax) = (&points[imin], &points[imax]);
    let resolved = pmin.density > 10.0 * pmin.density_error;
    let lower_ok = pmin.ratio > 0.0 && resolved;
    let upper_ok = pmax.ratio.is_finite();
    let per = per_decade(t_grid);
    let mut ordered: Vec<usize> = (0..t_grid.len()).collect();
    ordered.sort_by(|&a, &b| t_grid[a].total_cmp(&t_grid[b]));
    let up: Vec<f64> = ordered.iter().map(|&i| per_t_max[i]).collect();
    let down: Vec<f64> = ordered.iter().map(|&i| per_t_inv_min[i]).collect();
    let trend = |s: &[f64]| {
        let rev: Vec<f64> = s.iter().rev().copied().collect();
        trend_diverges(s, per) || trend_diverges(&rev, per)
    };
    let (verdict, why) = if !lower_ok {
        (Verdict::Fails, "lower ratio not resolved above zero".to_string())
    } else if !upper_ok {
        (Verdict::Fails, "upper ratio is infinite".to_string())
    } else if trend(&up) {
        (Verdict::Fails, "upper ratio grows toward a time edge".to_string())
    } else if trend(&down) {
        (Verdict::Fails, "lower ratio decays toward a time edge".to_string())
    } else {
        (Verdict::Holds, "two-sided bounded".to_string())
    };
    let tmin = t_grid.iter().cloned().fold(f64::INFINITY, f64::min);
    let tmax = t_grid.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let verdict_text = format!(
        "grid-certified {verdict}: {why}; ratio in [{:.6e}, {:.6e}] over {} points, t in [{tmin:.3e}, {tmax:.3e}]",
        pmin.ratio,
        pmax.ratio,
        points.len()
    );
    Ok(ComparabilityReport {
        model_id: ch.model().name().to_string(),
        t_grid: t_grid.to_vec(),
        x_grid: x_grid.clone(),
        ratio_min: pmin.ratio,
        ratio_max: pmax.ratio,
        argmin: (pmin.t, pmin.x.clone()),
        argmax: (pmax.t, pmax.x.clone()),
        center_mode,
        bound_id,
        verdict,
        verdict_text,
        points,
    })
}

fn at_point(e: LevyError, t: f64, pts: &[Vec<f64>]) -> LevyError {
    let far = pts.iter().map(|x| norm(x)).fold(0.0, f64::max);
    match e {
        LevyError::OscillationBudgetExceeded { .. } | LevyError::NotIntegrable { .. } => e,
        other => LevyError::QuadratureFailure {
            context: format!("density at t = {t}, |x| up to {far:.3e}: {other}"),
            value: f64::NAN,
            error: f64::NAN,
        },
    }
}

fn per_decade(keys: &[f64]) -> usize {
    let lo = keys.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = keys.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let decades = (hi / lo).log10().max(1e-12);
    ((keys.len() - 1) as f64 / decades).round().max(1.0) as usize
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExampleName {
    Example1,
    Example2,
}

impl std::str::FromStr for ExampleName {
    type Err = LevyError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "example1" => Ok(ExampleName::Example1),
            "example2" => Ok(ExampleName::Example2),
            _ => Err(LevyError::Parse(format!("unknown example '{s}'"))),
        }
    }
}

/// The model of each worked example: d = 1, (α, β) = (1.5, 0.5) with a
/// drift, and the log-heavy profile with α = 1.
pub fn example_model(name: ExampleName) -> LevyModel {
    match name {
        ExampleName::Example1 => builtin::stable_mixture(1.5, 0.5, 1)
            .with_drift(vec![0.5])
            .expect("drift")
            .with_name("example1"),
        ExampleName::Example2 => builtin::log_heavy(1.0, 1).with_name("example2"),
    }
}

/// Default x grid of the examples: 0 and ±[0.01, |x|max].
pub fn example_grid(name: ExampleName, per_decade: usize) -> XGrid {
    let top = match name {
        ExampleName::Example1 => 20.0,
        ExampleName::Example2 => 50.0,
    };
    XGrid::line(Extent::Absolute(0.01), Extent::Absolute(top), per_decade)
}

pub fn verify_example(
    name: ExampleName,
    t_grid: &[f64],
    x_grid: &XGrid,
    settings: &InversionSettings,
) -> Result<ComparabilityReport> {
    let ch = Characteristics::new(example_model(name));
    let (bound, mode) = match name {
        ExampleName::Example1 => (BoundId::FExample1, CenterMode::Plain),
        ExampleName::Example2 => (BoundId::FExample2, CenterMode::HInverse),
    };
    comparability_report(&ch, t_grid, x_grid, bound, mode, settings)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChainItem {
    pub label: String,
    pub statement: String,
    pub verdict: Verdict,
    pub witness: f64,
    pub worst_point: Vec<f64>,
    pub grid_spec: String,
    pub diagnosis: Option<String>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum JointVerdict {
    AllHold,
    AllFail,
    Mixed,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChainReport {
    pub model_id: String,
    pub horizon: f64,
    pub items: Vec<ChainItem>,
    pub joint: JointVerdict,
}

impl ChainReport {
    pub fn item(&self, label: &str) -> Option<&ChainItem> {
        self.items.iter().find(|i| i.label == label)
    }
}

#[derive(Clone, Copy, PartialEq)]
enum Side {
    Upper,
    Lower,
}

/// Verdict from values ordered by ascending key; `edges` marks which ends
/// of the grid are open limits.
fn edge_verdict(values: &[f64], side: Side, edges: (bool, bool), per: usize) -> (Verdict, usize, Option<String>) {
    let seq: Vec<f64> = values
        .iter()
        .map(|&v| match side {
            Side::Upper => v,
            Side::Lower => 1.0 / v,
        })
        .collect();
    let worst = (0..seq.len()).max_by(|&a, &b| seq[a].total_cmp(&seq[b])).unwrap();
    if seq.iter().any(|v| v.is_nan()) {
        return (Verdict::Inconclusive, worst, Some("witness not computable".into()));
    }
    if side == Side::Lower && values.iter().any(|&v| !(v > 0.0)) {
        return (Verdict::Fails, worst, Some("lower constant vanishes".into()));
    }
    let rev: Vec<f64> = seq.iter().rev().copied().collect();
    let low = edges.0 && trend_diverges(&rev, per);
    let high = edges.1 && trend_diverges(&seq, per);
    let upper_side = 2 * worst >= seq.len();
    match (low, high) {
        (false, false) => (Verdict::Holds, worst, None),
        (true, false) => (Verdict::Fails, worst, Some("constant diverges toward the lower edge".into())),
        (false, true) => (Verdict::Fails, worst, Some("constant diverges toward the upper edge".into())),
        (true, true) => {
            let edge = if upper_side { "upper" } else { "lower" };
            (Verdict::Fails, worst, Some(format!("constant diverges toward the {edge} edge")))
        }
    }
}

/// sup_x p(t, ·) with its location. Symmetric drift-free models peak at
/// the origin where p = (2π)^{−d}∫e^{−tReΨ}.
struct SupInfo {
    value: f64,
    argmax: Vec<f64>,
}

fn sup_info(ch: &Characteristics, t: f64, settings: &InversionSettings) -> Result<SupInfo> {
    let m = ch.model();
    if m.is_symmetric() && m.drift().iter().all(|&b| b == 0.0) {
        let d = ch.dim() as i32;
        return Ok(SupInfo {
            value: (2.0 * PI).powi(-d) * exp_moment(ch, t, 0)?,
            argmax: vec![0.0; ch.dim()],
        });
    }
    let s = sup_density(ch, t, settings)?;
    Ok(SupInfo {
        value: s.value,
        argmax: s.argmax,
    })
}

/// Smallest c with p(t, argmax + y) ≥ sup/c for |y| ≤ H/c.
fn near_max_constant(ch: &Characteristics, t: f64, sup: f64, argmax: &[f64], scale: f64, settings: &InversionSettings) -> Result<f64> {
    let d = ch.dim();
    let mut engine = DensityEngine::new(ch, t, &[], settings)?;
    let dirs: Vec<Vec<f64>> = if d == 1 {
        vec![vec![1.0], vec![-1.0]]
    } else {
        crate::model::sphere_directions(d, 8 * d)
    };
    let mut failure = None;
    let mut ok = |c: f64| -> bool {
        let rad = scale / c;
        let mut pts = Vec::new();
        for dir in &dirs {
            for s in lin_space(0.0, rad, 5).into_iter().skip(1) {
                pts.push(argmax.iter().zip(dir).map(|(a, u)| a + s * u).collect::<Vec<f64>>());
            }
        }
        match engine.values(&pts) {
            Ok(v) => v.iter().all(|p| p.value >= sup / c),
            Err(e) => {
                failure.get_or_insert(e);
                false
            }
        }
    };
    if !ok(1e6) {
        return Ok(f64::INFINITY);
    }
    if ok(1.0) {
        return Ok(1.0);
    }
    let c = log_bisect(|c| !ok(c), 1.0, 1e6, 1e-3, 60);
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(c)
}

/// The equivalence chain on a horizon T (∞ allowed): (a) h ≤ cK,
/// (b) ∫e^{−tReΨ} ≤ c H^{−d}, (c1) sup p ≤ c H^{−d}, (c7) sup p ≍ H^{−d},
/// (c6) p ≥ sup/c on a ball of radius H/c around the maximum; H = h⁻¹(1/t).
pub fn verify_equivalence_chain(ch: &Characteristics, horizon: f64, settings: &InversionSettings) -> Result<ChainReport> {
    if !(horizon > 0.0) {
        return Err(LevyError::InvalidParameter(format!("horizon must be positive, got {horizon}")));
    }
    let d = ch.dim() as i32;
    let open = horizon.is_infinite();
    let mut items = Vec::new();

    // (a)
    let r_top = if open { 1e4 } else { ch.h_inv(1.0 / horizon)? };
    let r_lo = if open { 1e-4 } else { r_top * 1e-6 };
    let radii = decade_grid(r_lo, r_top, 32);
    let ratios = radii
        .iter()
        .map(|&r| Ok(ch.h(r)? / ch.k(r)?))
        .collect::<Result<Vec<f64>>>()?;
    let (v, w, why) = edge_verdict(&ratios, Side::Upper, (true, open), 32);
    items.push(ChainItem {
        label: "a".into(),
        statement: "h(r) <= c K(r)".into(),
        verdict: v,
        witness: ratios[w],
        worst_point: vec![radii[w]],
        grid_spec: format!("r in [{r_lo:.3e}, {r_top:.3e}] at 32/decade"),
        diagnosis: why,
    });

    // (b)
    let times_b = if open { decade_grid(1e-3, 10.0, 4) } else { decade_grid(horizon * 1e-4, horizon, 4) };
    let mut b_vals = Vec::new();
    let mut b_note = None;
    for &t in &times_b {
        match exp_moment(ch, t, 0) {
            Ok(i) => b_vals.push(ch.h_inv(1.0 / t)?.powi(d) * i),
            Err(LevyError::DivergentIntegral(m)) => {
                b_vals.push(f64::INFINITY);
                b_note.get_or_insert(m);
            }
            Err(e) => return Err(e),
        }
    }
    let (v, w, why) = edge_verdict(&b_vals, Side::Upper, (true, open), 4);
    items.push(ChainItem {
        label: "b".into(),
        statement: "int exp(-t Re psi) <= c [h^-1(1/t)]^-d".into(),
        verdict: v,
        witness: b_vals[w],
        worst_point: vec![times_b[w]],
        grid_spec: format!("t in [{:.3e}, {:.3e}] at 4/decade", times_b[0], times_b[times_b.len() - 1]),
        diagnosis: why.or(b_note),
    });

    // (c1), (c7), (c6)
    let times_c = if open { decade_grid(1e-2, 10.0, 2) } else { decade_grid(horizon * 1e-3, horizon, 2) };
    let grid_c = format!("t in [{:.3e}, {:.3e}] at 2/decade", times_c[0], times_c[times_c.len() - 1]);
    let mut sups = Vec::new();
    let mut sup_scaled = Vec::new();
    let mut c_note: Option<String> = None;
    for &t in &times_c {
        let scale = ch.h_inv(1.0 / t)?;
        match sup_info(ch, t, settings) {
            Ok(s) => {
                sup_scaled.push(s.value * scale.powi(d));
                sups.push(Some((s, scale)));
            }
            Err(e) => {
                c_note.get_or_insert(format!("density unavailable at t = {t}: {e}"));
                sup_scaled.push(f64::NAN);
                sups.push(None);
            }
        }
    }
    let (v1, w1, why1) = edge_verdict(&sup_scaled, Side::Upper, (true, open), 2);
    items.push(ChainItem {
        label: "c1".into(),
        statement: "sup p(t, .) <= c [h^-1(1/t)]^-d".into(),
        verdict: v1,
        witness: sup_scaled[w1],
        worst_point: vec![times_c[w1]],
        grid_spec: grid_c.clone(),
        diagnosis: why1.or(c_note.clone()),
    });
    let (vl, wl, whyl) = edge_verdict(&sup_scaled, Side::Lower, (true, open), 2);
    let two_sided = sup_scaled[w1].max(1.0 / sup_scaled[wl]);
    let v7 = match (v1, vl) {
        (Verdict::Holds, Verdict::Holds) => Verdict::Holds,
        (Verdict::Fails, _) | (_, Verdict::Fails) => Verdict::Fails,
        _ => Verdict::Inconclusive,
    };
    items.push(ChainItem {
        label: "c7".into(),
        statement: "sup p(t, .) comparable to [h^-1(1/t)]^-d".into(),
        verdict: v7,
        witness: two_sided,
        worst_point: vec![times_c[if sup_scaled[w1] >= 1.0 / sup_scaled[wl] { w1 } else { wl }]],
        grid_spec: grid_c.clone(),
        diagnosis: whyl.or(c_note.clone()),
    });
    // p ≥ sup/c on B(H/c) integrates to sup·H^d·κ_d/c^{d+1} ≤ 1, so the
    // near-max constant is at least (κ_d sup H^d)^{1/(d+1)}
    let kappa = ball_volume(ch.dim());
    let implied: Vec<f64> = sup_scaled.iter().map(|s| (kappa * s).powf(1.0 / (d as f64 + 1.0)).max(1.0)).collect();
    let (v6, near, why6) = if v1 == Verdict::Fails {
        (Verdict::Fails, implied, Some("implied by the failure of c1".to_string()))
    } else {
        let mut near = Vec::new();
        for (&t, s) in times_c.iter().zip(&sups) {
            near.push(match s {
                Some((s, scale)) => near_max_constant(ch, t, s.value, &s.argmax, *scale, settings)?,
                None => f64::NAN,
            });
        }
        let (v, _, why) = edge_verdict(&near, Side::Upper, (true, open), 2);
        (v, near, why)
    };
    let w6 = (0..near.len()).max_by(|&a, &b| near[a].total_cmp(&near[b])).unwrap();
    items.push(ChainItem {
        label: "c6".into(),
        statement: "p(t, y + argmax) >= sup p / c for |y| <= h^-1(1/t)/c".into(),
        verdict: v6,
        witness: near[w6],
        worst_point: vec![times_c[w6]],
        grid_spec: grid_c,
        diagnosis: why6.or(c_note),
    });

    let all = |v: Verdict| items.iter().all(|i| i.verdict == v);
    let joint = if all(Verdict::Holds) {
        JointVerdict::AllHold
    } else if all(Verdict::Fails) {
        JointVerdict::AllFail
    } else {
        JointVerdict::Mixed
    };
    Ok(ChainReport {
        model_id: ch.model().name().to_string(),
        horizon,
        items,
        joint,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LemmaStatus {
    Pass,
    Fail,
    Skipped,
    Error,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LemmaCheck {
    pub name: String,
    pub status: LemmaStatus,
    pub measured: BTreeMap<String, f64>,
    pub note: String,
}

impl LemmaCheck {
    fn new(name: &str, pass: bool, measured: &[(&str, f64)], note: String) -> Self {
        LemmaCheck {
            name: name.to_string(),
            status: if pass { LemmaStatus::Pass } else { LemmaStatus::Fail },
            measured: measured.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
            note,
        }
    }

    fn skipped(name: &str, note: String) -> Self {
        LemmaCheck {
            name: name.to_string(),
            status: LemmaStatus::Skipped,
            measured: BTreeMap::new(),
            note,
        }
    }

    pub fn passed(&self) -> bool {
        self.status == LemmaStatus::Pass
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub model_id: String,
    pub checks: Vec<LemmaCheck>,
    pub passed: bool,
}

impl SuiteReport {
    pub fn check(&self, name: &str) -> Option<&LemmaCheck> {
        self.checks.iter().find(|c| c.name == name)
    }
}

const IDENTITY_TOL: f64 = 1e-8;

/// h(1/r)/(8(1+2d)) ≤ Ψ*(r) ≤ 2h(1/r).
pub fn check_psi_star_sandwich(ch: &Characteristics, radii: &[f64]) -> Result<LemmaCheck> {
    let d = ch.dim() as f64;
    let low = 1.0 / (8.0 * (1.0 + 2.0 * d));
    let mut lo = f64::INFINITY;
    let mut hi = 0.0f64;
    for &r in radii {
        let q = ch.psi_star(r)? / ch.h(1.0 / r)?;
        lo = lo.min(q);
        hi = hi.max(q);
    }
    let slack = (lo / low - 1.0).min(1.0 - hi / 2.0);
    Ok(LemmaCheck::new(
        "psi-star-sandwich",
        slack >= -IDENTITY_TOL,
        &[("min_ratio", lo), ("max_ratio", hi), ("relative_slack", slack)],
        format!("Psi*(r)/h(1/r) on {} radii, allowed [{low:.6}, 2]", radii.len()),
    ))
}

/// h(a) − h(b) = ∫_a^b 2K(r)/r dr.
pub fn check_h_from_k(ch: &Characteristics, radii: &[f64]) -> Result<LemmaCheck> {
    let breaks: Vec<f64> = ch.model().profile().breakpoints().iter().map(|r| r.ln()).collect();
    let mut worst = 0.0f64;
    let mut failure = None;
    for w in radii.windows(2) {
        let (a, b) = (w[0].min(w[1]), w[0].max(w[1]));
        let mut f = |u: f64| match ch.k(u.exp()) {
            Ok(k) => 2.0 * k,
            Err(e) => {
                failure.get_or_insert(e);
                0.0
            }
        };
        let inside: Vec<f64> = breaks.iter().cloned().filter(|&x| x > a.ln() && x < b.ln()).collect();
        let e = quad::integrate(&mut f, a.ln(), b.ln(), &inside, Tolerance::new(0.0, 1e-12));
        if let Some(err) = failure.take() {
            return Err(err);
        }
        let ha = ch.h(a)?;
        let gap = (ha - ch.h(b)? - e.value).abs() / ha;
        worst = worst.max(gap);
    }
    Ok(LemmaCheck::new(
        "h-from-k",
        worst <= IDENTITY_TOL,
        &[("max_relative_gap", worst)],
        format!("consecutive pairs of {} radii", radii.len()),
    ))
}

/// 1/h⁻¹(u/2) ≤ Ψ*⁻¹(u) ≤ 1/h⁻¹((c_d/2)u), c_d = 16(1+2d); plus
/// h(h⁻¹(u)) = u with h⁻¹ decreasing.
pub fn check_inverse_sandwich(ch: &Characteristics, us: &[f64]) -> Result<LemmaCheck> {
    let d = ch.dim() as f64;
    let cd = 16.0 * (1.0 + 2.0 * d);
    let mut slack = f64::INFINITY;
    let mut round = 0.0f64;
    let mut monotone = true;
    let mut prev: Option<(f64, f64)> = None;
    let mut used = 0;
    for &u in us {
        let inv = ch.h_inv(u)?;
        round = round.max((ch.h(inv)? / u - 1.0).abs());
        if let Some((pu, pr)) = prev {
            if (u > pu && inv > pr) || (u < pu && inv < pr) {
                monotone = false;
            }
        }
        prev = Some((u, inv));
        let ps = match ch.psi_star_inv(u) {
            Ok(p) => p.radius,
            Err(LevyError::BracketFailure(_)) => continue,
            Err(e) => return Err(e),
        };
        used += 1;
        let lo = 1.0 / ch.h_inv(u / 2.0)?;
        let hi = 1.0 / ch.h_inv(cd / 2.0 * u)?;
        slack = slack.min(ps / lo - 1.0).min(1.0 - ps / hi);
    }
    Ok(LemmaCheck::new(
        "inverse-sandwich",
        used > 0 && slack >= -IDENTITY_TOL && round <= 1e-9 && monotone,
        &[("relative_slack", slack), ("round_trip", round), ("points", used as f64)],
        format!("u on {} points; h^-1 monotone: {monotone}", us.len()),
    ))
}

/// ω_d/2 ≤ ∫ρ_t ≤ (ω_d/2)(1 + 2/d).
pub fn check_rho_integral(ch: &Characteristics, times: &[f64]) -> Result<LemmaCheck> {
    let d = ch.dim() as f64;
    let w = sphere_area(ch.dim());
    let (lo, hi) = (w / 2.0, w / 2.0 * (1.0 + 2.0 / d));
    let mut vmin = f64::INFINITY;
    let mut vmax = 0.0f64;
    for &t in times {
        let v = BoundContext::new(ch, t, CenterMode::HInverse)?.integral()?;
        vmin = vmin.min(v);
        vmax = vmax.max(v);
    }
    Ok(LemmaCheck::new(
        "rho-integral",
        vmin >= lo * (1.0 - 1e-10) && vmax <= hi * (1.0 + 1e-10),
        &[("min", vmin), ("max", vmax), ("lower", lo), ("upper", hi)],
        format!("t in {times:?}"),
    ))
}

/// r₀ ∈ [h₀⁻¹(3/t), h₀⁻¹(1/t)] with both branches of ρ_t equal there.
pub fn check_r0_bracket(ch: &Characteristics, times: &[f64]) -> Result<LemmaCheck> {
    let mut ok = true;
    let mut gap = 0.0f64;
    let mut pos = Vec::new();
    for &t in times {
        let ctx = BoundContext::new(ch, t, CenterMode::HInverse)?;
        let r0 = ctx.r0()?;
        let (a, b) = (ch.h0_inv(3.0 / t)?, ctx.scale());
        ok &= r0 >= a * (1.0 - 1e-12) && r0 <= b * (1.0 + 1e-12);
        let tail = t * ch.k0(r0)? * r0.powi(-(ch.dim() as i32));
        gap = gap.max((tail / ctx.on_diagonal() - 1.0).abs());
        pos.push((r0 / a).ln() / (b / a).ln());
    }
    let lowest = pos.iter().cloned().fold(f64::INFINITY, f64::min);
    Ok(LemmaCheck::new(
        "r0-bracket",
        ok && gap <= 1e-9,
        &[("branch_gap", gap), ("min_log_position", lowest)],
        format!("t in {times:?}"),
    ))
}

/// ρ_t(x + z) ≤ 2^{d+2} ρ_t(x) for |z| ≤ h₀⁻¹(3/t) ∨ |x|/2.
pub fn check_small_shift(ch: &Characteristics, times: &[f64]) -> Result<LemmaCheck> {
    let d = ch.dim() as i32;
    let allowed = 2f64.powi(d + 2);
    let mut worst = 0.0f64;
    for &t in times {
        let ctx = BoundContext::new(ch, t, CenterMode::HInverse)?;
        let h3 = ch.h0_inv(3.0 / t)?;
        for r in decade_grid(ctx.scale() * 1e-3, ctx.scale() * 1e3, 8) {
            let z = h3.max(r / 2.0);
            let q = ctx.rho_radial((r - z).max(0.0))? / ctx.rho_radial(r)?;
            worst = worst.max(q);
        }
    }
    Ok(LemmaCheck::new(
        "small-shift",
        worst <= allowed * (1.0 + 1e-9),
        &[("max_ratio", worst), ("allowed", allowed)],
        format!("t in {times:?}, |x| over six decades around h0^-1(1/t)"),
    ))
}

/// ρ_t ≤ φ_t ≤ c ρ_t where the lower scaling of h₀ is available.
pub fn check_plateau_form(ch: &Characteristics, times: &[f64]) -> Result<LemmaCheck> {
    let mut lo = f64::INFINITY;
    let mut hi = 0.0f64;
    let mut skipped = Vec::new();
    for &t in times {
        let ctx = BoundContext::new(ch, t, CenterMode::HInverse)?;
        for r in decade_grid(ctx.scale() * 1e-2, ctx.scale() * 1e2, 8) {
            let x = {
                let mut x = vec![0.0; ch.dim()];
                x[0] = r;
                x
            };
            let phi = match ctx.phi(&x) {
                Ok(v) => v,
                Err(LevyError::ScalingUnavailable(_)) => {
                    skipped.push(t);
                    break;
                }
                Err(e) => return Err(e),
            };
            let q = phi / ctx.rho(&x)?;
            lo = lo.min(q);
            hi = hi.max(q);
        }
    }
    if skipped.len() == times.len() {
        return Ok(LemmaCheck::skipped(
            "plateau-form",
            "no lower scaling of h0 at any tested time".into(),
        ));
    }
    Ok(LemmaCheck::new(
        "plateau-form",
        lo >= 1.0 - 1e-12 && hi.is_finite() && hi < 1e6,
        &[("min_ratio", lo), ("max_ratio", hi)],
        format!("t in {times:?}; skipped t {skipped:?}"),
    ))
}

/// min over |x| ≤ θ√t of p(t, x + t b_{√t}) t^{d/2}.
pub fn check_gauss_lower(ch: &Characteristics, times: &[f64], theta: f64, settings: &InversionSettings) -> Result<LemmaCheck> {
    let m = ch.model();
    if !m.has_gaussian() {
        return Ok(LemmaCheck::skipped("gauss-lower", "no Gaussian part".into()));
    }
    if !(m.gaussian_min_eigenvalue() > 1e-12 * m.gaussian_norm()) {
        return Ok(LemmaCheck::skipped("gauss-lower", "Gaussian part is degenerate".into()));
    }
    let d = ch.dim();
    let mut worst = f64::INFINITY;
    let mut per_t = Vec::new();
    for &t in times {
        let s = t.sqrt();
        let center: Vec<f64> = ch.drift_br(s)?.iter().map(|b| t * b).collect();
        let mut pts = vec![center.clone()];
        for k in 0..d {
            for v in [-1.0, -0.5, 0.5, 1.0] {
                let mut x = center.clone();
                x[k] += v * theta * s;
                pts.push(x);
            }
        }
        let mut engine = DensityEngine::new(ch, t, &[], settings)?;
        let vals = engine.values(&pts)?;
        let c = vals.iter().map(|v| v.value).fold(f64::INFINITY, f64::min) * s.powi(d as i32);
        per_t.push(c);
        worst = worst.min(c);
    }
    let mut measured = vec![("c_tilde", worst)];
    let labels: Vec<String> = times.iter().map(|t| format!("c_at_t={t}")).collect();
    for (l, v) in labels.iter().zip(&per_t) {
        measured.push((l.as_str(), *v));
    }
    Ok(LemmaCheck::new(
        "gauss-lower",
        worst > 0.0,
        &measured,
        format!("|x| <= {theta} sqrt(t), t in {times:?}"),
    ))
}

/// min over |x| ≤ θ h_s⁻¹(1/t) of p(t, x + t b_{h_s⁻¹(1/t)}) [h_s⁻¹(1/t)]^d
/// with the default isotropic minorant.
pub fn check_jump_lower(ch: &Characteristics, times: &[f64], theta: f64, settings: &InversionSettings) -> Result<LemmaCheck> {
    let m = ch.model();
    if m.has_gaussian() {
        return Ok(LemmaCheck::skipped("jump-lower", "model has a Gaussian part".into()));
    }
    let minorant = match m.default_minorant() {
        Ok(v) => v,
        Err(e) => return Ok(LemmaCheck::skipped("jump-lower", e.to_string())),
    };
    let chs = Characteristics::new(LevyModel::isotropic(minorant.profile_s.clone())?);
    let d = ch.dim();
    let mut vals_t = Vec::new();
    for &t in times {
        let hs = chs.h_inv(1.0 / t)?;
        let center: Vec<f64> = ch.drift_br(hs)?.iter().map(|b| t * b).collect();
        let mut pts = vec![center.clone()];
        for k in 0..d {
            for v in [-1.0, -0.5, 0.5, 1.0] {
                let mut x = center.clone();
                x[k] += v * theta * hs;
                pts.push(x);
            }
        }
        let mut engine = DensityEngine::new(ch, t, &[], settings)?;
        let vals = engine.values(&pts)?;
        vals_t.push(vals.iter().map(|v| v.value).fold(f64::INFINITY, f64::min) * hs.powi(d as i32));
    }
    let (v, w, why) = edge_verdict(&vals_t, Side::Lower, (true, true), per_decade(times).max(1));
    Ok(LemmaCheck::new(
        "jump-lower",
        v == Verdict::Holds,
        &[("c_tilde", vals_t[w]), ("a2", minorant.a2)],
        format!("|x| <= {theta} h_s^-1(1/t), t in {times:?}{}", why.map(|s| format!("; {s}")).unwrap_or_default()),
    ))
}

/// A nonzero Gaussian part is compatible with the directional lower bound
/// Re Ψ(x) ≥ c h(1/|x|) iff A is nondegenerate: scan Re Ψ(e/r)/h(r) along
/// the weakest direction of A as r → 0.
pub fn check_gauss_nondegenerate(ch: &Characteristics) -> Result<LemmaCheck> {
    let m = ch.model();
    if !m.has_gaussian() {
        return Ok(LemmaCheck::skipped("gauss-nondegenerate", "no Gaussian part".into()));
    }
    let d = ch.dim();
    let a = nalgebra::DMatrix::from_row_slice(d, d, m.gaussian());
    let eig = nalgebra::SymmetricEigen::new(a);
    let k = (0..d).min_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j])).unwrap();
    let e: Vec<f64> = (0..d).map(|i| eig.eigenvectors[(i, k)]).collect();
    let radii = decade_grid(1e-4, 1e-1, 8);
    let mut q = Vec::new();
    for &r in radii.iter() {
        let z: Vec<f64> = e.iter().map(|v| v / r).collect();
        q.push(ch.psi(&z)?.re / ch.h(r)?);
    }
    let (v, w, _) = edge_verdict(&q, Side::Lower, (true, false), 8);
    let detected = v == Verdict::Holds;
    let nondegenerate = m.gaussian_min_eigenvalue() > 1e-12 * m.gaussian_norm();
    Ok(LemmaCheck::new(
        "gauss-nondegenerate",
        detected == nondegenerate,
        &[
            ("min_ratio", q[w]),
            ("min_eigenvalue", m.gaussian_min_eigenvalue()),
            ("compatible", if detected { 1.0 } else { 0.0 }),
        ],
        if detected {
            "directional lower bound holds along the weakest direction of A".into()
        } else {
            "directional lower bound fails: Gaussian part is incompatible".into()
        },
    ))
}

fn run<F: FnOnce() -> Result<LemmaCheck>>(name: &str, f: F) -> LemmaCheck {
    f().unwrap_or_else(|e| LemmaCheck {
        name: name.to_string(),
        status: LemmaStatus::Error,
        measured: BTreeMap::new(),
        note: e.to_string(),
    })
}

/// Every lemma check with its default grid; errors are recorded per check.
pub fn verify_lemma_suite(ch: &Characteristics, settings: &InversionSettings) -> SuiteReport {
    let radii = decade_grid(1e-3, 1e3, 4);
    let times = [0.01, 0.1, 1.0, 10.0];
    let us = decade_grid(1e-2, 1e2, 4);
    let jumps = !ch.model().profile().is_zero();
    let mut checks = vec![
        run("psi-star-sandwich", || check_psi_star_sandwich(ch, &radii)),
        run("h-from-k", || check_h_from_k(ch, &radii)),
        run("inverse-sandwich", || check_inverse_sandwich(ch, &us)),
    ];
    if jumps {
        checks.push(run("rho-integral", || check_rho_integral(ch, &times)));
        checks.push(run("r0-bracket", || check_r0_bracket(ch, &times)));
        checks.push(run("small-shift", || check_small_shift(ch, &times)));
        checks.push(run("plateau-form", || check_plateau_form(ch, &times)));
        checks.push(run("jump-lower", || check_jump_lower(ch, &[0.1, 1.0], 1.0, settings)));
    }
    checks.push(run("gauss-lower", || check_gauss_lower(ch, &[0.1, 1.0], 1.0, settings)));
    checks.push(run("gauss-nondegenerate", || check_gauss_nondegenerate(ch)));
    let passed = checks
        .iter()
        .all(|c| matches!(c.status, LemmaStatus::Pass | LemmaStatus::Skipped));
    SuiteReport {
        model_id: ch.model().name().to_string(),
        checks,
        passed,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CrossCheckPoint {
    pub t: f64,
    pub x: Vec<f64>,
    pub box_half_width: f64,
    pub inversion_mass: f64,
    pub sample_mass: f64,
    pub standard_error: f64,
    pub z: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CrossCheck {
    pub points: Vec<CrossCheckPoint>,
    pub passed: bool,
}

/// Re-check `n_points` random report points against Monte Carlo: the
/// sample mass of a small box around x + center against the inversion
/// mass of that box, within 4 standard errors.
pub fn monte_carlo_crosscheck(
    ch: &Characteristics,
    report: &ComparabilityReport,
    n_points: usize,
    sampler: &SamplerSettings,
    settings: &InversionSettings,
) -> Result<CrossCheck> {
    let d = ch.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(sampler.seed);
    let picks = sample(&mut rng, report.points.len(), n_points.min(report.points.len())).into_vec();
    let (gx, gw) = gauss_legendre(4);
    let mut out = Vec::new();
    for i in picks {
        let rp = &report.points[i];
        let t = rp.t;
        let center = center_for(ch, t, report.center_mode)?;
        let x: Vec<f64> = rp.x.iter().zip(&center).map(|(a, b)| a + b).collect();
        let w = 0.05 * natural_scale(ch, t)?;
        // tensor Gauss–Legendre over the box
        let n = gx.len().pow(d as u32);
        let mut nodes = Vec::with_capacity(n);
        let mut weights = Vec::with_capacity(n);
        for idx in 0..n {
            let mut rest = idx;
            let mut p = x.clone();
            let mut wt = 1.0;
            for pk in p.iter_mut() {
                let k = rest % gx.len();
                rest /= gx.len();
                *pk += w * gx[k];
                wt *= w * gw[k];
            }
            nodes.push(p);
            weights.push(wt);
        }
        let mut engine = DensityEngine::new(ch, t, &[], settings)?;
        let vals = engine.values(&nodes)?;
        let mass: f64 = vals.iter().zip(&weights).map(|(v, w)| v.value * w).sum();
        let s = IncrementSampler::new(ch.model(), t, sampler)?;
        let samples = s.draw_many(0, sampler.n_samples);
        let hits = samples
            .iter()
            .filter(|y| y.iter().zip(&x).all(|(a, b)| (a - b).abs() < w))
            .count();
        let nn = sampler.n_samples as f64;
        let emp = hits as f64 / nn;
        let p = mass.clamp(1.0 / nn, 1.0);
        let se = (p * (1.0 - p) / nn).sqrt();
        out.push(CrossCheckPoint {
            t,
            x: rp.x.clone(),
            box_half_width: w,
            inversion_mass: mass,
            sample_mass: emp,
            standard_error: se,
            z: (emp - mass) / se,
        });
    }
    let passed = out.iter().all(|p| p.z.abs() <= 4.0);
    Ok(CrossCheck { points: out, passed })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn example_bounds() {
        // t < 1: t^{-1/α} is the smaller diagonal
        let v = f_example1(0.1, &[0.0], 1.5, 0.5);
        assert!((v - 0.1f64.powf(-1.0 / 1.5)).abs() < 1e-12);
        let v = f_example1(1.0, &[10.0], 1.5, 0.5);
        assert!((v - (10f64.powf(-2.5) + 10f64.powf(-1.5))).abs() < 1e-15);
        let v = f_example2(0.5, &[50.0], 1.0);
        let l = (1.0 + 50f64.sqrt()).ln();
        assert!((v - 0.5 / (l * l * 50.0)).abs() < 1e-15);
    }

    #[test]
    fn grids_resolve_against_scale() {
        let g = XGrid::line(Extent::Relative(0.1), Extent::Absolute(10.0), 1);
        let p = g.points(1, 2.0).unwrap();
        assert_eq!(p[0], vec![0.0]);
        assert!((p[1][0] - 0.2).abs() < 1e-15);
        assert_eq!(p.len(), 1 + 2 * 3);
        assert_eq!(XGrid::Points(vec![]).points(1, 1.0), Err(LevyError::EmptyGrid));
    }

    #[test]
    fn cauchy_rho_report() {
        let ch = Characteristics::new(builtin::cauchy(1));
        let grid = XGrid::Points(lin_space(-10.0, 10.0, 21).into_iter().map(|x| vec![x]).collect());
        let r = comparability_report(&ch, &[0.25, 1.0], &grid, BoundId::Rho, CenterMode::HInverse, &InversionSettings::default()).unwrap();
        assert_eq!(r.verdict, Verdict::Holds, "{}", r.verdict_text);
        let at0 = r.points.iter().find(|p| p.t == 1.0 && p.x[0] == 0.0).unwrap();
        assert!((at0.ratio - 4.0 / (PI * PI)).abs() < 1e-8);
        assert!(r.ratio_min > 0.0 && r.ratio_max.is_finite());
    }

    #[test]
    fn symmetric_plain_equals_h_inverse() {
        let ch = Characteristics::new(builtin::stable(1.5, 1).with_drift(vec![0.7]).unwrap());
        let grid = XGrid::Points(vec![vec![0.0], vec![1.0]]);
        let s = InversionSettings::default();
        let a = comparability_report(&ch, &[0.5], &grid, BoundId::Rho, CenterMode::Plain, &s).unwrap();
        let b = comparability_report(&ch, &[0.5], &grid, BoundId::Rho, CenterMode::HInverse, &s).unwrap();
        assert_eq!(a.ratio_min, b.ratio_min);
        assert_eq!(a.ratio_max, b.ratio_max);
    }

    #[test]
    fn crosscheck_agrees_with_inversion() {
        let ch = Characteristics::new(builtin::cauchy(1));
        let grid = XGrid::Points(lin_space(-3.0, 3.0, 13).into_iter().map(|x| vec![x]).collect());
        let s = InversionSettings::default();
        let r = comparability_report(&ch, &[0.5, 1.0], &grid, BoundId::Rho, CenterMode::HInverse, &s).unwrap();
        let sampler = SamplerSettings {
            n_samples: 40_000,
            ..SamplerSettings::default()
        };
        let c = monte_carlo_crosscheck(&ch, &r, 10, &sampler, &s).unwrap();
        assert_eq!(c.points.len(), 10);
        assert!(c.passed, "{c:?}");
    }

    #[test]
    fn cauchy_suite_passes() {
        let ch = Characteristics::new(builtin::cauchy(1));
        let s = verify_lemma_suite(&ch, &InversionSettings::default());
        for c in &s.checks {
            assert!(matches!(c.status, LemmaStatus::Pass | LemmaStatus::Skipped), "{c:?}");
        }
        let upper = s.check("psi-star-sandwich").unwrap().measured["max_ratio"];
        assert!(upper <= 2.0);
        assert!(s.passed);
    }

    #[test]
    fn singular_gaussian_is_detected() {
        let m = builtin::truncated(1.0, 1.0, 2).with_gaussian(vec![1.0, 0.0, 0.0, 0.0]).unwrap();
        let ch = Characteristics::new(m);
        let c = check_gauss_nondegenerate(&ch).unwrap();
        assert!(c.passed(), "{c:?}");
        assert_eq!(c.measured["compatible"], 0.0);
        let m = builtin::truncated(1.0, 1.0, 2).with_gaussian(vec![1.0, 0.0, 0.0, 1.0]).unwrap();
        let c = check_gauss_nondegenerate(&Characteristics::new(m)).unwrap();
        assert!(c.passed() && c.measured["compatible"] == 1.0, "{c:?}");
    }
}
