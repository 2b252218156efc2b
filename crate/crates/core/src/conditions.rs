//! Scaling estimates and grid checks of the standing conditions.
//!
//! Every verdict here is grid-certified: the inequality is tested on the
//! recorded grid, and "exists c" statements are judged by whether the best
//! constant stays bounded toward the asymptotic edge of the grid.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::characteristics::Characteristics;
use crate::error::{LevyError, Result};
use crate::model::{sphere_directions, sphere_rule};
use crate::quad::{self, Tolerance};
use crate::roots::decade_grid;
use crate::special::sphere_area;

/// Radii per decade on every radius grid.
pub const GRID_PER_DECADE: usize = 32;
/// λ values used by the fixed-constant checks.
pub const CHECK_LAMBDAS: [f64; 4] = [1.0 / 16.0, 1.0 / 8.0, 0.25, 0.5];
/// Twice the quadrature tolerance; violations below this are noise.
pub const NOISE: f64 = 2e-9;
/// Relative tolerance of the inverse-function check.
pub const INVERSE_TOL: f64 = 1e-6;

const LAMBDA_STEPS: usize = 16; // 2 decades at 8 per decade
const LAMBDA_STRIDE: usize = 4; // 32 / 8
const EXP_TOL: Tolerance = Tolerance::new(1e-300, 1e-10);
const DIVERGENCE_CAP: f64 = 1e6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Regime {
    /// h(r) ≤ C λ^α h(λr), λ ≤ 1, r < θ.
    LowerAtZero,
    /// c λ^β h(λr) ≤ h(r), λ ≤ 1, r < θ.
    UpperAtZero,
    /// c λ^α h(λr) ≤ h(r), λ ≥ 1, r > θ.
    LowerAtInfinity,
}

impl Regime {
    fn toward_zero(self) -> bool {
        !matches!(self, Regime::LowerAtInfinity)
    }

    fn is_sup(self) -> bool {
        matches!(self, Regime::LowerAtZero)
    }
}

/// The radial function whose scaling is measured.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Quantity {
    H,
    H0,
    K0,
    Nu0,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingEstimate {
    pub regime: Regime,
    pub quantity: Quantity,
    pub exponent: f64,
    pub constant: f64,
    /// θ: ∞ (or 0 at infinity) when the fitted pair holds on the whole window.
    pub threshold: f64,
    /// Largest relative violation of the fitted inequality on the window.
    pub residual: f64,
    pub window: (f64, f64),
    /// Best constant per radius (max or min over λ), ascending radius.
    #[serde(skip)]
    pub profile: Vec<(f64, f64)>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ConditionId {
    A1,
    A2,
    A3,
    A4,
    B1,
    B2,
    B3,
    B4,
    C2,
    C3,
    C4,
    C5,
    D2,
    D3,
    D4,
    #[serde(rename = "wusc")]
    Wusc,
    #[serde(rename = "prof-i")]
    ProfI,
    #[serde(rename = "prof-ii")]
    ProfII,
    #[serde(rename = "prof-iii")]
    ProfIII,
}

impl ConditionId {
    pub const ALL: [ConditionId; 19] = [
        ConditionId::A1,
        ConditionId::A2,
        ConditionId::A3,
        ConditionId::A4,
        ConditionId::B1,
        ConditionId::B2,
        ConditionId::B3,
        ConditionId::B4,
        ConditionId::C2,
        ConditionId::C3,
        ConditionId::C4,
        ConditionId::C5,
        ConditionId::D2,
        ConditionId::D3,
        ConditionId::D4,
        ConditionId::Wusc,
        ConditionId::ProfI,
        ConditionId::ProfII,
        ConditionId::ProfIII,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ConditionId::A1 => "A1",
            ConditionId::A2 => "A2",
            ConditionId::A3 => "A3",
            ConditionId::A4 => "A4",
            ConditionId::B1 => "B1",
            ConditionId::B2 => "B2",
            ConditionId::B3 => "B3",
            ConditionId::B4 => "B4",
            ConditionId::C2 => "C2",
            ConditionId::C3 => "C3",
            ConditionId::C4 => "C4",
            ConditionId::C5 => "C5",
            ConditionId::D2 => "D2",
            ConditionId::D3 => "D3",
            ConditionId::D4 => "D4",
            ConditionId::Wusc => "wusc",
            ConditionId::ProfI => "prof-i",
            ConditionId::ProfII => "prof-ii",
            ConditionId::ProfIII => "prof-iii",
        }
    }

    fn uses_times(self) -> bool {
        matches!(self, ConditionId::C2 | ConditionId::C5 | ConditionId::D2)
    }
}

impl fmt::Display for ConditionId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ConditionId {
    type Err = LevyError;

    fn from_str(s: &str) -> Result<Self> {
        ConditionId::ALL
            .iter()
            .copied()
            .find(|c| c.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| LevyError::Parse(format!("unknown condition '{s}'")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Holds,
    Fails,
    Inconclusive,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Holds => "holds",
            Verdict::Fails => "fails",
            Verdict::Inconclusive => "inconclusive",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConditionReport {
    pub condition_id: ConditionId,
    pub verdict: Verdict,
    pub witness_constant: f64,
    pub witness_exponent: Option<f64>,
    pub witness_threshold: f64,
    /// Grid point where the witness is extremal (radius, time, or x).
    pub worst_point: Vec<f64>,
    pub grid_spec: String,
    pub diagnosis: Option<String>,
}

impl ConditionReport {
    pub fn holds(&self) -> bool {
        self.verdict == Verdict::Holds
    }

    pub fn summary(&self) -> String {
        let mut s = format!(
            "{} {} constant={:.10e} threshold={:.6e}",
            self.condition_id, self.verdict, self.witness_constant, self.witness_threshold
        );
        if let Some(e) = self.witness_exponent {
            s.push_str(&format!(" exponent={e:.6}"));
        }
        if let Some(d) = &self.diagnosis {
            s.push_str(&format!(" ({d})"));
        }
        s
    }
}

/// Grids for [`check_condition`]; `None` picks the condition's default.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckParams {
    pub window: Option<(f64, f64)>,
    pub times: Option<Vec<f64>>,
    pub moment: u32,
    pub directions: usize,
}

impl Default for CheckParams {
    fn default() -> Self {
        CheckParams {
            window: None,
            times: None,
            moment: 1,
            directions: 16,
        }
    }
}

impl CheckParams {
    pub fn window(lo: f64, hi: f64) -> Self {
        CheckParams {
            window: Some((lo, hi)),
            ..Default::default()
        }
    }

    pub fn times(times: Vec<f64>) -> Self {
        CheckParams {
            times: Some(times),
            ..Default::default()
        }
    }
}

fn eval_quantity(ch: &Characteristics, q: Quantity, r: f64) -> Result<f64> {
    match q {
        Quantity::H => ch.h(r),
        Quantity::H0 => ch.h0(r),
        Quantity::K0 => ch.k0(r),
        Quantity::Nu0 => Ok(ch.model().profile().eval(r)),
    }
}

fn check_window(window: (f64, f64)) -> Result<()> {
    let (lo, hi) = window;
    if !(lo > 0.0) || !hi.is_finite() || hi < lo {
        return Err(LevyError::InvalidParameter(format!("bad window [{lo}, {hi}]")));
    }
    if hi / lo < 10.0 * (1.0 - 1e-9) {
        return Err(LevyError::WindowTooNarrow { lo, hi });
    }
    Ok(())
}

fn slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
    }
    sxy / sxx
}

/// Values of a quantity on r_j = lo·10^{j/32}, extended two decades beyond
/// the window on the λ side.
struct ScalingGrid {
    radii: Vec<f64>,
    values: Vec<f64>,
    /// index of the window's first radius
    offset: usize,
    /// number of window radii
    len: usize,
}

impl ScalingGrid {
    fn build(ch: &Characteristics, q: Quantity, regime: Regime, window: (f64, f64)) -> Result<Self> {
        let (lo, hi) = window;
        let steps = ((hi / lo).log10() * GRID_PER_DECADE as f64 + 1e-9).floor() as usize;
        let ext = LAMBDA_STEPS * LAMBDA_STRIDE;
        let (first, offset) = if regime.toward_zero() {
            (-(ext as i64), ext)
        } else {
            (0, 0)
        };
        let total = steps + 1 + ext;
        let radii: Vec<f64> = (0..total)
            .map(|i| lo * 10f64.powf((first + i as i64) as f64 / GRID_PER_DECADE as f64))
            .collect();
        let values = radii
            .iter()
            .map(|&r| eval_quantity(ch, q, r))
            .collect::<Result<Vec<_>>>()?;
        Ok(ScalingGrid {
            radii,
            values,
            offset,
            len: steps + 1,
        })
    }

    /// Best ratio over λ at window index j for a given exponent.
    fn witness(&self, regime: Regime, exponent: f64, j: usize) -> f64 {
        let i = self.offset + j;
        let gi = self.values[i];
        let mut best = if regime.is_sup() { 0.0 } else { f64::INFINITY };
        for k in 0..=LAMBDA_STEPS {
            let e = k as f64 / 8.0;
            let ratio = if regime.toward_zero() {
                gi / self.values[i - k * LAMBDA_STRIDE] * 10f64.powf(exponent * e)
            } else {
                gi / self.values[i + k * LAMBDA_STRIDE] * 10f64.powf(-exponent * e)
            };
            let ratio = if ratio.is_nan() {
                if regime.is_sup() { f64::INFINITY } else { 0.0 }
            } else {
                ratio
            };
            best = if regime.is_sup() { best.max(ratio) } else { best.min(ratio) };
        }
        best
    }

    fn fit_indices(&self, regime: Regime) -> std::ops::Range<usize> {
        let n = GRID_PER_DECADE + 1;
        if regime.toward_zero() {
            0..n.min(self.len)
        } else {
            self.len.saturating_sub(n)..self.len
        }
    }

    fn fitted_slope(&self, regime: Regime) -> Result<f64> {
        let idx = self.fit_indices(regime);
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for j in idx {
            let v = self.values[self.offset + j];
            if !(v > 0.0) || !v.is_finite() {
                return Err(LevyError::ScalingUnavailable(format!(
                    "quantity vanishes or is infinite at r = {:.3e}",
                    self.radii[self.offset + j]
                )));
            }
            xs.push(-self.radii[self.offset + j].ln());
            ys.push(v.ln());
        }
        Ok(slope(&xs, &ys))
    }
}

fn scaling_from_grid(grid: &ScalingGrid, q: Quantity, regime: Regime, window: (f64, f64), exponent: f64) -> ScalingEstimate {
    let w: Vec<f64> = (0..grid.len).map(|j| grid.witness(regime, exponent, j)).collect();
    let fit = grid.fit_indices(regime);
    let constant = if regime.is_sup() {
        w[fit].iter().fold(0.0f64, |m, &v| m.max(v)) * (1.0 + NOISE)
    } else {
        w[fit].iter().fold(f64::INFINITY, |m, &v| m.min(v)) * (1.0 - NOISE)
    };
    let violation = |v: f64| if regime.is_sup() { v / constant - 1.0 } else { 1.0 - v / constant };
    let residual = w.iter().map(|&v| violation(v)).fold(f64::NEG_INFINITY, f64::max);
    let threshold = if regime.toward_zero() {
        (0..grid.len)
            .find(|&j| violation(w[j]) > 0.0)
            .map_or(f64::INFINITY, |j| grid.radii[grid.offset + j])
    } else {
        (0..grid.len)
            .rev()
            .find(|&j| violation(w[j]) > 0.0)
            .map_or(0.0, |j| grid.radii[grid.offset + j])
    };
    ScalingEstimate {
        regime,
        quantity: q,
        exponent,
        constant,
        threshold,
        residual,
        window,
        profile: (0..grid.len).map(|j| (grid.radii[grid.offset + j], w[j])).collect(),
    }
}

/// Weak scaling of h on a radius window.
///
/// The exponent is the least-squares slope of ln h against −ln r on the
/// decade of the window nearest the regime's limit (the first decade at
/// zero, the last at infinity); the constant is the best one on that decade
/// over λ in a two-decade grid. θ is where that pair first stops holding.
pub fn estimate_scaling(ch: &Characteristics, regime: Regime, window: (f64, f64)) -> Result<ScalingEstimate> {
    estimate_scaling_of(ch, Quantity::H, regime, window)
}

pub fn estimate_scaling_of(ch: &Characteristics, q: Quantity, regime: Regime, window: (f64, f64)) -> Result<ScalingEstimate> {
    check_window(window)?;
    let grid = ScalingGrid::build(ch, q, regime, window)?;
    let exponent = grid.fitted_slope(regime)?;
    Ok(scaling_from_grid(&grid, q, regime, window, exponent))
}

/// Re-test a fitted (exponent, constant) pair on another window; returns the
/// largest relative violation (≤ 0 when the pair holds everywhere on it).
pub fn scaling_violation(ch: &Characteristics, est: &ScalingEstimate, window: (f64, f64), constant: f64) -> Result<f64> {
    check_window(window)?;
    let grid = ScalingGrid::build(ch, est.quantity, est.regime, window)?;
    let mut worst = f64::NEG_INFINITY;
    for j in 0..grid.len {
        let v = grid.witness(est.regime, est.exponent, j);
        let viol = if est.regime.is_sup() { v / constant - 1.0 } else { 1.0 - v / constant };
        worst = worst.max(viol);
    }
    Ok(worst)
}

/// ∫ |z|^m e^{−t Re Ψ(z)} dz.
pub fn exp_moment(ch: &Characteristics, t: f64, m: u32) -> Result<f64> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(LevyError::InvalidParameter(format!("time must be positive, got {t}")));
    }
    let d = ch.dim();
    let power = (d as u32 + m) as f64;
    let peak = match ch.psi_star_inv(power / t) {
        Ok(p) => p.radius,
        Err(LevyError::BracketFailure(_)) => {
            return Err(LevyError::DivergentIntegral(format!(
                "Re Ψ stays below {:.3e}; e^(-tΨ) is not integrable at t = {t}",
                power / t
            )))
        }
        Err(e) => return Err(e),
    };
    let directions: Vec<(Vec<f64>, f64)> = if d == 1 {
        vec![(vec![1.0], 2.0)]
    } else if ch.model().is_radial() {
        let mut e = vec![0.0; d];
        e[0] = 1.0;
        vec![(e, sphere_area(d))]
    } else {
        sphere_rule(d, if d == 2 { 64 } else { 12 })
    };
    let mut total = 0.0;
    for (theta, weight) in &directions {
        total += weight * ray_moment(ch, theta, t, power, peak.ln())?;
    }
    Ok(total)
}

const U_CAP: f64 = 230.0;

// ∫_0^∞ ρ^{power−1} e^{−t Re Ψ(ρθ)} dρ in u = ln ρ
fn ray_moment(ch: &Characteristics, theta: &[f64], t: f64, power: f64, u_peak: f64) -> Result<f64> {
    let mut failure = None;
    let mut g = |u: f64| -> f64 {
        if u > U_CAP || u < -U_CAP {
            return 0.0;
        }
        let rho = u.exp();
        let z: Vec<f64> = theta.iter().map(|c| c * rho).collect();
        match ch.psi(&z) {
            Ok(p) => (power * u - t * p.re).exp(),
            Err(e) => {
                failure.get_or_insert(e);
                0.0
            }
        }
    };
    let left = quad::integrate_from_neg_infinity(&mut g, u_peak, &[], EXP_TOL);
    let right = quad::integrate_to_infinity(&mut g, u_peak, &[], EXP_TOL);
    let at_cap = g(U_CAP - 1.0);
    if let Some(e) = failure {
        return Err(e);
    }
    let value = left.value + right.value;
    if !value.is_finite() || at_cap > 1e-12 * value || !(left.converged && right.converged) {
        return Err(LevyError::DivergentIntegral(format!(
            "∫e^(-tReΨ) does not settle at t = {t} (tail weight {at_cap:.3e})"
        )));
    }
    Ok(value)
}

struct Sample {
    key: f64,
    value: f64,
    at: Vec<f64>,
}

#[derive(Clone, Copy, PartialEq)]
enum Extremum {
    Sup,
    Inf,
}

/// True when the running extremum keeps growing toward the edge: the value
/// passes the cap, or the last two per-decade increments are both
/// non-negligible and not shrinking.
pub fn trend_diverges(toward_edge: &[f64], per_decade: usize) -> bool {
    let per = per_decade.max(1);
    let mut running = Vec::new();
    let mut m = f64::NEG_INFINITY;
    let n = toward_edge.len();
    for (i, &v) in toward_edge.iter().enumerate() {
        m = m.max(v);
        // decades aligned to the edge so the last one is complete
        if (n - 1 - i) % per == 0 {
            running.push(m);
        }
    }
    if m > DIVERGENCE_CAP || m.is_infinite() {
        return true;
    }
    let n = running.len();
    if n < 4 {
        return false;
    }
    let d1 = running[n - 2] - running[n - 3];
    let d2 = running[n - 1] - running[n - 2];
    let floor = 1e-3 * running[n - 1].abs();
    d1 > floor && d2 > floor && d2 >= 0.9 * d1
}

fn per_decade_of(keys: &[f64]) -> usize {
    let (a, b) = (keys[0], keys[keys.len() - 1]);
    let decades = (b / a).log10().abs().max(1e-12);
    ((keys.len() - 1) as f64 / decades).round().max(1.0) as usize
}

fn conclude(
    id: ConditionId,
    kind: Extremum,
    samples: &[Sample],
    threshold: f64,
    exponent: Option<f64>,
    grid_spec: String,
) -> ConditionReport {
    let mut report = ConditionReport {
        condition_id: id,
        verdict: Verdict::Inconclusive,
        witness_constant: f64::NAN,
        witness_exponent: exponent,
        witness_threshold: threshold,
        worst_point: Vec::new(),
        grid_spec,
        diagnosis: None,
    };
    if samples.is_empty() {
        report.diagnosis = Some("empty grid".into());
        return report;
    }
    if let Some(s) = samples.iter().find(|s| s.value.is_nan()) {
        report.worst_point = s.at.clone();
        report.diagnosis = Some("witness not computable on the grid".into());
        return report;
    }
    let worst = match kind {
        Extremum::Sup => samples.iter().max_by(|a, b| a.value.total_cmp(&b.value)).unwrap(),
        Extremum::Inf => samples.iter().min_by(|a, b| a.value.total_cmp(&b.value)).unwrap(),
    };
    report.witness_constant = worst.value;
    report.worst_point = worst.at.clone();
    let keys: Vec<f64> = samples.iter().map(|s| s.key).collect();
    let per = per_decade_of(&keys);
    let seq: Vec<f64> = samples
        .iter()
        .map(|s| match kind {
            Extremum::Sup => s.value,
            Extremum::Inf => 1.0 / s.value,
        })
        .collect();
    if kind == Extremum::Inf && !(worst.value > 0.0) {
        report.verdict = Verdict::Fails;
        report.diagnosis = Some("lower constant vanishes on the grid".into());
    } else if trend_diverges(&seq, per) {
        report.verdict = Verdict::Fails;
        report.diagnosis = Some(match kind {
            Extremum::Sup => "best constant grows without bound toward the grid edge".into(),
            Extremum::Inf => "best lower constant decays to zero toward the grid edge".into(),
        });
    } else {
        report.verdict = Verdict::Holds;
    }
    report
}

fn default_window(id: ConditionId) -> (f64, f64) {
    use ConditionId::*;
    match id {
        B1 | B2 | B3 | B4 => (1e1, 1e4),
        C3 | C4 => (1e1, 1e4),
        D3 | D4 => (1e-4, 1e-1),
        _ => (1e-4, 1e-1),
    }
}

fn default_times(id: ConditionId) -> Vec<f64> {
    match id {
        ConditionId::D2 => decade_grid(1e1, 1e3, 4),
        _ => decade_grid(1e-3, 1e-1, 4),
    }
}

fn window_radii(window: (f64, f64)) -> Vec<f64> {
    decade_grid(window.0, window.1, GRID_PER_DECADE)
}

fn grid_label(window: (f64, f64), extra: &str) -> String {
    format!(
        "r in [{:.3e}, {:.3e}] at {}/decade{}",
        window.0, window.1, GRID_PER_DECADE, extra
    )
}

fn directions_for(ch: &Characteristics, n: usize) -> Vec<Vec<f64>> {
    let d = ch.dim();
    if d == 1 {
        vec![vec![1.0], vec![-1.0]]
    } else if ch.model().is_radial() {
        let mut e = vec![0.0; d];
        e[0] = 1.0;
        vec![e]
    } else {
        sphere_directions(d, n.max(1))
    }
}

/// Grid check of one condition.
pub fn check_condition(ch: &Characteristics, id: ConditionId, params: &CheckParams) -> Result<ConditionReport> {
    use ConditionId::*;
    let window = params.window.unwrap_or_else(|| default_window(id));
    if !id.uses_times() {
        check_window(window)?;
    }
    match id {
        A1 | B1 | Wusc | ProfII | ProfIII => scaling_check(ch, id, window),
        A2 | B2 => inverse_check(ch, id, window),
        A3 | B3 => psi_star_scaling_check(ch, id, window),
        A4 | B4 => {
            let radii = window_radii(window);
            let mut samples = Vec::with_capacity(radii.len());
            for &r in &radii {
                samples.push(Sample {
                    key: r,
                    value: ch.h(r)? / ch.k(r)?,
                    at: vec![r],
                });
            }
            let threshold = if id == A4 { window.1 } else { window.0 };
            if id == A4 {
                samples.reverse();
            }
            Ok(conclude(id, Extremum::Sup, &samples, threshold, None, grid_label(window, "")))
        }
        ProfI => {
            let d = ch.dim() as i32;
            let mut samples = Vec::new();
            for &r in window_radii(window).iter().rev() {
                samples.push(Sample {
                    key: r,
                    value: ch.model().profile().eval(r) * r.powi(d) / ch.k0(r)?,
                    at: vec![r],
                });
            }
            Ok(conclude(id, Extremum::Inf, &samples, window.1, None, grid_label(window, "")))
        }
        C2 | C5 | D2 => {
            let m = if id == C5 { params.moment } else { 0 };
            let mut times = params.times.clone().unwrap_or_else(|| default_times(id));
            if times.is_empty() || times.iter().any(|t| !(*t > 0.0)) {
                return Err(LevyError::EmptyGrid);
            }
            times.sort_by(f64::total_cmp);
            // toward the edge: small t for C, large t for D
            if id != D2 {
                times.reverse();
            }
            let d = ch.dim() as i32;
            let mut samples = Vec::new();
            for &t in &times {
                let integral = match exp_moment(ch, t, m) {
                    Ok(v) => v,
                    Err(LevyError::DivergentIntegral(msg)) => {
                        let threshold = if id == D2 { times[0] } else { times[0] };
                        return Ok(ConditionReport {
                            condition_id: id,
                            verdict: Verdict::Inconclusive,
                            witness_constant: f64::NAN,
                            witness_exponent: None,
                            witness_threshold: threshold,
                            worst_point: vec![t],
                            grid_spec: format!("t grid {times:?}, m = {m}"),
                            diagnosis: Some(format!("divergent integral: {msg}")),
                        });
                    }
                    Err(e) => return Err(e),
                };
                let scale = ch.h_inv(1.0 / t)?;
                samples.push(Sample {
                    key: t,
                    value: scale.powi(d + m as i32) * integral,
                    at: vec![t],
                });
            }
            let threshold = if id == D2 { times[0] } else { times[0] };
            let mut ascending = times.clone();
            ascending.sort_by(f64::total_cmp);
            Ok(conclude(id, Extremum::Sup, &samples, threshold, None, format!("t grid {ascending:?}, m = {m}")))
        }
        C3 | D3 => directional_lower_check(ch, id, window, params.directions),
        C4 | D4 => {
            let dirs = directions_for(ch, params.directions);
            let mut radii = window_radii(window);
            if id == D4 {
                radii.reverse();
            }
            let mut samples = Vec::new();
            for &r in &radii {
                let ps = ch.psi_star(r)?;
                let mut worst: Option<(f64, Vec<f64>)> = None;
                for dir in &dirs {
                    let x: Vec<f64> = dir.iter().map(|c| c * r).collect();
                    let v = ps / ch.directional_k(&x)?;
                    if worst.as_ref().is_none_or(|(w, _)| v > *w) {
                        worst = Some((v, x));
                    }
                }
                let (value, at) = worst.unwrap();
                samples.push(Sample { key: r, value, at });
            }
            let threshold = if id == C4 { 1.0 / window.0 } else { 1.0 / window.1 };
            Ok(conclude(
                id,
                Extremum::Sup,
                &samples,
                threshold,
                None,
                grid_label(window, &format!(", {} directions", dirs.len())),
            ))
        }
    }
}

fn scaling_check(ch: &Characteristics, id: ConditionId, window: (f64, f64)) -> Result<ConditionReport> {
    use ConditionId::*;
    let (q, regime) = match id {
        A1 => (Quantity::H, Regime::LowerAtZero),
        B1 => (Quantity::H, Regime::LowerAtInfinity),
        Wusc => (Quantity::H, Regime::UpperAtZero),
        ProfII => (Quantity::K0, Regime::UpperAtZero),
        _ => (Quantity::Nu0, Regime::UpperAtZero),
    };
    let grid = ScalingGrid::build(ch, q, regime, window)?;
    let d = ch.dim() as f64;
    let fitted = match grid.fitted_slope(regime) {
        Ok(s) => s,
        Err(LevyError::ScalingUnavailable(msg)) => {
            return Ok(ConditionReport {
                condition_id: id,
                verdict: Verdict::Fails,
                witness_constant: 0.0,
                witness_exponent: None,
                witness_threshold: window.0,
                worst_point: vec![window.0],
                grid_spec: grid_label(window, ""),
                diagnosis: Some(msg),
            })
        }
        Err(e) => return Err(e),
    };
    // prof-iii carries ν₀'s exponent as d + β₃ with β₃ ∈ [0, 2)
    let exponent = if id == ProfIII { fitted.max(d) } else { fitted };
    let est = scaling_from_grid(&grid, q, regime, window, exponent);
    let reported = if id == ProfIII { exponent - d } else { exponent };
    let (lo_ok, hi_ok) = match id {
        A1 | B1 => (reported > 0.0, reported <= 2.0 + 1e-6),
        ProfIII => (reported >= 0.0, reported < 2.0),
        _ => (reported > 0.0, reported < 2.0 + 1e-6),
    };
    let kind = if regime.is_sup() { Extremum::Sup } else { Extremum::Inf };
    let mut samples: Vec<Sample> = est
        .profile
        .iter()
        .map(|&(r, v)| Sample { key: r, value: v, at: vec![r] })
        .collect();
    if regime.toward_zero() {
        samples.reverse();
    }
    let threshold = if regime.toward_zero() { window.1 } else { window.0 };
    let label = grid_label(window, &format!(", λ two decades at 8/decade, fitted θ = {:.6e}", est.threshold));
    let mut report = conclude(id, kind, &samples, threshold, Some(reported), label);
    if !(lo_ok && hi_ok) {
        report.verdict = Verdict::Fails;
        report.diagnosis = Some(format!("exponent {reported:.6} outside the admissible range"));
    }
    Ok(report)
}

fn inverse_check(ch: &Characteristics, id: ConditionId, window: (f64, f64)) -> Result<ConditionReport> {
    let at_zero = id == ConditionId::A2;
    let regime = if at_zero { Regime::LowerAtZero } else { Regime::LowerAtInfinity };
    let est = estimate_scaling(ch, regime, window)?;
    let (alpha, c) = (est.exponent, est.constant);
    let lambdas: [f64; 2] = if at_zero { [2.0, 10.0] } else { [0.5, 0.1] };
    let mut worst = if at_zero { 0.0f64 } else { f64::INFINITY };
    let mut worst_at = Vec::new();
    let mut violation = f64::NEG_INFINITY;
    for &r in &window_radii(window) {
        let inside = if at_zero { r < est.threshold } else { r > est.threshold };
        if !inside {
            continue;
        }
        let u = ch.h(r)?;
        for &lam in &lambdas {
            let ratio = r / ch.h_inv(lam * u)?;
            // smallest constant making the inverse form hold at this point
            let needed = ratio.powf(alpha) / lam;
            let v = if at_zero {
                ratio / (c * lam).powf(1.0 / alpha) - 1.0
            } else {
                1.0 - ratio / (c * lam).powf(1.0 / alpha)
            };
            violation = violation.max(v);
            let better = if at_zero { needed > worst } else { needed < worst };
            if better {
                worst = needed;
                worst_at = vec![u, lam];
            }
        }
    }
    let verdict = if violation <= INVERSE_TOL {
        Verdict::Holds
    } else if violation <= 2.0 * INVERSE_TOL {
        Verdict::Inconclusive
    } else {
        Verdict::Fails
    };
    Ok(ConditionReport {
        condition_id: id,
        verdict,
        witness_constant: worst,
        witness_exponent: Some(alpha),
        witness_threshold: ch.h(est.threshold.clamp(window.0, window.1))?,
        worst_point: worst_at,
        grid_spec: grid_label(window, &format!(", u = h(r), λ in {lambdas:?}")),
        diagnosis: Some(format!("largest relative violation {violation:.3e} against the scaling constant {c:.6}")),
    })
}

fn psi_star_scaling_check(ch: &Characteristics, id: ConditionId, window: (f64, f64)) -> Result<ConditionReport> {
    let at_zero = id == ConditionId::A3;
    let regime = if at_zero { Regime::LowerAtZero } else { Regime::LowerAtInfinity };
    let est = estimate_scaling(ch, regime, window)?;
    let alpha = est.exponent;
    let inv = (1.0 / window.1, 1.0 / window.0);
    let mut radii = window_radii(inv);
    radii.retain(|&r| if at_zero { r * est.threshold > 1.0 } else { r * est.threshold < 1.0 });
    if !at_zero {
        radii.reverse();
    }
    let mut samples = Vec::new();
    for &r in &radii {
        let base = ch.psi_star(r)?;
        let mut best = if at_zero { f64::INFINITY } else { 0.0f64 };
        for &l in &CHECK_LAMBDAS {
            let lam = if at_zero { 1.0 / l } else { l };
            let v = ch.psi_star(lam * r)? / (lam.powf(alpha) * base);
            best = if at_zero { best.min(v) } else { best.max(v) };
        }
        samples.push(Sample { key: r, value: best, at: vec![r] });
    }
    let kind = if at_zero { Extremum::Inf } else { Extremum::Sup };
    let threshold = if at_zero { est.threshold } else { est.threshold };
    let mut report = conclude(id, kind, &samples, threshold, Some(alpha), grid_label(inv, ", λ in {2,4,8,16}"));
    if at_zero {
        let d = ch.dim() as f64;
        let predicted = 1.0 / (16.0 * (1.0 + 2.0 * d) * est.constant);
        report.diagnosis = Some(format!("scaling-implied lower constant {predicted:.6e}"));
    }
    Ok(report)
}

fn directional_lower_check(ch: &Characteristics, id: ConditionId, window: (f64, f64), n: usize) -> Result<ConditionReport> {
    let at_infinity = id == ConditionId::C3;
    let dirs = directions_for(ch, n);
    let mut radii = window_radii(window);
    // exponent of Ψ* over the window
    let ln_r: Vec<f64> = radii.iter().map(|r| r.ln()).collect();
    let stars = radii.iter().map(|&r| ch.psi_star(r)).collect::<Result<Vec<_>>>()?;
    let ln_s: Vec<f64> = stars.iter().map(|s| s.ln()).collect();
    let alpha = slope(&ln_r, &ln_s).clamp(1e-6, 2.0);
    let mut samples = Vec::new();
    for (i, &r) in radii.iter().enumerate() {
        let ps = stars[i];
        let mut best = f64::INFINITY;
        let mut at = vec![r];
        for dir in &dirs {
            let x: Vec<f64> = dir.iter().map(|c| c * r).collect();
            let v = ch.psi(&x)?.re / ps;
            if v < best {
                best = v;
                at = x;
            }
        }
        for &l in &CHECK_LAMBDAS {
            // lower scaling at infinity, upper scaling at zero, both as lower constants
            let v = if at_infinity {
                ch.psi_star(r / l)? / (l.powf(-alpha) * ps)
            } else {
                l.powf(alpha) * ps / ch.psi_star(l * r)?
            };
            if v < best {
                best = v;
                at = vec![r];
            }
        }
        samples.push(Sample { key: r, value: best, at });
    }
    if !at_infinity {
        samples.reverse();
    }
    radii.sort_by(f64::total_cmp);
    let threshold = if at_infinity { 1.0 / radii[0] } else { 1.0 / radii[radii.len() - 1] };
    Ok(conclude(
        id,
        Extremum::Inf,
        &samples,
        threshold,
        Some(alpha),
        grid_label(window, &format!(", {} directions, λ in 1/16..1/2", dirs.len())),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::builtin;
    use std::f64::consts::PI;

    fn cauchy() -> Characteristics {
        Characteristics::new(builtin::cauchy(1))
    }

    #[test]
    fn stable_scaling_is_exact() {
        let ch = Characteristics::new(builtin::stable(1.5, 1));
        let e = estimate_scaling(&ch, Regime::LowerAtZero, (1e-4, 1e-1)).unwrap();
        assert!((e.exponent - 1.5).abs() < 1e-6, "{e:?}");
        assert!(e.constant >= 1.0 && e.constant <= 1.01);
        assert!(e.residual <= 0.0);
        assert_eq!(e.threshold, f64::INFINITY);
    }

    #[test]
    fn narrow_window_rejected() {
        let ch = cauchy();
        assert!(matches!(
            estimate_scaling(&ch, Regime::LowerAtZero, (1.0, 5.0)),
            Err(LevyError::WindowTooNarrow { .. })
        ));
    }

    #[test]
    fn mixture_exponents_per_regime() {
        let ch = Characteristics::new(builtin::stable_mixture(1.5, 0.5, 1));
        let a = estimate_scaling(&ch, Regime::LowerAtZero, (1e-4, 1e-2)).unwrap();
        assert!((a.exponent - 1.5).abs() < 0.05, "{a:?}");
        let b = estimate_scaling(&ch, Regime::LowerAtInfinity, (1e2, 1e4)).unwrap();
        assert!((b.exponent - 0.5).abs() < 0.05, "{b:?}");
    }

    #[test]
    fn log_heavy_loses_scaling() {
        let ch = Characteristics::new(builtin::log_heavy(1.0, 1));
        let e = estimate_scaling(&ch, Regime::LowerAtZero, (1e2, 1e4)).unwrap();
        assert!(e.threshold.is_finite() && e.threshold > 1e2, "{e:?}");
        assert!(e.residual > 0.0);
    }

    #[test]
    fn cauchy_a4_constant_two() {
        let r = check_condition(&cauchy(), ConditionId::A4, &CheckParams::default()).unwrap();
        assert!(r.holds());
        assert!((r.witness_constant - 2.0).abs() < 1e-9, "{r:?}");
    }

    #[test]
    fn cauchy_c2_constant() {
        let r = check_condition(&cauchy(), ConditionId::C2, &CheckParams::times(vec![0.1, 1.0])).unwrap();
        assert!(r.holds(), "{r:?}");
        assert!((r.witness_constant - 8.0 / PI).abs() < 1e-7, "{r:?}");
    }

    #[test]
    fn cauchy_c5_first_moment() {
        let r = check_condition(&cauchy(), ConditionId::C5, &CheckParams::times(vec![0.5])).unwrap();
        assert!((r.witness_constant - 32.0 / (PI * PI)).abs() < 1e-7, "{r:?}");
    }

    #[test]
    fn cauchy_c4_ratio() {
        let r = check_condition(&cauchy(), ConditionId::C4, &CheckParams::default()).unwrap();
        assert!(r.holds());
        assert!((r.witness_constant - PI / 2.0).abs() < 1e-8, "{r:?}");
    }

    #[test]
    fn stable_prof_iii_exact() {
        for &alpha in &[0.5, 1.5] {
            let ch = Characteristics::new(builtin::stable(alpha, 1));
            let r = check_condition(&ch, ConditionId::ProfIII, &CheckParams::default()).unwrap();
            assert!(r.holds());
            assert!((r.witness_exponent.unwrap() - alpha).abs() < 1e-9);
            assert!((r.witness_constant - 1.0).abs() < 1e-8, "{r:?}");
        }
    }

    #[test]
    fn truncation_breaks_profile_conditions_together() {
        let ch = Characteristics::new(builtin::truncated(1.0, 1.0, 1));
        let p = CheckParams::window(1e-3, 2.0);
        let i = check_condition(&ch, ConditionId::ProfI, &p).unwrap();
        let iii = check_condition(&ch, ConditionId::ProfIII, &p).unwrap();
        assert_eq!(i.verdict, Verdict::Fails);
        assert_eq!(iii.verdict, Verdict::Fails);
    }

    #[test]
    fn ids_round_trip() {
        for id in ConditionId::ALL {
            assert_eq!(id.name().parse::<ConditionId>().unwrap(), id);
            let json = serde_json::to_string(&id).unwrap();
            assert_eq!(json, format!("\"{}\"", id.name()));
        }
    }

    #[test]
    fn trend_rule() {
        let flat = vec![2.0; 100];
        assert!(!trend_diverges(&flat, 32));
        let growing: Vec<f64> = (0..100).map(|i| 1.0 + i as f64 * 0.1).collect();
        assert!(trend_diverges(&growing, 32));
        let settling: Vec<f64> = (0..100).map(|i| 2.0 - 0.5f64.powi(i)).collect();
        assert!(!trend_diverges(&settling, 32));
    }
}
