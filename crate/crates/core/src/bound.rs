//! The bound function ρ_t, its plateau form φ_t, and drift centering.

use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::characteristics::Characteristics;
use crate::conditions::{estimate_scaling_of, trend_diverges, Quantity, Regime, ScalingEstimate};
use crate::error::{LevyError, Result};
use crate::roots::{log_bisect_root, log_space};
use crate::special::sphere_area;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum CenterMode {
    /// t·b_r at r = h₀⁻¹(1/t).
    #[default]
    HInverse,
    /// t·b.
    Plain,
    /// t·(b + ∫_{|z|<1} z n(z) dz).
    SmallJumps,
}

impl std::str::FromStr for CenterMode {
    type Err = LevyError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "h-inverse" => Ok(CenterMode::HInverse),
            "plain" | "plain-drift" => Ok(CenterMode::Plain),
            "small-jumps" | "drift-plus-small-jumps" => Ok(CenterMode::SmallJumps),
            _ => Err(LevyError::Parse(format!("unknown center mode '{s}'"))),
        }
    }
}

const ENDPOINT_SLACK: f64 = 1e-12;

/// Points scanned by the drift cancellation check.
pub const CANCEL_POINTS: usize = 32;

/// ρ_t and friends at a fixed time.
#[derive(Debug)]
pub struct BoundContext<'a> {
    ch: &'a Characteristics,
    t: f64,
    scale: f64,
    mode: CenterMode,
    scaling: OnceLock<Result<ScalingEstimate>>,
}

impl<'a> BoundContext<'a> {
    pub fn new(ch: &'a Characteristics, t: f64, mode: CenterMode) -> Result<Self> {
        if !(t > 0.0) || !t.is_finite() {
            return Err(LevyError::InvalidParameter(format!("time must be positive, got {t}")));
        }
        let scale = ch.h0_inv(1.0 / t)?;
        let check = t * ch.h0(scale)?;
        if (check - 1.0).abs() > 1e-10 {
            return Err(LevyError::BracketFailure(format!(
                "t·h₀(h₀⁻¹(1/t)) = {check} at t = {t}"
            )));
        }
        Ok(BoundContext {
            ch,
            t,
            scale,
            mode,
            scaling: OnceLock::new(),
        })
    }

    /// Supply the lower scaling of h₀ instead of estimating it.
    pub fn with_scaling(self, est: ScalingEstimate) -> Self {
        let cell = OnceLock::new();
        let _ = cell.set(Ok(est));
        BoundContext { scaling: cell, ..self }
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    /// h₀⁻¹(1/t).
    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn mode(&self) -> CenterMode {
        self.mode
    }

    pub fn characteristics(&self) -> &Characteristics {
        self.ch
    }

    /// [h₀⁻¹(1/t)]^{−d}.
    pub fn on_diagonal(&self) -> f64 {
        self.scale.powi(-(self.ch.dim() as i32))
    }

    fn tail(&self, r: f64) -> Result<f64> {
        Ok(self.t * self.ch.k0(r)? * r.powi(-(self.ch.dim() as i32)))
    }

    pub fn rho_radial(&self, r: f64) -> Result<f64> {
        if r == 0.0 {
            return Ok(self.on_diagonal());
        }
        Ok(self.on_diagonal().min(self.tail(r)?))
    }

    pub fn rho(&self, x: &[f64]) -> Result<f64> {
        self.rho_radial(norm(x))
    }

    /// The radius where the two branches of ρ_t meet.
    pub fn r0(&self) -> Result<f64> {
        let lo = self.ch.h0_inv(3.0 / self.t)?;
        let hi = self.scale;
        let target = self.on_diagonal();
        let f = |r: f64| self.tail(r).map(|v| v / target - 1.0);
        let (flo, fhi) = (f(lo)?, f(hi)?);
        // past the support h₀ = K₀, so the branches meet exactly at H
        if fhi > 0.0 && fhi <= ENDPOINT_SLACK {
            return Ok(hi);
        }
        if !(flo >= 0.0 && fhi <= 0.0) {
            return Err(LevyError::BracketFailure(format!(
                "crossover not in [{lo:.6e}, {hi:.6e}] (branch ratios {flo:.3e}, {fhi:.3e})"
            )));
        }
        let mut err = None;
        let r = log_bisect_root(
            |r| match f(r) {
                Ok(v) => v,
                Err(e) => {
                    err.get_or_insert(e);
                    0.0
                }
            },
            lo,
            hi,
            1e-13,
            400,
        );
        match err {
            Some(e) => Err(e),
            None => Ok(r),
        }
    }

    /// ∫ρ_t = (ω_d/d)(r₀/H)^d + t ω_d ∫_{r₀}^∞ K₀(r) dr/r, where the tail
    /// integral is h₀(r₀)/2.
    pub fn integral(&self) -> Result<f64> {
        let d = self.ch.dim();
        let r0 = self.r0()?;
        let w = sphere_area(d);
        let disc = w / d as f64 * (r0 / self.scale).powi(d as i32);
        Ok(disc + 0.5 * self.t * w * self.ch.h0(r0)?)
    }

    fn scaling(&self) -> Result<&ScalingEstimate> {
        self.scaling
            .get_or_init(|| {
                let window = (self.scale * 1e-3, self.scale * 10.0);
                estimate_scaling_of(self.ch, Quantity::H0, Regime::LowerAtZero, window)
            })
            .as_ref()
            .map_err(|e| LevyError::ScalingUnavailable(e.to_string()))
    }

    /// φ_t: the plateau H^{−d} inside |x| ≤ H, the tail branch outside.
    pub fn phi(&self, x: &[f64]) -> Result<f64> {
        let s = self.scaling()?;
        if !(s.exponent > 0.0) {
            return Err(LevyError::ScalingUnavailable(format!("fitted exponent {:.4} is not positive", s.exponent)));
        }
        if s.threshold <= self.scale {
            return Err(LevyError::ScalingUnavailable(format!(
                "t = {} is beyond the scaling range (θ = {:.6e})",
                self.t, s.threshold
            )));
        }
        let r = norm(x);
        if r <= self.scale {
            Ok(self.on_diagonal())
        } else {
            self.tail(r)
        }
    }

    /// Centering vector for the selected mode.
    pub fn drift_center(&self) -> Result<Vec<f64>> {
        let t = self.t;
        let b = self.ch.model().drift();
        match self.mode {
            CenterMode::HInverse => Ok(self.ch.drift_br(self.scale)?.iter().map(|v| t * v).collect()),
            CenterMode::Plain => {
                if !self.ch.model().is_symmetric() {
                    self.plain_drift_admissible()?;
                }
                Ok(b.iter().map(|v| t * v).collect())
            }
            CenterMode::SmallJumps => {
                let w = estimate_scaling_of(self.ch, Quantity::H0, Regime::UpperAtZero, small_window(self.scale))?;
                if !(w.exponent < 1.0) {
                    return Err(LevyError::ModePreconditionFailed(format!(
                        "upper scaling exponent {:.4} is not below 1",
                        w.exponent
                    )));
                }
                let d = self.ch.dim() as f64;
                let inner = self
                    .ch
                    .model()
                    .profile()
                    .power_moment(d, 0.0, 1.0)
                    .map_err(|e| LevyError::ModePreconditionFailed(format!("∫_(|z|<1) |z| n diverges: {e}")))?;
                let m1 = &self.ch.model().moments().first;
                Ok(b.iter().zip(m1).map(|(bi, mi)| t * (bi + mi * inner)).collect())
            }
        }
    }

    /// The plain drift is admissible under drift cancellation with
    /// r h₀(r) bounded below, or under lower scaling with exponent above 1
    /// and a finite threshold.
    fn plain_drift_admissible(&self) -> Result<()> {
        let s = self.scaling().map_err(|e| LevyError::ModePreconditionFailed(e.to_string()))?;
        let top = s.threshold.min(1e6);
        let radii: Vec<f64> = log_space(top * 1e-6, top, CANCEL_POINTS).into_iter().rev().collect();
        let b = self.ch.model().drift();
        let mut shift = Vec::with_capacity(radii.len());
        let mut inv_stab = Vec::with_capacity(radii.len());
        for &r in &radii {
            let br = self.ch.drift_br(r)?;
            shift.push(norm(&br.iter().zip(b).map(|(x, y)| x - y).collect::<Vec<_>>()));
            inv_stab.push(1.0 / (r * self.ch.h0(r)?));
        }
        let per = CANCEL_POINTS / 6;
        let cancel = !trend_diverges(&shift, per);
        let stable = !trend_diverges(&inv_stab, per);
        if cancel && stable {
            return Ok(());
        }
        if s.exponent > 1.0 && s.threshold.is_finite() {
            return Ok(());
        }
        let mut failed = Vec::new();
        if !cancel {
            failed.push("drift cancellation sup |b_r − b| is unbounded as r → 0");
        }
        if !stable {
            failed.push("inf r·h₀(r) vanishes as r → 0");
        }
        Err(LevyError::ModePreconditionFailed(format!(
            "{}; lower scaling exponent {:.4} with threshold {:.3e} does not compensate",
            failed.join(" and "),
            s.exponent,
            s.threshold
        )))
    }
}

fn small_window(scale: f64) -> (f64, f64) {
    let top = scale.min(1.0);
    (top * 1e-3, top)
}

fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::builtin;

    fn cauchy() -> Characteristics {
        Characteristics::new(builtin::cauchy(1))
    }

    #[test]
    fn cauchy_rho_values() {
        let ch = cauchy();
        let b = BoundContext::new(&ch, 0.25, CenterMode::HInverse).unwrap();
        assert!((b.scale() - 1.0).abs() < 1e-12);
        assert!((b.rho(&[1.0]).unwrap() - 0.5).abs() < 1e-12);
        assert!((b.rho(&[0.0]).unwrap() - 1.0).abs() < 1e-12);
        assert!((b.rho(&[10.0]).unwrap() - 0.005).abs() < 1e-14);
    }

    #[test]
    fn cauchy_crossover_and_integral() {
        let ch = cauchy();
        let b = BoundContext::new(&ch, 0.25, CenterMode::HInverse).unwrap();
        assert!((b.r0().unwrap() - 0.5f64.sqrt()).abs() < 1e-10);
        for &t in &[0.01, 0.25, 3.0] {
            let b = BoundContext::new(&ch, t, CenterMode::HInverse).unwrap();
            assert!((b.integral().unwrap() - 2.0 * 2f64.sqrt()).abs() < 1e-9);
        }
    }

    #[test]
    fn cauchy_phi() {
        let ch = cauchy();
        let b = BoundContext::new(&ch, 0.25, CenterMode::HInverse).unwrap();
        assert!((b.phi(&[0.9]).unwrap() - 1.0).abs() < 1e-12);
        assert!((b.phi(&[1.5]).unwrap() - 0.25 * (2.0 / 1.5) / 1.5).abs() < 1e-12);
    }

    #[test]
    fn symmetric_centering_is_plain() {
        let ch = Characteristics::new(builtin::stable(1.5, 1).with_drift(vec![0.3]).unwrap());
        for mode in [CenterMode::HInverse, CenterMode::Plain] {
            let b = BoundContext::new(&ch, 2.0, mode).unwrap();
            assert!((b.drift_center().unwrap()[0] - 0.6).abs() < 1e-14);
        }
    }

    #[test]
    fn one_sided_centering() {
        // n(x) = x^{-5/2} on x > 0, so ∫ z(1_{z<r} − 1_{z<1}) n = 2 − 2 r^{-1/2}
        let ch = Characteristics::new(builtin::one_sided(1.5, 1));
        let t = 0.3;
        let b = BoundContext::new(&ch, t, CenterMode::HInverse).unwrap();
        let r = b.scale();
        let expect = t * (2.0 - 2.0 / r.sqrt());
        assert!((b.drift_center().unwrap()[0] - expect).abs() < 1e-8 * expect.abs().max(1.0));
    }

    #[test]
    fn small_jump_centering() {
        // n(x) = x^{-3/2} on x > 0, ∫_0^1 z n = 2
        let ch = Characteristics::new(builtin::one_sided(0.5, 1));
        let b = BoundContext::new(&ch, 1.0, CenterMode::SmallJumps).unwrap();
        assert!((b.drift_center().unwrap()[0] - 2.0).abs() < 1e-9);
        let ch = Characteristics::new(builtin::one_sided(1.5, 1));
        let b = BoundContext::new(&ch, 1.0, CenterMode::SmallJumps).unwrap();
        assert!(matches!(b.drift_center(), Err(LevyError::ModePreconditionFailed(_))));
    }

    #[test]
    fn one_sided_plain_drift_rejected_below_one() {
        let ch = Characteristics::new(builtin::one_sided(0.5, 1));
        let b = BoundContext::new(&ch, 1.0, CenterMode::Plain).unwrap();
        assert!(b.drift_center().is_err());
    }
}
