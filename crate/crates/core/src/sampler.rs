//! Monte Carlo increments of the process and histogram densities built from
//! them.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{LevyError, Result};
use crate::model::LevyModel;
use crate::roots::decade_grid;
use crate::special::sphere_area;

const TABLE_PER_DECADE: usize = 32;
const TABLE_DECADES: f64 = 16.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum SmallJumpMode {
    #[default]
    GaussianSubstitute,
    DropWithCompensation,
}

impl std::str::FromStr for SmallJumpMode {
    type Err = LevyError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gaussian-substitute" | "gaussian" => Ok(SmallJumpMode::GaussianSubstitute),
            "drop-with-compensation" | "drop" => Ok(SmallJumpMode::DropWithCompensation),
            _ => Err(LevyError::InvalidParameter(format!("unknown small jump mode {s:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SamplerSettings {
    pub jump_cutoff: f64,
    pub small_jump_mode: SmallJumpMode,
    pub n_samples: usize,
    pub seed: u64,
    pub histogram_bins: usize,
    /// Cap on the expected total number of simulated jumps.
    pub jump_budget: f64,
}

impl Default for SamplerSettings {
    fn default() -> Self {
        SamplerSettings {
            jump_cutoff: 0.01,
            small_jump_mode: SmallJumpMode::GaussianSubstitute,
            n_samples: 100_000,
            seed: 1,
            histogram_bins: 200,
            jump_budget: 1e9,
        }
    }
}

impl SamplerSettings {
    pub fn validate(&self) -> Result<()> {
        if !(self.jump_cutoff > 0.0 && self.jump_cutoff.is_finite()) {
            return Err(LevyError::InvalidParameter(format!(
                "jump cutoff must be positive, got {}",
                self.jump_cutoff
            )));
        }
        if self.n_samples == 0 {
            return Err(LevyError::InvalidParameter("n_samples must be at least 1".into()));
        }
        if !(self.jump_budget > 0.0) {
            return Err(LevyError::InvalidParameter("jump budget must be positive".into()));
        }
        Ok(())
    }
}

/// Inverse of the radial survival S(r) = ∫_r^∞ ρ^{d−1} ν₀(ρ) dρ for r ≥ ε,
/// log-log interpolated with power-law extrapolation past the last node.
struct RadialLaw {
    ln_r: Vec<f64>,
    ln_s: Vec<f64>,
    /// Finite support: S vanishes at the last node.
    bounded: bool,
}

impl RadialLaw {
    fn new(model: &LevyModel, eps: f64) -> Result<Self> {
        let p = model.profile();
        let d = model.dim() as f64;
        let top = p.support_max().min(eps * 10f64.powf(TABLE_DECADES));
        if top <= eps {
            return Ok(RadialLaw {
                ln_r: vec![eps.ln()],
                ln_s: vec![f64::NEG_INFINITY],
                bounded: true,
            });
        }
        let radii = decade_grid(eps, top, TABLE_PER_DECADE);
        let n = radii.len();
        let mut s = vec![0.0; n];
        s[n - 1] = p.power_moment(d - 1.0, radii[n - 1], f64::INFINITY)?;
        for i in (0..n - 1).rev() {
            s[i] = s[i + 1] + p.power_moment(d - 1.0, radii[i], radii[i + 1])?;
        }
        Ok(RadialLaw {
            ln_r: radii.iter().map(|r| r.ln()).collect(),
            ln_s: s.iter().map(|v| v.ln()).collect(),
            bounded: s[n - 1] == 0.0,
        })
    }

    fn total(&self) -> f64 {
        self.ln_s[0].exp()
    }

    /// Radius with S(r) = u·S(ε), u ∈ (0, 1].
    fn invert(&self, u: f64) -> f64 {
        let target = self.ln_s[0] + u.ln();
        let n = self.ln_s.len();
        if target >= self.ln_s[0] {
            return self.ln_r[0].exp();
        }
        if target < self.ln_s[n - 1] || (self.bounded && target < self.ln_s[n - 2]) {
            let i = n - 2;
            if self.bounded {
                // S is ~linear in r before the support edge
                let (r0, r1) = (self.ln_r[i].exp(), self.ln_r[n - 1].exp());
                let s0 = self.ln_s[i].exp();
                let w = 1.0 - target.exp() / s0;
                return r0 + w * (r1 - r0);
            }
            let slope = (self.ln_s[n - 1] - self.ln_s[i]) / (self.ln_r[n - 1] - self.ln_r[i]);
            return (self.ln_r[n - 1] + (target - self.ln_s[n - 1]) / slope).exp();
        }
        // ln_s is decreasing
        let j = self.ln_s.partition_point(|&v| v > target);
        let i = j - 1;
        let w = (target - self.ln_s[i]) / (self.ln_s[j] - self.ln_s[i]);
        (self.ln_r[i] + w * (self.ln_r[j] - self.ln_r[i])).exp()
    }
}

/// Symmetric square root of a positive semidefinite row-major matrix.
fn sqrt_psd(m: &[f64], d: usize) -> Vec<f64> {
    let e = SymmetricEigen::new(DMatrix::from_row_slice(d, d, m));
    let root = DMatrix::from_diagonal(&e.eigenvalues.map(|l| l.max(0.0).sqrt()));
    let s = &e.eigenvectors * root * e.eigenvectors.transpose();
    let mut out = vec![0.0; d * d];
    for i in 0..d {
        for j in 0..d {
            out[i * d + j] = s[(i, j)];
        }
    }
    out
}

/// Everything needed to draw increments of one model at one time.
pub struct IncrementSampler<'a> {
    model: &'a LevyModel,
    t: f64,
    settings: SamplerSettings,
    radial: Option<RadialLaw>,
    /// Poisson rate of candidate jumps with |z| > ε.
    rate: f64,
    /// a(θ)·|S^{d−1}| / envelope; None when every candidate is kept.
    envelope: Option<f64>,
    mean: Vec<f64>,
    gauss_root: Vec<f64>,
}

impl<'a> IncrementSampler<'a> {
    pub fn new(model: &'a LevyModel, t: f64, settings: &SamplerSettings) -> Result<Self> {
        settings.validate()?;
        if !(t > 0.0 && t.is_finite()) {
            return Err(LevyError::InvalidParameter(format!("t must be positive, got {t}")));
        }
        let d = model.dim();
        let eps = settings.jump_cutoff;
        let p = model.profile();
        let mo = model.moments();
        let area = sphere_area(d);

        let mut mean: Vec<f64> = model.drift().iter().map(|b| t * b).collect();
        let mut cov: Vec<f64> = model.gaussian().iter().map(|a| 2.0 * t * a).collect();
        let (radial, rate, envelope) = if p.is_zero() {
            (None, 0.0, None)
        } else {
            // compensator −t ∫_{ε<|z|<1} z n, signed so that ε > 1 adds the mean of 1 < |z| < ε
            let m1 = if eps < 1.0 {
                -p.power_moment(d as f64, eps, 1.0)?
            } else if eps > 1.0 {
                p.power_moment(d as f64, 1.0, eps)?
            } else {
                0.0
            };
            for (m, f) in mean.iter_mut().zip(&mo.first) {
                *m += t * f * m1;
            }
            if settings.small_jump_mode == SmallJumpMode::GaussianSubstitute {
                let inner = p.inner_second_moment(eps)?;
                for (c, s) in cov.iter_mut().zip(&mo.second) {
                    *c += t * s * inner;
                }
            }
            let law = RadialLaw::new(model, eps)?;
            let isotropic = model.anisotropy().is_isotropic();
            let env = if isotropic { mo.mass } else { model.comp_upper() * area };
            let rate = t * env * law.total();
            let expected = rate * settings.n_samples as f64;
            if !(expected <= settings.jump_budget) {
                return Err(LevyError::JumpBudgetExceeded {
                    expected,
                    budget: settings.jump_budget,
                });
            }
            (Some(law), rate, if isotropic { None } else { Some(area / env) })
        };
        Ok(IncrementSampler {
            model,
            t,
            settings: settings.clone(),
            radial,
            rate,
            envelope,
            mean,
            gauss_root: sqrt_psd(&cov, d),
        })
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    /// Expected number of simulated jumps per increment.
    pub fn jump_rate(&self) -> f64 {
        self.rate
    }

    fn direction<R: Rng>(&self, rng: &mut R) -> Vec<f64> {
        let d = self.model.dim();
        if d == 1 {
            return vec![if rng.random::<bool>() { 1.0 } else { -1.0 }];
        }
        loop {
            let v: Vec<f64> = (0..d).map(|_| rng.sample(StandardNormal)).collect();
            let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            if n > 1e-300 {
                return v.iter().map(|x| x / n).collect();
            }
        }
    }

    /// The increment with stream index `index`.
    pub fn draw(&self, index: u64) -> Vec<f64> {
        let d = self.model.dim();
        let mut rng = ChaCha8Rng::seed_from_u64(self.settings.seed);
        rng.set_stream(index);
        let mut y = self.mean.clone();
        let g: Vec<f64> = (0..d).map(|_| rng.sample(StandardNormal)).collect();
        for i in 0..d {
            for j in 0..d {
                y[i] += self.gauss_root[i * d + j] * g[j];
            }
        }
        if let Some(law) = &self.radial {
            let count = if self.rate > 0.0 {
                Poisson::new(self.rate).map(|p| p.sample(&mut rng) as u64).unwrap_or(0)
            } else {
                0
            };
            for _ in 0..count {
                let u: f64 = 1.0 - rng.random::<f64>();
                let r = law.invert(u);
                let theta = self.direction(&mut rng);
                if let Some(scale) = self.envelope {
                    let keep = self.model.anisotropy().eval(&theta) * scale;
                    if rng.random::<f64>() >= keep {
                        continue;
                    }
                }
                for (yi, th) in y.iter_mut().zip(&theta) {
                    *yi += r * th;
                }
            }
        }
        y
    }

    /// Increments with indices `offset..offset + n`.
    pub fn draw_many(&self, offset: u64, n: usize) -> Vec<Vec<f64>> {
        (0..n as u64).into_par_iter().map(|i| self.draw(offset + i)).collect()
    }
}

/// `settings.n_samples` i.i.d. copies of Y_t.
pub fn sample_increments(model: &LevyModel, t: f64, settings: &SamplerSettings) -> Result<Vec<Vec<f64>>> {
    let s = IncrementSampler::new(model, t, settings)?;
    Ok(s.draw_many(0, settings.n_samples))
}

/// Tensor histogram grid: one increasing edge vector per coordinate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HistogramGrid {
    pub edges: Vec<Vec<f64>>,
}

impl HistogramGrid {
    pub fn uniform(lo: f64, hi: f64, bins: usize) -> Self {
        let edges = (0..=bins).map(|i| lo + (hi - lo) * i as f64 / bins as f64).collect();
        HistogramGrid { edges: vec![edges] }
    }

    pub fn cube(lo: f64, hi: f64, bins: usize, dim: usize) -> Self {
        let one = HistogramGrid::uniform(lo, hi, bins).edges.remove(0);
        HistogramGrid { edges: vec![one; dim] }
    }

    pub fn dim(&self) -> usize {
        self.edges.len()
    }

    pub fn n_bins(&self) -> usize {
        self.edges.iter().map(|e| e.len().saturating_sub(1)).product()
    }

    fn validate(&self) -> Result<()> {
        if self.edges.is_empty() || self.edges.iter().any(|e| e.len() < 2) {
            return Err(LevyError::EmptyGrid);
        }
        for e in &self.edges {
            if e.windows(2).any(|w| !(w[1] > w[0])) {
                return Err(LevyError::InvalidParameter("histogram edges must increase".into()));
            }
        }
        Ok(())
    }

    fn locate(&self, x: &[f64]) -> Option<usize> {
        let mut idx = 0;
        let mut stride = 1;
        for (e, &v) in self.edges.iter().zip(x) {
            let n = e.len() - 1;
            if !(v >= e[0] && v < e[n]) {
                return None;
            }
            let k = (e.partition_point(|&b| b <= v) - 1).min(n - 1);
            idx += k * stride;
            stride *= n;
        }
        Some(idx)
    }

    /// Center of bin `idx` in the row-major order used by `locate`.
    pub fn center(&self, mut idx: usize) -> Vec<f64> {
        self.edges
            .iter()
            .map(|e| {
                let n = e.len() - 1;
                let k = idx % n;
                idx /= n;
                0.5 * (e[k] + e[k + 1])
            })
            .collect()
    }

    pub fn volume(&self, mut idx: usize) -> f64 {
        self.edges
            .iter()
            .map(|e| {
                let n = e.len() - 1;
                let k = idx % n;
                idx /= n;
                e[k + 1] - e[k]
            })
            .product()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalDensity {
    pub grid: HistogramGrid,
    /// Fraction of all samples falling in each bin.
    pub bin_mass: Vec<f64>,
    pub n_used: usize,
    /// Binomial standard error of each bin mass.
    pub standard_error: Vec<f64>,
}

impl EmpiricalDensity {
    /// Mass divided by bin volume.
    pub fn density(&self) -> Vec<f64> {
        (0..self.bin_mass.len()).map(|i| self.bin_mass[i] / self.grid.volume(i)).collect()
    }

    pub fn density_error(&self) -> Vec<f64> {
        (0..self.bin_mass.len())
            .map(|i| self.standard_error[i] / self.grid.volume(i))
            .collect()
    }

    pub fn total_mass(&self) -> f64 {
        self.bin_mass.iter().sum()
    }
}

pub fn empirical_density(samples: &[Vec<f64>], grid: &HistogramGrid) -> Result<EmpiricalDensity> {
    grid.validate()?;
    if samples.is_empty() {
        return Err(LevyError::InvalidParameter("no samples".into()));
    }
    if samples.iter().any(|x| x.len() != grid.dim()) {
        return Err(LevyError::InvalidParameter("sample dimension differs from grid".into()));
    }
    let nb = grid.n_bins();
    let counts = samples
        .par_iter()
        .fold(
            || vec![0u64; nb],
            |mut c, x| {
                if let Some(i) = grid.locate(x) {
                    c[i] += 1;
                }
                c
            },
        )
        .reduce(
            || vec![0u64; nb],
            |mut a, b| {
                for (x, y) in a.iter_mut().zip(b) {
                    *x += y;
                }
                a
            },
        );
    let n = samples.len() as f64;
    let bin_mass: Vec<f64> = counts.iter().map(|&c| c as f64 / n).collect();
    let standard_error = bin_mass.iter().map(|p| (p * (1.0 - p) / n).sqrt()).collect();
    Ok(EmpiricalDensity {
        grid: grid.clone(),
        bin_mass,
        n_used: samples.len(),
        standard_error,
    })
}

/// sup |F_n − F| for a sample against a continuous CDF.
pub fn ks_statistic<F: Fn(f64) -> f64>(sample: &[f64], cdf: F) -> f64 {
    let mut x = sample.to_vec();
    x.sort_by(f64::total_cmp);
    let n = x.len() as f64;
    x.iter()
        .enumerate()
        .map(|(i, &v)| {
            let f = cdf(v);
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max)
}

/// sup |F_a − F_b| for two samples.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> f64 {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j, mut best) = (0, 0, 0.0f64);
    while i < a.len() && j < b.len() {
        let v = a[i].min(b[j]);
        while i < a.len() && a[i] <= v {
            i += 1;
        }
        while j < b.len() && b[j] <= v {
            j += 1;
        }
        best = best.max((i as f64 / na - j as f64 / nb).abs());
    }
    best
}

/// P(K > λ) for the Kolmogorov distribution.
pub fn kolmogorov_survival(lambda: f64) -> f64 {
    if lambda < 0.2 {
        return 1.0;
    }
    let mut s = 0.0;
    for k in 1..=100 {
        let k = k as f64;
        let term = (-2.0 * k * k * lambda * lambda).exp();
        s += if k as u64 % 2 == 1 { term } else { -term };
        if term < 1e-17 {
            break;
        }
    }
    (2.0 * s).clamp(0.0, 1.0)
}

/// Asymptotic p-value of a KS statistic with effective sample size `n`.
pub fn ks_p_value(stat: f64, n: f64) -> f64 {
    let sn = n.sqrt();
    kolmogorov_survival((sn + 0.12 + 0.11 / sn) * stat)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{builtin, Anisotropy, UnimodalProfile};

    #[test]
    fn radial_law_inverts_cauchy_survival() {
        let m = builtin::cauchy(1);
        let law = RadialLaw::new(&m, 0.01).unwrap();
        assert!((law.total() - 100.0).abs() < 1e-8);
        for u in [1.0, 0.5, 0.01, 1e-20] {
            let r = law.invert(u);
            assert!((r - 0.01 / u).abs() < 1e-6 * r, "u={u} r={r}");
        }
    }

    #[test]
    fn radial_law_respects_support() {
        let m = builtin::truncated(1.0, 1.0, 1);
        let law = RadialLaw::new(&m, 0.1).unwrap();
        for u in [1.0, 0.3, 1e-3, 1e-9] {
            let r = law.invert(u);
            assert!(r >= 0.1 && r <= 1.0, "{r}");
            // S(r) = 1/r − 1
            let want = 1.0 / (1.0 + u * 9.0);
            assert!((r - want).abs() < 1e-3 * want, "u={u} r={r} want={want}");
        }
    }

    #[test]
    fn gaussian_ks_passes() {
        let m = LevyModel::brownian(1, vec![0.5]).unwrap();
        let s = SamplerSettings {
            n_samples: 20_000,
            ..Default::default()
        };
        let x: Vec<f64> = sample_increments(&m, 1.0, &s).unwrap().into_iter().map(|v| v[0]).collect();
        let ks = ks_statistic(&x, |v| 0.5 * (1.0 + libm::erf(v / 2f64.sqrt())));
        assert!(ks_p_value(ks, x.len() as f64) > 0.01, "ks = {ks}");
    }

    #[test]
    fn bounded_jumps_variance() {
        // n = 1_{|x|<2}: Var Y_1 = ∫x² n = 16/3
        let p = UnimodalProfile::custom(|r| if r < 2.0 { 1.0 } else { 0.0 }, vec![2.0], "box", 1).unwrap();
        let m = LevyModel::isotropic(p).unwrap();
        let s = SamplerSettings {
            jump_cutoff: 0.05,
            ..Default::default()
        };
        let x: Vec<f64> = sample_increments(&m, 1.0, &s).unwrap().into_iter().map(|v| v[0]).collect();
        let n = x.len() as f64;
        let mean = x.iter().sum::<f64>() / n;
        let var = x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
        // Var of the sample variance ≈ (μ4 − σ⁴)/n with μ4 = κ4 + 3σ⁴, κ4 = ∫x⁴n = 64/5
        let sigma2 = 16.0 / 3.0;
        let se = ((64.0 / 5.0 + 2.0 * sigma2 * sigma2) / n).sqrt();
        assert!((var - sigma2).abs() < 3.0 * se, "var {var} se {se}");
        assert!(mean.abs() < 3.0 * (sigma2 / n).sqrt());
    }

    #[test]
    fn deterministic_under_seed() {
        let m = builtin::cauchy(2);
        let s = SamplerSettings {
            n_samples: 50,
            ..Default::default()
        };
        let a = sample_increments(&m, 1.0, &s).unwrap();
        let b = sample_increments(&m, 1.0, &s).unwrap();
        assert_eq!(a, b);
        let other = sample_increments(&m, 1.0, &SamplerSettings { seed: 2, ..s }).unwrap();
        assert_ne!(a, other);
    }

    #[test]
    fn jump_budget_is_enforced() {
        let m = builtin::stable(1.5, 1);
        let s = SamplerSettings {
            jump_cutoff: 1e-6,
            ..Default::default()
        };
        assert!(matches!(
            IncrementSampler::new(&m, 1.0, &s),
            Err(LevyError::JumpBudgetExceeded { .. })
        ));
    }

    #[test]
    fn one_sided_thinning_keeps_half() {
        let m = builtin::one_sided(1.0, 1);
        let iso = builtin::cauchy(1);
        let s = SamplerSettings::default();
        let a = IncrementSampler::new(&m, 1.0, &s).unwrap();
        let b = IncrementSampler::new(&iso, 1.0, &s).unwrap();
        assert!((a.jump_rate() - b.jump_rate()).abs() < 1e-9 * b.jump_rate());
        assert!(matches!(m.anisotropy(), Anisotropy::HalfSpace { .. }));
    }

    #[test]
    fn histogram_basics() {
        let g = HistogramGrid::uniform(0.0, 1.0, 4);
        let h = empirical_density(&[vec![0.3], vec![0.3], vec![0.31]], &g).unwrap();
        assert_eq!(h.bin_mass, vec![0.0, 1.0, 0.0, 0.0]);
        assert_eq!(h.total_mass(), 1.0);
        let h = empirical_density(&[vec![0.3], vec![5.0]], &g).unwrap();
        assert!(h.total_mass() <= 1.0);
        let empty = HistogramGrid { edges: vec![vec![0.0]] };
        assert_eq!(empirical_density(&[vec![0.0]], &empty), Err(LevyError::EmptyGrid));
    }

    #[test]
    fn two_sample_ks() {
        assert_eq!(ks_two_sample(&[1.0, 2.0], &[1.0, 2.0]), 0.0);
        assert_eq!(ks_two_sample(&[1.0, 2.0], &[3.0, 4.0]), 1.0);
        assert!((kolmogorov_survival(1.36) - 0.049).abs() < 2e-3);
    }
}
