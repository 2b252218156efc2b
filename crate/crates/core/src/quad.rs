//! Adaptive Gauss–Kronrod quadrature, semi-infinite tails in log coordinates,
//! and extrapolated sums of oscillatory cycles.

use std::ops::Add;

const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689,
    0.973_906_528_517_171_720_077_964_012_084,
    0.930_157_491_355_708_226_001_207_180_060,
    0.865_063_366_688_984_510_732_096_688_423,
    0.780_817_726_586_416_897_063_717_578_345,
    0.679_409_568_299_024_406_234_327_365_115,
    0.562_757_134_668_604_683_339_000_099_273,
    0.433_395_394_129_247_190_799_265_943_166,
    0.294_392_862_701_460_198_131_126_603_104,
    0.148_874_338_981_631_210_884_826_001_130,
    0.0,
];

const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062,
    0.032_558_162_307_964_727_478_818_972_459,
    0.054_755_896_574_351_996_031_381_300_245,
    0.075_039_674_810_919_952_767_043_140_916,
    0.093_125_454_583_697_605_535_065_465_083,
    0.109_387_158_802_297_641_899_210_590_326,
    0.123_491_976_262_065_851_077_208_745_474,
    0.134_709_217_311_473_325_928_054_001_772,
    0.142_775_938_577_060_080_797_094_273_139,
    0.147_739_104_901_338_491_374_841_515_972,
    0.149_445_554_002_916_905_664_936_468_390,
];

const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893,
    0.149_451_349_150_580_593_145_776_339_658,
    0.219_086_362_515_982_043_995_534_934_228,
    0.269_266_719_309_996_355_091_226_921_569,
    0.295_524_224_714_752_870_173_892_994_651,
];

/// Nodes of the 21-point Kronrod rule mapped to [a, b], in ascending order.
pub fn gk21_nodes(a: f64, b: f64) -> [f64; 21] {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut out = [0.0; 21];
    for i in 0..10 {
        out[i] = c - h * XGK[i];
        out[20 - i] = c + h * XGK[i];
    }
    out[10] = c;
    out
}

/// Kronrod and Gauss weights aligned with [`gk21_nodes`] (Gauss weight 0 on
/// Kronrod-only nodes), scaled by the half-width.
pub fn gk21_weights(a: f64, b: f64) -> ([f64; 21], [f64; 21]) {
    let h = 0.5 * (b - a);
    let mut wk = [0.0; 21];
    let mut wg = [0.0; 21];
    for i in 0..10 {
        wk[i] = h * WGK[i];
        wk[20 - i] = h * WGK[i];
        if i % 2 == 1 {
            wg[i] = h * WG[i / 2];
            wg[20 - i] = h * WG[i / 2];
        }
    }
    wk[10] = h * WGK[10];
    (wk, wg)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
}

impl Tolerance {
    pub const fn new(abs: f64, rel: f64) -> Self {
        Tolerance { abs, rel }
    }

    pub fn target(&self, value: f64) -> f64 {
        self.abs.max(self.rel * value.abs())
    }
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance::new(1e-10, 1e-8)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
    pub evaluations: usize,
    pub converged: bool,
}

impl Estimate {
    pub const ZERO: Estimate = Estimate {
        value: 0.0,
        error: 0.0,
        evaluations: 0,
        converged: true,
    };

    pub fn scaled(self, factor: f64) -> Estimate {
        Estimate {
            value: self.value * factor,
            error: self.error * factor.abs(),
            ..self
        }
    }
}

impl Add for Estimate {
    type Output = Estimate;
    fn add(self, rhs: Estimate) -> Estimate {
        Estimate {
            value: self.value + rhs.value,
            error: self.error + rhs.error,
            evaluations: self.evaluations + rhs.evaluations,
            converged: self.converged && rhs.converged,
        }
    }
}

#[derive(Clone, Copy, Debug)]
struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

fn rescale_error(err: f64, resabs: f64, resasc: f64) -> f64 {
    let mut e = err.abs();
    if resasc != 0.0 && e != 0.0 {
        let scale = (200.0 * e / resasc).powf(1.5);
        e = if scale < 1.0 { resasc * scale } else { resasc };
    }
    if resabs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        let floor = 50.0 * f64::EPSILON * resabs;
        if floor > e {
            e = floor;
        }
    }
    e
}

fn gk21_segment<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> Segment {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut res_k = fc * WGK[10];
    let mut res_g = 0.0;
    let mut resabs = res_k.abs();
    let mut fv1 = [0.0; 10];
    let mut fv2 = [0.0; 10];
    for j in 0..10 {
        let dx = h * XGK[j];
        let f1 = f(c - dx);
        let f2 = f(c + dx);
        fv1[j] = f1;
        fv2[j] = f2;
        res_k += WGK[j] * (f1 + f2);
        resabs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            res_g += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = res_k * 0.5;
    let mut resasc = WGK[10] * (fc - mean).abs();
    for j in 0..10 {
        resasc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let value = res_k * h;
    let err = rescale_error((res_k - res_g) * h, resabs * h.abs(), resasc * h.abs());
    let (value, err) = if value.is_finite() {
        (value, err)
    } else {
        (value, f64::INFINITY)
    };
    Segment {
        a,
        b,
        value,
        error: err,
    }
}

/// Adaptive bisection with the 21-point Gauss–Kronrod rule.
///
/// `breaks` are interior points where the integrand may be non-smooth; they
/// become initial segment boundaries.
pub fn adaptive<F: FnMut(f64) -> f64>(
    f: &mut F,
    a: f64,
    b: f64,
    breaks: &[f64],
    tol: Tolerance,
    max_segments: usize,
) -> Estimate {
    if a == b {
        return Estimate::ZERO;
    }
    let (lo, hi, sign) = if a < b { (a, b, 1.0) } else { (b, a, -1.0) };
    let mut cuts: Vec<f64> = vec![lo];
    let mut inner: Vec<f64> = breaks
        .iter()
        .copied()
        .filter(|&p| p > lo && p < hi)
        .collect();
    inner.sort_by(|x, y| x.partial_cmp(y).unwrap());
    inner.dedup();
    cuts.extend(inner);
    cuts.push(hi);

    let mut segs: Vec<Segment> = cuts
        .windows(2)
        .map(|w| gk21_segment(f, w[0], w[1]))
        .collect();
    let mut evals = 21 * segs.len();
    loop {
        let total: f64 = segs.iter().map(|s| s.value).sum();
        let err: f64 = segs.iter().map(|s| s.error).sum();
        let target = tol.target(total);
        if err <= target || segs.len() >= max_segments {
            return Estimate {
                value: sign * total,
                error: err,
                evaluations: evals,
                converged: err <= target,
            };
        }
        let (idx, _) = segs
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.error.partial_cmp(&y.1.error).unwrap_or(std::cmp::Ordering::Equal))
            .unwrap();
        let s = segs[idx];
        let mid = 0.5 * (s.a + s.b);
        if !(mid > s.a && mid < s.b) || (s.b - s.a) <= 4.0 * f64::EPSILON * s.a.abs().max(s.b.abs()) {
            // roundoff floor: the segment cannot be split further
            let total: f64 = segs.iter().map(|s| s.value).sum();
            return Estimate {
                value: sign * total,
                error: err,
                evaluations: evals,
                converged: false,
            };
        }
        let left = gk21_segment(f, s.a, mid);
        let right = gk21_segment(f, mid, s.b);
        evals += 42;
        segs[idx] = left;
        segs.push(right);
    }
}

/// Integrate over a finite interval with the default segment budget.
pub fn integrate<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64, breaks: &[f64], tol: Tolerance) -> Estimate {
    adaptive(f, a, b, breaks, tol, 400)
}

const MAX_TAIL_CHUNKS: usize = 72;

fn tail_chunks<F: FnMut(f64) -> f64>(
    f: &mut F,
    start: f64,
    direction: f64,
    breaks: &[f64],
    last_break: Option<f64>,
    tol: Tolerance,
) -> Estimate {
    let mut total = Estimate::ZERO;
    let mut prev_chunk: Option<f64> = None;
    let mut small_run = 0;
    let mut len = 1.0;
    let mut lo = start;
    for _ in 0..MAX_TAIL_CHUNKS {
        let hi = lo + direction * len;
        let chunk_tol = Tolerance::new(tol.abs * 0.05, tol.rel);
        let mut c = integrate(f, lo, hi, breaks, chunk_tol);
        if direction < 0.0 {
            c.value = -c.value;
        }
        total = total + c;
        if !total.value.is_finite() {
            total.converged = false;
            return total;
        }
        let beyond_support = match last_break {
            Some(lb) => (direction > 0.0 && lo >= lb) || (direction < 0.0 && lo <= lb),
            None => true,
        };
        // an integrand that vanishes near the start may still be nonzero farther out
        let started = total.value != 0.0 || (hi - start).abs() > 2000.0;
        if c.value == 0.0 && beyond_support && started {
            return Estimate {
                converged: true,
                ..total
            };
        }
        let target = tol.target(total.value) * 0.1;
        if c.value.abs() <= target {
            small_run += 1;
        } else {
            small_run = 0;
        }
        if small_run >= 2 && beyond_support && started {
            // geometric remainder of a regularly decaying tail
            if let Some(p) = prev_chunk {
                let q = c.value / p;
                if q > 0.0 && q < 0.95 {
                    let rem = c.value * q / (1.0 - q);
                    total.value += rem;
                    total.error += 0.1 * rem.abs();
                }
            }
            total.converged = true;
            return total;
        }
        prev_chunk = Some(c.value);
        lo = hi;
        len *= 2.0;
    }
    Estimate {
        converged: false,
        ..total
    }
}

/// ∫_{start}^{∞} f(u) du for an integrand that decays (at least like a
/// power of u) at infinity. Chunk lengths double; a geometric remainder is
/// added when the chunk sequence is regularly decaying.
pub fn integrate_to_infinity<F: FnMut(f64) -> f64>(f: &mut F, start: f64, breaks: &[f64], tol: Tolerance) -> Estimate {
    let last = breaks.iter().copied().filter(|&b| b > start).fold(None, |m: Option<f64>, b| {
        Some(m.map_or(b, |m| m.max(b)))
    });
    tail_chunks(f, start, 1.0, breaks, last, tol)
}

/// ∫_{-∞}^{end} f(u) du, the mirror image of [`integrate_to_infinity`].
pub fn integrate_from_neg_infinity<F: FnMut(f64) -> f64>(f: &mut F, end: f64, breaks: &[f64], tol: Tolerance) -> Estimate {
    let first = breaks.iter().copied().filter(|&b| b < end).fold(None, |m: Option<f64>, b| {
        Some(m.map_or(b, |m| m.min(b)))
    });
    tail_chunks(f, end, -1.0, breaks, first, tol)
}

/// Wynn's epsilon algorithm on a window of partial sums. Returns the
/// extrapolated limit.
pub fn wynn_epsilon(sums: &[f64]) -> f64 {
    let n = sums.len();
    if n < 3 {
        return *sums.last().unwrap_or(&0.0);
    }
    // prev: column k-1, cur: column k
    let mut prev = vec![0.0; n + 1];
    let mut cur: Vec<f64> = sums.to_vec();
    let mut best = sums[n - 1];
    let mut k = 0;
    while cur.len() >= 2 {
        let mut next = Vec::with_capacity(cur.len() - 1);
        for i in 0..cur.len() - 1 {
            let diff = cur[i + 1] - cur[i];
            if diff == 0.0 || !diff.is_finite() {
                // converged column; its value is the limit
                return if k % 2 == 0 { cur[i + 1] } else { best };
            }
            next.push(prev[i + 1] + 1.0 / diff);
        }
        k += 1;
        prev = cur;
        cur = next;
        if k % 2 == 0 {
            if let Some(&v) = cur.last() {
                if v.is_finite() {
                    best = v;
                }
            }
        }
    }
    best
}

/// Sum `term(0) + term(1) + …` where successive terms are integrals over
/// half-periods of an oscillatory integrand. Stops when the epsilon-extrapolated
/// limit settles, or when the terms vanish (`Some(k)` from `exhausted_after`
/// marks that all terms from index k on are zero).
pub fn sum_cycles<F: FnMut(usize) -> Estimate>(
    mut term: F,
    tol: Tolerance,
    scale: f64,
    max_terms: usize,
    exhausted_after: Option<usize>,
) -> Estimate {
    const WINDOW: usize = 24;
    let mut sums: Vec<f64> = Vec::new();
    let mut acc = Estimate::ZERO;
    let mut last_extrap: Option<f64> = None;
    let mut agree = 0;
    let mut tiny = 0;
    for k in 0..max_terms {
        if let Some(end) = exhausted_after {
            if k >= end {
                return acc;
            }
        }
        let t = term(k);
        acc = acc + t;
        sums.push(acc.value);
        let target = tol.target(scale.max(acc.value.abs()));
        if t.value.abs() <= 1e-3 * target {
            tiny += 1;
            if tiny >= 3 {
                return acc;
            }
        } else {
            tiny = 0;
        }
        if sums.len() >= 6 {
            let w = &sums[sums.len().saturating_sub(WINDOW)..];
            let e = wynn_epsilon(w);
            if let Some(prev) = last_extrap {
                if (e - prev).abs() <= target {
                    agree += 1;
                    if agree >= 2 {
                        return Estimate {
                            value: e,
                            error: acc.error + (e - prev).abs(),
                            evaluations: acc.evaluations,
                            converged: acc.converged,
                        };
                    }
                } else {
                    agree = 0;
                }
            }
            last_extrap = Some(e);
        }
    }
    let value = last_extrap.unwrap_or(acc.value);
    Estimate {
        value,
        error: acc.error + (value - acc.value).abs(),
        evaluations: acc.evaluations,
        converged: false,
    }
}

/// Gauss–Legendre nodes and weights on [-1, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let mut p1 = 1.0;
            let mut p2 = 0.0;
            for j in 0..n {
                let p3 = p2;
                p2 = p1;
                p1 = ((2 * j + 1) as f64 * z * p2 - j as f64 * p3) / (j + 1) as f64;
            }
            dp = n as f64 * (z * p1 - p2) / (z * z - 1.0);
            let z1 = z;
            z = z1 - p1 / dp;
            if (z - z1).abs() < 1e-15 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
        w[n - 1 - i] = w[i];
    }
    (x, w)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_exact() {
        let mut f = |x: f64| x.powi(7) - 3.0 * x * x + 1.0;
        let e = integrate(&mut f, 0.0, 2.0, &[], Tolerance::new(1e-14, 1e-14));
        let exact = 2f64.powi(8) / 8.0 - 8.0 + 2.0;
        assert!((e.value - exact).abs() < 1e-12);
    }

    #[test]
    fn breakpoint_discontinuity() {
        let mut f = |x: f64| if x < 1.0 { 1.0 } else { 0.0 };
        let e = integrate(&mut f, 0.0, 3.0, &[1.0], Tolerance::new(1e-13, 1e-13));
        assert!((e.value - 1.0).abs() < 1e-13);
    }

    #[test]
    fn exponential_tail() {
        let mut f = |u: f64| (-0.1 * u).exp();
        let e = integrate_to_infinity(&mut f, 0.0, &[], Tolerance::new(1e-14, 1e-12));
        assert!((e.value - 10.0).abs() < 1e-9, "{e:?}");
    }

    #[test]
    fn slow_algebraic_tail() {
        // ∫_1^∞ u^{-2} du = 1
        let mut f = |u: f64| 1.0 / (u * u);
        let e = integrate_to_infinity(&mut f, 1.0, &[], Tolerance::new(1e-15, 1e-11));
        assert!((e.value - 1.0).abs() < 1e-9, "{e:?}");
    }

    #[test]
    fn lower_tail() {
        let mut f = |u: f64| (2.0 * u).exp();
        let e = integrate_from_neg_infinity(&mut f, 0.0, &[], Tolerance::new(1e-15, 1e-12));
        assert!((e.value - 0.5).abs() < 1e-11, "{e:?}");
    }

    #[test]
    fn divergent_tail_not_converged() {
        let mut f = |_u: f64| 1.0;
        let e = integrate_to_infinity(&mut f, 0.0, &[], Tolerance::default());
        assert!(!e.converged);
    }

    #[test]
    fn epsilon_accelerates_alternating_series() {
        // 1 - 1/2 + 1/3 - ... = ln 2
        let mut sums = Vec::new();
        let mut s = 0.0;
        for k in 1..=20 {
            s += if k % 2 == 1 { 1.0 } else { -1.0 } / k as f64;
            sums.push(s);
        }
        assert!((wynn_epsilon(&sums) - std::f64::consts::LN_2).abs() < 1e-10);
    }

    #[test]
    fn oscillatory_dirichlet() {
        // ∫_0^∞ sin(x)/x dx = π/2 via half-period cycles
        let pi = std::f64::consts::PI;
        let term = |k: usize| {
            let a = k as f64 * pi;
            let mut f = |x: f64| if x == 0.0 { 1.0 } else { x.sin() / x };
            integrate(&mut f, a, a + pi, &[], Tolerance::new(1e-15, 1e-13))
        };
        let e = sum_cycles(term, Tolerance::new(1e-13, 1e-12), 1.0, 200, None);
        assert!((e.value - pi / 2.0).abs() < 1e-10, "{e:?}");
    }

    #[test]
    fn gauss_legendre_weights() {
        let (x, w) = gauss_legendre(12);
        let s: f64 = w.iter().sum();
        assert!((s - 2.0).abs() < 1e-14);
        let m4: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(4)).sum();
        assert!((m4 - 0.4).abs() < 1e-14);
    }
}
