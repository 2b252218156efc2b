//! Bisection on monotone predicates and a golden-section maximiser.

/// Largest x in [lo, hi] (to relative precision `rel`) with `pred(x)` true,
/// assuming pred is true on an initial segment. Bisection in log x, both
/// endpoints positive.
pub fn log_bisect<P: FnMut(f64) -> bool>(mut pred: P, mut lo: f64, mut hi: f64, rel: f64, max_iter: usize) -> f64 {
    for _ in 0..max_iter {
        if hi / lo - 1.0 <= rel {
            break;
        }
        let mid = (lo * hi).sqrt();
        if pred(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

/// Root of a monotone function `f` on [lo, hi] with f(lo), f(hi) of opposite
/// sign. Bisection in log x.
pub fn log_bisect_root<F: FnMut(f64) -> f64>(mut f: F, lo: f64, hi: f64, rel: f64, max_iter: usize) -> f64 {
    let flo = f(lo);
    let increasing = f(hi) > flo;
    let x = log_bisect(
        |x| {
            let v = f(x);
            if increasing {
                v <= 0.0
            } else {
                v >= 0.0
            }
        },
        lo,
        hi,
        rel,
        max_iter,
    );
    x
}

/// Golden-section search for a maximum of a unimodal function on [a, b].
pub fn golden_max<F: FnMut(f64) -> f64>(mut f: F, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while (b - a).abs() > tol {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    if fc >= fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

/// n log-spaced points from lo to hi inclusive.
pub fn log_space(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..n).map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp()).collect()
}

/// n evenly spaced points from lo to hi inclusive.
pub fn lin_space(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}

/// Points per decade grid covering [lo, hi].
pub fn decade_grid(lo: f64, hi: f64, per_decade: usize) -> Vec<f64> {
    let decades = (hi / lo).log10();
    let n = (decades * per_decade as f64).round().max(1.0) as usize + 1;
    log_space(lo, hi, n)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bisect_sqrt_two() {
        let r = log_bisect_root(|x| x * x - 2.0, 0.1, 10.0, 1e-14, 200);
        assert!((r - 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn bisect_decreasing() {
        let r = log_bisect_root(|x| 4.0 / x - 1.0, 1e-3, 1e3, 1e-14, 200);
        assert!((r - 4.0).abs() < 1e-12);
    }

    #[test]
    fn golden_finds_peak() {
        let (x, v) = golden_max(|x| -(x - 0.3) * (x - 0.3) + 2.0, -1.0, 1.0, 1e-10);
        assert!((x - 0.3).abs() < 1e-6);
        assert!((v - 2.0).abs() < 1e-12);
    }

    #[test]
    fn grids() {
        let g = decade_grid(1e-2, 1e2, 8);
        assert_eq!(g.len(), 33);
        assert!((g[32] - 1e2).abs() < 1e-10);
        assert_eq!(lin_space(0.0, 1.0, 3), vec![0.0, 0.5, 1.0]);
    }
}
