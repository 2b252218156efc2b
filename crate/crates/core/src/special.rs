//! Sphere constants and the isotropic Fourier kernel.

use std::f64::consts::PI;

/// Surface area of the unit sphere in ℝᵈ, 2π^{d/2}/Γ(d/2).
pub fn sphere_area(d: usize) -> f64 {
    let h = d as f64 / 2.0;
    2.0 * PI.powf(h) / libm::tgamma(h)
}

/// Volume of the unit ball in ℝᵈ.
pub fn ball_volume(d: usize) -> f64 {
    sphere_area(d) / d as f64
}

/// ∫_{S, ⟨u,θ⟩>0} ⟨u,θ⟩ dσ(θ), the first moment of a half sphere.
pub fn half_sphere_moment(d: usize) -> f64 {
    if d == 1 {
        1.0
    } else {
        ball_volume(d - 1)
    }
}

/// Average of cos⟨x,θ⟩ over the unit sphere at |x| = s:
/// Γ(d/2)(2/s)^ν J_ν(s), ν = d/2 − 1.
pub fn sphere_kernel(d: usize, s: f64) -> f64 {
    let s = s.abs();
    if s < 1.0 {
        return 1.0 - one_minus_kernel_series(d, s);
    }
    match d {
        1 => s.cos(),
        2 => libm::j0(s),
        3 => s.sin() / s,
        _ if d % 2 == 0 => {
            let n = (d / 2 - 1) as i32;
            libm::tgamma(d as f64 / 2.0) * (2.0 / s).powi(n) * libm::jn(n, s)
        }
        _ => {
            // J_{n+1/2}(s) = √(2s/π) j_n(s)
            let n = (d - 3) / 2;
            let nu = n as f64 + 0.5;
            libm::tgamma(d as f64 / 2.0) * (2.0 / s).powf(nu) * (2.0 * s / PI).sqrt() * spherical_bessel(n, s)
        }
    }
}

/// 1 − sphere_kernel(d, s), accurate for small s.
pub fn one_minus_kernel(d: usize, s: f64) -> f64 {
    let s = s.abs();
    if d == 1 {
        let h = (0.5 * s).sin();
        return 2.0 * h * h;
    }
    if s < 1.0 {
        one_minus_kernel_series(d, s)
    } else {
        1.0 - sphere_kernel(d, s)
    }
}

// Σ_{k≥1} (−1)^{k+1} (s²/4)^k Γ(d/2) / (k! Γ(k + d/2))
fn one_minus_kernel_series(d: usize, s: f64) -> f64 {
    let q = 0.25 * s * s;
    let h = d as f64 / 2.0;
    let mut term = q / h;
    let mut sum = term;
    for k in 1..30 {
        let kf = k as f64;
        term *= -q / ((kf + 1.0) * (kf + h));
        sum += term;
        if term.abs() <= 1e-17 * sum.abs() {
            break;
        }
    }
    sum
}

fn spherical_bessel(n: usize, s: f64) -> f64 {
    let j0 = s.sin() / s;
    if n == 0 {
        return j0;
    }
    if s > n as f64 {
        let mut jm = j0;
        let mut jc = s.sin() / (s * s) - s.cos() / s;
        for k in 1..n {
            let jn = (2 * k + 1) as f64 / s * jc - jm;
            jm = jc;
            jc = jn;
        }
        return jc;
    }
    // power series: j_n(s) = s^n / (2n+1)!! Σ (−s²/2)^k / (k! (2n+3)(2n+5)…(2n+2k+1))
    let mut pref = 1.0;
    for k in 0..n {
        pref *= s / (2 * k + 3) as f64;
    }
    pref *= 1.0;
    let q = -0.5 * s * s;
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..80 {
        term *= q / (k as f64 * (2 * n + 2 * k + 1) as f64);
        sum += term;
        if term.abs() < 1e-17 * sum.abs() {
            break;
        }
    }
    pref * sum
}

/// sin s − s without cancellation for small s.
pub fn sin_minus_identity(s: f64) -> f64 {
    if s.abs() < 0.1 {
        let q = s * s;
        -s * q / 6.0 * (1.0 - q / 20.0 * (1.0 - q / 42.0 * (1.0 - q / 72.0 * (1.0 - q / 110.0))))
    } else {
        s.sin() - s
    }
}

/// Approximate positive zeros of the sphere kernel (McMahon), k = 1, 2, ….
pub fn kernel_zero(d: usize, k: usize) -> f64 {
    let nu = d as f64 / 2.0 - 1.0;
    let beta = (k as f64 + nu / 2.0 - 0.25) * PI;
    beta - (4.0 * nu * nu - 1.0) / (8.0 * beta)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sphere_areas() {
        assert!((sphere_area(1) - 2.0).abs() < 1e-14);
        assert!((sphere_area(2) - 2.0 * PI).abs() < 1e-13);
        assert!((sphere_area(3) - 4.0 * PI).abs() < 1e-13);
    }

    #[test]
    fn half_moments() {
        assert_eq!(half_sphere_moment(1), 1.0);
        assert!((half_sphere_moment(2) - 2.0).abs() < 1e-14);
        assert!((half_sphere_moment(3) - PI).abs() < 1e-13);
    }

    #[test]
    fn kernel_matches_closed_forms() {
        for &s in &[0.01, 0.5, 0.99, 1.0, 3.0, 17.5] {
            assert!((sphere_kernel(1, s) - s.cos()).abs() < 1e-14);
            assert!((sphere_kernel(3, s) - s.sin() / s).abs() < 1e-14);
            assert!((sphere_kernel(2, s) - libm::j0(s)).abs() < 1e-14);
            // d = 5: 3(sin s − s cos s)/s³
            let k5 = 3.0 * (s.sin() - s * s.cos()) / s.powi(3);
            assert!((sphere_kernel(5, s) - k5).abs() < 1e-9, "s={s}");
            // d = 4: 2 J1(s)/s
            assert!((sphere_kernel(4, s) - 2.0 * libm::j1(s) / s).abs() < 1e-13);
        }
    }

    #[test]
    fn small_argument_complements() {
        let s = 1e-4;
        assert!((one_minus_kernel(1, s) / (s * s / 2.0) - 1.0).abs() < 1e-8);
        assert!((one_minus_kernel(3, s) / (s * s / 6.0) - 1.0).abs() < 1e-8);
        assert!((sin_minus_identity(s) / (-s.powi(3) / 6.0) - 1.0).abs() < 1e-8);
        assert!((sin_minus_identity(0.0999) - (0.0999f64.sin() - 0.0999)).abs() < 1e-15);
    }

    #[test]
    fn zeros_close_to_true_zeros() {
        assert!((kernel_zero(1, 1) - PI / 2.0).abs() < 1e-14);
        assert!((kernel_zero(3, 2) - 2.0 * PI).abs() < 1e-14);
        assert!(libm::j0(kernel_zero(2, 1)).abs() < 1e-2);
        assert!(libm::j0(kernel_zero(2, 10)).abs() < 1e-5);
    }
}
