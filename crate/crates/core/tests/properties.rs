use proptest::prelude::*;

use levyhk::bound::{BoundContext, CenterMode};
use levyhk::characteristics::Characteristics;
use levyhk::density::{density_values, InversionSettings};
use levyhk::model::builtin;
use levyhk::sampler::{empirical_density, HistogramGrid};

fn models() -> Vec<Characteristics> {
    builtin::all(1).into_iter().map(Characteristics::new).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn stable_h_scales_exactly(alpha in 0.2f64..1.9, r in 1e-3f64..1e3) {
        let ch = Characteristics::new(builtin::stable(alpha, 1));
        let q = ch.h(2.0 * r).unwrap() / ch.h(r).unwrap();
        prop_assert!((q / 2f64.powf(-alpha) - 1.0).abs() < 1e-8);
    }

    #[test]
    fn h_dominates_k_and_decreases(i in 0usize..7, r in 1e-3f64..1e3) {
        let ch = &models()[i];
        let (h, k) = (ch.h(r).unwrap(), ch.k(r).unwrap());
        prop_assert!(k <= h * (1.0 + 1e-12));
        prop_assert!(ch.h(1.1 * r).unwrap() < h);
    }

    #[test]
    fn h_inverse_round_trips(i in 0usize..7, u in 1e-2f64..1e2) {
        let ch = &models()[i];
        let r = ch.h_inv(u).unwrap();
        prop_assert!((ch.h(r).unwrap() / u - 1.0).abs() < 1e-9);
    }

    #[test]
    fn psi_star_dominates_re_psi(i in 0usize..7, r in 1e-2f64..1e2, s in 0.0f64..1.0) {
        let ch = &models()[i];
        let re = ch.psi(&[s * r]).unwrap().re;
        prop_assert!(ch.psi_star(r).unwrap() >= re * (1.0 - 1e-12));
    }

    #[test]
    fn rho_is_radially_decreasing(i in 0usize..7, t in 1e-2f64..10.0, r in 1e-3f64..1e3) {
        let ch = &models()[i];
        let ctx = BoundContext::new(ch, t, CenterMode::HInverse).unwrap();
        let a = ctx.rho_radial(r).unwrap();
        prop_assert!(ctx.rho_radial(1.5 * r).unwrap() <= a);
        prop_assert!(a <= ctx.on_diagonal() * (1.0 + 1e-12));
    }

    #[test]
    fn histogram_mass_is_a_subprobability(xs in prop::collection::vec(-30.0f64..30.0, 1..200), bins in 2usize..50) {
        let samples: Vec<Vec<f64>> = xs.iter().map(|&x| vec![x]).collect();
        let e = empirical_density(&samples, &HistogramGrid::uniform(-20.0, 20.0, bins)).unwrap();
        prop_assert!(e.bin_mass.iter().all(|&m| m >= 0.0));
        prop_assert!(e.total_mass() <= 1.0 + 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn symmetric_density_is_even_and_positive(t in 0.1f64..4.0, x in 0.0f64..10.0) {
        let ch = Characteristics::new(builtin::stable(1.5, 1));
        let v = density_values(&ch, t, &[vec![x], vec![-x]], &[], &InversionSettings::default()).unwrap();
        prop_assert!(v[0].value > 0.0);
        prop_assert!((v[0].value - v[1].value).abs() <= 1e-9 * v[0].value);
    }
}
