use levyhk::model::builtin;
use levyhk::sampler::{ks_p_value, ks_two_sample, IncrementSampler, SamplerSettings, SmallJumpMode};

fn settings(n: usize, seed: u64) -> SamplerSettings {
    SamplerSettings {
        n_samples: n,
        seed,
        ..SamplerSettings::default()
    }
}

fn first(v: &[Vec<f64>]) -> Vec<f64> {
    v.iter().map(|x| x[0]).collect()
}

fn mean_var(x: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let m = x.iter().sum::<f64>() / n;
    (m, x.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (n - 1.0))
}

#[test]
fn increments_compose() {
    let m = builtin::stable(1.5, 1);
    let n = 20_000;
    let half = IncrementSampler::new(&m, 0.5, &settings(n, 11)).unwrap();
    let a = first(&half.draw_many(0, n));
    let b = first(&half.draw_many(n as u64, n));
    let sum: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x + y).collect();
    let whole = IncrementSampler::new(&m, 1.0, &settings(n, 12)).unwrap();
    let c = first(&whole.draw_many(0, n));
    let stat = ks_two_sample(&sum, &c);
    let p = ks_p_value(stat, (n * n) as f64 / (2 * n) as f64);
    assert!(p > 1e-3, "KS {stat} p {p}");
}

#[test]
fn drift_sets_the_center() {
    let b = 0.7;
    let t = 2.0;
    let m = builtin::tempered(1.0, 1.0, 1).with_drift(vec![b]).unwrap();
    let n = 100_000;
    let s = IncrementSampler::new(&m, t, &settings(n, 3)).unwrap();
    let (mean, var) = mean_var(&first(&s.draw_many(0, n)));
    // symmetric jumps: E X_t = t b, Var X_t = t ∫x² n = 2t
    assert!((mean - t * b).abs() <= 4.0 * (var / n as f64).sqrt(), "{mean}");
    assert!((var - 2.0 * t).abs() < 0.1, "{var}");
}

#[test]
fn dropping_small_jumps_lowers_variance() {
    let m = builtin::tempered(1.0, 1.0, 1);
    let n = 100_000;
    let mut last = f64::INFINITY;
    for eps in [0.01, 0.1, 0.5] {
        let s = IncrementSampler::new(
            &m,
            1.0,
            &SamplerSettings {
                jump_cutoff: eps,
                small_jump_mode: SmallJumpMode::DropWithCompensation,
                ..settings(n, 5)
            },
        )
        .unwrap();
        let (_, var) = mean_var(&first(&s.draw_many(0, n)));
        // Var = 2∫_ε^∞ e^{−r} dr = 2e^{−ε}
        let expected = 2.0 * (-eps).exp();
        assert!((var - expected).abs() < 0.05, "eps {eps}: {var} vs {expected}");
        assert!(var < last);
        last = var;
    }
}

#[test]
fn gaussian_substitute_keeps_variance() {
    let m = builtin::tempered(1.0, 1.0, 1);
    let n = 100_000;
    for eps in [0.01, 0.1, 0.5] {
        let s = IncrementSampler::new(
            &m,
            1.0,
            &SamplerSettings {
                jump_cutoff: eps,
                ..settings(n, 9)
            },
        )
        .unwrap();
        let (_, var) = mean_var(&first(&s.draw_many(0, n)));
        assert!((var - 2.0).abs() < 0.05, "eps {eps}: {var}");
    }
}

#[test]
fn draws_are_indexed_not_sequential() {
    let m = builtin::cauchy(2);
    let s = IncrementSampler::new(&m, 1.0, &settings(100, 42)).unwrap();
    let all = s.draw_many(0, 100);
    let tail = s.draw_many(60, 40);
    assert_eq!(&all[60..], &tail[..]);
    assert_eq!(s.draw(17), all[17]);
}
