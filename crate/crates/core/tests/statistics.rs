use levy_sympl::diagnostics::{convergence_study, path_seed, ConvergenceSetup};
use levy_sympl::{LevyConfig, LevyPath};

#[test]
fn jump_counts_and_sizes_match_the_law() {
    let paths = 10_000;
    let (lambda, horizon, sigma) = (5.0, 20.0, 0.2);
    let mut counts = 0usize;
    let (mut sum, mut sum_sq, mut n) = (0.0, 0.0, 0usize);
    for i in 0..paths {
        let path = LevyPath::sample(&LevyConfig {
            intensity: lambda,
            jump_size_sigma: sigma,
            horizon,
            seed: path_seed(7, i),
            ..Default::default()
        })
        .unwrap();
        let ch = path.channel(0).unwrap();
        counts += ch.len();
        for &r in &ch.sizes {
            sum += r;
            sum_sq += r * r;
            n += 1;
        }
    }
    let mean_count = counts as f64 / paths as f64;
    let expected = lambda * horizon;
    let std_err = (expected / paths as f64).sqrt();
    assert!(
        (mean_count - expected).abs() <= 3.0 * std_err,
        "mean count {mean_count}, expected {expected} +- {}",
        3.0 * std_err
    );
    let mean = sum / n as f64;
    let var = sum_sq / n as f64 - mean * mean;
    assert!(
        (var / (sigma * sigma) - 1.0).abs() <= 0.05,
        "variance {var}"
    );
}

#[test]
fn slope_is_stable_when_doubling_paths() {
    let base = ConvergenceSetup {
        paths: 100,
        ..Default::default()
    };
    let a = convergence_study(&base).unwrap();
    let b = convergence_study(&ConvergenceSetup { paths: 200, ..base }).unwrap();
    assert!(
        (a.fitted_slope - b.fitted_slope).abs() <= 0.1,
        "{} vs {}",
        a.fitted_slope,
        b.fitted_slope
    );
}

#[test]
fn single_path_study_runs() {
    let report = convergence_study(&ConvergenceSetup {
        paths: 1,
        ..Default::default()
    })
    .unwrap();
    assert_eq!(report.num_paths, 1);
    assert!(report.fitted_slope.is_finite());
}
