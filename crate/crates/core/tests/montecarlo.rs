mod common;

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use wickgraph::activation::Activation;
use wickgraph::graph::{CellInput, GraphBuilder};
use wickgraph::montecarlo::{
    empirical_ntk, forward_net, gp_covariance_mc, jacobian_moments_mc, jacobian_net, mc_graph_value, rate_scan,
    run_trials, sample_matrix, sample_network, sample_statistic, sample_weights, spectral_moments, trial_rng,
    variance_estimate, Distribution, Estimate, JacobianMomentStat, Law, NetworkSpec, WeightSpec,
};
use wickgraph::kernels::gp_kernel_recursive;
use wickgraph::Error;

fn moments(law: &Law, draws: usize, seed: u64) -> (f64, f64, f64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let xs: Vec<f64> = (0..draws).map(|_| law.draw(&mut rng)).collect();
    let n = draws as f64;
    let m1 = xs.iter().sum::<f64>() / n;
    let m2 = xs.iter().map(|x| x * x).sum::<f64>() / n;
    let m4 = xs.iter().map(|x| x.powi(4)).sum::<f64>() / n;
    (m1, m2, m4)
}

#[test]
fn laws_have_unit_variance() {
    let laws = [
        Law::gaussian(),
        Law::of(Distribution::Rademacher),
        Law::of(Distribution::UniformTernary),
        Law::of(Distribution::SignedWeibull(1.5)),
        Law::sparse(Distribution::Gaussian, 0.3),
    ];
    for law in laws {
        let (m1, m2, _) = moments(&law, 200_000, 7);
        assert!(m1.abs() < 0.02, "{law:?} mean {m1}");
        assert!((m2 - 1.0).abs() < 0.03, "{law:?} variance {m2}");
    }
    let (_, _, m4) = moments(&Law::of(Distribution::Rademacher), 1000, 3);
    assert_eq!(m4, 1.0);
    let (_, _, m4) = moments(&Law::of(Distribution::UniformTernary), 100_000, 3);
    assert!((m4 - 1.5).abs() < 0.03, "{m4}");
}

#[test]
fn complex_law_is_circular() {
    let law = Law::of(Distribution::ComplexGaussian);
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let zs: Vec<_> = (0..100_000).map(|_| law.draw_complex(&mut rng)).collect();
    let n = zs.len() as f64;
    let abs2 = zs.iter().map(|z| z.norm_sqr()).sum::<f64>() / n;
    let sq = zs.iter().map(|z| z * z).sum::<num_complex::Complex64>() / n;
    assert!((abs2 - 1.0).abs() < 0.02);
    assert!(sq.norm() < 0.02);
}

#[test]
fn sparse_mask_fraction() {
    let law = Law::sparse(Distribution::Gaussian, 0.25);
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let m = sample_matrix(&law, 1.0, 200, 200, &mut rng);
    let frac = m.iter().filter(|&&x| x == 0.0).count() as f64 / 40_000.0;
    assert!((frac - 0.75).abs() < 0.02, "{frac}");
}

#[test]
fn law_parsing_and_validation() {
    assert_eq!("rademacher".parse::<Distribution>().unwrap(), Distribution::Rademacher);
    assert_eq!("weibull:2".parse::<Distribution>().unwrap(), Distribution::SignedWeibull(2.0));
    assert_eq!("complex".parse::<Distribution>().unwrap(), Distribution::ComplexGaussian);
    assert!("cauchy".parse::<Distribution>().is_err());
    assert!(Law::sparse(Distribution::Gaussian, 0.0).validate().is_err());
    assert!(Law::sparse(Distribution::Gaussian, 1.5).validate().is_err());
    assert!(Law::of(Distribution::SignedWeibull(-1.0)).validate().is_err());
}

#[test]
fn sampling_is_deterministic() {
    let spec = WeightSpec { law: Law::gaussian(), sigma: 0.5, seed: 42 };
    let a = sample_weights(&spec, 3, 4, 0).unwrap();
    let b = sample_weights(&spec, 3, 4, 0).unwrap();
    let c = sample_weights(&spec, 3, 4, 1).unwrap();
    assert_eq!(a, b);
    assert_ne!(a, c);
    assert!(matches!(sample_weights(&spec, 0, 4, 0), Err(Error::BadParameter(_))));
    let bad = WeightSpec { sigma: -1.0, ..spec };
    assert!(matches!(sample_weights(&bad, 2, 2, 0), Err(Error::BadParameter(_))));
    let cx = WeightSpec { law: Law::of(Distribution::ComplexGaussian), ..spec };
    assert!(matches!(sample_weights(&cx, 2, 2, 0), Err(Error::BadParameter(_))));

    let mut r1 = trial_rng(5, 3);
    let mut r2 = trial_rng(5, 3);
    assert_eq!(sample_matrix(&Law::gaussian(), 1.0, 2, 2, &mut r1), sample_matrix(&Law::gaussian(), 1.0, 2, 2, &mut r2));
    let xs = run_trials(50, 11, |rng| sample_matrix(&Law::gaussian(), 1.0, 1, 1, rng)[(0, 0)]);
    let ys = run_trials(50, 11, |rng| sample_matrix(&Law::gaussian(), 1.0, 1, 1, rng)[(0, 0)]);
    assert_eq!(xs, ys);
}

#[test]
fn estimate_helpers() {
    let e = Estimate::from_samples(&[1.0, 2.0, 3.0, 4.0]);
    assert_eq!(e.mean, 2.5);
    assert!((e.stderr - (5.0f64 / 12.0).sqrt()).abs() < 1e-15);
    let flat = Estimate::from_samples(&[2.0; 5]);
    assert_eq!(flat.z(2.0), 0.0);
    assert_eq!(flat.z(3.0), f64::NEG_INFINITY);
    let v = variance_estimate(&[1.0, -1.0, 1.0, -1.0, 1.0, -1.0]);
    assert!((v.mean - 1.2).abs() < 1e-14);
    let s = sample_statistic(1000, 1, |_| 3.0);
    assert_eq!(s.mean, 3.0);
}

fn tiny_net(acts: Vec<Activation>, widths: Vec<usize>, seed: u64) -> (NetworkSpec, Vec<DMatrix<f64>>) {
    let l = acts.len();
    let spec = NetworkSpec {
        sigmas: vec![0.7; l + 1],
        rates: (0..=l).map(|i| 1.0 / (i + 1) as f64).collect(),
        widths,
        activations: acts,
        law: Law::gaussian(),
    };
    spec.validate().unwrap();
    let w = sample_network(&spec, l + 1, &mut ChaCha8Rng::seed_from_u64(seed));
    (spec, w)
}

#[test]
fn jacobian_matches_finite_differences() {
    let acts = vec![Activation::poly(&[0.0, 1.0, 0.0, -0.3]), Activation::poly(&[0.1, 1.0, 0.4])];
    let (spec, w) = tiny_net(acts.clone(), vec![3, 4, 5, 2], 1);
    let x = [0.3, -0.5, 0.8];
    let j = jacobian_net(&spec, &w, &x).unwrap();
    assert_eq!(j.shape(), (5, 3));
    let f = |x: &[f64]| {
        let fw = forward_net(&spec, &w[..2], x).unwrap();
        fw.pre[1].map(|t| acts[1].eval(t))
    };
    let h = 1e-6;
    for c in 0..3 {
        let mut xp = x.to_vec();
        let mut xm = x.to_vec();
        xp[c] += h;
        xm[c] -= h;
        let d = (f(&xp) - f(&xm)) / (2.0 * h);
        for r in 0..5 {
            assert!((d[r] - j[(r, c)]).abs() < 1e-7);
        }
    }
}

#[test]
fn spectral_moment_examples() {
    let id = DMatrix::<f64>::identity(4, 4);
    assert_eq!(spectral_moments(&id, 5), vec![1.0; 5]);
    let two = DMatrix::from_element(1, 1, 2.0);
    assert_eq!(spectral_moments(&two, 4), vec![4.0, 16.0, 64.0, 256.0]);
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let j = sample_matrix(&Law::gaussian(), 1.0, 4, 6, &mut rng);
    let s = &j * j.transpose();
    let ev = s.clone().symmetric_eigenvalues();
    let m = spectral_moments(&j, 6);
    for k in 1..=6 {
        let oracle = ev.iter().map(|l| l.powi(k as i32)).sum::<f64>() / 4.0;
        assert!((m[k - 1] - oracle).abs() <= 1e-9 * oracle);
    }
}

#[test]
fn ntk_depth_zero_is_inner_product() {
    let (spec, w) = tiny_net(vec![], vec![3, 2], 2);
    let x = [0.3, -0.5, 0.8];
    let y = [1.0, 0.2, -0.4];
    let t = empirical_ntk(&spec, &w, &x, &y).unwrap();
    let ip = 0.3 - 0.1 - 0.32;
    assert!((t - DMatrix::identity(2, 2) * ip).norm() < 1e-14);
}

#[test]
fn ntk_matches_parameter_gradients() {
    let acts = vec![Activation::poly(&[0.0, 1.0, 0.0, -0.3]), Activation::poly(&[0.0, 1.0, 0.5])];
    let (spec, w) = tiny_net(acts, vec![2, 3, 3, 2], 3);
    let x = [0.4, -0.9];
    let y = [-0.2, 0.7];
    let theta = empirical_ntk(&spec, &w, &x, &y).unwrap();
    let grads = |input: &[f64]| -> Vec<Vec<nalgebra::DVector<f64>>> {
        let h = 1e-6;
        w.iter()
            .enumerate()
            .map(|(l, wl)| {
                (0..wl.len())
                    .map(|k| {
                        let mut wp = w.clone();
                        let mut wm = w.clone();
                        wp[l][k] += h;
                        wm[l][k] -= h;
                        let fp = forward_net(&spec, &wp, input).unwrap();
                        let fm = forward_net(&spec, &wm, input).unwrap();
                        (fp.output() - fm.output()) / (2.0 * h)
                    })
                    .collect()
            })
            .collect()
    };
    let gx = grads(&x);
    let gy = grads(&y);
    let mut oracle = DMatrix::<f64>::zeros(2, 2);
    for l in 0..w.len() {
        for k in 0..gx[l].len() {
            oracle += &gx[l][k] * gy[l][k].transpose() * spec.rates[l];
        }
    }
    assert!((theta - &oracle).norm() < 1e-6 * (1.0 + oracle.norm()), "{oracle}");
}

#[test]
fn graph_mc_matches_exact_values() {
    let g = common::trace_wwt(3, 1, 1.0);
    let mc = mc_graph_value(&g, 100_000, &Law::gaussian(), 5).unwrap();
    assert!(mc.value.within(9.0, 5.0), "{:?}", mc.value);
    let rad = mc_graph_value(&g, 50, &Law::of(Distribution::Rademacher), 5).unwrap();
    assert_eq!(rad.value.mean, 9.0);
    assert_eq!(rad.value.stderr, 0.0);

    let mut b = GraphBuilder::new();
    let u = b.vertex(3, CellInput::Ones);
    let v = b.vertex(3, CellInput::Ones);
    b.edge(u, v, CellInput::Random { label: 1, sigma: 1.0 });
    b.edge(u, v, CellInput::Random { label: -1, sigma: 1.0 });
    let gc = b.build().unwrap();
    let mc = mc_graph_value(&gc, 50_000, &Law::of(Distribution::ComplexGaussian), 6).unwrap();
    assert!(mc.value.within(9.0, 5.0), "{:?}", mc.value);
    assert!(mc.imag.unwrap().within(0.0, 5.0));
    assert!(matches!(mc_graph_value(&g, 1, &Law::gaussian(), 0), Err(Error::BadParameter(_))));
}

#[test]
fn jacobian_moments_reuse_prefixes() {
    let acts = vec![Activation::Relu; 2];
    let est = jacobian_moments_mc(2, 3, 20, 200, &acts, &Law::gaussian(), 9).unwrap();
    assert_eq!(est.len(), 2);
    assert_eq!(est[0].len(), 3);
    // first moment of a ReLU layer at x = 1 is 1/2 per layer
    assert!(est[0][0].within(0.5, 6.0), "{:?}", est[0][0]);
    assert!(est[1][0].within(0.25, 6.0), "{:?}", est[1][0]);
}

#[test]
fn rate_scan_needs_three_widths() {
    let stat = JacobianMomentStat::new(1, 2, vec![Activation::linear()], Law::gaussian()).unwrap();
    assert!(matches!(rate_scan(&stat, &[8, 8, 16], 5, 1), Err(Error::DegenerateFit(_))));
    let scans = rate_scan(&stat, &[8, 16, 32], 200, 1).unwrap();
    assert_eq!(scans.len(), 2);
    // the trace of a centred Wishart fluctuates at order 1/N^2
    assert!((scans[0].slope + 2.0).abs() < 0.5, "{}", scans[0].slope);
}

#[test]
fn gp_covariance_recovers_kernel() {
    let acts = vec![Activation::Relu];
    let spec = NetworkSpec::gp_limit(2, 200, 2, acts.clone(), Law::gaussian());
    let xs = vec![vec![0.6, -0.3], vec![0.1, 0.9]];
    let cov = gp_covariance_mc(&spec, &xs, 2000, 13).unwrap();
    for a in 0..2 {
        for b in 0..2 {
            let k = gp_kernel_recursive(1, &xs[a], &xs[b], &acts).unwrap();
            assert!((cov.cov[a][b].mean - k).abs() < 5.0 * cov.cov[a][b].stderr + 0.01, "{a}{b}");
        }
        assert!(cov.cross[a].within(0.0, 5.0));
    }
}

#[test]
fn non_gaussian_sampling_matches_exact_moments() {
    use wickgraph::wick::{isserlis_oracle_with, EntryLaw, DEFAULT_CAP};
    let g = common::trace_wwt(3, 2, 1.0);
    let cases = [
        (Law::sparse(Distribution::Gaussian, 0.2), EntryLaw::SparseGaussian(0.2)),
        (Law::of(Distribution::Rademacher), EntryLaw::Rademacher),
        (Law::of(Distribution::UniformTernary), EntryLaw::UniformTernary),
    ];
    for (i, (law, entry)) in cases.iter().enumerate() {
        let exact = isserlis_oracle_with(&g, *entry, DEFAULT_CAP).unwrap();
        let mc = mc_graph_value(&g, 100_000, law, 20 + i as u64).unwrap();
        assert!(mc.value.within(exact, 5.0), "{entry:?}: {:?} vs {exact}", mc.value);
    }
}
