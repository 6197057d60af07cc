use num_bigint::BigInt;
use num_rational::BigRational;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use wickgraph::activation::Activation;
use wickgraph::kernels::{
    bivariate_gaussian_moment, catalan, fc_moments, fc_moments_float, fuss_catalan, gp_kernel_recursive,
    gp_kernel_via_trees, is_non_crossing, kreweras_dual, mixed_moments, mu_table, nc_enumerate, ntk_limit,
    pair_expectation, Cov2, MomentTable, NcPartition, TREE_PAIR_CAP,
};
use wickgraph::scalar::close;
use wickgraph::Error;

fn rat(p: i64, q: i64) -> BigRational {
    BigRational::new(BigInt::from(p), BigInt::from(q))
}

/// `E[X^m Y^n]` by summing covariance products over perfect matchings.
fn pairing_moment(m: usize, n: usize, cov: Cov2) -> f64 {
    let items: Vec<bool> = std::iter::repeat_n(true, m).chain(std::iter::repeat_n(false, n)).collect();
    fn rec(items: &[bool], cov: Cov2) -> f64 {
        if items.is_empty() {
            return 1.0;
        }
        let a = items[0];
        let mut total = 0.0;
        for k in 1..items.len() {
            let b = items[k];
            let c = match (a, b) {
                (true, true) => cov.xx,
                (false, false) => cov.yy,
                _ => cov.xy,
            };
            let rest: Vec<bool> = items[1..].iter().enumerate().filter(|(j, _)| j + 1 != k).map(|(_, &v)| v).collect();
            total += c * rec(&rest, cov);
        }
        total
    }
    rec(&items, cov)
}

#[test]
fn mixed_moments_match_pairing_enumeration() {
    let cov = Cov2::new(1.3, -0.4, 0.8).unwrap();
    let table = mixed_moments(cov, 8, 8);
    for m in 0..=8 {
        for n in 0..=8 - m {
            assert!(close(table[m][n], pairing_moment(m, n, cov), 1e-12), "m={m} n={n}");
        }
    }
}

#[test]
fn bivariate_examples() {
    let sq = Activation::poly(&[0.0, 0.0, 1.0]);
    let id = Cov2::new(1.0, 0.0, 1.0).unwrap();
    assert_eq!(bivariate_gaussian_moment(&sq, &sq, id).unwrap(), 1.0);
    for rho in [-0.9, -0.3, 0.0, 0.5, 1.0] {
        let c = Cov2::new(1.0, rho, 1.0).unwrap();
        assert!(close(bivariate_gaussian_moment(&sq, &sq, c).unwrap(), 1.0 + 2.0 * rho * rho, 1e-14));
    }
    let q4 = Activation::poly(&[0.0, 0.0, 0.0, 0.0, 1.0]);
    let ones = Cov2::new(1.0, 1.0, 1.0).unwrap();
    assert_eq!(bivariate_gaussian_moment(&q4, &q4, ones).unwrap(), 105.0);
    assert!(matches!(bivariate_gaussian_moment(&Activation::Relu, &sq, id), Err(Error::NonPolynomial)));
}

#[test]
fn cov_validation() {
    assert!(matches!(Cov2::new(1.0, 2.0, 1.0), Err(Error::PsdViolation(_))));
    assert!(matches!(Cov2::new(-1.0, 0.0, 1.0), Err(Error::PsdViolation(_))));
    assert!(Cov2::new(1.0, 1.0, 1.0).is_ok());
}

#[test]
fn relu_pair_expectations() {
    // E relu(X)^2 = K/2 and E step(X)^2 = 1/2
    let c = Cov2::new(2.0, 2.0, 2.0).unwrap();
    assert!(close(pair_expectation(&Activation::Relu, c, false).unwrap(), 1.0, 1e-14));
    assert!(close(pair_expectation(&Activation::Relu, c, true).unwrap(), 0.5, 1e-14));
    // orthogonal inputs: 1/(2 pi) and 1/4
    let o = Cov2::new(1.0, 0.0, 1.0).unwrap();
    assert!(close(pair_expectation(&Activation::Relu, o, false).unwrap(), 1.0 / (2.0 * std::f64::consts::PI), 1e-14));
    assert!(close(pair_expectation(&Activation::Relu, o, true).unwrap(), 0.25, 1e-14));
}

#[test]
fn gp_kernel_examples() {
    let x = [0.6, -0.3, 1.2];
    let y = [0.1, 0.9, -0.4];
    let ip: f64 = x.iter().zip(&y).map(|(a, b)| a * b).sum();
    let lin = vec![Activation::linear(); 3];
    for l in 0..=3 {
        assert!(close(gp_kernel_recursive(l, &x, &y, &lin).unwrap(), ip, 1e-14));
    }
    let sq = vec![Activation::poly(&[0.0, 0.0, 1.0])];
    let u = [1.0];
    assert!(close(gp_kernel_recursive(1, &u, &u, &sq).unwrap(), 3.0, 1e-14));
    let xx: f64 = x.iter().map(|a| a * a).sum();
    let yy: f64 = y.iter().map(|a| a * a).sum();
    assert!(close(gp_kernel_recursive(1, &x, &y, &sq).unwrap(), xx * yy + 2.0 * ip * ip, 1e-13));
}

#[test]
fn tree_route_examples() {
    let x = [0.6, -0.3];
    let y = [0.1, 0.9];
    let ip: f64 = x.iter().zip(&y).map(|(a, b)| a * b).sum();
    assert!(close(gp_kernel_via_trees(0, &x, &y, &[], TREE_PAIR_CAP).unwrap(), ip, 1e-14));
    let acts = vec![Activation::poly(&[0.0, 1.0, 1.0])];
    let a = gp_kernel_via_trees(1, &x, &y, &acts, TREE_PAIR_CAP).unwrap();
    let b = gp_kernel_recursive(1, &x, &y, &acts).unwrap();
    assert!((a - b).abs() < 1e-10);
    assert!(matches!(gp_kernel_via_trees(1, &x, &y, &[Activation::Relu], TREE_PAIR_CAP), Err(Error::NonPolynomial)));
    let deep = vec![Activation::poly(&[1.0, 1.0, 1.0, 1.0]); 3];
    assert!(matches!(gp_kernel_via_trees(3, &x, &y, &deep, 10), Err(Error::CapExceeded(_))));
}

fn rand_poly(rng: &mut ChaCha8Rng) -> Activation {
    let d = rng.random_range(1..=3);
    let c: Vec<f64> = (0..=d).map(|_| rng.random_range(-1.0..1.0)).collect();
    Activation::poly(&c)
}

#[test]
fn route_equivalence() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for draw in 0..10 {
        let l = 1 + draw % 2;
        let dim = rng.random_range(1..=3);
        let x: Vec<f64> = (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect();
        let y: Vec<f64> = (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect();
        let acts: Vec<Activation> = (0..l).map(|_| rand_poly(&mut rng)).collect();
        let a = gp_kernel_via_trees(l, &x, &y, &acts, TREE_PAIR_CAP).unwrap();
        let b = gp_kernel_recursive(l, &x, &y, &acts).unwrap();
        assert!((a - b).abs() <= 1e-10 * (1.0 + b.abs()), "draw {draw}: {a} vs {b}");
    }
}

#[test]
fn ntk_examples() {
    let x = [0.6, -0.3, 1.2];
    let y = [0.1, 0.9, -0.4];
    let ip: f64 = x.iter().zip(&y).map(|(a, b)| a * b).sum();
    let lin = vec![Activation::linear(); 4];
    for l in 0..=4 {
        assert!(close(ntk_limit(l, &x, &y, &lin).unwrap(), (l as f64 + 1.0) * ip, 1e-14));
    }
    // phi = t^2 at L = 1: K_1 + E[4XY] * Theta_0 = K_1 + 4 K_0(x,y)^2
    let sq = vec![Activation::poly(&[0.0, 0.0, 1.0])];
    let k1 = gp_kernel_recursive(1, &x, &y, &sq).unwrap();
    assert!(close(ntk_limit(1, &x, &y, &sq).unwrap(), k1 + 4.0 * ip * ip, 1e-13));
}

#[test]
fn kernel_gram_is_psd() {
    let mut rng = ChaCha8Rng::seed_from_u64(22);
    let acts = vec![Activation::poly(&[0.2, 1.0, 0.5]), Activation::Relu];
    let pts: Vec<Vec<f64>> = (0..5).map(|_| (0..3).map(|_| rng.random_range(-1.0..1.0)).collect()).collect();
    for l in 1..=2 {
        let g = nalgebra::DMatrix::from_fn(5, 5, |i, j| gp_kernel_recursive(l, &pts[i], &pts[j], &acts).unwrap());
        for i in 0..5 {
            for j in 0..5 {
                assert!(close(g[(i, j)], g[(j, i)], 1e-14));
            }
        }
        let ev = g.symmetric_eigenvalues();
        assert!(ev.min() >= -1e-8, "{ev}");
    }
}

/// Every set partition of `1..=k` via restricted growth strings.
fn all_partitions(k: usize) -> Vec<NcPartition> {
    let mut out = Vec::new();
    let mut a = vec![0usize; k];
    loop {
        let nb = a.iter().max().map_or(0, |m| m + 1);
        let mut blocks = vec![Vec::new(); nb];
        for (i, &b) in a.iter().enumerate() {
            blocks[b].push(i + 1);
        }
        out.push(NcPartition::new(blocks));
        let mut i = k;
        loop {
            if i == 1 {
                return out;
            }
            i -= 1;
            let max_prefix = a[..i].iter().max().copied().unwrap_or(0);
            if a[i] <= max_prefix {
                a[i] += 1;
                for x in a.iter_mut().skip(i + 1) {
                    *x = 0;
                }
                break;
            }
        }
    }
}

fn crosses(p: &NcPartition) -> bool {
    for (bi, b1) in p.blocks.iter().enumerate() {
        for b2 in p.blocks.iter().skip(bi + 1) {
            for &a in b1 {
                for &b in b1 {
                    for &c in b2 {
                        for &d in b2 {
                            if (a < c && c < b && b < d) || (c < a && a < d && d < b) {
                                return true;
                            }
                        }
                    }
                }
            }
        }
    }
    false
}

#[test]
fn nc_counts_match_brute_force() {
    assert_eq!(nc_enumerate(1).unwrap().len(), 1);
    assert_eq!(nc_enumerate(3).unwrap().len(), 5);
    for k in 1..=8 {
        let nc = nc_enumerate(k).unwrap();
        assert_eq!(nc.len() as u64, catalan(k));
        let mut brute: Vec<NcPartition> = all_partitions(k).into_iter().filter(|p| !crosses(p)).collect();
        brute.sort();
        let mut got = nc.clone();
        got.sort();
        assert_eq!(got, brute, "k={k}");
        for p in &nc {
            assert!(is_non_crossing(p, k));
        }
    }
    let four = nc_enumerate(4).unwrap();
    assert!(!four.contains(&NcPartition::new(vec![vec![1, 3], vec![2, 4]])));
    assert!(matches!(nc_enumerate(13), Err(Error::TooLarge(_))));
}

#[test]
fn kreweras_examples_and_identity() {
    let full = NcPartition::new(vec![vec![1, 2, 3, 4, 5]]);
    assert_eq!(kreweras_dual(&full, 5).unwrap(), NcPartition::new((1..=5).map(|i| vec![i]).collect()));
    let singles = NcPartition::new((1..=4).map(|i| vec![i]).collect());
    assert_eq!(kreweras_dual(&singles, 4).unwrap(), NcPartition::new(vec![vec![1, 2, 3, 4]]));
    let fig = NcPartition::new(vec![vec![1], vec![2, 3, 4]]);
    assert_eq!(kreweras_dual(&fig, 4).unwrap(), NcPartition::new(vec![vec![1, 4], vec![2], vec![3]]));
    assert!(matches!(
        kreweras_dual(&NcPartition::new(vec![vec![1, 3], vec![2, 4]]), 4),
        Err(Error::NotNonCrossing)
    ));
    for k in 1..=8 {
        for p in nc_enumerate(k).unwrap() {
            let d = kreweras_dual(&p, k).unwrap();
            assert_eq!(p.len() + d.len(), k + 1);
            assert!(is_non_crossing(&d, k));
        }
    }
}

#[test]
fn mu_table_examples() {
    let relu = vec![Activation::Relu; 3];
    let t = mu_table::<f64>(4, 3, 1.0, &relu).unwrap();
    assert!(t.mu.iter().flatten().all(|&m| m == 0.5));
    assert_eq!(t.kx, vec![1.0, 0.5, 0.25, 0.125]);
    let lin = vec![Activation::linear(); 2];
    let t = mu_table::<f64>(3, 2, 2.5, &lin).unwrap();
    assert!(t.mu.iter().flatten().all(|&m| m == 1.0));
    assert_eq!(t.kx, vec![2.5, 2.5, 2.5]);
    let sq = vec![Activation::poly(&[0.0, 0.0, 1.0])];
    let t = mu_table::<f64>(2, 1, 1.0, &sq).unwrap();
    assert_eq!(t.mu[0][0], 4.0);
    // E[(2X)^4] = 16 * 3
    assert_eq!(t.mu[1][0], 48.0);
}

fn relu_closed_form(k: usize, l: i64) -> BigRational {
    match k {
        1 => rat(1, 1 << l),
        2 => rat(1 + 2 * l, 1 << (2 * l)),
        3 => rat(6 * l * (l + 1) - 2 * l + 1, 1 << (3 * l)),
        4 => rat(4 * l * (16 * l * l + 12 * l + 5) + 3, 3 << (4 * l)),
        _ => unreachable!(),
    }
}

#[test]
fn relu_moments_are_exact_rationals() {
    let relu = vec![Activation::Relu; 5];
    let m = fc_moments::<BigRational>(4, 5, 1.0, &relu).unwrap();
    for k in 1..=4 {
        assert_eq!(m[k - 1][0], rat(1, 1));
        for l in 1..=5 {
            assert_eq!(m[k - 1][l], relu_closed_form(k, l as i64), "k={k} L={l}");
        }
    }
    assert_eq!(m[1][2], rat(5, 16));
    assert_eq!(m[3][1], rat(45, 16));
    assert_eq!(m[3][2], rat(249, 256));
    assert_eq!(m[2][3], rat(67, 512));
    let f = fc_moments_float(4, 5, 1.0, &relu).unwrap();
    for k in 0..4 {
        for l in 0..=5 {
            let r: f64 = num_traits::ToPrimitive::to_f64(&m[k][l]).unwrap();
            assert!((f[k][l] - r).abs() < 1e-12);
        }
    }
}

#[test]
fn linear_moments_are_fuss_catalan() {
    let lin = vec![Activation::linear(); 4];
    let f = fc_moments_float(6, 4, 1.0, &lin).unwrap();
    assert_eq!((1..=4).map(|k| f[k - 1][1]).collect::<Vec<_>>(), vec![1.0, 2.0, 5.0, 14.0]);
    assert_eq!((1..=4).map(|k| f[k - 1][2]).collect::<Vec<_>>(), vec![1.0, 3.0, 12.0, 55.0]);
    for k in 1..=6u64 {
        for l in 1..=4u64 {
            // independent oracle: binom(k(L+1), k) / (kL + 1) via f64 products
            let mut b = 1.0;
            for i in 0..k {
                b *= (k * (l + 1) - i) as f64 / (i + 1) as f64;
            }
            let oracle = (b / (k * l + 1) as f64).round();
            assert_eq!(f[k as usize - 1][l as usize], oracle);
            assert_eq!(fuss_catalan(k, l) as f64, oracle);
        }
    }
}

#[test]
fn first_moment_is_product_of_mu() {
    let acts = vec![Activation::poly(&[0.1, 1.0, 0.3]), Activation::poly(&[0.0, 0.5, 0.0, 0.2])];
    let m = fc_moments_float(3, 2, 0.7, &acts).unwrap();
    let t = mu_table::<f64>(3, 2, 0.7, &acts).unwrap();
    for l in 1..=2 {
        assert!(close(m[0][l], t.mu[0][l - 1] * m[0][l - 1], 1e-14));
    }
    let r = fc_moments::<BigRational>(3, 2, 0.7, &acts).unwrap();
    for k in 0..3 {
        for l in 0..=2 {
            let v: f64 = num_traits::ToPrimitive::to_f64(&r[k][l]).unwrap();
            assert!((v - m[k][l]).abs() <= 1e-12 * (1.0 + v.abs()));
        }
    }
}

#[test]
fn moment_table_exports() {
    let t = MomentTable::compute(4, 3, 1.0, &Activation::Relu).unwrap();
    let csv = t.to_csv();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "k,L,m_theory_rational,m_theory_float");
    assert_eq!(lines.len(), 13);
    assert!(lines.contains(&"2,2,5/16,0.3125"));
    assert!(lines.contains(&"4,3,741/4096,0.180908203"));
    let v: serde_json::Value = serde_json::from_str(&t.to_json()).unwrap();
    assert_eq!(v["activation"], "relu");
}

proptest! {
    #[test]
    fn kernel_symmetry(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x: Vec<f64> = (0..3).map(|_| rng.random_range(-1.0..1.0)).collect();
        let y: Vec<f64> = (0..3).map(|_| rng.random_range(-1.0..1.0)).collect();
        let acts = vec![rand_poly(&mut rng), Activation::Relu];
        let a = gp_kernel_recursive(2, &x, &y, &acts).unwrap();
        let b = gp_kernel_recursive(2, &y, &x, &acts).unwrap();
        prop_assert!(close(a, b, 1e-13));
        let a = ntk_limit(2, &x, &y, &acts).unwrap();
        let b = ntk_limit(2, &y, &x, &acts).unwrap();
        prop_assert!(close(a, b, 1e-13));
    }
}
