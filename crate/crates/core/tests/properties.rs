use proptest::prelude::*;

use ridgepath::data::{parse_libsvm, write_libsvm};
use ridgepath::linalg::ops::dot;
use ridgepath::path::{gd_basis, gd_compose, ihs_basis, ihs_compose};
use ridgepath::report::write_csv;
use ridgepath::rng::SeededRng;
use ridgepath::sketch::realize_dense;
use ridgepath::{
    ihs_bin_path, sketch_apply, svd_path, CsrMatrix, DenseMatrix, IhsBinOptions, Matrix, PathConfig, Preconditioner,
    SketchKind, SketchSpec,
};

fn gaussian(rows: usize, cols: usize, seed: u64) -> DenseMatrix {
    let mut rng = SeededRng::new(seed);
    DenseMatrix::from_fn(rows, cols, |_, _| rng.normal())
}

fn vector(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = SeededRng::new(seed);
    (0..n).map(|_| rng.normal()).collect()
}

fn norm(v: &[f64]) -> f64 {
    dot(v, v).sqrt()
}

fn rel_err(x: &[f64], y: &[f64]) -> f64 {
    let diff: Vec<f64> = x.iter().zip(y).map(|(a, b)| a - b).collect();
    norm(&diff) / norm(y).max(f64::MIN_POSITIVE)
}

fn kind_strategy() -> impl Strategy<Value = SketchKind> {
    prop_oneof![
        Just(SketchKind::Gaussian),
        Just(SketchKind::CountSketch),
        (1usize..4).prop_map(|s| SketchKind::Sjlt { s }),
        Just(SketchKind::Srht),
        Just(SketchKind::Identity),
    ]
}

fn spec_for(kind: SketchKind, m: usize, n: usize, seed: u64) -> SketchSpec {
    match kind {
        SketchKind::Identity => SketchSpec::identity(n),
        SketchKind::Sjlt { s } => SketchSpec::new(kind, (m / s).max(1) * s, n, seed).unwrap(),
        SketchKind::Srht => SketchSpec::new(kind, m.min(n.next_power_of_two()), n, seed).unwrap(),
        _ => SketchSpec::new(kind, m, n, seed).unwrap(),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn ihs_basis_reproduces_the_iteration(
        n in 8usize..60, d in 2usize..20, k in 1usize..10, seed in any::<u64>(),
        lambda in 0.1f64..50.0, lambda0 in 0.1f64..50.0, tau_scale in 0.05f64..1.0,
        kind in kind_strategy(), m_extra in 0usize..30,
    ) {
        let a = Matrix::Dense(gaussian(n, d, seed));
        let b = vector(n, seed ^ 1);
        let spec = spec_for(kind, d + m_extra, n, seed ^ 2);
        let p = Preconditioner::build(&sketch_apply(&spec, &a).unwrap(), lambda0).unwrap();
        let tau = tau_scale;
        let basis = ihs_basis(&a, &b, &p, tau, k).unwrap();
        let composed = ihs_compose(&basis, lambda).unwrap();

        let g = a.apply_transpose(&b).unwrap();
        let mut x = vec![0.0; d];
        for _ in 0..k {
            let mut grad = a.gram_apply(&x).unwrap();
            for i in 0..d {
                grad[i] += lambda * x[i] - g[i];
            }
            let step = p.apply(&grad).unwrap();
            for i in 0..d {
                x[i] -= tau * step[i];
            }
        }
        let scale = norm(&x).max(norm(&g) * tau);
        let diff: Vec<f64> = composed.iter().zip(&x).map(|(u, v)| u - v).collect();
        prop_assert!(norm(&diff) <= 1e-10 * scale, "diff {} scale {}", norm(&diff), scale);
    }

    #[test]
    fn gd_basis_reproduces_plain_descent(
        n in 8usize..60, d in 2usize..20, k in 1usize..12, seed in any::<u64>(),
        lambda in 0.0f64..5.0, tau_scale in 0.1f64..1.0,
    ) {
        let a = Matrix::Dense(gaussian(n, d, seed));
        let b = vector(n, seed ^ 3);
        let top = ridgepath::path::spectral_norm_sq(&a, 50) * 1.01;
        let tau = tau_scale / (top + lambda);
        let basis = gd_basis(&a, &b, tau, k).unwrap();
        let composed = gd_compose(&basis, lambda).unwrap();
        let g = a.apply_transpose(&b).unwrap();
        let mut x = vec![0.0; d];
        for _ in 0..k {
            let hx = a.gram_apply(&x).unwrap();
            for i in 0..d {
                x[i] -= tau * (hx[i] + lambda * x[i] - g[i]);
            }
        }
        prop_assert!(rel_err(&composed, &x) <= 1e-10);
    }

    #[test]
    fn sketch_product_matches_realized_matrix(
        n in 1usize..40, d in 1usize..8, m in 1usize..24, seed in any::<u64>(), kind in kind_strategy(),
    ) {
        let a = gaussian(n, d, seed);
        let spec = spec_for(kind, m, n, seed);
        let s = realize_dense(&spec).unwrap();
        let expected = s.matmul(&a).unwrap();
        for mat in [Matrix::Dense(a.clone()), Matrix::Sparse(CsrMatrix::from_dense(&a))] {
            let got = sketch_apply(&spec, &mat).unwrap();
            let diff = got.product.as_slice().iter().zip(expected.as_slice()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
            prop_assert!(diff <= 1e-12 * expected.max_abs().max(1.0));
        }
    }

    #[test]
    fn full_rank_preconditioner_inverts_the_sketched_hessian(
        d in 1usize..12, extra in 0usize..20, lambda0 in 1e-3f64..10.0, seed in any::<u64>(),
    ) {
        let sa = gaussian(d + extra, d, seed);
        let p = Preconditioner::from_product(&sa, lambda0).unwrap();
        let v = vector(d, seed ^ 9);
        let mut h = sa.gram();
        h.add_diagonal(lambda0);
        let back = p.apply(&h.apply(&v).unwrap()).unwrap();
        prop_assert!(rel_err(&back, &v) <= 1e-8);
    }

    #[test]
    fn libsvm_round_trip(rows in 1usize..20, cols in 1usize..10, seed in any::<u64>(), density in 0.0f64..1.0) {
        let mut rng = SeededRng::new(seed);
        let mut triplets = Vec::new();
        for i in 0..rows {
            for j in 0..cols {
                if rng.uniform() < density {
                    triplets.push((i, j, rng.normal() * 10f64.powi(rng.index(20) as i32 - 10)));
                }
            }
        }
        let m = CsrMatrix::from_triplets(rows, cols, &triplets).unwrap();
        let labels: Vec<f64> = (0..rows).map(|_| rng.normal()).collect();
        let mut buf = Vec::new();
        write_libsvm(&mut buf, &m, &labels).unwrap();
        let (back, y) = parse_libsvm(buf.as_slice(), Some(cols)).unwrap();
        prop_assert_eq!(back, m);
        prop_assert_eq!(y, labels);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn path_csv_is_sorted_and_on_grid(seed in any::<u64>(), count in 1usize..15, hi in 1.5f64..1e3) {
        let ds = ridgepath::gen_synthetic(40, 8, 0.7, 0.05, seed).unwrap();
        let cfg = PathConfig::log_grid(1.0, hi, count, 1e-6).unwrap();
        let spec = SketchSpec::new(SketchKind::Gaussian, 24, 40, seed).unwrap();
        let ihs = ihs_bin_path(&ds.a_train, &ds.b_train, &cfg, &IhsBinOptions::new(spec)).unwrap();
        let svd = svd_path(&ds.a_train, &ds.b_train, &cfg).unwrap();
        let mut buf = Vec::new();
        write_csv(&mut buf, &[&svd, &ihs], true).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let rows: Vec<(f64, String)> = text.lines().skip(1).map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            (f[0].parse().unwrap(), f[4].to_string())
        }).collect();
        prop_assert_eq!(rows.len(), 2 * count);
        for w in rows.windows(2) {
            prop_assert!(w[0].0 < w[1].0 || (w[0].0 == w[1].0 && w[0].1 < w[1].1));
        }
        for (lambda, _) in &rows {
            prop_assert!(cfg.lambdas.contains(lambda));
        }
        for (p, q) in ihs.points.iter().zip(&svd.points) {
            prop_assert!(rel_err(&p.x, &q.x) <= 1e-4, "lambda {}", p.lambda);
        }
    }
}
