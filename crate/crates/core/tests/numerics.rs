use nalgebra::DMatrix;
use ndarray::{Array1, Array2, ArrayView1};
use proptest::prelude::*;
use rolekit::numkit::*;

fn vec_strategy(max_dim: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-3.0f64..3.0, 1..=max_dim)
}

fn halfspaces(dim: usize, count: usize) -> impl Strategy<Value = Vec<(Vec<f64>, f64)>> {
    prop::collection::vec((prop::collection::vec(0.0f64..2.0, dim), 0.0f64..2.0), 0..=count)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn l1_projection_is_feasible_and_idempotent(v in vec_strategy(6), eps in 0.0f64..4.0) {
        let v = Array1::from(v);
        let p = project_l1_nonneg(v.view(), eps);
        prop_assert!(p.iter().all(|&x| x >= 0.0));
        prop_assert!(p.sum() <= eps + 1e-12);
        let again = project_l1_nonneg(p.view(), eps);
        prop_assert!((&again - &p).iter().all(|d| d.abs() < 1e-12));
    }

    #[test]
    fn l1_projection_satisfies_variational_inequality(
        v in vec_strategy(5),
        eps in 0.1f64..3.0,
        ys in prop::collection::vec(prop::collection::vec(0.0f64..1.0, 5), 8),
    ) {
        let v = Array1::from(v);
        let p = project_l1_nonneg(v.view(), eps);
        for y in ys {
            // random feasible point of the same dimension
            let y = Array1::from(y[..v.len()].to_vec());
            let s = y.sum();
            let y = if s > eps { y * (eps / s) } else { y };
            prop_assert!((&v - &p).dot(&(&y - &p)) <= 1e-9);
        }
    }

    #[test]
    fn halfspace_projection_feasible_idempotent_optimal(
        v in vec_strategy(4),
        cons in halfspaces(4, 3),
        ys in prop::collection::vec(prop::collection::vec(0.0f64..1.0, 4), 8),
    ) {
        let d = v.len();
        let v = Array1::from(v);
        let mut set = HalfspaceSet::new();
        for (a, e) in &cons {
            set.push(Array1::from(a[..d].to_vec()), *e);
        }
        let p = project_halfspaces_nonneg(v.view(), &set).unwrap();
        prop_assert!(set.violation(p.view()) <= 1e-9);
        let again = project_halfspaces_nonneg(p.view(), &set).unwrap();
        prop_assert!((&again - &p).iter().all(|x| x.abs() < 1e-9));
        for y in ys {
            let mut y = Array1::from(y[..d].to_vec());
            // shrink toward the origin (always feasible) until inside
            while set.violation(y.view()) > 0.0 {
                y *= 0.5;
            }
            prop_assert!((&v - &p).dot(&(&y - &p)) <= 1e-7);
        }
    }

    #[test]
    fn nnls_beats_clamped_least_squares(
        a in prop::collection::vec(-2.0f64..2.0, 12),
        b in prop::collection::vec(-2.0f64..2.0, 4),
    ) {
        let a = Array2::from_shape_vec((4, 3), a).unwrap();
        let b = Array1::from(b);
        let x = nnls(a.view(), b.view());
        prop_assert!(x.iter().all(|&v| v >= 0.0));
        let am = DMatrix::from_row_slice(4, 3, a.as_slice().unwrap());
        let bm = nalgebra::DVector::from_column_slice(b.as_slice().unwrap());
        let ls = am.clone().svd(true, true).solve(&bm, 1e-12).unwrap();
        let clamped = Array1::from_iter(ls.iter().map(|v| v.max(0.0)));
        let res = |x: &Array1<f64>| (a.dot(x) - &b).mapv(|r| r * r).sum();
        prop_assert!(res(&x) <= res(&clamped) + 1e-10);
        // KKT: gradient non-negative on the zero set, zero on the support
        let grad = a.t().dot(&(a.dot(&x) - &b));
        for (xi, gi) in x.iter().zip(grad.iter()) {
            if *xi > 0.0 { prop_assert!(gi.abs() < 1e-8); } else { prop_assert!(*gi > -1e-8); }
        }
    }

    #[test]
    fn matricize_fold_round_trip(n in 1usize..5, f in 1usize..5, m in 1usize..5, seed in any::<u64>()) {
        let t = random_tensor((n, f, m), seed);
        for mode in [Mode::One, Mode::Two, Mode::Three] {
            let back = fold(matricize(&t, mode).view(), mode, (n, f, m)).unwrap();
            prop_assert_eq!(&back, &t);
        }
        prop_assert_eq!(unvectorize(vectorize(&t).view(), (n, f, m)).unwrap(), t);
    }
}

fn random_tensor(dims: (usize, usize, usize), seed: u64) -> Tensor3 {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    Tensor3::from_fn(dims, |_, _, _| rng.gen::<f64>())
}

#[test]
fn mode_products_agree_with_definition() {
    // elementwise sum definition of the Tucker product
    let core = random_tensor((2, 3, 2), 1);
    let g = Array2::from_shape_fn((4, 2), |(i, j)| (i + 2 * j) as f64 * 0.3);
    let f = Array2::from_shape_fn((3, 3), |(i, j)| ((i * j) % 3) as f64 + 0.5);
    let r = Array2::from_shape_fn((2, 2), |(i, j)| if i == j { 1.0 } else { 0.25 });
    let t = Tensor3::tucker_product(&core, g.view(), f.view(), r.view());
    for i in 0..4 {
        for j in 0..3 {
            for k in 0..2 {
                let mut want = 0.0;
                for a in 0..2 {
                    for b in 0..3 {
                        for c in 0..2 {
                            want += core.get(a, b, c) * g[[i, a]] * f[[j, b]] * r[[k, c]];
                        }
                    }
                }
                assert!((t.get(i, j, k) - want).abs() < 1e-12);
            }
        }
    }
}

#[test]
fn eigen_matches_nalgebra_on_random_symmetric() {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(17);
    for _ in 0..50 {
        let b = Array2::from_shape_fn((5, 5), |_| rng.gen_range(-1.0..1.0));
        let a = &b + &b.t();
        let ours = sym_eigen(a.view());
        let reference = DMatrix::from_row_slice(5, 5, a.as_standard_layout().as_slice().unwrap()).symmetric_eigen();
        let mut want: Vec<f64> = reference.eigenvalues.iter().copied().collect();
        want.sort_by(|x, y| y.total_cmp(x));
        for (x, y) in ours.values.iter().zip(&want) {
            assert!((x - y).abs() < 1e-10, "{x} vs {y}");
        }
        // A v = λ v for every returned pair
        for c in 0..5 {
            let v = ours.vectors.column(c);
            let resid = a.dot(&v) - &v * ours.values[c];
            assert!(resid.iter().all(|r| r.abs() < 1e-9));
        }
        let (l1, l2) = top_two_eigs(a.view()).unwrap();
        let mut mags: Vec<f64> = want.iter().map(|v| v.abs()).collect();
        mags.sort_by(|x, y| y.total_cmp(x));
        assert!((l1 - mags[0]).abs() < 1e-7 && (l2 - mags[1]).abs() < 1e-6, "{l1} {l2} vs {mags:?}");
    }
}

#[test]
fn pca_residual_equals_trailing_eigenvalues() {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
    let x = Array2::from_shape_fn((12, 4), |_| rng.gen::<f64>());
    let pca = pca_2d(x.view()).unwrap();
    let mean = x.mean_axis(ndarray::Axis(0)).unwrap();
    let centered = &x - &mean;
    let approx = pca.coords.dot(&pca.components.t());
    let resid: f64 = (&centered - &approx).mapv(|v| v * v).sum();
    let trailing: f64 = pca.eigenvalues.iter().skip(2).sum();
    assert!((resid - trailing).abs() < 1e-9);
}

fn brute_nnls_residual(a: &Array2<f64>, b: ArrayView1<f64>) -> f64 {
    let n = a.ncols();
    let mut best = b.dot(&b);
    for mask in 1u32..(1 << n) {
        let cols: Vec<usize> = (0..n).filter(|j| mask >> j & 1 == 1).collect();
        let sub = DMatrix::from_fn(a.nrows(), cols.len(), |i, c| a[[i, cols[c]]]);
        let bm = nalgebra::DVector::from_iterator(b.len(), b.iter().copied());
        let Ok(x) = sub.svd(true, true).solve(&bm, 1e-12) else { continue };
        if x.iter().all(|&v| v >= 0.0) {
            let r: f64 = (0..a.nrows())
                .map(|i| {
                    let fit: f64 = cols.iter().enumerate().map(|(c, &j)| a[[i, j]] * x[c]).sum();
                    (fit - b[i]).powi(2)
                })
                .sum();
            best = best.min(r);
        }
    }
    best
}

#[test]
fn nnls_gram_matches_enumeration() {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(8);
    for _ in 0..100 {
        let a = Array2::from_shape_fn((6, 3), |_| rng.gen_range(-1.0..1.0));
        let b = Array1::from_shape_fn(6, |_| rng.gen_range(-1.0..1.0));
        let x = nnls_gram(a.t().dot(&a).view(), a.t().dot(&b).view());
        let r = (a.dot(&x) - &b).mapv(|v| v * v).sum();
        assert!((r - brute_nnls_residual(&a, b.view())).abs() < 1e-10);
    }
}
