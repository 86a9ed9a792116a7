use ndarray::Array2;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rolekit::glrd::{self, ConstraintKind, ConstraintSpec, GlrdConfig, Target};
use rolekit::mrd::{self, Factor, TuckerConfig};
use rolekit::numkit::{frobenius, Tensor3};
use rolekit::synth::planted_tucker;

fn random_matrix(rows: usize, cols: usize, seed: u64) -> Array2<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Array2::from_shape_fn((rows, cols), |_| rng.gen::<f64>())
}

/// Lee–Seung multiplicative updates for `min ‖V - WH‖_F`, run until the
/// objective stalls.
fn multiplicative_nmf(v: &Array2<f64>, r: usize, seed: u64) -> f64 {
    let (n, f) = v.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut w = Array2::from_shape_fn((n, r), |_| rng.gen::<f64>() + 0.1);
    let mut h = Array2::from_shape_fn((r, f), |_| rng.gen::<f64>() + 0.1);
    let tiny = 1e-300;
    let mut prev = f64::INFINITY;
    for it in 0..200_000 {
        let num = w.t().dot(v);
        let den = w.t().dot(&w).dot(&h);
        h.zip_mut_with(&(num / (den + tiny)), |a, b| *a *= b);
        let num = v.dot(&h.t());
        let den = w.dot(&h.dot(&h.t()));
        w.zip_mut_with(&(num / (den + tiny)), |a, b| *a *= b);
        if it % 100 == 0 {
            let obj = frobenius((v - &w.dot(&h)).view());
            if prev - obj <= 1e-13 * prev.max(1e-300) {
                return obj;
            }
            prev = obj;
        }
    }
    frobenius((v - &w.dot(&h)).view())
}

#[test]
fn glrd_within_five_percent_of_multiplicative_updates() {
    for inst in 0..5 {
        let v = random_matrix(6, 5, 100 + inst);
        let seeds: Vec<u64> = (0..20).collect();
        let ours = glrd::fit_best(v.view(), &GlrdConfig::new(2), &seeds).unwrap().objective;
        let oracle = seeds.iter().map(|&s| multiplicative_nmf(&v, 2, 1000 + s)).fold(f64::INFINITY, f64::min);
        assert!(ours <= 1.05 * oracle, "instance {inst}: glrd {ours} vs oracle {oracle}");
    }
}

fn constraint_strategy() -> impl Strategy<Value = (u8, u8, f64)> {
    // (kind, target, eps)
    (0u8..3, 0u8..2, 0.0f64..3.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(30))]

    #[test]
    fn glrd_monotone_and_feasible(seed in 0u64..1000, rank in 1usize..4, spec in constraint_strategy()) {
        let v = random_matrix(7, 6, seed);
        let (kind, target, eps) = spec;
        let target = if target == 0 { Target::GColumns } else { Target::FRows };
        let c = match kind {
            0 => ConstraintSpec::sparsity(target, eps),
            1 => ConstraintSpec::diversity(target, eps),
            _ => {
                let rows = if target == Target::GColumns { 7 } else { 6 };
                let reference = random_matrix(2, rows, seed + 7);
                let reference = if target == Target::GColumns { reference.t().to_owned() } else { reference };
                ConstraintSpec::alternative(target, eps, reference)
            }
        };
        let mut cfg = GlrdConfig::new(rank).seed(seed);
        cfg = if target == Target::GColumns { cfg.with_g(c.clone()) } else { cfg.with_f(c.clone()) };
        let (m, trace) = glrd::fit_traced(v.view(), &cfg).unwrap();
        for w in trace.windows(2) {
            prop_assert!(w[1] <= w[0] + 1e-10, "objective rose {} -> {}", w[0], w[1]);
        }
        prop_assert!(m.g.iter().chain(m.f.iter()).all(|&x| x >= 0.0));
        prop_assert!((m.objective - m.objective_for(v.view())).abs() < 1e-9);
        let vectors: Vec<Vec<f64>> = match target {
            Target::GColumns => m.g.columns().into_iter().map(|c| c.to_vec()).collect(),
            Target::FRows => m.f.rows().into_iter().map(|c| c.to_vec()).collect(),
        };
        let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
        match c.kind {
            ConstraintKind::Sparsity => {
                for x in &vectors { prop_assert!(x.iter().sum::<f64>() <= eps + 1e-8); }
            }
            ConstraintKind::Diversity => {
                for a in 0..vectors.len() { for b in 0..vectors.len() {
                    if a != b { prop_assert!(dot(&vectors[a], &vectors[b]) <= eps + 1e-8); }
                }}
            }
            ConstraintKind::Alternative => {
                let refs = c.reference.as_ref().unwrap();
                let refs: Vec<Vec<f64>> = match target {
                    Target::GColumns => refs.columns().into_iter().map(|c| c.to_vec()).collect(),
                    Target::FRows => refs.rows().into_iter().map(|c| c.to_vec()).collect(),
                };
                for x in &vectors { for y in &refs { prop_assert!(dot(x, y) <= eps + 1e-8); } }
            }
            ConstraintKind::None => {}
        }
    }

    #[test]
    fn glrd_is_deterministic(seed in 0u64..100) {
        let v = random_matrix(5, 4, seed);
        let cfg = GlrdConfig::new(2).seed(seed).with_f(ConstraintSpec::diversity(Target::FRows, 0.1));
        prop_assert_eq!(glrd::fit(v.view(), &cfg).unwrap(), glrd::fit(v.view(), &cfg).unwrap());
    }
}

#[test]
fn tucker_trace_is_monotone_and_normalization_preserves_reconstruction() {
    for seed in 0..5 {
        let planted = planted_tucker((8, 6, 4), (2, 3, 2), seed).unwrap();
        let mut noisy = planted.tensor.clone();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (n, f, m) = noisy.dims();
        for k in 0..m {
            for j in 0..f {
                for i in 0..n {
                    noisy.add(i, j, k, 0.05 * rng.gen::<f64>());
                }
            }
        }
        let (model, trace) = mrd::fit_traced(&noisy, &TuckerConfig::new((2, 3, 2)).seed(seed)).unwrap();
        for w in trace.windows(2) {
            assert!(w[1] <= w[0] + 1e-9, "objective rose {} -> {}", w[0], w[1]);
        }
        assert!((model.objective - model.objective_for(&noisy)).abs() < 1e-9);

        let before = model.reconstruct();
        let mut m2 = model.clone();
        for which in [Factor::G, Factor::F, Factor::R] {
            let mut fac = m2.factor(which).clone();
            mrd::normalize_columns(&mut fac, &mut m2.core, which);
            match which {
                Factor::G => m2.g = fac,
                Factor::F => m2.f = fac,
                Factor::R => m2.r = fac,
            }
        }
        let after = m2.reconstruct();
        let scale = before.norm().max(1.0);
        assert!(before.distance(&after) <= 1e-12 * scale);
    }
}

#[test]
fn unfoldings_match_model() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..20 {
        let p = planted_tucker((5, 4, 3), (2, 2, 2), rng.gen()).unwrap();
        let model = mrd::fit(&p.tensor, &TuckerConfig::new((2, 2, 2)).seed(1)).unwrap();
        let t = model.reconstruct();
        for which in [Factor::G, Factor::F, Factor::R] {
            let lhs = rolekit::numkit::matricize(&t, which.mode());
            let rhs = model.factor(which).dot(&mrd::unfolding_design(&model, which));
            assert!((&lhs - &rhs).iter().all(|d| d.abs() < 1e-12));
        }
    }
}

#[test]
fn transfer_onto_own_tensor_is_fixed_point() {
    let p = planted_tucker((10, 6, 3), (2, 2, 2), 21).unwrap();
    let cfg = TuckerConfig::new((2, 2, 2));
    let model = mrd::fit_best(&p.tensor, &cfg, &[0, 1, 2]).unwrap();
    let t = mrd::transfer_fit(&p.tensor, &model, &[Factor::F], &cfg).unwrap();
    assert!((t.fit - model.fit).abs() < 1e-6);
    assert_eq!(t.f, model.f);
}

#[test]
fn zero_tensor_fits_perfectly() {
    let v = Tensor3::zeros((4, 3, 2));
    let m = mrd::fit(&v, &TuckerConfig::new((2, 2, 1))).unwrap();
    assert_eq!(m.fit, 1.0);
}
