use ndarray::Array2;
use proptest::prelude::*;
use rolekit::glrd::{self, ConstraintSpec, GlrdConfig, Target};
use rolekit::graphio::{load_edge_list, read_model, write_model, CooTensor, LabeledMatrix, ModelDocument};
use rolekit::mrd::{self, TuckerConfig};
use rolekit::numkit::Tensor3;

fn values(rows: usize, cols: usize) -> impl Strategy<Value = Array2<f64>> {
    prop::collection::vec(prop_oneof![Just(0.0), 0.0f64..1e6, 1e-300f64..1e-290], rows * cols)
        .prop_map(move |v| Array2::from_shape_vec((rows, cols), v).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn matrix_csv_round_trip(m in values(4, 3)) {
        let lm = LabeledMatrix::unlabeled(m, "node", "feat");
        prop_assert_eq!(LabeledMatrix::read_csv(&lm.write_csv("id")).unwrap(), lm);
    }

    #[test]
    fn coo_round_trip(data in prop::collection::vec(prop_oneof![Just(0.0), 0.0f64..10.0], 24)) {
        let t = Tensor3::from_vec((2, 3, 4), data).unwrap();
        let coo = CooTensor::from_dense(&t);
        prop_assert_eq!(CooTensor::read(&coo.write()).unwrap().to_dense(), t);
    }

    #[test]
    fn role_model_round_trip(seed in 0u64..50, eps in prop_oneof![Just(f64::INFINITY), 0.0f64..5.0]) {
        let v = Array2::from_shape_fn((5, 4), |(i, j)| ((i * 7 + j * 3 + seed as usize) % 5) as f64);
        let cfg = GlrdConfig::new(2).seed(seed).with_g(ConstraintSpec::sparsity(Target::GColumns, eps));
        let doc = ModelDocument::Role(glrd::fit(v.view(), &cfg).unwrap());
        prop_assert_eq!(read_model(&write_model(&doc)).unwrap(), doc);
    }
}

#[test]
fn tucker_model_round_trip_keeps_zero_core_entries() {
    let t = Tensor3::from_fn((4, 3, 2), |i, j, k| if (i + j + k) % 3 == 0 { 0.0 } else { (i + 2 * j + k) as f64 });
    let mut m = mrd::fit(&t, &TuckerConfig::new((2, 2, 2))).unwrap();
    m.core.set(0, 0, 0, 0.0);
    let doc = ModelDocument::Tucker(m);
    let text = write_model(&doc);
    assert_eq!(read_model(&text).unwrap(), doc);
    // writing is a pure function of the model
    assert_eq!(write_model(&read_model(&text).unwrap()), text);
}

#[test]
fn loaders_reject_rather_than_clamp() {
    assert!(load_edge_list("a\tb\t-0.5\n", false).is_err());
    assert!(CooTensor::read("2 2 2\n0 0 0 -1\n").is_err());
}
