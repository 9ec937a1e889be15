use kc_core::contrastive::{spectral_loss, spectral_constant, factorization_error, PairProcess};
use kc_core::encoders::{k_sigmoid, log_softmax, sigmoid, softmax};
use kc_core::kernels::{exp_pmi_kernel, mercer_decompose};
use kc_core::linalg::is_psd;
use kc_core::manifold::{lle_weights, pairwise_distances, NeighborGraph};
use kc_core::{Kernel, Mat, SymMatrix};
use proptest::prelude::*;

fn points(n: usize, dim: usize) -> impl Strategy<Value = Mat> {
    prop::collection::vec(-5.0f64..5.0, n * dim).prop_map(move |v| Mat::from_row_slice(n, dim, &v))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn builtin_kernel_grams_are_psd(data in points(7, 3), degree in 1u32..4, sigma2 in 0.1f64..10.0) {
        for k in [Kernel::Linear, Kernel::polynomial(degree).unwrap(), Kernel::gaussian(sigma2).unwrap()] {
            let g = k.gram_rows(&data).unwrap();
            let tol = 1e-8 * g.as_mat().amax().max(1.0);
            prop_assert!(is_psd(&g, tol).unwrap());
        }
    }

    #[test]
    fn pair_process_identities(seed in 0u64..10_000, n in 2usize..8) {
        let proc = PairProcess::random(n, seed).unwrap();
        let q = proc.marginal();
        prop_assert!((q.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        prop_assert!((proc.joint().as_mat().sum() - 1.0).abs() < 1e-12);
        prop_assert!(is_psd(proc.kplus(), 1e-8).unwrap());
        prop_assert!(is_psd(proc.abar(), 1e-8).unwrap());
        // Ā has top eigenvalue 1 with eigenvector √q.
        let top = proc.abar().eigen().unwrap().values[0];
        prop_assert!((top - 1.0).abs() < 1e-9);
    }

    #[test]
    fn spectral_loss_minus_factorization_is_constant(seed in 0u64..1000, a in prop::collection::vec(-1.0f64..1.0, 12)) {
        let proc = PairProcess::random(4, seed).unwrap();
        let phi = Mat::from_row_slice(4, 3, &a);
        let lhs = spectral_loss(&phi, &proc).unwrap() - factorization_error(&phi, &proc).unwrap();
        prop_assert!((lhs - spectral_constant(&proc)).abs() < 1e-10);
    }

    #[test]
    fn exp_of_psd_table_is_psd(a in prop::collection::vec(-1.0f64..1.0, 15)) {
        let f = Mat::from_row_slice(5, 3, &a);
        let t = SymMatrix::symmetrize(&(&f * f.transpose()));
        prop_assert!(is_psd(&t.map(f64::exp), 1e-8).unwrap());
    }

    #[test]
    fn softmax_is_a_distribution(z in prop::collection::vec(-700.0f64..700.0, 1..10)) {
        let s = softmax(&z);
        prop_assert!((s.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        prop_assert!(s.iter().all(|v| (0.0..=1.0).contains(v)));
        for (l, v) in log_softmax(&z).iter().zip(&s) {
            prop_assert!(*l <= 0.0);
            if *v > 1e-300 {
                prop_assert!((l.exp() - v).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn k_sigmoid_is_shifted_sigmoid(z in -30.0f64..30.0, k in 0.01f64..100.0) {
        let a = k_sigmoid(z, k).unwrap();
        prop_assert!((a - sigmoid(z - k.ln())).abs() < 1e-12);
        prop_assert!((k_sigmoid(k.ln(), k).unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn distances_satisfy_triangle_inequality(data in points(6, 2)) {
        let d = pairwise_distances(&data);
        for i in 0..6 {
            prop_assert_eq!(d.get(i, i), 0.0);
            for j in 0..6 {
                for k in 0..6 {
                    prop_assert!(d.get(i, k) <= d.get(i, j) + d.get(j, k) + 1e-12);
                }
            }
        }
    }

    #[test]
    fn laplacian_quadratic_form_identity(
        w in prop::collection::vec(0.0f64..3.0, 10),
        y in prop::collection::vec(-2.0f64..2.0, 5),
    ) {
        let mut edges = Vec::new();
        let mut idx = 0;
        for i in 0..5 {
            for j in i + 1..5 {
                if w[idx] > 0.5 {
                    edges.push((i, j, w[idx]));
                }
                idx += 1;
            }
        }
        let g = NeighborGraph::from_edge_list(5, &edges).unwrap();
        let lap = g.laplacian();
        let direct: f64 = edges.iter().map(|&(i, j, w)| w * (y[i] - y[j]).powi(2)).sum();
        prop_assert!((lap.quadratic_form(&y) - direct).abs() < 1e-10 * direct.max(1.0));
        let rows = lap.laplacian.as_mat().column_sum();
        prop_assert!(rows.amax() < 1e-12);
    }

    #[test]
    fn lle_rows_sum_to_one(data in points(10, 3), k in 2usize..6) {
        let lw = lle_weights(&data, k).unwrap();
        for i in 0..10 {
            prop_assert!((lw.weights.row(i).sum() - 1.0).abs() < 1e-8);
        }
    }

    #[test]
    fn mercer_reconstructs_table(a in prop::collection::vec(-1.0f64..1.0, 12), raw in prop::collection::vec(0.1f64..1.0, 4)) {
        let f = Mat::from_row_slice(4, 3, &a);
        let t = SymMatrix::symmetrize(&(&f * f.transpose()));
        let total: f64 = raw.iter().sum();
        let p: Vec<f64> = raw.iter().map(|v| v / total).collect();
        let m = mercer_decompose(&t, &p).unwrap();
        prop_assert!((m.reconstruct(4) - t.as_mat()).amax() < 1e-9);
    }
}

#[test]
fn exp_pmi_of_independent_joint_is_all_ones() {
    let p = [0.2, 0.3, 0.5];
    let joint = Mat::from_fn(3, 3, |i, j| p[i] * p[j]);
    let Kernel::Table(t) = exp_pmi_kernel(&joint, &p).unwrap() else { panic!("expected a table") };
    assert!(t.as_mat().iter().all(|v| (v - 1.0).abs() < 1e-12));
}
