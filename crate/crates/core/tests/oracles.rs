//! Enumeration oracles checked against the library on generated models.
#![allow(clippy::needless_range_loop)]

use nilm_core::baselines::{aggregate, co_disaggregate};
use nilm_core::numerics::{log_sum_exp, sigmoid};
use nilm_core::rbm::{
    energy, exact_joint_distribution, exact_loglik_gradient, mean_field_infer, p_h_given_xy, p_x_given_h,
    p_y_given_h_multilabel,
};
use nilm_core::{Matrix, RbmParameters};
use proptest::prelude::*;

fn binary(index: usize, len: usize) -> Vec<f64> {
    (0..len).map(|k| (index >> k & 1) as f64).collect()
}

fn model(nv: usize, nh: usize, nl: usize, values: &[f64]) -> RbmParameters {
    let mut p = RbmParameters::zeros(nv, nh, nl);
    for (dst, src) in p.iter_mut().zip(values) {
        *dst = *src;
    }
    p
}

fn model_strategy(nv: usize, nh: usize, nl: usize, scale: f64) -> impl Strategy<Value = RbmParameters> {
    let n = nh * nv + nh * nl + nv + nh + nl;
    prop::collection::vec(-scale..scale, n).prop_map(move |v| model(nv, nh, nl, &v))
}

/// `log p(x, y)` by summing `exp(−E)` over every configuration.
fn enumerated_log_marginal(p: &RbmParameters, x: &[f64], y: &[f64]) -> f64 {
    let (nv, nh, nl) = (p.n_visible(), p.n_hidden(), p.n_labels());
    let hs: Vec<Vec<f64>> = (0..1 << nh).map(|k| binary(k, nh)).collect();
    let clamped: Vec<f64> = hs.iter().map(|h| -energy(p, x, y, h).unwrap()).collect();
    let mut all = Vec::new();
    for xi in 0..1 << nv {
        for yi in 0..1 << nl {
            for h in &hs {
                all.push(-energy(p, &binary(xi, nv), &binary(yi, nl), h).unwrap());
            }
        }
    }
    log_sum_exp(&clamped) - log_sum_exp(&all)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn gradient_matches_finite_differences(
        p in model_strategy(3, 2, 2, 1.0),
        xi in 0usize..8,
        yi in 0usize..4,
    ) {
        let (x, y) = (binary(xi, 3), binary(yi, 2));
        let grad = exact_loglik_gradient(&p, &x, &y).unwrap();
        let step = 1e-5;
        for (k, g) in grad.iter().enumerate() {
            let mut up = p.clone();
            *up.iter_mut().nth(k).unwrap() += step;
            let mut down = p.clone();
            *down.iter_mut().nth(k).unwrap() -= step;
            let fd = (enumerated_log_marginal(&up, &x, &y) - enumerated_log_marginal(&down, &x, &y)) / (2.0 * step);
            let err = (fd - g).abs() / g.abs().max(fd.abs());
            prop_assert!(err <= 1e-5, "parameter {k}: exact {g} vs fd {fd}");
        }
    }

    #[test]
    fn closed_form_conditionals_match_the_table(p in model_strategy(3, 3, 2, 2.0)) {
        let t = exact_joint_distribution(&p).unwrap();
        for xi in 0..8 {
            for yi in 0..4 {
                let (x, y) = (binary(xi, 3), binary(yi, 2));
                for (a, b) in p_h_given_xy(&p, &x, &y).unwrap().iter().zip(t.p_h_given_xy(&x, &y)) {
                    prop_assert!((a - b).abs() <= 1e-10);
                }
            }
        }
        for hi in 0..8 {
            let h = binary(hi, 3);
            for (a, b) in p_x_given_h(&p, &h).unwrap().iter().zip(t.p_x_given_h(&h)) {
                prop_assert!((a - b).abs() <= 1e-10);
            }
            for (a, b) in p_y_given_h_multilabel(&p, &h).unwrap().iter().zip(t.p_y_given_h(&h)) {
                prop_assert!((a - b).abs() <= 1e-10);
            }
        }
    }

    #[test]
    fn mean_field_returns_fixed_points(
        p in model_strategy(6, 5, 4, 3.0),
        x in prop::collection::vec(0.0f64..=1.0, 6),
        tol in prop::sample::select(vec![1e-4, 1e-6, 1e-9]),
    ) {
        let mf = mean_field_infer(&p, &x, tol, 1000).unwrap();
        if mf.converged {
            let drive = p.w.matvec(&x).unwrap();
            let label = p.u.matvec_transposed(&mf.tau).unwrap();
            let mu: Vec<f64> = (0..4).map(|l| 1.0 / (1.0 + (-(p.c[l] + label[l])).exp())).collect();
            for (a, b) in mu.iter().zip(&mf.mu) {
                prop_assert!((a - b).abs() <= tol + 1e-15);
            }
            for j in 0..5 {
                let z = p.b[j] + drive[j] + (0..4).map(|l| p.u.get(j, l) * mu[l]).sum::<f64>();
                prop_assert!((1.0 / (1.0 + (-z).exp()) - mf.tau[j]).abs() <= tol + 1e-15);
            }
        }
    }

    #[test]
    fn decoupled_labels_give_label_bias_marginals(
        p in model_strategy(4, 3, 3, 4.0),
        x in prop::collection::vec(0.0f64..=1.0, 4),
    ) {
        let mut p = p;
        p.u = Matrix::zeros(3, 3);
        let mf = mean_field_infer(&p, &x, 1e-6, 100).unwrap();
        prop_assert_eq!(mf.mu, sigmoid(&p.c));
    }

    #[test]
    fn co_is_minimal_over_all_subsets(
        powers in prop::collection::vec(1.0f64..3000.0, 1..=10),
        p_agg in 0.0f64..8000.0,
    ) {
        let s = co_disaggregate(p_agg, &powers).unwrap();
        let r = (p_agg - aggregate(&s, &powers).unwrap()).abs();
        let n = powers.len();
        for mask in 0..1usize << n {
            let sum: f64 = (0..n).filter(|i| mask >> i & 1 == 1).map(|i| powers[i]).sum();
            prop_assert!(r <= (p_agg - sum).abs());
        }
    }
}
