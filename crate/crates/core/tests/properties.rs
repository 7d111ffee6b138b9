use std::f64::consts::PI;

use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use torsionlab::hodge_core::{
    betti, coboundary, codifferential, laplacian, laplacian_spectrum, tr_log, ChainMetric,
};
use torsionlab::torsion_engine::{
    classify_beta, determinant_oracle, gamma_rank, log_reidemeister, BetaWeight, ExponentialPath,
    MetricPath,
};
use torsionlab::twisted_complex::{
    build_twisted_boundary, rotation, subdivided_circle_cells, torus_cells, GroupWord, Preset,
    Representation, TwistedComplex,
};
use torsionlab::verify::{
    random_acyclic_complex, random_metric, random_spd, random_symmetric_generators,
};
use torsionlab::zeta::{mellin_zeta, theta_expansion, HeatTrace, ModelFactor, SpectralFactor};

fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0, |a, x| a.max(x.abs()))
}

fn angle() -> impl Strategy<Value = f64> {
    0.2..(2.0 * PI - 0.2)
}

fn word() -> impl Strategy<Value = Vec<(usize, i8)>> {
    prop::collection::vec((0usize..2, prop::bool::ANY.prop_map(|b| if b { 1i8 } else { -1 })), 0..8)
}

fn acyclic_complex() -> impl Strategy<Value = TwistedComplex> {
    prop_oneof![
        (1usize..5, angle()).prop_map(|(m, t)| {
            build_twisted_boundary(&subdivided_circle_cells(m).unwrap(), &Representation::rotations(&[t])).unwrap()
        }),
        (angle(), angle()).prop_map(|(a, b)| Preset::Torus2 { alpha: a, beta: b }.complex().unwrap()),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn words_map_homomorphically(u in word(), v in word(), a in angle(), b in angle()) {
        let rho = Representation::new(
            2,
            vec![
                rotation(a),
                // a reflection makes the image non-abelian
                DMatrix::from_row_slice(2, 2, &[b.cos(), b.sin(), b.sin(), -b.cos()]),
            ],
        )
        .unwrap();
        let wu = GroupWord::from_pairs(&u).unwrap();
        let wv = GroupWord::from_pairs(&v).unwrap();
        let joint = rho.evaluate(&wu.concat(&wv)).unwrap();
        let product = rho.evaluate(&wu).unwrap() * rho.evaluate(&wv).unwrap();
        prop_assert!(max_abs(&(joint - product)) < 1e-12);
        let inverse = rho.evaluate(&wu.inverse()).unwrap();
        prop_assert!(max_abs(&(inverse - rho.evaluate(&wu).unwrap().transpose())) < 1e-12);
    }

    #[test]
    fn boundary_squares_to_zero(a in angle(), b in angle(), c in angle()) {
        // rotations about a common tilted axis commute
        let mut q = DMatrix::identity(3, 3);
        q.view_mut((1, 1), (2, 2)).copy_from(&rotation(c));
        let r3 = |t: f64| {
            let mut m = DMatrix::identity(3, 3);
            m.view_mut((0, 0), (2, 2)).copy_from(&rotation(t));
            &q * m * q.transpose()
        };
        let rho = Representation::new(3, vec![r3(a), r3(b)]).unwrap();
        let complex = build_twisted_boundary(&torus_cells(), &rho).unwrap();
        let dd = complex.boundary(1) * complex.boundary(2);
        prop_assert!(max_abs(&dd) <= 1e-12 * (1.0 + max_abs(complex.boundary(1)) * max_abs(complex.boundary(2))));
    }

    #[test]
    fn laplacian_formula_matches_oracle(complex in acyclic_complex()) {
        let metric = ChainMetric::identity(&complex);
        let lap = log_reidemeister(&complex, &metric).unwrap();
        let oracle = determinant_oracle(&complex).unwrap();
        prop_assert!((lap - oracle).abs() < 1e-8, "{lap} vs {oracle}");
    }

    #[test]
    fn degreewise_rescaling_shifts_torsion(complex in acyclic_complex(), c0 in 0.3f64..3.0, c1 in 0.3f64..3.0, c2 in 0.3f64..3.0) {
        // with h_k = c_k I the coboundary d_j has rank r_j and contributes
        // r_j log(c_(j+1) / c_j) to both adjacent Laplacians, which telescopes to
        // a shift of sum_j (-1)^j r_j log(c_(j+1) / c_j) / 2
        let n = complex.dimension();
        let scales = [c0, c1, c2];
        let blocks = (0..=n).map(|k| DMatrix::identity(complex.chain_dim(k), complex.chain_dim(k)) * scales[k]).collect();
        let scaled = ChainMetric::new(blocks).unwrap();
        let base = log_reidemeister(&complex, &ChainMetric::identity(&complex)).unwrap();
        let moved = log_reidemeister(&complex, &scaled).unwrap();
        let mut shift = 0.0;
        let mut previous = 0usize;
        for j in 0..n {
            let r = complex.chain_dim(j) - previous;
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            shift += 0.5 * sign * r as f64 * (scales[j + 1] / scales[j]).ln();
            previous = r;
        }
        prop_assert!((moved - base - shift).abs() < 1e-9, "{moved} - {base} vs {shift}");
    }

    #[test]
    fn betti_numbers_ignore_the_metric(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let complex = build_twisted_boundary(&torus_cells(), &Representation::trivial(2, 2)).unwrap();
        let reference = betti(&complex, &ChainMetric::identity(&complex)).unwrap();
        prop_assert_eq!(&reference, &vec![2, 4, 2]);
        for _ in 0..10 {
            let m = random_metric(&complex, &mut rng).unwrap();
            prop_assert_eq!(&betti(&complex, &m).unwrap(), &reference);
        }
    }

    #[test]
    fn linear_weights_satisfy_the_recurrence(n in 0usize..8, l in -10.0f64..10.0, m in -10.0f64..10.0) {
        let c = classify_beta(&BetaWeight::linear(n, l, m));
        prop_assert!(c.satisfies_recurrence);
        prop_assert!((c.lambda - l).abs() < 1e-12);
        if n >= 1 {
            prop_assert!((c.mu - m).abs() < 1e-12);
        }
    }

    #[test]
    fn curved_weights_fail_the_recurrence(n in 2usize..8, l in -3.0f64..3.0, m in -3.0f64..3.0, bump in 0.01f64..2.0, at in 0usize..8) {
        let mut beta = BetaWeight::linear(n, l, m);
        beta.0[at % (n + 1)] += bump;
        prop_assert!(!classify_beta(&beta).satisfies_recurrence);
    }

    #[test]
    fn coboundary_intertwines_laplacians(complex in acyclic_complex(), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let metric = random_metric(&complex, &mut rng).unwrap();
        for k in 0..complex.dimension() {
            let d = coboundary(&complex, k);
            let delta = codifferential(&complex, &metric, k);
            let lk = laplacian(&complex, &metric, k).unwrap();
            let lnext = laplacian(&complex, &metric, k + 1).unwrap();
            let scale = 1.0 + max_abs(&lk) + max_abs(&lnext);
            prop_assert!(max_abs(&(&d * &lk - &lnext * &d)) < 1e-10 * scale * scale);
            prop_assert!(max_abs(&(&lk * &delta - &delta * &lnext)) < 1e-10 * scale * scale);
        }
    }

    #[test]
    fn log_trace_is_log_determinant(complex in acyclic_complex(), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let metric = random_metric(&complex, &mut rng).unwrap();
        for k in 0..=complex.dimension() {
            let spec = laplacian_spectrum(&complex, &metric, k).unwrap();
            let t = tr_log(&spec, true).unwrap();
            // h Delta is SPD, so log det Delta = log det (h Delta) - log det h
            let h = metric.block(k);
            let hd = h * laplacian(&complex, &metric, k).unwrap();
            let hd = (&hd + hd.transpose()) * 0.5;
            let logdet = |m: DMatrix<f64>| -> f64 {
                let l = m.cholesky().expect("SPD").l();
                2.0 * l.diagonal().iter().map(|x| x.ln()).sum::<f64>()
            };
            let expected = logdet(hd) - logdet(h.clone());
            prop_assert!((t - expected).abs() < 1e-9 * (1.0 + expected.abs()), "{t} vs {expected}");
        }
    }

    #[test]
    fn euler_poincare(complex in acyclic_complex()) {
        // acyclic complexes have chain Euler characteristic zero
        prop_assert_eq!(complex.chain_euler_characteristic(), 0);
    }

    #[test]
    fn split_point_consistency(l in 0.3f64..8.0, r in 0.3f64..5.0, theta in 0.0f64..(2.0 * PI)) {
        for h in [
            HeatTrace::circle(l, theta),
            theta_expansion(ModelFactor::Dirichlet(r)),
            theta_expansion(ModelFactor::Neumann(r)),
            HeatTrace::factor(SpectralFactor::mixed(r)),
            theta_expansion(ModelFactor::Lattice(2, l)),
            theta_expansion(ModelFactor::Neumann(r)).product(&HeatTrace::circle(l, 0.0)),
        ] {
            for t in [0.05, 0.5, 1.0, 3.0] {
                prop_assert!(h.split_residual(t) < 1e-10 * (1.0 + h.trace(t).abs()));
            }
        }
    }

    #[test]
    fn mellin_matches_direct_sum(l in 0.5f64..6.0) {
        // circle: sum over m != 0 of (2 pi m / l)^(-6); the tail beyond M is
        // bounded by 2 (l / 2 pi)^6 / (5 M^5)
        let h = theta_expansion(ModelFactor::Circle(l));
        let z = mellin_zeta(&h, 3.0).unwrap();
        let c = (l / (2.0 * PI)).powi(6);
        let m_max = 2000;
        let direct: f64 = (1..=m_max).map(|m| 2.0 * c / (m as f64).powi(6)).sum();
        let bound = 2.0 * c / (5.0 * (m_max as f64).powi(5));
        prop_assert!((z.value - direct).abs() < 1e-9 + bound);
    }
}

#[test]
fn random_acyclic_complexes_match_the_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..50 {
        let c = random_acyclic_complex(&mut rng).unwrap();
        let lap = log_reidemeister(&c, &ChainMetric::identity(&c)).unwrap();
        assert!((lap - determinant_oracle(&c).unwrap()).abs() < 1e-8);
    }
}

#[test]
fn random_spd_is_positive() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for n in 1..6 {
        let m = random_spd(n, &mut rng);
        assert!(m.cholesky().is_some());
    }
}

#[test]
fn gamma_vector_has_full_rank_over_random_paths() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let complex = Preset::Torus2 { alpha: 1.0, beta: 0.3 }.complex().unwrap();
    let paths: Vec<ExponentialPath> = (0..4)
        .map(|_| {
            let base = random_metric(&complex, &mut rng).unwrap();
            ExponentialPath::new(&base, random_symmetric_generators(&complex, &mut rng)).unwrap()
        })
        .collect();
    let refs: Vec<&dyn MetricPath> = paths.iter().map(|p| p as &dyn MetricPath).collect();
    assert_eq!(gamma_rank(&complex, &refs, 0.0, 1e-4).unwrap(), 1);
}
