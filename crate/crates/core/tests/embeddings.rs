use framekit_core::embeddings::*;
use framekit_core::frames::Frame;
use framekit_core::gallery;
use framekit_core::linalg::{dot, random_orthogonal, random_unit_vector, sorted_symmetric_eigen};
use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

// Displayed closed forms of the second and third embedding dimensions.
fn d2_closed(m: u128) -> u128 {
    (m * m + m + 2) * (m * m + m - 4) / 8
}

fn d3_closed(m: u128) -> u128 {
    let p = (m - 1) * m * (m + 1) * (m + 2);
    (p + 8) * (p - 16) / 128
}

#[test]
fn dimension_recursion_matches_closed_forms() {
    for m in 2..=12usize {
        assert_eq!(embedding_dimension(2, m).unwrap(), d2_closed(m as u128), "m={m}");
        assert_eq!(embedding_dimension(3, m).unwrap(), d3_closed(m as u128), "m={m}");
    }
    assert_eq!(d2_closed(4), 44);
    assert_eq!(d3_closed(2), 2);
}

#[test]
fn q1_inner_product_identity() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for m in 2..=8 {
        for _ in 0..1000 {
            let x = random_unit_vector(m, &mut rng);
            let y = random_unit_vector(m, &mut rng);
            let (qx, qy) = (q1_embed(&x).unwrap(), q1_embed(&y).unwrap());
            let c = dot(&x, &y);
            assert!((qx.inner(&qy) - (c * c - 1.0 / m as f64)).abs() <= 1e-10);
        }
    }
}

#[test]
fn q1_image_invariants() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for m in 2..=8 {
        let x = random_unit_vector(m, &mut rng);
        let q = q1_embed(&x).unwrap();
        assert!(q.trace().abs() <= 1e-12);
        assert!((q.norm_sq() - (m as f64 - 1.0) / m as f64).abs() <= 1e-10);
        let p = &q.matrix + DMatrix::<f64>::identity(m, m) / m as f64;
        let (vals, _) = sorted_symmetric_eigen(&p);
        assert!((vals[0] - 1.0).abs() <= 1e-8);
        assert!(vals[1..].iter().all(|v| v.abs() <= 1e-8));
    }
}

#[test]
fn k2_trace_and_norm() {
    for m in 2..=8 {
        let k = k2_analytic(m).unwrap();
        assert!((k.trace() - 1.0).abs() <= 1e-12);
        assert!((k.norm_sq() - k.a).abs() <= 1e-12);
        let mf = m as f64;
        assert!((mf * k.a + mf * (mf - 1.0) * k.b - 1.0).abs() <= 1e-12);
        assert!((mf * k.a * k.a + 3.0 * mf * (mf - 1.0) * k.b * k.b - k.a).abs() <= 1e-12);
        // fourth moment of a uniform unit vector: E[w_1^4] = 3/(m(m+2))
        assert!((k.a - 3.0 / (mf * (mf + 2.0))).abs() <= 1e-15);
    }
}

#[test]
fn k2_operator_is_symmetric_and_rotation_invariant() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for m in 2..=5 {
        let k = k2_analytic(m).unwrap().to_operator(MEM_GUARD).unwrap();
        assert!((&k - k.transpose()).amax() <= 1e-15);
        for _ in 0..5 {
            let u = random_orthogonal(m, &mut rng);
            let uu = u.kronecker(&u);
            let rotated = &uu * &k * uu.transpose();
            assert!((rotated - &k).amax() <= 1e-9, "m={m}");
        }
    }
}

#[test]
fn k2_densify_respects_guard() {
    let k = k2_analytic(8).unwrap();
    assert!(matches!(k.to_operator(1024), Err(framekit_core::Error::MemoryGuard { .. })));
    assert_eq!(k.to_flat(MEM_GUARD).unwrap().len(), 4096);
}

#[test]
fn q2_norm_orthogonality_and_trace() {
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    for m in 2..=6 {
        let k = k2_analytic(m).unwrap();
        let mf = m as f64;
        let a = 3.0 / (mf * (mf + 2.0));
        let want = 1.0 - 2.0 / mf + 2.0 / (mf * mf) - a;
        for _ in 0..1000 {
            let x = random_unit_vector(m, &mut rng);
            let q2 = q2_embed(&x, &k).unwrap();
            assert!((q2.norm_sq() - want).abs() <= 1e-10);
            assert!(q2.inner_with_variance(&k).abs() <= 1e-10);
            assert!(q2.total_trace().abs() <= 1e-10);
            let q1 = q1_embed(&x).unwrap();
            assert!((k.contract_q1(&q1) - (a - 1.0 / (mf * mf))).abs() <= 1e-10);
        }
    }
}

#[test]
fn q2_in_r3_has_norm_16_over_45() {
    let k = k2_analytic(3).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(15);
    let x = random_unit_vector(3, &mut rng);
    assert!((q2_embed(&x, &k).unwrap().norm_sq() - 16.0 / 45.0).abs() <= 1e-12);
    assert!((q2_norm_sq(&k) - 16.0 / 45.0).abs() <= 1e-15);
}

#[test]
fn closed_form_examples() {
    let s5 = 5f64.sqrt();
    assert!((embedded_inner_closed_form(0.5, 4) + 0.125).abs() <= 1e-14);
    assert!((embedded_inner_closed_form(1.0 / s5, 3) + 0.2).abs() <= 1e-14);
    assert!((embedded_inner_closed_form(1.0 / 3.0, 3) + 1.0 / 9.0).abs() <= 1e-14);
    for c2 in [(5.0 - 2.0 * s5) / 15.0, (5.0 + 2.0 * s5) / 15.0] {
        assert!(embedded_inner_closed_form(c2.sqrt(), 3).abs() <= 1e-14);
    }
    assert!((embedded_inner_closed_form(0.0, 8) + 1.0 / 119.0).abs() <= 1e-14);
    assert!((embedded_inner_closed_form(0.5, 8) + 1.0 / 119.0).abs() <= 1e-14);
}

#[test]
fn polynomial_decreases_then_increases() {
    for m in 2..=10 {
        let knee = 1.0 / m as f64;
        let h = 1e-6;
        for i in 1..200 {
            let x = 2.0 * i as f64 / 200.0;
            let slope = (level2_polynomial(x + h, m) - level2_polynomial(x - h, m)) / (2.0 * h);
            if x < knee - 2.0 * h {
                assert!(slope < 0.0, "m={m} x={x}");
            } else if x > knee + 2.0 * h {
                assert!(slope > 0.0, "m={m} x={x}");
            }
        }
    }
}

#[test]
fn closed_form_and_tensor_grams_agree() {
    let opts = EmbedOptions::default();
    for seed in 0..30u64 {
        let m = 2 + (seed as usize % 5);
        let n = 5 + (seed as usize * 7) % 36;
        let f = gallery::random(m, n, seed).unwrap().frame;
        for level in [Level::First, Level::Second] {
            let a = embedded_gram(&f, level, GramMethod::ClosedForm, &opts).unwrap();
            let b = embedded_gram(&f, level, GramMethod::Tensor, &opts).unwrap();
            assert!((a.matrix - b.matrix).amax() <= 1e-9, "seed={seed} level={level:?}");
        }
    }
}

#[test]
fn tensor_method_respects_guard() {
    let f = gallery::e8_120().unwrap().frame;
    let opts = EmbedOptions { mem_guard: 1 << 20, ..EmbedOptions::default() };
    assert!(matches!(
        embedded_gram(&f, Level::Second, GramMethod::Tensor, &opts),
        Err(framekit_core::Error::MemoryGuard { .. })
    ));
    assert!(embedded_gram(&f, Level::Second, GramMethod::ClosedForm, &opts).is_ok());
}

#[test]
fn e8_level_two_is_a_regular_simplex() {
    let f = gallery::e8_120().unwrap().frame;
    for method in [GramMethod::ClosedForm, GramMethod::Tensor] {
        let eg = embedded_gram(&f, Level::Second, method, &EmbedOptions::default()).unwrap();
        assert!(eg.simplex_deviation() <= 1e-9, "{method:?}");
        assert_eq!(eg.rank, 119);
        assert!(eg.is_psd(1e-8));
    }
}

#[test]
fn e8_coordinates() {
    let f = gallery::e8_120().unwrap().frame;
    let eg = embedded_gram(&f, Level::Second, GramMethod::ClosedForm, &EmbedOptions::default()).unwrap();
    let rows = embed_coordinates(&eg, 8, RANK_TOL).unwrap();
    assert_eq!(rows.len(), 120);
    assert!(rows.iter().all(|r| r.len() == 629));
    for j in 0..120 {
        assert!((dot(&rows[j], &rows[j]) - 1.0).abs() <= 1e-12);
        for l in j + 1..120 {
            assert!((dot(&rows[j], &rows[l]) + 1.0 / 119.0).abs() <= 1e-8);
        }
    }
}

#[test]
fn pentakis_coordinates_fit_in_r14() {
    let f = gallery::pentakis16().unwrap().frame;
    let eg = embedded_gram(&f, Level::Second, GramMethod::ClosedForm, &EmbedOptions::default()).unwrap();
    assert!(eg.rank <= 14);
    let rows = embed_coordinates(&eg, 3, RANK_TOL).unwrap();
    assert!(rows.iter().all(|r| r.len() == 14));
    let rebuilt = DMatrix::from_fn(16, 16, |j, l| dot(&rows[j], &rows[l]));
    assert!((rebuilt - &eg.matrix).amax() <= 1e-8);
}

#[test]
fn orthonormal_basis_level_one_is_a_simplex() {
    for m in 2..=7 {
        let vectors = (0..m)
            .map(|i| (0..m).map(|k| if i == k { 1.0 } else { 0.0 }).collect())
            .collect();
        let f = Frame::from_unit_vectors(m, vectors).unwrap();
        let eg = embedded_gram(&f, Level::First, GramMethod::Tensor, &EmbedOptions::default()).unwrap();
        for j in 0..m {
            for l in j + 1..m {
                assert!((eg.matrix[(j, l)] + 1.0 / (m as f64 - 1.0)).abs() <= 1e-12);
            }
        }
        assert!(eg.rank as u128 <= embedding_dimension(1, m).unwrap());
    }
}

#[test]
fn mub_level_two_pattern() {
    let f = gallery::mub_r4().unwrap().frame;
    let eg = embedded_gram(&f, Level::Second, GramMethod::Tensor, &EmbedOptions::default()).unwrap();
    for j in 0..12 {
        let mut cross = Vec::new();
        for l in 0..12 {
            if l == j {
                continue;
            }
            let v = eg.matrix[(j, l)];
            if j / 4 == l / 4 {
                assert!(v.abs() <= 1e-10);
            } else {
                assert!((v + 0.125).abs() <= 1e-10);
                cross.push(v);
            }
        }
        // the vector and its 8 cross-basis partners: a 9-simplex vertex pattern
        assert_eq!(cross.len(), 8);
        assert!(cross.iter().all(|v| (v + 1.0 / 8.0).abs() <= 1e-10));
    }
}

#[test]
fn embedded_gram_rank_within_dimension() {
    for seed in 0..10u64 {
        let f = gallery::random(3, 40, seed).unwrap().frame;
        for level in [Level::First, Level::Second] {
            let eg = embedded_gram(&f, level, GramMethod::ClosedForm, &EmbedOptions::default()).unwrap();
            assert!(eg.rank as u128 <= embedding_dimension(level.index(), 3).unwrap());
            assert!(eg.is_psd(1e-8));
        }
    }
}
