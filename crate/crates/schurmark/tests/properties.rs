//! Property tests for the library-wide invariants: attacks preserve shape
//! and determinism, codecs roundtrip bit-exactly, the transform pair is an
//! isometry, and the float watermark pipeline is lossless.

use proptest::prelude::*;
use schurmark::attack::{Attack, AttackSpec};
use schurmark::dct::DctPlan;
use schurmark::gray::GrayImage;
use schurmark::key::{decode_key, encode_key, encode_key_json};
use schurmark::matrix::Matrix;
use schurmark::metrics::{correlation, mse, psnr, MetricsError};
use schurmark::pgm::{decode_pgm, encode_pgm};
use schurmark::watermark::{embed_float, extract_float, AlphaSchedule, WatermarkKey};

fn image_strategy(max_side: usize) -> impl Strategy<Value = GrayImage> {
    (1..=max_side, 1..=max_side).prop_flat_map(|(w, h)| {
        prop::collection::vec(any::<u8>(), w * h)
            .prop_map(move |px| GrayImage::new(w, h, px).unwrap())
    })
}

fn image_pair_strategy(max_side: usize) -> impl Strategy<Value = (GrayImage, GrayImage)> {
    (1..=max_side, 1..=max_side).prop_flat_map(|(w, h)| {
        (prop::collection::vec(any::<u8>(), w * h), prop::collection::vec(any::<u8>(), w * h))
            .prop_map(move |(a, b)| {
                (GrayImage::new(w, h, a).unwrap(), GrayImage::new(w, h, b).unwrap())
            })
    })
}

fn attack_strategy() -> impl Strategy<Value = Attack> {
    prop_oneof![
        (1u32..=100).prop_map(|qf| Attack::Jpeg { qf }),
        (0.0..0.1f64, any::<u64>())
            .prop_map(|(variance, seed)| Attack::GaussianNoise { variance, seed }),
        (0.0..1.0f64, any::<u64>())
            .prop_map(|(density, seed)| Attack::SaltPepper { density, seed }),
        prop_oneof![Just(3usize), Just(5), Just(7)].prop_map(|window| Attack::Median { window }),
        Just(Attack::HistEq),
        (1usize..=8).prop_map(|border| Attack::CropBorder { border }),
        (-30.0..30.0f64).prop_map(|degrees| Attack::Rotate { degrees }),
        (2u32..=256).prop_map(|levels| Attack::ColorReduce { levels }),
    ]
}

fn matrix_strategy(max_side: usize, scale: f64) -> impl Strategy<Value = Matrix> {
    (1..=max_side).prop_flat_map(move |n| {
        prop::collection::vec(-scale..scale, n * n)
            .prop_map(move |data| Matrix::from_vec(n, n, data).unwrap())
    })
}

proptest! {
    #[test]
    fn attacks_preserve_dimensions_and_are_deterministic(
        img in image_strategy(24),
        atk in attack_strategy(),
    ) {
        match atk.apply(&img) {
            Ok(out) => {
                prop_assert_eq!(out.width(), img.width());
                prop_assert_eq!(out.height(), img.height());
                let again = atk.apply(&img).unwrap();
                prop_assert_eq!(out, again);
            }
            // Cropping is the only attack allowed to reject a valid image,
            // when the border would swallow it.
            Err(e) => prop_assert!(matches!(atk, Attack::CropBorder { .. }), "{}", e),
        }
    }

    #[test]
    fn attack_specs_roundtrip_through_json(atk in attack_strategy()) {
        let spec = atk.to_spec();
        let json = serde_json::to_string(&spec).unwrap();
        prop_assert!(json.contains("\"seed\""), "seed must always be serialized: {}", json);
        let back: AttackSpec = serde_json::from_str(&json).unwrap();
        let reborn = Attack::from_spec(&back).unwrap();
        prop_assert_eq!(atk, reborn);
    }

    #[test]
    fn correlation_is_bounded_and_symmetric((a, b) in image_pair_strategy(16)) {
        match correlation(&a, &b) {
            Ok(c) => {
                prop_assert!((-1.0..=1.0).contains(&c), "corr {}", c);
                let c2 = correlation(&b, &a).unwrap();
                prop_assert!((c - c2).abs() < 1e-12);
            }
            Err(MetricsError::DegenerateInput) => {}
            Err(e) => return Err(TestCaseError::fail(e.to_string())),
        }
    }

    #[test]
    fn mse_is_a_symmetric_distance((a, b) in image_pair_strategy(16)) {
        let d = mse(&a, &b).unwrap();
        prop_assert!(d >= 0.0);
        prop_assert_eq!(d, mse(&b, &a).unwrap());
        prop_assert_eq!(mse(&a, &a).unwrap(), 0.0);
        prop_assert_eq!(psnr(&a, &a).unwrap(), f64::INFINITY);
        if a != b {
            prop_assert!(psnr(&a, &b).unwrap() >= 0.0);
        }
    }

    #[test]
    fn dct_is_an_isometry(m in matrix_strategy(24, 255.0)) {
        let plan = DctPlan::new(m.rows()).unwrap();
        let fwd = plan.dct2(&m).unwrap();
        let back = plan.idct2(&fwd).unwrap();
        prop_assert!(back.max_abs_diff(&m).unwrap() <= 1e-9);
        let energy = |x: &Matrix| x.data().iter().map(|v| v * v).sum::<f64>();
        let (ep, ec) = (energy(&m), energy(&fwd));
        prop_assert!((ep - ec).abs() <= 1e-12 * (1.0 + ep));
    }

    #[test]
    fn histeq_preserves_pixel_order(img in image_strategy(24)) {
        let out = Attack::HistEq.apply(&img).unwrap();
        let mut map: [Option<u8>; 256] = [None; 256];
        for (i, &v) in img.pixels().iter().enumerate() {
            match map[v as usize] {
                None => map[v as usize] = Some(out.pixels()[i]),
                Some(prev) => prop_assert_eq!(prev, out.pixels()[i], "remap not a function"),
            }
        }
        let mut last = None;
        for mapped in map.iter().flatten() {
            if let Some(prev) = last {
                prop_assert!(mapped >= prev, "remap not monotone");
            }
            last = Some(mapped);
        }
    }

    #[test]
    fn quantization_is_a_fixed_point_on_integral_images(img in image_strategy(16)) {
        let back = GrayImage::from_matrix(&img.to_matrix()).unwrap();
        prop_assert_eq!(back, img);
    }

    #[test]
    fn pgm_encoding_roundtrips(img in image_strategy(24)) {
        let bytes = encode_pgm(&img);
        let back = decode_pgm(&bytes).unwrap();
        prop_assert_eq!(back, img);
    }

    #[test]
    fn key_codecs_roundtrip_bit_exactly(
        seed_matrix in matrix_strategy(10, 1.0),
        host in matrix_strategy(10, 255.0),
        base in 0.05..2.0f64,
        dc in 0.005..0.2f64,
    ) {
        let n = seed_matrix.rows();
        prop_assume!(n >= 2);
        let host = if host.rows() == n {
            host
        } else {
            Matrix::zeros(n, n)
        };
        let factors = schurmark::schur_decompose(&seed_matrix).unwrap();
        let plan = DctPlan::new(n).unwrap();
        let i_dct = plan.dct2(&host).unwrap();
        let alpha = AlphaSchedule::new(base, dc).unwrap();
        let key = WatermarkKey::new(factors.u, i_dct, alpha).unwrap();
        for bytes in [encode_key(&key), encode_key_json(&key).into_bytes()] {
            let back = decode_key(&bytes).unwrap();
            prop_assert_eq!(back.n(), key.n());
            prop_assert_eq!(back.u_w().data(), key.u_w().data());
            prop_assert_eq!(back.i_dct().data(), key.i_dct().data());
            prop_assert_eq!(back.alpha(), key.alpha());
        }
    }

    #[test]
    fn float_watermark_pipeline_is_lossless(
        host in matrix_strategy(12, 255.0),
        seed in any::<u64>(),
        base in 0.05..2.0f64,
    ) {
        let n = host.rows();
        prop_assume!(n >= 2);
        let mark = {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let data: Vec<f64> = (0..n * n).map(|_| rng.gen_range(0.0..255.0)).collect();
            Matrix::from_vec(n, n, data).unwrap()
        };
        let alpha = AlphaSchedule::new(base, base / 10.0).unwrap();
        let (wm, key) = embed_float(&host, &mark, alpha).unwrap();
        let est = extract_float(&wm, &key).unwrap();
        prop_assert!(est.max_abs_diff(&mark).unwrap() <= 1e-6);
    }
}
