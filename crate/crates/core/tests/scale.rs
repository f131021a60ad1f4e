use impulse_dividend::model::characteristic_roots;
use impulse_dividend::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn base() -> Scale {
    Scale::new(Params::new(0.1, 0.1, 0.5, 0.5, 1.0, 0.05, 0.5).unwrap()).unwrap()
}

fn random_contexts(seed: u64, n: usize) -> Vec<Scale> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    while out.len() < n {
        let p = Params::new(
            rng.random_range(-1.5..1.5),
            rng.random_range(0.1..1.5),
            rng.random_range(-1.5..1.5),
            rng.random_range(0.1..1.5),
            rng.random_range(0.1..4.0),
            rng.random_range(0.02..1.0),
            rng.random_range(0.05..1.0),
        )
        .unwrap();
        if let Ok(ctx) = Scale::new(p) {
            out.push(ctx);
        }
    }
    out
}

#[test]
fn vanishes_at_origin() {
    for ctx in random_contexts(1, 100) {
        assert!(ctx.g(0.0).abs() <= 1e-12, "{:?}", ctx.params);
    }
}

#[test]
fn derivative_is_positive() {
    for ctx in random_contexts(2, 100) {
        let top = (3.0 * ctx.a() + 5.0).min(ctx.x_max());
        for i in 0..=500 {
            let x = top * i as f64 / 500.0;
            assert!(ctx.g_prime(x) > 0.0, "{:?} at {x}", ctx.params);
        }
    }
}

#[test]
fn solves_the_generator_equation() {
    for ctx in random_contexts(3, 100) {
        let a = ctx.a();
        let top = (3.0 * a).min(ctx.x_max());
        for i in 1..200 {
            let x = top * i as f64 / 200.0;
            if (x - a).abs() < 1e-9 {
                continue;
            }
            let side = if x > a { Side::Right } else { Side::Left };
            let (f, df, d2f) = (ctx.g(x), ctx.g_prime(x), ctx.g_double_prime_sided(x, side));
            let res = ctx.generator_residual(x, f, df, d2f);
            let p = ctx.params;
            let s = p.volatility(x);
            let size = (p.q * f).abs().max((p.drift(x) * df).abs()).max((0.5 * s * s * d2f).abs());
            assert!(res.abs() <= 1e-10 * size, "{:?} at {x}: {res} vs {size}", p);
        }
    }
}

#[test]
fn pasting_at_threshold() {
    for ctx in random_contexts(4, 100) {
        let a = ctx.a();
        let (l, r) = (ctx.g_sided(a, Side::Left), ctx.g_sided(a, Side::Right));
        assert!((l - r).abs() <= 1e-10 * l.abs().max(1.0), "{:?}", ctx.params);
        let (l, r) = (ctx.g_prime_sided(a, Side::Left), ctx.g_prime_sided(a, Side::Right));
        assert!((l - r).abs() <= 1e-10 * l.abs().max(1.0), "{:?}", ctx.params);
    }
}

#[test]
fn plus_minus_functions_equal_one_at_threshold() {
    let ctx = base();
    let (gm, gp) = (ctx.g_minus(ctx.a()), ctx.g_plus(ctx.a()));
    assert!((gm - 1.0).abs() < 1e-14 && (gp - 1.0).abs() < 1e-14);
}

#[test]
fn log_derivative_agrees() {
    for ctx in random_contexts(5, 50) {
        for x in [0.0, 0.3 * ctx.a(), ctx.a(), 2.0 * ctx.a() + 1.0] {
            let d = ctx.g_prime(x);
            assert!((ctx.ln_g_prime(x) - d.ln()).abs() < 1e-12 * (1.0 + d.ln().abs()));
        }
    }
}

fn homogeneous_exit(mu: f64, sigma: f64, q: f64, x: f64, y: f64, z: f64) -> (f64, f64) {
    let (t1, t2) = characteristic_roots(mu, sigma, q);
    let up = |w: f64| (t2 * (w - y)).exp() - (-t1 * (w - y)).exp();
    let down = |w: f64| (t2 * (w - z)).exp() - (-t1 * (w - z)).exp();
    (down(x) / down(y), up(x) / up(z))
}

#[test]
fn exit_functionals_match_homogeneous_closed_form() {
    let (mu, sigma, q) = (0.3, 0.7, 0.2);
    let ctx = Scale::new(Params::new(mu, sigma, mu, sigma, 1.3, q, 0.5).unwrap()).unwrap();
    for (x, y, z) in [(0.5, 0.0, 1.0), (1.0, 0.2, 2.5), (2.0, 1.5, 4.0), (1.3, 1.0, 1.6)] {
        let (d, u) = homogeneous_exit(mu, sigma, q, x, y, z);
        assert!((ctx.exit_down(x, y, z).unwrap() - d).abs() < 1e-12, "{x} {y} {z}");
        assert!((ctx.exit_up(x, y, z).unwrap() - u).abs() < 1e-12, "{x} {y} {z}");
    }
}

#[test]
fn exit_functionals_endpoints_and_bounds() {
    for ctx in random_contexts(6, 50) {
        let a = ctx.a();
        let (y, z) = (0.3 * a, (1.8 * a).min(ctx.x_max()));
        assert!((ctx.exit_down(y, y, z).unwrap() - 1.0).abs() < 1e-12);
        assert!(ctx.exit_down(z, y, z).unwrap().abs() < 1e-12);
        assert!(ctx.exit_up(y, y, z).unwrap().abs() < 1e-12);
        assert!((ctx.exit_up(z, y, z).unwrap() - 1.0).abs() < 1e-12);
        let mut prev = (f64::INFINITY, f64::NEG_INFINITY);
        for i in 0..=50 {
            let x = (y + (z - y) * i as f64 / 50.0).min(z);
            let (d, u) = (ctx.exit_down(x, y, z).unwrap(), ctx.exit_up(x, y, z).unwrap());
            assert!(d <= prev.0 + 1e-12 && u >= prev.1 - 1e-12);
            assert!(d >= -1e-12 && u >= -1e-12 && d + u <= 1.0 + 1e-12, "{:?} {x}", ctx.params);
            prev = (d, u);
        }
    }
}

#[test]
fn exit_functionals_reject_bad_order() {
    let ctx = base();
    assert!(ctx.exit_down(2.0, 0.0, 1.0).is_err());
    assert!(ctx.exit_up(0.5, 1.0, 1.0).is_err());
}

#[test]
fn upper_bound_exceeds_surplus() {
    let p = Params::new(0.1, 0.1, 0.5, 0.5, 1.0, 0.05, 0.5).unwrap();
    for x in [0.0, 1.0, 10.0] {
        assert!(value_upper_bound(&p, x) > x);
    }
}

#[test]
fn rejects_parameters_beyond_float_range() {
    let p = Params::new(0.5, 0.5, -1.58, 0.12, 7.35, 0.3, 0.5).unwrap();
    assert!(matches!(Scale::new(p), Err(Error::InvalidParameter { .. })));
}

#[test]
fn single_precision_context() {
    let p: model::ModelParams<f32> = Params::new(0.1, 0.1, 0.5, 0.5, 1.0, 0.05, 0.5).unwrap().cast();
    let ctx = scale::ScaleContext::new(p).unwrap();
    let ctx64 = base();
    assert_eq!(ctx.g(0.0), 0.0);
    for x in [0.5f32, 1.0, 2.0] {
        let rel = ((ctx.g(x) as f64) - ctx64.g(x as f64)).abs() / ctx64.g(x as f64);
        assert!(rel < 1e-4, "{x}: {rel}");
    }
}
