use feynparts::cylinder::CylinderFunctional;
use feynparts::feynman::feynman_integral;
use feynparts::gfft::gfft;
use feynparts::l2::{inner_product, L2Fn, OrthogonalSet};
use feynparts::paths::{fill_increments, Grid};
use feynparts::theorems::{draw, random_kernel, run_suite, SuiteConfig};
use feynparts::C64;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn close(a: C64, b: C64, tol: f64) -> bool {
    (a - b).norm() <= tol * (1.0 + a.norm().max(b.norm()))
}

fn kernel(seed: u64, n: usize) -> feynparts::gauss_poly::GaussPolyFn {
    random_kernel(&mut ChaCha8Rng::seed_from_u64(seed), n).unwrap()
}

fn coeffs() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-3.0..3.0f64, 1..5)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn inner_product_is_symmetric_and_bilinear(a in coeffs(), b in coeffs(), c in coeffs(), s in -2.0..2.0f64) {
        let (u, v, w) = (L2Fn::poly(1.0, &a).unwrap(), L2Fn::poly(1.0, &b).unwrap(), L2Fn::poly(1.0, &c).unwrap());
        let uv = inner_product(&u, &v).unwrap();
        prop_assert!((uv - inner_product(&v, &u).unwrap()).abs() <= 1e-12 * (1.0 + uv.abs()));
        let lhs = inner_product(&u.scale(s).add(&w).unwrap(), &v).unwrap();
        let rhs = s * uv + inner_product(&w, &v).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-11 * (1.0 + lhs.abs()));
    }

    #[test]
    fn translate_shifts_the_argument(seed in 0u64..1000, n in 1usize..4, s in prop::collection::vec(-1.5..1.5f64, 3), u in prop::collection::vec(-1.5..1.5f64, 3)) {
        let f = kernel(seed, n);
        let moved = f.translate(&s[..n]).unwrap();
        let shifted: Vec<f64> = u[..n].iter().zip(&s).map(|(a, b)| a + b).collect();
        prop_assert!(close(moved.eval(&u[..n]).unwrap(), f.eval(&shifted).unwrap(), 1e-11));
    }

    #[test]
    fn convolution_evaluates_shifted_integrals(seed in 0u64..1000, n in 1usize..4, s in prop::collection::vec(-1.0..1.0f64, 3), q in 0.25..3.0f64) {
        let f = kernel(seed, n);
        let gammas: Vec<C64> = (0..n).map(|j| C64::new(0.0, -q / (2.0 + j as f64))).collect();
        let conv = f.convolve(&gammas).unwrap();
        let direct = f.translate(&s[..n]).unwrap().gaussian_integral(&gammas).unwrap();
        prop_assert!(close(conv.eval(&s[..n]).unwrap(), direct, 1e-10));
    }

    #[test]
    fn partial_matches_central_difference(seed in 0u64..1000, n in 1usize..4, u in prop::collection::vec(-1.0..1.0f64, 3), j in 0usize..3) {
        let f = kernel(seed, n);
        let j = j % n;
        let d = f.partial(j).unwrap().eval(&u[..n]).unwrap();
        let h = 1e-5;
        let mut up = u[..n].to_vec();
        let mut dn = u[..n].to_vec();
        up[j] += h;
        dn[j] -= h;
        let fd = (f.eval(&up).unwrap() - f.eval(&dn).unwrap()) / (2.0 * h);
        prop_assert!(close(d, fd, 1e-6));
    }

    #[test]
    fn evaluation_is_linear_in_the_kernel(seed in 0u64..1000, c in -2.0..2.0f64, path in 0u64..100) {
        let basis = OrthogonalSet::shifted_legendre(1.0, 2).unwrap();
        let (a, b) = (kernel(seed, 2), kernel(seed + 1, 2));
        let grid = Grid::new(64, 1.0).unwrap();
        let mut inc = vec![0.0; 64];
        fill_increments(&grid, 3, path, &mut inc);
        let fa = CylinderFunctional::new(basis.clone(), a.clone()).unwrap().eval(&grid, &inc).unwrap();
        let fb = CylinderFunctional::new(basis.clone(), b.clone()).unwrap().eval(&grid, &inc).unwrap();
        let mixed = a.scale(C64::new(c, 0.0)).add(&b).unwrap();
        let fm = CylinderFunctional::new(basis, mixed).unwrap().eval(&grid, &inc).unwrap();
        prop_assert!(close(fm, fa * c + fb, 1e-12));
    }

    #[test]
    fn feynman_integral_ignores_weight_sign(seed in 0u64..500, idx in 0usize..50, q in prop::sample::select(vec![-2.0, -0.5, 0.75, 3.0])) {
        let d = draw(seed, 0, idx).unwrap();
        let a = feynman_integral(&d.f, &d.h1, q).unwrap();
        let b = feynman_integral(&d.f, &d.h1.negated(), q).unwrap();
        prop_assert_eq!(a, b);
        let zero = vec![0.0; d.f.arity()];
        let t = gfft(&d.f, &d.k, q, 2.0).unwrap();
        let at_zero = t.functional.eval_at(&zero).unwrap();
        let direct = feynman_integral(&d.f, &d.k, q).unwrap();
        prop_assert!(close(at_zero, direct, 1e-12));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn identities_hold_for_any_suite_seed(seed in any::<u64>()) {
        let reps = run_suite(&SuiteConfig { seed, configs: 2, ..SuiteConfig::default() }).unwrap();
        for r in &reps {
            prop_assert!(r.pass, "{} rel gap {:e}", r.name, r.rel_gap);
        }
    }
}
