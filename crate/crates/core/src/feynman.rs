//! Closed-form analytic Wiener and Feynman integrals of cylinder
//! functionals.
//!
//! Over an orthogonal set with `σ_j² = ‖α_j h‖²`, the scaled Wiener
//! integral is a Gaussian expectation,
//!
//! ```text
//! J(λ) = ∏_j (λ / 2πσ_j²)^{1/2} ∫ f(u) exp(-λ Σ_j u_j² / 2σ_j²) du,
//! ```
//!
//! and the Feynman integral is its value at `λ = -iq`. Each square root is
//! taken on its own with the principal branch, which is the continuation of
//! the real-λ formula into the right half plane.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;

use crate::cylinder::{CylinderFunctional, VariationDirection};
use crate::error::{Error, Result};
use crate::gauss_poly::{principal_sqrt, GaussPolyFn};
use crate::l2::{L2Fn, OrthogonalSet, WeightFn};

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum FeynmanParams {
    /// `Re λ > 0`.
    Lambda(C64),
    /// `λ = -iq`, `q ≠ 0`.
    Q(f64),
}

impl FeynmanParams {
    pub fn validate(&self) -> Result<()> {
        match *self {
            FeynmanParams::Lambda(l) if !(l.re > 0.0) || !l.is_finite() => {
                Err(Error::InvalidLambda { re: l.re, im: l.im })
            }
            FeynmanParams::Q(q) if q == 0.0 || !q.is_finite() => Err(Error::ZeroQ),
            _ => Ok(()),
        }
    }

    pub fn lambda(&self) -> C64 {
        match *self {
            FeynmanParams::Lambda(l) => l,
            FeynmanParams::Q(q) => C64::new(0.0, -q),
        }
    }
}

/// `σ_j² = ‖α_j h‖²`.
#[derive(Clone, Debug, PartialEq)]
pub struct ScaleVector(Vec<f64>);

impl ScaleVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::EmptySet);
        }
        if let Some(j) = values.iter().position(|v| !(*v > 0.0) || !v.is_finite()) {
            return Err(Error::ZeroMember(j));
        }
        Ok(ScaleVector(values))
    }

    pub fn of(set: &OrthogonalSet) -> Result<Self> {
        Self::new(set.norms_squared())
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn scaled(&self, c: f64) -> Result<Self> {
        Self::new(self.0.iter().map(|v| v * c).collect())
    }
}

/// `∏_j (λ/2πσ_j²)^{1/2} ∫ f(u) exp(-λ Σ u_j²/2σ_j²) du`.
pub fn gaussian_expectation(kernel: &GaussPolyFn, variances: &ScaleVector, lambda: C64) -> Result<C64> {
    let s2 = variances.values();
    if s2.len() != kernel.arity() {
        return Err(Error::ArityMismatch {
            expected: kernel.arity(),
            got: s2.len(),
        });
    }
    let gammas: Vec<C64> = s2.iter().map(|v| lambda / (2.0 * v)).collect();
    let prefactor: C64 = s2.iter().map(|v| principal_sqrt(lambda / (2.0 * PI * v))).product();
    Ok(prefactor * kernel.gaussian_integral(&gammas)?)
}

/// `E[F(ρ x)]` for `F` over an orthogonal set `G`:
/// `∏_j (2πρ²‖g_j‖²)^{-1/2} ∫ f(u) exp(-Σ u_j²/2ρ²‖g_j‖²) du`.
pub fn gaussian_reduction(f: &CylinderFunctional, rho: f64) -> Result<C64> {
    if !(rho > 0.0) || !rho.is_finite() {
        return Err(Error::InvalidArgument(format!("rho must be positive, got {rho}")));
    }
    let kernel = f.exact_kernel()?;
    let variances = ScaleVector::of(f.basis())?.scaled(rho * rho)?;
    gaussian_expectation(kernel, &variances, C64::new(1.0, 0.0))
}

fn over_weight(f: &CylinderFunctional, h: &WeightFn) -> Result<(GaussPolyFn, ScaleVector)> {
    let kernel = f.exact_kernel()?.clone();
    let rebased = f.basis().rebased(h)?;
    Ok((kernel, ScaleVector::of(&rebased)?))
}

/// `J*(h; λ)` for `Re λ > 0`.
pub fn analytic_wiener_integral(f: &CylinderFunctional, h: &WeightFn, lambda: C64) -> Result<C64> {
    FeynmanParams::Lambda(lambda).validate()?;
    let (kernel, s2) = over_weight(f, h)?;
    gaussian_expectation(&kernel, &s2, lambda)
}

/// The generalized analytic Feynman integral with parameter `q`.
pub fn feynman_integral(f: &CylinderFunctional, h: &WeightFn, q: f64) -> Result<C64> {
    let params = FeynmanParams::Q(q);
    params.validate()?;
    let (kernel, s2) = over_weight(f, h)?;
    gaussian_expectation(&kernel, &s2, params.lambda())
}

/// `(z h_2, α_j h_1)_2` for each `j`.
pub fn linear_weight_coefficients(f: &CylinderFunctional, h1: &WeightFn, h2: &WeightFn, z: &L2Fn) -> Result<Vec<f64>> {
    let zh2 = z.mul(h2.function())?;
    f.basis().multiplied(h1)?.iter().map(|a| zh2.inner(a)).collect()
}

/// Kernel of `⟨z, Z_{h_2}(x,·)⟩ F(Z_{h_1}(x,·))` after integrating out the
/// part of `z h_2` orthogonal to `A·h_1`: `Σ_j (c_j/σ_j²) u_j f(u)`.
pub fn linear_weighted_kernel(
    f: &CylinderFunctional,
    h1: &WeightFn,
    h2: &WeightFn,
    z: &L2Fn,
) -> Result<(GaussPolyFn, ScaleVector)> {
    let (kernel, s2) = over_weight(f, h1)?;
    let c = linear_weight_coefficients(f, h1, h2, z)?;
    let mut out = GaussPolyFn::zero(kernel.arity());
    for (j, (cj, v)) in c.iter().zip(s2.values()).enumerate() {
        if *cj != 0.0 {
            out = out.add(&kernel.mul_coordinate(j)?.scale(C64::new(cj / v, 0.0)))?;
        }
    }
    Ok((out, s2))
}

/// `∫^{anf_λ} ⟨z, Z_{h_2}(x,·)⟩ F(Z_{h_1}(x,·)) dx` for `Re λ ≥ 0`, `λ ≠ 0`.
pub fn linear_weighted_at(f: &CylinderFunctional, h1: &WeightFn, h2: &WeightFn, z: &L2Fn, lambda: C64) -> Result<C64> {
    if lambda.re < 0.0 || lambda == C64::new(0.0, 0.0) {
        return Err(Error::InvalidLambda {
            re: lambda.re,
            im: lambda.im,
        });
    }
    let (kernel, s2) = linear_weighted_kernel(f, h1, h2, z)?;
    gaussian_expectation(&kernel, &s2, lambda)
}

/// `∫^{anf_q} ⟨z, Z_{h_2}(x,·)⟩ F(Z_{h_1}(x,·)) dx`.
pub fn feynman_linear_weighted(f: &CylinderFunctional, h1: &WeightFn, h2: &WeightFn, z: &L2Fn, q: f64) -> Result<C64> {
    let params = FeynmanParams::Q(q);
    params.validate()?;
    linear_weighted_at(f, h1, h2, z, params.lambda())
}

/// Feynman integral of a first variation, `∫^{anf_q} δ_{h_1,h_2}F(x|w) dx`.
pub fn feynman_of_variation(
    f: &CylinderFunctional,
    h1: &WeightFn,
    h2: &WeightFn,
    dir: &VariationDirection,
    q: f64,
) -> Result<C64> {
    let v = f.variation_functional(h1, h2, dir)?;
    let one = WeightFn::unit(f.basis().domain_end())?;
    feynman_integral(&v, &one, q)
}

/// Approach to `λ = -iq` along `λ = ε - iq`.
#[derive(Clone, Debug, PartialEq)]
pub struct EpsilonApproach {
    pub epsilons: Vec<f64>,
    pub values: Vec<C64>,
    pub extrapolated: C64,
    pub closed_form: C64,
    pub rel_gap: f64,
}

pub const DEFAULT_EPSILONS: [f64; 4] = [1e-1, 1e-2, 1e-3, 1e-4];

/// Evaluates `J*(h; ε - iq)` at each `ε` and extrapolates to `ε = 0` with a
/// full Richardson (Neville) table in `ε`.
pub fn epsilon_approach(f: &CylinderFunctional, h: &WeightFn, q: f64, epsilons: &[f64]) -> Result<EpsilonApproach> {
    if epsilons.len() < 2 {
        return Err(Error::InvalidArgument("need at least two epsilons".into()));
    }
    let closed_form = feynman_integral(f, h, q)?;
    let values = epsilons
        .iter()
        .map(|&e| analytic_wiener_integral(f, h, C64::new(e, -q)))
        .collect::<Result<Vec<_>>>()?;
    // Neville at x = 0 for p(ε_i) = values_i
    let mut table = values.clone();
    let n = epsilons.len();
    for level in 1..n {
        for i in 0..n - level {
            let (x0, x1) = (epsilons[i], epsilons[i + level]);
            table[i] = (x0 * table[i + 1] - x1 * table[i]) / (x0 - x1);
        }
    }
    let extrapolated = table[0];
    let rel_gap = (extrapolated - closed_form).norm() / (1.0 + closed_form.norm().max(extrapolated.norm()));
    Ok(EpsilonApproach {
        epsilons: epsilons.to_vec(),
        values,
        extrapolated,
        closed_form,
        rel_gap,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gauss_poly::{Axis, Term};

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn unit_set() -> OrthogonalSet {
        OrthogonalSet::new(vec![L2Fn::constant(1.0, 1.0).unwrap()]).unwrap()
    }

    fn half_gaussian() -> CylinderFunctional {
        CylinderFunctional::new(unit_set(), GaussPolyFn::gaussian(c(1.0, 0.0), &[0.5])).unwrap()
    }

    fn one() -> WeightFn {
        WeightFn::unit(1.0).unwrap()
    }

    #[test]
    fn feynman_closed_form_example() {
        let v = feynman_integral(&half_gaussian(), &one(), 1.0).unwrap();
        let oracle = principal_sqrt(c(0.5, -0.5));
        assert!((v - oracle).norm() <= 1e-12 * oracle.norm());
        let approach = epsilon_approach(&half_gaussian(), &one(), 1.0, &DEFAULT_EPSILONS).unwrap();
        assert!(approach.rel_gap <= 1e-8, "{}", approach.rel_gap);
    }

    #[test]
    fn reduction_examples() {
        let v = gaussian_reduction(&half_gaussian(), 1.0).unwrap();
        assert!((v - c(0.5f64.sqrt(), 0.0)).norm() < 1e-15);
        // E[exp(-u²/2)] at variance ρ² is (1 + ρ²)^{-1/2}; rescaling f by the
        // inverse normalizes to one
        for rho in [0.5f64, 2.0] {
            let f = CylinderFunctional::new(
                unit_set(),
                GaussPolyFn::gaussian(c((1.0 + rho * rho).sqrt(), 0.0), &[0.5]),
            )
            .unwrap();
            let v = gaussian_reduction(&f, rho).unwrap();
            assert!((v - c(1.0, 0.0)).norm() < 1e-15);
        }
        assert!(gaussian_reduction(&half_gaussian(), 0.0).is_err());
    }

    #[test]
    fn lambda_one_equals_reduction() {
        let h = WeightFn::new(L2Fn::poly(1.0, &[1.0, 0.5]).unwrap()).unwrap();
        let f = half_gaussian();
        let a = analytic_wiener_integral(&f, &h, c(1.0, 0.0)).unwrap();
        let b = gaussian_reduction(&f.rebased(&h).unwrap(), 1.0).unwrap();
        assert!((a - b).norm() < 1e-15);
        for lam in [0.5, 2.0] {
            let a = analytic_wiener_integral(&f, &h, c(lam, 0.0)).unwrap();
            let b = gaussian_reduction(&f.rebased(&h).unwrap(), lam.powf(-0.5)).unwrap();
            assert!((a - b).norm() < 1e-14);
        }
    }

    #[test]
    fn large_lambda_limit() {
        let f = half_gaussian();
        let v = analytic_wiener_integral(&f, &one(), c(1e8, 0.0)).unwrap();
        assert!((v - c(1.0, 0.0)).norm() < 1e-7);
    }

    #[test]
    fn invalid_parameters() {
        let f = half_gaussian();
        assert_eq!(feynman_integral(&f, &one(), 0.0).unwrap_err(), Error::ZeroQ);
        assert!(matches!(
            analytic_wiener_integral(&f, &one(), c(0.0, 1.0)),
            Err(Error::InvalidLambda { .. })
        ));
        let growing = CylinderFunctional::new(unit_set(), GaussPolyFn::gaussian(c(1.0, 0.0), &[-0.5])).unwrap();
        assert!(matches!(
            feynman_integral(&growing, &one(), 1.0),
            Err(Error::NoGaussianDecay { .. })
        ));
    }

    #[test]
    fn sign_of_weight_is_irrelevant() {
        let f = half_gaussian();
        let h = WeightFn::new(L2Fn::poly(1.0, &[2.0, -1.0]).unwrap()).unwrap();
        assert_eq!(
            feynman_integral(&f, &h, 1.3).unwrap(),
            feynman_integral(&f, &h.negated(), 1.3).unwrap()
        );
    }

    #[test]
    fn cauchy_riemann_residual() {
        let set = OrthogonalSet::shifted_legendre(1.0, 2).unwrap();
        let kernel = GaussPolyFn::new(
            2,
            vec![Term::new(
                c(0.7, -0.4),
                vec![
                    Axis::new(vec![c(1.0, 0.0), c(0.2, 0.1)], c(0.6, 0.1), c(0.1, 0.0)),
                    Axis::new(vec![c(0.5, 0.0), c(0.0, 0.0), c(0.3, 0.0)], c(1.2, 0.0), c(0.0, -0.2)),
                ],
            )],
        )
        .unwrap();
        let f = CylinderFunctional::new(set, kernel).unwrap();
        let h = one();
        let d = 1e-5;
        for i in 0..5 {
            for k in 0..5 {
                let l = c(0.5 + 1.5 * i as f64 / 4.0, -1.0 + 2.0 * k as f64 / 4.0);
                let j = |z: C64| analytic_wiener_integral(&f, &h, z).unwrap();
                let dx = (j(l + d) - j(l - d)) / (2.0 * d);
                let dy = (j(l + c(0.0, d)) - j(l - c(0.0, d))) / (2.0 * d);
                // ∂J/∂y = i ∂J/∂x for analytic J
                assert!((dy - c(0.0, 1.0) * dx).norm() < 1e-6);
            }
        }
    }

    #[test]
    fn linear_weighted_examples() {
        let f = half_gaussian();
        // z h2 ⟂ α h1 = 1
        let z = L2Fn::poly(1.0, &[-0.5, 1.0]).unwrap();
        assert_eq!(
            feynman_linear_weighted(&f, &one(), &one(), &z, 1.0).unwrap(),
            c(0.0, 0.0)
        );
        // even f: E[u f(u)] vanishes
        let z = L2Fn::constant(1.0, 1.0).unwrap();
        assert!(feynman_linear_weighted(&f, &one(), &one(), &z, 1.0).unwrap().norm() < 1e-16);
        // odd part: f = u e^{-u²/2}; at λ = 1, σ = 1, c = 1: E[u² e^{-u²/2}] = 2^{-3/2}
        let g = CylinderFunctional::new(
            unit_set(),
            GaussPolyFn::new(
                1,
                vec![Term::new(
                    c(1.0, 0.0),
                    vec![Axis::new(vec![c(0.0, 0.0), c(1.0, 0.0)], c(0.5, 0.0), c(0.0, 0.0))],
                )],
            )
            .unwrap(),
        )
        .unwrap();
        let v = linear_weighted_at(&g, &one(), &one(), &z, c(1.0, 0.0)).unwrap();
        assert!((v - c(2f64.powf(-1.5), 0.0)).norm() < 1e-15);
    }
}
