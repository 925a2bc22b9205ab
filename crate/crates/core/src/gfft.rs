//! Analytic Fourier–Feynman transforms along `Z_k` and their interplay with
//! the first variation.
//!
//! The transform of `F` over `A` is again a cylinder functional over `A`,
//! with kernel
//!
//! ```text
//! s ↦ ∏_j (-iq / 2πσ_j²)^{1/2} ∫ f(u + s) exp((iq/2) Σ_j u_j²/σ_j²) du,   σ_j² = ‖α_j k‖².
//! ```
//!
//! The value does not depend on `p ∈ [1, 2]`; it is recorded with the result.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;

use crate::cylinder::{CylinderFunctional, VariationDirection};
use crate::error::{Error, Result};
use crate::feynman::{FeynmanParams, ScaleVector};
use crate::gauss_poly::principal_sqrt;
use crate::l2::WeightFn;

#[derive(Clone, Debug)]
pub struct TransformResult {
    pub functional: CylinderFunctional,
    pub q: f64,
    pub p: f64,
    pub weight: String,
}

fn check_p(p: f64) -> Result<()> {
    if (1.0..=2.0).contains(&p) {
        Ok(())
    } else {
        Err(Error::InvalidP(p))
    }
}

/// `T^{(p)}_{q,k}(F)`.
pub fn gfft(f: &CylinderFunctional, k: &WeightFn, q: f64, p: f64) -> Result<TransformResult> {
    check_p(p)?;
    FeynmanParams::Q(q).validate()?;
    let kernel = f.exact_kernel()?;
    let s2 = ScaleVector::of(&f.basis().rebased(k)?)?;
    let iq = C64::new(0.0, -q);
    let gammas: Vec<C64> = s2.values().iter().map(|v| iq / (2.0 * v)).collect();
    let prefactor: C64 = s2
        .values()
        .iter()
        .map(|v| principal_sqrt(iq / (2.0 * PI * v)))
        .product();
    let transformed = kernel.convolve(&gammas)?.scale(prefactor);
    Ok(TransformResult {
        functional: f.with_kernel(transformed)?,
        q,
        p,
        weight: k.label().to_string(),
    })
}

/// `T^{(p)}_{q,k}(δ_{h_1,h_2}F(·|w))`: vary first, then transform the
/// variation (a functional over `A·h_1`) along `Z_k`.
#[allow(clippy::too_many_arguments)]
pub fn transform_of_variation(
    f: &CylinderFunctional,
    h1: &WeightFn,
    h2: &WeightFn,
    k: &WeightFn,
    dir: &VariationDirection,
    q: f64,
    p: f64,
) -> Result<CylinderFunctional> {
    check_p(p)?;
    let v = f.variation_functional(h1, h2, dir)?;
    Ok(gfft(&v, k, q, p)?.functional)
}

/// `δ_{h_1,h_2} T^{(p)}_{q,k h_1}(F)(·|w)`: transform along `Z_{k h_1}`
/// first, then vary.
#[allow(clippy::too_many_arguments)]
pub fn variation_of_transform(
    f: &CylinderFunctional,
    h1: &WeightFn,
    h2: &WeightFn,
    k: &WeightFn,
    dir: &VariationDirection,
    q: f64,
    p: f64,
) -> Result<CylinderFunctional> {
    // fail fast on the weight before transforming
    f.basis().rebased(h1)?.rebased(k)?;
    let kh1 = k.product(h1)?;
    let t = gfft(f, &kh1, q, p)?;
    t.functional.variation_functional(h1, h2, dir)
}
