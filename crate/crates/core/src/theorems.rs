//! Two-sided evaluation of the integration-by-parts identities.
//!
//! Each check computes the left side (Feynman integral of a variation, or of
//! a product-rule sum of variations) and the right side (a linearly weighted
//! Feynman integral) through different code paths: the left side
//! differentiates kernels, the right side multiplies by coordinates and
//! integrates the weight out against the Gaussian. Transformed functionals on
//! the left are built by varying first and transforming second, on the right
//! by transforming only.

use std::collections::BTreeMap;

use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::cylinder::{CylinderFunctional, VariationDirection};
use crate::error::{Error, Result};
use crate::expr::parse_l2;
use crate::feynman::{
    analytic_wiener_integral, feynman_integral, feynman_linear_weighted, gaussian_expectation, linear_weighted_at,
    ScaleVector,
};
use crate::gauss_poly::{principal_sqrt, Axis, GaussPolyFn, Term};
use crate::gfft::{gfft, transform_of_variation, variation_of_transform};
use crate::l2::{L2Fn, OrthogonalSet, WeightFn};
use crate::paths::{cell_average_weights, fill_increments, project, pwz_relation_check, Grid};

pub const EXACT_TOL: f64 = 1e-10;
pub const COMMUTE_TOL: f64 = 1e-12;
pub const FD_TOL: f64 = 1e-6;
pub const MC_SIGMAS: f64 = 3.0;
/// Central-difference step and midpoint cells for finite-difference checks.
pub const FD_STEP: f64 = 1e-4;
pub const FD_QUAD: usize = 8192;
/// Relative size below which a configuration counts as trivial (both sides,
/// or the effect of a corruption, vanish).
const NONTRIVIAL: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Corruption {
    #[default]
    None,
    /// Right-side multiplier doubled.
    Constant,
    /// `h_1` used in place of `h_2` in the linear weight.
    SwappedWeight,
}

impl Corruption {
    pub fn name(self) -> &'static str {
        match self {
            Corruption::None => "none",
            Corruption::Constant => "constant",
            Corruption::SwappedWeight => "swapped-weight",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "none" => Ok(Corruption::None),
            "constant" => Ok(Corruption::Constant),
            "swapped-weight" | "swapped" => Ok(Corruption::SwappedWeight),
            _ => Err(Error::InvalidArgument(format!("unknown corruption `{s}`"))),
        }
    }
}

/// Which transform multiplies `F`'s transform on the right side of the
/// two-transform identity: `G` transformed along `k_1` (`Printed`), or along
/// `k_2` as on the left side (`Symmetric`). Only the latter balances.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WeightReading {
    Printed,
    Symmetric,
}

impl WeightReading {
    pub fn name(self) -> &'static str {
        match self {
            WeightReading::Printed => "printed",
            WeightReading::Symmetric => "symmetric",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Exact,
    MonteCarlo,
}

#[derive(Clone, Debug, PartialEq)]
pub struct IdentityReport {
    pub name: String,
    pub lhs: C64,
    pub rhs: C64,
    pub lhs_se: Option<f64>,
    pub rhs_se: Option<f64>,
    pub abs_gap: f64,
    pub rel_gap: f64,
    pub tol: f64,
    pub pass: bool,
    pub mode: Mode,
    /// False when both sides vanish, or when a corruption leaves the right
    /// side unchanged; negative controls are only meaningful otherwise.
    pub nontrivial: bool,
    pub seed: u64,
    pub params: BTreeMap<String, String>,
}

fn rel_gap(lhs: C64, rhs: C64) -> (f64, f64) {
    let abs = (lhs - rhs).norm();
    (abs, abs / (1.0 + lhs.norm().max(rhs.norm())))
}

impl IdentityReport {
    pub fn exact(name: impl Into<String>, lhs: C64, rhs: C64, tol: f64) -> Self {
        let (abs_gap, rel) = rel_gap(lhs, rhs);
        IdentityReport {
            name: name.into(),
            lhs,
            rhs,
            lhs_se: None,
            rhs_se: None,
            abs_gap,
            rel_gap: rel,
            tol,
            pass: rel <= tol,
            mode: Mode::Exact,
            nontrivial: lhs.norm().max(rhs.norm()) > NONTRIVIAL,
            seed: 0,
            params: BTreeMap::new(),
        }
    }

    /// Pass iff `|lhs - rhs| ≤ k · sqrt(se_l² + se_r²)`.
    pub fn monte_carlo(name: impl Into<String>, lhs: C64, lhs_se: f64, rhs: C64, rhs_se: f64, k: f64) -> Self {
        let (abs_gap, rel) = rel_gap(lhs, rhs);
        let se = lhs_se.hypot(rhs_se);
        IdentityReport {
            name: name.into(),
            lhs,
            rhs,
            lhs_se: Some(lhs_se),
            rhs_se: Some(rhs_se),
            abs_gap,
            rel_gap: rel,
            tol: k,
            pass: abs_gap <= k * se,
            mode: Mode::MonteCarlo,
            nontrivial: true,
            seed: 0,
            params: BTreeMap::new(),
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn param(mut self, key: &str, value: impl ToString) -> Self {
        self.params.insert(key.to_string(), value.to_string());
        self
    }

    pub fn with_params(mut self, params: &BTreeMap<String, String>) -> Self {
        for (k, v) in params {
            self.params.insert(k.clone(), v.clone());
        }
        self
    }
}

fn sum(a: &CylinderFunctional, b: &CylinderFunctional) -> Result<CylinderFunctional> {
    let k = a.exact_kernel()?.add(b.exact_kernel()?)?;
    a.with_kernel(k)
}

fn mi(q: f64) -> C64 {
    C64::new(0.0, -q)
}

/// The ingredients of one parts identity.
#[derive(Clone, Debug)]
pub struct PartsSetup {
    /// Left integrand, a functional over `A·h_1` evaluated along `x`.
    pub left: CylinderFunctional,
    /// The product `R` over `A`, weighted by `⟨z, Z_{h_2}(x, ·)⟩` on the right.
    pub product: CylinderFunctional,
    pub h1: WeightFn,
    pub h2: WeightFn,
    pub z: L2Fn,
    /// Right-side multiplier is `λ/2` instead of `λ`.
    pub half: bool,
    /// Feynman parameter of the outer integrals.
    pub q: f64,
}

impl PartsSetup {
    fn multiplier(&self, lambda: C64) -> C64 {
        if self.half {
            lambda * 0.5
        } else {
            lambda
        }
    }

    /// Exact sides at `λ = -iq`, with the corruption applied to the right.
    pub fn evaluate(&self, corruption: Corruption) -> Result<(C64, C64, bool)> {
        let one = WeightFn::unit(self.h1.function().domain_end())?;
        let lhs = feynman_integral(&self.left, &one, self.q)?;
        let c = self.multiplier(mi(self.q));
        let rhs_true = c * feynman_linear_weighted(&self.product, &self.h1, &self.h2, &self.z, self.q)?;
        let rhs = match corruption {
            Corruption::None => rhs_true,
            Corruption::Constant => rhs_true * 2.0,
            Corruption::SwappedWeight => {
                c * feynman_linear_weighted(&self.product, &self.h1, &self.h1, &self.z, self.q)?
            }
        };
        let nontrivial = match corruption {
            Corruption::None => lhs.norm().max(rhs.norm()) > NONTRIVIAL,
            _ => (rhs - rhs_true).norm() / (1.0 + rhs_true.norm()) > NONTRIVIAL,
        };
        Ok((lhs, rhs, nontrivial))
    }

    pub fn report(&self, name: &str, corruption: Corruption, tol: f64) -> Result<IdentityReport> {
        let (lhs, rhs, nontrivial) = self.evaluate(corruption)?;
        let mut r = IdentityReport::exact(name, lhs, rhs, tol).param("corruption", corruption.name());
        r.nontrivial = nontrivial;
        Ok(r)
    }

    /// Closed forms of both sides at `λ = 1` against Monte Carlo estimates of
    /// the two integrands on the same paths. Path integrals use cell-average
    /// weights on `grid`.
    pub fn corroborate(&self, name: &str, grid: &Grid, paths: usize, seed: u64) -> Result<[IdentityReport; 2]> {
        let one = WeightFn::unit(self.h1.function().domain_end())?;
        let real = C64::new(1.0, 0.0);
        let exact_l = analytic_wiener_integral(&self.left, &one, real)?;
        let exact_r = self.multiplier(real) * linear_weighted_at(&self.product, &self.h1, &self.h2, &self.z, real)?;
        let mut integrands: Vec<Vec<f64>> = self
            .left
            .basis()
            .members()
            .iter()
            .map(|a| cell_average_weights(a, grid))
            .collect();
        let zh2 = self.z.mul(self.h2.function())?;
        integrands.push(cell_average_weights(&zh2, grid));
        let proj = project(grid, paths, seed, &integrands)?;
        let n = self.left.arity();
        let c = self.multiplier(real);
        let left = self.left.kernel().clone();
        let prod = self.product.kernel().clone();
        let est = proj.estimate_many(2, |row, out| {
            out[0] = left.eval(&row[..n]);
            out[1] = c * row[n] * prod.eval(&row[..n]);
        });
        Ok([
            IdentityReport::monte_carlo(
                format!("{name}/mc-lhs"),
                exact_l,
                0.0,
                est[0].mean,
                est[0].se,
                MC_SIGMAS,
            )
            .with_seed(seed)
            .param("paths", paths)
            .param("grid", grid.steps()),
            IdentityReport::monte_carlo(
                format!("{name}/mc-rhs"),
                exact_r,
                0.0,
                est[1].mean,
                est[1].se,
                MC_SIGMAS,
            )
            .with_seed(seed)
            .param("paths", paths)
            .param("grid", grid.steps()),
        ])
    }
}

fn weighted_dir(z: &L2Fn, h1: &WeightFn) -> Result<VariationDirection> {
    VariationDirection::weighted(z.clone(), h1.clone())
}

/// `F̃(Z_{h_1}) δG̃ + δF̃ G̃(Z_{h_1})` over `A·h_1`.
fn product_rule(
    f: &CylinderFunctional,
    g: &CylinderFunctional,
    df: &CylinderFunctional,
    dg: &CylinderFunctional,
    h1: &WeightFn,
) -> Result<CylinderFunctional> {
    sum(&f.rebased(h1)?.product(dg)?, &df.product(&g.rebased(h1)?)?)
}

pub fn setup_cameron_storvick(
    f: &CylinderFunctional,
    h1: &WeightFn,
    h2: &WeightFn,
    z: &L2Fn,
    q: f64,
) -> Result<PartsSetup> {
    let dir = weighted_dir(z, h1)?;
    Ok(PartsSetup {
        left: f.variation_functional(h1, h2, &dir)?,
        product: f.clone(),
        h1: h1.clone(),
        h2: h2.clone(),
        z: z.clone(),
        half: false,
        q,
    })
}

pub fn setup_parts_feynman(
    f: &CylinderFunctional,
    g: &CylinderFunctional,
    h1: &WeightFn,
    h2: &WeightFn,
    z: &L2Fn,
    q: f64,
) -> Result<PartsSetup> {
    let dir = weighted_dir(z, h1)?;
    let df = f.variation_functional(h1, h2, &dir)?;
    let dg = g.variation_functional(h1, h2, &dir)?;
    Ok(PartsSetup {
        left: product_rule(f, g, &df, &dg, h1)?,
        product: f.product(g)?,
        h1: h1.clone(),
        h2: h2.clone(),
        z: z.clone(),
        half: false,
        q,
    })
}

pub fn setup_parts_self(f: &CylinderFunctional, h1: &WeightFn, h2: &WeightFn, z: &L2Fn, q: f64) -> Result<PartsSetup> {
    let dir = weighted_dir(z, h1)?;
    let df = f.variation_functional(h1, h2, &dir)?;
    Ok(PartsSetup {
        left: f.rebased(h1)?.product(&df)?,
        product: f.product(f)?,
        h1: h1.clone(),
        h2: h2.clone(),
        z: z.clone(),
        half: true,
        q,
    })
}

/// Transforms of `F` along `k_1` and `G` along `k_2` in the product rule,
/// outer parameter `q_3`. The variations are of the transforms, in direction
/// `Z_{h_2}(w_{z h_1}, ·)`.
#[allow(clippy::too_many_arguments)]
pub fn setup_parts_transforms(
    f: &CylinderFunctional,
    g: &CylinderFunctional,
    k1: &WeightFn,
    k2: &WeightFn,
    h1: &WeightFn,
    h2: &WeightFn,
    z: &L2Fn,
    qs: [f64; 3],
    reading: WeightReading,
) -> Result<PartsSetup> {
    let [q1, q2, q3] = qs;
    let dir = weighted_dir(z, h1)?;
    let tf = gfft(f, k1, q1, 2.0)?.functional;
    let tg = gfft(g, k2, q2, 2.0)?.functional;
    let dtf = tf.variation_functional(h1, h2, &dir)?;
    let dtg = tg.variation_functional(h1, h2, &dir)?;
    let tg_right = match reading {
        WeightReading::Symmetric => tg.clone(),
        WeightReading::Printed => gfft(g, k1, q2, 2.0)?.functional,
    };
    Ok(PartsSetup {
        left: product_rule(&tf, &tg, &dtf, &dtg, h1)?,
        product: tf.product(&tg_right)?,
        h1: h1.clone(),
        h2: h2.clone(),
        z: z.clone(),
        half: false,
        q: q3,
    })
}

/// Both functionals transformed along `k h_1`; variations of the transforms
/// are computed as transforms of variations.
#[allow(clippy::too_many_arguments)]
pub fn setup_parts_gfft_pair(
    f: &CylinderFunctional,
    g: &CylinderFunctional,
    k: &WeightFn,
    h1: &WeightFn,
    h2: &WeightFn,
    z: &L2Fn,
    qs: [f64; 3],
) -> Result<PartsSetup> {
    let [q1, q2, q3] = qs;
    let dir = weighted_dir(z, h1)?;
    let kh1 = k.product(h1)?;
    let tf = gfft(f, &kh1, q1, 2.0)?.functional;
    let tg = gfft(g, &kh1, q2, 2.0)?.functional;
    let dtf = transform_of_variation(f, h1, h2, k, &dir, q1, 2.0)?;
    let dtg = transform_of_variation(g, h1, h2, k, &dir, q2, 2.0)?;
    Ok(PartsSetup {
        left: product_rule(&tf, &tg, &dtf, &dtg, h1)?,
        product: tf.product(&tg)?,
        h1: h1.clone(),
        h2: h2.clone(),
        z: z.clone(),
        half: false,
        q: q3,
    })
}

/// The `F = G`, `q_1 = q_2` case of the pair identity: multiplier `λ/2`.
pub fn setup_parts_gfft_self(
    f: &CylinderFunctional,
    k: &WeightFn,
    h1: &WeightFn,
    h2: &WeightFn,
    z: &L2Fn,
    qs: [f64; 2],
) -> Result<PartsSetup> {
    let [q1, q2] = qs;
    let dir = weighted_dir(z, h1)?;
    let kh1 = k.product(h1)?;
    let tf = gfft(f, &kh1, q1, 2.0)?.functional;
    let dtf = transform_of_variation(f, h1, h2, k, &dir, q1, 2.0)?;
    Ok(PartsSetup {
        left: tf.rebased(h1)?.product(&dtf)?,
        product: tf.product(&tf)?,
        h1: h1.clone(),
        h2: h2.clone(),
        z: z.clone(),
        half: true,
        q: q2,
    })
}

/// `F` untransformed against `T_{q_1, k h_1}(G)`, outer parameter `q_2`.
#[allow(clippy::too_many_arguments)]
pub fn setup_parts_mixed(
    f: &CylinderFunctional,
    g: &CylinderFunctional,
    k: &WeightFn,
    h1: &WeightFn,
    h2: &WeightFn,
    z: &L2Fn,
    qs: [f64; 2],
    p: f64,
) -> Result<PartsSetup> {
    let [q1, q2] = qs;
    let dir = weighted_dir(z, h1)?;
    let kh1 = k.product(h1)?;
    let tg = gfft(g, &kh1, q1, p)?.functional;
    let df = f.variation_functional(h1, h2, &dir)?;
    let dtg = transform_of_variation(g, h1, h2, k, &dir, q1, p)?;
    Ok(PartsSetup {
        left: product_rule(f, &tg, &df, &dtg, h1)?,
        product: f.product(&tg)?,
        h1: h1.clone(),
        h2: h2.clone(),
        z: z.clone(),
        half: false,
        q: q2,
    })
}

/// Kernel equality of `T_{q,k}(δF(·|w_z))` and `δ T_{q, k h_1}(F)(·|w_z)`.
/// Corruptions double the second route or vary it along `h_1` instead of `h_2`.
#[allow(clippy::too_many_arguments)]
pub fn check_commutation(
    f: &CylinderFunctional,
    h1: &WeightFn,
    h2: &WeightFn,
    k: &WeightFn,
    z: &L2Fn,
    q: f64,
    corruption: Corruption,
) -> Result<IdentityReport> {
    let dir = VariationDirection::plain(z.clone());
    let a = transform_of_variation(f, h1, h2, k, &dir, q, 2.0)?;
    let b = variation_of_transform(f, h1, h2, k, &dir, q, 2.0)?;
    let b = corrupt_route(f, &b, h1, k, &dir, q, corruption)?;
    let d = a.exact_kernel()?.kernel_distance(b.exact_kernel()?);
    let probe = probe_point(f.arity());
    let mut r = IdentityReport::exact("commutation", a.eval_at(&probe)?, b.eval_at(&probe)?, COMMUTE_TOL)
        .param("corruption", corruption.name());
    r.abs_gap = d;
    r.rel_gap = d;
    r.pass = d <= COMMUTE_TOL;
    r.nontrivial = match corruption {
        Corruption::None => !a.exact_kernel()?.is_zero(),
        _ => d > NONTRIVIAL,
    };
    Ok(r)
}

fn corrupt_route(
    f: &CylinderFunctional,
    route: &CylinderFunctional,
    h1: &WeightFn,
    k: &WeightFn,
    dir: &VariationDirection,
    q: f64,
    corruption: Corruption,
) -> Result<CylinderFunctional> {
    match corruption {
        Corruption::None => Ok(route.clone()),
        Corruption::Constant => route.with_kernel(route.exact_kernel()?.scale(C64::new(2.0, 0.0))),
        Corruption::SwappedWeight => variation_of_transform(f, h1, h1, k, dir, q, 2.0),
    }
}

/// `δ T_{q, k h_1}(F)(Z_{h_1}(x,·) | Z_{h_2}(w_z,·))` on one path against a
/// central difference of the transform.
#[allow(clippy::too_many_arguments)]
pub fn check_commutation_fd(
    f: &CylinderFunctional,
    h1: &WeightFn,
    h2: &WeightFn,
    k: &WeightFn,
    z: &L2Fn,
    q: f64,
    grid: &Grid,
    increments: &[f64],
    corruption: Corruption,
) -> Result<IdentityReport> {
    let dir = VariationDirection::plain(z.clone());
    let route = transform_of_variation(f, h1, h2, k, &dir, q, 2.0)?;
    let honest = route.eval(grid, increments)?;
    let analytic = corrupt_route(f, &route, h1, k, &dir, q, corruption)?.eval(grid, increments)?;
    let t = gfft(f, &k.product(h1)?, q, 2.0)?.functional;
    let fd = t.variation_finite_difference(h1, h2, &dir, grid, increments, FD_STEP, FD_QUAD)?;
    let mut r = IdentityReport::exact("commutation_fd", analytic, fd, FD_TOL).param("corruption", corruption.name());
    if corruption != Corruption::None {
        r.nontrivial = rel_gap(analytic, honest).1 > FD_TOL * 10.0;
    }
    Ok(r)
}

/// Analytic first variation on one path against a central difference.
pub fn check_variation_fd(
    f: &CylinderFunctional,
    h1: &WeightFn,
    h2: &WeightFn,
    dir: &VariationDirection,
    grid: &Grid,
    increments: &[f64],
) -> Result<IdentityReport> {
    let analytic = f.first_variation(h1, h2, dir, grid, increments)?;
    let fd = f.variation_finite_difference(h1, h2, dir, grid, increments, FD_STEP, FD_QUAD)?;
    Ok(IdentityReport::exact("variation_fd", analytic, fd, FD_TOL))
}

fn probe_point(n: usize) -> Vec<f64> {
    (0..n).map(|j| 0.3 - 0.25 * j as f64).collect()
}

fn kernel_report(name: &str, a: &GaussPolyFn, b: &GaussPolyFn) -> Result<IdentityReport> {
    let probe = probe_point(a.arity());
    let mut r = IdentityReport::exact(name, a.eval(&probe)?, b.eval(&probe)?, 0.0);
    let d = if a == b {
        0.0
    } else {
        a.kernel_distance(b).max(f64::MIN_POSITIVE)
    };
    r.abs_gap = d;
    r.rel_gap = d;
    r.pass = d == 0.0;
    Ok(r)
}

/// With `h ≡ 1` every weighted object equals its unweighted counterpart,
/// which is computed here directly from `A` without any rebasing.
pub fn check_reductions(
    f: &CylinderFunctional,
    z: &L2Fn,
    q: f64,
    grid: &Grid,
    increments: &[f64],
) -> Result<Vec<IdentityReport>> {
    let t_end = f.basis().domain_end();
    let one = WeightFn::unit(t_end)?;
    let kernel = f.exact_kernel()?;
    let plain = ScaleVector::of(f.basis())?;
    let mut out = Vec::new();

    let weighted = feynman_integral(f, &one, q)?;
    let classical = gaussian_expectation(kernel, &plain, mi(q))?;
    out.push(IdentityReport::exact("reduction/feynman", weighted, classical, 0.0));

    let t = gfft(f, &one, q, 2.0)?.functional;
    let gammas: Vec<C64> = plain.values().iter().map(|v| mi(q) / (2.0 * v)).collect();
    let pre: C64 = plain
        .values()
        .iter()
        .map(|v| principal_sqrt(mi(q) / (2.0 * std::f64::consts::PI * v)))
        .product();
    let classical_t = kernel.convolve(&gammas)?.scale(pre);
    out.push(kernel_report("reduction/gfft", t.exact_kernel()?, &classical_t)?);

    let dir = VariationDirection::plain(z.clone());
    let v = f.variation_functional(&one, &one, &dir)?;
    let mut dv = GaussPolyFn::zero(kernel.arity());
    for (j, a) in f.basis().members().iter().enumerate() {
        let c = a.inner(z)?;
        if c != 0.0 {
            dv = dv.add(&kernel.partial(j)?.scale(C64::new(c, 0.0)))?;
        }
    }
    out.push(kernel_report("reduction/variation", v.exact_kernel()?, &dv)?);

    let rel = pwz_relation_check(z, &one, grid, increments)?;
    let mut r = IdentityReport::exact("reduction/process", C64::new(rel.lhs, 0.0), C64::new(rel.rhs, 0.0), 0.0);
    r.pass = rel.gap == 0.0;
    out.push(r);
    Ok(out)
}

/// `T_{q,k} = T_{q,-k}` and the same for the Feynman integral, exactly.
pub fn check_sign_invariance(f: &CylinderFunctional, k: &WeightFn, q: f64) -> Result<Vec<IdentityReport>> {
    let a = gfft(f, k, q, 2.0)?.functional;
    let b = gfft(f, &k.negated(), q, 2.0)?.functional;
    let fa = feynman_integral(f, k, q)?;
    let fb = feynman_integral(f, &k.negated(), q)?;
    let mut r = IdentityReport::exact("sign_invariance/feynman", fa, fb, 0.0);
    r.pass = fa == fb;
    Ok(vec![
        kernel_report("sign_invariance/gfft", a.exact_kernel()?, b.exact_kernel()?)?,
        r,
    ])
}

// ---------------------------------------------------------------------------
// Randomized configurations

pub const WEIGHT_LIBRARY: [&str; 5] = [
    "poly(1)",
    "poly(1, 1/2)",
    "poly(2, -1)",
    "poly(1, 1, -1)",
    "poly(-4/3, 28/3, -28/3)",
];
pub const TRANSFORM_WEIGHT_LIBRARY: [&str; 6] = [
    "poly(1)",
    "poly(-3/2)",
    "poly(1, 1/2)",
    "poly(2, -1)",
    "poly(1, 1, -1)",
    "poly(-4/3, 28/3, -28/3)",
];
pub const DIRECTION_LIBRARY: [&str; 3] = ["poly(1)", "poly(0, 1)", "poly(-1/2, 1)"];

/// One randomized configuration on `[0, 1]`.
#[derive(Clone, Debug)]
pub struct Draw {
    pub index: usize,
    pub basis_label: String,
    pub f: CylinderFunctional,
    pub g: CylinderFunctional,
    pub h1: WeightFn,
    pub h2: WeightFn,
    /// `k h_1 ∈ O_Supp∞(A)`.
    pub k: WeightFn,
    /// `k_1, k_2 ∈ O_Supp∞(A)`.
    pub k1: WeightFn,
    pub k2: WeightFn,
    pub z: L2Fn,
    pub q: [f64; 3],
}

impl Draw {
    pub fn params(&self) -> BTreeMap<String, String> {
        let mut p = BTreeMap::new();
        p.insert("basis".into(), self.basis_label.clone());
        p.insert(
            "f".into(),
            self.f.exact_kernel().map(|k| k.to_string()).unwrap_or_default(),
        );
        p.insert(
            "g".into(),
            self.g.exact_kernel().map(|k| k.to_string()).unwrap_or_default(),
        );
        p.insert("h1".into(), self.h1.label().to_string());
        p.insert("h2".into(), self.h2.label().to_string());
        p.insert("k".into(), self.k.label().to_string());
        p.insert("k1".into(), self.k1.label().to_string());
        p.insert("k2".into(), self.k2.label().to_string());
        p.insert("z".into(), self.z.label().to_string());
        for (i, q) in self.q.iter().enumerate() {
            p.insert(format!("q{}", i + 1), format!("{q:?}"));
        }
        p
    }
}

fn weights(lib: &[&str]) -> Vec<WeightFn> {
    lib.iter()
        .map(|s| WeightFn::new(parse_l2(s, 1.0).expect("library expression")).expect("library weight"))
        .collect()
}

fn pick<'a, T>(rng: &mut ChaCha8Rng, items: &'a [T]) -> &'a T {
    &items[rng.gen_range(0..items.len())]
}

fn random_q(rng: &mut ChaCha8Rng) -> f64 {
    let m = rng.gen_range(0.5..3.0);
    if rng.gen_bool(0.5) {
        m
    } else {
        -m
    }
}

fn random_c(rng: &mut ChaCha8Rng, re: f64, im: f64) -> C64 {
    C64::new(rng.gen_range(-re..=re), rng.gen_range(-im..=im))
}

/// 1 to 3 terms, per-axis degree at most 3, `Re a ∈ [0.3, 2]`.
pub fn random_kernel(rng: &mut ChaCha8Rng, n: usize) -> Result<GaussPolyFn> {
    let terms = rng.gen_range(1..=3);
    let mut out = Vec::with_capacity(terms);
    for _ in 0..terms {
        let axes = (0..n)
            .map(|_| {
                let deg = rng.gen_range(0..=3);
                let mut poly: Vec<C64> = (0..=deg).map(|_| random_c(rng, 1.0, 0.5)).collect();
                poly[0] += 1.0;
                let rate = C64::new(rng.gen_range(0.3..=2.0), rng.gen_range(-0.3..=0.3));
                let shift = random_c(rng, 0.5, 0.3);
                Axis::new(poly, rate, shift)
            })
            .collect();
        out.push(Term::new(random_c(rng, 1.0, 1.0), axes));
    }
    GaussPolyFn::new(n, out)
}

/// Shifted Legendre polynomials on `[0, 1]`, or local ones on disjoint cells.
pub fn random_basis(rng: &mut ChaCha8Rng, n: usize) -> Result<(OrthogonalSet, String)> {
    if rng.gen_bool(0.5) {
        let label = format!("legendre(0..{n})");
        return Ok((OrthogonalSet::shifted_legendre(1.0, n)?, label));
    }
    let mut members = Vec::with_capacity(n);
    for j in 0..n {
        let d = rng.gen_range(0..=2);
        let src = format!("prod(legendre({d}), indicator({j}/{n}, {}/{n}))", j + 1);
        members.push(parse_l2(&src, 1.0)?);
    }
    let label = members
        .iter()
        .map(|m| m.label().to_string())
        .collect::<Vec<_>>()
        .join("; ");
    Ok((OrthogonalSet::new(members)?, label))
}

/// Deterministic configuration `index` of stream `stream` under `seed`.
pub fn draw(seed: u64, stream: u64, index: usize) -> Result<Draw> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream((stream << 32) | index as u64);
    let n = rng.gen_range(1..=3);
    let (basis, basis_label) = random_basis(&mut rng, n)?;
    let hs = weights(&WEIGHT_LIBRARY);
    let ks = weights(&TRANSFORM_WEIGHT_LIBRARY);
    let admitted: Vec<WeightFn> = hs.iter().filter(|h| basis.admits(h)).cloned().collect();
    let h1 = pick(&mut rng, &admitted).clone();
    let h2 = pick(&mut rng, &hs).clone();
    let k_ok: Vec<WeightFn> = ks
        .iter()
        .filter(|k| k.product(&h1).map(|kh| basis.admits(&kh)).unwrap_or(false))
        .cloned()
        .collect();
    let k = pick(&mut rng, &k_ok).clone();
    let k_adm: Vec<WeightFn> = ks.iter().filter(|k| basis.admits(k)).cloned().collect();
    let k1 = pick(&mut rng, &k_adm).clone();
    let k2 = if index.is_multiple_of(3) {
        k1.clone()
    } else {
        pick(&mut rng, &k_adm).clone()
    };
    let directions: Vec<L2Fn> = DIRECTION_LIBRARY
        .iter()
        .map(|s| parse_l2(s, 1.0))
        .collect::<Result<_>>()?;
    let z = pick(&mut rng, &directions).clone();
    let f = CylinderFunctional::new(basis.clone(), random_kernel(&mut rng, n)?)?;
    let g = CylinderFunctional::new(basis, random_kernel(&mut rng, n)?)?;
    let q = [random_q(&mut rng), random_q(&mut rng), random_q(&mut rng)];
    Ok(Draw {
        index,
        basis_label,
        f,
        g,
        h1,
        h2,
        k,
        k1,
        k2,
        z,
        q,
    })
}

/// Every identity family run by the suite, in stream order.
pub const THEOREMS: [&str; 9] = [
    "cameron_storvick",
    "parts_feynman",
    "parts_self",
    "parts_transforms",
    "parts_gfft_pair",
    "parts_gfft_self",
    "parts_mixed",
    "parts_mixed_self",
    "commutation",
];

#[derive(Clone, Debug)]
pub struct SuiteConfig {
    pub seed: u64,
    pub configs: usize,
    pub tol: f64,
    pub corruption: Corruption,
    /// Also run the `Printed` reading of the two-transform identity when
    /// `k_1 ≠ k_2`; those reports are expected to fail.
    pub probe_printed_reading: bool,
    /// Monte Carlo corroboration at `λ = 1` for the first `mc_configs`
    /// configurations of each parts identity.
    pub mc_configs: usize,
    pub mc_paths: usize,
    pub mc_grid: usize,
    pub fd_grid: usize,
    /// Restrict to these families; empty means all.
    pub only: Vec<String>,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig {
            seed: 20240601,
            configs: 25,
            tol: EXACT_TOL,
            corruption: Corruption::None,
            probe_printed_reading: false,
            mc_configs: 0,
            mc_paths: 20_000,
            mc_grid: 256,
            fd_grid: 256,
            only: Vec::new(),
        }
    }
}

fn setup_for(name: &str, d: &Draw, reading: WeightReading) -> Result<PartsSetup> {
    let [q1, q2, q3] = d.q;
    match name {
        "cameron_storvick" => setup_cameron_storvick(&d.f, &d.h1, &d.h2, &d.z, q1),
        "parts_feynman" => setup_parts_feynman(&d.f, &d.g, &d.h1, &d.h2, &d.z, q1),
        "parts_self" => setup_parts_self(&d.f, &d.h1, &d.h2, &d.z, q1),
        "parts_transforms" => setup_parts_transforms(&d.f, &d.g, &d.k1, &d.k2, &d.h1, &d.h2, &d.z, d.q, reading),
        "parts_gfft_pair" => setup_parts_gfft_pair(&d.f, &d.g, &d.k, &d.h1, &d.h2, &d.z, d.q),
        "parts_gfft_self" => setup_parts_gfft_self(&d.f, &d.k, &d.h1, &d.h2, &d.z, [q1, q2]),
        "parts_mixed" => setup_parts_mixed(&d.f, &d.g, &d.k, &d.h1, &d.h2, &d.z, [q1, q3], 2.0),
        "parts_mixed_self" => setup_parts_mixed(&d.f, &d.f, &d.k, &d.h1, &d.h2, &d.z, [q1, q3], 2.0),
        other => Err(Error::InvalidArgument(format!("unknown identity `{other}`"))),
    }
}

fn run_one(cfg: &SuiteConfig, stream: usize, name: &str, index: usize) -> Result<Vec<IdentityReport>> {
    let d = draw(cfg.seed, stream as u64, index)?;
    let params = d.params();
    let tag = format!("{name}/{index:02}");
    let mut out = Vec::new();
    if name == "commutation" {
        let grid = Grid::new(cfg.fd_grid, 1.0)?;
        let mut inc = vec![0.0; grid.steps()];
        fill_increments(&grid, cfg.seed, (stream as u64) << 32 | index as u64, &mut inc);
        let mut r = check_commutation(&d.f, &d.h1, &d.h2, &d.k, &d.z, d.q[0], cfg.corruption)?;
        r.name = tag.clone();
        out.push(r.with_seed(cfg.seed).with_params(&params));
        let mut r = check_commutation_fd(&d.f, &d.h1, &d.h2, &d.k, &d.z, d.q[0], &grid, &inc, cfg.corruption)?;
        r.name = format!("commutation_fd/{index:02}");
        out.push(r.with_seed(cfg.seed).with_params(&params));
        return Ok(out);
    }
    let same_k = d.k1.function() == d.k2.function();
    let reading = WeightReading::Symmetric;
    let setup = setup_for(name, &d, reading)?;
    let mut r = setup.report(&tag, cfg.corruption, cfg.tol)?;
    if name == "parts_transforms" {
        r = r.param("reading", if same_k { "both" } else { reading.name() });
    }
    out.push(r.with_seed(cfg.seed).with_params(&params));
    if name == "parts_transforms" && cfg.probe_printed_reading && !same_k {
        let printed = setup_for(name, &d, WeightReading::Printed)?;
        let r = printed
            .report(&format!("parts_transforms_printed/{index:02}"), cfg.corruption, cfg.tol)?
            .param("reading", WeightReading::Printed.name());
        out.push(r.with_seed(cfg.seed).with_params(&params));
    }
    if cfg.corruption == Corruption::None && index < cfg.mc_configs {
        let grid = Grid::new(cfg.mc_grid, 1.0)?;
        let mc_seed = cfg.seed ^ ((stream as u64) << 40 | index as u64);
        for r in setup.corroborate(&tag, &grid, cfg.mc_paths, mc_seed)? {
            out.push(r.with_params(&params));
        }
    }
    Ok(out)
}

/// Runs every family over `cfg.configs` configurations plus the exact
/// reductions; reports are sorted by name.
pub fn run_suite(cfg: &SuiteConfig) -> Result<Vec<IdentityReport>> {
    if let Some(bad) = cfg
        .only
        .iter()
        .find(|o| !THEOREMS.contains(&o.as_str()) && !["reduction", "sign_invariance"].contains(&o.as_str()))
    {
        return Err(Error::InvalidArgument(format!("unknown identity `{bad}`")));
    }
    let wanted = |n: &str| cfg.only.is_empty() || cfg.only.iter().any(|o| o == n);
    let jobs: Vec<(usize, &str, usize)> = THEOREMS
        .iter()
        .enumerate()
        .filter(|(_, n)| wanted(n))
        .flat_map(|(s, n)| (0..cfg.configs).map(move |i| (s, *n, i)))
        .collect();
    let results: Vec<Result<Vec<IdentityReport>>> = jobs.par_iter().map(|&(s, n, i)| run_one(cfg, s, n, i)).collect();
    let mut out = Vec::new();
    for r in results {
        out.extend(r?);
    }
    if cfg.corruption == Corruption::None && (wanted("reduction") || wanted("sign_invariance")) {
        let grid = Grid::new(cfg.fd_grid, 1.0)?;
        let mut inc = vec![0.0; grid.steps()];
        for i in 0..cfg.configs.min(5) {
            let d = draw(cfg.seed, THEOREMS.len() as u64, i)?;
            fill_increments(&grid, cfg.seed, (THEOREMS.len() as u64) << 32 | i as u64, &mut inc);
            let params = d.params();
            let mut reps = Vec::new();
            if wanted("reduction") {
                reps.extend(check_reductions(&d.f, &d.z, d.q[0], &grid, &inc)?);
            }
            if wanted("sign_invariance") {
                reps.extend(check_sign_invariance(&d.f, &d.k1, d.q[0])?);
            }
            for mut r in reps {
                r.name = format!("{}/{i:02}", r.name);
                out.push(r.with_seed(cfg.seed).with_params(&params));
            }
        }
    }
    out.sort_by(|a, b| a.name.cmp(&b.name));
    Ok(out)
}
