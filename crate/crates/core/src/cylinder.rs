//! Cylinder functionals `F(x) = f(⟨α_1, x⟩, …, ⟨α_n, x⟩)` and their first
//! variations along `Z_{h_2}(w, ·)`.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::gauss_poly::GaussPolyFn;
use crate::l2::{L2Fn, OrthogonalSet, WeightFn};
use crate::paths::{stieltjes_sum, stieltjes_weights, Grid};

/// Smoothness order of an exact kernel when none is given; such kernels are
/// smooth to every order.
pub const UNBOUNDED_ORDER: usize = usize::MAX;

pub type SampledFn = Arc<dyn Fn(&[f64]) -> C64 + Send + Sync>;

#[derive(Clone)]
pub enum Kernel {
    Exact(GaussPolyFn),
    /// Pointwise only: usable for evaluation and Monte Carlo, nothing else.
    Sampled {
        arity: usize,
        f: SampledFn,
    },
}

impl Kernel {
    pub fn arity(&self) -> usize {
        match self {
            Kernel::Exact(g) => g.arity(),
            Kernel::Sampled { arity, .. } => *arity,
        }
    }

    pub fn eval(&self, u: &[f64]) -> C64 {
        match self {
            Kernel::Exact(g) => g.eval_unchecked(u),
            Kernel::Sampled { f, .. } => f(u),
        }
    }

    pub fn exact(&self) -> Result<&GaussPolyFn> {
        match self {
            Kernel::Exact(g) => Ok(g),
            Kernel::Sampled { .. } => Err(Error::SampledKernel),
        }
    }
}

impl fmt::Debug for Kernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Kernel::Exact(g) => write!(f, "Exact({g})"),
            Kernel::Sampled { arity, .. } => write!(f, "Sampled(arity = {arity})"),
        }
    }
}

/// Direction `w(t) = ∫_0^t z(s) h_1(s) ds`, or `w_z` when `h_1` is absent.
#[derive(Clone, Debug)]
pub struct VariationDirection {
    z: L2Fn,
    h1: Option<WeightFn>,
    derivative: L2Fn,
}

impl VariationDirection {
    /// `w_z(t) = ∫_0^t z`.
    pub fn plain(z: L2Fn) -> Self {
        VariationDirection {
            derivative: z.clone(),
            z,
            h1: None,
        }
    }

    /// `w_{z h_1}(t) = ∫_0^t z h_1`.
    pub fn weighted(z: L2Fn, h1: WeightFn) -> Result<Self> {
        let derivative = z.mul(h1.function())?;
        Ok(VariationDirection {
            z,
            h1: Some(h1),
            derivative,
        })
    }

    pub fn z(&self) -> &L2Fn {
        &self.z
    }

    pub fn h1(&self) -> Option<&WeightFn> {
        self.h1.as_ref()
    }

    /// `w'`, which is `z` or `z h_1`.
    pub fn derivative(&self) -> &L2Fn {
        &self.derivative
    }

    /// The path `w` itself.
    pub fn path(&self) -> L2Fn {
        self.derivative.antiderivative()
    }
}

#[derive(Clone, Debug)]
pub struct CylinderFunctional {
    basis: OrthogonalSet,
    kernel: Kernel,
    order: usize,
}

fn same_basis(a: &OrthogonalSet, b: &OrthogonalSet) -> bool {
    a.len() == b.len()
        && a.members()
            .iter()
            .zip(b.members())
            .all(|(x, y)| x.domain_end() == y.domain_end() && x.form() == y.form())
}

impl CylinderFunctional {
    pub fn new(basis: OrthogonalSet, kernel: GaussPolyFn) -> Result<Self> {
        Self::with_order(basis, kernel, UNBOUNDED_ORDER)
    }

    pub fn with_order(basis: OrthogonalSet, kernel: GaussPolyFn, order: usize) -> Result<Self> {
        if kernel.arity() != basis.len() {
            return Err(Error::ArityMismatch {
                expected: basis.len(),
                got: kernel.arity(),
            });
        }
        Ok(CylinderFunctional {
            basis,
            kernel: Kernel::Exact(kernel),
            order,
        })
    }

    pub fn sampled(basis: OrthogonalSet, f: SampledFn) -> Self {
        CylinderFunctional {
            kernel: Kernel::Sampled { arity: basis.len(), f },
            basis,
            order: 0,
        }
    }

    pub fn basis(&self) -> &OrthogonalSet {
        &self.basis
    }

    pub fn kernel(&self) -> &Kernel {
        &self.kernel
    }

    pub fn exact_kernel(&self) -> Result<&GaussPolyFn> {
        self.kernel.exact()
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn arity(&self) -> usize {
        self.basis.len()
    }

    /// Stieltjes weights of each `α_j` on `grid`.
    pub fn basis_weights(&self, grid: &Grid) -> Vec<Vec<f64>> {
        self.basis
            .members()
            .iter()
            .map(|a| stieltjes_weights(a, grid))
            .collect()
    }

    /// `f` at the given projections.
    pub fn eval_at(&self, u: &[f64]) -> Result<C64> {
        if u.len() != self.arity() {
            return Err(Error::ArityMismatch {
                expected: self.arity(),
                got: u.len(),
            });
        }
        Ok(self.kernel.eval(u))
    }

    /// `F(x)` for the path with the given increments.
    pub fn eval(&self, grid: &Grid, increments: &[f64]) -> Result<C64> {
        if increments.len() != grid.steps() {
            return Err(Error::GridMismatch {
                left: grid.steps(),
                right: increments.len(),
            });
        }
        let u: Vec<f64> = self
            .basis_weights(grid)
            .iter()
            .map(|w| stieltjes_sum(w, increments))
            .collect();
        self.eval_at(&u)
    }

    /// The same kernel over `A·h`; requires `h ∈ O_Supp∞(A)`.
    pub fn rebased(&self, h: &WeightFn) -> Result<CylinderFunctional> {
        Ok(CylinderFunctional {
            basis: self.basis.rebased(h)?,
            kernel: self.kernel.clone(),
            order: self.order,
        })
    }

    /// `F(Z_h(x, ·))`, integrating each `α_j` against the increments of the
    /// path `Z_h(x, ·)`.
    pub fn eval_on_process(&self, h: &WeightFn, grid: &Grid, increments: &[f64]) -> Result<C64> {
        let hw = stieltjes_weights(h.function(), grid);
        let z_inc: Vec<f64> = hw.iter().zip(increments).map(|(a, b)| a * b).collect();
        self.eval(grid, &z_inc)
    }

    /// `(α_j h_2, w')_2` for each `j`.
    pub fn variation_coefficients(&self, h2: &WeightFn, dir: &VariationDirection) -> Result<Vec<f64>> {
        self.basis
            .members()
            .iter()
            .map(|a| a.mul(h2.function())?.inner(dir.derivative()))
            .collect()
    }

    /// `δ_{h_1,h_2} F(·|w)` as a functional over `A·h_1` with kernel
    /// `Σ_j (α_j h_2, w')_2 ∂_j f` and one order less smoothness.
    pub fn variation_functional(
        &self,
        h1: &WeightFn,
        h2: &WeightFn,
        dir: &VariationDirection,
    ) -> Result<CylinderFunctional> {
        let f = self.kernel.exact()?;
        if self.order == 0 {
            return Err(Error::OrderExhausted);
        }
        let basis = self.basis.rebased(h1)?;
        let coeffs = self.variation_coefficients(h2, dir)?;
        let mut kernel = GaussPolyFn::zero(f.arity());
        for (j, c) in coeffs.iter().enumerate() {
            if *c != 0.0 {
                kernel = kernel.add(&f.partial(j)?.scale(C64::new(*c, 0.0)))?;
            }
        }
        Ok(CylinderFunctional {
            basis,
            kernel: Kernel::Exact(kernel),
            order: self.order - 1,
        })
    }

    /// `δ_{h_1,h_2} F(x|w)` at one path.
    pub fn first_variation(
        &self,
        h1: &WeightFn,
        h2: &WeightFn,
        dir: &VariationDirection,
        grid: &Grid,
        increments: &[f64],
    ) -> Result<C64> {
        self.variation_functional(h1, h2, dir)?.eval(grid, increments)
    }

    /// Central difference in `μ` of `F(Z_{h_1}(x, ·) + μ Z_{h_2}(w, ·))`.
    ///
    /// `⟨α_j, Z_{h_2}(w, ·)⟩` is a midpoint Stieltjes sum against the path
    /// `w` on `quad_steps` cells, independent of the closed-form inner
    /// products used by [`CylinderFunctional::variation_functional`].
    #[allow(clippy::too_many_arguments)]
    pub fn variation_finite_difference(
        &self,
        h1: &WeightFn,
        h2: &WeightFn,
        dir: &VariationDirection,
        grid: &Grid,
        increments: &[f64],
        step: f64,
        quad_steps: usize,
    ) -> Result<C64> {
        let base = self.rebased(h1)?;
        let bw = base.basis_weights(grid);
        let u: Vec<f64> = bw.iter().map(|w| stieltjes_sum(w, increments)).collect();
        let w = dir.path();
        let t_end = grid.t_end();
        // cells never straddle a jump of α_j, h_2 or w'
        let mut cuts = vec![0.0, t_end];
        for f in self.basis.members().iter().chain([h2.function(), dir.derivative()]) {
            cuts.extend(f.breakpoints());
        }
        cuts.sort_by(f64::total_cmp);
        cuts.dedup();
        let mut nodes = Vec::with_capacity(quad_steps + cuts.len());
        for seg in cuts.windows(2) {
            let cells = ((seg[1] - seg[0]) / t_end * quad_steps as f64).ceil().max(1.0) as usize;
            let dq = (seg[1] - seg[0]) / cells as f64;
            nodes.extend((0..cells).map(|i| seg[0] + i as f64 * dq));
        }
        nodes.push(t_end);
        let wv: Vec<f64> = nodes.iter().map(|&t| w.eval(t)).collect();
        let d: Vec<f64> = self
            .basis
            .members()
            .iter()
            .map(|a| {
                nodes
                    .windows(2)
                    .zip(wv.windows(2))
                    .map(|(t, wv)| {
                        let mid = 0.5 * (t[0] + t[1]);
                        a.eval(mid) * h2.function().eval(mid) * (wv[1] - wv[0])
                    })
                    .sum()
            })
            .collect();
        let shifted = |mu: f64| -> Vec<f64> { u.iter().zip(&d).map(|(a, b)| a + mu * b).collect() };
        let up = self.kernel.eval(&shifted(step));
        let dn = self.kernel.eval(&shifted(-step));
        Ok((up - dn) / (2.0 * step))
    }

    /// `R = F G` with kernel `f g`; both must share the basis.
    pub fn product(&self, other: &CylinderFunctional) -> Result<CylinderFunctional> {
        if !same_basis(&self.basis, &other.basis) {
            return Err(Error::BasisMismatch);
        }
        let kernel = match (&self.kernel, &other.kernel) {
            (Kernel::Exact(f), Kernel::Exact(g)) => Kernel::Exact(f.mul(g)?),
            (a, b) => {
                let (a, b) = (a.clone(), b.clone());
                Kernel::Sampled {
                    arity: self.arity(),
                    f: Arc::new(move |u: &[f64]| a.eval(u) * b.eval(u)),
                }
            }
        };
        Ok(CylinderFunctional {
            basis: self.basis.clone(),
            kernel,
            order: self.order.min(other.order),
        })
    }

    /// Same functional with a new kernel over the same basis.
    pub fn with_kernel(&self, kernel: GaussPolyFn) -> Result<CylinderFunctional> {
        Self::with_order(self.basis.clone(), kernel, self.order)
    }

    /// Same kernel over a different basis of equal size.
    pub fn over(&self, basis: OrthogonalSet) -> Result<CylinderFunctional> {
        if basis.len() != self.arity() {
            return Err(Error::ArityMismatch {
                expected: self.arity(),
                got: basis.len(),
            });
        }
        Ok(CylinderFunctional {
            basis,
            kernel: self.kernel.clone(),
            order: self.order,
        })
    }
}
