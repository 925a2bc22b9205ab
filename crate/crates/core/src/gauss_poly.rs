//! Finite sums of polynomial-times-Gaussian terms in `n` real variables,
//!
//! ```text
//! f(u) = Σ_t c_t ∏_j P_tj(u_j) exp(-a_tj u_j² + b_tj u_j)
//! ```
//!
//! with complex `c`, `P`, `a`, `b`. The family is closed under products,
//! partial derivatives, translations and integration against complex
//! Gaussian weights, and every one of those operations is carried out
//! symbolically, so Feynman integrals at `λ = -iq` and Fourier–Feynman
//! transforms come out in closed form.
//!
//! A rate `a = 0` with `b = 0` and a constant polynomial is a constant term.
//! Constants are fine for algebra; integration accepts them only when the
//! combined rate `a + γ` is nonzero with nonnegative real part, where the
//! Gaussian integral is the continuous boundary value of the closed form.

use std::fmt;

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

/// Principal square root, `exp(Log(z)/2)`, with nonnegative real part.
pub fn principal_sqrt(z: C64) -> C64 {
    if z == ZERO {
        return ZERO;
    }
    (0.5 * z.ln()).exp()
}

pub(crate) fn fmt_complex(z: C64) -> String {
    format!("{}{:+}i", z.re, z.im)
}

mod cpoly {
    use super::{C64, ZERO};

    pub fn trim(mut p: Vec<C64>) -> Vec<C64> {
        while p.len() > 1 && *p.last().unwrap() == ZERO {
            p.pop();
        }
        if p.is_empty() {
            p.push(ZERO);
        }
        p
    }

    pub fn is_zero(p: &[C64]) -> bool {
        p.iter().all(|c| *c == ZERO)
    }

    pub fn eval(p: &[C64], u: f64) -> C64 {
        p.iter().rev().fold(ZERO, |acc, &c| acc * u + c)
    }

    pub fn add(a: &[C64], b: &[C64]) -> Vec<C64> {
        let mut out = vec![ZERO; a.len().max(b.len())];
        for (i, v) in a.iter().enumerate() {
            out[i] += v;
        }
        for (i, v) in b.iter().enumerate() {
            out[i] += v;
        }
        trim(out)
    }

    pub fn mul(a: &[C64], b: &[C64]) -> Vec<C64> {
        let mut out = vec![ZERO; a.len() + b.len() - 1];
        for (i, x) in a.iter().enumerate() {
            for (j, y) in b.iter().enumerate() {
                out[i + j] += x * y;
            }
        }
        trim(out)
    }

    pub fn derivative(p: &[C64]) -> Vec<C64> {
        if p.len() <= 1 {
            return vec![ZERO];
        }
        trim(p.iter().enumerate().skip(1).map(|(k, c)| c * k as f64).collect())
    }

    /// Coefficients of `p(u + s)`.
    pub fn shift(p: &[C64], s: C64) -> Vec<C64> {
        // repeated synthetic division (Taylor shift)
        let mut c = p.to_vec();
        let n = c.len();
        for i in 0..n {
            for k in (i..n - 1).rev() {
                let next = c[k + 1];
                c[k] += s * next;
            }
        }
        trim(c)
    }
}

/// `E[(v + μ)^k]` for `k = 0..=deg`, where `v` is centred Gaussian with
/// (possibly complex) variance `1/(2A)`.
fn shifted_moments(mu: C64, a: C64, deg: usize) -> Vec<C64> {
    let var = 1.0 / (2.0 * a);
    let mut m = Vec::with_capacity(deg + 1);
    m.push(ONE);
    if deg >= 1 {
        m.push(mu);
    }
    for k in 1..deg {
        let next = mu * m[k] + var * k as f64 * m[k - 1];
        m.push(next);
    }
    m
}

fn binomial_row(n: usize) -> Vec<f64> {
    let mut row = vec![1.0; n + 1];
    for k in 1..n {
        row[k] = row[k - 1] * (n - k + 1) as f64 / k as f64;
    }
    row
}

/// One factor `P(u) exp(-rate u² + shift u)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Axis {
    pub poly: Vec<C64>,
    pub rate: C64,
    pub shift: C64,
}

impl Axis {
    pub fn new(poly: Vec<C64>, rate: C64, shift: C64) -> Self {
        Axis {
            poly: cpoly::trim(poly),
            rate,
            shift,
        }
    }

    pub fn one() -> Self {
        Axis::new(vec![ONE], ZERO, ZERO)
    }

    pub fn gaussian(rate: f64) -> Self {
        Axis::new(vec![ONE], C64::new(rate, 0.0), ZERO)
    }

    pub fn degree(&self) -> usize {
        self.poly.len() - 1
    }

    pub fn eval(&self, u: f64) -> C64 {
        cpoly::eval(&self.poly, u) * (-self.rate * u * u + self.shift * u).exp()
    }

    fn is_trivial(&self) -> bool {
        self.rate == ZERO && self.shift == ZERO
    }

    /// `∫ P(u) exp(-(rate + gamma) u² + shift u) du`.
    fn integral(&self, gamma: C64, axis: usize) -> Result<C64> {
        let big_a = self.rate + gamma;
        check_decay(big_a, axis)?;
        let mu = self.shift / (2.0 * big_a);
        let moments = shifted_moments(mu, big_a, self.degree());
        let poly_part: C64 = self.poly.iter().zip(&moments).map(|(c, m)| c * m).sum();
        let factor = principal_sqrt(std::f64::consts::PI / big_a) * (self.shift * self.shift / (4.0 * big_a)).exp();
        Ok(factor * poly_part)
    }

    /// `s ↦ ∫ P(u+s) exp(-rate (u+s)² + shift (u+s)) exp(-gamma u²) du`,
    /// returned as a scalar factor and a new axis in `s`.
    fn convolve(&self, gamma: C64, axis: usize) -> Result<(C64, Axis)> {
        let big_a = self.rate + gamma;
        check_decay(big_a, axis)?;
        let mu0 = self.shift / (2.0 * big_a);
        let kappa = gamma / big_a;
        let deg = self.degree();
        let moments = shifted_moments(mu0, big_a, deg);
        let mut q = vec![ZERO; deg + 1];
        let mut kappa_pow = ONE;
        for (k, qk) in q.iter_mut().enumerate() {
            let mut acc = ZERO;
            for i in k..=deg {
                acc += self.poly[i] * binomial_row(i)[k] * moments[i - k];
            }
            *qk = acc * kappa_pow;
            kappa_pow *= kappa;
        }
        let factor = principal_sqrt(std::f64::consts::PI / big_a) * (self.shift * self.shift / (4.0 * big_a)).exp();
        Ok((
            factor,
            Axis::new(q, self.rate * gamma / big_a, self.shift * gamma / big_a),
        ))
    }
}

fn check_decay(big_a: C64, axis: usize) -> Result<()> {
    if big_a.re < 0.0 || big_a == ZERO || !big_a.is_finite() {
        Err(Error::NoGaussianDecay {
            axis,
            re: big_a.re,
            im: big_a.im,
        })
    } else {
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Term {
    pub coeff: C64,
    pub axes: Vec<Axis>,
}

impl Term {
    pub fn new(coeff: C64, axes: Vec<Axis>) -> Self {
        Term { coeff, axes }
    }

    pub fn eval(&self, u: &[f64]) -> C64 {
        let mut exponent = ZERO;
        let mut poly = self.coeff;
        for (ax, &x) in self.axes.iter().zip(u) {
            exponent += -ax.rate * x * x + ax.shift * x;
            poly *= cpoly::eval(&ax.poly, x);
        }
        poly * exponent.exp()
    }

    fn is_zero(&self) -> bool {
        self.coeff == ZERO || self.axes.iter().any(|a| cpoly::is_zero(&a.poly))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GaussPolyFn {
    arity: usize,
    terms: Vec<Term>,
}

impl GaussPolyFn {
    pub fn new(arity: usize, terms: Vec<Term>) -> Result<Self> {
        if arity == 0 {
            return Err(Error::InvalidArgument("kernel arity must be positive".into()));
        }
        for t in &terms {
            if t.axes.len() != arity {
                return Err(Error::ArityMismatch {
                    expected: arity,
                    got: t.axes.len(),
                });
            }
        }
        Ok(GaussPolyFn { arity, terms }.pruned())
    }

    pub fn zero(arity: usize) -> Self {
        GaussPolyFn {
            arity,
            terms: Vec::new(),
        }
    }

    pub fn constant(arity: usize, c: C64) -> Self {
        GaussPolyFn {
            arity,
            terms: vec![Term::new(c, vec![Axis::one(); arity])],
        }
        .pruned()
    }

    /// `c exp(-Σ a_j u_j²)`.
    pub fn gaussian(c: C64, rates: &[f64]) -> Self {
        GaussPolyFn {
            arity: rates.len(),
            terms: vec![Term::new(c, rates.iter().map(|&a| Axis::gaussian(a)).collect())],
        }
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// True when every term is a constant.
    pub fn is_constant(&self) -> bool {
        self.terms
            .iter()
            .all(|t| t.axes.iter().all(|a| a.is_trivial() && a.degree() == 0))
    }

    pub fn max_degree(&self) -> usize {
        self.terms
            .iter()
            .flat_map(|t| t.axes.iter().map(Axis::degree))
            .max()
            .unwrap_or(0)
    }

    /// Strict decay `Re a > 0` on every axis of every term.
    pub fn has_gaussian_decay(&self) -> bool {
        self.terms.iter().all(|t| t.axes.iter().all(|a| a.rate.re > 0.0))
    }

    fn pruned(mut self) -> Self {
        self.terms.retain(|t| !t.is_zero());
        self
    }

    fn check_arity(&self, other: &GaussPolyFn) -> Result<()> {
        if self.arity != other.arity {
            Err(Error::ArityMismatch {
                expected: self.arity,
                got: other.arity,
            })
        } else {
            Ok(())
        }
    }

    fn check_index(&self, j: usize) -> Result<()> {
        if j >= self.arity {
            Err(Error::InvalidArgument(format!(
                "axis {j} out of range for arity {}",
                self.arity
            )))
        } else {
            Ok(())
        }
    }

    pub fn eval(&self, u: &[f64]) -> Result<C64> {
        if u.len() != self.arity {
            return Err(Error::ArityMismatch {
                expected: self.arity,
                got: u.len(),
            });
        }
        Ok(self.eval_unchecked(u))
    }

    pub(crate) fn eval_unchecked(&self, u: &[f64]) -> C64 {
        self.terms.iter().map(|t| t.eval(u)).sum()
    }

    pub fn scale(&self, c: C64) -> GaussPolyFn {
        GaussPolyFn {
            arity: self.arity,
            terms: self
                .terms
                .iter()
                .map(|t| Term::new(t.coeff * c, t.axes.clone()))
                .collect(),
        }
        .pruned()
    }

    pub fn add(&self, other: &GaussPolyFn) -> Result<GaussPolyFn> {
        self.check_arity(other)?;
        let mut terms = self.terms.clone();
        terms.extend(other.terms.iter().cloned());
        Ok(GaussPolyFn {
            arity: self.arity,
            terms,
        })
    }

    pub fn mul(&self, other: &GaussPolyFn) -> Result<GaussPolyFn> {
        self.check_arity(other)?;
        let mut terms = Vec::with_capacity(self.terms.len() * other.terms.len());
        for s in &self.terms {
            for o in &other.terms {
                let axes = s
                    .axes
                    .iter()
                    .zip(&o.axes)
                    .map(|(x, y)| Axis::new(cpoly::mul(&x.poly, &y.poly), x.rate + y.rate, x.shift + y.shift))
                    .collect();
                terms.push(Term::new(s.coeff * o.coeff, axes));
            }
        }
        Ok(GaussPolyFn {
            arity: self.arity,
            terms,
        }
        .pruned())
    }

    /// `∂f/∂u_j`: the axis factor becomes `(P' + bP - 2a u P) exp(...)`.
    pub fn partial(&self, j: usize) -> Result<GaussPolyFn> {
        self.check_index(j)?;
        let terms = self
            .terms
            .iter()
            .map(|t| {
                let mut axes = t.axes.clone();
                let ax = &t.axes[j];
                let mut p = cpoly::derivative(&ax.poly);
                p = cpoly::add(&p, &ax.poly.iter().map(|c| c * ax.shift).collect::<Vec<_>>());
                let mut u_p = vec![ZERO];
                u_p.extend(ax.poly.iter().map(|c| c * (-2.0) * ax.rate));
                p = cpoly::add(&p, &u_p);
                axes[j] = Axis::new(p, ax.rate, ax.shift);
                Term::new(t.coeff, axes)
            })
            .collect();
        Ok(GaussPolyFn {
            arity: self.arity,
            terms,
        }
        .pruned())
    }

    /// `u ↦ f(u + s)`.
    pub fn translate(&self, s: &[f64]) -> Result<GaussPolyFn> {
        if s.len() != self.arity {
            return Err(Error::ArityMismatch {
                expected: self.arity,
                got: s.len(),
            });
        }
        let terms = self
            .terms
            .iter()
            .map(|t| {
                let mut coeff = t.coeff;
                let axes = t
                    .axes
                    .iter()
                    .zip(s)
                    .map(|(ax, &sj)| {
                        let sj = C64::new(sj, 0.0);
                        coeff *= (-ax.rate * sj * sj + ax.shift * sj).exp();
                        Axis::new(cpoly::shift(&ax.poly, sj), ax.rate, ax.shift - 2.0 * ax.rate * sj)
                    })
                    .collect();
                Term::new(coeff, axes)
            })
            .collect();
        Ok(GaussPolyFn {
            arity: self.arity,
            terms,
        })
    }

    /// `u ↦ u_j f(u)`.
    pub fn mul_coordinate(&self, j: usize) -> Result<GaussPolyFn> {
        self.check_index(j)?;
        let terms = self
            .terms
            .iter()
            .map(|t| {
                let mut axes = t.axes.clone();
                let mut p = vec![ZERO];
                p.extend(t.axes[j].poly.iter().copied());
                axes[j] = Axis::new(p, t.axes[j].rate, t.axes[j].shift);
                Term::new(t.coeff, axes)
            })
            .collect();
        Ok(GaussPolyFn {
            arity: self.arity,
            terms,
        })
    }

    /// `∫_{ℝⁿ} f(u) exp(-Σ γ_j u_j²) du`.
    pub fn gaussian_integral(&self, gammas: &[C64]) -> Result<C64> {
        if gammas.len() != self.arity {
            return Err(Error::ArityMismatch {
                expected: self.arity,
                got: gammas.len(),
            });
        }
        let mut total = ZERO;
        for t in &self.terms {
            let mut v = t.coeff;
            for (j, (ax, &g)) in t.axes.iter().zip(gammas).enumerate() {
                v *= ax.integral(g, j)?;
            }
            total += v;
        }
        Ok(total)
    }

    /// `s ↦ ∫_{ℝⁿ} f(u + s) exp(-Σ γ_j u_j²) du`.
    pub fn convolve(&self, gammas: &[C64]) -> Result<GaussPolyFn> {
        if gammas.len() != self.arity {
            return Err(Error::ArityMismatch {
                expected: self.arity,
                got: gammas.len(),
            });
        }
        let mut terms = Vec::with_capacity(self.terms.len());
        for t in &self.terms {
            let mut coeff = t.coeff;
            let mut axes = Vec::with_capacity(self.arity);
            for (j, (ax, &g)) in t.axes.iter().zip(gammas).enumerate() {
                let (factor, axis) = ax.convolve(g, j)?;
                coeff *= factor;
                axes.push(axis);
            }
            terms.push(Term::new(coeff, axes));
        }
        Ok(GaussPolyFn {
            arity: self.arity,
            terms,
        }
        .pruned())
    }

    /// Terms grouped by exponent signature and expanded into monomials.
    pub fn canonical(&self) -> Vec<CanonicalGroup> {
        let mut groups: Vec<CanonicalGroup> = Vec::new();
        for t in &self.terms {
            let rates: Vec<C64> = t.axes.iter().map(|a| a.rate).collect();
            let shifts: Vec<C64> = t.axes.iter().map(|a| a.shift).collect();
            let idx = match groups
                .iter()
                .position(|g| same_signature(&g.rates, &rates) && same_signature(&g.shifts, &shifts))
            {
                Some(i) => i,
                None => {
                    groups.push(CanonicalGroup {
                        rates,
                        shifts,
                        monomials: Vec::new(),
                    });
                    groups.len() - 1
                }
            };
            let mut expanded: Vec<(Vec<usize>, C64)> = vec![(Vec::new(), t.coeff)];
            for ax in &t.axes {
                let mut next = Vec::with_capacity(expanded.len() * ax.poly.len());
                for (exps, c) in &expanded {
                    for (k, pk) in ax.poly.iter().enumerate() {
                        if *pk != ZERO {
                            let mut e = exps.clone();
                            e.push(k);
                            next.push((e, c * pk));
                        }
                    }
                }
                expanded = next;
            }
            let group = &mut groups[idx];
            for (e, c) in expanded {
                match group.monomials.iter_mut().find(|(ge, _)| *ge == e) {
                    Some(slot) => slot.1 += c,
                    None => group.monomials.push((e, c)),
                }
            }
        }
        for g in &mut groups {
            g.monomials.sort_by(|a, b| a.0.cmp(&b.0));
        }
        groups
    }

    /// Largest coefficient mismatch between canonical forms, relative to the
    /// largest coefficient magnitude of either side. Unmatched signatures
    /// count in full.
    pub fn kernel_distance(&self, other: &GaussPolyFn) -> f64 {
        let a = self.canonical();
        let b = other.canonical();
        let scale = a
            .iter()
            .chain(&b)
            .flat_map(|g| g.monomials.iter().map(|m| m.1.norm()))
            .fold(0.0f64, f64::max);
        if scale == 0.0 {
            return 0.0;
        }
        let mut worst = 0.0f64;
        let diff_groups = |x: &[CanonicalGroup], y: &[CanonicalGroup], worst: &mut f64| {
            for g in x {
                let partner = y
                    .iter()
                    .find(|h| same_signature(&g.rates, &h.rates) && same_signature(&g.shifts, &h.shifts));
                for (e, c) in &g.monomials {
                    let other = partner
                        .and_then(|h| h.monomials.iter().find(|m| m.0 == *e))
                        .map(|m| m.1)
                        .unwrap_or(ZERO);
                    *worst = worst.max((c - other).norm());
                }
            }
        };
        diff_groups(&a, &b, &mut worst);
        diff_groups(&b, &a, &mut worst);
        worst / scale
    }
}

fn same_signature(a: &[C64], b: &[C64]) -> bool {
    a.iter()
        .zip(b)
        .all(|(x, y)| (x - y).norm() <= 1e-13 * (1.0 + x.norm().max(y.norm())))
}

#[derive(Clone, Debug, PartialEq)]
pub struct CanonicalGroup {
    pub rates: Vec<C64>,
    pub shifts: Vec<C64>,
    /// `(exponents per axis, coefficient)` in lexicographic order.
    pub monomials: Vec<(Vec<usize>, C64)>,
}

impl fmt::Display for GaussPolyFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            let axes = vec!["[0+0i; 0+0i; 0+0i]"; self.arity].join(", ");
            return write!(f, "term(0+0i, {axes})");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|t| {
                let axes: Vec<String> = t
                    .axes
                    .iter()
                    .map(|a| {
                        let p: Vec<String> = a.poly.iter().map(|&c| fmt_complex(c)).collect();
                        format!("[{}; {}; {}]", p.join(", "), fmt_complex(a.rate), fmt_complex(a.shift))
                    })
                    .collect();
                format!("term({}, {})", fmt_complex(t.coeff), axes.join(", "))
            })
            .collect();
        f.write_str(&parts.join(" + "))
    }
}
