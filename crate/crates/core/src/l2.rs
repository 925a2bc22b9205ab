//! Real functions on `[0, T]`: inner products, norms, orthogonality and
//! process weights.
//!
//! Two representations are supported. The exact form is a finite sum of
//! polynomial pieces `p(t)·χ_[lo, hi)(t)` and is closed under sums, products
//! and antiderivatives, so inner products are computed in closed form. The
//! sampled form holds `N + 1` values on the uniform grid and is integrated
//! with the trapezoid rule.
//!
//! Indicator pieces are half-open, `[lo, hi)`, except that a piece ending at
//! `T` includes `T`. With this convention `χ_[0, t]` evaluated at the left
//! endpoints of a grid covers exactly the cells left of `t`.

use std::fmt;

use crate::error::{Error, Result};

/// Relative orthogonality bound for exact-form sets.
pub const EXACT_ORTHO_TOL: f64 = 1e-12;
/// Relative orthogonality bound for sets containing sampled members.
pub const GRID_ORTHO_TOL: f64 = 1e-8;
/// Relative zero threshold for the sampled `Supp∞` test.
pub const GRID_ZERO_TOL: f64 = 1e-12;
/// Default number of grid steps for sampled functions.
pub const DEFAULT_GRID: usize = 1024;

// coefficients below this fraction of the largest one count as zero
const EXACT_ZERO_REL: f64 = 1e-14;

#[derive(Clone, Debug, PartialEq)]
pub struct Piece {
    pub lo: f64,
    pub hi: f64,
    /// Expansion point; `coeffs` are in powers of `t - origin`.
    pub origin: f64,
    pub coeffs: Vec<f64>,
}

impl Piece {
    pub fn new(lo: f64, hi: f64, coeffs: Vec<f64>) -> Self {
        Piece {
            lo,
            hi,
            origin: 0.0,
            coeffs,
        }
    }

    pub fn value(&self, t: f64) -> f64 {
        poly::eval(&self.coeffs, t - self.origin)
    }

    /// Coefficients in powers of `t - origin`.
    pub fn recentered(&self, origin: f64) -> Vec<f64> {
        if origin == self.origin {
            self.coeffs.clone()
        } else {
            poly::compose_linear(&self.coeffs, origin - self.origin, 1.0)
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Form {
    Exact(Vec<Piece>),
    /// `N + 1` samples at `t_i = i T / N`, linearly interpolated.
    Sampled(Vec<f64>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct L2Fn {
    domain_end: f64,
    form: Form,
    label: String,
}

pub(crate) mod poly {
    pub fn eval(c: &[f64], t: f64) -> f64 {
        c.iter().rev().fold(0.0, |acc, &a| acc * t + a)
    }

    pub fn add(a: &[f64], b: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; a.len().max(b.len())];
        for (i, v) in a.iter().enumerate() {
            out[i] += v;
        }
        for (i, v) in b.iter().enumerate() {
            out[i] += v;
        }
        out
    }

    pub fn mul(a: &[f64], b: &[f64]) -> Vec<f64> {
        if a.is_empty() || b.is_empty() {
            return Vec::new();
        }
        let mut out = vec![0.0; a.len() + b.len() - 1];
        for (i, x) in a.iter().enumerate() {
            for (j, y) in b.iter().enumerate() {
                out[i + j] += x * y;
            }
        }
        out
    }

    /// Antiderivative vanishing at zero.
    pub fn integral(c: &[f64]) -> Vec<f64> {
        let mut out = Vec::with_capacity(c.len() + 1);
        out.push(0.0);
        for (k, v) in c.iter().enumerate() {
            out.push(v / (k as f64 + 1.0));
        }
        out
    }

    /// Coefficients of `p(alpha + beta t)`.
    pub fn compose_linear(c: &[f64], alpha: f64, beta: f64) -> Vec<f64> {
        let mut out = vec![0.0; c.len().max(1)];
        let mut power = vec![1.0];
        for &ck in c {
            for (i, v) in power.iter().enumerate() {
                out[i] += ck * v;
            }
            power = mul(&power, &[alpha, beta]);
        }
        out
    }
}

/// Coefficients of the Legendre polynomial `P_k(x)` in monomials of `x`.
fn legendre_coeffs(k: usize) -> Vec<f64> {
    let mut prev = vec![1.0];
    if k == 0 {
        return prev;
    }
    let mut cur = vec![0.0, 1.0];
    for n in 1..k {
        // (n+1) P_{n+1} = (2n+1) x P_n - n P_{n-1}
        let nf = n as f64;
        let x_cur = poly::mul(&cur, &[0.0, 1.0]);
        let mut next = vec![0.0; n + 2];
        for (i, v) in x_cur.iter().enumerate() {
            next[i] += (2.0 * nf + 1.0) * v;
        }
        for (i, v) in prev.iter().enumerate() {
            next[i] -= nf * v;
        }
        for v in &mut next {
            *v /= nf + 1.0;
        }
        prev = cur;
        cur = next;
    }
    cur
}

fn check_domain(t: f64) -> Result<()> {
    if t.is_finite() && t > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("domain end must be positive, got {t}")))
    }
}

impl L2Fn {
    pub fn from_pieces(domain_end: f64, pieces: Vec<Piece>) -> Result<Self> {
        check_domain(domain_end)?;
        let mut kept = Vec::with_capacity(pieces.len());
        for mut p in pieces {
            if !(p.lo.is_finite() && p.hi.is_finite() && p.origin.is_finite())
                || p.coeffs.iter().any(|c| !c.is_finite())
            {
                return Err(Error::InvalidArgument("non-finite piece".into()));
            }
            p.lo = p.lo.max(0.0);
            p.hi = p.hi.min(domain_end);
            if p.hi > p.lo {
                kept.push(p);
            }
        }
        Ok(L2Fn {
            domain_end,
            form: Form::Exact(kept),
            label: String::new(),
        })
        .map(|f| {
            let label = f.to_expr();
            f.with_label(label)
        })
    }

    pub fn poly(domain_end: f64, coeffs: &[f64]) -> Result<Self> {
        Self::from_pieces(domain_end, vec![Piece::new(0.0, domain_end, coeffs.to_vec())])
    }

    pub fn constant(domain_end: f64, c: f64) -> Result<Self> {
        Self::poly(domain_end, &[c])
    }

    pub fn indicator(domain_end: f64, a: f64, b: f64) -> Result<Self> {
        Self::from_pieces(domain_end, vec![Piece::new(a, b, vec![1.0])])
    }

    /// `P_k(2t/T - 1)`, orthogonal on `[0, T]` with squared norm `T/(2k+1)`.
    pub fn shifted_legendre(domain_end: f64, k: usize) -> Result<Self> {
        check_domain(domain_end)?;
        // expanded about T/2, where the coefficients stay small
        let c = poly::compose_linear(&legendre_coeffs(k), 0.0, 2.0 / domain_end);
        let piece = Piece {
            origin: domain_end / 2.0,
            ..Piece::new(0.0, domain_end, c)
        };
        Ok(Self::from_pieces(domain_end, vec![piece])?.with_label(format!("legendre({k})")))
    }

    pub fn sampled(domain_end: f64, values: Vec<f64>) -> Result<Self> {
        check_domain(domain_end)?;
        if values.len() < 3 {
            return Err(Error::InvalidArgument("need at least 3 samples".into()));
        }
        Ok(L2Fn {
            domain_end,
            label: format!("sampled({})", values.len() - 1),
            form: Form::Sampled(values),
        })
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn domain_end(&self) -> f64 {
        self.domain_end
    }

    pub fn form(&self) -> &Form {
        &self.form
    }

    pub fn is_exact(&self) -> bool {
        matches!(self.form, Form::Exact(_))
    }

    pub fn eval(&self, t: f64) -> f64 {
        match &self.form {
            Form::Exact(pieces) => pieces
                .iter()
                .filter(|p| p.lo <= t && (t < p.hi || (p.hi == self.domain_end && t == p.hi)))
                .map(|p| p.value(t))
                .sum(),
            Form::Sampled(v) => {
                let n = v.len() - 1;
                let x = (t / self.domain_end * n as f64).clamp(0.0, n as f64);
                let i = (x.floor() as usize).min(n - 1);
                let frac = x - i as f64;
                v[i] * (1.0 - frac) + v[i + 1] * frac
            }
        }
    }

    /// Values at `t_i = i T / steps` for `i = 0..=steps`.
    pub fn samples(&self, steps: usize) -> Vec<f64> {
        (0..=steps)
            .map(|i| self.eval(grid_time(self.domain_end, steps, i)))
            .collect()
    }

    fn same_domain(&self, other: &L2Fn) -> Result<()> {
        if self.domain_end != other.domain_end {
            Err(Error::DomainMismatch {
                left: self.domain_end,
                right: other.domain_end,
            })
        } else {
            Ok(())
        }
    }

    fn sample_steps(&self) -> Option<usize> {
        match &self.form {
            Form::Sampled(v) => Some(v.len() - 1),
            Form::Exact(_) => None,
        }
    }

    fn common_steps(&self, other: &L2Fn) -> usize {
        match (self.sample_steps(), other.sample_steps()) {
            (Some(a), Some(b)) => a.max(b),
            (Some(a), None) | (None, Some(a)) => a,
            (None, None) => DEFAULT_GRID,
        }
    }

    pub fn scale(&self, c: f64) -> L2Fn {
        let form = match &self.form {
            Form::Exact(pieces) => Form::Exact(
                pieces
                    .iter()
                    .map(|p| Piece {
                        coeffs: p.coeffs.iter().map(|v| v * c).collect(),
                        ..p.clone()
                    })
                    .collect(),
            ),
            Form::Sampled(v) => Form::Sampled(v.iter().map(|x| x * c).collect()),
        };
        L2Fn {
            domain_end: self.domain_end,
            form,
            label: format!("scale({c}, {})", self.label),
        }
    }

    pub fn add(&self, other: &L2Fn) -> Result<L2Fn> {
        self.same_domain(other)?;
        let label = format!("sum({}, {})", self.label, other.label);
        let form = match (&self.form, &other.form) {
            (Form::Exact(a), Form::Exact(b)) => Form::Exact(a.iter().chain(b).cloned().collect()),
            _ => {
                let n = self.common_steps(other);
                let (a, b) = (self.samples(n), other.samples(n));
                Form::Sampled(a.iter().zip(&b).map(|(x, y)| x + y).collect())
            }
        };
        Ok(L2Fn {
            domain_end: self.domain_end,
            form,
            label,
        })
    }

    pub fn mul(&self, other: &L2Fn) -> Result<L2Fn> {
        self.same_domain(other)?;
        let label = format!("prod({}, {})", self.label, other.label);
        let form = match (&self.form, &other.form) {
            (Form::Exact(a), Form::Exact(b)) => {
                let mut out = Vec::with_capacity(a.len() * b.len());
                for pa in a {
                    for pb in b {
                        let lo = pa.lo.max(pb.lo);
                        let hi = pa.hi.min(pb.hi);
                        if hi > lo {
                            let mid = 0.5 * (lo + hi);
                            out.push(Piece {
                                lo,
                                hi,
                                origin: mid,
                                coeffs: poly::mul(&pa.recentered(mid), &pb.recentered(mid)),
                            });
                        }
                    }
                }
                Form::Exact(out)
            }
            _ => {
                let n = self.common_steps(other);
                let (a, b) = (self.samples(n), other.samples(n));
                Form::Sampled(a.iter().zip(&b).map(|(x, y)| x * y).collect())
            }
        };
        Ok(L2Fn {
            domain_end: self.domain_end,
            form,
            label,
        })
    }

    /// `(u, v)_2 = ∫_0^T u v dt`: exact for two exact forms, trapezoid otherwise.
    pub fn inner(&self, other: &L2Fn) -> Result<f64> {
        self.same_domain(other)?;
        match (&self.form, &other.form) {
            (Form::Exact(a), Form::Exact(b)) => {
                let mut total = 0.0;
                for pa in a {
                    for pb in b {
                        let lo = pa.lo.max(pb.lo);
                        let hi = pa.hi.min(pb.hi);
                        if hi > lo {
                            let mid = 0.5 * (lo + hi);
                            let anti = poly::integral(&poly::mul(&pa.recentered(mid), &pb.recentered(mid)));
                            total += poly::eval(&anti, hi - mid) - poly::eval(&anti, lo - mid);
                        }
                    }
                }
                Ok(total)
            }
            _ => {
                let n = self.common_steps(other);
                Ok(trapezoid_product(&self.samples(n), &other.samples(n), self.domain_end))
            }
        }
    }

    pub fn norm(&self) -> f64 {
        self.norm_squared().sqrt()
    }

    pub fn norm_squared(&self) -> f64 {
        self.inner(self).expect("same domain").max(0.0)
    }

    /// Disjoint, sorted pieces covering `[0, T]`; gaps carry the zero polynomial.
    pub fn normalized_pieces(&self) -> Option<Vec<Piece>> {
        let Form::Exact(pieces) = &self.form else {
            return None;
        };
        let mut cuts: Vec<f64> = vec![0.0, self.domain_end];
        for p in pieces {
            cuts.push(p.lo);
            cuts.push(p.hi);
        }
        cuts.sort_by(f64::total_cmp);
        cuts.dedup();
        let mut out = Vec::with_capacity(cuts.len());
        for w in cuts.windows(2) {
            let (lo, hi) = (w[0], w[1]);
            let mid = 0.5 * (lo + hi);
            let mut coeffs = vec![0.0];
            for p in pieces.iter().filter(|p| p.lo <= lo && p.hi >= hi) {
                coeffs = poly::add(&coeffs, &p.recentered(mid));
            }
            out.push(Piece {
                lo,
                hi,
                origin: mid,
                coeffs,
            });
        }
        Some(out)
    }

    /// Piece boundaries strictly inside `(0, T)`; empty for sampled forms.
    pub fn breakpoints(&self) -> Vec<f64> {
        let Form::Exact(pieces) = &self.form else {
            return Vec::new();
        };
        let mut cuts: Vec<f64> = pieces
            .iter()
            .flat_map(|p| [p.lo, p.hi])
            .filter(|&c| c > 0.0 && c < self.domain_end)
            .collect();
        cuts.sort_by(f64::total_cmp);
        cuts.dedup();
        cuts
    }

    /// `t ↦ ∫_0^t self(s) ds`, exact for exact forms and cumulative trapezoid
    /// for sampled ones.
    pub fn antiderivative(&self) -> L2Fn {
        let label = format!("integral({})", self.label);
        let form = match &self.form {
            Form::Exact(_) => {
                let pieces = self.normalized_pieces().expect("exact form");
                let mut acc = 0.0;
                let mut out = Vec::with_capacity(pieces.len());
                for p in pieces {
                    let mut anti = poly::integral(&p.coeffs);
                    let at_lo = poly::eval(&anti, p.lo - p.origin);
                    let at_hi = poly::eval(&anti, p.hi - p.origin);
                    anti[0] += acc - at_lo;
                    acc += at_hi - at_lo;
                    out.push(Piece { coeffs: anti, ..p });
                }
                Form::Exact(out)
            }
            Form::Sampled(v) => {
                let dt = self.domain_end / (v.len() - 1) as f64;
                let mut acc = 0.0;
                let mut out = Vec::with_capacity(v.len());
                out.push(0.0);
                for w in v.windows(2) {
                    acc += 0.5 * (w[0] + w[1]) * dt;
                    out.push(acc);
                }
                Form::Sampled(out)
            }
        };
        L2Fn {
            domain_end: self.domain_end,
            form,
            label,
        }
    }

    /// True only for a descriptor that is identically zero.
    pub fn is_zero(&self) -> bool {
        match &self.form {
            Form::Exact(_) => self
                .normalized_pieces()
                .unwrap()
                .iter()
                .all(|p| p.coeffs.iter().all(|&c| c == 0.0)),
            Form::Sampled(v) => v.iter().all(|&x| x == 0.0),
        }
    }

    /// Serialization in the expression grammar understood by [`crate::expr`].
    pub fn to_expr(&self) -> String {
        match &self.form {
            Form::Exact(pieces) => {
                let parts: Vec<String> = pieces
                    .iter()
                    .map(|p| {
                        let coeffs: Vec<String> = p.recentered(0.0).iter().map(|c| format!("{c}")).collect();
                        let body = format!("poly({})", coeffs.join(", "));
                        if p.lo == 0.0 && p.hi == self.domain_end {
                            body
                        } else {
                            format!("prod({body}, indicator({}, {}))", p.lo, p.hi)
                        }
                    })
                    .collect();
                match parts.len() {
                    0 => "poly(0)".to_string(),
                    1 => parts.into_iter().next().unwrap(),
                    _ => format!("sum({})", parts.join(", ")),
                }
            }
            Form::Sampled(v) => format!("sampled({})", v.len() - 1),
        }
    }
}

impl fmt::Display for L2Fn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label)
    }
}

pub(crate) fn grid_time(t_end: f64, steps: usize, i: usize) -> f64 {
    if i == steps {
        t_end
    } else {
        i as f64 * t_end / steps as f64
    }
}

fn trapezoid_product(a: &[f64], b: &[f64], t_end: f64) -> f64 {
    let n = a.len() - 1;
    let dt = t_end / n as f64;
    let interior: f64 = (1..n).map(|i| a[i] * b[i]).sum();
    dt * (interior + 0.5 * (a[0] * b[0] + a[n] * b[n]))
}

/// `(u, v)_2`.
pub fn inner_product(u: &L2Fn, v: &L2Fn) -> Result<f64> {
    u.inner(v)
}

/// Membership in `Supp∞[0,T]`: bounded and nonzero almost everywhere.
///
/// Exact forms are always bounded; a nonzero polynomial has finitely many
/// roots, so the zero set has positive measure only where some piece of the
/// normalized form is the zero polynomial. For sampled forms `zero_tol` is
/// relative to `max|h|` and a grid cell counts as a zero set when both of its
/// endpoints are below the threshold.
pub fn is_supp_inf(h: &L2Fn, zero_tol: f64) -> bool {
    match &h.form {
        Form::Exact(_) => {
            let pieces = h.normalized_pieces().unwrap();
            let scale = pieces
                .iter()
                .flat_map(|p| p.coeffs.iter())
                .fold(0.0f64, |m, c| m.max(c.abs()));
            if scale == 0.0 {
                return false;
            }
            pieces
                .iter()
                .all(|p| p.coeffs.iter().any(|c| c.abs() > EXACT_ZERO_REL * scale))
        }
        Form::Sampled(v) => {
            if v.iter().any(|x| !x.is_finite()) {
                return false;
            }
            let max = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
            if max == 0.0 {
                return false;
            }
            let thr = zero_tol * max;
            !v.windows(2).any(|w| w[0].abs() <= thr && w[1].abs() <= thr)
        }
    }
}

fn default_tolerance(members: &[L2Fn]) -> f64 {
    if members.iter().all(L2Fn::is_exact) {
        EXACT_ORTHO_TOL
    } else {
        GRID_ORTHO_TOL
    }
}

/// Pairwise check returning the first violation.
pub fn check_orthogonal(members: &[L2Fn], tolerance: f64) -> Result<()> {
    if members.is_empty() {
        return Err(Error::EmptySet);
    }
    let norms: Vec<f64> = members.iter().map(L2Fn::norm).collect();
    if let Some(j) = norms.iter().position(|&n| n <= 0.0) {
        return Err(Error::ZeroMember(j));
    }
    for i in 0..members.len() {
        for j in i + 1..members.len() {
            let ratio = members[i].inner(&members[j])?.abs() / (norms[i] * norms[j]);
            if ratio > tolerance {
                return Err(Error::NotOrthogonal { i, j, ratio, tolerance });
            }
        }
    }
    Ok(())
}

pub fn is_orthogonal_set(members: &[L2Fn], tolerance: f64) -> bool {
    check_orthogonal(members, tolerance).is_ok()
}

/// A weight `h` for the process `Z_h`, with its `Supp∞` flags.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightFn {
    base: L2Fn,
    bounded: bool,
    nonzero_ae: bool,
}

impl WeightFn {
    /// Inspects `base` and rejects it unless it lies in `Supp∞[0,T]`.
    pub fn new(base: L2Fn) -> Result<Self> {
        let w = Self::inspect(base);
        if w.is_supp_inf() {
            Ok(w)
        } else {
            Err(Error::NotSuppInf(w.base.label.clone()))
        }
    }

    /// Records the flags without rejecting.
    pub fn inspect(base: L2Fn) -> Self {
        let bounded = match &base.form {
            Form::Exact(_) => true,
            Form::Sampled(v) => v.iter().all(|x| x.is_finite()),
        };
        let nonzero_ae = is_supp_inf(&base, GRID_ZERO_TOL);
        WeightFn {
            base,
            bounded,
            nonzero_ae,
        }
    }

    pub fn unit(domain_end: f64) -> Result<Self> {
        Self::new(L2Fn::constant(domain_end, 1.0)?.with_label("1"))
    }

    pub fn function(&self) -> &L2Fn {
        &self.base
    }

    pub fn label(&self) -> &str {
        self.base.label()
    }

    pub fn is_bounded(&self) -> bool {
        self.bounded
    }

    pub fn is_nonzero_ae(&self) -> bool {
        self.nonzero_ae
    }

    pub fn is_supp_inf(&self) -> bool {
        self.bounded && self.nonzero_ae
    }

    pub fn negated(&self) -> WeightFn {
        WeightFn {
            base: self.base.scale(-1.0).with_label(format!("-({})", self.base.label)),
            ..self.clone()
        }
    }

    /// Pointwise product of two weights (e.g. `k h_1`).
    pub fn product(&self, other: &WeightFn) -> Result<WeightFn> {
        WeightFn::new(
            self.base
                .mul(&other.base)?
                .with_label(format!("({})*({})", self.label(), other.label())),
        )
    }
}

/// Orthogonal set `A = {α_1, …, α_n}` of nonzero functions.
#[derive(Clone, Debug, PartialEq)]
pub struct OrthogonalSet {
    members: Vec<L2Fn>,
    tolerance: f64,
}

impl OrthogonalSet {
    pub fn new(members: Vec<L2Fn>) -> Result<Self> {
        let tol = default_tolerance(&members);
        Self::with_tolerance(members, tol)
    }

    pub fn with_tolerance(members: Vec<L2Fn>, tolerance: f64) -> Result<Self> {
        check_orthogonal(&members, tolerance)?;
        let t = members[0].domain_end;
        if let Some(m) = members.iter().find(|m| m.domain_end != t) {
            return Err(Error::DomainMismatch {
                left: t,
                right: m.domain_end,
            });
        }
        Ok(OrthogonalSet { members, tolerance })
    }

    /// `{P̃_0, …, P̃_{n-1}}` on `[0, T]`.
    pub fn shifted_legendre(domain_end: f64, n: usize) -> Result<Self> {
        let members = (0..n)
            .map(|k| L2Fn::shifted_legendre(domain_end, k))
            .collect::<Result<Vec<_>>>()?;
        Self::new(members)
    }

    pub fn members(&self) -> &[L2Fn] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn tolerance(&self) -> f64 {
        self.tolerance
    }

    pub fn domain_end(&self) -> f64 {
        self.members[0].domain_end
    }

    /// `‖α_j‖_2²` for each member.
    pub fn norms_squared(&self) -> Vec<f64> {
        self.members.iter().map(L2Fn::norm_squared).collect()
    }

    /// `A·h`, without checking orthogonality.
    pub fn multiplied(&self, h: &WeightFn) -> Result<Vec<L2Fn>> {
        self.members
            .iter()
            .map(|a| {
                a.mul(h.function())
                    .map(|f| f.with_label(format!("({})*({})", a.label(), h.label())))
            })
            .collect()
    }

    /// `A·h` as an orthogonal set; fails unless `h ∈ O_Supp∞(A)`.
    pub fn rebased(&self, h: &WeightFn) -> Result<OrthogonalSet> {
        if !h.is_supp_inf() {
            return Err(Error::NotSuppInf(h.label().to_string()));
        }
        let members = self.multiplied(h)?;
        let tol = self.tolerance.max(default_tolerance(&members));
        check_orthogonal(&members, tol).map_err(|e| Error::IncompatibleWeight {
            weight: h.label().to_string(),
            reason: e.to_string(),
        })?;
        Ok(OrthogonalSet {
            members,
            tolerance: tol,
        })
    }

    pub fn admits(&self, h: &WeightFn) -> bool {
        self.rebased(h).is_ok()
    }
}

/// `(α_i α_j, h²)_2 = 0` for all `i < j`, normalized by `‖α_i h‖ ‖α_j h‖`.
pub fn satisfies_square_condition(set: &OrthogonalSet, h: &WeightFn) -> Result<bool> {
    let h2 = h.function().mul(h.function())?;
    let weighted = set.multiplied(h)?;
    let norms: Vec<f64> = weighted.iter().map(L2Fn::norm).collect();
    if norms.iter().any(|&n| n <= 0.0) {
        return Ok(false);
    }
    let tol = set.tolerance.max(default_tolerance(&weighted));
    let m = set.members();
    for i in 0..m.len() {
        for j in i + 1..m.len() {
            let pair = m[i].mul(&m[j])?;
            if pair.inner(&h2)?.abs() > tol * norms[i] * norms[j] {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Returns the first candidate `h` for which `A·h` is orthogonal.
///
/// Candidates are validated, never synthesized. The square condition
/// `h² ⟂ α_i α_j` is evaluated first; a candidate passing it is then
/// confirmed by checking `A·h` directly.
pub fn compatible_weight(set: &OrthogonalSet, candidates: &[WeightFn]) -> Result<WeightFn> {
    for h in candidates {
        if !h.is_supp_inf() || h.function().domain_end() != set.domain_end() {
            continue;
        }
        if !satisfies_square_condition(set, h)? {
            continue;
        }
        if set.rebased(h).is_ok() {
            return Ok(h.clone());
        }
    }
    Err(Error::NoCompatibleWeight(candidates.len()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t_fn() -> L2Fn {
        L2Fn::poly(1.0, &[0.0, 1.0]).unwrap()
    }

    #[test]
    fn inner_product_examples() {
        let one = L2Fn::constant(1.0, 1.0).unwrap();
        assert_eq!(inner_product(&one, &one).unwrap(), 1.0);
        let left = L2Fn::indicator(1.0, 0.0, 0.5).unwrap();
        let right = L2Fn::indicator(1.0, 0.5, 1.0).unwrap();
        assert_eq!(inner_product(&left, &right).unwrap(), 0.0);
        // ∫_0^1 t² dt = 1/3
        assert!((inner_product(&t_fn(), &t_fn()).unwrap() - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn mismatched_domains_error() {
        let a = L2Fn::constant(1.0, 1.0).unwrap();
        let b = L2Fn::constant(2.0, 1.0).unwrap();
        assert!(matches!(a.inner(&b), Err(Error::DomainMismatch { .. })));
    }

    #[test]
    fn supp_inf_examples() {
        assert!(is_supp_inf(&L2Fn::constant(1.0, 1.0).unwrap(), GRID_ZERO_TOL));
        assert!(!is_supp_inf(&L2Fn::indicator(1.0, 0.0, 0.5).unwrap(), GRID_ZERO_TOL));
        assert!(is_supp_inf(&t_fn(), GRID_ZERO_TOL));
        // cancellation to an exact zero on [0, 1/2)
        let one = L2Fn::constant(1.0, 1.0).unwrap();
        let hole = one.add(&L2Fn::indicator(1.0, 0.0, 0.5).unwrap().scale(-1.0)).unwrap();
        assert!(!is_supp_inf(&hole, GRID_ZERO_TOL));
    }

    #[test]
    fn supp_inf_sampled() {
        let t = L2Fn::sampled(1.0, t_fn().samples(64)).unwrap();
        assert!(is_supp_inf(&t, GRID_ZERO_TOL));
        let mut v = vec![1.0; 65];
        v[10] = 0.0;
        v[11] = 0.0;
        assert!(!is_supp_inf(&L2Fn::sampled(1.0, v).unwrap(), GRID_ZERO_TOL));
    }

    #[test]
    fn orthogonality_examples() {
        let left = L2Fn::indicator(1.0, 0.0, 0.5).unwrap();
        let right = L2Fn::indicator(1.0, 0.5, 1.0).unwrap();
        assert!(is_orthogonal_set(&[left, right], EXACT_ORTHO_TOL));
        let one = L2Fn::constant(1.0, 1.0).unwrap();
        assert!(!is_orthogonal_set(&[one.clone(), t_fn()], EXACT_ORTHO_TOL));
        let centered = L2Fn::poly(1.0, &[-0.5, 1.0]).unwrap();
        assert!(is_orthogonal_set(&[one, centered], EXACT_ORTHO_TOL));
    }

    #[test]
    fn zero_member_rejected() {
        let zero = L2Fn::constant(1.0, 0.0).unwrap();
        assert_eq!(check_orthogonal(&[zero], 1e-12), Err(Error::ZeroMember(0)));
    }

    #[test]
    fn legendre_norms() {
        for k in 0..6 {
            let p = L2Fn::shifted_legendre(1.0, k).unwrap();
            assert!((p.norm_squared() - 1.0 / (2 * k + 1) as f64).abs() < 1e-13);
            assert!((p.eval(1.0) - 1.0).abs() < 1e-12);
        }
        let set = OrthogonalSet::shifted_legendre(1.0, 5).unwrap();
        assert_eq!(set.len(), 5);
    }

    #[test]
    fn constant_weight_always_compatible() {
        let set = OrthogonalSet::shifted_legendre(1.0, 3).unwrap();
        let c = WeightFn::new(L2Fn::constant(1.0, -2.5).unwrap()).unwrap();
        assert_eq!(compatible_weight(&set, std::slice::from_ref(&c)).unwrap(), c);
    }

    #[test]
    fn disjoint_support_accepts_any_weight() {
        let set = OrthogonalSet::new(vec![
            L2Fn::indicator(1.0, 0.0, 0.5).unwrap(),
            L2Fn::indicator(1.0, 0.5, 1.0).unwrap().mul(&t_fn()).unwrap(),
        ])
        .unwrap();
        let h = WeightFn::new(L2Fn::poly(1.0, &[1.0, 0.5, -0.3]).unwrap()).unwrap();
        assert!(compatible_weight(&set, &[h]).is_ok());
    }

    #[test]
    fn projected_square_weight_accepted() {
        // A = {1, t - 1/2}: h² must be orthogonal to t - 1/2. h = 1 + t(1-t)
        // is symmetric about 1/2, so (h², t - 1/2) = 0.
        let set = OrthogonalSet::new(vec![
            L2Fn::constant(1.0, 1.0).unwrap(),
            L2Fn::poly(1.0, &[-0.5, 1.0]).unwrap(),
        ])
        .unwrap();
        let bad = WeightFn::new(L2Fn::poly(1.0, &[1.0, 0.5]).unwrap()).unwrap();
        let good = WeightFn::new(L2Fn::poly(1.0, &[1.0, 1.0, -1.0]).unwrap()).unwrap();
        assert!(!set.admits(&bad));
        assert_eq!(compatible_weight(&set, &[bad.clone(), good.clone()]).unwrap(), good);
        assert_eq!(compatible_weight(&set, &[bad]), Err(Error::NoCompatibleWeight(1)));
    }

    #[test]
    fn antiderivative_exact() {
        // β_h for h = t is t³/3
        let beta = t_fn().mul(&t_fn()).unwrap().antiderivative();
        for &t in &[0.0, 0.25, 0.5, 1.0] {
            assert!((beta.eval(t) - t * t * t / 3.0).abs() < 1e-15);
        }
        let step = L2Fn::indicator(1.0, 0.25, 0.5).unwrap().antiderivative();
        assert_eq!(step.eval(0.1), 0.0);
        assert!((step.eval(0.75) - 0.25).abs() < 1e-15);
    }

    #[test]
    fn sampled_agrees_with_exact_quadratically() {
        let f = L2Fn::poly(1.0, &[1.0, -2.0, 0.5, 3.0, -1.0]).unwrap();
        let g = L2Fn::poly(1.0, &[0.2, 1.0, 0.0, -0.7]).unwrap();
        let exact = f.inner(&g).unwrap();
        let errs: Vec<f64> = [128usize, 256, 512]
            .iter()
            .map(|&n| {
                let fs = L2Fn::sampled(1.0, f.samples(n)).unwrap();
                (fs.inner(&g).unwrap() - exact).abs()
            })
            .collect();
        for w in errs.windows(2) {
            let ratio = w[0] / w[1];
            assert!((ratio - 4.0).abs() < 0.2, "ratio {ratio}");
        }
        // C N^-2 with C estimated at N = 128
        let c = errs[0] * 128.0 * 128.0;
        assert!(errs[2] <= 1.01 * c / (512.0 * 512.0));
    }
}
