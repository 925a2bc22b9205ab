//! Brownian paths on a uniform grid, Stieltjes sums, the weighted process
//! `Z_h(x, t) = ⟨h χ_[0,t], x⟩` and Monte Carlo estimates.
//!
//! Path `m` of an ensemble with seed `s` draws its increments from the
//! ChaCha8 stream `(s, m)`, so any subset of paths can be regenerated alone
//! and results do not depend on how work is split across threads.

use std::io::{Read, Write};

use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::l2::{grid_time, L2Fn, WeightFn};

/// Paths generated per parallel work item.
pub const CHUNK: usize = 2048;

/// First eight bytes of an ensemble dump.
pub const DUMP_MAGIC: [u8; 8] = *b"FPPATHS1";

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Grid {
    steps: usize,
    t_end: f64,
}

impl Grid {
    pub fn new(steps: usize, t_end: f64) -> Result<Self> {
        if steps < 2 {
            return Err(Error::InvalidArgument(format!("grid needs N >= 2, got {steps}")));
        }
        if !(t_end.is_finite() && t_end > 0.0) {
            return Err(Error::InvalidArgument(format!("bad horizon {t_end}")));
        }
        Ok(Grid { steps, t_end })
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn t_end(&self) -> f64 {
        self.t_end
    }

    pub fn dt(&self) -> f64 {
        self.t_end / self.steps as f64
    }

    pub fn time(&self, i: usize) -> f64 {
        grid_time(self.t_end, self.steps, i)
    }

    /// Index of the grid point at `t`, if `t` lies on the grid.
    pub fn index_of(&self, t: f64) -> Result<usize> {
        let x = t / self.t_end * self.steps as f64;
        let i = x.round();
        if (x - i).abs() > 1e-9 || i < 0.0 || i > self.steps as f64 {
            return Err(Error::InvalidArgument(format!("t = {t} is not a grid point")));
        }
        Ok(i as usize)
    }
}

/// Writes the increments of path `index` into `out` (length `N`).
pub fn fill_increments(grid: &Grid, seed: u64, index: u64, out: &mut [f64]) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    let sd = grid.dt().sqrt();
    for v in out.iter_mut() {
        let z: f64 = rng.sample(StandardNormal);
        *v = sd * z;
    }
}

/// `M` paths stored as increments; path values are their running sums, so
/// `x(0) = 0` exactly.
#[derive(Clone, Debug, PartialEq)]
pub struct PathEnsemble {
    grid: Grid,
    seed: u64,
    paths: usize,
    increments: Vec<f64>,
}

pub fn sample_brownian(grid: Grid, paths: usize, seed: u64) -> Result<PathEnsemble> {
    if paths == 0 {
        return Err(Error::InvalidArgument("need at least one path".into()));
    }
    let n = grid.steps;
    let mut increments = vec![0.0; paths * n];
    increments.par_chunks_mut(n * CHUNK).enumerate().for_each(|(c, block)| {
        for (k, row) in block.chunks_mut(n).enumerate() {
            fill_increments(&grid, seed, (c * CHUNK + k) as u64, row);
        }
    });
    Ok(PathEnsemble {
        grid,
        seed,
        paths,
        increments,
    })
}

impl PathEnsemble {
    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn len(&self) -> usize {
        self.paths
    }

    pub fn is_empty(&self) -> bool {
        self.paths == 0
    }

    pub fn increments(&self, m: usize) -> &[f64] {
        let n = self.grid.steps;
        &self.increments[m * n..(m + 1) * n]
    }

    /// `x(t_0), …, x(t_N)` for path `m`.
    pub fn values(&self, m: usize) -> Vec<f64> {
        running_sum(self.increments(m))
    }

    /// The ensemble of `ρ x`.
    pub fn scaled(&self, rho: f64) -> PathEnsemble {
        PathEnsemble {
            increments: self.increments.iter().map(|v| v * rho).collect(),
            ..self.clone()
        }
    }

    /// 32-byte header (magic, `N`, `M`, seed as little-endian u64) followed by
    /// the `M × (N+1)` value matrix in column-major order as little-endian f64.
    pub fn write_dump<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(&DUMP_MAGIC)?;
        w.write_all(&(self.grid.steps as u64).to_le_bytes())?;
        w.write_all(&(self.paths as u64).to_le_bytes())?;
        w.write_all(&self.seed.to_le_bytes())?;
        let values: Vec<Vec<f64>> = (0..self.paths).map(|m| self.values(m)).collect();
        let mut buf = Vec::with_capacity(self.paths * 8);
        for j in 0..=self.grid.steps {
            buf.clear();
            for row in &values {
                buf.extend_from_slice(&row[j].to_le_bytes());
            }
            w.write_all(&buf)?;
        }
        Ok(())
    }

    /// Reads a dump written by [`PathEnsemble::write_dump`] for horizon `t_end`.
    pub fn read_dump<R: Read>(mut r: R, t_end: f64) -> Result<PathEnsemble> {
        let mut header = [0u8; 32];
        r.read_exact(&mut header)?;
        if header[..8] != DUMP_MAGIC {
            return Err(Error::Io("not an ensemble dump".into()));
        }
        let word = |k: usize| u64::from_le_bytes(header[8 * k..8 * k + 8].try_into().unwrap());
        let (n, m, seed) = (word(1) as usize, word(2) as usize, word(3));
        let grid = Grid::new(n, t_end)?;
        let mut bytes = vec![0u8; m * (n + 1) * 8];
        r.read_exact(&mut bytes)?;
        let at = |j: usize, p: usize| {
            let k = (j * m + p) * 8;
            f64::from_le_bytes(bytes[k..k + 8].try_into().unwrap())
        };
        let mut increments = vec![0.0; m * n];
        for p in 0..m {
            for i in 0..n {
                increments[p * n + i] = at(i + 1, p) - at(i, p);
            }
        }
        Ok(PathEnsemble {
            grid,
            seed,
            paths: m,
            increments,
        })
    }
}

fn running_sum(inc: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(inc.len() + 1);
    let mut acc = 0.0;
    out.push(0.0);
    for v in inc {
        acc += v;
        out.push(acc);
    }
    out
}

/// Left-endpoint weights `v(t_0), …, v(t_{N-1})`.
pub fn stieltjes_weights(v: &L2Fn, grid: &Grid) -> Vec<f64> {
    (0..grid.steps).map(|i| v.eval(grid.time(i))).collect()
}

/// Cell averages `(1/Δt) ∫_{t_i}^{t_{i+1}} v`: the projection of `v` onto
/// step functions, so `Σ w_i Δx_i` has variance within `O(Δt²)` of `‖v‖²`.
pub fn cell_average_weights(v: &L2Fn, grid: &Grid) -> Vec<f64> {
    let big_v = v.antiderivative();
    let dt = grid.dt();
    let nodes: Vec<f64> = (0..=grid.steps).map(|i| big_v.eval(grid.time(i))).collect();
    nodes.windows(2).map(|w| (w[1] - w[0]) / dt).collect()
}

pub fn stieltjes_sum(weights: &[f64], increments: &[f64]) -> f64 {
    weights.iter().zip(increments).map(|(w, d)| w * d).sum()
}

/// `Σ v(t_i) (x(t_{i+1}) - x(t_i))`.
pub fn pwz_integral(v: &L2Fn, grid: &Grid, increments: &[f64]) -> f64 {
    stieltjes_sum(&stieltjes_weights(v, grid), increments)
}

/// Trigonometric orthonormal basis of `L2[0,T]`: the constant, then
/// cosine/sine pairs of increasing frequency, `k_terms` functions in all.
pub fn trig_basis_value(k: usize, t: f64, t_end: f64) -> f64 {
    if k == 0 {
        return 1.0 / t_end.sqrt();
    }
    let freq = k.div_ceil(2) as f64;
    let arg = 2.0 * std::f64::consts::PI * freq * t / t_end;
    let amp = (2.0 / t_end).sqrt();
    if k % 2 == 1 {
        amp * arg.cos()
    } else {
        amp * arg.sin()
    }
}

/// `Σ_{k<K} (v, e_k)_2 ∫ e_k dx` in the trigonometric basis; the stochastic
/// integrals of the basis functions are Stieltjes sums on the path grid and
/// the coefficients use a trapezoid rule on `quad_steps` cells.
pub fn pwz_basis_truncation(v: &L2Fn, grid: &Grid, increments: &[f64], k_terms: usize, quad_steps: usize) -> f64 {
    let t_end = grid.t_end;
    let vq: Vec<f64> = (0..=quad_steps)
        .map(|i| v.eval(grid_time(t_end, quad_steps, i)))
        .collect();
    let dq = t_end / quad_steps as f64;
    (0..k_terms)
        .map(|k| {
            let coeff: f64 = vq
                .iter()
                .enumerate()
                .map(|(i, &f)| {
                    let w = if i == 0 || i == quad_steps { 0.5 } else { 1.0 };
                    w * f * trig_basis_value(k, grid_time(t_end, quad_steps, i), t_end)
                })
                .sum::<f64>()
                * dq;
            let integral: f64 = (0..grid.steps)
                .map(|i| trig_basis_value(k, grid.time(i), t_end) * increments[i])
                .sum();
            coeff * integral
        })
        .sum()
}

/// The process `Z_h` with its variance function `β_h(t) = ∫_0^t h²`.
#[derive(Clone, Debug)]
pub struct ProcessSpec {
    h: WeightFn,
    beta: L2Fn,
}

impl ProcessSpec {
    pub fn new(h: WeightFn) -> Result<Self> {
        let beta = h.function().mul(h.function())?.antiderivative();
        Ok(ProcessSpec { h, beta })
    }

    pub fn weight(&self) -> &WeightFn {
        &self.h
    }

    pub fn beta(&self, t: f64) -> f64 {
        self.beta.eval(t)
    }

    /// Left-endpoint weights of `h χ_[0, t_k]`.
    pub fn weights_to(&self, grid: &Grid, k: usize) -> Vec<f64> {
        (0..grid.steps)
            .map(|i| {
                if i < k {
                    self.h.function().eval(grid.time(i))
                } else {
                    0.0
                }
            })
            .collect()
    }

    /// Cell averages of `h χ_[0, t_k]`; the sample variance then has
    /// O(Δt²) bias against `β_h(t_k)` instead of O(Δt).
    pub fn averaged_weights_to(&self, grid: &Grid, k: usize) -> Vec<f64> {
        let mut w = cell_average_weights(self.h.function(), grid);
        w[k..].iter_mut().for_each(|v| *v = 0.0);
        w
    }

    /// `Z_h(x, t_k)` for `k = 0..=N`.
    pub fn path(&self, grid: &Grid, increments: &[f64]) -> Vec<f64> {
        let h = stieltjes_weights(self.h.function(), grid);
        let scaled: Vec<f64> = h.iter().zip(increments).map(|(a, b)| a * b).collect();
        running_sum(&scaled)
    }
}

/// `Z_h(x, t)` for `t` on the grid.
pub fn gaussian_process(spec: &ProcessSpec, grid: &Grid, increments: &[f64], t: f64) -> Result<f64> {
    let k = grid.index_of(t)?;
    Ok(stieltjes_sum(&spec.weights_to(grid, k), increments))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RelationCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub gap: f64,
}

/// `⟨v, Z_h(x,·)⟩` against `⟨v h, x⟩`, both as left-endpoint sums.
pub fn pwz_relation_check(v: &L2Fn, h: &WeightFn, grid: &Grid, increments: &[f64]) -> Result<RelationCheck> {
    if v.domain_end() != h.function().domain_end() {
        return Err(Error::DomainMismatch {
            left: v.domain_end(),
            right: h.function().domain_end(),
        });
    }
    let vw = stieltjes_weights(v, grid);
    let hw = stieltjes_weights(h.function(), grid);
    // increments of Z_h are h(t_i) Δx_i
    let lhs: f64 = (0..grid.steps).map(|i| vw[i] * (hw[i] * increments[i])).sum();
    let vh: Vec<f64> = vw.iter().zip(&hw).map(|(a, b)| a * b).collect();
    let rhs = stieltjes_sum(&vh, increments);
    Ok(RelationCheck {
        lhs,
        rhs,
        gap: (lhs - rhs).abs(),
    })
}

/// Median pathwise discretization gaps `|S_N - S_2N|` and `|S_2N - S_4N|` of
/// `⟨v h, x⟩`, all three sums taken on the same paths sampled at `4N`.
pub fn refinement_gaps(v: &L2Fn, h: &WeightFn, coarse: usize, paths: usize, seed: u64) -> Result<(f64, f64)> {
    let t_end = v.domain_end();
    let fine = Grid::new(4 * coarse, t_end)?;
    let vh = v.mul(h.function())?;
    let w: Vec<Vec<f64>> = [coarse, 2 * coarse, 4 * coarse]
        .iter()
        .map(|&n| Grid::new(n, t_end).map(|g| stieltjes_weights(&vh, &g)))
        .collect::<Result<_>>()?;
    let mut gaps: Vec<(f64, f64)> = (0..paths)
        .into_par_iter()
        .map(|m| {
            let mut inc = vec![0.0; fine.steps];
            fill_increments(&fine, seed, m as u64, &mut inc);
            let sums: Vec<f64> = w
                .iter()
                .map(|wk| {
                    let stride = fine.steps / wk.len();
                    wk.iter()
                        .enumerate()
                        .map(|(i, a)| a * inc[i * stride..(i + 1) * stride].iter().sum::<f64>())
                        .sum()
                })
                .collect();
            ((sums[0] - sums[1]).abs(), (sums[1] - sums[2]).abs())
        })
        .collect();
    let mut a: Vec<f64> = gaps.iter().map(|g| g.0).collect();
    let mut b: Vec<f64> = gaps.drain(..).map(|g| g.1).collect();
    Ok((median(&mut a), median(&mut b)))
}

fn median(v: &mut [f64]) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Sample mean with standard errors. For complex samples `se` combines the
/// real and imaginary parts, `sqrt(se_re² + se_im²)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct McEstimate {
    pub mean: C64,
    pub se: f64,
    pub se_re: f64,
    pub se_im: f64,
    pub samples: usize,
}

impl McEstimate {
    pub fn from_samples(samples: impl IntoIterator<Item = C64>) -> Self {
        let mut acc = Accumulator::default();
        for s in samples {
            acc.push(s);
        }
        acc.finish()
    }

    /// `|mean - target| ≤ k · se`.
    pub fn within(&self, target: C64, k: f64) -> bool {
        (self.mean - target).norm() <= k * self.se
    }
}

/// Running first and second moments with a compensated (Welford) update.
#[derive(Clone, Copy, Debug, Default)]
pub struct Accumulator {
    n: usize,
    mean: C64,
    m2_re: f64,
    m2_im: f64,
}

impl Accumulator {
    pub fn push(&mut self, x: C64) {
        self.n += 1;
        let d = x - self.mean;
        self.mean += d / self.n as f64;
        let d2 = x - self.mean;
        self.m2_re += d.re * d2.re;
        self.m2_im += d.im * d2.im;
    }

    pub fn finish(&self) -> McEstimate {
        let n = self.n as f64;
        let (se_re, se_im) = if self.n > 1 {
            ((self.m2_re / (n - 1.0) / n).sqrt(), (self.m2_im / (n - 1.0) / n).sqrt())
        } else {
            (f64::INFINITY, f64::INFINITY)
        };
        McEstimate {
            mean: self.mean,
            se: se_re.hypot(se_im),
            se_re,
            se_im,
            samples: self.n,
        }
    }
}

/// Stieltjes sums of a fixed list of integrands over `M` freshly drawn
/// paths, one row of `K` values per path. Paths are generated in chunks and
/// never stored.
#[derive(Clone, Debug)]
pub struct Projections {
    k: usize,
    rows: Vec<f64>,
}

pub fn project(grid: &Grid, paths: usize, seed: u64, integrands: &[Vec<f64>]) -> Result<Projections> {
    let k = integrands.len();
    if let Some(w) = integrands.iter().find(|w| w.len() != grid.steps) {
        return Err(Error::GridMismatch {
            left: grid.steps,
            right: w.len(),
        });
    }
    let mut rows = vec![0.0; paths * k.max(1)];
    if k == 0 {
        return Ok(Projections { k, rows: Vec::new() });
    }
    rows.par_chunks_mut(k * CHUNK).enumerate().for_each(|(c, block)| {
        let mut inc = vec![0.0; grid.steps];
        for (r, row) in block.chunks_mut(k).enumerate() {
            fill_increments(grid, seed, (c * CHUNK + r) as u64, &mut inc);
            for (slot, w) in row.iter_mut().zip(integrands) {
                *slot = stieltjes_sum(w, &inc);
            }
        }
    });
    Ok(Projections { k, rows })
}

impl Projections {
    pub fn len(&self) -> usize {
        self.rows.len().checked_div(self.k).unwrap_or(0)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn width(&self) -> usize {
        self.k
    }

    pub fn row(&self, m: usize) -> &[f64] {
        &self.rows[m * self.k..(m + 1) * self.k]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.rows.chunks(self.k)
    }

    pub fn estimate(&self, f: impl Fn(&[f64]) -> C64) -> McEstimate {
        McEstimate::from_samples(self.rows().map(f))
    }

    /// Several estimates in one pass; `f` fills one sample per output slot.
    pub fn estimate_many(&self, outputs: usize, f: impl Fn(&[f64], &mut [C64])) -> Vec<McEstimate> {
        let mut accs = vec![Accumulator::default(); outputs];
        let mut buf = vec![C64::new(0.0, 0.0); outputs];
        for row in self.rows() {
            f(row, &mut buf);
            for (a, v) in accs.iter_mut().zip(&buf) {
                a.push(*v);
            }
        }
        accs.iter().map(Accumulator::finish).collect()
    }
}

/// One cell of an empirical covariance table.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CovarianceCell {
    pub s: f64,
    pub t: f64,
    pub empirical: f64,
    pub expected: f64,
    pub se: f64,
}

impl CovarianceCell {
    pub fn within(&self, k: f64) -> bool {
        (self.empirical - self.expected).abs() <= k * self.se
    }
}

fn covariance_pairs(p: &Projections, a: usize, b: usize) -> (f64, f64) {
    let n = p.len() as f64;
    let (mut ma, mut mb) = (0.0, 0.0);
    for r in p.rows() {
        ma += r[a];
        mb += r[b];
    }
    ma /= n;
    mb /= n;
    let mut acc = Accumulator::default();
    for r in p.rows() {
        acc.push(C64::new((r[a] - ma) * (r[b] - mb), 0.0));
    }
    let e = acc.finish();
    (e.mean.re * n / (n - 1.0), e.se_re)
}

/// Empirical covariance of `Z_h(·, s)`, `Z_h(·, t)` over all pairs of `times`
/// against `β_h(min(s, t))`.
pub fn covariance_table(
    h: &WeightFn,
    grid: &Grid,
    paths: usize,
    seed: u64,
    times: &[f64],
) -> Result<Vec<CovarianceCell>> {
    let spec = ProcessSpec::new(h.clone())?;
    let integrands = times
        .iter()
        .map(|&t| grid.index_of(t).map(|k| spec.averaged_weights_to(grid, k)))
        .collect::<Result<Vec<_>>>()?;
    let p = project(grid, paths, seed, &integrands)?;
    let mut out = Vec::with_capacity(times.len() * times.len());
    for (a, &s) in times.iter().enumerate() {
        for (b, &t) in times.iter().enumerate() {
            let (empirical, se) = covariance_pairs(&p, a, b);
            out.push(CovarianceCell {
                s,
                t,
                empirical,
                expected: spec.beta(s.min(t)),
                se,
            });
        }
    }
    Ok(out)
}

/// Empirical `E[Z_{h1}(·, s) Z_{h2}(·, t)]` over an ensemble, as mean and
/// standard error.
pub fn cross_covariance(h1: &WeightFn, h2: &WeightFn, ensemble: &PathEnsemble, s: f64, t: f64) -> Result<(f64, f64)> {
    let grid = ensemble.grid();
    let w1 = ProcessSpec::new(h1.clone())?.averaged_weights_to(grid, grid.index_of(s)?);
    let w2 = ProcessSpec::new(h2.clone())?.averaged_weights_to(grid, grid.index_of(t)?);
    let est = McEstimate::from_samples((0..ensemble.len()).map(|m| {
        let inc = ensemble.increments(m);
        C64::new(stieltjes_sum(&w1, inc) * stieltjes_sum(&w2, inc), 0.0)
    }));
    Ok((est.mean.re, est.se_re))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_grid(n: usize) -> Grid {
        Grid::new(n, 1.0).unwrap()
    }

    fn weight(coeffs: &[f64]) -> WeightFn {
        WeightFn::new(L2Fn::poly(1.0, coeffs).unwrap()).unwrap()
    }

    #[test]
    fn paths_start_at_zero_and_are_deterministic() {
        let a = sample_brownian(unit_grid(8), 4, 7).unwrap();
        let b = sample_brownian(unit_grid(8), 4, 7).unwrap();
        assert_eq!(a, b);
        for m in 0..4 {
            assert_eq!(a.values(m)[0], 0.0);
        }
        let c = sample_brownian(unit_grid(8), 4, 8).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn thread_count_does_not_matter() {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(3).build().unwrap();
        let many = pool.install(|| sample_brownian(unit_grid(16), 5000, 3).unwrap());
        let one = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap()
            .install(|| sample_brownian(unit_grid(16), 5000, 3).unwrap());
        assert_eq!(many, one);
    }

    #[test]
    fn telescoping_and_unit_weight() {
        let grid = unit_grid(64);
        let e = sample_brownian(grid, 3, 1).unwrap();
        let one = L2Fn::constant(1.0, 1.0).unwrap();
        let spec = ProcessSpec::new(WeightFn::unit(1.0).unwrap()).unwrap();
        for m in 0..3 {
            let x = e.values(m);
            assert_eq!(pwz_integral(&one, &grid, e.increments(m)), x[64]);
            // Z_1 = x on the grid
            assert_eq!(spec.path(&grid, e.increments(m)), x);
            let z = gaussian_process(&spec, &grid, e.increments(m), 0.5).unwrap();
            assert_eq!(z, x[32]);
        }
    }

    #[test]
    fn relation_check_gaps() {
        let grid = unit_grid(128);
        let e = sample_brownian(grid, 2, 5).unwrap();
        let v = L2Fn::poly(1.0, &[0.0, 1.0]).unwrap();
        let r = pwz_relation_check(&v, &WeightFn::unit(1.0).unwrap(), &grid, e.increments(0)).unwrap();
        assert_eq!(r.gap, 0.0);
        let one = L2Fn::constant(1.0, 1.0).unwrap();
        let h = weight(&[1.0, 1.0]);
        let r = pwz_relation_check(&one, &h, &grid, e.increments(1)).unwrap();
        let z_end = ProcessSpec::new(h).unwrap().path(&grid, e.increments(1))[128];
        assert_eq!(r.lhs, z_end);
        assert_eq!(r.gap, 0.0);
    }

    #[test]
    fn dump_round_trip() {
        let e = sample_brownian(unit_grid(8), 3, 11).unwrap();
        let mut buf = Vec::new();
        e.write_dump(&mut buf).unwrap();
        assert_eq!(buf.len(), 32 + 3 * 9 * 8);
        assert_eq!(&buf[..8], &DUMP_MAGIC);
        let back = PathEnsemble::read_dump(&buf[..], 1.0).unwrap();
        assert_eq!(back.seed(), 11);
        for m in 0..3 {
            for (a, b) in back.values(m).iter().zip(e.values(m)) {
                assert!((a - b).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn cubic_variance_function() {
        let spec = ProcessSpec::new(weight(&[0.0, 1.0])).unwrap();
        for &t in &[0.25, 0.5, 1.0] {
            assert!((spec.beta(t) - t * t * t / 3.0).abs() < 1e-15);
        }
    }

    #[test]
    fn increment_moments() {
        let grid = unit_grid(4);
        let e = sample_brownian(grid, 20000, 2).unwrap();
        for i in 0..4 {
            let est = McEstimate::from_samples((0..e.len()).map(|m| C64::new(e.increments(m)[i], 0.0)));
            assert!(est.within(C64::new(0.0, 0.0), 5.0));
            let var = McEstimate::from_samples((0..e.len()).map(|m| C64::new(e.increments(m)[i].powi(2), 0.0)));
            assert!(var.within(C64::new(0.25, 0.0), 5.0));
        }
    }

    #[test]
    fn cross_covariance_examples() {
        let grid = unit_grid(64);
        let e = sample_brownian(grid, 20000, 9).unwrap();
        let one = WeightFn::unit(1.0).unwrap();
        let t = weight(&[0.0, 1.0]);
        let (c, se) = cross_covariance(&one, &t, &e, 1.0, 1.0).unwrap();
        // left sums: Σ t_i Δt = 1/2 - Δt/2
        assert!((c - (0.5 - 0.5 / 64.0)).abs() <= 5.0 * se);
        let left = WeightFn::inspect(L2Fn::indicator(1.0, 0.0, 0.5).unwrap());
        let right = WeightFn::inspect(L2Fn::indicator(1.0, 0.5, 1.0).unwrap());
        let (c, se) = cross_covariance(&left, &right, &e, 1.0, 1.0).unwrap();
        assert!(c.abs() <= 5.0 * se);
    }

    #[test]
    fn projections_match_ensemble() {
        let grid = unit_grid(32);
        let v = L2Fn::poly(1.0, &[1.0, -2.0]).unwrap();
        let w = stieltjes_weights(&v, &grid);
        let p = project(&grid, 3000, 4, std::slice::from_ref(&w)).unwrap();
        let e = sample_brownian(grid, 3000, 4).unwrap();
        for m in [0, 1, 2047, 2048, 2999] {
            assert_eq!(p.row(m)[0], stieltjes_sum(&w, e.increments(m)));
        }
    }
}
