//! Run configuration, read from TOML.
//!
//! ```toml
//! [run]
//! t_end = 1.0
//! grid = 256           # N, time steps
//! paths = 100000       # M
//! seed = 1
//! out = "reports"      # optional output directory
//! dump = "paths.bin"   # optional ensemble dump (covariance only)
//!
//! [covariance]
//! weight = "poly(0, 1)"
//! times = [0.25, 0.5, 0.75, 1.0]
//! sigmas = 5.0
//!
//! [functional]
//! basis = ["legendre(0)", "legendre(1)"]
//! kernel = "term(1, [1; 0.5; 0], [1; 0.5; 0])"
//! weight = "poly(1)"   # h
//!
//! [feynman]
//! q = [1.0, -1.0, 2.0]
//! lambda = ["0.5", "1", "2", "1-0.5i"]
//! sigmas = 3.0
//!
//! [gfft]
//! weight = "poly(1)"   # k
//! q = [1.0]
//! p = 2.0
//! points = [[0.0, 0.0], [0.5, -0.25]]
//!
//! [verify]
//! configs = 25
//! tolerance = 1e-10
//! mc_configs = 0
//! mc_paths = 20000
//! mc_grid = 256
//! probe_printed_reading = false
//! only = []
//! ```
//!
//! Every section and key is optional. Function-valued keys use the
//! expression grammar of [`crate::expr`].

use std::path::PathBuf;

use num_complex::Complex64 as C64;
use serde::Deserialize;

use crate::cylinder::CylinderFunctional;
use crate::error::{Error, Result};
use crate::expr::{parse_complex, parse_kernel, parse_l2};
use crate::l2::{L2Fn, OrthogonalSet, WeightFn};
use crate::theorems::{SuiteConfig, EXACT_TOL};

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct RunSection {
    pub t_end: f64,
    pub grid: usize,
    pub paths: usize,
    pub seed: u64,
    pub out: Option<PathBuf>,
    /// `covariance` also writes the sampled ensemble here.
    pub dump: Option<PathBuf>,
}

impl Default for RunSection {
    fn default() -> Self {
        RunSection {
            t_end: 1.0,
            grid: 256,
            paths: 100_000,
            seed: 1,
            out: None,
            dump: None,
        }
    }
}

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct CovarianceSection {
    pub weight: String,
    pub times: Vec<f64>,
    pub sigmas: f64,
}

impl Default for CovarianceSection {
    fn default() -> Self {
        CovarianceSection {
            weight: "poly(0, 1)".into(),
            times: vec![0.25, 0.5, 0.75, 1.0],
            sigmas: 5.0,
        }
    }
}

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct FunctionalSection {
    pub basis: Vec<String>,
    pub kernel: String,
    pub weight: String,
}

impl Default for FunctionalSection {
    fn default() -> Self {
        FunctionalSection {
            basis: vec!["legendre(0)".into(), "legendre(1)".into()],
            kernel: "term(1, [1, 0.5; 0.5; 0], [1; 0.75+0.25i; 0.1]) + term(-0.5i, [0, 1; 1; 0], [1; 0.5; 0])".into(),
            weight: "poly(1, 1, -1)".into(),
        }
    }
}

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct FeynmanSection {
    pub q: Vec<f64>,
    pub lambda: Vec<String>,
    pub sigmas: f64,
}

impl Default for FeynmanSection {
    fn default() -> Self {
        FeynmanSection {
            q: vec![1.0, -1.0, 2.0],
            lambda: vec!["0.5".into(), "1".into(), "2".into()],
            sigmas: 3.0,
        }
    }
}

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct GfftSection {
    pub weight: String,
    pub q: Vec<f64>,
    pub p: f64,
    pub points: Vec<Vec<f64>>,
}

impl Default for GfftSection {
    fn default() -> Self {
        GfftSection {
            weight: "poly(1)".into(),
            q: vec![1.0, -2.0],
            p: 2.0,
            points: vec![vec![0.0, 0.0], vec![0.5, -0.25], vec![-1.0, 1.0]],
        }
    }
}

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct VerifySection {
    pub configs: usize,
    pub tolerance: f64,
    pub mc_configs: usize,
    pub mc_paths: usize,
    pub mc_grid: usize,
    pub probe_printed_reading: bool,
    pub only: Vec<String>,
}

impl Default for VerifySection {
    fn default() -> Self {
        VerifySection {
            configs: 25,
            tolerance: EXACT_TOL,
            mc_configs: 0,
            mc_paths: 20_000,
            mc_grid: 256,
            probe_printed_reading: false,
            only: Vec::new(),
        }
    }
}

#[derive(Clone, Debug, Default, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub run: RunSection,
    pub covariance: CovarianceSection,
    pub functional: FunctionalSection,
    pub feynman: FeynmanSection,
    pub gfft: GfftSection,
    pub verify: VerifySection,
}

impl RunConfig {
    pub fn from_toml(src: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(src).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let src = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml(&src)
    }

    fn bad(msg: impl Into<String>) -> Error {
        Error::Config(msg.into())
    }

    /// Parses every expression and checks ranges.
    pub fn validate(&self) -> Result<()> {
        let r = &self.run;
        if !(r.t_end > 0.0 && r.t_end.is_finite()) {
            return Err(Self::bad("run.t_end must be positive"));
        }
        if r.grid < 2 {
            return Err(Self::bad("run.grid must be at least 2"));
        }
        if r.paths < 2 {
            return Err(Self::bad("run.paths must be at least 2"));
        }
        self.covariance_weight()?;
        if self.covariance.times.iter().any(|&t| !(t > 0.0 && t <= r.t_end)) {
            return Err(Self::bad("covariance.times must lie in (0, t_end]"));
        }
        let f = self.functional()?;
        self.functional_weight()?;
        if let Some(q) = self
            .feynman
            .q
            .iter()
            .chain(&self.gfft.q)
            .find(|q| **q == 0.0 || !q.is_finite())
        {
            return Err(Self::bad(format!("q values must be nonzero and finite, got {q}")));
        }
        self.lambdas()?;
        self.gfft_weight()?;
        if !(1.0..=2.0).contains(&self.gfft.p) {
            return Err(Self::bad(format!("gfft.p must lie in [1, 2], got {}", self.gfft.p)));
        }
        if self.gfft.points.iter().any(|p| p.len() != f.arity()) {
            return Err(Self::bad(format!("gfft.points must have {} coordinates", f.arity())));
        }
        let v = &self.verify;
        if !(v.tolerance > 0.0) || v.configs == 0 || v.mc_paths < 2 || v.mc_grid < 2 {
            return Err(Self::bad(
                "verify: tolerance > 0, configs ≥ 1, mc_paths ≥ 2, mc_grid ≥ 2",
            ));
        }
        Ok(())
    }

    fn weight(&self, src: &str, key: &str) -> Result<WeightFn> {
        let f = parse_l2(src, self.run.t_end).map_err(|e| Self::bad(format!("{key}: {e}")))?;
        WeightFn::new(f).map_err(|e| Self::bad(format!("{key}: {e}")))
    }

    pub fn covariance_weight(&self) -> Result<WeightFn> {
        self.weight(&self.covariance.weight, "covariance.weight")
    }

    pub fn functional_weight(&self) -> Result<WeightFn> {
        self.weight(&self.functional.weight, "functional.weight")
    }

    pub fn gfft_weight(&self) -> Result<WeightFn> {
        self.weight(&self.gfft.weight, "gfft.weight")
    }

    pub fn basis(&self) -> Result<OrthogonalSet> {
        if self.functional.basis.is_empty() {
            return Err(Self::bad("functional.basis is empty"));
        }
        let members = self
            .functional
            .basis
            .iter()
            .map(|s| parse_l2(s, self.run.t_end))
            .collect::<Result<Vec<L2Fn>>>()
            .map_err(|e| Self::bad(format!("functional.basis: {e}")))?;
        OrthogonalSet::new(members).map_err(|e| Self::bad(format!("functional.basis: {e}")))
    }

    pub fn functional(&self) -> Result<CylinderFunctional> {
        let kernel = parse_kernel(&self.functional.kernel).map_err(|e| Self::bad(format!("functional.kernel: {e}")))?;
        CylinderFunctional::new(self.basis()?, kernel).map_err(|e| Self::bad(format!("functional: {e}")))
    }

    pub fn lambdas(&self) -> Result<Vec<C64>> {
        self.feynman
            .lambda
            .iter()
            .map(|s| {
                let z = parse_complex(s).map_err(|e| Self::bad(format!("feynman.lambda `{s}`: {e}")))?;
                if !(z.re > 0.0) {
                    return Err(Self::bad(format!("feynman.lambda `{s}` needs a positive real part")));
                }
                Ok(z)
            })
            .collect()
    }

    pub fn suite(&self) -> SuiteConfig {
        let v = &self.verify;
        SuiteConfig {
            seed: self.run.seed,
            configs: v.configs,
            tol: v.tolerance,
            mc_configs: v.mc_configs,
            mc_paths: v.mc_paths,
            mc_grid: v.mc_grid,
            probe_printed_reading: v.probe_printed_reading,
            only: v.only.clone(),
            ..SuiteConfig::default()
        }
    }
}
