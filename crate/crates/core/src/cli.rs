//! Command-line front end: `covariance`, `feynman`, `gfft` and `verify`.
//!
//! Exit codes: 0 when every check passes, 1 for usage or configuration
//! errors, 2 when a check fails.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64 as C64;

use crate::config::RunConfig;
use crate::cylinder::CylinderFunctional;
use crate::error::{Error, Result};
use crate::feynman::{analytic_wiener_integral, epsilon_approach, feynman_integral, DEFAULT_EPSILONS};
use crate::gauss_poly::GaussPolyFn;
use crate::gfft::gfft;
use crate::l2::{L2Fn, OrthogonalSet, WeightFn};
use crate::paths::{cell_average_weights, covariance_table, project, sample_brownian, Grid};
use crate::report::{covariance_csv, covariance_json, num, verify_csv, verify_json, Json};
use crate::theorems::{run_suite, Corruption};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_FAIL: i32 = 2;

#[derive(Parser, Debug)]
#[command(
    name = "feynparts",
    version,
    about = "Generalized Feynman integrals, transforms and parts identities"
)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone, Default)]
pub struct GlobalArgs {
    /// TOML run configuration
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Master seed; overrides `run.seed`
    #[arg(long, global = true, value_name = "U64")]
    pub seed: Option<u64>,
    /// Number of Monte Carlo paths M
    #[arg(long, global = true, value_name = "M")]
    pub paths: Option<usize>,
    /// Number of time steps N
    #[arg(long, global = true, value_name = "N")]
    pub grid: Option<usize>,
    /// JSON output (default except for `covariance`)
    #[arg(long, global = true, conflicts_with = "csv")]
    pub json: bool,
    /// CSV output (default for `covariance`)
    #[arg(long, global = true)]
    pub csv: bool,
    /// Run negative controls: `constant` (default) or `swapped-weight`
    #[arg(long, global = true, value_name = "KIND", num_args = 0..=1, default_missing_value = "constant")]
    pub corrupt: Option<String>,
    /// Write the report into this directory instead of stdout
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,
}

#[derive(Subcommand, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    /// Empirical covariance of Z_h against β_h(min(s, t))
    Covariance,
    /// Closed-form Feynman integrals over the q grid, Monte Carlo over the λ grid
    Feynman,
    /// Transform of the configured functional at the configured points
    Gfft,
    /// Run the identity suite
    Verify,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Format {
    Json,
    Csv,
}

struct Outcome {
    document: String,
    file: &'static str,
    pass: bool,
    summary: String,
}

fn load(global: &GlobalArgs) -> Result<RunConfig> {
    let mut cfg = match &global.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(s) = global.seed {
        cfg.run.seed = s;
    }
    if let Some(m) = global.paths {
        cfg.run.paths = m;
    }
    if let Some(n) = global.grid {
        cfg.run.grid = n;
    }
    if let Some(o) = &global.out {
        cfg.run.out = Some(o.clone());
    }
    cfg.validate()?;
    Ok(cfg)
}

fn header(command: &str, cfg: &RunConfig) -> Json {
    Json::obj()
        .with("command", command)
        .with("seed", cfg.run.seed)
        .with("t_end", cfg.run.t_end)
        .with("grid", cfg.run.grid)
        .with("paths", cfg.run.paths)
}

fn cmd_covariance(cfg: &RunConfig, fmt: Format) -> Result<Outcome> {
    let h = cfg.covariance_weight()?;
    let grid = Grid::new(cfg.run.grid, cfg.run.t_end)?;
    let cells = covariance_table(&h, &grid, cfg.run.paths, cfg.run.seed, &cfg.covariance.times)?;
    if let Some(path) = &cfg.run.dump {
        // same (seed, path index) streams as the table above
        let ensemble = sample_brownian(grid, cfg.run.paths, cfg.run.seed)?;
        let file = std::fs::File::create(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        let mut w = std::io::BufWriter::new(file);
        ensemble.write_dump(&mut w)?;
        std::io::Write::flush(&mut w)?;
    }
    let sigmas = cfg.covariance.sigmas;
    let failing = cells.iter().filter(|c| !c.within(sigmas)).count();
    let document = match fmt {
        Format::Csv => covariance_csv(&cells, sigmas),
        Format::Json => covariance_json(
            &cells,
            sigmas,
            header("covariance", cfg)
                .with("weight", h.label())
                .with("sigmas", sigmas),
        ),
    };
    Ok(Outcome {
        document,
        file: if fmt == Format::Csv {
            "covariance.csv"
        } else {
            "covariance.json"
        },
        pass: failing == 0,
        summary: format!("covariance: {} cells, {failing} outside {sigmas}·SE", cells.len()),
    })
}

fn c_json(obj: Json, prefix: &str, z: Option<C64>) -> Json {
    obj.with(&format!("{prefix}_re"), z.map(|z| z.re))
        .with(&format!("{prefix}_im"), z.map(|z| z.im))
}

/// `e^{-u²/2}` over a unit-norm single function.
fn closed_form_oracle(t_end: f64) -> Result<(C64, C64)> {
    let a = L2Fn::constant(t_end, 1.0 / t_end.sqrt())?;
    let f = CylinderFunctional::new(
        OrthogonalSet::new(vec![a])?,
        GaussPolyFn::gaussian(C64::new(1.0, 0.0), &[0.5]),
    )?;
    let got = feynman_integral(&f, &WeightFn::unit(t_end)?, 1.0)?;
    let expect = (C64::new(1.0, -1.0) / 2.0).sqrt();
    Ok((got, expect))
}

fn cmd_feynman(cfg: &RunConfig, fmt: Format) -> Result<Outcome> {
    let f = cfg.functional()?;
    let h = cfg.functional_weight()?;
    let mut pass = true;

    let mut closed = Vec::new();
    for &q in &cfg.feynman.q {
        let v = feynman_integral(&f, &h, q)?;
        let eps = epsilon_approach(&f, &h, q, &DEFAULT_EPSILONS)?;
        let ok = eps.rel_gap <= 1e-8;
        pass &= ok;
        closed.push((q, v, eps.extrapolated, eps.rel_gap, ok));
    }

    let lambdas = cfg.lambdas()?;
    let grid = Grid::new(cfg.run.grid, cfg.run.t_end)?;
    let needs_mc = lambdas.iter().any(|l| l.im == 0.0);
    let proj = if needs_mc {
        let integrands: Vec<Vec<f64>> = f
            .basis()
            .multiplied(&h)?
            .iter()
            .map(|a| cell_average_weights(a, &grid))
            .collect();
        Some(project(&grid, cfg.run.paths, cfg.run.seed, &integrands)?)
    } else {
        None
    };
    let sigmas = cfg.feynman.sigmas;
    let mut mc_rows = Vec::new();
    for &lam in &lambdas {
        let exact = analytic_wiener_integral(&f, &h, lam)?;
        let est = match (&proj, lam.im == 0.0) {
            (Some(p), true) => {
                let s = 1.0 / lam.re.sqrt();
                let kernel = f.kernel().clone();
                Some(p.estimate(|u| {
                    let scaled: Vec<f64> = u.iter().map(|x| s * x).collect();
                    kernel.eval(&scaled)
                }))
            }
            _ => None,
        };
        let agree = est.map(|e| e.within(exact, sigmas));
        pass &= agree.unwrap_or(true);
        mc_rows.push((lam, exact, est, agree));
    }

    let (oracle, oracle_expect) = closed_form_oracle(cfg.run.t_end)?;
    let oracle_gap = (oracle - oracle_expect).norm() / oracle_expect.norm();
    pass &= oracle_gap <= 1e-12;
    let q0 = cfg.feynman.q.first().copied().unwrap_or(1.0);
    let plus = feynman_integral(&f, &h, q0)?;
    let minus = feynman_integral(&f, &h.negated(), q0)?;
    pass &= plus == minus;
    let eps0 = epsilon_approach(&f, &h, q0, &DEFAULT_EPSILONS)?;

    let document = match fmt {
        Format::Json => {
            let closed_json: Vec<Json> = closed
                .iter()
                .map(|&(q, v, x, gap, ok)| {
                    let o = c_json(Json::obj().with("q", q), "value", Some(v));
                    c_json(o, "epsilon_extrapolated", Some(x))
                        .with("epsilon_rel_gap", gap)
                        .with("epsilon_pass", ok)
                })
                .collect();
            let mc_json: Vec<Json> = mc_rows
                .iter()
                .map(|&(lam, exact, est, agree)| {
                    let o = c_json(Json::obj(), "lambda", Some(lam));
                    let o = c_json(o, "closed", Some(exact));
                    c_json(o, "mc", est.map(|e| e.mean))
                        .with("se", est.map(|e| e.se))
                        .with("agree", agree)
                })
                .collect();
            let oracle_json = c_json(
                c_json(Json::obj().with("name", "gaussian_q1"), "value", Some(oracle)),
                "expected",
                Some(oracle_expect),
            )
            .with("rel_gap", oracle_gap);
            let eps_json = c_json(
                c_json(
                    Json::obj().with("name", "epsilon_approach").with("q", q0),
                    "extrapolated",
                    Some(eps0.extrapolated),
                ),
                "closed",
                Some(eps0.closed_form),
            )
            .with("rel_gap", eps0.rel_gap);
            let sign_json = c_json(
                c_json(
                    Json::obj().with("name", "sign_invariance").with("q", q0),
                    "h",
                    Some(plus),
                ),
                "minus_h",
                Some(minus),
            )
            .with("equal", plus == minus);
            header("feynman", cfg)
                .with("weight", h.label())
                .with("kernel", f.exact_kernel()?.to_string())
                .with("closed_form", Json::Arr(closed_json))
                .with("monte_carlo", Json::Arr(mc_json))
                .with("examples", Json::Arr(vec![oracle_json, eps_json, sign_json]))
                .render()
        }
        Format::Csv => {
            let mut out = String::from("kind,param_re,param_im,value_re,value_im,mc_re,mc_im,se,pass\n");
            for &(q, v, _, _, ok) in &closed {
                out.push_str(&format!("closed,{},0,{},{},,,,{ok}\n", num(q), num(v.re), num(v.im)));
            }
            for &(lam, exact, est, agree) in &mc_rows {
                let (mr, mi, se) = match est {
                    Some(e) => (num(e.mean.re), num(e.mean.im), num(e.se)),
                    None => (String::new(), String::new(), String::new()),
                };
                let a = agree.map(|a| a.to_string()).unwrap_or_default();
                out.push_str(&format!(
                    "wiener,{},{},{},{},{mr},{mi},{se},{a}\n",
                    num(lam.re),
                    num(lam.im),
                    num(exact.re),
                    num(exact.im)
                ));
            }
            out
        }
    };
    Ok(Outcome {
        document,
        file: if fmt == Format::Csv {
            "feynman.csv"
        } else {
            "feynman.json"
        },
        pass,
        summary: format!(
            "feynman: {} q values, {} λ values, {}",
            closed.len(),
            mc_rows.len(),
            if pass { "all checks pass" } else { "checks failed" }
        ),
    })
}

fn cmd_gfft(cfg: &RunConfig, fmt: Format) -> Result<Outcome> {
    let f = cfg.functional()?;
    let k = cfg.gfft_weight()?;
    let mut pass = true;
    let mut blocks = Vec::new();
    let mut csv = String::from("q,point,");
    let n = f.arity();
    for j in 0..n {
        csv.push_str(&format!("s{j},"));
    }
    csv.push_str("value_re,value_im\n");
    for &q in &cfg.gfft.q {
        let t = gfft(&f, &k, q, cfg.gfft.p)?;
        let at_zero = t.functional.eval_at(&vec![0.0; n])?;
        let direct = feynman_integral(&f, &k, q)?;
        let ok = (at_zero - direct).norm() <= 1e-12 * (1.0 + direct.norm());
        pass &= ok;
        let mut rows = Vec::new();
        for (i, s) in cfg.gfft.points.iter().enumerate() {
            let v = t.functional.eval_at(s)?;
            rows.push(c_json(Json::obj().with("point", s.clone()), "value", Some(v)));
            let coords: Vec<String> = s.iter().map(|x| num(*x)).collect();
            csv.push_str(&format!(
                "{},{i},{},{},{}\n",
                num(q),
                coords.join(","),
                num(v.re),
                num(v.im)
            ));
        }
        blocks.push(
            Json::obj()
                .with("q", q)
                .with("p", t.p)
                .with("kernel", t.functional.exact_kernel()?.to_string())
                .with("zero_shift_matches_feynman", ok)
                .with("values", Json::Arr(rows)),
        );
    }
    let document = match fmt {
        Format::Json => header("gfft", cfg)
            .with("weight", k.label())
            .with("kernel", f.exact_kernel()?.to_string())
            .with("transforms", Json::Arr(blocks))
            .render(),
        Format::Csv => csv,
    };
    Ok(Outcome {
        document,
        file: if fmt == Format::Csv { "gfft.csv" } else { "gfft.json" },
        pass,
        summary: format!("gfft: {} transforms", cfg.gfft.q.len()),
    })
}

fn cmd_verify(cfg: &RunConfig, fmt: Format, corruption: Corruption) -> Result<Outcome> {
    let mut suite = cfg.suite();
    suite.corruption = corruption;
    let reports = run_suite(&suite)?;
    let failed = reports.iter().filter(|r| !r.pass).count();
    let document = match fmt {
        Format::Json => verify_json(&reports, cfg.run.seed),
        Format::Csv => verify_csv(&reports),
    };
    Ok(Outcome {
        document,
        file: if fmt == Format::Csv {
            "verify.csv"
        } else {
            "verify.json"
        },
        pass: failed == 0,
        summary: format!(
            "verify ({}): {} reports, {failed} failed",
            corruption.name(),
            reports.len()
        ),
    })
}

fn execute(cli: &Cli, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<bool> {
    let cfg = load(&cli.global)?;
    let corruption = match &cli.global.corrupt {
        Some(kind) => Corruption::parse(kind)?,
        None => Corruption::None,
    };
    if corruption != Corruption::None && cli.command != Command::Verify {
        return Err(Error::InvalidArgument("--corrupt applies to `verify` only".into()));
    }
    let default_csv = cli.command == Command::Covariance;
    let fmt = if cli.global.csv || (default_csv && !cli.global.json) {
        Format::Csv
    } else {
        Format::Json
    };
    let outcome = match cli.command {
        Command::Covariance => cmd_covariance(&cfg, fmt)?,
        Command::Feynman => cmd_feynman(&cfg, fmt)?,
        Command::Gfft => cmd_gfft(&cfg, fmt)?,
        Command::Verify => cmd_verify(&cfg, fmt, corruption)?,
    };
    match &cfg.run.out {
        Some(dir) => {
            std::fs::create_dir_all(dir)?;
            let path = dir.join(outcome.file);
            std::fs::write(&path, &outcome.document)?;
            writeln!(stderr, "{} -> {}", outcome.summary, path.display())?;
        }
        None => {
            stdout.write_all(outcome.document.as_bytes())?;
            writeln!(stderr, "{}", outcome.summary)?;
        }
    }
    Ok(outcome.pass)
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            if e.use_stderr() {
                let _ = stderr.write_all(text.as_bytes());
            } else {
                let _ = stdout.write_all(text.as_bytes());
            }
            return code;
        }
    };
    match execute(&cli, stdout, stderr) {
        Ok(true) => EXIT_OK,
        Ok(false) => EXIT_FAIL,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            EXIT_USAGE
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_capture(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let code = run(args.iter().copied(), &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn usage_errors_exit_one() {
        assert_eq!(run_capture(&["feynparts"]).0, EXIT_USAGE);
        assert_eq!(run_capture(&["feynparts", "bogus"]).0, EXIT_USAGE);
        assert_eq!(run_capture(&["feynparts", "gfft", "--grid", "x"]).0, EXIT_USAGE);
        assert_eq!(run_capture(&["feynparts", "gfft", "--corrupt"]).0, EXIT_USAGE);
        assert_eq!(run_capture(&["feynparts", "--help"]).0, EXIT_OK);
    }

    #[test]
    fn gfft_report_is_deterministic() {
        let a = run_capture(&["feynparts", "gfft"]);
        let b = run_capture(&["feynparts", "gfft"]);
        assert_eq!(a.0, EXIT_OK, "{}", a.2);
        assert_eq!(a.1, b.1);
        let v: serde_json::Value = serde_json::from_str(&a.1).unwrap();
        assert_eq!(v["transforms"][0]["zero_shift_matches_feynman"], true);
    }

    #[test]
    fn feynman_report_surfaces_examples() {
        let (code, out, err) = run_capture(&["feynparts", "feynman", "--paths", "20000", "--grid", "128"]);
        assert_eq!(code, EXIT_OK, "{err}\n{out}");
        let v: serde_json::Value = serde_json::from_str(&out).unwrap();
        let ex = &v["examples"];
        assert!(ex[0]["rel_gap"].as_f64().unwrap() <= 1e-12);
        assert!(ex[1]["rel_gap"].as_f64().unwrap() <= 1e-8);
        assert_eq!(ex[2]["equal"], true);
        assert!(v["monte_carlo"][0]["se"].as_f64().unwrap() > 0.0);
    }
}
