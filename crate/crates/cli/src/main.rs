//! `subrec` command-line driver. JSON reports go to stdout (and to `--out`),
//! a short human summary goes to stderr.
//!
//! Exit codes: 0 ok, 1 verification failure, 2 invalid input, 3 memory budget.

use std::f64::consts::FRAC_PI_2;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use nalgebra::{DMatrix, DVector};
use serde_json::{json, Value};

use subrec::linops::{build_cyclic_shift, build_shift_plus_flip, CoinSpec1D, Label, Subspace};
use subrec::monitor::{
    complex_json, first_return_direct, matrix_json, recurrence_report, renewal_a_to_mu, state_return_probability,
    state_subspace_crossover, state_vs_subspace_curve, ReportOptions, TailPolicy, TauOperator,
};
use subrec::numeric::max_abs_diff;
use subrec::site1d::{curve_csv, site_return_matrix, site_schur, site_tau_matrix, state_vs_site_curve, SiteTau};
use subrec::verify::{run_verify, Suite, VerifyOptions};
use subrec::walk2d::{curves_csv, origin_mu_sequence, parse_config, subspace_curves_2d, R2D};
use subrec::{Error, C64};

/// Horizon of the truncated shift-plus-flip model; enough for the crossover to 1e-9.
const SHIFT_FLIP_WIDTH: usize = 160;
const CURVE_POINTS: usize = 33;

#[derive(Parser, Debug)]
#[command(name = "subrec", version, about = "Monitored recurrence of subspaces")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Worked examples with their closed forms.
    Example {
        #[arg(value_enum)]
        name: ExampleName,
        #[command(flatten)]
        common: Common,
    },
    /// Full recurrence report of a small built-in model.
    Report {
        /// `cyclic:N` or `shift-flip:W`.
        #[arg(long)]
        model: String,
        /// Sites spanning V for cyclic models.
        #[arg(long, value_delimiter = ',', default_value = "0,1")]
        sites: Vec<i64>,
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
        #[command(flatten)]
        common: Common,
    },
    /// Site recurrence of a 1D coined walk.
    Site1d {
        #[arg(long, value_enum)]
        lattice: Lattice1DArg,
        /// Coins of the window, comma separated: `0.5`, `0.3i`, `0.1-0.2i`, `re:im`, `sqrt(0.6)`.
        #[arg(long, value_delimiter = ',')]
        coins: Vec<String>,
        /// Coin outside the window (half-line and line).
        #[arg(long)]
        coin: Option<String>,
        /// First site of the window on the line.
        #[arg(long, default_value_t = 0, allow_hyphen_values = true)]
        start: i64,
        #[arg(long, default_value_t = 0, allow_hyphen_values = true)]
        site: i64,
        /// Series order for norms and curves.
        #[arg(long, default_value_t = 1024)]
        nmax: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Origin return operator of a 2D walk.
    Walk2d {
        /// Config file of `key = value` lines; overrides flags.
        config_file: Option<PathBuf>,
        /// Extra `key=value` settings, applied last.
        #[arg(long = "config")]
        config: Vec<String>,
        #[arg(long)]
        lattice: Option<String>,
        #[arg(long)]
        coin: Option<String>,
        #[arg(long)]
        nmax: Option<usize>,
        #[arg(long)]
        curves: bool,
        #[arg(long)]
        memory_budget_mb: Option<u64>,
        #[command(flatten)]
        common: Common,
    },
    /// Invariant suites.
    Verify {
        #[arg(value_enum, default_value = "fast")]
        suite: SuiteArg,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, hide = true)]
        inject_failure: bool,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Args, Debug)]
struct Common {
    /// Directory for JSON and CSV outputs.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "powerlaw")]
    tail: TailArg,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ExampleName {
    ShiftEig,
    Cyclic,
    Crossover,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Lattice1DArg {
    Finite,
    HalfLine,
    Line,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum SuiteArg {
    Fast,
    Full,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum TailArg {
    None,
    Powerlaw,
}

impl From<TailArg> for TailPolicy {
    fn from(t: TailArg) -> Self {
        match t {
            TailArg::None => TailPolicy::None,
            TailArg::Powerlaw => TailPolicy::PowerLaw,
        }
    }
}

enum Failure {
    Lib(Error),
    Io(String),
    Verify,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

type Res<T> = std::result::Result<T, Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Verify) => ExitCode::from(1),
        Err(Failure::Lib(e @ Error::MemoryBudget { .. })) => {
            eprintln!("error: {e}");
            ExitCode::from(3)
        }
        Err(Failure::Lib(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(Failure::Io(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Res<()> {
    match cli.command {
        Command::Example { name, common } => cmd_example(name, &common),
        Command::Report { model, sites, tol, common } => cmd_report(&model, &sites, tol, &common),
        Command::Site1d { lattice, coins, coin, start, site, nmax, common } => {
            cmd_site1d(lattice, &coins, coin.as_deref(), start, site, nmax, &common)
        }
        Command::Walk2d { config_file, config, lattice, coin, nmax, curves, memory_budget_mb, common } => {
            let mut text = String::new();
            let mut put = |k: &str, v: String| text.push_str(&format!("{k} = {v}\n"));
            if let Some(l) = lattice {
                put("lattice", l);
            }
            if let Some(c) = coin {
                put("coin", c);
            }
            if let Some(n) = nmax {
                put("n_max", n.to_string());
            }
            put("tail", format!("{:?}", common.tail).to_lowercase());
            if curves {
                put("curves", "true".into());
            }
            if let Some(mb) = memory_budget_mb {
                put("memory_budget_mb", mb.to_string());
            }
            if let Some(o) = &common.out {
                put("out", o.display().to_string());
            }
            if let Some(path) = config_file {
                let file = fs::read_to_string(&path).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))?;
                text.push_str(&file);
                text.push('\n');
            }
            for kv in config {
                text.push_str(&kv);
                text.push('\n');
            }
            cmd_walk2d(&text)
        }
        Command::Verify { suite, seed, inject_failure, common } => {
            let suite = match suite {
                SuiteArg::Fast => Suite::Fast,
                SuiteArg::Full => Suite::Full,
            };
            let summary = run_verify(&VerifyOptions { suite, seed, inject_failure });
            for c in &summary.checks {
                eprintln!(
                    "{} {:<40} deviation {:.3e} (tol {:.0e}) {:.2}s",
                    if c.passed { "PASS" } else { "FAIL" },
                    c.name,
                    c.deviation,
                    c.tolerance,
                    c.seconds
                );
            }
            eprintln!("{} checks in {:.1}s", summary.checks.len(), summary.seconds);
            let j = serde_json::to_value(&summary).map_err(|e| Failure::Io(e.to_string()))?;
            emit(&common.out, "verify.json", &j)?;
            if summary.passed() {
                Ok(())
            } else {
                Err(Failure::Verify)
            }
        }
    }
}

fn emit(out: &Option<PathBuf>, name: &str, j: &Value) -> Res<()> {
    let text = serde_json::to_string_pretty(j).map_err(|e| Failure::Io(e.to_string()))?;
    println!("{text}");
    if let Some(dir) = out {
        write_file(dir, name, &(text + "\n"))?;
    }
    Ok(())
}

fn write_file(dir: &Path, name: &str, text: &str) -> Res<()> {
    fs::create_dir_all(dir).map_err(|e| Failure::Io(format!("{}: {e}", dir.display())))?;
    let p = dir.join(name);
    fs::write(&p, text).map_err(|e| Failure::Io(format!("{}: {e}", p.display())))
}

/// `0.5`, `-0.3i`, `0.1-0.2i`, `re:im`, `sqrt(0.6)`.
fn parse_complex(s: &str) -> Result<C64, Error> {
    let bad = || Error::InvalidInput(format!("cannot parse coin '{s}'"));
    let s = s.trim();
    let real = |t: &str| -> Result<f64, Error> {
        let t = t.trim();
        if let Some(inner) = t.strip_prefix("sqrt(").and_then(|r| r.strip_suffix(')')) {
            let v: f64 = inner.parse().map_err(|_| bad())?;
            if v < 0.0 {
                return Err(bad());
            }
            return Ok(v.sqrt());
        }
        t.parse().map_err(|_| bad())
    };
    if let Some((re, im)) = s.split_once(':') {
        return Ok(C64::new(real(re)?, real(im)?));
    }
    let Some(body) = s.strip_suffix('i') else {
        return Ok(C64::new(real(s)?, 0.0));
    };
    // split at the last sign that is not a leading sign or an exponent sign
    let bytes = body.as_bytes();
    let split = (1..bytes.len()).rev().find(|&k| (bytes[k] == b'+' || bytes[k] == b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
    let im_of = |t: &str| -> Result<f64, Error> {
        match t {
            "" | "+" => Ok(1.0),
            "-" => Ok(-1.0),
            _ => real(t),
        }
    };
    match split {
        Some(k) => Ok(C64::new(real(&body[..k])?, im_of(&body[k..])?)),
        None => Ok(C64::new(0.0, im_of(body)?)),
    }
}

fn unit_path(n: usize) -> Vec<f64> {
    (0..n).map(|k| FRAC_PI_2 * k as f64 / (n - 1) as f64).collect()
}

fn cmd_example(name: ExampleName, common: &Common) -> Res<()> {
    let m = build_shift_plus_flip(SHIFT_FLIP_WIDTH)?;
    let v = Subspace::new(m.step.dim(), &[m.psi.clone(), m.phi.clone()])?;
    let horizon = SHIFT_FLIP_WIDTH - 1;
    let crossover_exact = (5.0 - 17f64.sqrt()) / 2.0;
    let j = match name {
        ExampleName::ShiftEig => {
            let opts = ReportOptions { tail: common.tail.into(), ..Default::default() };
            let rep = recurrence_report(&m.step, &v, &opts)?;
            let a = first_return_direct(&m.step, &v, horizon)?;
            let b = state_subspace_crossover(&a, 1e-6, 1.0, 1e-12)?;
            let h = std::f64::consts::FRAC_1_SQRT_2;
            let printed_a1 = DMatrix::from_row_slice(2, 2, &[0.0, h, h, 0.0]).map(|x| C64::new(x, 0.0));
            let printed_a2 = DMatrix::from_row_slice(2, 2, &[0.5, 0.0, 0.0, 0.0]).map(|x| C64::new(x, 0.0));
            let zero = DMatrix::<C64>::zeros(2, 2);
            let coeff_dev = max_abs_diff(&a.mats[1], &printed_a1)
                .max(max_abs_diff(&a.mats[2], &printed_a2))
                .max(a.mats[3..].iter().map(|x| max_abs_diff(x, &zero)).fold(0.0, f64::max));
            eprintln!("R eigenvalues {:?} (closed form 3/4, 1/2)", rep.r_eigenvalues);
            eprintln!("crossover |β|² = {b:.12} (closed form {crossover_exact:.12})");
            json!({
                "schema_version": "subrec.example/1",
                "example": "shift-eig",
                "report": rep.to_json(),
                "a_hat_coefficients": a.mats[..4].iter().map(matrix_json).collect::<Vec<_>>(),
                "comparison": {
                    "R_eigenvalues": {"computed": rep.r_eigenvalues, "closed_form": [0.75, 0.5]},
                    "a_hat_max_deviation": coeff_dev,
                    "crossover_beta_sq": {"computed": b, "closed_form": crossover_exact},
                }
            })
        }
        ExampleName::Cyclic => {
            let u = build_cyclic_shift(3)?;
            let v = Subspace::from_labels(u.space(), &[Label::site1(0, 0), Label::site1(1, 0)])?;
            let rep = recurrence_report(&u, &v, &ReportOptions { tail: common.tail.into(), ..Default::default() })?;
            let tau_diag = match &rep.tau {
                TauOperator::Finite { matrix, .. } => json!([matrix[(0, 0)].re, matrix[(1, 1)].re]),
                _ => json!("divergent"),
            };
            eprintln!("τ diagonal {tau_diag} (closed form 1, 2), K = {:?}", rep.k);
            json!({
                "schema_version": "subrec.example/1",
                "example": "cyclic",
                "report": rep.to_json(),
                "comparison": {
                    "tau_diagonal": {"computed": tau_diag, "closed_form": [1.0, 2.0]},
                    "avg_tau": {"computed": rep.avg_tau(), "closed_form": "3/2"},
                    "K": {"computed": rep.k, "closed_form": 3},
                }
            })
        }
        ExampleName::Crossover => {
            let a = first_return_direct(&m.step, &v, horizon)?;
            let path: Vec<(f64, DVector<C64>)> = unit_path(CURVE_POINTS)
                .into_iter()
                .map(|t| (t, DVector::from_vec(vec![C64::new(t.cos(), 0.0), C64::new(t.sin(), 0.0)])))
                .collect();
            let pts = state_vs_subspace_curve(&a, &path)?;
            let mut csv = String::from("# schema=subrec.curve/1 shift-flip state vs subspace\nt,beta_sq,state_return_prob,subspace_return_prob\n");
            for p in &pts {
                csv.push_str(&format!("{:.12},{:.12},{:.12},{:.12}\n", p.t, p.t.sin().powi(2), p.state, p.subspace));
            }
            let b = state_subspace_crossover(&a, 1e-6, 1.0, 1e-12)?;
            // a one-dimensional V: the state is the whole subspace
            let v1 = Subspace::new(m.step.dim(), &[m.psi.clone()])?;
            let a1 = first_return_direct(&m.step, &v1, horizon)?;
            let mu1 = renewal_a_to_mu(&a1)?;
            let one = DVector::from_vec(vec![C64::new(1.0, 0.0)]);
            let state1 = state_return_probability(&mu1, &one)?.partial;
            let sub1 = subspace_single(&a1)?;
            eprintln!("crossover |β|² = {b:.12}; single qubit: {state1:.12} vs {sub1:.12}");
            if let Some(dir) = &common.out {
                write_file(dir, "crossover_curve.csv", &csv)?;
            }
            json!({
                "schema_version": "subrec.example/1",
                "example": "crossover",
                "crossover_beta_sq": {"computed": b, "closed_form": crossover_exact},
                "single_state": {"state_return_prob": state1, "subspace_return_prob": sub1},
                "curve": pts,
            })
        }
    };
    let file = match name {
        ExampleName::ShiftEig => "example_shift_eig.json",
        ExampleName::Cyclic => "example_cyclic.json",
        ExampleName::Crossover => "example_crossover.json",
    };
    emit(&common.out, file, &j)
}

fn subspace_single(a: &subrec::monitor::AmplitudeSequence) -> Res<f64> {
    let r = subrec::monitor::return_probability_operator(a, TailPolicy::None)?;
    Ok(r.matrix[(0, 0)].re)
}

fn cmd_report(model: &str, sites: &[i64], tol: f64, common: &Common) -> Res<()> {
    if !(tol > 0.0) {
        return Err(Error::InvalidInput(format!("tolerance must be positive, got {tol}")).into());
    }
    let (kind, arg) = model.split_once(':').unwrap_or((model, ""));
    let num = |d: usize| -> Result<usize, Error> {
        if arg.is_empty() {
            Ok(d)
        } else {
            arg.parse().map_err(|_| Error::InvalidInput(format!("bad model size '{arg}'")))
        }
    };
    let (u, v) = match kind {
        "cyclic" => {
            let u = build_cyclic_shift(num(3)?)?;
            let labels: Vec<Label> = sites.iter().map(|&s| Label::site1(s, 0)).collect();
            let v = Subspace::from_labels(u.space(), &labels)?;
            (u, v)
        }
        "shift-flip" => {
            let m = build_shift_plus_flip(num(SHIFT_FLIP_WIDTH)?)?;
            let v = Subspace::new(m.step.dim(), &[m.psi, m.phi])?;
            (m.step, v)
        }
        _ => return Err(Error::InvalidInput(format!("unknown model '{model}'")).into()),
    };
    let rep = recurrence_report(&u, &v, &ReportOptions { tail: common.tail.into(), recurrence_tol: tol, horizon: None })?;
    eprintln!("R eigenvalues {:?}, avg τ {:?}", rep.r_eigenvalues, rep.avg_tau());
    emit(&common.out, "report.json", &rep.to_json())
}

fn cmd_site1d(
    lattice: Lattice1DArg,
    coins: &[String],
    coin: Option<&str>,
    start: i64,
    site: i64,
    nmax: usize,
    common: &Common,
) -> Res<()> {
    if nmax < 2 {
        return Err(Error::InvalidInput("--nmax must be at least 2".into()).into());
    }
    let window = coins.iter().map(|s| parse_complex(s)).collect::<Result<Vec<_>, _>>()?;
    let default = coin.map(parse_complex).transpose()?;
    let spec = match lattice {
        Lattice1DArg::Finite => {
            if default.is_some() {
                return Err(Error::InvalidInput("--coin is not used on a finite lattice".into()).into());
            }
            CoinSpec1D::finite(window)?
        }
        Lattice1DArg::HalfLine => CoinSpec1D::half_line(window, default.unwrap_or_default())?,
        Lattice1DArg::Line => CoinSpec1D::line(start, window, default.unwrap_or_default())?,
    };
    let s = site_schur(&spec, site)?;
    let r = site_return_matrix(&s, nmax.max(4096))?;
    let tau = match site_tau_matrix(&s)? {
        SiteTau::Finite { matrix, deg_left, deg_right, extremes, average } => json!({
            "kind": "finite",
            "matrix": matrix_json(&matrix),
            "deg_left": deg_left,
            "deg_right": deg_right,
            "extremes": [extremes.0, extremes.1],
            "average": average,
        }),
        SiteTau::LeftOnly { psi1, tau, deg_left } => json!({
            "kind": "left_only",
            "psi1": psi1.iter().map(|z| complex_json(*z)).collect::<Vec<_>>(),
            "tau_psi1": tau,
            "deg_left": deg_left,
        }),
        SiteTau::Divergent => json!({"kind": "divergent"}),
    };
    let (p1, p2) = (r.psi1.clone(), r.psi2.clone());
    let path: Vec<(f64, C64, C64)> = unit_path(CURVE_POINTS)
        .into_iter()
        .map(|t| {
            let psi = &p1 * C64::new(t.cos(), 0.0) + &p2 * C64::new(t.sin(), 0.0);
            (t, psi[0], psi[1])
        })
        .collect();
    let rows = state_vs_site_curve(&spec, site, &path, nmax)?;
    let note = format!("site1d {:?} site {site}", lattice).to_lowercase();
    let csv = curve_csv(&rows, &note);
    eprintln!(
        "R_x eigenvalues {:.10} at ψ1, {:.10} at ψ2; τ {}",
        r.at_psi1.0,
        r.at_psi2.0,
        tau["kind"].as_str().unwrap_or("")
    );
    if let Some(dir) = &common.out {
        write_file(dir, "site1d_curve.csv", &csv)?;
    }
    let vec_json = |v: &DVector<C64>| v.iter().map(|z| complex_json(*z)).collect::<Vec<_>>();
    let j = json!({
        "schema_version": "subrec.site1d/1",
        "lattice": format!("{:?}", spec.lattice).to_lowercase(),
        "site": site,
        "gamma": complex_json(s.gamma),
        "R_x": matrix_json(&r.matrix),
        "R_psi1": {"value": r.at_psi1.0, "interval": r.at_psi1.1},
        "R_psi2": {"value": r.at_psi2.0, "interval": r.at_psi2.1},
        "R_max": r.max(),
        "R_min": r.min(),
        "R_average": r.average(),
        "psi1": vec_json(&r.psi1),
        "psi2": vec_json(&r.psi2),
        "tau": tau,
        "curve": rows,
    });
    emit(&common.out, "site1d.json", &j)
}

fn cmd_walk2d(text: &str) -> Res<()> {
    let cfg = parse_config(text)?;
    let mu = origin_mu_sequence(&cfg.job)?;
    let res = R2D::from_mu(&mu, cfg.job.tail)?;
    eprintln!("eigenvalues {:?}", res.eigenvalues);
    let mut j = res.to_json(&cfg.job);
    if cfg.curves {
        let d = mu.dim_v;
        let e = |k: usize| DVector::from_fn(d, |i, _| C64::new((i == k) as u8 as f64, 0.0));
        let nested: Vec<Vec<DVector<C64>>> = (2..=d).map(|k| (0..k).map(e).collect()).collect();
        let names: Vec<String> = (2..=d).map(|k| format!("subspace_dim{k}")).collect();
        let path: Vec<(f64, DVector<C64>)> =
            unit_path(CURVE_POINTS).into_iter().map(|t| (t, &e(0) * C64::new(t.cos(), 0.0) + &e(1) * C64::new(t.sin(), 0.0))).collect();
        let rows = subspace_curves_2d(&mu, &nested, &path)?;
        let name_refs: Vec<&str> = names.iter().map(String::as_str).collect();
        if let Some(dir) = &cfg.out {
            write_file(dir, "walk2d_curves.csv", &curves_csv(&rows, &name_refs))?;
        }
        j["curves"] = json!(rows);
    }
    emit(&cfg.out, "walk2d.json", &j)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complex_parsing() {
        assert_eq!(parse_complex("0.5").unwrap(), C64::new(0.5, 0.0));
        assert_eq!(parse_complex("0.3i").unwrap(), C64::new(0.0, 0.3));
        assert_eq!(parse_complex("-i").unwrap(), C64::new(0.0, -1.0));
        assert_eq!(parse_complex("0.1-0.2i").unwrap(), C64::new(0.1, -0.2));
        assert_eq!(parse_complex("1e-3+2e-1i").unwrap(), C64::new(1e-3, 0.2));
        assert_eq!(parse_complex("0.2:-0.4").unwrap(), C64::new(0.2, -0.4));
        assert!((parse_complex("sqrt(0.6)").unwrap().re - 0.6f64.sqrt()).abs() < 1e-16);
        assert!(parse_complex("abc").is_err());
        assert!(parse_complex("sqrt(-1)").is_err());
    }
}
