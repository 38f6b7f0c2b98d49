//! `sizebias`: command-line runner for the size-bias experiments.
//!
//! Every subcommand writes its result to `--out` (atomically) or to stdout.
//! Randomness comes from `--seed` only; task streams are split by label and
//! index, so reruns with the same flags give byte-identical files.
//!
//! Exit codes: 0 success, 1 internal error or a failed `suite` criterion,
//! 2 usage or validation error.

mod io;

use std::fmt::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;
use sizebias::estimate::{EstimateReport, Scheme, ENUMERATION_BUDGET};
use sizebias::levy::{build_infdiv, deconvolution_check, verify_steutel};
use sizebias::renewal::{dart_intervals, split_test, waiting_table, write_waiting_csv, StationaryRenewal, DART_HORIZON_FACTOR};
use sizebias::specialfn::{
    buchstab_omega, dickman_conv_power, dickman_rho, prime_factor_empirics, rough_part_experiment,
};
use sizebias::stats::{ks_two_sample, mean_se, weighted_star_sample_par};
use sizebias::{suite, GridFunction, Streams};

use io::{CliError, CliResult};

#[derive(Parser)]
#[command(name = "sizebias", version, about = "Size-biased laws, Levy measures, renewal and sieve experiments")]
#[command(arg_required_else_help = true)]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args)]
struct Common {
    /// Seed for every random stream.
    #[arg(long, global = true, default_value_t = suite::PUBLISHED_SEED)]
    seed: u64,
    /// Monte Carlo sample size.
    #[arg(long, global = true, default_value_t = suite::N)]
    n: usize,
    /// Result file; stdout when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Output format (default: csv for tabulations, json otherwise).
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Subcommand)]
enum Cmd {
    /// Size-bias a distribution literal and print the result.
    Bias {
        /// Distribution literal (JSON or @file).
        #[arg(long)]
        dist: String,
    },
    /// Build an infinitely divisible law from a Levy measure and check X* = X + Y.
    Levy {
        /// Levy measure literal (JSON or @file).
        #[arg(long)]
        nu: String,
        /// Drop jumps below this size (needed for infinite activity).
        #[arg(long, default_value_t = 0.0)]
        trunc_eps: f64,
    },
    /// Non-divisibility certificate from phi*/phi.
    Deconv {
        #[arg(long)]
        dist: String,
    },
    /// Stationary renewal experiments.
    Renewal {
        /// Interarrival law literal.
        #[arg(long)]
        dist: String,
        #[arg(long, value_enum, default_value_t = Experiment::Wait)]
        experiment: Experiment,
        /// Comma-separated observation times for `wait`.
        #[arg(long, default_value = "0")]
        t: String,
        /// Dart horizon for `dart` (default: 100 times the mean).
        #[arg(long)]
        horizon: Option<f64>,
    },
    /// Ratio estimation under Midzuno or simple random sampling.
    Midzuno {
        /// Population as `[[x, y], ...]` JSON or two-column CSV (inline or @file).
        #[arg(long)]
        pop: String,
        /// Sample size.
        #[arg(long)]
        m: usize,
        #[arg(long, default_value = "midzuno")]
        scheme: Scheme,
        /// Use Monte Carlo with `--n` replicates even when enumeration is affordable.
        #[arg(long)]
        monte_carlo: bool,
    },
    /// Tabulate the Dickman function, or the density g_a with `--a`.
    Dickman {
        #[command(flatten)]
        grid: GridArgs,
        #[arg(long)]
        a: Option<f64>,
    },
    /// Tabulate the Buchstab function; with `--beta`, compare the law of the
    /// Dickman jumps above `beta` with `omega(x / beta)` instead.
    Buchstab {
        #[command(flatten)]
        grid: GridArgs,
        #[arg(long)]
        beta: Option<f64>,
        /// Bins on `(beta, 1)` for `--beta`.
        #[arg(long, default_value_t = 8)]
        bins: usize,
    },
    /// Smooth and rough counts up to `--nmax` against rho(u) and omega(u).
    Primes {
        #[arg(long, default_value_t = 1_000_000)]
        nmax: u64,
        #[arg(long, default_value_t = 2.0)]
        u: f64,
    },
    /// Run the acceptance criteria and print a pass/fail table.
    Suite {
        /// Comma-separated criterion ids (default: all).
        #[arg(long)]
        only: Option<String>,
    },
}

#[derive(Args)]
struct GridArgs {
    #[arg(long, default_value_t = 10.0)]
    umax: f64,
    #[arg(long, default_value_t = 1e-3)]
    h: f64,
    /// Comma-separated points to print.
    #[arg(long)]
    eval: Option<String>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Experiment {
    Wait,
    Dart,
    Split,
}

/// `text` goes to stdout; `body` goes to `--out`, or to stdout when there is no text.
struct Output {
    text: String,
    body: String,
    code: u8,
}

impl Output {
    fn body(body: String) -> Self {
        Output { text: String::new(), body, code: 0 }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = run(&cli).and_then(|o| {
        let shown = if let Some(path) = &cli.common.out {
            io::write_atomic(path, o.body.as_bytes())?;
            &o.text
        } else if o.text.is_empty() {
            &o.body
        } else {
            &o.text
        };
        io::print(shown)?;
        Ok(o.code)
    });
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code() as u8)
        }
    }
}

fn run(cli: &Cli) -> CliResult<Output> {
    let c = &cli.common;
    let streams = Streams::new(c.seed);
    if c.n == 0 {
        return Err(CliError::invalid("--n: must be at least 1"));
    }
    match &cli.cmd {
        Cmd::Bias { dist } => bias(dist, c.format.unwrap_or(Format::Json)),
        Cmd::Levy { nu, trunc_eps } => levy(nu, *trunc_eps, c.n, &streams, c.format.unwrap_or(Format::Json)),
        Cmd::Deconv { dist } => deconv(dist, c.format.unwrap_or(Format::Json)),
        Cmd::Renewal { dist, experiment, t, horizon } => {
            renewal(dist, *experiment, t, *horizon, c.n, &streams, c.format.unwrap_or(Format::Csv))
        }
        Cmd::Midzuno { pop, m, scheme, monte_carlo } => {
            midzuno(pop, *m, *scheme, *monte_carlo, c.n, &streams, c.format.unwrap_or(Format::Json))
        }
        Cmd::Dickman { grid, a } => {
            let g = match a {
                Some(a) => dickman_conv_power(*a, grid.umax, grid.h).map(|p| p.g),
                None => dickman_rho(grid.umax, grid.h),
            }
            .map_err(|e| CliError::from_core("dickman", e))?;
            tabulation(&g, if a.is_some() { "g" } else { "rho" }, grid, c.format.unwrap_or(Format::Csv))
        }
        Cmd::Buchstab { beta: Some(beta), bins, .. } => {
            let r = rough_part_experiment(*beta, *bins, c.n, &streams).map_err(|e| CliError::from_core("--beta", e))?;
            let body = match c.format.unwrap_or(Format::Json) {
                Format::Json => json_pretty(&json!(r)),
                Format::Csv => {
                    let mut s = String::from("a,b,empirical,predicted,se\n");
                    for b in &r.bins {
                        writeln!(s, "{},{},{},{},{}", b.a, b.b, b.empirical, b.predicted, b.se).unwrap();
                    }
                    s
                }
            };
            Ok(Output::body(body))
        }
        Cmd::Buchstab { grid, .. } => {
            let g = buchstab_omega(grid.umax, grid.h).map_err(|e| CliError::from_core("buchstab", e))?;
            tabulation(&g, "omega", grid, c.format.unwrap_or(Format::Csv))
        }
        Cmd::Primes { nmax, u } => primes(*nmax, *u, c.format.unwrap_or(Format::Json)),
        Cmd::Suite { only } => run_suite(only.as_deref(), c.seed),
    }
}

fn json_pretty(v: &serde_json::Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable report");
    s.push('\n');
    s
}

fn bias(arg: &str, format: Format) -> CliResult<Output> {
    let d = io::distribution("--dist", arg)?;
    let star = d.size_bias().map_err(|e| CliError::from_core("--dist", e))?;
    let body = match format {
        Format::Json => {
            let mut s = star.to_json();
            s.push('\n');
            s
        }
        Format::Csv => {
            if let Some(g) = star.as_grid() {
                let mut buf = Vec::new();
                g.write_csv(&mut buf, "f").map_err(|e| CliError::Internal(e.to_string()))?;
                String::from_utf8(buf).expect("csv is utf-8")
            } else if star.is_discrete() {
                let t = star.atom_table().map_err(|e| CliError::from_core("--dist", e))?;
                let mut s = String::from("x,p\n");
                for (x, p) in &t.atoms {
                    writeln!(s, "{x},{p}").unwrap();
                }
                s
            } else {
                return Err(CliError::invalid(format!(
                    "--format csv: {star} has no table form; use --format json"
                )));
            }
        }
    };
    Ok(Output { text: format!("{star}\n"), body, code: 0 })
}

fn ks_rows(rows: &[(&str, Option<sizebias::stats::KsReport>)]) -> String {
    let mut s = String::from("check,statistic,threshold,n1,n2,pass\n");
    for (name, r) in rows {
        if let Some(r) = r {
            writeln!(s, "{name},{},{},{},{},{}", r.statistic, r.threshold, r.n1, r.n2, r.pass).unwrap();
        }
    }
    s
}

fn levy(arg: &str, trunc_eps: f64, n: usize, streams: &Streams, format: Format) -> CliResult<Output> {
    let nu = io::measure("--nu", arg)?;
    let field = |e| CliError::from_core("--nu", e);
    let x = build_infdiv(&nu, trunc_eps).map_err(field)?;
    let y = nu.steutel_increment().map_err(field)?;
    let report = verify_steutel(&nu, n, trunc_eps, streams).map_err(field)?;
    let body = match format {
        Format::Json => json_pretty(&json!({
            "measure": serde_json::from_str::<serde_json::Value>(&nu.to_json()).expect("measure json"),
            "mean": nu.total_mass(),
            "jump_rate": x.jump_rate(),
            "increment": y.to_string(),
            "seed": streams.seed(),
            "n": n,
            "report": report,
        })),
        Format::Csv => ks_rows(&[
            ("x_plus_y", Some(report.main)),
            ("one_more_term", report.one_more_term),
            ("increment", report.increment),
        ]),
    };
    Ok(Output::body(body))
}

fn deconv(arg: &str, format: Format) -> CliResult<Output> {
    let d = io::distribution("--dist", arg)?;
    let r = deconvolution_check(&d).map_err(|e| CliError::from_core("--dist", e))?;
    let body = match format {
        Format::Json => json_pretty(&json!({ "distribution": d.to_string(), "report": r })),
        Format::Csv => format!(
            "max_eta,at_u,verdict,u_min,u_max,points\n{},{},{},{},{},{}\n",
            r.max_eta,
            r.at_u,
            serde_json::to_value(r.verdict).unwrap().as_str().unwrap(),
            r.u_min,
            r.u_max,
            r.points
        ),
    };
    Ok(Output::body(body))
}

fn renewal(
    arg: &str,
    experiment: Experiment,
    ts: &str,
    horizon: Option<f64>,
    n: usize,
    streams: &Streams,
    format: Format,
) -> CliResult<Output> {
    let d = io::distribution("--dist", arg)?;
    let field = |e| CliError::from_core("--dist", e);
    let body = match experiment {
        Experiment::Wait => {
            let ts = io::number_list("--t", ts)?;
            let proc = StationaryRenewal::new(d).map_err(field)?;
            let rows = waiting_table(&proc, &ts, n, streams).map_err(field)?;
            match format {
                Format::Csv => {
                    let mut buf = Vec::new();
                    write_waiting_csv(&rows, &mut buf).map_err(|e| CliError::Internal(e.to_string()))?;
                    String::from_utf8(buf).expect("csv is utf-8")
                }
                Format::Json => json_pretty(&json!({
                    "interarrival": proc.interarrival().to_string(),
                    "mean_wait": proc.mean_wait().ok(),
                    "rows": rows,
                })),
            }
        }
        Experiment::Dart => {
            let horizon = horizon.unwrap_or(DART_HORIZON_FACTOR as f64 * d.mean());
            let darts = dart_intervals(&d, horizon, n, streams).map_err(|e| CliError::from_core("--horizon", e))?;
            match format {
                Format::Csv => {
                    let mut s = String::from("length\n");
                    for l in &darts.lengths {
                        writeln!(s, "{l}").unwrap();
                    }
                    s
                }
                Format::Json => {
                    let oracle = weighted_star_sample_par(&d, n, streams, "cli.dart.oracle").map_err(field)?;
                    let ks = ks_two_sample(&darts.lengths, &oracle).map_err(field)?;
                    let (mean, se) = mean_se(&darts.lengths);
                    json_pretty(&json!({
                        "interarrival": d.to_string(),
                        "horizon": horizon,
                        "n": n,
                        "mean_length": mean,
                        "se": se,
                        "rejected": darts.rejected,
                        "rejection_rate": darts.rejection_rate(),
                        "ks_vs_size_biased": ks,
                    }))
                }
            }
        }
        Experiment::Split => {
            let r = split_test(&d, n, streams).map_err(field)?;
            match format {
                Format::Json => json_pretty(&json!({ "x0_law": d.to_string(), "pass": r.pass(), "report": r })),
                Format::Csv => {
                    let mut s = ks_rows(&[("forward", Some(r.forward)), ("backward", Some(r.backward))]);
                    writeln!(s, "independence,{},{},{},{},{}", r.independence, 0.01, r.n, r.n, r.independent)
                        .unwrap();
                    s
                }
            }
        }
    };
    Ok(Output::body(body))
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

fn midzuno(
    arg: &str,
    m: usize,
    scheme: Scheme,
    monte_carlo: bool,
    n: usize,
    streams: &Streams,
    format: Format,
) -> CliResult<Output> {
    let pop = io::population("--pop", arg)?;
    if m == 0 || m > pop.len() {
        return Err(CliError::invalid(format!("--m: must lie in 1..={}", pop.len())));
    }
    let field = |e| CliError::from_core("--pop", e);
    let r = if monte_carlo || binomial(pop.len(), m) > ENUMERATION_BUDGET {
        EstimateReport::monte_carlo(&pop, m, scheme, n, streams)
    } else {
        EstimateReport::exact(&pop, m, scheme)
    }
    .map_err(field)?;
    let body = match format {
        Format::Json => {
            let mut s = r.to_json();
            s.push('\n');
            s
        }
        Format::Csv => format!(
            "scheme,m,estimate_mean,true_ratio,bias,method,se\n{},{},{},{},{},{},{}\n",
            r.scheme,
            r.m,
            r.estimate_mean,
            r.true_ratio,
            r.bias,
            r.method,
            r.se.map(|v| v.to_string()).unwrap_or_default()
        ),
    };
    Ok(Output::body(body))
}

fn tabulation(g: &GridFunction, name: &str, args: &GridArgs, format: Format) -> CliResult<Output> {
    let mut text = String::new();
    if let Some(ev) = &args.eval {
        for x in io::number_list("--eval", ev)? {
            if !(x >= g.x0 && x <= g.x_max() + 1e-12) {
                return Err(CliError::invalid(format!(
                    "--eval: {x} lies outside the tabulated range [{}, {}]",
                    g.x0,
                    g.x_max()
                )));
            }
            writeln!(text, "{}", g.eval(x)).unwrap();
        }
    }
    let body = match format {
        Format::Csv => {
            let mut buf = Vec::new();
            g.write_csv(&mut buf, name).map_err(|e| CliError::Internal(e.to_string()))?;
            String::from_utf8(buf).expect("csv is utf-8")
        }
        Format::Json => json_pretty(&json!(g)),
    };
    Ok(Output { text, body, code: 0 })
}

fn primes(nmax: u64, u: f64, format: Format) -> CliResult<Output> {
    let e = prime_factor_empirics(nmax, u).map_err(|e| CliError::from_core("primes", e))?;
    let rho = if u <= 1.0 {
        1.0
    } else {
        dickman_rho(u, 1e-3).map_err(|e| CliError::from_core("--u", e))?.eval(u)
    };
    let omega = if u < 1.0 {
        None
    } else if u <= 2.0 {
        Some(1.0 / u)
    } else {
        Some(buchstab_omega(u, 1e-3).map_err(|e| CliError::from_core("--u", e))?.eval(u))
    };
    let body = match format {
        Format::Json => json_pretty(&json!({
            "empirics": e,
            "rho_u": rho,
            "omega_u": omega,
            "rough_scaled": e.rough_scaled(),
        })),
        Format::Csv => {
            let mut s = String::from("count_kind,n_max,u,threshold,count,fraction,reference\n");
            let omega_scaled = omega.map(|w| w * u / (nmax as f64).ln());
            for (kind, sm, reference) in [("smooth", &e.smooth, Some(rho)), ("rough", &e.rough, omega_scaled)] {
                writeln!(
                    s,
                    "{kind},{},{},{},{},{},{}",
                    sm.n_max,
                    sm.u,
                    sm.threshold,
                    sm.count,
                    sm.fraction,
                    reference.map(|v| v.to_string()).unwrap_or_default()
                )
                .unwrap();
            }
            s
        }
    };
    Ok(Output::body(body))
}

fn run_suite(only: Option<&str>, seed: u64) -> CliResult<Output> {
    let known = suite::criterion_ids();
    let ids: Vec<&str> = match only {
        None => known.clone(),
        Some(list) => list.split(',').map(str::trim).collect(),
    };
    if let Some(bad) = ids.iter().find(|id| !known.contains(id)) {
        return Err(CliError::invalid(format!("--only: unknown criterion `{bad}` (known: {})", known.join(","))));
    }
    let mut text = format!("seed {seed}\n");
    let mut outcomes = Vec::new();
    for id in ids {
        let o = suite::run_one(id, seed).expect("id checked above");
        writeln!(text, "{}", o.line()).unwrap();
        outcomes.push(o);
    }
    let failed = outcomes.iter().filter(|o| !o.pass).count();
    writeln!(text, "{} passed, {failed} failed", outcomes.len() - failed).unwrap();
    let note = suite::shifted_poisson_note(2.0).map_err(|e| CliError::Internal(e.to_string()))?;
    writeln!(
        text,
        "note: 1+Poisson(2): X* vs X+Bernoulli(2/3) pmf gap {:e}; phi*/phi verdict {:?}",
        note.pmf_residual, note.deconvolution.verdict
    )
    .unwrap();
    // timings stay out of the file so reruns compare equal
    let rows: Vec<_> = outcomes
        .iter()
        .map(|o| json!({ "id": o.id, "name": o.name, "pass": o.pass, "detail": o.detail }))
        .collect();
    let body = json_pretty(&json!({ "seed": seed, "criteria": rows, "shifted_poisson": note }));
    Ok(Output { text, body, code: u8::from(failed > 0) })
}
