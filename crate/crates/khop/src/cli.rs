//! Command-line front end.
//!
//! Exit codes: 0 on success, 1 when a verification suite fails, 2 on
//! usage or domain errors. Rational values print as `p/q`; floats are
//! emitted in shortest round-trip form, so identical invocations with
//! identical seeds produce byte-identical output.

use std::collections::HashMap;
use std::ffi::OsString;
use std::io::Write;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_traits::{One, ToPrimitive};
use serde::Serialize;

use crate::cltstats::RateSeries;
use crate::exactpoly::{format_rational, parse_rational, ChamberPoly, MultiPoly, Rational};
use crate::hopcumulants::CumulantEngine;
use crate::hopmoments::{DEFAULT_K_MAX, DEFAULT_N_MAX};
use crate::simulator::{self, Intensities, SimConfig};
use crate::variance;
use crate::{suites, Error, Result};

#[derive(Parser)]
#[command(
    name = "khop",
    version,
    about = "Exact moments, cumulants, and Monte Carlo checks for k-hop path counts in the 1D unit-disk random graph"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Joint moments of k-hop counts, as exact polynomials or values
    Moments(EngineArgs),
    /// Joint cumulants of k-hop counts, same surface as `moments`
    Cumulants(EngineArgs),
    /// Closed-form variance: general, equal-intensity, or asymptotic
    Variance(VarianceArgs),
    /// Monte Carlo simulation of the count with exact reference values
    Simulate(SimulateArgs),
    /// Kolmogorov/Wasserstein convergence-rate experiment
    Clt(CltArgs),
    /// Built-in verification suites
    Check(CheckArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Args)]
struct EngineArgs {
    /// Hop count (k >= 1)
    #[arg(long)]
    k: u32,
    /// Order n: shorthand for n power-one arguments
    #[arg(long, conflicts_with = "powers")]
    n: Option<u32>,
    /// Comma-separated powers, e.g. `2,1` for kappa(X^2, Y)
    #[arg(long)]
    powers: Option<String>,
    /// Evaluate at these comma-separated exact offsets (ascending;
    /// auto-sorted with a warning otherwise)
    #[arg(long)]
    tau: Option<String>,
    /// Collapse all offsets to one symbolic `tau`
    #[arg(long)]
    tau_equal: bool,
    /// Comma-separated per-cell intensities
    #[arg(long, conflicts_with = "lambda_equal")]
    lambda: Option<String>,
    /// One intensity shared by every cell
    #[arg(long)]
    lambda_equal: Option<String>,
    /// Emit the polynomial (implied when no --tau is given)
    #[arg(long)]
    symbolic: bool,
    /// Raise the desk-scale limits (k <= 5, total order <= 6)
    #[arg(long)]
    force: bool,
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
}

#[derive(Args)]
struct VarianceArgs {
    #[arg(long)]
    k: u32,
    /// Exact offset; omit for symbolic output
    #[arg(long)]
    tau: Option<String>,
    /// Shared intensity
    #[arg(long, conflicts_with = "lambda_vec")]
    lambda: Option<String>,
    /// Comma-separated per-cell intensities (uses the general formula)
    #[arg(long)]
    lambda_vec: Option<String>,
    /// Emit the leading-term asymptotic instead
    #[arg(long)]
    asymptotic: bool,
    /// Emit the second moment instead of the variance
    #[arg(long)]
    second_moment: bool,
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long)]
    k: u32,
    #[arg(long)]
    r: String,
    #[arg(long)]
    t: String,
    /// Shared intensity (exact decimal or p/q)
    #[arg(long)]
    lambda: String,
    #[arg(long)]
    samples: u64,
    #[arg(long)]
    seed: u64,
    #[arg(long)]
    threads: Option<usize>,
    /// Write one count per line (with a header) to this path
    #[arg(long)]
    emit_samples: Option<String>,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
}

#[derive(Args)]
struct CltArgs {
    #[arg(long)]
    k: u32,
    #[arg(long)]
    r: String,
    #[arg(long)]
    t: String,
    /// Comma-separated intensities, e.g. `25,50,100,200,400`
    #[arg(long)]
    lambdas: String,
    #[arg(long)]
    samples: u64,
    #[arg(long)]
    seed: u64,
    #[arg(long)]
    threads: Option<usize>,
    /// Write the CSV here instead of stdout
    #[arg(long)]
    out: Option<String>,
    /// Test hook: skip sampling and use planted distances
    /// (`c/sqrt` for 1/sqrt(lambda), `const` for a flat 1/4)
    #[arg(long)]
    synthetic: Option<String>,
}

#[derive(Args)]
struct CheckArgs {
    /// tables | oracles | bounds | mc | all
    #[arg(long, default_value = "all")]
    suite: String,
    #[arg(long)]
    threads: Option<usize>,
}

/// Entry point; returns the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let outcome = match cli.command {
        Command::Moments(args) => run_engine(&args, false),
        Command::Cumulants(args) => run_engine(&args, true),
        Command::Variance(args) => run_variance(&args),
        Command::Simulate(args) => run_simulate(&args),
        Command::Clt(args) => run_clt(&args),
        Command::Check(args) => return run_check(&args),
    };
    match outcome {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    }
}

fn parse_rational_list(s: &str) -> Result<Vec<Rational>> {
    s.split(',').map(|p| parse_rational(p.trim())).collect()
}

fn env_threads(cli_threads: Option<usize>) -> Option<usize> {
    cli_threads.or_else(|| {
        std::env::var("KHOP_THREADS")
            .ok()
            .and_then(|v| v.parse().ok())
    })
}

fn engine_limits(k: u32, n: u32, force: bool) -> Result<(u32, u32)> {
    if !force && (k > DEFAULT_K_MAX || n > DEFAULT_N_MAX) {
        return Err(Error::LimitExceeded(format!(
            "k = {k}, total order = {n} exceeds the desk-scale limits \
             ({DEFAULT_K_MAX}, {DEFAULT_N_MAX}); pass --force to override"
        )));
    }
    Ok((k.max(DEFAULT_K_MAX), n.max(DEFAULT_N_MAX)))
}

#[derive(Serialize)]
struct EngineOutput {
    k: u32,
    powers: Vec<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    polynomial: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    value: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    inputs_sorted: Option<bool>,
}

fn run_engine(args: &EngineArgs, cumulants: bool) -> Result<()> {
    let mults: Vec<u32> = match (&args.n, &args.powers) {
        (Some(n), None) => vec![1; *n as usize],
        (None, Some(p)) => p
            .split(',')
            .map(|x| {
                x.trim()
                    .parse::<u32>()
                    .map_err(|_| Error::InvalidConfig(format!("bad power `{x}`")))
            })
            .collect::<Result<_>>()?,
        (None, None) => vec![1],
        (Some(_), Some(_)) => unreachable!("clap conflicts_with"),
    };
    let total: u32 = mults.iter().sum();
    let (k_max, n_max) = engine_limits(args.k, total, args.force)?;
    let ce = CumulantEngine::new(k_max, n_max);
    let me = ce.moments();
    let vars = ce.vars().clone();
    let entry: ChamberPoly = if cumulants {
        ce.cumulant(args.k, &mults)?
    } else {
        me.moment(args.k, &mults)?
    };

    let lambdas: Option<Vec<Rational>> = match (&args.lambda, &args.lambda_equal) {
        (Some(list), None) => {
            let v = parse_rational_list(list)?;
            if v.len() != (args.k.max(2) - 1) as usize {
                return Err(Error::InvalidConfig(format!(
                    "expected {} intensities for k = {}, got {}",
                    args.k.max(2) - 1,
                    args.k,
                    v.len()
                )));
            }
            Some(v)
        }
        (None, Some(one)) => Some(vec![parse_rational(one)?; (args.k.max(2) - 1) as usize]),
        (None, None) => None,
        _ => unreachable!("clap conflicts_with"),
    };

    let mut polynomial = if args.tau_equal {
        entry.all_equal(vars.tau)
    } else {
        entry.poly.clone()
    };
    if let Some(ls) = &lambdas {
        for (i, l) in ls.iter().enumerate() {
            polynomial = polynomial.substitute_value(vars.lambdas[i], l);
        }
    }

    let mut out = EngineOutput {
        k: args.k,
        powers: mults.clone(),
        polynomial: None,
        value: None,
        inputs_sorted: None,
    };
    if args.symbolic || args.tau.is_none() {
        out.polynomial = Some(polynomial.canonical_string());
    }
    if let Some(taus) = &args.tau {
        let taus = parse_rational_list(taus)?;
        if taus.len() != mults.len() {
            return Err(Error::InvalidConfig(format!(
                "expected {} offsets (one per argument), got {}",
                mults.len(),
                taus.len()
            )));
        }
        let sorted = taus.windows(2).all(|w| w[0] <= w[1]);
        // offsets carry their powers with them into the sorted chamber
        let mut pairs: Vec<(Rational, u32)> = taus.into_iter().zip(mults.iter().copied()).collect();
        pairs.sort_by(|a, b| a.0.cmp(&b.0));
        let sorted_mults: Vec<u32> = pairs.iter().map(|p| p.1).collect();
        let sorted_entry: ChamberPoly = if sorted_mults == mults {
            entry.clone()
        } else if cumulants {
            ce.cumulant(args.k, &sorted_mults)?
        } else {
            me.moment(args.k, &sorted_mults)?
        };
        let mut assignment = HashMap::new();
        for (j, (t, _)) in pairs.iter().enumerate() {
            assignment.insert(vars.taus[j], t.clone());
        }
        let ls = lambdas
            .clone()
            .unwrap_or_else(|| vec![Rational::one(); (args.k.max(2) - 1) as usize]);
        for (i, l) in ls.iter().enumerate() {
            assignment.insert(vars.lambdas[i], l.clone());
        }
        let value = sorted_entry.poly.eval(&assignment)?;
        out.value = Some(format_rational(&value));
        out.inputs_sorted = Some(sorted);
        if !sorted {
            eprintln!("warning: offsets were not ascending; sorted before evaluation");
        }
    }

    match args.format {
        Format::Json => println!("{}", serde_json::to_string(&out).expect("serializable")),
        Format::Text => {
            if let Some(p) = &out.polynomial {
                println!("{p}");
            }
            if let Some(v) = &out.value {
                println!("{v}");
            }
        }
    }
    Ok(())
}

fn run_variance(args: &VarianceArgs) -> Result<()> {
    let vars = crate::exactpoly::EngineVars::new(args.k.max(2) + 1, 1);
    #[derive(Serialize)]
    struct VarianceOutput {
        k: u32,
        kind: &'static str,
        #[serde(skip_serializing_if = "Option::is_none")]
        polynomial: Option<String>,
        #[serde(skip_serializing_if = "Option::is_none")]
        value: Option<String>,
    }
    let kind = if args.asymptotic {
        "asymptotic"
    } else if args.second_moment {
        "second-moment"
    } else if args.lambda_vec.is_some() {
        "general"
    } else {
        "equal"
    };
    let mut out = VarianceOutput {
        k: args.k,
        kind,
        polynomial: None,
        value: None,
    };

    if args.asymptotic {
        let tau = parse_rational(args.tau.as_deref().ok_or_else(|| {
            Error::InvalidConfig("--asymptotic needs --tau and --lambda".into())
        })?)?;
        let lambda = parse_rational(
            args.lambda
                .as_deref()
                .ok_or_else(|| Error::InvalidConfig("--asymptotic needs --lambda".into()))?,
        )?;
        out.value = Some(format_rational(&variance::variance_asymptotic(
            args.k, &lambda, &tau,
        )?));
    } else {
        let poly = if let Some(vec) = &args.lambda_vec {
            let ls = parse_rational_list(vec)?;
            if ls.len() != (args.k.max(2) - 1) as usize {
                return Err(Error::InvalidConfig(format!(
                    "expected {} per-cell intensities, got {}",
                    args.k.max(2) - 1,
                    ls.len()
                )));
            }
            let mut p = variance::variance_general(&vars, args.k)?;
            for (i, l) in ls.iter().enumerate() {
                p = p.substitute_value(vars.lambdas[i], l);
            }
            p
        } else {
            let base = if args.second_moment {
                variance::second_moment_equal(&vars, args.k)?
            } else {
                variance::variance_equal(&vars, args.k)?
            };
            match &args.lambda {
                Some(l) => base.substitute_value(vars.lambda, &parse_rational(l)?),
                None => base,
            }
        };
        match &args.tau {
            Some(t) => {
                let value = poly.substitute_value(vars.tau, &parse_rational(t)?);
                let c = constant_of(&value)?;
                out.value = Some(format_rational(&c));
            }
            None => out.polynomial = Some(poly.canonical_string()),
        }
    }
    match args.format {
        Format::Json => println!("{}", serde_json::to_string(&out).expect("serializable")),
        Format::Text => {
            if let Some(p) = &out.polynomial {
                println!("{p}");
            }
            if let Some(v) = &out.value {
                println!("{v}");
            }
        }
    }
    Ok(())
}

fn constant_of(p: &MultiPoly) -> Result<Rational> {
    if p.used_symbols().is_empty() {
        Ok(p.constant_term())
    } else {
        Err(Error::InvalidConfig(
            "value requested but free symbols remain; pass the missing flags".into(),
        ))
    }
}

#[derive(Serialize)]
struct ExactRefs {
    mean: String,
    variance: String,
    c3: String,
    c4: String,
}

#[derive(Serialize)]
struct SimulateOutput {
    n: u64,
    mean: f64,
    variance: f64,
    c3: f64,
    c4: f64,
    skewness: f64,
    ex_kurtosis: f64,
    exact: ExactRefs,
}

fn run_simulate(args: &SimulateArgs) -> Result<()> {
    let cfg = SimConfig {
        k: args.k,
        r: parse_rational(&args.r)?,
        t: parse_rational(&args.t)?,
        intensities: Intensities::Equal(parse_rational(&args.lambda)?),
        n_samples: args.samples,
        seed: args.seed,
        threads: env_threads(args.threads),
    };
    cfg.validate()?;
    let stats = simulator::run_simulation(&cfg)?;
    if let Some(path) = &args.emit_samples {
        let mut f = std::fs::File::create(path)?;
        simulator::dump_samples(&cfg, &stats, &mut f)?;
    }
    let tau = cfg.tau();
    let lambda = match &cfg.intensities {
        Intensities::Equal(l) => l.clone(),
        Intensities::PerCell(_) => unreachable!("simulate takes one intensity"),
    };
    let ce = CumulantEngine::new(args.k.max(2), 4);
    let exact = ExactRefs {
        mean: format_rational(&ce.cumulant_at_equal(args.k, 1, &lambda, &tau)?),
        variance: format_rational(&ce.cumulant_at_equal(args.k, 2, &lambda, &tau)?),
        c3: format_rational(&ce.cumulant_at_equal(args.k, 3, &lambda, &tau)?),
        c4: format_rational(&ce.cumulant_at_equal(args.k, 4, &lambda, &tau)?),
    };
    let out = SimulateOutput {
        n: stats.n(),
        mean: stats.mean(),
        variance: stats.variance(),
        c3: stats.k3(),
        c4: stats.k4(),
        skewness: stats.skewness(),
        ex_kurtosis: stats.ex_kurtosis(),
        exact,
    };
    match args.format {
        Format::Json => println!("{}", serde_json::to_string(&out).expect("serializable")),
        Format::Text => {
            println!("n           {}", out.n);
            println!("mean        {}   (exact {})", out.mean, out.exact.mean);
            println!(
                "variance    {}   (exact {})",
                out.variance, out.exact.variance
            );
            println!("c3          {}   (exact {})", out.c3, out.exact.c3);
            println!("c4          {}   (exact {})", out.c4, out.exact.c4);
            println!("skewness    {}", out.skewness);
            println!("ex_kurtosis {}", out.ex_kurtosis);
        }
    }
    Ok(())
}

fn write_rate_csv(series: &RateSeries, out: &mut impl Write) -> Result<()> {
    writeln!(out, "lambda,n_samples,ks,w1")?;
    for p in &series.points {
        writeln!(out, "{},{},{},{}", p.lambda, p.n_samples, p.ks, p.w1)?;
    }
    writeln!(
        out,
        "# slope_ks={} slope_w1={}",
        series.slope_ks()?,
        series.slope_w1()?
    )?;
    Ok(())
}

fn run_clt(args: &CltArgs) -> Result<()> {
    let lambdas = parse_rational_list(&args.lambdas)?;
    let series = match args.synthetic.as_deref() {
        None => suites::rate_experiment(
            args.k,
            &parse_rational(&args.r)?,
            &parse_rational(&args.t)?,
            &lambdas,
            args.samples,
            args.seed,
            env_threads(args.threads),
        )?,
        Some(mode) => {
            let mut series = RateSeries::default();
            for l in &lambdas {
                let lf = l.to_f64().unwrap_or(f64::NAN);
                let d = match mode {
                    "c/sqrt" => 1.0 / lf.sqrt(),
                    "const" => 0.25,
                    other => {
                        return Err(Error::InvalidConfig(format!(
                            "unknown synthetic mode `{other}` (use c/sqrt or const)"
                        )))
                    }
                };
                series.points.push(crate::cltstats::RatePoint {
                    lambda: lf,
                    n_samples: args.samples,
                    ks: d,
                    w1: d,
                });
            }
            series
        }
    };
    match &args.out {
        Some(path) => {
            let mut f = std::fs::File::create(path)?;
            write_rate_csv(&series, &mut f)?;
        }
        None => {
            let stdout = std::io::stdout();
            write_rate_csv(&series, &mut stdout.lock())?;
        }
    }
    println!(
        "slope_ks={} slope_w1={}",
        series.slope_ks()?,
        series.slope_w1()?
    );
    Ok(())
}

fn run_check(args: &CheckArgs) -> i32 {
    match suites::run_suite(&args.suite, env_threads(args.threads)) {
        Ok(results) => {
            let mut failed = 0;
            for r in &results {
                println!("{}", r.line());
                if !r.pass {
                    failed += 1;
                }
            }
            if failed == 0 {
                println!("all {} checks passed", results.len());
                0
            } else {
                println!("{failed} of {} checks failed", results.len());
                1
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    }
}
