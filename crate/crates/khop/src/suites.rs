//! Built-in verification suites, shared by `khop check` and the
//! acceptance test target. Each check pins its tolerance in code;
//! Monte Carlo checks run under fixed seeds and are fully
//! deterministic.

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive};
use rand_core::RngCore;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::cltstats::{self, RatePoint, RateSeries};
use crate::exactpoly::{EngineVars, MultiPoly, Rational};
use crate::hopcumulants::{cumulant_bound, CumulantEngine};
use crate::hopmoments::moment_bound;
use crate::oracles;
use crate::simulator::{
    self, count_khops_bruteforce, count_khops_lens, sample_points, Intensities, SimConfig,
};
use crate::variance;
use crate::{Error, Result};

/// Outcome of one named check.
#[derive(Clone, Debug)]
pub struct CheckResult {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

impl CheckResult {
    fn new(name: &str, pass: bool, detail: impl Into<String>) -> Self {
        CheckResult {
            name: name.to_string(),
            pass,
            detail: detail.into(),
        }
    }

    pub fn line(&self) -> String {
        let tag = if self.pass { "PASS" } else { "FAIL" };
        if self.detail.is_empty() {
            format!("{tag} {}", self.name)
        } else {
            format!("{tag} {} ({})", self.name, self.detail)
        }
    }
}

fn q(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

/// Fixed seeds of the Monte Carlo checks.
pub const MC_SEED: u64 = 0x6b686f70; // "khop"
pub const RATE_SEED: u64 = 0x72617465; // "rate"

fn lambdas_to_one(vars: &EngineVars, poly: &MultiPoly, k: u32) -> MultiPoly {
    let mut out = poly.clone();
    for i in 0..(k.max(2) - 1) as usize {
        out = out.substitute_value(vars.lambdas[i], &Rational::one());
    }
    out
}

/// Closed-form table reproduction, exact rational equality.
pub fn suite_tables() -> Result<Vec<CheckResult>> {
    let ce = CumulantEngine::new(4, 5);
    let me = ce.moments();
    let vars = ce.vars().clone();
    let mut out = Vec::new();

    // two-hop joint moments, distinct offsets, lambda1 = 1
    let expected2: [&str; 4] = [
        "tau1",
        "tau1 + tau1*tau2",
        "tau1 + 2*tau1*tau2 + tau1*tau3",
        "tau1 + 4*tau1*tau2 + 2*tau1*tau3 + tau1*tau4",
    ];
    let tails2: [&str; 4] = [
        "",
        "",
        " + tau1*tau2*tau3",
        " + 3*tau1*tau2*tau3 + 2*tau1*tau2*tau4 + tau1*tau3*tau4 + tau1*tau2*tau3*tau4",
    ];
    let mut pass = true;
    let mut detail = String::new();
    for n in 1..=4u32 {
        let got = me.moment(2, &vec![1; n as usize])?;
        let got = got.poly.substitute_value(vars.lambdas[0], &Rational::one());
        let want = format!("{}{}", expected2[n as usize - 1], tails2[n as usize - 1]);
        if got.canonical_string() != want {
            pass = false;
            detail = format!("order {n}: got {}", got.canonical_string());
            break;
        }
    }
    out.push(CheckResult::new(
        "tables: two-hop joint moments, orders 1-4",
        pass,
        detail,
    ));

    let equal_forms = |k: u32, orders: &[&str], cumulant: bool| -> Result<CheckResult> {
        let mut pass = true;
        let mut detail = String::new();
        for (i, want) in orders.iter().enumerate() {
            let n = i as u32 + 1;
            let poly = if cumulant {
                ce.cumulant_equal(k, n)?
            } else {
                me.moment_equal(k, n)?
            };
            let got = lambdas_to_one(&vars, &poly, k).canonical_string();
            if got != *want {
                pass = false;
                detail = format!("order {n}: got {got}, want {want}");
                break;
            }
        }
        let kind = if cumulant { "cumulants" } else { "moments" };
        Ok(CheckResult::new(
            &format!(
                "tables: {k}-hop {kind} at equal offsets, orders 1-{}",
                orders.len()
            ),
            pass,
            detail,
        ))
    };

    out.push(equal_forms(
        3,
        &[
            "1/2*tau^2",
            "1/2*tau^2 + 2/3*tau^3 + 1/4*tau^4",
            "1/2*tau^2 + 2*tau^3 + 5/2*tau^4 + tau^5 + 1/8*tau^6",
            "1/2*tau^2 + 14/3*tau^3 + 53/4*tau^4 + 66/5*tau^5 + 67/12*tau^6 + tau^7 + 1/16*tau^8",
        ],
        false,
    )?);
    out.push(equal_forms(
        4,
        &[
            "1/6*tau^3",
            "1/6*tau^3 + 1/4*tau^4 + 2/15*tau^5 + 1/36*tau^6",
            "1/6*tau^3 + 3/4*tau^4 + 5/4*tau^5 + 59/60*tau^6 + 13/35*tau^7 + 1/15*tau^8 + 1/216*tau^9",
        ],
        false,
    )?);
    out.push(equal_forms(
        3,
        &[
            "1/2*tau^2",
            "1/2*tau^2 + 2/3*tau^3",
            "1/2*tau^2 + 2*tau^3 + 7/4*tau^4",
            "1/2*tau^2 + 14/3*tau^3 + 23/2*tau^4 + 36/5*tau^5",
            "1/2*tau^2 + 10*tau^3 + 215/4*tau^4 + 86*tau^5 + 41*tau^6",
        ],
        true,
    )?);
    out.push(equal_forms(
        4,
        &[
            "1/6*tau^3",
            "1/6*tau^3 + 1/4*tau^4 + 2/15*tau^5",
            "1/6*tau^3 + 3/4*tau^4 + 5/4*tau^5 + 9/10*tau^6 + 69/280*tau^7",
        ],
        true,
    )?);

    // general-intensity variance at tau = 1; the tau^5 coefficients for
    // four hops are 6/120, 4/120, 6/120 (the formula's values, which
    // also match the equal-intensity specialization)
    let gvars = EngineVars::new(7, 2);
    let expect_general: [&str; 3] = [
        "lambda1",
        "1/2*lambda1*lambda2 + 1/3*lambda1^2*lambda2 + 1/3*lambda1*lambda2^2",
        "1/6*lambda1*lambda2*lambda3 + 1/12*lambda1^2*lambda2*lambda3 \
         + 1/12*lambda1*lambda2^2*lambda3 + 1/12*lambda1*lambda2*lambda3^2 \
         + 1/20*lambda1^2*lambda2^2*lambda3 + 1/30*lambda1^2*lambda2*lambda3^2 \
         + 1/20*lambda1*lambda2^2*lambda3^2",
    ];
    let mut pass = true;
    let mut detail = String::new();
    for (i, want) in expect_general.iter().enumerate() {
        let k = i as u32 + 2;
        let got = variance::variance_general(&gvars, k)?
            .substitute_value(gvars.tau, &Rational::one())
            .canonical_string();
        if got != *want {
            pass = false;
            detail = format!("k = {k}: got {got}");
            break;
        }
    }
    out.push(CheckResult::new(
        "tables: general-intensity variance, k=2..4 at tau=1",
        pass,
        detail,
    ));

    let expect_equal: [&str; 5] = [
        "tau",
        "1/2*tau^2 + 2/3*tau^3",
        "1/6*tau^3 + 1/4*tau^4 + 2/15*tau^5",
        "1/24*tau^4 + 1/15*tau^5 + 1/24*tau^6 + 4/315*tau^7",
        "1/120*tau^5 + 1/72*tau^6 + 1/105*tau^7 + 1/288*tau^8 + 2/2835*tau^9",
    ];
    let mut pass = true;
    let mut detail = String::new();
    for (i, want) in expect_equal.iter().enumerate() {
        let k = i as u32 + 2;
        let got = variance::variance_equal(&gvars, k)?
            .substitute_value(gvars.lambda, &Rational::one())
            .canonical_string();
        if got != *want {
            pass = false;
            detail = format!("k = {k}: got {got}");
            break;
        }
    }
    out.push(CheckResult::new(
        "tables: equal-intensity variance, k=2..6 at lambda=1",
        pass,
        detail,
    ));
    Ok(out)
}

/// Cross-path symbolic equalities and the explicit low-order steps.
pub fn suite_oracles() -> Result<Vec<CheckResult>> {
    let mut out = suite_cross_paths()?;
    out.extend(suite_explicit_steps()?);
    Ok(out)
}

/// The four dual-route symbolic equalities.
pub fn suite_cross_paths() -> Result<Vec<CheckResult>> {
    let mut out = Vec::new();
    let ce = CumulantEngine::new(5, 6);
    let me = ce.moments();
    let vars = ce.vars().clone();

    let mut pass = true;
    let mut detail = String::new();
    for k in 1..=4u32 {
        for n in 1..=4u32 {
            let direct = ce.cumulant(k, &vec![1; n as usize])?;
            let inverted = ce.cumulant_from_moments(k, n)?;
            if direct != inverted {
                pass = false;
                detail = format!("k={k} n={n}");
            }
        }
    }
    out.push(CheckResult::new(
        "cross-path: cumulant recursion equals moment inversion, k<=4 n<=4",
        pass,
        detail,
    ));

    let mut pass = true;
    let mut detail = String::new();
    for k in 2..=5u32 {
        let from_cumulant = ce.cumulant_equal(k, 2)?;
        let direct = variance::variance_equal(&vars, k)?;
        // align intensities: set every per-cell lambda to the shared one
        let mut specialized = from_cumulant;
        for i in 0..(k - 1) as usize {
            specialized =
                specialized.substitute(vars.lambdas[i], &MultiPoly::var(&vars.reg, vars.lambda));
        }
        if specialized != direct {
            pass = false;
            detail = format!("k={k}");
        }
    }
    out.push(CheckResult::new(
        "cross-path: second cumulant equals closed-form variance, k<=5",
        pass,
        detail,
    ));

    let gvars = EngineVars::new(7, 2);
    let mut pass = true;
    let mut detail = String::new();
    for k in 2..=6u32 {
        let general = variance::variance_general(&gvars, k)?;
        let mut specialized = general;
        for i in 0..(k - 1) as usize {
            specialized =
                specialized.substitute(gvars.lambdas[i], &MultiPoly::var(&gvars.reg, gvars.lambda));
        }
        if specialized != variance::variance_equal(&gvars, k)? {
            pass = false;
            detail = format!("k={k}");
        }
    }
    out.push(CheckResult::new(
        "cross-path: general variance specializes to equal-intensity form, k<=6",
        pass,
        detail,
    ));

    let mut pass = true;
    let mut detail = String::new();
    for (k, n) in [
        (2u32, 1u32),
        (2, 2),
        (2, 3),
        (3, 1),
        (3, 2),
        (3, 3),
        (4, 1),
        (4, 2),
    ] {
        let oracle = oracles::moment_via_partitions(&vars, k, n)?;
        let engine = me.moment(k, &vec![1; n as usize])?;
        if oracle != engine.poly {
            pass = false;
            detail = format!("k={k} n={n}");
        }
    }
    out.push(CheckResult::new(
        "cross-path: moment recursion equals partition-tuple sum on the oracle grid",
        pass,
        detail,
    ));
    Ok(out)
}

/// The written-out low-order recursion steps against the engines.
pub fn suite_explicit_steps() -> Result<Vec<CheckResult>> {
    let mut out = Vec::new();
    let ce = CumulantEngine::new(4, 4);
    let me = ce.moments();

    let mut pass = true;
    let mut detail = String::new();
    for k in 2..=3u32 {
        for n in 1..=3u32 {
            let step = oracles::explicit_moment_step(me, k, n)?;
            let engine = me.moment(k + 1, &vec![1; n as usize])?;
            if step != engine {
                pass = false;
                detail = format!("k={k} n={n}");
            }
        }
    }
    out.push(CheckResult::new(
        "explicit steps: written-out moment recursion, n<=3, k=2,3",
        pass,
        detail,
    ));

    let mut pass = true;
    let mut detail = String::new();
    for n in 2..=3u32 {
        let step = oracles::explicit_cumulant_step(&ce, 2, n)?;
        if step != ce.cumulant(3, &vec![1; n as usize])? {
            pass = false;
            detail = format!("n={n}");
        }
    }
    if oracles::explicit_cumulant_step4_equal(&ce, 2)? != ce.cumulant_equal(3, 4)? {
        pass = false;
        detail = "n=4 equal-offset".into();
    }
    out.push(CheckResult::new(
        "explicit steps: written-out cumulant recursion, n<=4, k=2",
        pass,
        detail,
    ));
    Ok(out)
}

/// Asymptotics, the two bounds, and the skewness rate; all exact.
pub fn suite_bounds() -> Result<Vec<CheckResult>> {
    Ok(vec![
        check_asymptotic_variance_ratio()?,
        check_moment_bound_grid()?,
        check_cumulant_bound_grid()?,
        check_skewness_rate()?,
    ])
}

/// `|variance/asymptotic - 1| <= 2e-3` at `lambda = 10^4`, `k = 3, 4`,
/// by exact rational evaluation.
pub fn check_asymptotic_variance_ratio() -> Result<CheckResult> {
    let one = Rational::one();
    let mut pass = true;
    let mut detail = String::new();
    let lam = q(10_000, 1);
    for k in [3u32, 4] {
        let exact = variance::variance_equal_at(k, &lam, &one)?;
        let asym = variance::variance_asymptotic(k, &lam, &one)?;
        let err = (&exact / &asym - Rational::one()).abs();
        if err > q(2, 1000) {
            pass = false;
        }
        detail = format!(
            "{detail}k={k}: |ratio-1|={:.2e} ",
            err.to_f64().unwrap_or(f64::NAN)
        );
    }
    Ok(CheckResult::new(
        "asymptotic variance ratio within 2e-3 at lambda=10^4, k=3,4",
        pass,
        detail.trim().to_string(),
    ))
}

/// Moment bound over the whole grid, equality at two hops.
pub fn check_moment_bound_grid() -> Result<CheckResult> {
    let ce = CumulantEngine::new(4, 4);
    let me = ce.moments();

    let grid_lambdas = [q(1, 1), q(10, 1)];
    let grid_taus = [q(1, 10), q(1, 2), q(1, 1)];

    let mut pass = true;
    let mut detail = String::new();
    'moment_grid: for k in 2..=4u32 {
        for n in 1..=4u32 {
            for lambda in &grid_lambdas {
                for tau in &grid_taus {
                    let taus = vec![tau.clone(); n as usize];
                    let lams = vec![lambda.clone(); (k - 1) as usize];
                    let value = me.moment_at(k, &taus, &lams)?.value;
                    let bound = moment_bound(k, n, lambda, tau)?;
                    // two hops realize the Poisson bound exactly;
                    // beyond that the inequality is strict
                    let ok = if k == 2 {
                        value == bound
                    } else {
                        value < bound
                    };
                    if !ok {
                        pass = false;
                        detail =
                            format!("k={k} n={n} lambda={lambda} tau={tau}: {value} vs {bound}");
                        break 'moment_grid;
                    }
                }
            }
        }
    }
    Ok(CheckResult::new(
        "moment bound holds on the grid (equality at k=2, strict above)",
        pass,
        detail,
    ))
}

/// Cumulant bound over the whole grid, strictly.
pub fn check_cumulant_bound_grid() -> Result<CheckResult> {
    let ce = CumulantEngine::new(4, 4);
    let grid_lambdas = [q(1, 1), q(10, 1)];
    let grid_taus = [q(1, 10), q(1, 2), q(1, 1)];

    let mut pass = true;
    let mut detail = String::new();
    'cumulant_grid: for k in 2..=4u32 {
        for n in 1..=4u32 {
            for lambda in &grid_lambdas {
                for tau in &grid_taus {
                    let value = ce.cumulant_at_equal(k, n, lambda, tau)?;
                    let bound = cumulant_bound(k, n, lambda, tau)?;
                    if value.abs() >= bound {
                        pass = false;
                        detail =
                            format!("k={k} n={n} lambda={lambda} tau={tau}: {value} vs {bound}");
                        break 'cumulant_grid;
                    }
                }
            }
        }
    }
    Ok(CheckResult::new(
        "cumulant bound holds strictly on the grid",
        pass,
        detail,
    ))
}

/// Exact-engine skewness halves when lambda quadruples (5% tolerance).
pub fn check_skewness_rate() -> Result<CheckResult> {
    let ce = CumulantEngine::new(3, 4);
    let one = Rational::one();
    let s1 = ce.skewness(3, &q(10_000, 1), &one)?;
    let s4 = ce.skewness(3, &q(40_000, 1), &one)?;
    let ratio = s1.value / s4.value;
    Ok(CheckResult::new(
        "skewness at k=3 halves when lambda quadruples (within 5%)",
        (ratio - 2.0).abs() <= 0.1,
        format!("ratio = {ratio:.6}"),
    ))
}

/// Monte Carlo consistency, counter equivalence, rate experiment, and
/// thread determinism.
pub fn suite_mc(threads: Option<usize>) -> Result<Vec<CheckResult>> {
    let mut out = Vec::new();
    out.push(mc_three_hop_consistency(threads)?);
    out.push(mc_counter_equivalence()?);
    out.push(mc_two_hop_chi_square(threads)?);
    let (ks_check, w1_check) = mc_rate_experiment(threads)?;
    out.push(ks_check);
    out.push(w1_check);
    out.push(mc_thread_determinism()?);
    Ok(out)
}

pub fn mc_three_hop_consistency(threads: Option<usize>) -> Result<CheckResult> {
    // k=3, r=1, t=2 (tau=1), lambda=1: mean 1/2, variance 7/6, third
    // cumulant 17/4; each within 4 standard errors.
    let cfg = SimConfig {
        k: 3,
        r: Rational::one(),
        t: q(2, 1),
        intensities: Intensities::Equal(Rational::one()),
        n_samples: 100_000,
        seed: MC_SEED,
        threads,
    };
    let stats = simulator::run_simulation(&cfg)?;
    let n = stats.n() as f64;
    let mean = stats.mean();
    let var = stats.variance();
    let se_mean = (var / n).sqrt();
    let mean_ok = (mean - 0.5).abs() < 4.0 * se_mean;
    let m2 = stats.central_moment_exact(2)?.to_f64().unwrap();
    let m4 = stats.central_moment_exact(4)?.to_f64().unwrap();
    let se_var = ((m4 - m2 * m2) / n).sqrt();
    let var_ok = (var - 7.0 / 6.0).abs() < 4.0 * se_var;
    // third k-statistic, standard error from 100 batch means
    let k3 = stats.k3();
    let batches = 100;
    let per = stats.counts().len() / batches;
    let mut batch_k3 = Vec::with_capacity(batches);
    for b in 0..batches {
        let mut s = simulator::SampleStats::new();
        for &c in &stats.counts()[b * per..(b + 1) * per] {
            s.push(c);
        }
        batch_k3.push(s.k3());
    }
    let bm = batch_k3.iter().sum::<f64>() / batches as f64;
    let bv = batch_k3.iter().map(|x| (x - bm) * (x - bm)).sum::<f64>() / (batches - 1) as f64;
    let se_k3 = (bv / batches as f64).sqrt();
    let k3_ok = (k3 - 4.25).abs() < 4.0 * se_k3;
    Ok(CheckResult::new(
        "monte carlo: three-hop mean, variance, third k-statistic within 4 SE",
        mean_ok && var_ok && k3_ok && stats.is_consistent(),
        format!("mean={mean:.4} var={var:.4} k3={k3:.3} (se {se_mean:.4}/{se_var:.4}/{se_k3:.3})"),
    ))
}

pub fn mc_counter_equivalence() -> Result<CheckResult> {
    // 1000 random configurations, k <= 5, lambda <= 3, random tau
    let mut pass = true;
    let mut detail = String::new();
    let mut nonzero = 0u32;
    for case in 0..1000u64 {
        let mut rng = simulator::stream(MC_SEED ^ 0xc0de, case);
        let k = 2 + (rng.next_u64() % 4) as u32;
        let tau_num = 1 + (rng.next_u64() % 99) as i64;
        let lambda = 1 + (rng.next_u64() % 3) as i64;
        let cfg = SimConfig {
            k,
            r: Rational::one(),
            t: Rational::from_integer(k.into()) - q(tau_num, 100),
            intensities: Intensities::Equal(q(lambda, 1)),
            n_samples: 0,
            seed: 0,
            threads: Some(1),
        };
        let sample = sample_points(&cfg, &mut rng)?;
        let brute = count_khops_bruteforce(&sample, k, 1.0, cfg.t.to_f64().unwrap())?;
        let lens = count_khops_lens(&sample, k, 1.0, cfg.tau().to_f64().unwrap());
        if brute != lens {
            pass = false;
            detail = format!("case {case}: k={k} brute={brute} lens={lens}");
            break;
        }
        if brute > 0 {
            nonzero += 1;
        }
    }
    if pass {
        detail = format!("1000 configurations, {nonzero} with nonzero counts");
    }
    Ok(CheckResult::new(
        "monte carlo: lens chain count equals tuple predicate",
        pass,
        detail,
    ))
}

pub fn mc_two_hop_chi_square(threads: Option<usize>) -> Result<CheckResult> {
    // k=2 counts are Poisson(lambda tau); lambda=2, tau=1 gives mean 2.
    let cfg = SimConfig {
        k: 2,
        r: Rational::one(),
        t: Rational::one(),
        intensities: Intensities::Equal(q(2, 1)),
        n_samples: 100_000,
        seed: MC_SEED ^ 0x9035,
        threads,
    };
    let stats = simulator::run_simulation(&cfg)?;
    let n = stats.n();
    let mean = 2.0f64;
    // observed frequencies
    let max = *stats.counts().iter().max().unwrap() as usize;
    let mut observed = vec![0u64; max + 1];
    for &c in stats.counts() {
        observed[c as usize] += 1;
    }
    // expected, merging the tail so every bin expects at least 5
    let mut expected: Vec<f64> = Vec::new();
    let mut merged_obs: Vec<f64> = Vec::new();
    let mut pmf = (-mean).exp();
    let mut tail = 1.0;
    let mut acc_e = 0.0;
    let mut acc_o = 0.0;
    for (c, &obs) in observed.iter().enumerate() {
        if c > 0 {
            pmf *= mean / c as f64;
        }
        tail -= pmf;
        acc_e += pmf * n as f64;
        acc_o += obs as f64;
        if acc_e >= 5.0 {
            expected.push(acc_e);
            merged_obs.push(acc_o);
            acc_e = 0.0;
            acc_o = 0.0;
        }
    }
    // everything beyond max
    acc_e += tail.max(0.0) * n as f64;
    if acc_e > 0.0 {
        expected.push(acc_e);
        merged_obs.push(acc_o);
    }
    let chi2: f64 = expected
        .iter()
        .zip(&merged_obs)
        .map(|(e, o)| (o - e) * (o - e) / e)
        .sum();
    let dof = (expected.len() - 1) as f64;
    let p = 1.0 - ChiSquared::new(dof).unwrap().cdf(chi2);
    Ok(CheckResult::new(
        "monte carlo: two-hop counts pass chi-square against Poisson(2)",
        p >= 1e-3,
        format!("chi2 = {chi2:.2}, dof = {dof}, p = {p:.4}"),
    ))
}

/// The convergence-rate experiment behind the `clt` subcommand: run the
/// simulation per lambda, normalize with engine-exact constants, and
/// measure both distances.
pub fn rate_experiment(
    k: u32,
    r: &Rational,
    t: &Rational,
    lambdas: &[Rational],
    n_samples: u64,
    seed: u64,
    threads: Option<usize>,
) -> Result<RateSeries> {
    let mut series = RateSeries::default();
    for (i, lambda) in lambdas.iter().enumerate() {
        let cfg = SimConfig {
            k,
            r: r.clone(),
            t: t.clone(),
            intensities: Intensities::Equal(lambda.clone()),
            n_samples,
            seed: simulator::mix(seed, i as u64),
            threads,
        };
        let stats = simulator::run_simulation(&cfg)?;
        let sample = cltstats::normalize(stats.counts(), k, lambda, r, t, cfg.seed)?;
        series.points.push(RatePoint {
            lambda: lambda.to_f64().ok_or(Error::ZeroVariance)?,
            n_samples,
            ks: cltstats::ks_distance(&sample)?,
            w1: cltstats::wasserstein1(&sample)?,
        });
    }
    Ok(series)
}

pub fn mc_rate_experiment(threads: Option<usize>) -> Result<(CheckResult, CheckResult)> {
    let lambdas: Vec<Rational> = [25, 50, 100, 200, 400].iter().map(|&l| q(l, 1)).collect();
    let series = rate_experiment(
        3,
        &Rational::one(),
        &q(5, 2),
        &lambdas,
        100_000,
        RATE_SEED,
        threads,
    )?;
    let ks_first = series.points.first().unwrap().ks;
    let ks_last = series.points.last().unwrap().ks;
    let w1_first = series.points.first().unwrap().w1;
    let w1_last = series.points.last().unwrap().w1;
    let slope_ks = series.slope_ks()?;
    let slope_w1 = series.slope_w1()?;
    // each doubling of lambda should shrink the distance by ~1/sqrt(2);
    // allow that step to miss by a factor of two (noise tolerance)
    let monotone = |get: fn(&crate::cltstats::RatePoint) -> f64| {
        series
            .points
            .windows(2)
            .all(|w| get(&w[1]) < get(&w[0]) * (2.0 / std::f64::consts::SQRT_2))
    };
    let ks_ok =
        (-0.65..=-0.35).contains(&slope_ks) && ks_last < ks_first && monotone(|p| p.ks);
    let w1_ok =
        (-0.65..=-0.35).contains(&slope_w1) && w1_last < w1_first && monotone(|p| p.w1);
    Ok((
        CheckResult::new(
            "monte carlo: Kolmogorov distance rate slope in [-0.65, -0.35], decreasing",
            ks_ok,
            format!(
                "slope = {slope_ks:.3}, d({}) = {ks_first:.4} -> d({}) = {ks_last:.4}",
                series.points.first().unwrap().lambda,
                series.points.last().unwrap().lambda
            ),
        ),
        CheckResult::new(
            "monte carlo: Wasserstein distance rate slope in [-0.65, -0.35], decreasing",
            w1_ok,
            format!("slope = {slope_w1:.3}, d = {w1_first:.4} -> {w1_last:.4}"),
        ),
    ))
}

pub fn mc_thread_determinism() -> Result<CheckResult> {
    let base = SimConfig {
        k: 3,
        r: Rational::one(),
        t: q(2, 1),
        intensities: Intensities::Equal(q(3, 1)),
        n_samples: 20_000,
        seed: MC_SEED ^ 0x7451,
        threads: Some(1),
    };
    let mut dumps: Vec<Vec<u8>> = Vec::new();
    for threads in [1usize, 2, 8] {
        let cfg = SimConfig {
            threads: Some(threads),
            ..base.clone()
        };
        let stats = simulator::run_simulation(&cfg)?;
        let mut buf = Vec::new();
        simulator::dump_samples(&cfg, &stats, &mut buf)?;
        dumps.push(buf);
    }
    let pass = dumps.windows(2).all(|w| w[0] == w[1]);
    Ok(CheckResult::new(
        "monte carlo: byte-identical outputs across 1, 2, 8 threads",
        pass,
        format!("{} bytes per dump", dumps[0].len()),
    ))
}

/// Dispatch by suite name: `tables`, `oracles`, `bounds`, `mc`, `all`.
pub fn run_suite(name: &str, threads: Option<usize>) -> Result<Vec<CheckResult>> {
    match name {
        "tables" => suite_tables(),
        "oracles" => suite_oracles(),
        "bounds" => suite_bounds(),
        "mc" => suite_mc(threads),
        "all" => {
            let mut all = suite_tables()?;
            all.extend(suite_oracles()?);
            all.extend(suite_bounds()?);
            all.extend(suite_mc(threads)?);
            Ok(all)
        }
        other => Err(Error::InvalidConfig(format!(
            "unknown suite `{other}`; expected tables|oracles|bounds|mc|all"
        ))),
    }
}
