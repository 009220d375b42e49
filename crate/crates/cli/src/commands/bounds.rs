//! `opencat bounds`: the closed-form calculators.

use opencat_core::bounds::{
    achieved_epsilon, massart_bound, required_sample_size, MassartQuery, PacParams,
};

/// At least one of `--epsilon`, `--n`, or `--lambda` selects a calculator;
/// they can be combined freely.
#[derive(Debug, clap::Args)]
#[command(group = clap::ArgGroup::new("query")
    .args(["epsilon", "n", "lambda"])
    .required(true)
    .multiple(true))]
pub struct Args {
    /// Alien fraction of the contaminated sample.
    #[arg(long)]
    alpha: f64,
    /// Inflated fraction used for fitting, at least alpha.
    #[arg(long)]
    alpha_prime: Option<f64>,
    /// Alien quantile level the threshold targets.
    #[arg(long, default_value_t = 0.05)]
    q: f64,
    /// Tolerance: compute the required sample size for it.
    #[arg(long)]
    epsilon: Option<f64>,
    /// Failure probability of the guarantee.
    #[arg(long, default_value_t = 0.05)]
    delta: f64,
    /// Sample size: compute the tolerance it guarantees.
    #[arg(long)]
    n: Option<u64>,
    /// Deviation level: evaluate the scaled empirical-process tail bound.
    #[arg(long)]
    lambda: Option<f64>,
    /// Emit one CSV row instead of prose.
    #[arg(long)]
    csv: bool,
}

pub fn run(args: Args) -> anyhow::Result<()> {
    let mut required = None;
    let mut achieved = None;
    let mut tail = None;

    if let Some(epsilon) = args.epsilon {
        let params = PacParams::new(args.alpha, args.alpha_prime, args.q, epsilon, args.delta)?;
        required = Some(required_sample_size(&params)?);
    }
    if let Some(n) = args.n {
        achieved = Some(achieved_epsilon(
            n as f64,
            args.delta,
            args.alpha_prime.unwrap_or(args.alpha),
        )?);
    }
    if let Some(lambda) = args.lambda {
        tail = Some(massart_bound(&MassartQuery {
            lambda,
            n: args.n.unwrap_or(1),
        })?);
    }

    let fmt_opt_u = |v: Option<u64>| v.map_or("NA".to_string(), |x| x.to_string());
    let fmt_opt_f = |v: Option<f64>| v.map_or("NA".to_string(), |x| format!("{x}"));
    if args.csv {
        println!(
            "alpha,alpha_prime,q,epsilon,delta,required_n,n,achieved_epsilon,lambda,tail_raw,tail_clamped"
        );
        println!(
            "{},{},{},{},{},{},{},{},{},{},{}",
            args.alpha,
            fmt_opt_f(args.alpha_prime),
            args.q,
            fmt_opt_f(args.epsilon),
            args.delta,
            fmt_opt_u(required),
            fmt_opt_u(args.n),
            fmt_opt_f(achieved),
            fmt_opt_f(args.lambda),
            fmt_opt_f(tail.map(|t| t.raw)),
            fmt_opt_f(tail.map(|t| t.clamped)),
        );
        return Ok(());
    }

    if let (Some(n), Some(epsilon)) = (required, args.epsilon) {
        println!(
            "required sample size: {n} (alpha {}, q {}, epsilon {epsilon}, delta {})",
            args.alpha_prime.unwrap_or(args.alpha),
            args.q,
            args.delta
        );
    }
    if let (Some(eps), Some(n)) = (achieved, args.n) {
        println!(
            "achieved tolerance at n = {n}: epsilon = {eps} (miss rate cap q + epsilon = {})",
            args.q + eps
        );
    }
    if let (Some(bound), Some(lambda)) = (tail, args.lambda) {
        println!(
            "tail bound at lambda = {lambda}: raw {} (as probability: {})",
            bound.raw, bound.clamped
        );
    }
    Ok(())
}
