//! Command-line front end.
//!
//! Exit status is 0 on success, 2 when a certificate fails, and a
//! nonzero diagnostic code otherwise (see [`CliError::exit_code`]).

use std::f64::consts::PI;
use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::PathBuf;

use clap::{Parser, ValueEnum};
use serde::Serialize;
use thiserror::Error;

use crate::coefficients::{
    abs_sum_recomputed, auxiliary_h, cosine_coefficient, cosine_coefficient_oracle,
    square_sum_recomputed, tail_abs_sum_bound, PRINTED_ABS_SUM, PRINTED_SQUARE_SUM,
};
use crate::error::CertError;
use crate::frames::{frame_bounds, periodized_l2_norm_squared, DEFAULT_OMEGA_GRID};
use crate::kernels::TranslateNetwork;
use crate::norms::l2_norm_squared_closed_form;
use crate::quadrature;
use crate::witness::{certify_with, sharpness_sweep, CertifyOptions, SweepRow, WitnessCertificate};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    Certify,
    Sweep,
    Coeffs,
    Oscillation,
    Frame,
    Selfcheck,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Json,
    Csv,
    Text,
}

/// Raw flags as parsed by clap.
#[derive(Debug, Parser)]
#[command(
    name = "turan-cert",
    version,
    about = "Certified inverse Markov-Bernstein bounds for Gaussian translate sums"
)]
pub struct Args {
    #[arg(value_enum)]
    pub command: Command,
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long = "lambda-min")]
    pub lambda_min: Option<f64>,
    #[arg(long = "lambda-max")]
    pub lambda_max: Option<f64>,
    #[arg(long)]
    pub steps: Option<usize>,
    /// Truncation order (certify, oscillation) or table size (coeffs).
    #[arg(long = "n")]
    pub n: Option<usize>,
    /// Relative certification gap.
    #[arg(long, default_value_t = 1e-6)]
    pub gap: f64,
    #[arg(long, value_enum)]
    pub format: Option<OutputFormat>,
    #[arg(long = "out")]
    pub out: Option<PathBuf>,
    #[arg(long = "with-oscillation")]
    pub with_oscillation: bool,
}

/// A validated invocation.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub lambda: Option<f64>,
    /// `(min, max, steps)`.
    pub lambda_range: Option<(f64, f64, usize)>,
    pub n_override: Option<usize>,
    pub gap: f64,
    pub output_format: OutputFormat,
    pub output_path: Option<PathBuf>,
    pub with_oscillation: bool,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("infeasible: {0}")]
    Infeasible(CertError),
    #[error("runtime: {0}")]
    Runtime(CertError),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
}

impl From<CertError> for CliError {
    fn from(e: CertError) -> Self {
        match e {
            CertError::SearchExhausted { .. } | CertError::Domain { .. } => CliError::Infeasible(e),
            CertError::InvalidParameter(msg) => CliError::Usage(msg),
            other => CliError::Runtime(other),
        }
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Runtime(_) => 1,
            CliError::Infeasible(_) => 3,
            CliError::Io(_) => 4,
        }
    }
}

fn positive(name: &str, value: f64) -> Result<f64, CliError> {
    if value > 0.0 && value.is_finite() {
        Ok(value)
    } else {
        Err(CliError::Usage(format!(
            "--{name} must be positive, got {value}"
        )))
    }
}

fn unexpected(name: &str, command: Command) -> CliError {
    CliError::Usage(format!("--{name} is not used by {command:?}").to_lowercase())
}

impl RunConfig {
    /// Check that exactly the flags the command needs are present.
    pub fn from_args(args: Args) -> Result<Self, CliError> {
        use Command::*;
        let command = args.command;
        let takes_lambda = matches!(command, Certify | Oscillation | Frame);
        let takes_range = command == Sweep;
        let takes_n = matches!(command, Certify | Oscillation | Coeffs);

        let lambda = match (args.lambda, takes_lambda) {
            (Some(l), true) => Some(positive("lambda", l)?),
            (None, true) => {
                return Err(CliError::Usage(
                    format!("{command:?} needs --lambda").to_lowercase(),
                ))
            }
            (Some(_), false) => return Err(unexpected("lambda", command)),
            (None, false) => None,
        };
        let range_flags = (args.lambda_min, args.lambda_max, args.steps);
        let lambda_range = match (range_flags, takes_range) {
            ((Some(lo), Some(hi), Some(steps)), true) => {
                let lo = positive("lambda-min", lo)?;
                let hi = positive("lambda-max", hi)?;
                if hi < lo {
                    return Err(CliError::Usage("--lambda-max is below --lambda-min".into()));
                }
                if steps == 0 {
                    return Err(CliError::Usage("--steps must be at least 1".into()));
                }
                Some((lo, hi, steps))
            }
            (_, true) => {
                return Err(CliError::Usage(
                    "sweep needs --lambda-min, --lambda-max and --steps".into(),
                ))
            }
            ((None, None, None), false) => None,
            _ => return Err(unexpected("lambda-min/--lambda-max/--steps", command)),
        };
        let n_override = match (args.n, takes_n) {
            (Some(0), true) if command != Coeffs => {
                return Err(CliError::Usage("--n must be at least 1".into()))
            }
            (n, true) => n,
            (Some(_), false) => return Err(unexpected("n", command)),
            (None, false) => None,
        };
        if args.with_oscillation && command != Certify {
            return Err(unexpected("with-oscillation", command));
        }
        if !(args.gap > 0.0 && args.gap < 1.0) {
            return Err(CliError::Usage(format!(
                "--gap must lie in (0, 1), got {}",
                args.gap
            )));
        }
        let output_format = args.format.unwrap_or(match command {
            Certify | Oscillation | Frame => OutputFormat::Json,
            Sweep | Coeffs => OutputFormat::Csv,
            Selfcheck => OutputFormat::Text,
        });
        Ok(RunConfig {
            command,
            lambda,
            lambda_range,
            n_override,
            gap: args.gap,
            output_format,
            output_path: args.out,
            with_oscillation: args.with_oscillation,
        })
    }
}

/// What a command produced.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub body: String,
    /// False only for a failed certificate.
    pub passed: bool,
}

impl RunOutput {
    pub fn exit_code(&self) -> i32 {
        if self.passed {
            0
        } else {
            2
        }
    }
}

/// Fixed-width, locale-independent rendering with 17 significant digits.
pub fn format_number(x: f64) -> String {
    format!("{x:.16e}")
}

fn csv_table(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> String {
    let mut out = header.join(",");
    out.push('\n');
    for row in rows {
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

fn json<T: Serialize>(value: &T) -> Result<String, CliError> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| {
        CliError::Runtime(CertError::CrossCheck(format!("serialization failed: {e}")))
    })?;
    s.push('\n');
    Ok(s)
}

fn optional(x: Option<f64>) -> String {
    x.map(format_number).unwrap_or_default()
}

fn sweep_csv(rows: &[SweepRow]) -> String {
    csv_table(
        &[
            "lambda",
            "n",
            "ratio_lower",
            "threshold",
            "product",
            "passed",
        ],
        rows.iter().map(|r| {
            vec![
                format_number(r.lambda),
                r.n.map(|n| n.to_string()).unwrap_or_default(),
                optional(r.ratio_lower),
                format_number(r.threshold),
                optional(r.product),
                r.passed.to_string(),
            ]
        }),
    )
}

fn certificate_text(cert: &WitnessCertificate) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "lambda        {}", cert.lambda);
    let _ = writeln!(s, "n             {}", cert.n);
    match cert.n0_paper {
        Some(n0) => {
            let _ = writeln!(s, "N0 (printed)  {n0:.6e}");
        }
        None => {
            let _ = writeln!(s, "N0 (printed)  undefined for lambda >= 1");
        }
    }
    let _ = writeln!(
        s,
        "|P|  in       [{:.12e}, {:.12e}]",
        cert.sup_norm.lower, cert.sup_norm.upper
    );
    let _ = writeln!(
        s,
        "|P'| in       [{:.12e}, {:.12e}]",
        cert.deriv_norm.lower, cert.deriv_norm.upper
    );
    let _ = writeln!(s, "ratio lower   {:.12e}", cert.ratio_lower);
    let _ = writeln!(s, "threshold     {:.12e}", cert.threshold);
    let _ = writeln!(
        s,
        "tail bound    {:.6e} (20x {:.6e} vs |P_inf| >= {:.6e})",
        cert.tail_bound,
        20.0 * cert.tail_bound,
        cert.p_infty_lower
    );
    if let Some(osc) = &cert.oscillation {
        let _ = writeln!(
            s,
            "oscillation   r = {:.6e}, masses +{:.9e} / -{:.9e}, needed {:.9e}, {}",
            osc.r,
            osc.plus_mass,
            osc.minus_mass,
            osc.threshold,
            if osc.passed { "ok" } else { "FAILED" }
        );
    }
    let _ = writeln!(
        s,
        "result        {}",
        if cert.passed { "PASSED" } else { "FAILED" }
    );
    s
}

/// One line of the constant audit.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AuditRow {
    pub quantity: String,
    pub printed: f64,
    pub recomputed: f64,
    pub agree: bool,
}

fn audit_row(quantity: &str, printed: f64, recomputed: f64, tol: f64) -> AuditRow {
    AuditRow {
        quantity: quantity.to_string(),
        printed,
        recomputed,
        agree: (printed - recomputed).abs() <= tol,
    }
}

/// Printed constants against recomputed ones, plus the internal oracles.
///
/// Rows whose `printed` column is itself a computed reference (Parseval,
/// Plancherel) compare two independent routes.
pub fn selfcheck() -> Result<Vec<AuditRow>, CertError> {
    let mut rows = vec![
        audit_row("a_0", 0.75, cosine_coefficient_oracle(0, 1e-13)?, 1e-9),
        audit_row(
            "a_1",
            4.0 / (3.0 * PI),
            cosine_coefficient_oracle(1, 1e-13)?,
            1e-9,
        ),
        audit_row("a_2", -0.25, cosine_coefficient_oracle(2, 1e-13)?, 1e-9),
    ];
    let worst = (0..=200)
        .map(|k| cosine_coefficient_oracle(k, 1e-13).map(|q| (q - cosine_coefficient(k)).abs()))
        .collect::<Result<Vec<_>, _>>()?
        .into_iter()
        .fold(0.0, f64::max);
    rows.push(audit_row(
        "max |a_k closed form - quadrature|, k <= 200",
        0.0,
        worst,
        1e-8,
    ));
    rows.push(audit_row(
        "sum_{k>=1} |a_k|",
        PRINTED_ABS_SUM,
        abs_sum_recomputed(),
        1e-9,
    ));
    rows.push(audit_row(
        "sum_{k>=1} a_k^2",
        PRINTED_SQUARE_SUM,
        square_sum_recomputed(),
        1e-9,
    ));

    let a0 = cosine_coefficient(0);
    let energy = quadrature::integrate_panels(
        |x| auxiliary_h(x).powi(2),
        &[-PI, -0.5 * PI, 0.0, 0.5 * PI, PI],
        1e-14,
        quadrature::DEFAULT_MAX_INTERVALS,
    )?;
    rows.push(audit_row(
        "(1/pi) int H^2",
        11.0 / 8.0,
        energy.value / PI,
        1e-9,
    ));
    rows.push(audit_row(
        "2 a_0^2 + sum a_k^2 (Parseval)",
        energy.value / PI,
        2.0 * a0 * a0 + square_sum_recomputed(),
        1e-9,
    ));
    rows.push(audit_row(
        "2 a_0^2 + printed sum a_k^2",
        energy.value / PI,
        2.0 * a0 * a0 + PRINTED_SQUARE_SUM,
        1e-9,
    ));
    rows.push(audit_row(
        "N0 constant C_0",
        1280.0 / (3.0 * PI),
        1920.0 / PI,
        1e-9,
    ));

    let net =
        TranslateNetwork::from_pairs(0.7, &[(-4, 0.3), (-1, -1.2), (0, 0.5), (3, 0.8), (6, -0.4)])?;
    let closed = l2_norm_squared_closed_form(&net);
    let periodized = periodized_l2_norm_squared(&net, 1e-12)?;
    rows.push(audit_row(
        "Plancherel ||f||_2^2 (closed form vs periodized)",
        closed,
        periodized.value,
        1e-6 * closed,
    ));
    let tail_ok = (1..=1000).all(|n| tail_abs_sum_bound(n) < 1.0 / n as f64);
    rows.push(audit_row(
        "sum_{k>n} |a_k| < 1/n for n <= 1000",
        1.0,
        if tail_ok { 1.0 } else { 0.0 },
        0.0,
    ));
    Ok(rows)
}

fn selfcheck_output(rows: &[AuditRow], format: OutputFormat) -> Result<String, CliError> {
    Ok(match format {
        OutputFormat::Json => json(&rows)?,
        OutputFormat::Csv => csv_table(
            &["quantity", "printed", "recomputed", "agree"],
            rows.iter().map(|r| {
                vec![
                    format!("\"{}\"", r.quantity),
                    format_number(r.printed),
                    format_number(r.recomputed),
                    r.agree.to_string(),
                ]
            }),
        ),
        OutputFormat::Text => {
            let mut s = String::new();
            let _ = writeln!(
                s,
                "{:<52} {:>22} {:>22}  flag",
                "quantity", "printed/reference", "recomputed"
            );
            for r in rows {
                let _ = writeln!(
                    s,
                    "{:<52} {:>22.15e} {:>22.15e}  {}",
                    r.quantity,
                    r.printed,
                    r.recomputed,
                    if r.agree { "agree" } else { "disagree" }
                );
            }
            s
        }
    })
}

fn sweep_lambdas(lo: f64, hi: f64, steps: usize) -> Vec<f64> {
    if steps == 1 {
        return vec![lo];
    }
    (0..steps)
        .map(|i| lo + (hi - lo) * i as f64 / (steps - 1) as f64)
        .collect()
}

fn missing(what: &str) -> CliError {
    CliError::Usage(format!("missing {what}"))
}

/// Execute a validated configuration and return the rendered artifact.
pub fn run(config: &RunConfig) -> Result<RunOutput, CliError> {
    let format = config.output_format;
    let output = match config.command {
        Command::Certify | Command::Oscillation => {
            let lambda = config.lambda.ok_or_else(|| missing("--lambda"))?;
            let oscillation_only = config.command == Command::Oscillation;
            let cert = certify_with(
                lambda,
                &CertifyOptions {
                    gap: config.gap,
                    with_oscillation: config.with_oscillation || oscillation_only,
                    n_override: config.n_override,
                },
            )?;
            if oscillation_only {
                let report = cert.oscillation.ok_or_else(|| {
                    CliError::Runtime(CertError::CrossCheck("no oscillation report".into()))
                })?;
                let body = match format {
                    OutputFormat::Json => json(&report)?,
                    OutputFormat::Csv => csv_table(
                        &[
                            "lambda",
                            "n",
                            "r",
                            "plus_mass",
                            "minus_mass",
                            "quad_error",
                            "threshold",
                            "passed",
                        ],
                        [vec![
                            format_number(lambda),
                            cert.n.to_string(),
                            format_number(report.r),
                            format_number(report.plus_mass),
                            format_number(report.minus_mass),
                            format_number(report.quad_error),
                            format_number(report.threshold),
                            report.passed.to_string(),
                        ]],
                    ),
                    OutputFormat::Text => certificate_text(&cert),
                };
                RunOutput {
                    body,
                    passed: report.passed,
                }
            } else {
                let passed = cert.passed && cert.oscillation.is_none_or(|o| o.passed);
                let body = match format {
                    OutputFormat::Json => json(&cert)?,
                    OutputFormat::Csv => sweep_csv(&[SweepRow {
                        lambda,
                        n: Some(cert.n),
                        ratio_lower: Some(cert.ratio_lower),
                        threshold: cert.threshold,
                        product: Some(cert.ratio_lower * lambda),
                        passed: cert.passed,
                        error: None,
                    }]),
                    OutputFormat::Text => certificate_text(&cert),
                };
                RunOutput { body, passed }
            }
        }
        Command::Sweep => {
            let (lo, hi, steps) = config.lambda_range.ok_or_else(|| missing("lambda range"))?;
            let rows = sharpness_sweep(&sweep_lambdas(lo, hi, steps), config.gap);
            let passed = rows.iter().all(|r| r.passed);
            let body = match format {
                OutputFormat::Json => json(&rows)?,
                OutputFormat::Csv => sweep_csv(&rows),
                OutputFormat::Text => {
                    let mut s = String::new();
                    for r in &rows {
                        match (&r.error, r.n, r.ratio_lower, r.product) {
                            (None, Some(n), Some(ratio), Some(product)) => {
                                let _ = writeln!(
                                    s,
                                    "lambda {:<8} n {:<6} ratio {:.9e} threshold {:.9e} ratio*lambda {:.9e} {}",
                                    r.lambda,
                                    n,
                                    ratio,
                                    r.threshold,
                                    product,
                                    if r.passed { "PASSED" } else { "FAILED" }
                                );
                            }
                            (err, ..) => {
                                let _ = writeln!(
                                    s,
                                    "lambda {:<8} error: {}",
                                    r.lambda,
                                    err.as_deref().unwrap_or("unknown")
                                );
                            }
                        }
                    }
                    s
                }
            };
            RunOutput { body, passed }
        }
        Command::Coeffs => {
            let n = config.n_override.unwrap_or(10);
            let rows: Vec<(usize, f64)> = (0..=n).map(|k| (k, cosine_coefficient(k))).collect();
            let body = match format {
                OutputFormat::Json => {
                    #[derive(Serialize)]
                    struct Row {
                        k: usize,
                        a_k: f64,
                    }
                    json(
                        &rows
                            .iter()
                            .map(|&(k, a_k)| Row { k, a_k })
                            .collect::<Vec<_>>(),
                    )?
                }
                OutputFormat::Csv => csv_table(
                    &["k", "a_k"],
                    rows.iter()
                        .map(|&(k, a)| vec![k.to_string(), format_number(a)]),
                ),
                OutputFormat::Text => rows.iter().fold(String::new(), |mut s, &(k, a)| {
                    let _ = writeln!(s, "{k:>8} {a:>24.16e}");
                    s
                }),
            };
            RunOutput { body, passed: true }
        }
        Command::Frame => {
            let lambda = config.lambda.ok_or_else(|| missing("--lambda"))?;
            let b = frame_bounds(lambda, DEFAULT_OMEGA_GRID)?;
            let body = match format {
                OutputFormat::Json => json(&b)?,
                OutputFormat::Csv => csv_table(
                    &[
                        "lambda",
                        "mu",
                        "mu_estimate",
                        "big_m",
                        "big_m_estimate",
                        "explicit_mu_bound",
                    ],
                    [vec![
                        format_number(b.lambda),
                        format_number(b.mu),
                        format_number(b.mu_estimate),
                        format_number(b.big_m),
                        format_number(b.big_m_estimate),
                        format_number(b.explicit_mu_bound),
                    ]],
                ),
                OutputFormat::Text => format!(
                    "lambda {}\nmu >= {:.12e}\nM  <= {:.12e}\nexplicit mu bound {:.12e}\n",
                    b.lambda, b.mu, b.big_m, b.explicit_mu_bound
                ),
            };
            RunOutput { body, passed: true }
        }
        Command::Selfcheck => {
            let rows = selfcheck()?;
            RunOutput {
                body: selfcheck_output(&rows, format)?,
                passed: true,
            }
        }
    };
    match &config.output_path {
        Some(path) => std::fs::write(path, &output.body)?,
        None => print!("{}", output.body),
    }
    Ok(output)
}

/// Parse, run and map the outcome to an exit status.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let parsed = match Args::try_parse_from(args) {
        Ok(a) => a,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match RunConfig::from_args(parsed).and_then(|c| run(&c)) {
        Ok(out) => out.exit_code(),
        Err(e) => {
            eprintln!("turan-cert: {e}");
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config(args: &[&str]) -> Result<RunConfig, CliError> {
        let mut full = vec!["turan-cert"];
        full.extend_from_slice(args);
        RunConfig::from_args(
            Args::try_parse_from(full).map_err(|e| CliError::Usage(e.to_string()))?,
        )
    }

    #[test]
    fn validation() {
        let c = config(&["certify", "--lambda", "0.8"]).unwrap();
        assert_eq!(c.output_format, OutputFormat::Json);
        assert_eq!(c.gap, 1e-6);
        assert!(config(&["certify"]).is_err());
        assert!(config(&["certify", "--lambda", "-1"]).is_err());
        assert!(config(&["coeffs", "--lambda", "0.5"]).is_err());
        assert!(config(&["sweep", "--lambda-min", "0.5", "--lambda-max", "1.0"]).is_err());
        assert!(config(&["frame", "--lambda", "0.5", "--with-oscillation"]).is_err());
        assert!(config(&["certify", "--lambda", "0.5", "--gap", "0"]).is_err());
        let s = config(&[
            "sweep",
            "--lambda-min",
            "0.5",
            "--lambda-max",
            "1.0",
            "--steps",
            "3",
        ])
        .unwrap();
        assert_eq!(s.lambda_range, Some((0.5, 1.0, 3)));
        assert_eq!(s.output_format, OutputFormat::Csv);
    }

    #[test]
    fn numbers_are_plain() {
        assert_eq!(format_number(-0.25), "-2.5000000000000000e-1");
        assert_eq!(format_number(-0.25).parse::<f64>().unwrap(), -0.25);
        let x = 0.1 + 0.2;
        assert_eq!(format_number(x).parse::<f64>().unwrap(), x);
    }

    #[test]
    fn sweep_grid() {
        assert_eq!(sweep_lambdas(0.5, 1.0, 3), vec![0.5, 0.75, 1.0]);
        assert_eq!(sweep_lambdas(0.7, 0.9, 1), vec![0.7]);
    }

    #[test]
    fn error_codes() {
        assert_eq!(
            CliError::from(CertError::SearchExhausted {
                lambda: 0.1,
                n_max: 1
            })
            .exit_code(),
            3
        );
        assert_eq!(
            CliError::from(CertError::InvalidParameter("x".into())).exit_code(),
            1
        );
        assert_eq!(CliError::Io(std::io::Error::other("disk")).exit_code(), 4);
        assert_ne!(
            RunOutput {
                body: String::new(),
                passed: false
            }
            .exit_code(),
            1
        );
    }

    #[test]
    fn audit_flags() {
        let rows = selfcheck().unwrap();
        let find = |q: &str| rows.iter().find(|r| r.quantity.starts_with(q)).unwrap();
        assert!(find("a_0").agree && find("a_1").agree && find("a_2").agree);
        let abs = find("sum_{k>=1} |a_k|");
        assert!(!abs.agree && (abs.recomputed - 0.7805).abs() < 1e-4);
        let sq = find("sum_{k>=1} a_k^2");
        assert!(!sq.agree && (sq.recomputed - 0.25).abs() < 1e-9);
        assert!(find("2 a_0^2 + sum a_k^2").agree);
        assert!(!find("2 a_0^2 + printed").agree);
        assert!(find("Plancherel").agree);
        assert!(find("(1/pi) int H^2").agree);
    }
}
