mod output;

use std::io::Write;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use optquad_core::convergence_lab::{
    default_doubling_grid, fit_all, run_sweep_with, synthetic_power_law, ConvergenceRow,
};
use optquad_core::error_norm::{
    em_norm_sq, norm_sq_bruteforce_with, norm_sq_closed, norm_sq_series, w21_seminorm,
};
use optquad_core::rules::{
    apply_rule, builtin, builtin_integrands, Grid, RuleKind, WeightKind, BUILTIN_NAMES,
};
use optquad_core::verify::{self, Tamper, VerifyConfig};
use optquad_core::Execution;

use output::{Cell, Envelope, Format, Record, Section, Table};

#[derive(Parser, Debug)]
#[command(
    name = "optquad",
    version,
    about = "Optimal quadrature with endpoint-derivative corrections"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone, Copy)]
struct Common {
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Run on one thread (same output, bit for bit).
    #[arg(long)]
    sequential: bool,
}

impl Common {
    fn exec(&self) -> Execution {
        if self.sequential {
            Execution::Sequential
        } else {
            Execution::default()
        }
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Print the weights c0 and c1 of a rule.
    Coeffs {
        #[arg(long, value_parser = positive)]
        n: usize,
        #[arg(long, default_value = "optimal")]
        rule: RuleKind,
        #[command(flatten)]
        common: Common,
    },
    /// Squared norm of the optimal rule's error functional.
    Norm {
        #[arg(long, value_parser = positive)]
        n: usize,
        #[arg(long, value_enum, default_value_t = NormMethod::All)]
        method: NormMethod,
        #[command(flatten)]
        common: Common,
    },
    /// Apply a rule to a built-in integrand.
    Integrate {
        #[arg(long, value_parser = positive)]
        n: usize,
        #[arg(long, default_value = "optimal")]
        rule: RuleKind,
        #[arg(long, value_parser = clap::builder::PossibleValuesParser::new(BUILTIN_NAMES))]
        function: String,
        #[command(flatten)]
        common: Common,
    },
    /// Error sweep over grids with fitted orders.
    Convergence {
        /// Comma-separated rule names.
        #[arg(long, value_delimiter = ',', default_values_t = RuleKind::ALL)]
        rules: Vec<RuleKind>,
        /// Comma-separated integrand names.
        #[arg(long, value_delimiter = ',', value_parser = clap::builder::PossibleValuesParser::new(BUILTIN_NAMES))]
        functions: Vec<String>,
        /// Strictly increasing, comma-separated grid sizes.
        #[arg(long, value_delimiter = ',', value_parser = positive)]
        n_list: Vec<usize>,
        /// Fit a synthetic h^4 error sequence instead.
        #[arg(long)]
        selftest_power4: bool,
        #[command(flatten)]
        common: Common,
    },
    /// Run the invariant suite; exit 1 if any check fails.
    Verify {
        #[arg(long, default_value_t = 100, value_parser = positive)]
        n_max: usize,
        #[arg(long, hide = true, value_enum)]
        tamper_weight: Option<TamperWeight>,
        #[arg(long, hide = true, default_value_t = 0)]
        tamper_index: usize,
        #[arg(long, hide = true, default_value_t = 1e-6, allow_hyphen_values = true)]
        tamper_delta: f64,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum NormMethod {
    Closed,
    Series,
    Bruteforce,
    All,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum TamperWeight {
    C0,
    C1,
}

/// Bad input or an argument the core rejected; exits with 2.
struct Failure(String);

impl From<optquad_core::Error> for Failure {
    fn from(e: optquad_core::Error) -> Self {
        Failure(e.to_string())
    }
}

fn positive(s: &str) -> Result<usize, String> {
    match s.parse::<usize>() {
        Ok(0) => Err("must be at least 1".into()),
        Ok(n) => Ok(n),
        Err(e) => Err(e.to_string()),
    }
}

type Outcome = Result<(Envelope, Format, bool), Failure>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(2)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match dispatch(cli.command) {
        Ok((env, format, ok)) => {
            let mut stdout = std::io::stdout().lock();
            if stdout.write_all(env.render(format).as_bytes()).is_err() {
                return ExitCode::from(2);
            }
            if ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(Failure(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn dispatch(cmd: Command) -> Outcome {
    match cmd {
        Command::Coeffs { n, rule, common } => coeffs(n, rule, common),
        Command::Norm { n, method, common } => norm(n, method, common),
        Command::Integrate {
            n,
            rule,
            function,
            common,
        } => integrate(n, rule, &function, common),
        Command::Convergence {
            rules,
            functions,
            n_list,
            selftest_power4,
            common,
        } => convergence(&rules, &functions, &n_list, selftest_power4, common),
        Command::Verify {
            n_max,
            tamper_weight,
            tamper_index,
            tamper_delta,
            common,
        } => run_verify(
            n_max,
            tamper_weight.map(|w| (w, tamper_index, tamper_delta)),
            common,
        ),
    }
}

fn coeffs(n: usize, rule: RuleKind, common: Common) -> Outcome {
    let rule = rule.build(Grid::new(n)?);
    let mut t = Table::new(&["beta", "x", "c0", "c1"]);
    for (b, x) in rule.grid().nodes().enumerate() {
        t.push(vec![
            Cell::Int(b as i64),
            Cell::Real(x),
            Cell::Real(rule.c0()[b]),
            Cell::Real(rule.c1()[b]),
        ]);
    }
    let mut params = Record::default();
    params
        .push("n", Cell::Int(n as i64))
        .push("rule", Cell::text(rule.name()));
    Ok((
        Envelope {
            command: "coeffs",
            parameters: params,
            sections: vec![Section::Rows("rows", t)],
        },
        common.format,
        true,
    ))
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs())
}

fn norm(n: usize, method: NormMethod, common: Common) -> Outcome {
    let grid = Grid::new(n)?;
    let h = grid.h();
    let mut v = Record::default();
    v.push("n", Cell::Int(n as i64)).push("h", Cell::Real(h));
    let want = |m: NormMethod| method == m || method == NormMethod::All;
    let closed = if want(NormMethod::Closed) {
        Some(norm_sq_closed(h)?)
    } else {
        None
    };
    let series = if want(NormMethod::Series) {
        Some(norm_sq_series(h, 1e-16)?)
    } else {
        None
    };
    let brute = if want(NormMethod::Bruteforce) {
        Some(norm_sq_bruteforce_with(
            &RuleKind::Optimal.build(grid),
            common.exec(),
        )?)
    } else {
        None
    };
    if let Some(c) = closed {
        v.push("closed", Cell::Real(c));
    }
    if let Some(s) = series {
        v.push("series", Cell::Real(s));
    }
    if let Some(b) = &brute {
        v.push("bruteforce", Cell::Real(b.total))
            .push("a1", Cell::Real(b.a1))
            .push("a2", Cell::Real(b.a2))
            .push("a3", Cell::Real(b.a3))
            .push("a4", Cell::Real(b.a4));
    }
    if let (Some(c), Some(s), Some(b)) = (closed, series, &brute) {
        v.push("rel_closed_series", Cell::Real(rel(c, s)))
            .push("rel_closed_bruteforce", Cell::Real(rel(c, b.total)))
            .push("rel_series_bruteforce", Cell::Real(rel(s, b.total)))
            .push("em", Cell::Real(em_norm_sq(h)))
            .push("ratio_to_em", Cell::Real(c / em_norm_sq(h)));
    }
    let mut params = Record::default();
    params.push("n", Cell::Int(n as i64)).push(
        "method",
        Cell::text(
            method
                .to_possible_value()
                .map_or(String::new(), |p| p.get_name().to_string()),
        ),
    );
    Ok((
        Envelope {
            command: "norm",
            parameters: params,
            sections: vec![Section::Values(v)],
        },
        common.format,
        true,
    ))
}

fn integrate(n: usize, kind: RuleKind, function: &str, common: Common) -> Outcome {
    let f = builtin(function)?;
    let rule = kind.build(Grid::new(n)?);
    let approx = apply_rule(&rule, &f);
    let exact = f.exact_integral();
    let error = exact.map(|e| e - approx);
    let seminorm = w21_seminorm(&f).ok();
    // the bound is only established for the optimal rule
    let bound = match (kind, seminorm) {
        (RuleKind::Optimal, Some(s)) => Some(norm_sq_closed(rule.grid().h())?.sqrt() * s),
        _ => None,
    };
    let mut v = Record::default();
    v.push("rule", Cell::text(kind.name()))
        .push("n", Cell::Int(n as i64))
        .push("function", Cell::text(function))
        .push("approx", Cell::Real(approx))
        .push("exact", Cell::opt_real(exact))
        .push("error", Cell::opt_real(error))
        .push("abs_error", Cell::opt_real(error.map(f64::abs)))
        .push("seminorm", Cell::opt_real(seminorm))
        .push("bound", Cell::opt_real(bound));
    let mut params = Record::default();
    params
        .push("n", Cell::Int(n as i64))
        .push("rule", Cell::text(kind.name()))
        .push("function", Cell::text(function));
    Ok((
        Envelope {
            command: "integrate",
            parameters: params,
            sections: vec![Section::Values(v)],
        },
        common.format,
        true,
    ))
}

fn convergence(
    rules: &[RuleKind],
    functions: &[String],
    n_list: &[usize],
    selftest: bool,
    common: Common,
) -> Outcome {
    let ns: Vec<usize> = if n_list.is_empty() {
        default_doubling_grid()
    } else {
        n_list.to_vec()
    };
    let rows: Vec<ConvergenceRow> = if selftest {
        synthetic_power_law(4.0, &ns)
    } else {
        let fs = if functions.is_empty() {
            builtin_integrands()
        } else {
            functions
                .iter()
                .map(|f| builtin(f))
                .collect::<optquad_core::Result<Vec<_>>>()?
        };
        run_sweep_with(rules, &fs, &ns, common.exec())?
    };

    let mut table = Table::new(&["rule", "n", "h", "function", "approx", "exact", "abs_error"]);
    for r in &rows {
        table.push(vec![
            Cell::text(&r.rule_name),
            Cell::Int(r.n as i64),
            Cell::Real(r.h),
            Cell::text(&r.integrand_name),
            Cell::Real(r.approx),
            Cell::Real(r.exact),
            Cell::Real(r.abs_error),
        ]);
    }
    let mut fits = Table::new(&[
        "rule",
        "function",
        "slope",
        "intercept",
        "r_squared",
        "n_min",
        "n_max",
        "status",
    ]);
    // fit_all reports pairs in first-seen order
    let mut pairs: Vec<(&str, &str)> = Vec::new();
    for r in &rows {
        let key = (r.rule_name.as_str(), r.integrand_name.as_str());
        if !pairs.contains(&key) {
            pairs.push(key);
        }
    }
    for (fit, (rule, function)) in fit_all(&rows).into_iter().zip(pairs) {
        fits.push(match fit {
            Ok(f) => vec![
                Cell::text(f.rule_name),
                Cell::text(f.integrand_name),
                Cell::Real(f.slope),
                Cell::Real(f.intercept),
                Cell::Real(f.r_squared),
                Cell::Int(f.n_range.0 as i64),
                Cell::Int(f.n_range.1 as i64),
                Cell::text("ok"),
            ],
            Err(_) => vec![
                Cell::text(rule),
                Cell::text(function),
                Cell::Missing,
                Cell::Missing,
                Cell::Missing,
                Cell::Missing,
                Cell::Missing,
                Cell::text("insufficient-data"),
            ],
        });
    }

    let mut params = Record::default();
    params
        .push(
            "rules",
            Cell::text(rules.iter().map(|r| r.name()).collect::<Vec<_>>().join(",")),
        )
        .push("functions", Cell::text(functions.join(",")))
        .push(
            "n_list",
            Cell::text(
                ns.iter()
                    .map(|n| n.to_string())
                    .collect::<Vec<_>>()
                    .join(","),
            ),
        )
        .push("selftest_power4", Cell::Bool(selftest));
    Ok((
        Envelope {
            command: "convergence",
            parameters: params,
            sections: vec![Section::Rows("rows", table), Section::Rows("fits", fits)],
        },
        common.format,
        true,
    ))
}

fn run_verify(n_max: usize, tamper: Option<(TamperWeight, usize, f64)>, common: Common) -> Outcome {
    let tamper = tamper.map(|(w, index, delta)| Tamper {
        weight: match w {
            TamperWeight::C0 => WeightKind::Value,
            TamperWeight::C1 => WeightKind::Derivative,
        },
        index,
        delta,
    });
    if tamper.is_some_and(|t| !t.delta.is_finite()) {
        return Err(Failure("tamper delta must be finite".into()));
    }
    let outcomes = verify::run(VerifyConfig { n_max, tamper });
    let mut t = Table::new(&["check", "status", "worst", "threshold", "detail"]);
    for o in &outcomes {
        t.push(vec![
            Cell::text(o.name),
            Cell::text(if o.passed { "pass" } else { "fail" }),
            Cell::Real(o.worst),
            Cell::Real(o.threshold),
            Cell::text(&o.detail),
        ]);
    }
    let ok = verify::all_passed(&outcomes);
    let mut params = Record::default();
    params.push("n_max", Cell::Int(n_max as i64));
    let mut summary = Record::default();
    summary.push("passed", Cell::Bool(ok)).push(
        "failed_checks",
        Cell::Int(outcomes.iter().filter(|o| !o.passed).count() as i64),
    );
    Ok((
        Envelope {
            command: "verify",
            parameters: params,
            sections: vec![Section::Rows("checks", t), Section::Values(summary)],
        },
        common.format,
        ok,
    ))
}
