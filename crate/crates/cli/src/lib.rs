//! The `rcrt` command line.
//!
//! Every command writes one JSON document to stdout (or CSV for
//! `simulate --format csv`) and diagnostics to stderr. Exit codes: 0 on
//! success, 1 on domain errors, 2 on usage errors.

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_bigint::BigInt;
use num_rational::BigRational;
use serde_json::{json, Value};

use rcrt_core::format::parse_rational;
use rcrt_core::primes::primes_in_range;
use rcrt_core::range::{capacity_for_delta_with_budget, range_profile_with_budget, DEFAULT_SCAN_BUDGET};
use rcrt_core::single::{build_error_list_with_budget, DEFAULT_LIST_BUDGET};
use rcrt_core::{
    capacity_bounds, closed_form_decode, grcrt_decode, prob_bound_gamma, prob_bound_simple, random_select,
    search_decode, DecodeResult, ErrorList, GammaModuli, ModulusSet, NoiseMode, RcrtError, ResidueTable,
    ResidueVector, SelectionSpec, ToneSpec,
};

#[derive(Parser, Debug)]
#[command(name = "rcrt", version, about = "Robust Chinese Remainder Theorem reconstruction")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Error-bound/dynamic-range staircase of a modulus set.
    Analyze {
        #[command(flatten)]
        moduli: ModuliArgs,
        /// Largest number of integers the scan may visit.
        #[arg(long, default_value_t = DEFAULT_SCAN_BUDGET)]
        budget: u64,
    },
    /// Largest dynamic range K with minimum distance at least delta4.
    Capacity {
        #[command(flatten)]
        moduli: ModuliArgs,
        #[arg(long)]
        delta4: BigInt,
        #[arg(long, default_value_t = DEFAULT_SCAN_BUDGET)]
        budget: u64,
    },
    /// Robust reconstruction of one integer.
    DecodeSingle {
        #[command(flatten)]
        moduli: ModuliArgs,
        /// Noisy residues, in the order the moduli were given.
        #[arg(long, value_delimiter = ',', required = true)]
        residues: Vec<BigInt>,
        #[arg(long, value_enum, default_value_t = Method::ClosedForm)]
        method: Method,
        /// Error bound 4δ for the search decoder.
        #[arg(long)]
        delta4: Option<BigInt>,
        /// Dynamic range for the search decoder; defaults to the capacity.
        #[arg(long)]
        k: Option<BigInt>,
        /// A list written by `build-error-list`, used instead of building one.
        #[arg(long)]
        error_list: Option<PathBuf>,
    },
    /// Robust reconstruction of several integers from an unordered table.
    DecodeMulti {
        #[command(flatten)]
        moduli: ModuliArgs,
        /// Error bound δ, as an integer, `p/q` or a decimal.
        #[arg(long, value_parser = rational)]
        delta: BigRational,
        /// JSON file `{"rows": [["r", ...], ...]}`, one row per modulus.
        #[arg(long, conflicts_with = "rows")]
        table: Option<PathBuf>,
        /// Inline table: rows separated by `;`, residues by `,`.
        #[arg(long)]
        rows: Option<String>,
    },
    /// Random prime moduli and their success-probability bounds.
    SelectModuli {
        #[arg(long)]
        beta: u32,
        #[arg(long)]
        count: usize,
        #[arg(long)]
        delta4: BigInt,
        #[arg(long)]
        k_target: BigInt,
        #[arg(long, default_value_t = 1000)]
        trials: u64,
        #[arg(long)]
        seed: u64,
    },
    /// Synthetic undersampled multi-tone frequency estimation.
    Simulate {
        #[arg(long, value_delimiter = ',', required = true)]
        freqs: Vec<BigInt>,
        #[command(flatten)]
        moduli: ModuliArgs,
        #[arg(long, value_enum, default_value_t = Noise::Exact)]
        noise_mode: Noise,
        /// Largest injected residue error for `perturbation`.
        #[arg(long)]
        noise_bound: Option<BigInt>,
        /// Standard deviation for `additive`.
        #[arg(long)]
        sigma: Option<f64>,
        /// Error table for `pattern`: one row per tone, `;`-separated.
        #[arg(long, allow_hyphen_values = true)]
        errors: Option<String>,
        /// Decoder error bound δ.
        #[arg(long, value_parser = rational)]
        delta: BigRational,
        #[arg(long, default_value_t = 1)]
        trials: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
    /// Lower bounds on the success probability of random prime selection.
    ProbBound {
        #[arg(long)]
        beta: u32,
        #[arg(long)]
        count: usize,
        #[arg(long)]
        delta4: BigInt,
        #[arg(long)]
        k: BigInt,
        /// Largest selected prime; defaults to the smallest prime of the interval.
        #[arg(long)]
        p_l: Option<BigInt>,
    },
    /// Sorted error list for the search decoder.
    BuildErrorList {
        #[command(flatten)]
        moduli: ModuliArgs,
        #[arg(long)]
        delta4: BigInt,
        #[arg(long, default_value_t = DEFAULT_LIST_BUDGET)]
        budget: u64,
        /// Write the list here instead of stdout.
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

#[derive(Args, Debug)]
struct ModuliArgs {
    /// Comma-separated moduli.
    #[arg(long, value_delimiter = ',', conflicts_with_all = ["gamma", "coprime_parts"])]
    moduli: Option<Vec<BigInt>>,
    /// Common factor Γ of the moduli; use with --coprime-parts.
    #[arg(long, requires = "coprime_parts")]
    gamma: Option<BigInt>,
    /// Pairwise-coprime M_l with m_l = Γ·M_l.
    #[arg(long, value_delimiter = ',', requires = "gamma")]
    coprime_parts: Option<Vec<BigInt>>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Method {
    ClosedForm,
    Search,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Noise {
    Exact,
    Perturbation,
    Pattern,
    Additive,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

fn rational(text: &str) -> Result<BigRational, String> {
    parse_rational(text).ok_or_else(|| format!("not a rational number: {text:?}"))
}

enum Failure {
    Usage(String),
    Domain(RcrtError),
    Io(String),
}

impl From<RcrtError> for Failure {
    fn from(e: RcrtError) -> Self {
        Failure::Domain(e)
    }
}

type Outcome<T> = Result<T, Failure>;

fn decimals(values: &[BigInt]) -> Vec<String> {
    values.iter().map(ToString::to_string).collect()
}

impl ModuliArgs {
    fn given(&self) -> Outcome<()> {
        if self.moduli.is_none() && self.gamma.is_none() {
            return Err(Failure::Usage("give --moduli or --gamma with --coprime-parts".into()));
        }
        Ok(())
    }

    /// The flat modulus set, plus its description for the output.
    fn set(&self) -> Outcome<(ModulusSet, Value)> {
        self.given()?;
        match &self.moduli {
            Some(ms) => {
                let set = ModulusSet::new(ms.clone())?;
                let info = json!({ "moduli": decimals(set.moduli()) });
                Ok((set, info))
            }
            None => {
                let (gm, info) = self.factored()?;
                Ok((gm.set().clone(), info))
            }
        }
    }

    /// The factored form, recovering Γ as the gcd when a flat list is given.
    fn factored(&self) -> Outcome<(GammaModuli, Value)> {
        self.given()?;
        let gm = match (&self.moduli, &self.gamma, &self.coprime_parts) {
            (Some(ms), _, _) => GammaModuli::factor(&ModulusSet::new(ms.clone())?)?,
            (None, Some(g), Some(parts)) => GammaModuli::new(g.clone(), parts.clone())?,
            _ => unreachable!("clap enforces --gamma with --coprime-parts"),
        };
        let info = json!({
            "moduli": decimals(gm.set().moduli()),
            "gamma": gm.gamma().to_string(),
            "coprime_parts": decimals(gm.parts()),
        });
        Ok((gm, info))
    }

    /// The order the user listed the moduli in, for aligning residues.
    fn listed(&self) -> Vec<BigInt> {
        match (&self.moduli, &self.gamma, &self.coprime_parts) {
            (Some(ms), _, _) => ms.clone(),
            (None, Some(g), Some(parts)) => parts.iter().map(|p| p * g).collect(),
            _ => Vec::new(),
        }
    }
}

fn parse_grid(text: &str, what: &str) -> Outcome<Vec<Vec<BigInt>>> {
    text.split(';')
        .map(|row| {
            row.split(',')
                .map(|t| t.trim().parse().map_err(|_| Failure::Usage(format!("{what}: not an integer: {t:?}"))))
                .collect()
        })
        .collect()
}

fn read(path: &PathBuf) -> Outcome<String> {
    std::fs::read_to_string(path).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))
}

fn decode_json(d: &DecodeResult) -> Value {
    json!({
        "estimate": d.estimate.to_string(),
        "anchor": d.anchor.to_string(),
        "folding": d.folding.as_ref().map(ToString::to_string),
        "matches": d.matches.map(|m| m.to_string()),
        "comparisons": d.comparisons.to_string(),
    })
}

fn to_value<T: serde::Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("reports always serialize")
}

/// Output of one command: a JSON document or preformatted text.
enum Output {
    Json(Value),
    Text(String),
}

fn document(command: &str, seed: Option<u64>, input: Value, result: Value) -> Output {
    Output::Json(json!({
        "command": command,
        "seed": seed.map(|s| s.to_string()),
        "input": input,
        "result": result,
    }))
}

fn execute(command: Command) -> Outcome<Output> {
    match command {
        Command::Analyze { moduli, budget } => {
            let (set, input) = moduli.set()?;
            let profile = range_profile_with_budget(&set, budget)?;
            Ok(document(
                "analyze",
                None,
                input,
                json!({
                    "lcm": profile.lcm().to_string(),
                    "steps": to_value(&profile.steps()),
                    "diagnostics": profile.diagnostics(),
                }),
            ))
        }
        Command::Capacity { moduli, delta4, budget } => {
            let (set, mut input) = moduli.set()?;
            input["delta4"] = json!(delta4.to_string());
            let k = capacity_for_delta_with_budget(&set, &delta4, budget)?;
            let (lower, upper) = capacity_bounds(&set, &delta4)?;
            Ok(document(
                "capacity",
                None,
                input,
                json!({
                    "K": k.to_string(),
                    "lower_bound": lower.to_string(),
                    "upper_bound": upper.map(|u| u.to_string()),
                }),
            ))
        }
        Command::DecodeSingle { moduli, residues, method, delta4, k, error_list } => {
            let (set, mut input) = moduli.set()?;
            let listed = moduli.listed();
            if listed.len() != residues.len() {
                return Err(Failure::Usage(format!("{} residues for {} moduli", residues.len(), listed.len())));
            }
            // align with the ascending modulus order
            let mut pairs: Vec<(BigInt, BigInt)> = listed.into_iter().zip(residues).collect();
            pairs.sort();
            let noisy = ResidueVector::new(set.clone(), pairs.iter().map(|(_, r)| r.clone()).collect())?;
            input["residues"] = json!(decimals(noisy.residues()));
            let result = match method {
                Method::ClosedForm => closed_form_decode(&set, &noisy)?,
                Method::Search => {
                    let list = match (&error_list, &delta4) {
                        (Some(path), _) => ErrorList::from_json(&read(path)?)?,
                        (None, Some(d4)) => build_error_list_with_budget(&set, d4, DEFAULT_LIST_BUDGET)?,
                        (None, None) => {
                            return Err(Failure::Usage("the search decoder needs --delta4 or --error-list".into()))
                        }
                    };
                    let k = match k {
                        Some(k) => k,
                        None => capacity_for_delta_with_budget(&set, list.delta4(), DEFAULT_SCAN_BUDGET)?,
                    };
                    input["delta4"] = json!(list.delta4().to_string());
                    input["K"] = json!(k.to_string());
                    search_decode(&list, &noisy, &k)?
                }
            };
            input["method"] = json!(match method {
                Method::ClosedForm => "closed-form",
                Method::Search => "search",
            });
            Ok(document("decode-single", None, input, decode_json(&result)))
        }
        Command::DecodeMulti { moduli, delta, table, rows } => {
            let (gm, mut input) = moduli.factored()?;
            let rt = match (&table, &rows) {
                (Some(path), _) => ResidueTable::from_json(gm, &read(path)?)?,
                (None, Some(text)) => ResidueTable::new(gm, parse_grid(text, "--rows")?)?,
                (None, None) => return Err(Failure::Usage("give --table or --rows".into())),
            };
            input["delta"] = json!(delta.to_string());
            input["rows"] = json!(rt.rows().iter().map(|r| decimals(r)).collect::<Vec<_>>());
            let result = grcrt_decode(&rt, &delta)?;
            Ok(document("decode-multi", None, input, to_value(&result)))
        }
        Command::SelectModuli { beta, count, delta4, k_target, trials, seed } => {
            let spec = SelectionSpec::new(beta, count, delta4, k_target)?;
            let report = random_select(&spec, seed, trials)?;
            Ok(document("select-moduli", Some(seed), to_value(&spec), to_value(&report)))
        }
        Command::Simulate { freqs, moduli, noise_mode, noise_bound, sigma, errors, delta, trials, seed, format } => {
            let (gm, mut input) = moduli.factored()?;
            let mode = match noise_mode {
                Noise::Exact => NoiseMode::Exact,
                Noise::Perturbation => NoiseMode::ResiduePerturbation {
                    bound: noise_bound.ok_or_else(|| Failure::Usage("perturbation needs --noise-bound".into()))?,
                },
                Noise::Pattern => NoiseMode::Pattern(parse_grid(
                    &errors.ok_or_else(|| Failure::Usage("pattern needs --errors".into()))?,
                    "--errors",
                )?),
                Noise::Additive => NoiseMode::AdditiveComplex {
                    sigma: sigma.ok_or_else(|| Failure::Usage("additive needs --sigma".into()))?,
                },
            };
            let ts = ToneSpec::unit(freqs)?;
            input["noise"] = noise_json(&mode);
            let report = rcrt_core::simulate(&ts, &gm, &mode, &delta, trials, seed);
            match format {
                Format::Json => Ok(document("simulate", Some(seed), input, to_value(&report))),
                Format::Csv => Ok(Output::Text(csv(&report))),
            }
        }
        Command::ProbBound { beta, count, delta4, k, p_l } => {
            let spec = SelectionSpec::new(beta, count, delta4, k.clone())?;
            let p_l = match p_l {
                Some(p) => p,
                None => {
                    if beta > 40 {
                        return Err(Failure::Usage("give --p-l for beta above 40".into()));
                    }
                    let (lo, hi) = (1u64 << (beta - 1), 1u64 << beta);
                    // the first prime of the interval; no sieve of the whole range
                    let step = 1u64 << 12;
                    let first = (lo..=hi)
                        .step_by(step as usize)
                        .find_map(|start| primes_in_range(start, (start + step - 1).min(hi)).first().copied())
                        .ok_or_else(|| RcrtError::Domain(format!("no prime in [2^{}, 2^{beta}]", beta - 1)))?;
                    BigInt::from(first)
                }
            };
            let mut input = to_value(&spec);
            input["p_l"] = json!(p_l.to_string());
            Ok(document(
                "prob-bound",
                None,
                input,
                json!({
                    "informative": spec.is_informative(),
                    "bound_simple": to_value(&prob_bound_simple(&spec, &p_l, &k)),
                    "bound_gamma": to_value(&prob_bound_gamma(&spec, &p_l, &k)),
                }),
            ))
        }
        Command::BuildErrorList { moduli, delta4, budget, output } => {
            let (set, _) = moduli.set()?;
            let list = build_error_list_with_budget(&set, &delta4, budget)?;
            let text = list.to_json();
            match output {
                Some(path) => {
                    std::fs::write(&path, &text).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))?;
                    Ok(document(
                        "build-error-list",
                        None,
                        json!({ "moduli": decimals(set.moduli()), "delta4": delta4.to_string() }),
                        json!({ "path": path.display().to_string(), "tau": list.tau().to_string(),
                                "entries": list.entries().len().to_string() }),
                    ))
                }
                None => Ok(Output::Text(text)),
            }
        }
    }
}

fn noise_json(mode: &NoiseMode) -> Value {
    match mode {
        NoiseMode::Exact => json!({ "mode": "exact" }),
        NoiseMode::ResiduePerturbation { bound } => json!({ "mode": "perturbation", "bound": bound.to_string() }),
        NoiseMode::Pattern(rows) => {
            json!({ "mode": "pattern", "errors": rows.iter().map(|r| decimals(r)).collect::<Vec<_>>() })
        }
        NoiseMode::AdditiveComplex { sigma } => json!({ "mode": "additive", "sigma": sigma.to_string() }),
    }
}

fn csv(report: &rcrt_core::SimulationReport) -> String {
    let mut out = String::from("master_seed,trial,seed,success,max_error,estimates,abs_errors,failed_stage,error\n");
    for m in &report.metrics {
        let stage = m.failed_stage.map(|s| to_value(&s).as_str().unwrap_or_default().to_string());
        let error = m.error.as_deref().unwrap_or_default().replace('"', "\"\"");
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},\"{}\"\n",
            report.seed,
            m.trial,
            m.seed,
            m.success,
            m.max_error.as_ref().map(ToString::to_string).unwrap_or_default(),
            decimals(&m.estimates).join(" "),
            decimals(&m.abs_errors).join(" "),
            stage.unwrap_or_default(),
            error,
        ));
    }
    out
}

/// Parses `argv` (program name first), runs the command and returns the
/// exit code.
pub fn run<I, T>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind::{DisplayHelp, DisplayVersion};
            if matches!(e.kind(), DisplayHelp | DisplayVersion) {
                let _ = write!(stdout, "{e}");
                return 0;
            }
            let text = e.render().to_string();
            let _ = write!(stderr, "usage error: {}", text.strip_prefix("error: ").unwrap_or(&text));
            return 2;
        }
    };
    match execute(cli.command) {
        Ok(Output::Json(v)) => {
            let _ = writeln!(stdout, "{}", serde_json::to_string_pretty(&v).expect("values always serialize"));
            0
        }
        Ok(Output::Text(text)) => {
            let _ = write!(stdout, "{text}");
            if !text.ends_with('\n') {
                let _ = writeln!(stdout);
            }
            0
        }
        Err(Failure::Usage(msg)) => {
            let _ = writeln!(stderr, "usage error: {msg}");
            2
        }
        Err(Failure::Domain(e)) => {
            let _ = writeln!(stderr, "{e}");
            1
        }
        Err(Failure::Io(msg)) => {
            let _ = writeln!(stderr, "io error: {msg}");
            1
        }
    }
}
