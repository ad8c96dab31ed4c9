//! Batch front-end.
//!
//! Subcommands either take an inline coalition expression (`density`,
//! `triples`), a scenario document (`irrelevance`, `antidem`, `escape`,
//! `witness-f`, `swr-witness`), a serialized derivation (`check-cert`), or
//! plain flags (`build-tree`, `forcing`). Reports go to standard output as
//! text lines, or as one JSON object with `--json`; most subcommands also
//! write a CSV table with `--csv PATH` (columns listed in each subcommand's
//! help). Exit code 0 means every requested check passed, 1 means some
//! check failed or a construction was refused, 2 means the input could not
//! be read at all.
//!
//! Output is deterministic: the same arguments, files and `--seed` produce
//! the same bytes.

mod commands;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand, ValueEnum};
use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use crate::{q, Q};

#[derive(Parser)]
#[command(
    name = "silverlab",
    version,
    about = "Coalition density, Silver conditions and equity derivations at desk scale"
)]
struct Cli {
    /// Seed echoed into reports; fixed seed and inputs give identical bytes.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Emit the report as a single JSON object instead of text lines.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Membership counts and density estimates for a coalition expression.
    #[command(after_help = "CSV columns: horizon,count,alpha")]
    Density {
        /// Coalition expression, e.g. "periodic('110')" or "~finite{0}".
        desc: String,
        /// Horizons to sample, comma separated.
        #[arg(long, value_delimiter = ',', required = true)]
        horizons: Vec<u64>,
        /// Write the samples as CSV to this path.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Runs of three adjacent members below a horizon.
    #[command(after_help = "CSV columns: start")]
    Triples {
        /// Coalition expression to scan.
        desc: String,
        /// Scan coordinates 0..=horizon.
        #[arg(long)]
        horizon: u64,
        /// Write every run start as CSV to this path.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Answers the irrelevance requests of a scenario document.
    #[command(after_help = "CSV columns: line,call,verdict")]
    Irrelevance {
        /// Scenario document with `run irrelevance(F, b, f)` lines.
        #[arg(short = 'f', long = "file")]
        file: PathBuf,
        /// Write one verdict row per request as CSV to this path.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Answers the anti-democracy requests of a scenario document.
    #[command(after_help = "CSV columns: line,call,verdict,witness")]
    Antidem {
        /// Scenario document with `run antidem(F, family)` lines.
        #[arg(short = 'f', long = "file")]
        file: PathBuf,
        /// Write one verdict row per request as CSV to this path.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Builds a staged splitting tree that meets every oracle each round.
    #[command(after_help = "CSV columns: round,lev,ht,ratio,bound")]
    BuildTree {
        /// Splitting share target, e.g. 3/4 or 0.75.
        #[arg(long, value_parser = parse_ratio_arg)]
        delta: Q,
        /// Number of building rounds.
        #[arg(long)]
        rounds: usize,
        /// Oracle preset: identity, factor:<digits>, ones:<count>,
        /// fixed:<digits>. One per round; a short list repeats cyclically.
        #[arg(long = "oracle", required = true)]
        oracles: Vec<String>,
        /// Write the per-round audit as CSV to this path.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Builds streams through document conditions that dodge the staircase
    /// capture sets.
    #[command(after_help = "CSV columns: line,call,level,prefix_len,inside_condition,outside_staircase")]
    Escape {
        /// Scenario document with `run escape(f)` lines.
        #[arg(short = 'f', long = "file")]
        file: PathBuf,
        /// Coordinates to pin down while building; also the audit depth.
        #[arg(long, default_value_t = 40)]
        depth: u64,
        /// Write one audit row per request as CSV to this path.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Streams inside the even-top class closure or outside its level sets.
    #[command(name = "witness-f")]
    #[command(after_help = "CSV columns: line,call,direction,levels,verdict")]
    WitnessF {
        /// Serve the document's witness_in requests.
        #[arg(long = "in", conflicts_with = "out")]
        inside: bool,
        /// Serve the document's witness_out requests.
        #[arg(long = "out")]
        out: bool,
        /// Scenario document with witness_in/witness_out lines.
        #[arg(short = 'f', long = "file")]
        file: PathBuf,
        /// Capture-set levels to audit.
        #[arg(long, default_value_t = 5)]
        levels: u64,
        /// Pin-down depth for the outside direction.
        #[arg(long, default_value_t = 60)]
        depth: u64,
        /// Write one verdict row per request as CSV to this path.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Builds and audits an order-witness bundle for each document condition.
    #[command(name = "swr-witness")]
    #[command(after_help = "CSV columns: line,call,case,variant,derivation,steps,conclusion")]
    SwrWitness {
        /// Which comparison of the two canonical maps to assume.
        #[arg(long, value_enum)]
        case: CaseArg,
        /// Which move set the derivations may use.
        #[arg(long, value_enum)]
        variant: VariantArg,
        /// Scenario document with `run swr_witness(f)` lines.
        #[arg(short = 'f', long = "file")]
        file: PathBuf,
        /// Density threshold the free set must clear; must exceed 2/3.
        #[arg(long, value_parser = parse_ratio_arg, default_value = "3/4")]
        delta: Q,
        /// Directory for serialized derivations, two .cert files per request.
        #[arg(long)]
        cert: Option<PathBuf>,
        /// Write one row per derivation as CSV to this path.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Replays a serialized derivation and confirms its conclusion.
    #[command(name = "check-cert")]
    #[command(after_help = "CSV columns: file,conclusion,valid")]
    CheckCert {
        /// Certificate file to replay.
        file: PathBuf,
        /// Write the verdict as CSV to this path.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Meets dense oracle sets or boosts the splitting share of a condition.
    #[command(after_help = "CSV columns (--meet): step,oracle,height,terminals\nCSV columns (--densify): exponent,height,ratio,bound")]
    Forcing {
        /// Thread a condition through each oracle in turn.
        #[arg(long, conflicts_with = "densify")]
        meet: bool,
        /// Raise the audited splitting share along a spine.
        #[arg(long)]
        densify: bool,
        /// Oracle presets for --meet; same syntax as build-tree.
        #[arg(long = "oracle")]
        oracles: Vec<String>,
        /// Alphabet size for --meet.
        #[arg(long, default_value_t = 2)]
        k: u64,
        /// Starting cube height for --meet.
        #[arg(long, default_value_t = 2)]
        height: u64,
        /// Splitting share target for --densify.
        #[arg(long, value_parser = parse_ratio_arg)]
        delta: Option<Q>,
        /// Largest boosting exponent for --densify; every smaller one is
        /// audited too.
        #[arg(long, default_value_t = 6)]
        exponent: u32,
        /// First free coordinate of the boosting spine.
        #[arg(long, default_value_t = 0)]
        spine_start: u64,
        /// Write the audit table as CSV to this path.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum CaseArg {
    /// The even-favouring map ends strictly above.
    Eo,
    /// The odd-favouring map ends strictly above.
    Oe,
    /// The two maps are tied.
    Sim,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum VariantArg {
    /// Four levels; equity transfers plus rearrangements.
    Sefa,
    /// Two levels; dominance steps plus rearrangements.
    Pfa,
}

/// A finished report. `lines` is the text rendering; `data` carries the
/// same content for `--json`.
struct Report {
    command: &'static str,
    status: &'static str,
    lines: Vec<String>,
    data: serde_json::Value,
}

struct CmdOutput {
    report: Report,
    ok: bool,
}

impl CmdOutput {
    fn passed(command: &'static str, lines: Vec<String>, data: serde_json::Value) -> Self {
        CmdOutput {
            report: Report {
                command,
                status: "ok",
                lines,
                data,
            },
            ok: true,
        }
    }

    fn failed(command: &'static str, lines: Vec<String>, data: serde_json::Value) -> Self {
        CmdOutput {
            report: Report {
                command,
                status: "invalid",
                lines,
                data,
            },
            ok: false,
        }
    }
}

/// Parses the arguments, runs the subcommand, and writes the report.
/// Returns the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let rendered = e.render().to_string();
            return if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = write!(out, "{rendered}");
                0
            } else {
                let _ = write!(err, "{rendered}");
                2
            };
        }
    };
    match commands::execute(cli.command) {
        Ok(output) => {
            let rendered = if cli.json {
                render_json(&output.report, cli.seed)
            } else {
                output.report.lines.join("\n") + "\n"
            };
            let _ = write!(out, "{rendered}");
            if output.ok {
                0
            } else {
                1
            }
        }
        Err(message) => {
            let _ = writeln!(err, "error: {message}");
            2
        }
    }
}

fn render_json(report: &Report, seed: u64) -> String {
    let v = serde_json::json!({
        "command": report.command,
        "seed": seed,
        "status": report.status,
        "lines": report.lines,
        "data": report.data,
    });
    serde_json::to_string_pretty(&v).expect("report values serialize") + "\n"
}

fn parse_ratio_arg(s: &str) -> Result<Q, String> {
    let bad = || format!("'{s}' is not a ratio; write 3/4, 0.75 or 1");
    let s = s.trim();
    if let Some((a, b)) = s.split_once('/') {
        let numer: u64 = a.trim().parse().map_err(|_| bad())?;
        let denom: u64 = b.trim().parse().map_err(|_| bad())?;
        if denom == 0 {
            return Err("the denominator must not be zero".into());
        }
        Ok(q(numer, denom))
    } else if let Some((a, b)) = s.split_once('.') {
        let whole: u64 = a.trim().parse().map_err(|_| bad())?;
        if b.is_empty() || b.chars().any(|c| !c.is_ascii_digit()) {
            return Err(bad());
        }
        let frac: u64 = b.parse().map_err(|_| bad())?;
        let scale = 10u64
            .checked_pow(b.len() as u32)
            .ok_or_else(|| "too many decimal digits".to_string())?;
        let numer = whole
            .checked_mul(scale)
            .and_then(|v| v.checked_add(frac))
            .ok_or_else(|| "number too large".to_string())?;
        Ok(q(numer, scale))
    } else {
        s.parse::<u64>().map(Q::from_integer).map_err(|_| bad())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn capture(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let code = run(args.iter().copied(), &mut out, &mut err);
        (
            code,
            String::from_utf8(out).unwrap(),
            String::from_utf8(err).unwrap(),
        )
    }

    #[test]
    fn ratios_parse_in_three_spellings() {
        assert_eq!(parse_ratio_arg("3/4").unwrap(), q(3, 4));
        assert_eq!(parse_ratio_arg("0.75").unwrap(), q(3, 4));
        assert_eq!(parse_ratio_arg("1").unwrap(), q(1, 1));
        assert_eq!(parse_ratio_arg("1.0").unwrap(), q(1, 1));
        assert!(parse_ratio_arg("1/0").is_err());
        assert!(parse_ratio_arg("x").is_err());
    }

    #[test]
    fn usage_problems_exit_two_and_stay_off_stdout() {
        let (code, out, err) = capture(&["silverlab", "density", "~finite{0}"]);
        assert_eq!(code, 2);
        assert!(out.is_empty());
        assert!(!err.is_empty());

        let (code, _, err) = capture(&["silverlab", "triples", "finite{", "--horizon", "10"]);
        assert_eq!(code, 2);
        assert!(err.contains("error"));
    }

    #[test]
    fn help_exits_cleanly() {
        let (code, out, _) = capture(&["silverlab", "--help"]);
        assert_eq!(code, 0);
        assert!(out.contains("density"));
        assert!(out.contains("check-cert"));
    }

    #[test]
    fn a_small_density_report_comes_back_exact() {
        let (code, out, err) = capture(&[
            "silverlab",
            "density",
            "periodic('110')",
            "--horizons",
            "3,30,300",
        ]);
        assert_eq!(code, 0, "stderr: {err}");
        assert!(out.contains("2/3"), "report: {out}");
    }

    #[test]
    fn json_mode_wraps_the_same_lines() {
        let (code, out, _) = capture(&[
            "silverlab",
            "triples",
            "periodic('110')",
            "--horizon",
            "100",
            "--json",
            "--seed",
            "7",
        ]);
        assert_eq!(code, 0);
        let v: serde_json::Value = serde_json::from_str(&out).unwrap();
        assert_eq!(v["command"], "triples");
        assert_eq!(v["seed"], 7);
        assert_eq!(v["status"], "ok");
        assert_eq!(v["data"]["found"], 0);
    }
}
