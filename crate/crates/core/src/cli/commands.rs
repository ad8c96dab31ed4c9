//! One executor per subcommand. Each returns the finished report plus an
//! overall pass flag, or a usage error that never touches standard output.

use std::fs;
use std::path::{Path, PathBuf};

use serde_json::json;

use super::{CaseArg, CmdOutput, Command, VariantArg};
use crate::constructions::{
    audit_csv, build_delta_tree, default_value_bound, densify, escape_witness, in_cn, meet_dense,
    witness_in_f, witness_out_f, CnMembership, DenseOracle, SpineMap, UniformFiniteTree,
};
use crate::coalitions::{is_anti_democratic, is_irrelevant, AntiDemocracy, Irrelevance};
use crate::seqcore::{
    cylinder_member, Alphabet, CoalitionDescriptor, EventuallyPeriodicSeq, Membership,
    PartialAssignment,
};
use crate::speclang::{self, coalition_text, ResolvedDoc, RunSpec};
use crate::swr::{
    case_witness, check_certificate, check_derivation, CaseAssumption, CertDocument, Variant,
};
use crate::{q, Q};

pub fn execute(command: Command) -> Result<CmdOutput, String> {
    match command {
        Command::Density {
            desc,
            horizons,
            csv,
        } => density(&desc, &horizons, csv.as_deref()),
        Command::Triples { desc, horizon, csv } => triples(&desc, horizon, csv.as_deref()),
        Command::Irrelevance { file, csv } => irrelevance(&file, csv.as_deref()),
        Command::Antidem { file, csv } => antidem(&file, csv.as_deref()),
        Command::BuildTree {
            delta,
            rounds,
            oracles,
            csv,
        } => build_tree(delta, rounds, &oracles, csv.as_deref()),
        Command::Escape { file, depth, csv } => escape(&file, depth, csv.as_deref()),
        Command::WitnessF {
            inside,
            out,
            file,
            levels,
            depth,
            csv,
        } => witness_f(inside, out, &file, levels, depth, csv.as_deref()),
        Command::SwrWitness {
            case,
            variant,
            file,
            delta,
            cert,
            csv,
        } => swr_witness(case, variant, &file, delta, cert.as_deref(), csv.as_deref()),
        Command::CheckCert { file, csv } => check_cert(&file, csv.as_deref()),
        Command::Forcing {
            meet,
            densify,
            oracles,
            k,
            height,
            delta,
            exponent,
            spine_start,
            csv,
        } => {
            if meet {
                forcing_meet(&oracles, k, height, csv.as_deref())
            } else if densify {
                forcing_densify(delta, exponent, spine_start, csv.as_deref())
            } else {
                Err("forcing needs --meet or --densify".into())
            }
        }
    }
}

fn load_doc(path: &Path) -> Result<ResolvedDoc, String> {
    let text =
        fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    let doc =
        speclang::parse(&text).map_err(|e| format!("{}: {e}", path.display()))?;
    speclang::resolve(&doc).map_err(|e| format!("{}: {e}", path.display()))
}

fn parse_descriptor(text: &str) -> Result<CoalitionDescriptor, String> {
    speclang::parse_coalition_text(text).map_err(|e| e.to_string())
}

fn parse_oracle(spec: &str) -> Result<DenseOracle, String> {
    let word = |w: &str| -> Result<Vec<u64>, String> {
        if w.is_empty() || !w.chars().all(|c| c.is_ascii_digit()) {
            return Err(format!("oracle '{spec}': expected a nonempty digit word"));
        }
        Ok(w.chars().map(|c| c.to_digit(10).unwrap() as u64).collect())
    };
    if spec == "identity" {
        Ok(DenseOracle::identity())
    } else if let Some(w) = spec.strip_prefix("factor:") {
        Ok(DenseOracle::factor(word(w)?))
    } else if let Some(c) = spec.strip_prefix("ones:") {
        let count: u64 = c
            .parse()
            .map_err(|_| format!("oracle '{spec}': expected a count after ones:"))?;
        Ok(DenseOracle::append_ones(count))
    } else if let Some(w) = spec.strip_prefix("fixed:") {
        Ok(DenseOracle::fixed(word(w)?))
    } else {
        Err(format!(
            "unknown oracle '{spec}'; use identity, factor:<digits>, ones:<count> or fixed:<digits>"
        ))
    }
}

fn write_csv(path: &Path, header: &[&str], rows: &[Vec<String>]) -> Result<String, String> {
    let mut w =
        csv::Writer::from_path(path).map_err(|e| format!("{}: {e}", path.display()))?;
    let fail = |e: csv::Error| format!("{}: {e}", path.display());
    w.write_record(header).map_err(fail)?;
    for row in rows {
        w.write_record(row).map_err(fail)?;
    }
    w.flush().map_err(|e| format!("{}: {e}", path.display()))?;
    Ok(format!("wrote {}", path.display()))
}

fn yes_no(ok: bool) -> &'static str {
    if ok {
        "yes"
    } else {
        "no"
    }
}

fn finish(
    command: &'static str,
    ok: bool,
    lines: Vec<String>,
    data: serde_json::Value,
) -> Result<CmdOutput, String> {
    Ok(if ok {
        CmdOutput::passed(command, lines, data)
    } else {
        CmdOutput::failed(command, lines, data)
    })
}

fn density(desc: &str, horizons: &[u64], csv: Option<&Path>) -> Result<CmdOutput, String> {
    let d = parse_descriptor(desc)?;
    let mut lines = vec![
        format!("coalition: {}", coalition_text(&d)),
        "property: the member share below n approaches the coalition's density".to_string(),
    ];
    let mut rows = vec![];
    let mut samples = vec![];
    for &n in horizons {
        let share = crate::density::alpha(&d, n).map_err(|e| e.to_string())?;
        let count = d.count_upto(n).map_err(|e| e.to_string())?;
        lines.push(format!("n={n}: members {count}, share {share}"));
        rows.push(vec![n.to_string(), count.to_string(), share.to_string()]);
        samples.push(json!({
            "horizon": n,
            "count": count,
            "alpha": share.to_string(),
        }));
    }
    let bounds = crate::density::density_bounds(&d, horizons).map_err(|e| e.to_string())?;
    let (lo, hi) = bounds.window;
    let limit = match bounds.exact {
        Some(x) => {
            lines.push(format!("limit: exactly {x} (window {lo}..{hi})"));
            json!({ "exact": x.to_string() })
        }
        None => {
            lines.push(format!(
                "limit: between {} and {} (window {lo}..{hi})",
                bounds.lower, bounds.upper
            ));
            json!({ "lower": bounds.lower.to_string(), "upper": bounds.upper.to_string() })
        }
    };
    if let Some(path) = csv {
        lines.push(write_csv(path, &["horizon", "count", "alpha"], &rows)?);
    }
    let data = json!({
        "coalition": coalition_text(&d),
        "samples": samples,
        "limit": limit,
    });
    finish("density", true, lines, data)
}

fn triples(desc: &str, horizon: u64, csv: Option<&Path>) -> Result<CmdOutput, String> {
    let d = parse_descriptor(desc)?;
    let starts = crate::density::find_triples(&d, horizon).map_err(|e| e.to_string())?;
    let mut lines = vec![
        format!("coalition: {}", coalition_text(&d)),
        "property: every listed n starts three consecutive members n, n+1, n+2".to_string(),
        format!("found {} up to {horizon}", starts.len()),
    ];
    if !starts.is_empty() {
        let shown: Vec<String> = starts.iter().take(8).map(u64::to_string).collect();
        let ellipsis = if starts.len() > 8 { ", ..." } else { "" };
        lines.push(format!("first: {}{ellipsis}", shown.join(", ")));
    }
    if let Some(path) = csv {
        let rows: Vec<Vec<String>> = starts.iter().map(|s| vec![s.to_string()]).collect();
        lines.push(write_csv(path, &["start"], &rows)?);
    }
    let data = json!({
        "coalition": coalition_text(&d),
        "horizon": horizon,
        "found": starts.len(),
        "starts": starts,
    });
    finish("triples", true, lines, data)
}

fn irrelevance(file: &Path, csv: Option<&Path>) -> Result<CmdOutput, String> {
    let doc = load_doc(file)?;
    let mut lines = vec![
        "property: pinning every coordinate outside the coalition settles the outcome"
            .to_string(),
    ];
    let mut rows = vec![];
    let mut entries = vec![];
    let mut served = 0usize;
    for run in doc.runs() {
        let RunSpec::Irrelevance {
            choice,
            coalition,
            condition,
        } = &run.spec
        else {
            continue;
        };
        served += 1;
        let verdict = is_irrelevant(choice, coalition, condition)
            .map_err(|e| format!("line {}: {}: {e}", run.line, run.call))?;
        let (text, cell) = match &verdict {
            Irrelevance::Irrelevant { value } => (
                format!("irrelevant, outcome pinned to {value}"),
                format!("irrelevant value={value}"),
            ),
            Irrelevance::Relevant { witnesses } => {
                let a = choice.eval(&witnesses.0);
                let b = choice.eval(&witnesses.1);
                (
                    format!("relevant, completions reach outcomes {a} and {b}"),
                    "relevant".to_string(),
                )
            }
        };
        lines.push(format!("line {}: {}: {text}", run.line, run.call));
        rows.push(vec![run.line.to_string(), run.call.clone(), cell.clone()]);
        entries.push(json!({ "line": run.line, "call": run.call, "verdict": cell }));
    }
    if served == 0 {
        lines.push("no irrelevance requests in the document".to_string());
    }
    if let Some(path) = csv {
        lines.push(write_csv(path, &["line", "call", "verdict"], &rows)?);
    }
    finish("irrelevance", true, lines, json!({ "requests": entries }))
}

fn antidem(file: &Path, csv: Option<&Path>) -> Result<CmdOutput, String> {
    let doc = load_doc(file)?;
    let mut lines = vec![
        "property: some coalition in the family is silenced by one outside assignment"
            .to_string(),
    ];
    let mut rows = vec![];
    let mut entries = vec![];
    let mut served = 0usize;
    for run in doc.runs() {
        let RunSpec::AntiDemocratic { choice, family } = &run.spec else {
            continue;
        };
        served += 1;
        let verdict = is_anti_democratic(choice, family)
            .map_err(|e| format!("line {}: {}: {e}", run.line, run.call))?;
        let (text, cell, witness) = match &verdict {
            AntiDemocracy::Yes { coalition, .. } => {
                let w = coalition_text(coalition);
                (
                    format!("anti-democratic, coalition {w} has no say"),
                    "anti-democratic".to_string(),
                    w,
                )
            }
            AntiDemocracy::NoWithinSearchSpace => (
                "nothing silenced within the search space".to_string(),
                "no-within-search-space".to_string(),
                String::new(),
            ),
        };
        lines.push(format!("line {}: {}: {text}", run.line, run.call));
        rows.push(vec![
            run.line.to_string(),
            run.call.clone(),
            cell.clone(),
            witness.clone(),
        ]);
        entries.push(json!({
            "line": run.line,
            "call": run.call,
            "verdict": cell,
            "witness": witness,
        }));
    }
    if served == 0 {
        lines.push("no antidem requests in the document".to_string());
    }
    if let Some(path) = csv {
        lines.push(write_csv(path, &["line", "call", "verdict", "witness"], &rows)?);
    }
    finish("antidem", true, lines, json!({ "requests": entries }))
}

fn build_tree(
    delta: Q,
    rounds: usize,
    oracle_specs: &[String],
    csv: Option<&Path>,
) -> Result<CmdOutput, String> {
    let listed: Vec<DenseOracle> = oracle_specs
        .iter()
        .map(|s| parse_oracle(s))
        .collect::<Result<_, _>>()?;
    // One oracle per round; a short list repeats cyclically.
    let oracles: Vec<DenseOracle> = listed
        .iter()
        .cycle()
        .take(rounds.max(listed.len()))
        .cloned()
        .collect();
    let mut lines = vec![
        format!(
            "delta {delta}, rounds {rounds}, oracles {}",
            oracle_specs.join(" ")
        ),
        "property: round n keeps every oracle met and the splitting share at least delta*(1 - 1/n)"
            .to_string(),
    ];
    let run = match build_delta_tree(&oracles, delta, rounds) {
        Ok(run) => run,
        Err(e) => {
            lines.push(format!("refused: {e}"));
            return finish("build-tree", false, lines, json!({ "refused": e.to_string() }));
        }
    };
    let mut ok = true;
    let mut audit = vec![];
    for row in &run.audit {
        let cleared = row.ratio >= row.bound && row.inside_certified;
        ok &= cleared;
        lines.push(format!(
            "round {}: lev {}, ht {}, share {} vs bound {}, inside: {}: {}",
            row.round,
            row.lev,
            row.ht,
            row.ratio,
            row.bound,
            yes_no(row.inside_certified),
            yes_no(cleared)
        ));
        audit.push(json!({
            "round": row.round,
            "lev": row.lev,
            "ht": row.ht,
            "ratio": row.ratio.to_string(),
            "bound": row.bound.to_string(),
            "inside_certified": row.inside_certified,
        }));
    }
    let covered = listed.iter().all(|o| run.tree.guaranteed_inside(o));
    ok &= covered;
    lines.push(format!(
        "tree: ht {}, cells {}, terminals {}",
        run.tree.ht(),
        run.tree.cells(),
        run.tree.terminal_count()
    ));
    lines.push(format!(
        "every terminal inside all {} oracles: {}",
        listed.len(),
        yes_no(covered)
    ));
    if let Some(path) = csv {
        fs::write(path, audit_csv(&run.audit))
            .map_err(|e| format!("{}: {e}", path.display()))?;
        lines.push(format!("wrote {}", path.display()));
    }
    let data = json!({
        "delta": delta.to_string(),
        "rounds": rounds,
        "audit": audit,
        "ht": run.tree.ht(),
        "cells": run.tree.cells(),
        "terminals": run.tree.terminal_count().to_string(),
        "inside_all_oracles": covered,
    });
    finish("build-tree", ok, lines, data)
}

fn escape(file: &Path, depth: u64, csv: Option<&Path>) -> Result<CmdOutput, String> {
    let doc = load_doc(file)?;
    let mut lines = vec![
        "property: the stream obeys the condition yet escapes the level-n capture set"
            .to_string(),
    ];
    let mut ok = true;
    let mut rows = vec![];
    let mut entries = vec![];
    let mut served = 0usize;
    for run in doc.runs() {
        let RunSpec::Escape { condition } = &run.spec else {
            continue;
        };
        served += 1;
        let w = match escape_witness(condition, depth) {
            Ok(w) => w,
            Err(e) => {
                ok = false;
                lines.push(format!("line {}: {}: refused: {e}", run.line, run.call));
                entries.push(json!({
                    "line": run.line,
                    "call": run.call,
                    "refused": e.to_string(),
                }));
                continue;
            }
        };
        let stream = w.as_stream();
        let audit_depth = depth.min(w.prefix.len() as u64);
        let inside = matches!(
            cylinder_member(&stream, &condition.clone().cylinder(), audit_depth)
                .map_err(|e| format!("line {}: {}: {e}", run.line, run.call))?,
            Membership::AgreesToDepth(_)
        );
        let outside = matches!(
            in_cn(&stream, w.n, depth, default_value_bound(condition, depth)),
            CnMembership::OutsideUpToBounds { .. }
        );
        ok &= inside && outside;
        lines.push(format!(
            "line {}: {}: level {}, prefix {} long, inside condition: {}, outside staircase: {}",
            run.line,
            run.call,
            w.n,
            w.prefix.len(),
            yes_no(inside),
            yes_no(outside)
        ));
        rows.push(vec![
            run.line.to_string(),
            run.call.clone(),
            w.n.to_string(),
            w.prefix.len().to_string(),
            yes_no(inside).to_string(),
            yes_no(outside).to_string(),
        ]);
        entries.push(json!({
            "line": run.line,
            "call": run.call,
            "level": w.n,
            "prefix_len": w.prefix.len(),
            "inside_condition": inside,
            "outside_staircase": outside,
        }));
    }
    if served == 0 {
        lines.push("no escape requests in the document".to_string());
    }
    if let Some(path) = csv {
        lines.push(write_csv(
            path,
            &[
                "line",
                "call",
                "level",
                "prefix_len",
                "inside_condition",
                "outside_staircase",
            ],
            &rows,
        )?);
    }
    finish("escape", ok, lines, json!({ "requests": entries }))
}

fn witness_f(
    inside: bool,
    out: bool,
    file: &Path,
    levels: u64,
    depth: u64,
    csv: Option<&Path>,
) -> Result<CmdOutput, String> {
    if !inside && !out {
        return Err("witness-f needs --in or --out".into());
    }
    let doc = load_doc(file)?;
    let direction = if inside { "in" } else { "out" };
    let mut lines = vec![if inside {
        "property: zero-filling the free coordinates lands inside every audited capture level"
            .to_string()
    } else {
        "property: the jump-valued stream obeys the condition and dodges the level-n capture set"
            .to_string()
    }];
    let mut ok = true;
    let mut rows = vec![];
    let mut entries = vec![];
    let mut served = 0usize;
    for run in doc.runs() {
        let condition = match &run.spec {
            RunSpec::WitnessIn { condition } if inside => condition,
            RunSpec::WitnessOut { condition } if out => condition,
            _ => continue,
        };
        served += 1;
        let outcome: Result<(String, bool), String> = if inside {
            witness_in_f(condition, levels)
                .map(|x| {
                    let window: Vec<String> =
                        x.window(12).iter().map(u64::to_string).collect();
                    (
                        format!(
                            "captured at every level below {levels}, window {}",
                            window.join("")
                        ),
                        true,
                    )
                })
                .map_err(|e| e.to_string())
        } else {
            witness_out_f(condition, levels, depth)
                .map_err(|e| e.to_string())
                .and_then(|w| {
                    let stream = w.as_stream();
                    let audit_depth = depth.min(w.prefix.len() as u64);
                    let agrees = matches!(
                        cylinder_member(&stream, &condition.clone().cylinder(), audit_depth)
                            .map_err(|e| e.to_string())?,
                        Membership::AgreesToDepth(_)
                    );
                    let outside = matches!(
                        in_cn(&stream, w.n, depth, default_value_bound(condition, depth)),
                        CnMembership::OutsideUpToBounds { .. }
                    );
                    Ok((
                        format!(
                            "outside level {}, inside condition: {}, outside staircase: {}",
                            w.n,
                            yes_no(agrees),
                            yes_no(outside)
                        ),
                        agrees && outside,
                    ))
                })
        };
        let (text, passed) = match outcome {
            Ok(pair) => pair,
            Err(e) => (format!("refused: {e}"), false),
        };
        ok &= passed;
        lines.push(format!("line {}: {}: {text}", run.line, run.call));
        let cell = if passed { "confirmed" } else { "failed" };
        rows.push(vec![
            run.line.to_string(),
            run.call.clone(),
            direction.to_string(),
            levels.to_string(),
            cell.to_string(),
        ]);
        entries.push(json!({
            "line": run.line,
            "call": run.call,
            "direction": direction,
            "levels": levels,
            "verdict": cell,
            "detail": text,
        }));
    }
    if served == 0 {
        lines.push(format!("no witness_{direction} requests in the document"));
    }
    if let Some(path) = csv {
        lines.push(write_csv(
            path,
            &["line", "call", "direction", "levels", "verdict"],
            &rows,
        )?);
    }
    finish("witness-f", ok, lines, json!({ "requests": entries }))
}

fn variant_label(v: Variant) -> &'static str {
    match v {
        Variant::EquityAnonymity => "equity-anonymity",
        Variant::ParetoAnonymity => "pareto-anonymity",
    }
}

fn swr_witness(
    case: CaseArg,
    variant: VariantArg,
    file: &Path,
    delta: Q,
    cert_dir: Option<&Path>,
    csv: Option<&Path>,
) -> Result<CmdOutput, String> {
    let case = match case {
        CaseArg::Eo => CaseAssumption::EvenOnTop,
        CaseArg::Oe => CaseAssumption::OddOnTop,
        CaseArg::Sim => CaseAssumption::Tied,
    };
    let variant = match variant {
        VariantArg::Sefa => Variant::EquityAnonymity,
        VariantArg::Pfa => Variant::ParetoAnonymity,
    };
    let doc = load_doc(file)?;
    if let Some(dir) = cert_dir {
        fs::create_dir_all(dir).map_err(|e| format!("{}: {e}", dir.display()))?;
    }
    let mut lines = vec![
        "property: the companion shares the condition and the derivations force the claimed ranking"
            .to_string(),
        format!(
            "case {case}, variant {}, delta {delta}",
            variant_label(variant)
        ),
    ];
    let mut ok = true;
    let mut rows = vec![];
    let mut entries = vec![];
    let mut served = 0usize;
    for run in doc.runs() {
        let RunSpec::SwrWitness { condition } = &run.spec else {
            continue;
        };
        served += 1;
        let bundle = match case_witness(condition, delta, case, variant) {
            Ok(b) => b,
            Err(e) => {
                ok = false;
                lines.push(format!("line {}: {}: refused: {e}", run.line, run.call));
                entries.push(json!({
                    "line": run.line,
                    "call": run.call,
                    "refused": e.to_string(),
                }));
                continue;
            }
        };
        let single = bundle
            .dropped_single
            .map_or("none".to_string(), |s| s.to_string());
        let pairs: Vec<String> = bundle.dropped_pairs.iter().map(u64::to_string).collect();
        lines.push(format!(
            "line {}: {}: dropped single {single}, pairs [{}], permutation {}",
            run.line,
            run.call,
            pairs.join(", "),
            bundle.permutation
        ));
        lines.push(format!(
            "  base in class: {}, companion in class: {}",
            yes_no(bundle.base_in_class),
            yes_no(bundle.companion_in_class)
        ));
        let mut checks = vec![];
        for (which, d) in bundle.derivations.iter().enumerate() {
            let verdict = check_derivation(d);
            let passed = verdict.as_ref().is_ok_and(|&r| r == d.claimed);
            ok &= passed;
            let conclusion = match &verdict {
                Ok(r) => r.to_string(),
                Err(e) => format!("rejected: {e}"),
            };
            lines.push(format!(
                "  derivation {}: {} steps, concludes {conclusion}: {}",
                which + 1,
                d.steps.len(),
                yes_no(passed)
            ));
            rows.push(vec![
                run.line.to_string(),
                run.call.clone(),
                case.to_string(),
                variant_label(variant).to_string(),
                (which + 1).to_string(),
                d.steps.len().to_string(),
                conclusion.clone(),
            ]);
            checks.push(json!({
                "derivation": which + 1,
                "steps": d.steps.len(),
                "conclusion": conclusion,
                "passed": passed,
            }));
            if let Some(dir) = cert_dir {
                let path: PathBuf =
                    dir.join(format!("swr-line{}-d{}.cert", run.line, which + 1));
                fs::write(&path, CertDocument::from_derivation(d).print())
                    .map_err(|e| format!("{}: {e}", path.display()))?;
                lines.push(format!("  wrote {}", path.display()));
            }
        }
        entries.push(json!({
            "line": run.line,
            "call": run.call,
            "dropped_single": bundle.dropped_single,
            "dropped_pairs": bundle.dropped_pairs,
            "permutation": bundle.permutation.to_string(),
            "base_in_class": bundle.base_in_class,
            "companion_in_class": bundle.companion_in_class,
            "derivations": checks,
        }));
    }
    if served == 0 {
        lines.push("no swr_witness requests in the document".to_string());
    }
    if let Some(path) = csv {
        lines.push(write_csv(
            path,
            &[
                "line",
                "call",
                "case",
                "variant",
                "derivation",
                "steps",
                "conclusion",
            ],
            &rows,
        )?);
    }
    let data = json!({
        "case": case.to_string(),
        "variant": variant_label(variant),
        "delta": delta.to_string(),
        "requests": entries,
    });
    finish("swr-witness", ok, lines, data)
}

fn check_cert(file: &Path, csv: Option<&Path>) -> Result<CmdOutput, String> {
    let text =
        fs::read_to_string(file).map_err(|e| format!("{}: {e}", file.display()))?;
    let doc =
        CertDocument::parse(&text).map_err(|e| format!("{}: {e}", file.display()))?;
    let mut lines = vec![
        format!("file: {}", file.display()),
        "property: each step re-checks and the chain supports its printed conclusion"
            .to_string(),
    ];
    let verdict = check_certificate(&doc);
    let (ok, conclusion) = match &verdict {
        Ok(relation) => {
            lines.push(format!("valid: conclusion {relation}"));
            (true, relation.to_string())
        }
        Err(e) => {
            lines.push(format!("invalid: {e}"));
            (false, doc.conclusion.to_string())
        }
    };
    if let Some(path) = csv {
        let rows = vec![vec![
            file.display().to_string(),
            conclusion.clone(),
            yes_no(ok).to_string(),
        ]];
        lines.push(write_csv(path, &["file", "conclusion", "valid"], &rows)?);
    }
    let data = json!({
        "file": file.display().to_string(),
        "conclusion": conclusion,
        "valid": ok,
        "streams": doc.streams.len(),
        "steps": doc.steps.len(),
    });
    finish("check-cert", ok, lines, data)
}

fn forcing_meet(
    oracle_specs: &[String],
    k: u64,
    height: u64,
    csv: Option<&Path>,
) -> Result<CmdOutput, String> {
    if oracle_specs.is_empty() {
        return Err("forcing --meet needs at least one --oracle".into());
    }
    let oracles: Vec<DenseOracle> = oracle_specs
        .iter()
        .map(|s| parse_oracle(s))
        .collect::<Result<_, _>>()?;
    let mut current = UniformFiniteTree::cube(k, height).map_err(|e| e.to_string())?;
    let mut lines = vec![
        "property: each meet end-extends the last and every terminal lands inside each oracle's image"
            .to_string(),
        format!(
            "start: cube k={k} height={height}, {} terminals",
            current.tree().term().len()
        ),
    ];
    let mut ok = true;
    let mut rows = vec![];
    let mut steps = vec![];
    for (index, (spec, oracle)) in oracle_specs.iter().zip(&oracles).enumerate() {
        let next = match meet_dense(&current, oracle) {
            Ok(next) => next,
            Err(e) => {
                ok = false;
                lines.push(format!("step {}: {spec}: refused: {e}", index + 1));
                steps.push(json!({
                    "step": index + 1,
                    "oracle": spec,
                    "refused": e.to_string(),
                }));
                continue;
            }
        };
        let extends = next.end_extends(&current);
        let covered = next.tree().term().iter().all(|t| oracle.inside(t));
        ok &= extends && covered;
        lines.push(format!(
            "step {}: {spec}: ht {}, terminals {}, end-extends: {}, inside: {}",
            index + 1,
            next.terminal_len(),
            next.tree().term().len(),
            yes_no(extends),
            yes_no(covered)
        ));
        rows.push(vec![
            (index + 1).to_string(),
            spec.clone(),
            next.terminal_len().to_string(),
            next.tree().term().len().to_string(),
        ]);
        steps.push(json!({
            "step": index + 1,
            "oracle": spec,
            "height": next.terminal_len(),
            "terminals": next.tree().term().len(),
            "end_extends": extends,
            "inside": covered,
        }));
        current = next;
    }
    let all_inside = ok
        && oracles
            .iter()
            .all(|o| current.tree().term().iter().all(|t| o.inside(t)));
    ok &= all_inside;
    lines.push(format!(
        "final: every terminal inside all {} oracles: {}",
        oracles.len(),
        yes_no(all_inside)
    ));
    if let Some(path) = csv {
        lines.push(write_csv(path, &["step", "oracle", "height", "terminals"], &rows)?);
    }
    let data = json!({
        "k": k,
        "height": height,
        "steps": steps,
        "inside_all_oracles": all_inside,
    });
    finish("forcing", ok, lines, data)
}

fn forcing_densify(
    delta: Option<Q>,
    exponent: u32,
    spine_start: u64,
    csv: Option<&Path>,
) -> Result<CmdOutput, String> {
    let delta = delta.ok_or("forcing --densify needs --delta")?;
    let spine_source = PartialAssignment::new(
        Alphabet::Bounded(2),
        CoalitionDescriptor::arith(spine_start, 1),
        Default::default(),
        EventuallyPeriodicSeq::constant(Alphabet::Bounded(2), 1),
    )
    .map_err(|e| e.to_string())?;
    let spine = SpineMap::new(spine_source).map_err(|e| e.to_string())?;
    let root = UniformFiniteTree::cube(2, 0).map_err(|e| e.to_string())?;
    let mut lines = vec![
        "property: boosting exponent k lifts the audited splitting share to at least delta*(1 - 2^-k)"
            .to_string(),
        format!("delta {delta}, spine start {spine_start}"),
    ];
    let mut ok = true;
    let mut rows = vec![];
    let mut stages = vec![];
    for k in 1..=exponent {
        let boosted = match densify(&root, delta, k, &spine) {
            Ok(p) => p,
            Err(e) => {
                ok = false;
                lines.push(format!("k={k}: refused: {e}"));
                stages.push(json!({ "exponent": k, "refused": e.to_string() }));
                continue;
            }
        };
        let report = spine.preimage_report(&boosted).map_err(|e| e.to_string())?;
        let bound = delta * (q(1, 1) - q(1, 1u64 << k));
        let cleared = report.ratio >= bound;
        ok &= cleared;
        lines.push(format!(
            "k={k}: ht {}, lev {}, share {} vs bound {}: {}",
            report.ht,
            report.lev.len(),
            report.ratio,
            bound,
            yes_no(cleared)
        ));
        rows.push(vec![
            k.to_string(),
            report.ht.to_string(),
            report.ratio.to_string(),
            bound.to_string(),
        ]);
        stages.push(json!({
            "exponent": k,
            "height": report.ht,
            "lev": report.lev.len(),
            "ratio": report.ratio.to_string(),
            "bound": bound.to_string(),
            "cleared": cleared,
        }));
    }
    if let Some(path) = csv {
        lines.push(write_csv(path, &["exponent", "height", "ratio", "bound"], &rows)?);
    }
    let data = json!({
        "delta": delta.to_string(),
        "spine_start": spine_start,
        "stages": stages,
    });
    finish("forcing", ok, lines, data)
}
