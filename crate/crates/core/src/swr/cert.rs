//! Line-oriented serialization of derivations.
//!
//! A certificate names every distinct stream once, lists the steps against
//! those names, and closes with the claimed conclusion:
//!
//! ```text
//! alphabet 4
//! stream s0 prefix=0,3 period=2
//! stream s1 prefix=1,2 period=2
//! step SE i=0 j=1 from=s0 to=s1
//! conclusion strict
//! ```
//!
//! Blank lines and `#` comments are skipped on input and never emitted, so
//! printing a parsed document reproduces the canonical bytes.

use std::fmt::Write as _;

use thiserror::Error;

use super::perm::{FinitePermutation, PermError};
use super::steps::{
    check_derivation, Derivation, DerivationError, DerivationStep, Relation, StepKind,
};
use super::UtilityStream;
use crate::seqcore::{Alphabet, EventuallyPeriodicSeq, StreamError};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CertError {
    #[error("certificate has no content")]
    Empty,
    #[error("line {line}: {detail}")]
    Malformed { line: usize, detail: String },
    #[error("step refers to undeclared stream {name}")]
    UnknownStream { name: String },
    #[error("stream {name} is declared twice")]
    DuplicateStream { name: String },
    #[error("certificate has no conclusion line")]
    MissingConclusion,
    #[error(transparent)]
    Stream(#[from] StreamError),
    #[error(transparent)]
    Permutation(#[from] PermError),
    #[error(transparent)]
    Audit(#[from] DerivationError),
}

/// One serialized step; the relation is implied by the kind.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CertStep {
    pub kind: StepKind,
    pub from: String,
    pub to: String,
}

/// A parsed or generated certificate.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CertDocument {
    pub alphabet: u64,
    pub streams: Vec<(String, UtilityStream)>,
    pub steps: Vec<CertStep>,
    pub conclusion: Relation,
}

fn relation_of(kind: &StepKind) -> Relation {
    match kind {
        StepKind::Anonymity(_) => Relation::Equivalent,
        StepKind::Equity { .. } => Relation::StrictlyBelow,
        StepKind::Dominance => Relation::StrictlyBelow,
    }
}

fn join(values: &[u64]) -> String {
    values
        .iter()
        .map(u64::to_string)
        .collect::<Vec<_>>()
        .join(",")
}

fn is_name(s: &str) -> bool {
    !s.is_empty() && s.chars().all(|c| c.is_ascii_alphanumeric() || c == '_')
}

impl CertDocument {
    /// Serialize a derivation, naming distinct streams `s0, s1, ...` in
    /// order of first appearance.
    pub fn from_derivation(d: &Derivation) -> CertDocument {
        let alphabet = match d
            .start()
            .expect("certificates require at least one step")
            .alphabet()
        {
            Alphabet::Bounded(k) => k,
            Alphabet::Unbounded => panic!("certificates require a bounded alphabet"),
        };
        let mut streams: Vec<(String, UtilityStream)> = Vec::new();
        let name_of = |s: &UtilityStream, streams: &mut Vec<(String, UtilityStream)>| {
            if let Some((name, _)) = streams.iter().find(|(_, t)| t == s) {
                return name.clone();
            }
            let name = format!("s{}", streams.len());
            streams.push((name.clone(), s.clone()));
            name
        };
        let steps = d
            .steps
            .iter()
            .map(|step| CertStep {
                kind: step.kind.clone(),
                from: name_of(&step.source, &mut streams),
                to: name_of(&step.target, &mut streams),
            })
            .collect();
        CertDocument {
            alphabet,
            streams,
            steps,
            conclusion: d.claimed,
        }
    }

    /// Canonical text; `parse` inverts this byte-for-byte.
    pub fn print(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "alphabet {}", self.alphabet);
        for (name, s) in &self.streams {
            let _ = writeln!(
                out,
                "stream {name} prefix={} period={}",
                join(s.prefix()),
                join(s.period())
            );
        }
        for step in &self.steps {
            match &step.kind {
                StepKind::Anonymity(p) => {
                    let _ = writeln!(out, "step FA perm={p} from={} to={}", step.from, step.to);
                }
                StepKind::Equity { i, j } => {
                    let _ = writeln!(
                        out,
                        "step SE i={i} j={j} from={} to={}",
                        step.from, step.to
                    );
                }
                StepKind::Dominance => {
                    let _ = writeln!(out, "step P from={} to={}", step.from, step.to);
                }
            }
        }
        let _ = writeln!(out, "conclusion {}", self.conclusion);
        out
    }

    pub fn parse(text: &str) -> Result<CertDocument, CertError> {
        let mut alphabet: Option<u64> = None;
        let mut streams: Vec<(String, UtilityStream)> = Vec::new();
        let mut steps: Vec<CertStep> = Vec::new();
        let mut conclusion: Option<Relation> = None;
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let bad = |detail: &str| CertError::Malformed {
                line,
                detail: detail.to_string(),
            };
            let trimmed = raw.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let tokens: Vec<&str> = trimmed.split_whitespace().collect();
            let head = tokens[0];
            if alphabet.is_none() && head != "alphabet" {
                return Err(bad("the alphabet line must come first"));
            }
            match head {
                "alphabet" => {
                    if alphabet.is_some() {
                        return Err(bad("alphabet is already set"));
                    }
                    let [_, value] = tokens[..] else {
                        return Err(bad("expected: alphabet <levels>"));
                    };
                    let k = value.parse().map_err(|_| bad("expected a level count"))?;
                    alphabet = Some(k);
                }
                "stream" => {
                    let [_, name, prefix, period] = tokens[..] else {
                        return Err(bad("expected: stream <name> prefix=... period=..."));
                    };
                    if !is_name(name) {
                        return Err(bad("stream names are alphanumeric"));
                    }
                    if streams.iter().any(|(n, _)| n == name) {
                        return Err(CertError::DuplicateStream {
                            name: name.to_string(),
                        });
                    }
                    let prefix = parse_values(prefix, "prefix").map_err(|d| bad(&d))?;
                    let period = parse_values(period, "period").map_err(|d| bad(&d))?;
                    let k = alphabet.expect("checked above");
                    let s = EventuallyPeriodicSeq::new(Alphabet::Bounded(k), prefix, period)?;
                    streams.push((name.to_string(), s));
                }
                "step" => {
                    let rest = &tokens[1..];
                    let kind_tok = rest.first().ok_or_else(|| bad("expected a step kind"))?;
                    let (kind, tail) = match *kind_tok {
                        "FA" => {
                            // The cycle notation contains spaces; rejoin up
                            // to the endpoint tokens.
                            let cut = rest
                                .iter()
                                .position(|t| t.starts_with("from="))
                                .ok_or_else(|| bad("expected from=<stream>"))?;
                            let perm_text = rest[1..cut].join(" ");
                            let perm_text = perm_text
                                .strip_prefix("perm=")
                                .ok_or_else(|| bad("expected perm=<cycles>"))?;
                            let perm: FinitePermutation = perm_text.parse()?;
                            (StepKind::Anonymity(perm), &rest[cut..])
                        }
                        "SE" => {
                            let [_, i, j, ..] = rest[..] else {
                                return Err(bad("expected: SE i=<n> j=<n>"));
                            };
                            let i = parse_kv(i, "i").map_err(|d| bad(&d))?;
                            let j = parse_kv(j, "j").map_err(|d| bad(&d))?;
                            (StepKind::Equity { i, j }, &rest[3..])
                        }
                        "P" => (StepKind::Dominance, &rest[1..]),
                        _ => return Err(bad("step kinds are FA, SE, P")),
                    };
                    let [from, to] = tail else {
                        return Err(bad("expected: from=<stream> to=<stream>"));
                    };
                    let from = expect_key(from, "from").map_err(|d| bad(&d))?;
                    let to = expect_key(to, "to").map_err(|d| bad(&d))?;
                    for name in [from, to] {
                        if !streams.iter().any(|(n, _)| n == name) {
                            return Err(CertError::UnknownStream {
                                name: name.to_string(),
                            });
                        }
                    }
                    steps.push(CertStep {
                        kind,
                        from: from.to_string(),
                        to: to.to_string(),
                    });
                }
                "conclusion" => {
                    let [_, word] = tokens[..] else {
                        return Err(bad("expected: conclusion strict|equiv"));
                    };
                    conclusion = Some(match word {
                        "strict" => Relation::StrictlyBelow,
                        "equiv" => Relation::Equivalent,
                        _ => return Err(bad("expected: conclusion strict|equiv")),
                    });
                }
                _ => return Err(bad("lines start with alphabet, stream, step, conclusion")),
            }
        }
        let Some(alphabet) = alphabet else {
            return Err(CertError::Empty);
        };
        let conclusion = conclusion.ok_or(CertError::MissingConclusion)?;
        Ok(CertDocument {
            alphabet,
            streams,
            steps,
            conclusion,
        })
    }

    /// Rebuild the derivation this certificate describes.
    pub fn to_derivation(&self) -> Result<Derivation, CertError> {
        let lookup = |name: &str| {
            self.streams
                .iter()
                .find(|(n, _)| n == name)
                .map(|(_, s)| s.clone())
                .ok_or_else(|| CertError::UnknownStream {
                    name: name.to_string(),
                })
        };
        let mut steps = Vec::with_capacity(self.steps.len());
        for step in &self.steps {
            steps.push(DerivationStep {
                relation: relation_of(&step.kind),
                kind: step.kind.clone(),
                source: lookup(&step.from)?,
                target: lookup(&step.to)?,
            });
        }
        Ok(Derivation::new(steps, self.conclusion))
    }
}

fn parse_values(token: &str, key: &str) -> Result<Vec<u64>, String> {
    let body = token
        .strip_prefix(&format!("{key}="))
        .ok_or_else(|| format!("expected {key}=..."))?;
    if body.is_empty() {
        return Ok(Vec::new());
    }
    body.split(',')
        .map(|v| v.parse().map_err(|_| format!("expected a number in {key}")))
        .collect()
}

fn parse_kv(token: &str, key: &str) -> Result<u64, String> {
    expect_key(token, key)?
        .parse()
        .map_err(|_| format!("expected a number after {key}="))
}

fn expect_key<'a>(token: &'a str, key: &str) -> Result<&'a str, String> {
    token
        .strip_prefix(&format!("{key}="))
        .ok_or_else(|| format!("expected {key}=..."))
}

/// Replay a certificate and report the relation its chain proves.
pub fn check_certificate(doc: &CertDocument) -> Result<Relation, CertError> {
    Ok(check_derivation(&doc.to_derivation()?)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seqcore::PartialAssignment;
    use crate::swr::witness::{case_witness, CaseAssumption};
    use crate::swr::Variant;
    use crate::q;

    fn four(prefix: &[u64], period: &[u64]) -> UtilityStream {
        EventuallyPeriodicSeq::new(Alphabet::Bounded(4), prefix.to_vec(), period.to_vec())
            .unwrap()
    }

    fn one_transfer() -> Derivation {
        Derivation::new(
            vec![DerivationStep {
                kind: StepKind::Equity { i: 0, j: 1 },
                source: four(&[0, 3], &[2]),
                target: four(&[1, 2], &[2]),
                relation: Relation::StrictlyBelow,
            }],
            Relation::StrictlyBelow,
        )
    }

    #[test]
    fn canonical_text_is_exact() {
        let doc = CertDocument::from_derivation(&one_transfer());
        let expected = "alphabet 4\n\
                        stream s0 prefix=0,3 period=2\n\
                        stream s1 prefix=1,2 period=2\n\
                        step SE i=0 j=1 from=s0 to=s1\n\
                        conclusion strict\n";
        assert_eq!(doc.print(), expected);
        assert_eq!(CertDocument::parse(expected).unwrap(), doc);
    }

    #[test]
    fn shared_endpoints_are_named_once() {
        let a = four(&[0, 3], &[2]);
        let b = four(&[1, 2], &[2]);
        let c = four(&[1, 2], &[3]);
        let d = Derivation::new(
            vec![
                DerivationStep {
                    kind: StepKind::Equity { i: 0, j: 1 },
                    source: a,
                    target: b.clone(),
                    relation: Relation::StrictlyBelow,
                },
                DerivationStep {
                    kind: StepKind::Dominance,
                    source: b,
                    target: c,
                    relation: Relation::StrictlyBelow,
                },
            ],
            Relation::StrictlyBelow,
        );
        let doc = CertDocument::from_derivation(&d);
        assert_eq!(doc.streams.len(), 3);
        assert_eq!(doc.steps[0].to, doc.steps[1].from);
    }

    #[test]
    fn witness_bundles_round_trip_through_text() {
        let f = PartialAssignment::unconstrained(Alphabet::Bounded(2));
        for variant in [Variant::EquityAnonymity, Variant::ParetoAnonymity] {
            let w = case_witness(&f, q(3, 4), CaseAssumption::EvenOnTop, variant).unwrap();
            for d in &w.derivations {
                let doc = CertDocument::from_derivation(d);
                let text = doc.print();
                let parsed = CertDocument::parse(&text).unwrap();
                assert_eq!(parsed, doc);
                assert_eq!(parsed.print(), text);
                assert_eq!(
                    check_certificate(&parsed).unwrap(),
                    Relation::StrictlyBelow
                );
                assert_eq!(parsed.to_derivation().unwrap(), *d);
            }
        }
    }

    #[test]
    fn comments_and_blank_lines_are_skipped() {
        let noisy = "# audit trail\n\nalphabet 4\n\n\
                     stream s0 prefix=0,3 period=2\n# endpoints\n\
                     stream s1 prefix=1,2 period=2\n\
                     step SE i=0 j=1 from=s0 to=s1\n\n\
                     conclusion strict\n";
        let doc = CertDocument::parse(noisy).unwrap();
        assert_eq!(doc, CertDocument::from_derivation(&one_transfer()));
    }

    #[test]
    fn name_problems_are_reported() {
        let unknown = "alphabet 4\nstream s0 prefix= period=1\n\
                       step P from=s0 to=s9\nconclusion strict\n";
        assert_eq!(
            CertDocument::parse(unknown).unwrap_err(),
            CertError::UnknownStream {
                name: "s9".to_string()
            }
        );
        let duplicated = "alphabet 2\nstream s0 prefix= period=1\n\
                          stream s0 prefix= period=0\nconclusion equiv\n";
        assert_eq!(
            CertDocument::parse(duplicated).unwrap_err(),
            CertError::DuplicateStream {
                name: "s0".to_string()
            }
        );
    }

    #[test]
    fn malformed_lines_carry_their_number() {
        let bad_kv = "alphabet 4\nstream s0 prefix= period=1\n\
                      step SE i=x j=1 from=s0 to=s0\nconclusion strict\n";
        assert!(matches!(
            CertDocument::parse(bad_kv).unwrap_err(),
            CertError::Malformed { line: 3, .. }
        ));
        let alphabet_late = "stream s0 prefix= period=1\nalphabet 2\n";
        assert!(matches!(
            CertDocument::parse(alphabet_late).unwrap_err(),
            CertError::Malformed { line: 1, .. }
        ));
        let unfinished = "alphabet 2\nstream s0 prefix= period=1\n";
        assert_eq!(
            CertDocument::parse(unfinished).unwrap_err(),
            CertError::MissingConclusion
        );
        assert_eq!(
            CertDocument::parse("# only chatter\n\n").unwrap_err(),
            CertError::Empty
        );
    }

    #[test]
    fn tampered_certificates_fail_the_audit() {
        let mut doc = CertDocument::from_derivation(&one_transfer());
        doc.streams[1].1 = four(&[2, 2], &[2]);
        let err = check_certificate(&doc).unwrap_err();
        assert!(matches!(err, CertError::Audit(_)));
    }

    #[test]
    fn permutations_with_spaces_survive_the_round_trip() {
        let x = four(&[0, 1, 2, 3, 0, 1, 2, 3], &[0]);
        let perm: FinitePermutation = "(0 6)(1 7)".parse().unwrap();
        let d = Derivation::new(
            vec![DerivationStep {
                kind: StepKind::Anonymity(perm.clone()),
                source: x.clone(),
                target: crate::swr::rearranged(&x, &perm),
                relation: Relation::Equivalent,
            }],
            Relation::Equivalent,
        );
        let doc = CertDocument::from_derivation(&d);
        let text = doc.print();
        assert!(text.contains("perm=(0 6)(1 7)"));
        let parsed = CertDocument::parse(&text).unwrap();
        assert_eq!(parsed, doc);
        assert_eq!(check_certificate(&parsed).unwrap(), Relation::Equivalent);
    }
}
