//! From syntax to concrete values and typed experiment requests.

use super::ast::{Directive, Expr, Item, ScenarioDoc};
use super::SpecError;
use crate::{
    Alphabet, ChoiceFunction, CoalitionDescriptor, CoalitionFamily, DenseOracle,
    EventuallyPeriodicSeq, PartialAssignment, Q,
};
use std::collections::BTreeMap;

/// A bound value after resolution.
#[derive(Debug, Clone)]
pub enum Value {
    Coalition(CoalitionDescriptor),
    Assignment(PartialAssignment),
    Choice(ChoiceFunction),
    Stream(EventuallyPeriodicSeq),
    Oracle(DenseOracle),
    Family(CoalitionFamily),
    Rational(Q),
}

impl Value {
    pub fn kind(&self) -> &'static str {
        match self {
            Value::Coalition(_) => "coalition",
            Value::Assignment(_) => "partial assignment",
            Value::Choice(_) => "choice function",
            Value::Stream(_) => "utility stream",
            Value::Oracle(_) => "tree oracle",
            Value::Family(_) => "coalition family",
            Value::Rational(_) => "rational number",
        }
    }
}

/// One `run` line with its arguments fully built.
#[derive(Debug, Clone)]
pub enum RunSpec {
    Irrelevance {
        choice: ChoiceFunction,
        coalition: CoalitionDescriptor,
        condition: PartialAssignment,
    },
    AntiDemocratic {
        choice: ChoiceFunction,
        family: CoalitionFamily,
    },
    Escape {
        condition: PartialAssignment,
    },
    WitnessIn {
        condition: PartialAssignment,
    },
    WitnessOut {
        condition: PartialAssignment,
    },
    SwrWitness {
        condition: PartialAssignment,
    },
}

#[derive(Debug, Clone)]
pub struct ResolvedRun {
    pub line: usize,
    /// The directive in canonical spelling, for reports.
    pub call: String,
    pub spec: RunSpec,
}

/// Every binding evaluated, every directive typed.
#[derive(Debug, Clone)]
pub struct ResolvedDoc {
    values: Vec<(String, Value)>,
    runs: Vec<ResolvedRun>,
}

impl ResolvedDoc {
    pub fn get(&self, name: &str) -> Option<&Value> {
        self.values
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, v)| v)
    }

    pub fn values(&self) -> impl Iterator<Item = (&str, &Value)> {
        self.values.iter().map(|(n, v)| (n.as_str(), v))
    }

    pub fn runs(&self) -> &[ResolvedRun] {
        &self.runs
    }

    /// Oracle bindings in document order, for tree experiments.
    pub fn oracles(&self) -> Vec<(&str, &DenseOracle)> {
        self.values
            .iter()
            .filter_map(|(n, v)| match v {
                Value::Oracle(o) => Some((n.as_str(), o)),
                _ => None,
            })
            .collect()
    }
}

pub fn resolve(doc: &ScenarioDoc) -> Result<ResolvedDoc, SpecError> {
    let mut values: Vec<(String, Value)> = Vec::new();
    let mut runs = Vec::new();
    for item in &doc.items {
        match item {
            Item::Bind(b) => {
                let v = eval(&b.expr, &values).map_err(|detail| SpecError::Binding {
                    line: b.line,
                    name: b.name.clone(),
                    detail,
                })?;
                values.push((b.name.clone(), v));
            }
            Item::Run(d) => {
                let spec = resolve_directive(d, &values)?;
                runs.push(ResolvedRun {
                    line: d.line,
                    call: d.render(),
                    spec,
                });
            }
        }
    }
    Ok(ResolvedDoc { values, runs })
}

pub(super) fn eval_inline_coalition(expr: &Expr) -> Result<CoalitionDescriptor, SpecError> {
    match eval(expr, &[]) {
        Ok(Value::Coalition(d)) => Ok(d),
        Ok(other) => Err(SpecError::Argument {
            detail: format!("expected a coalition, found a {}", other.kind()),
        }),
        Err(detail) => Err(SpecError::Argument { detail }),
    }
}

fn eval(expr: &Expr, env: &[(String, Value)]) -> Result<Value, String> {
    match expr {
        Expr::Ref(name) => env
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, v)| v.clone())
            .ok_or_else(|| format!("unknown name '{name}'")),
        Expr::Finite(points) => Ok(Value::Coalition(CoalitionDescriptor::finite(
            points.iter().copied(),
        ))),
        Expr::Arith { start, step } => {
            Ok(Value::Coalition(CoalitionDescriptor::arith(*start, *step)))
        }
        Expr::Geom { base, ratio } => {
            Ok(Value::Coalition(CoalitionDescriptor::geom(*base, *ratio)))
        }
        Expr::Periodic(word) => {
            let bits = digit_word(word, 2)?;
            if bits.is_empty() {
                return Err("the periodic word must not be empty".into());
            }
            Ok(Value::Coalition(CoalitionDescriptor::periodic(
                vec![],
                bits,
            )))
        }
        Expr::Complement(inner) => {
            let d = coalition_operand(eval(inner, env)?, "'~'")?;
            Ok(Value::Coalition(d.complement()))
        }
        Expr::Union(l, r) => {
            let l = coalition_operand(eval(l, env)?, "'|'")?;
            let r = coalition_operand(eval(r, env)?, "'|'")?;
            Ok(Value::Coalition(l.union(r)))
        }
        Expr::Intersect(l, r) => {
            let l = coalition_operand(eval(l, env)?, "'&'")?;
            let r = coalition_operand(eval(r, env)?, "'&'")?;
            Ok(Value::Coalition(l.intersection(r)))
        }
        Expr::Assign {
            alphabet,
            free,
            fix,
            tail,
        } => {
            let alph = match alphabet {
                Some(k) => Alphabet::Bounded(*k),
                None => Alphabet::Unbounded,
            };
            let free = coalition_operand(eval(free, env)?, "free")?;
            let digit_bound = alphabet.map_or(10, |k| k.min(10));
            let tail_vals = digit_word(tail, digit_bound)?;
            let tail_seq = EventuallyPeriodicSeq::new(alph, vec![], tail_vals)
                .map_err(|e| e.to_string())?;
            let explicit: BTreeMap<u64, u64> = fix.iter().copied().collect();
            if explicit.len() != fix.len() {
                return Err("fix lists a coordinate twice".into());
            }
            let pa = PartialAssignment::new(alph, free, explicit, tail_seq)
                .map_err(|e| e.to_string())?;
            Ok(Value::Assignment(pa))
        }
        Expr::Dictator(coord) => ChoiceFunction::dictator(2, [*coord], *coord)
            .map(Value::Choice)
            .map_err(|e| e.to_string()),
        Expr::Parity { lo, hi } => {
            range_check(*lo, *hi)?;
            Ok(Value::Choice(ChoiceFunction::parity(*lo..*hi)))
        }
        Expr::Majority { lo, hi, tie } => {
            range_check(*lo, *hi)?;
            ChoiceFunction::majority(2, *lo..*hi, *tie)
                .map(Value::Choice)
                .map_err(|e| e.to_string())
        }
        Expr::Table {
            alphabet,
            support,
            entries,
        } => {
            if !(2..=10).contains(alphabet) {
                return Err("table alphabets are written in digits, so K is between 2 and 10".into());
            }
            let vals = digit_word(entries, *alphabet)?;
            ChoiceFunction::table(*alphabet, support.iter().copied(), vals)
                .map(Value::Choice)
                .map_err(|e| e.to_string())
        }
        Expr::Stream {
            scale,
            prefix,
            period,
        } => {
            let (k, prefix, period) = match scale.as_str() {
                "abcd" => (4, letter_word(prefix)?, letter_word(period)?),
                "01" => (2, digit_word(prefix, 2)?, digit_word(period, 2)?),
                other => return Err(format!("unknown scale '{other}', use abcd or 01")),
            };
            EventuallyPeriodicSeq::new(Alphabet::Bounded(k), prefix, period)
                .map(Value::Stream)
                .map_err(|e| e.to_string())
        }
        Expr::OracleIdentity => Ok(Value::Oracle(DenseOracle::identity())),
        Expr::OracleFactor(word) => Ok(Value::Oracle(DenseOracle::factor(digit_word(word, 10)?))),
        Expr::OracleOnes(count) => Ok(Value::Oracle(DenseOracle::append_ones(*count))),
        Expr::OracleFixed(word) => Ok(Value::Oracle(DenseOracle::fixed(digit_word(word, 10)?))),
        Expr::DensePlus(threshold) => Ok(Value::Family(CoalitionFamily::DenseAtLeast(*threshold))),
        Expr::Infinite => Ok(Value::Family(CoalitionFamily::Infinite)),
        Expr::CoSingleton => Ok(Value::Family(CoalitionFamily::CoSingleton)),
        Expr::Cofinite => Ok(Value::Family(CoalitionFamily::Cofinite)),
        Expr::Rational(value) => Ok(Value::Rational(*value)),
    }
}

fn coalition_operand(v: Value, ctx: &str) -> Result<CoalitionDescriptor, String> {
    match v {
        Value::Coalition(d) => Ok(d),
        other => Err(format!("{ctx} needs a coalition, found a {}", other.kind())),
    }
}

fn digit_word(word: &str, alphabet: u64) -> Result<Vec<u64>, String> {
    word.chars()
        .map(|c| {
            c.to_digit(10)
                .map(u64::from)
                .filter(|v| *v < alphabet)
                .ok_or_else(|| format!("symbol '{c}' is not a digit below {alphabet}"))
        })
        .collect()
}

fn letter_word(word: &str) -> Result<Vec<u64>, String> {
    word.chars()
        .map(|c| match c {
            'a'..='d' => Ok(c as u64 - 'a' as u64),
            other => Err(format!("symbol '{other}' is outside the scale abcd")),
        })
        .collect()
}

fn range_check(lo: u64, hi: u64) -> Result<(), String> {
    if lo < hi {
        Ok(())
    } else {
        Err("the coordinate range is empty".into())
    }
}

fn resolve_directive(d: &Directive, env: &[(String, Value)]) -> Result<RunSpec, SpecError> {
    let mut args = Vec::new();
    for arg in &d.args {
        let v = eval(arg, env).map_err(|detail| SpecError::Directive {
            line: d.line,
            op: d.op.clone(),
            detail,
        })?;
        args.push(v);
    }
    let fail = |detail: String| SpecError::Directive {
        line: d.line,
        op: d.op.clone(),
        detail,
    };
    match d.op.as_str() {
        "irrelevance" => {
            let [a, b, c] = fixed_arity(args, "a choice function, a coalition and a condition")
                .map_err(&fail)?;
            Ok(RunSpec::Irrelevance {
                choice: as_choice(a, 1).map_err(&fail)?,
                coalition: as_coalition(b, 2).map_err(&fail)?,
                condition: as_condition(c, 3).map_err(&fail)?,
            })
        }
        "antidem" => {
            let [a, b] =
                fixed_arity(args, "a choice function and a coalition family").map_err(&fail)?;
            Ok(RunSpec::AntiDemocratic {
                choice: as_choice(a, 1).map_err(&fail)?,
                family: as_family(b, 2).map_err(&fail)?,
            })
        }
        "escape" => {
            let [a] = fixed_arity(args, "a condition").map_err(&fail)?;
            Ok(RunSpec::Escape {
                condition: as_condition(a, 1).map_err(&fail)?,
            })
        }
        "witness_in" => {
            let [a] = fixed_arity(args, "a condition").map_err(&fail)?;
            Ok(RunSpec::WitnessIn {
                condition: as_condition(a, 1).map_err(&fail)?,
            })
        }
        "witness_out" => {
            let [a] = fixed_arity(args, "a condition").map_err(&fail)?;
            Ok(RunSpec::WitnessOut {
                condition: as_condition(a, 1).map_err(&fail)?,
            })
        }
        "swr_witness" => {
            let [a] = fixed_arity(args, "a condition").map_err(&fail)?;
            Ok(RunSpec::SwrWitness {
                condition: as_condition(a, 1).map_err(&fail)?,
            })
        }
        other => Err(SpecError::Directive {
            line: d.line,
            op: other.to_string(),
            detail: "unknown operation".into(),
        }),
    }
}

fn fixed_arity<const N: usize>(args: Vec<Value>, shape: &str) -> Result<[Value; N], String> {
    let found = args.len();
    args.try_into()
        .map_err(|_| format!("takes {N} arguments ({shape}), found {found}"))
}

fn as_choice(v: Value, position: usize) -> Result<ChoiceFunction, String> {
    match v {
        Value::Choice(f) => Ok(f),
        other => Err(wrong_kind(position, "choice function", &other)),
    }
}

fn as_coalition(v: Value, position: usize) -> Result<CoalitionDescriptor, String> {
    match v {
        Value::Coalition(d) => Ok(d),
        other => Err(wrong_kind(position, "coalition", &other)),
    }
}

fn as_condition(v: Value, position: usize) -> Result<PartialAssignment, String> {
    match v {
        Value::Assignment(f) => Ok(f),
        other => Err(wrong_kind(position, "partial assignment", &other)),
    }
}

fn as_family(v: Value, position: usize) -> Result<CoalitionFamily, String> {
    match v {
        Value::Family(f) => Ok(f),
        other => Err(wrong_kind(position, "coalition family", &other)),
    }
}

fn wrong_kind(position: usize, wanted: &str, found: &Value) -> String {
    format!(
        "argument {position} must be a {wanted}, found a {}",
        found.kind()
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::speclang::parse;
    use crate::q;

    #[test]
    fn bindings_resolve_to_the_library_values() {
        let doc = parse(
            "A = ~arith(3,4)\n\
             f = assign(K=2, free=A, fix{}, tail=periodic(\"0\"))\n\
             F = dictator(0)\n\
             T = table(K=2, support{0,1}, \"0110\")\n\
             M = majority{0..5; tie=1}\n\
             Y = stream(Y=01, prefix=\"1\", period=\"10\")\n\
             Z = stream(Y=abcd, prefix=\"ab\", period=\"cd\")\n\
             w = factor(\"012\")",
        )
        .unwrap();
        let resolved = resolve(&doc).unwrap();

        match resolved.get("A").unwrap() {
            Value::Coalition(d) => {
                assert_eq!(*d, CoalitionDescriptor::arith(3, 4).complement());
            }
            other => panic!("wrong kind: {}", other.kind()),
        }
        match resolved.get("f").unwrap() {
            Value::Assignment(f) => {
                assert_eq!(f.alphabet(), Alphabet::Bounded(2));
                assert!(f.is_free(0));
                assert!(!f.is_free(3));
                assert_eq!(f.value_at(7), Some(0));
            }
            other => panic!("wrong kind: {}", other.kind()),
        }
        match resolved.get("F").unwrap() {
            Value::Choice(f) => {
                assert_eq!(*f, ChoiceFunction::dictator(2, [0], 0).unwrap());
            }
            other => panic!("wrong kind: {}", other.kind()),
        }
        match resolved.get("T").unwrap() {
            Value::Choice(f) => {
                assert_eq!(*f, ChoiceFunction::table(2, [0, 1], vec![0, 1, 1, 0]).unwrap());
            }
            other => panic!("wrong kind: {}", other.kind()),
        }
        match resolved.get("M").unwrap() {
            Value::Choice(f) => {
                assert_eq!(*f, ChoiceFunction::majority(2, 0..5, 1).unwrap());
            }
            other => panic!("wrong kind: {}", other.kind()),
        }
        match resolved.get("Y").unwrap() {
            Value::Stream(y) => {
                let want =
                    EventuallyPeriodicSeq::new(Alphabet::Bounded(2), vec![1], vec![1, 0]).unwrap();
                assert_eq!(*y, want);
            }
            other => panic!("wrong kind: {}", other.kind()),
        }
        match resolved.get("Z").unwrap() {
            Value::Stream(z) => {
                let want =
                    EventuallyPeriodicSeq::new(Alphabet::Bounded(4), vec![0, 1], vec![2, 3])
                        .unwrap();
                assert_eq!(*z, want);
            }
            other => panic!("wrong kind: {}", other.kind()),
        }
        match resolved.get("w").unwrap() {
            Value::Oracle(o) => assert_eq!(*o, DenseOracle::factor(vec![0, 1, 2])),
            other => panic!("wrong kind: {}", other.kind()),
        }
    }

    #[test]
    fn directives_come_back_typed_and_rendered() {
        let doc = parse(
            "F = parity{0..3}\n\
             b = finite{0,2}\n\
             f = assign(K=2, free=~finite{9}, fix{9:1}, tail=periodic(\"1\"))\n\
             run irrelevance(F, b, f)\n\
             run antidem(F, Dplus(7/10))\n\
             run escape(f)",
        )
        .unwrap();
        let resolved = resolve(&doc).unwrap();
        let runs = resolved.runs();
        assert_eq!(runs.len(), 3);

        assert_eq!(runs[0].call, "run irrelevance(F, b, f)");
        match &runs[0].spec {
            RunSpec::Irrelevance {
                choice, coalition, ..
            } => {
                assert_eq!(*choice, ChoiceFunction::parity(0..3));
                assert_eq!(*coalition, CoalitionDescriptor::finite([0, 2]));
            }
            other => panic!("wrong spec: {other:?}"),
        }
        match &runs[1].spec {
            RunSpec::AntiDemocratic { family, .. } => {
                assert_eq!(*family, CoalitionFamily::DenseAtLeast(q(7, 10)));
            }
            other => panic!("wrong spec: {other:?}"),
        }
        assert!(matches!(runs[2].spec, RunSpec::Escape { .. }));
        assert_eq!(runs[2].line, 6);
    }

    #[test]
    fn unbounded_alphabets_are_spelled_inf() {
        let doc = parse("f = assign(K=inf, free=arith(1,2), fix{0:7}, tail=periodic(\"0\"))").unwrap();
        assert_eq!(
            doc.print(),
            "f = assign(K=inf, free=arith(1,2), fix{0:7}, tail=periodic(\"0\"))\n"
        );
        let resolved = resolve(&doc).unwrap();
        match resolved.get("f").unwrap() {
            Value::Assignment(f) => {
                assert_eq!(f.alphabet(), Alphabet::Unbounded);
                assert_eq!(f.value_at(0), Some(7));
                assert!(f.is_free(1));
            }
            other => panic!("wrong kind: {}", other.kind()),
        }
    }

    #[test]
    fn oracle_bindings_surface_in_document_order() {
        let doc = parse("a = identity()\nx = finite{}\nb = ones(2)\nc = fixed(\"01\")").unwrap();
        let resolved = resolve(&doc).unwrap();
        let names: Vec<&str> = resolved.oracles().iter().map(|(n, _)| *n).collect();
        assert_eq!(names, vec!["a", "b", "c"]);
    }

    #[test]
    fn type_mismatches_name_the_operator_and_the_kinds() {
        let doc = parse("x = finite{0}&Dplus(1/2)").unwrap();
        let err = resolve(&doc).unwrap_err();
        assert_eq!(
            err,
            SpecError::Binding {
                line: 1,
                name: "x".into(),
                detail: "'&' needs a coalition, found a coalition family".into(),
            }
        );

        let doc = parse("F = parity{0..2}\nrun escape(F)").unwrap();
        let err = resolve(&doc).unwrap_err();
        assert_eq!(
            err,
            SpecError::Directive {
                line: 2,
                op: "escape".into(),
                detail: "argument 1 must be a partial assignment, found a choice function".into(),
            }
        );

        let doc = parse("f = assign(K=2, free=~finite{}, fix{}, tail=periodic(\"0\"))\nrun irrelevance(f, f)").unwrap();
        let err = resolve(&doc).unwrap_err();
        assert_eq!(
            err,
            SpecError::Directive {
                line: 2,
                op: "irrelevance".into(),
                detail: "takes 3 arguments (a choice function, a coalition and a condition), found 2"
                    .into(),
            }
        );
    }

    #[test]
    fn bad_words_are_reported_with_their_symbol() {
        let doc = parse("w = periodic(\"102\")").unwrap();
        let err = resolve(&doc).unwrap_err();
        assert_eq!(
            err,
            SpecError::Binding {
                line: 1,
                name: "w".into(),
                detail: "symbol '2' is not a digit below 2".into(),
            }
        );

        let doc = parse("Y = stream(Y=abcd, prefix=\"ae\", period=\"b\")").unwrap();
        let err = resolve(&doc).unwrap_err();
        assert_eq!(
            err,
            SpecError::Binding {
                line: 1,
                name: "Y".into(),
                detail: "symbol 'e' is outside the scale abcd".into(),
            }
        );
    }

    #[test]
    fn assignment_problems_keep_the_library_wording() {
        let doc = parse("f = assign(K=2, free=~finite{4}, fix{3:1}, tail=periodic(\"0\"))").unwrap();
        let err = resolve(&doc).unwrap_err();
        match err {
            SpecError::Binding { line: 1, name, detail } => {
                assert_eq!(name, "f");
                assert!(detail.contains('3'), "unhelpful detail: {detail}");
            }
            other => panic!("wrong error: {other:?}"),
        }
    }
}
