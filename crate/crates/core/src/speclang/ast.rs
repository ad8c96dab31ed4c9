//! Syntax tree and the canonical printer.

use crate::{CoalitionDescriptor, Q};
use std::fmt::Write as _;

/// One value expression. Operators only make sense on coalitions; the
/// resolver rejects other combinations.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Expr {
    Ref(String),
    Finite(Vec<u64>),
    Arith { start: u64, step: u64 },
    Geom { base: u64, ratio: u64 },
    Periodic(String),
    Complement(Box<Expr>),
    Union(Box<Expr>, Box<Expr>),
    Intersect(Box<Expr>, Box<Expr>),
    Assign {
        /// `None` means an unbounded value alphabet, spelled `K=inf`.
        alphabet: Option<u64>,
        free: Box<Expr>,
        fix: Vec<(u64, u64)>,
        tail: String,
    },
    Dictator(u64),
    Parity { lo: u64, hi: u64 },
    Majority { lo: u64, hi: u64, tie: u64 },
    Table {
        alphabet: u64,
        support: Vec<u64>,
        entries: String,
    },
    Stream {
        scale: String,
        prefix: String,
        period: String,
    },
    OracleIdentity,
    OracleFactor(String),
    OracleOnes(u64),
    OracleFixed(String),
    DensePlus(Q),
    Infinite,
    CoSingleton,
    Cofinite,
    Rational(Q),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Binding {
    pub name: String,
    pub expr: Expr,
    pub line: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Directive {
    pub op: String,
    pub args: Vec<Expr>,
    pub line: usize,
}

impl Directive {
    /// The directive in canonical spelling, without a newline.
    pub fn render(&self) -> String {
        let mut out = String::new();
        let _ = write!(out, "run {}(", self.op);
        for (i, arg) in self.args.iter().enumerate() {
            if i > 0 {
                out.push_str(", ");
            }
            write_expr(&mut out, arg, 0);
        }
        out.push(')');
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Item {
    Bind(Binding),
    Run(Directive),
}

/// A parsed document: bindings and experiment requests in source order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScenarioDoc {
    pub items: Vec<Item>,
}

impl ScenarioDoc {
    pub fn bindings(&self) -> impl Iterator<Item = &Binding> {
        self.items.iter().filter_map(|it| match it {
            Item::Bind(b) => Some(b),
            Item::Run(_) => None,
        })
    }

    pub fn directives(&self) -> impl Iterator<Item = &Directive> {
        self.items.iter().filter_map(|it| match it {
            Item::Run(d) => Some(d),
            Item::Bind(_) => None,
        })
    }

    /// Canonical text: one item per line, fixed spacing, no comments.
    /// Parsing the result reproduces `self` up to line numbers.
    pub fn print(&self) -> String {
        let mut out = String::new();
        for item in &self.items {
            match item {
                Item::Bind(b) => {
                    let _ = write!(out, "{} = ", b.name);
                    write_expr(&mut out, &b.expr, 0);
                }
                Item::Run(d) => out.push_str(&d.render()),
            }
            out.push('\n');
        }
        out
    }
}

/// 0 for unions, 1 for intersections, 2 for everything tighter.
fn prec(e: &Expr) -> u8 {
    match e {
        Expr::Union(..) => 0,
        Expr::Intersect(..) => 1,
        _ => 2,
    }
}

fn write_expr(out: &mut String, e: &Expr, min: u8) {
    if prec(e) < min {
        out.push('(');
        write_expr(out, e, 0);
        out.push(')');
        return;
    }
    match e {
        Expr::Ref(name) => out.push_str(name),
        Expr::Finite(points) => {
            out.push_str("finite{");
            push_nums(out, points);
            out.push('}');
        }
        Expr::Arith { start, step } => {
            let _ = write!(out, "arith({start},{step})");
        }
        Expr::Geom { base, ratio } => {
            let _ = write!(out, "geom({base},{ratio})");
        }
        Expr::Periodic(word) => {
            let _ = write!(out, "periodic(\"{word}\")");
        }
        Expr::Complement(inner) => {
            out.push('~');
            write_expr(out, inner, 2);
        }
        Expr::Union(l, r) => {
            write_expr(out, l, 0);
            out.push('|');
            write_expr(out, r, 1);
        }
        Expr::Intersect(l, r) => {
            write_expr(out, l, 1);
            out.push('&');
            write_expr(out, r, 2);
        }
        Expr::Assign {
            alphabet,
            free,
            fix,
            tail,
        } => {
            match alphabet {
                Some(k) => {
                    let _ = write!(out, "assign(K={k}, free=");
                }
                None => out.push_str("assign(K=inf, free="),
            }
            write_expr(out, free, 0);
            out.push_str(", fix{");
            for (i, (coord, value)) in fix.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                let _ = write!(out, "{coord}:{value}");
            }
            let _ = write!(out, "}}, tail=periodic(\"{tail}\"))");
        }
        Expr::Dictator(coord) => {
            let _ = write!(out, "dictator({coord})");
        }
        Expr::Parity { lo, hi } => {
            let _ = write!(out, "parity{{{lo}..{hi}}}");
        }
        Expr::Majority { lo, hi, tie } => {
            let _ = write!(out, "majority{{{lo}..{hi}; tie={tie}}}");
        }
        Expr::Table {
            alphabet,
            support,
            entries,
        } => {
            let _ = write!(out, "table(K={alphabet}, support{{");
            push_nums(out, support);
            let _ = write!(out, "}}, \"{entries}\")");
        }
        Expr::Stream {
            scale,
            prefix,
            period,
        } => {
            let _ = write!(out, "stream(Y={scale}, prefix=\"{prefix}\", period=\"{period}\")");
        }
        Expr::OracleIdentity => out.push_str("identity()"),
        Expr::OracleFactor(word) => {
            let _ = write!(out, "factor(\"{word}\")");
        }
        Expr::OracleOnes(count) => {
            let _ = write!(out, "ones({count})");
        }
        Expr::OracleFixed(word) => {
            let _ = write!(out, "fixed(\"{word}\")");
        }
        Expr::DensePlus(q) => {
            let _ = write!(out, "Dplus({q})");
        }
        Expr::Infinite => out.push_str("infinite"),
        Expr::CoSingleton => out.push_str("cosingleton"),
        Expr::Cofinite => out.push_str("cofinite"),
        Expr::Rational(q) => {
            let _ = write!(out, "{q}");
        }
    }
}

fn push_nums(out: &mut String, nums: &[u64]) {
    for (i, n) in nums.iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        let _ = write!(out, "{n}");
    }
}

/// Spells a coalition in the language, e.g. `~finite{0}`. The inverse of
/// [`super::parse_coalition_text`] up to normalization.
pub fn coalition_text(d: &CoalitionDescriptor) -> String {
    let mut out = String::new();
    write_expr(&mut out, &descriptor_expr(d), 0);
    out
}

fn descriptor_expr(d: &CoalitionDescriptor) -> Expr {
    match d {
        CoalitionDescriptor::Finite(points) => Expr::Finite(points.iter().copied().collect()),
        CoalitionDescriptor::Arith { start, step } => Expr::Arith {
            start: *start,
            step: *step,
        },
        CoalitionDescriptor::Geom { base, ratio } => Expr::Geom {
            base: *base,
            ratio: *ratio,
        },
        CoalitionDescriptor::Periodic { prefix, period } => periodic_expr(prefix, period),
        CoalitionDescriptor::Complement(inner) => {
            Expr::Complement(Box::new(descriptor_expr(inner)))
        }
        CoalitionDescriptor::Union(l, r) => Expr::Union(
            Box::new(descriptor_expr(l)),
            Box::new(descriptor_expr(r)),
        ),
        CoalitionDescriptor::Intersection(l, r) => Expr::Intersect(
            Box::new(descriptor_expr(l)),
            Box::new(descriptor_expr(r)),
        ),
    }
}

fn periodic_expr(prefix: &[u64], period: &[u64]) -> Expr {
    let word = |bits: &[u64]| bits.iter().map(|b| if *b == 0 { '0' } else { '1' }).collect();
    if prefix.is_empty() {
        return Expr::Periodic(word(period));
    }
    // The language has no prefixed periodic form, so split the line at the
    // prefix boundary and rotate the period back to phase zero.
    let p = period.len();
    let shift = prefix.len() % p;
    let rotated: Vec<u64> = (0..p).map(|j| period[(j + p - shift) % p]).collect();
    let tail = Expr::Intersect(
        Box::new(Expr::Complement(Box::new(Expr::Finite(
            (0..prefix.len() as u64).collect(),
        )))),
        Box::new(Expr::Periodic(word(&rotated))),
    );
    let ones: Vec<u64> = prefix
        .iter()
        .enumerate()
        .filter(|(_, b)| **b != 0)
        .map(|(i, _)| i as u64)
        .collect();
    if ones.is_empty() {
        tail
    } else {
        Expr::Union(Box::new(Expr::Finite(ones)), Box::new(tail))
    }
}
