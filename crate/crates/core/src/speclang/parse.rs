//! Recursive descent over the line tokens.

use super::ast::{Binding, Directive, Expr, Item, ScenarioDoc};
use super::token::{lex_line, Token, TokenKind};
use super::SpecError;
use crate::{q, CoalitionDescriptor, Q};

const CONSTRUCTORS: &[&str] = &[
    "finite",
    "arith",
    "geom",
    "periodic",
    "assign",
    "dictator",
    "parity",
    "majority",
    "table",
    "stream",
    "identity",
    "factor",
    "ones",
    "fixed",
    "Dplus",
    "infinite",
    "cosingleton",
    "cofinite",
];

const DIRECTIVE_OPS: &[&str] = &[
    "irrelevance",
    "antidem",
    "escape",
    "witness_in",
    "witness_out",
    "swr_witness",
];

/// Keywords cannot be used as binding names. Field words such as `free` or
/// `prefix` only matter inside their constructor and stay available.
pub(super) fn is_reserved(word: &str) -> bool {
    word == "run" || CONSTRUCTORS.contains(&word) || DIRECTIVE_OPS.contains(&word)
}

fn expr_expected() -> Vec<String> {
    let mut v: Vec<String> = vec![
        "a name".into(),
        "a number".into(),
        "'~'".into(),
        "'('".into(),
    ];
    v.extend(CONSTRUCTORS.iter().map(|s| format!("'{s}'")));
    v
}

struct Cursor<'a> {
    toks: &'a [Token],
    pos: usize,
    line: usize,
    eol_column: usize,
}

impl<'a> Cursor<'a> {
    fn peek(&self) -> Option<&'a Token> {
        self.toks.get(self.pos)
    }

    // A separator only continues a list when an element follows; a dangling
    // comma is reported at its own position.
    fn list_continues(&self) -> bool {
        matches!(
            self.peek(),
            Some(Token {
                kind: TokenKind::Comma,
                ..
            })
        ) && matches!(
            self.toks.get(self.pos + 1),
            Some(Token {
                kind: TokenKind::Number(_),
                ..
            })
        )
    }

    fn bump(&mut self) {
        self.pos += 1;
    }

    fn done(&self) -> bool {
        self.pos == self.toks.len()
    }

    fn fail(&self, expected: &[&str]) -> SpecError {
        self.fail_owned(expected.iter().map(|s| s.to_string()).collect())
    }

    fn fail_owned(&self, expected: Vec<String>) -> SpecError {
        match self.peek() {
            Some(t) => SpecError::Parse {
                line: t.line,
                column: t.column,
                expected,
                found: t.kind.describe(),
            },
            None => SpecError::Parse {
                line: self.line,
                column: self.eol_column,
                expected,
                found: "end of line".into(),
            },
        }
    }

    fn expect(&mut self, kind: TokenKind, show: &str) -> Result<(), SpecError> {
        match self.peek() {
            Some(t) if t.kind == kind => {
                self.bump();
                Ok(())
            }
            _ => Err(self.fail(&[show])),
        }
    }

    fn keyword(&mut self, word: &str) -> Result<(), SpecError> {
        match self.peek() {
            Some(Token {
                kind: TokenKind::Ident(w),
                ..
            }) if w == word => {
                self.bump();
                Ok(())
            }
            _ => Err(self.fail_owned(vec![format!("'{word}'")])),
        }
    }

    fn number(&mut self) -> Result<u64, SpecError> {
        self.number_lexeme().map(|(v, _, _)| v)
    }

    fn number_lexeme(&mut self) -> Result<(u64, String, usize), SpecError> {
        match self.peek() {
            Some(Token {
                kind: TokenKind::Number(lex),
                column,
                ..
            }) => match lex.parse::<u64>() {
                Ok(v) => {
                    let out = (v, lex.clone(), *column);
                    self.bump();
                    Ok(out)
                }
                Err(_) => Err(self.fail(&["a smaller number"])),
            },
            _ => Err(self.fail(&["a number"])),
        }
    }

    fn string(&mut self) -> Result<String, SpecError> {
        match self.peek() {
            Some(Token {
                kind: TokenKind::Str(s),
                ..
            }) => {
                let s = s.clone();
                self.bump();
                Ok(s)
            }
            _ => Err(self.fail(&["a quoted string"])),
        }
    }
}

/// Reads a whole document. The first problem aborts the parse.
pub fn parse(text: &str) -> Result<ScenarioDoc, SpecError> {
    let mut items = Vec::new();
    let mut names: Vec<String> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let toks = lex_line(line, raw)?;
        if toks.is_empty() {
            continue;
        }
        let mut cur = Cursor {
            toks: &toks,
            pos: 0,
            line,
            eol_column: raw.chars().count() + 1,
        };
        items.push(parse_item(&mut cur, &mut names, line)?);
    }
    Ok(ScenarioDoc { items })
}

/// Reads a single coalition expression, e.g. `~finite{0}` or
/// `periodic('110')`, with no names in scope.
pub fn parse_coalition_text(text: &str) -> Result<CoalitionDescriptor, SpecError> {
    let toks = lex_line(1, text)?;
    let mut cur = Cursor {
        toks: &toks,
        pos: 0,
        line: 1,
        eol_column: text.chars().count() + 1,
    };
    let names = Vec::new();
    let expr = parse_union(&mut cur, &names)?;
    end_of_line(&cur)?;
    super::resolve::eval_inline_coalition(&expr)
}

fn parse_item(cur: &mut Cursor, names: &mut Vec<String>, line: usize) -> Result<Item, SpecError> {
    let head = match cur.peek() {
        Some(Token {
            kind: TokenKind::Ident(w),
            ..
        }) => w.clone(),
        _ => return Err(cur.fail(&["a binding name", "'run'"])),
    };
    if head == "run" {
        cur.bump();
        let op = match cur.peek() {
            Some(Token {
                kind: TokenKind::Ident(w),
                ..
            }) if DIRECTIVE_OPS.contains(&w.as_str()) => {
                let w = w.clone();
                cur.bump();
                w
            }
            _ => {
                return Err(
                    cur.fail_owned(DIRECTIVE_OPS.iter().map(|s| format!("'{s}'")).collect())
                )
            }
        };
        cur.expect(TokenKind::LParen, "'('")?;
        let mut args = Vec::new();
        if !matches!(
            cur.peek(),
            Some(Token {
                kind: TokenKind::RParen,
                ..
            })
        ) {
            loop {
                args.push(parse_union(cur, names)?);
                if matches!(
                    cur.peek(),
                    Some(Token {
                        kind: TokenKind::Comma,
                        ..
                    })
                ) {
                    cur.bump();
                } else {
                    break;
                }
            }
        }
        cur.expect(TokenKind::RParen, "')'")?;
        end_of_line(cur)?;
        Ok(Item::Run(Directive { op, args, line }))
    } else {
        if is_reserved(&head) {
            return Err(cur.fail(&["a binding name", "'run'"]));
        }
        cur.bump();
        if names.iter().any(|n| n == &head) {
            return Err(SpecError::DuplicateName { line, name: head });
        }
        cur.expect(TokenKind::Eq, "'='")?;
        let expr = parse_union(cur, names)?;
        end_of_line(cur)?;
        names.push(head.clone());
        Ok(Item::Bind(Binding {
            name: head,
            expr,
            line,
        }))
    }
}

fn end_of_line(cur: &Cursor) -> Result<(), SpecError> {
    if cur.done() {
        Ok(())
    } else {
        Err(cur.fail(&["end of line"]))
    }
}

fn widen_expected(e: SpecError, also: &str) -> SpecError {
    match e {
        SpecError::Parse {
            line,
            column,
            mut expected,
            found,
        } => {
            expected.push(also.into());
            SpecError::Parse {
                line,
                column,
                expected,
                found,
            }
        }
        other => other,
    }
}

fn parse_union(cur: &mut Cursor, names: &[String]) -> Result<Expr, SpecError> {
    let mut e = parse_intersect(cur, names)?;
    while matches!(
        cur.peek(),
        Some(Token {
            kind: TokenKind::Pipe,
            ..
        })
    ) {
        cur.bump();
        let rhs = parse_intersect(cur, names)?;
        e = Expr::Union(Box::new(e), Box::new(rhs));
    }
    Ok(e)
}

fn parse_intersect(cur: &mut Cursor, names: &[String]) -> Result<Expr, SpecError> {
    let mut e = parse_prefix(cur, names)?;
    while matches!(
        cur.peek(),
        Some(Token {
            kind: TokenKind::Amp,
            ..
        })
    ) {
        cur.bump();
        let rhs = parse_prefix(cur, names)?;
        e = Expr::Intersect(Box::new(e), Box::new(rhs));
    }
    Ok(e)
}

fn parse_prefix(cur: &mut Cursor, names: &[String]) -> Result<Expr, SpecError> {
    if matches!(
        cur.peek(),
        Some(Token {
            kind: TokenKind::Tilde,
            ..
        })
    ) {
        cur.bump();
        let inner = parse_prefix(cur, names)?;
        return Ok(Expr::Complement(Box::new(inner)));
    }
    parse_primary(cur, names)
}

fn parse_primary(cur: &mut Cursor, names: &[String]) -> Result<Expr, SpecError> {
    let tok = match cur.peek() {
        Some(t) => t,
        None => return Err(cur.fail_owned(expr_expected())),
    };
    match &tok.kind {
        TokenKind::LParen => {
            cur.bump();
            let e = parse_union(cur, names)?;
            cur.expect(TokenKind::RParen, "')'")?;
            Ok(e)
        }
        TokenKind::Number(_) => Ok(Expr::Rational(parse_rational(cur)?)),
        TokenKind::Ident(w) => {
            let word = w.clone();
            let (line, column) = (tok.line, tok.column);
            match word.as_str() {
                "finite" => {
                    cur.bump();
                    cur.expect(TokenKind::LBrace, "'{'")?;
                    let points = parse_num_list(cur)?;
                    cur.expect(TokenKind::RBrace, "'}'")?;
                    Ok(Expr::Finite(points))
                }
                "arith" => {
                    cur.bump();
                    let (start, step) = parse_pair(cur)?;
                    Ok(Expr::Arith { start, step })
                }
                "geom" => {
                    cur.bump();
                    let (base, ratio) = parse_pair(cur)?;
                    Ok(Expr::Geom { base, ratio })
                }
                "periodic" => {
                    cur.bump();
                    Ok(Expr::Periodic(parse_quoted(cur)?))
                }
                "assign" => {
                    cur.bump();
                    parse_assign(cur, names)
                }
                "dictator" => {
                    cur.bump();
                    cur.expect(TokenKind::LParen, "'('")?;
                    let coord = cur.number()?;
                    cur.expect(TokenKind::RParen, "')'")?;
                    Ok(Expr::Dictator(coord))
                }
                "parity" => {
                    cur.bump();
                    cur.expect(TokenKind::LBrace, "'{'")?;
                    let (lo, hi) = parse_range(cur)?;
                    cur.expect(TokenKind::RBrace, "'}'")?;
                    Ok(Expr::Parity { lo, hi })
                }
                "majority" => {
                    cur.bump();
                    cur.expect(TokenKind::LBrace, "'{'")?;
                    let (lo, hi) = parse_range(cur)?;
                    cur.expect(TokenKind::Semi, "';'")?;
                    cur.keyword("tie")?;
                    cur.expect(TokenKind::Eq, "'='")?;
                    let tie = cur.number()?;
                    cur.expect(TokenKind::RBrace, "'}'")?;
                    Ok(Expr::Majority { lo, hi, tie })
                }
                "table" => {
                    cur.bump();
                    parse_table(cur)
                }
                "stream" => {
                    cur.bump();
                    parse_stream(cur)
                }
                "identity" => {
                    cur.bump();
                    cur.expect(TokenKind::LParen, "'('")?;
                    cur.expect(TokenKind::RParen, "')'")?;
                    Ok(Expr::OracleIdentity)
                }
                "factor" => {
                    cur.bump();
                    Ok(Expr::OracleFactor(parse_quoted(cur)?))
                }
                "ones" => {
                    cur.bump();
                    cur.expect(TokenKind::LParen, "'('")?;
                    let count = cur.number()?;
                    cur.expect(TokenKind::RParen, "')'")?;
                    Ok(Expr::OracleOnes(count))
                }
                "fixed" => {
                    cur.bump();
                    Ok(Expr::OracleFixed(parse_quoted(cur)?))
                }
                "Dplus" => {
                    cur.bump();
                    cur.expect(TokenKind::LParen, "'('")?;
                    let value = parse_rational(cur)?;
                    cur.expect(TokenKind::RParen, "')'")?;
                    Ok(Expr::DensePlus(value))
                }
                "infinite" => {
                    cur.bump();
                    Ok(Expr::Infinite)
                }
                "cosingleton" => {
                    cur.bump();
                    Ok(Expr::CoSingleton)
                }
                "cofinite" => {
                    cur.bump();
                    Ok(Expr::Cofinite)
                }
                _ if is_reserved(&word) => Err(cur.fail_owned(expr_expected())),
                _ => {
                    if !names.iter().any(|n| n == &word) {
                        return Err(SpecError::UnknownName {
                            line,
                            column,
                            name: word,
                        });
                    }
                    cur.bump();
                    Ok(Expr::Ref(word))
                }
            }
        }
        _ => Err(cur.fail_owned(expr_expected())),
    }
}

fn parse_rational(cur: &mut Cursor) -> Result<Q, SpecError> {
    let (numer, _, _) = cur.number_lexeme()?;
    match cur.peek() {
        Some(Token {
            kind: TokenKind::Slash,
            ..
        }) => {
            cur.bump();
            let (denom, lex, column) = cur.number_lexeme()?;
            if denom == 0 {
                return Err(SpecError::Parse {
                    line: cur.line,
                    column,
                    expected: vec!["a nonzero denominator".into()],
                    found: format!("'{lex}'"),
                });
            }
            Ok(q(numer, denom))
        }
        Some(Token {
            kind: TokenKind::Dot,
            ..
        }) => {
            cur.bump();
            let (frac, lex, column) = cur.number_lexeme()?;
            let digits = lex.chars().count() as u32;
            let scaled = 10u64
                .checked_pow(digits)
                .and_then(|p| numer.checked_mul(p).map(|v| (v, p)))
                .and_then(|(v, p)| v.checked_add(frac).map(|v| (v, p)));
            match scaled {
                Some((v, p)) => Ok(q(v, p)),
                None => Err(SpecError::Parse {
                    line: cur.line,
                    column,
                    expected: vec!["a smaller number".into()],
                    found: format!("'{lex}'"),
                }),
            }
        }
        _ => Ok(Q::from_integer(numer)),
    }
}

fn parse_num_list(cur: &mut Cursor) -> Result<Vec<u64>, SpecError> {
    let mut out = Vec::new();
    if matches!(
        cur.peek(),
        Some(Token {
            kind: TokenKind::RBrace,
            ..
        })
    ) {
        return Ok(out);
    }
    loop {
        out.push(cur.number()?);
        if matches!(
            cur.peek(),
            Some(Token {
                kind: TokenKind::Comma,
                ..
            })
        ) {
            cur.bump();
        } else {
            return Ok(out);
        }
    }
}

fn parse_pair(cur: &mut Cursor) -> Result<(u64, u64), SpecError> {
    cur.expect(TokenKind::LParen, "'('")?;
    let a = cur.number()?;
    cur.expect(TokenKind::Comma, "','")?;
    let b = cur.number()?;
    cur.expect(TokenKind::RParen, "')'")?;
    Ok((a, b))
}

fn parse_quoted(cur: &mut Cursor) -> Result<String, SpecError> {
    cur.expect(TokenKind::LParen, "'('")?;
    let s = cur.string()?;
    cur.expect(TokenKind::RParen, "')'")?;
    Ok(s)
}

fn parse_range(cur: &mut Cursor) -> Result<(u64, u64), SpecError> {
    let lo = cur.number()?;
    cur.expect(TokenKind::DotDot, "'..'")?;
    let hi = cur.number()?;
    Ok((lo, hi))
}

fn parse_assign(cur: &mut Cursor, names: &[String]) -> Result<Expr, SpecError> {
    cur.expect(TokenKind::LParen, "'('")?;
    cur.keyword("K")?;
    cur.expect(TokenKind::Eq, "'='")?;
    let alphabet = match cur.peek() {
        Some(Token {
            kind: TokenKind::Ident(w),
            ..
        }) if w == "inf" => {
            cur.bump();
            None
        }
        _ => Some(cur.number().map_err(|e| widen_expected(e, "'inf'"))?),
    };
    cur.expect(TokenKind::Comma, "','")?;
    cur.keyword("free")?;
    cur.expect(TokenKind::Eq, "'='")?;
    let free = parse_union(cur, names)?;
    cur.expect(TokenKind::Comma, "','")?;
    cur.keyword("fix")?;
    cur.expect(TokenKind::LBrace, "'{'")?;
    let mut fix = Vec::new();
    if !matches!(
        cur.peek(),
        Some(Token {
            kind: TokenKind::RBrace,
            ..
        })
    ) {
        loop {
            let coord = cur.number()?;
            cur.expect(TokenKind::Colon, "':'")?;
            let value = cur.number()?;
            fix.push((coord, value));
            if matches!(
                cur.peek(),
                Some(Token {
                    kind: TokenKind::Comma,
                    ..
                })
            ) {
                cur.bump();
            } else {
                break;
            }
        }
    }
    cur.expect(TokenKind::RBrace, "'}'")?;
    cur.expect(TokenKind::Comma, "','")?;
    cur.keyword("tail")?;
    cur.expect(TokenKind::Eq, "'='")?;
    cur.keyword("periodic")?;
    let tail = parse_quoted(cur)?;
    cur.expect(TokenKind::RParen, "')'")?;
    Ok(Expr::Assign {
        alphabet,
        free: Box::new(free),
        fix,
        tail,
    })
}

fn parse_table(cur: &mut Cursor) -> Result<Expr, SpecError> {
    cur.expect(TokenKind::LParen, "'('")?;
    cur.keyword("K")?;
    cur.expect(TokenKind::Eq, "'='")?;
    let alphabet = cur.number()?;
    cur.expect(TokenKind::Comma, "','")?;
    cur.keyword("support")?;
    cur.expect(TokenKind::LBrace, "'{'")?;
    let support = parse_num_list(cur)?;
    cur.expect(TokenKind::RBrace, "'}'")?;
    cur.expect(TokenKind::Comma, "','")?;
    let entries = cur.string()?;
    cur.expect(TokenKind::RParen, "')'")?;
    Ok(Expr::Table {
        alphabet,
        support,
        entries,
    })
}

fn parse_stream(cur: &mut Cursor) -> Result<Expr, SpecError> {
    cur.expect(TokenKind::LParen, "'('")?;
    cur.keyword("Y")?;
    cur.expect(TokenKind::Eq, "'='")?;
    let scale = match cur.peek() {
        Some(Token {
            kind: TokenKind::Ident(w),
            ..
        }) if w == "abcd" => {
            cur.bump();
            "abcd".to_string()
        }
        Some(Token {
            kind: TokenKind::Number(lex),
            ..
        }) if lex == "01" => {
            cur.bump();
            "01".to_string()
        }
        _ => return Err(cur.fail(&["'abcd'", "'01'"])),
    };
    cur.expect(TokenKind::Comma, "','")?;
    cur.keyword("prefix")?;
    cur.expect(TokenKind::Eq, "'='")?;
    let prefix = cur.string()?;
    cur.expect(TokenKind::Comma, "','")?;
    cur.keyword("period")?;
    cur.expect(TokenKind::Eq, "'='")?;
    let period = cur.string()?;
    cur.expect(TokenKind::RParen, "')'")?;
    Ok(Expr::Stream {
        scale,
        prefix,
        period,
    })
}
