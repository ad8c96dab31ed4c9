//! Line lexer. Strings are single tokens, `#` starts a comment.

use super::SpecError;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TokenKind {
    Ident(String),
    /// Digits, lexeme kept verbatim so `01` is distinguishable from `1`.
    Number(String),
    /// Quoted with `"` or `'`; the stored text has no quotes.
    Str(String),
    Eq,
    LParen,
    RParen,
    LBrace,
    RBrace,
    Comma,
    Colon,
    Semi,
    Pipe,
    Amp,
    Tilde,
    Slash,
    Dot,
    DotDot,
}

impl TokenKind {
    /// Characters the token occupies in its source line, quotes included.
    pub fn width(&self) -> usize {
        match self {
            TokenKind::Ident(s) | TokenKind::Number(s) => s.chars().count(),
            TokenKind::Str(s) => s.chars().count() + 2,
            TokenKind::DotDot => 2,
            _ => 1,
        }
    }

    pub fn describe(&self) -> String {
        match self {
            TokenKind::Ident(s) | TokenKind::Number(s) => format!("'{s}'"),
            TokenKind::Str(s) => format!("\"{s}\""),
            TokenKind::Eq => "'='".into(),
            TokenKind::LParen => "'('".into(),
            TokenKind::RParen => "')'".into(),
            TokenKind::LBrace => "'{'".into(),
            TokenKind::RBrace => "'}'".into(),
            TokenKind::Comma => "','".into(),
            TokenKind::Colon => "':'".into(),
            TokenKind::Semi => "';'".into(),
            TokenKind::Pipe => "'|'".into(),
            TokenKind::Amp => "'&'".into(),
            TokenKind::Tilde => "'~'".into(),
            TokenKind::Slash => "'/'".into(),
            TokenKind::Dot => "'.'".into(),
            TokenKind::DotDot => "'..'".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub kind: TokenKind,
    pub line: usize,
    /// 1-based character column of the first character.
    pub column: usize,
}

/// Splits one line into tokens. Stops at `#` outside of strings.
pub fn lex_line(line: usize, text: &str) -> Result<Vec<Token>, SpecError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let column = i + 1;
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        if c == '#' {
            break;
        }
        if c == '"' || c == '\'' {
            let quote = c;
            let start = i + 1;
            let mut j = start;
            while j < chars.len() && chars[j] != quote {
                j += 1;
            }
            if j == chars.len() {
                return Err(SpecError::Parse {
                    line,
                    column,
                    expected: vec!["a closing quote".into()],
                    found: "end of line".into(),
                });
            }
            let body: String = chars[start..j].iter().collect();
            out.push(Token {
                kind: TokenKind::Str(body),
                line,
                column,
            });
            i = j + 1;
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            let word: String = chars[start..i].iter().collect();
            out.push(Token {
                kind: TokenKind::Ident(word),
                line,
                column,
            });
            continue;
        }
        if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let digits: String = chars[start..i].iter().collect();
            out.push(Token {
                kind: TokenKind::Number(digits),
                line,
                column,
            });
            continue;
        }
        let kind = match c {
            '=' => TokenKind::Eq,
            '(' => TokenKind::LParen,
            ')' => TokenKind::RParen,
            '{' => TokenKind::LBrace,
            '}' => TokenKind::RBrace,
            ',' => TokenKind::Comma,
            ':' => TokenKind::Colon,
            ';' => TokenKind::Semi,
            '|' => TokenKind::Pipe,
            '&' => TokenKind::Amp,
            '~' => TokenKind::Tilde,
            '/' => TokenKind::Slash,
            '.' => {
                if chars.get(i + 1) == Some(&'.') {
                    i += 1;
                    TokenKind::DotDot
                } else {
                    TokenKind::Dot
                }
            }
            other => {
                return Err(SpecError::Parse {
                    line,
                    column,
                    expected: vec!["a token".into()],
                    found: format!("'{other}'"),
                })
            }
        };
        out.push(Token { kind, line, column });
        i += 1;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn strings_keep_their_body_and_position() {
        let toks = lex_line(3, r#"w = periodic("1101")"#).unwrap();
        assert_eq!(toks.len(), 6);
        assert_eq!(toks[4].kind, TokenKind::Str("1101".into()));
        assert_eq!(toks[4].column, 14);
        assert_eq!(toks[4].line, 3);
    }

    #[test]
    fn single_quotes_work_too() {
        let toks = lex_line(1, "periodic('110')").unwrap();
        assert_eq!(toks[2].kind, TokenKind::Str("110".into()));
    }

    #[test]
    fn comments_end_the_line_but_not_inside_strings() {
        let toks = lex_line(1, "a = finite{1} # note").unwrap();
        assert_eq!(toks.len(), 6);
        let toks = lex_line(1, "s = '#no comment'").unwrap();
        assert_eq!(toks[2].kind, TokenKind::Str("#no comment".into()));
    }

    #[test]
    fn dots_and_ranges_are_distinct() {
        let toks = lex_line(1, "0..3 0.9").unwrap();
        let kinds: Vec<_> = toks.into_iter().map(|t| t.kind).collect();
        assert_eq!(
            kinds,
            vec![
                TokenKind::Number("0".into()),
                TokenKind::DotDot,
                TokenKind::Number("3".into()),
                TokenKind::Number("0".into()),
                TokenKind::Dot,
                TokenKind::Number("9".into()),
            ]
        );
    }

    #[test]
    fn leading_zeros_survive_in_the_lexeme() {
        let toks = lex_line(1, "Y=01").unwrap();
        assert_eq!(toks[2].kind, TokenKind::Number("01".into()));
    }

    #[test]
    fn unterminated_strings_point_at_the_quote() {
        let err = lex_line(2, "w = \"110").unwrap_err();
        assert_eq!(
            err,
            SpecError::Parse {
                line: 2,
                column: 5,
                expected: vec!["a closing quote".into()],
                found: "end of line".into(),
            }
        );
    }

    #[test]
    fn stray_characters_are_rejected() {
        let err = lex_line(1, "a = b $ c").unwrap_err();
        assert!(matches!(err, SpecError::Parse { column: 7, .. }));
    }

    #[test]
    fn widths_cover_the_source_extent() {
        let text = "m = majority{0..4; tie=1} # x";
        let toks = lex_line(1, text).unwrap();
        for pair in toks.windows(2) {
            assert!(pair[0].column + pair[0].kind.width() <= pair[1].column);
        }
        assert_eq!(TokenKind::Str("012".into()).width(), 5);
        assert_eq!(TokenKind::DotDot.width(), 2);
    }
}
