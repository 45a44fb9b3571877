//! Tokens shared by the constraint and architecture languages.

use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Pos {
    pub line: usize,
    pub col: usize,
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Tok {
    Ident(String),
    Int(i64),
    Real(f64),
    Str(String),
    Sym(&'static str),
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "`{s}`"),
            Tok::Int(k) => write!(f, "`{k}`"),
            Tok::Real(x) => write!(f, "`{x:?}`"),
            Tok::Str(s) => write!(f, "string {s:?}"),
            Tok::Sym(s) => write!(f, "`{s}`"),
            Tok::Eof => f.write_str("end of input"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Token {
    pub tok: Tok,
    pub pos: Pos,
    /// First token on its line.
    pub line_start: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LexError {
    pub pos: Pos,
    pub message: String,
}

const SYMBOLS: [&str; 20] = [
    "==", "!=", "<=", ">=", "=>", "[", "]", "(", ")", "{", "}", ",", ":", "|", ".", "=", "<", ">", "+",
    "*",
];

/// Splits `src` into tokens. `#` starts a comment outside strings.
pub fn lex(src: &str, first_line: usize) -> Result<Vec<Token>, LexError> {
    let mut out = Vec::new();
    for (offset, line) in src.lines().enumerate() {
        lex_line(line, first_line + offset, &mut out)?;
    }
    let last = out.last().map(|t: &Token| t.pos.line + 1).unwrap_or(first_line);
    out.push(Token {
        tok: Tok::Eof,
        pos: Pos { line: last, col: 1 },
        line_start: true,
    });
    Ok(out)
}

fn lex_line(line: &str, line_no: usize, out: &mut Vec<Token>) -> Result<(), LexError> {
    let chars: Vec<char> = line.chars().collect();
    let mut i = 0;
    let mut line_start = true;
    while i < chars.len() {
        let c = chars[i];
        let pos = Pos {
            line: line_no,
            col: i + 1,
        };
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        if c == '#' {
            break;
        }
        let tok = if c == '"' || c == '\'' {
            let (s, next) = lex_string(&chars, i, pos)?;
            i = next;
            Tok::Str(s)
        } else if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let mut real = false;
            if i + 1 < chars.len() && chars[i] == '.' && chars[i + 1].is_ascii_digit() {
                real = true;
                i += 1;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
            }
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                let mut j = i + 1;
                if j < chars.len() && (chars[j] == '-' || chars[j] == '+') {
                    j += 1;
                }
                if j < chars.len() && chars[j].is_ascii_digit() {
                    real = true;
                    i = j;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            let text: String = chars[start..i].iter().collect();
            if real {
                Tok::Real(text.parse().map_err(|_| LexError {
                    pos,
                    message: format!("bad number `{text}`"),
                })?)
            } else {
                Tok::Int(text.parse().map_err(|_| LexError {
                    pos,
                    message: format!("integer `{text}` out of range"),
                })?)
            }
        } else if c.is_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            Tok::Ident(chars[start..i].iter().collect())
        } else if c == '-' {
            i += 1;
            Tok::Sym("-")
        } else {
            let rest: String = chars[i..chars.len().min(i + 2)].iter().collect();
            let Some(sym) = SYMBOLS.iter().find(|s| rest.starts_with(**s)) else {
                return Err(LexError {
                    pos,
                    message: format!("unexpected character `{c}`"),
                });
            };
            i += sym.len();
            Tok::Sym(sym)
        };
        out.push(Token {
            tok,
            pos,
            line_start,
        });
        line_start = false;
    }
    Ok(())
}

fn lex_string(chars: &[char], start: usize, pos: Pos) -> Result<(String, usize), LexError> {
    let quote = chars[start];
    let mut s = String::new();
    let mut i = start + 1;
    while i < chars.len() {
        match chars[i] {
            '\\' if i + 1 < chars.len() => {
                s.push(match chars[i + 1] {
                    'n' => '\n',
                    't' => '\t',
                    other => other,
                });
                i += 2;
            }
            c if c == quote => return Ok((s, i + 1)),
            c => {
                s.push(c);
                i += 1;
            }
        }
    }
    Err(LexError {
        pos,
        message: "unterminated string".into(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(src: &str) -> Vec<Tok> {
        lex(src, 1).unwrap().into_iter().map(|t| t.tok).collect()
    }

    #[test]
    fn bounds_and_operators() {
        assert_eq!(
            toks("within[0.8*MAX, -10] a.b >= 2 # note"),
            vec![
                Tok::Ident("within".into()),
                Tok::Sym("["),
                Tok::Real(0.8),
                Tok::Sym("*"),
                Tok::Ident("MAX".into()),
                Tok::Sym(","),
                Tok::Sym("-"),
                Tok::Int(10),
                Tok::Sym("]"),
                Tok::Ident("a".into()),
                Tok::Sym("."),
                Tok::Ident("b".into()),
                Tok::Sym(">="),
                Tok::Int(2),
                Tok::Eof,
            ]
        );
    }

    #[test]
    fn strings_and_positions() {
        let t = lex("x == 'Village'\n  y == \"a\\\"b\"", 5).unwrap();
        assert_eq!(t[2].tok, Tok::Str("Village".into()));
        assert_eq!(t[3].pos, Pos { line: 6, col: 3 });
        assert!(t[3].line_start);
        assert_eq!(t[5].tok, Tok::Str("a\"b".into()));
        assert!(lex("\"open", 1).is_err());
    }

    #[test]
    fn exponent_reals() {
        assert_eq!(toks("1e-5 2.5E3"), vec![Tok::Real(1e-5), Tok::Real(2.5e3), Tok::Eof]);
    }
}
