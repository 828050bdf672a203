use std::fmt;

use super::ParseError;

#[derive(Debug, Clone, PartialEq)]
pub enum Tok {
    Ident(String),
    /// A backquoted name; never a keyword.
    Quoted(String),
    Int(i64),
    /// A numeric literal with a fractional part, kept as written.
    Decimal(String),
    Str(String),
    /// `dewey"1.2"` or `decimal"1/3"`.
    Typed(String, String),
    LBrace,
    RBrace,
    LParen,
    RParen,
    Comma,
    Colon,
    Dot,
    Bar,
    Amp,
    Minus,
    AndAnd,
    OrOr,
    Bang,
    Cmp(&'static str),
    Assign,
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) | Tok::Quoted(s) => write!(f, "`{s}`"),
            Tok::Int(i) => write!(f, "`{i}`"),
            Tok::Decimal(d) => write!(f, "`{d}`"),
            Tok::Str(s) => write!(f, "\"{s}\""),
            Tok::Typed(k, s) => write!(f, "{k}\"{s}\""),
            Tok::LBrace => f.write_str("`{`"),
            Tok::RBrace => f.write_str("`}`"),
            Tok::LParen => f.write_str("`(`"),
            Tok::RParen => f.write_str("`)`"),
            Tok::Comma => f.write_str("`,`"),
            Tok::Colon => f.write_str("`:`"),
            Tok::Dot => f.write_str("`.`"),
            Tok::Bar => f.write_str("`|`"),
            Tok::Amp => f.write_str("`&`"),
            Tok::Minus => f.write_str("`-`"),
            Tok::AndAnd => f.write_str("`&&`"),
            Tok::OrOr => f.write_str("`||`"),
            Tok::Bang => f.write_str("`!`"),
            Tok::Cmp(op) => write!(f, "`{op}`"),
            Tok::Assign => f.write_str("`=`"),
            Tok::Eof => f.write_str("end of input"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Spanned {
    pub tok: Tok,
    pub line: usize,
    pub col: usize,
}

pub fn is_ident_start(c: char) -> bool {
    c.is_alphabetic() || c == '_' || c == '@'
}

pub fn is_ident_char(c: char) -> bool {
    c.is_alphanumeric() || c == '_' || c == '@' || c == '\''
}

pub fn tokenize(src: &str) -> Result<Vec<Spanned>, ParseError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    let err = |line, col, msg: String| ParseError { line, col, message: msg };

    while i < chars.len() {
        let c = chars[i];
        let (start_line, start_col) = (line, col);
        if c.is_whitespace() {
            advance(&chars, 1, &mut i, &mut line, &mut col);
            continue;
        }
        if c == '#' {
            while i < chars.len() && chars[i] != '\n' {
                advance(&chars, 1, &mut i, &mut line, &mut col);
            }
            continue;
        }
        let next = chars.get(i + 1).copied();
        let (tok, len) = match c {
            '{' => (Tok::LBrace, 1),
            '}' => (Tok::RBrace, 1),
            '(' => (Tok::LParen, 1),
            ')' => (Tok::RParen, 1),
            ',' => (Tok::Comma, 1),
            ':' => (Tok::Colon, 1),
            '.' => (Tok::Dot, 1),
            '-' => (Tok::Minus, 1),
            '|' if next == Some('|') => (Tok::OrOr, 2),
            '|' => (Tok::Bar, 1),
            '&' if next == Some('&') => (Tok::AndAnd, 2),
            '&' => (Tok::Amp, 1),
            '!' if next == Some('=') => (Tok::Cmp("!="), 2),
            '!' => (Tok::Bang, 1),
            '=' if next == Some('=') => (Tok::Assign, 2),
            '=' => (Tok::Assign, 1),
            '<' if next == Some('=') => (Tok::Cmp("<="), 2),
            '<' if next == Some('>') => (Tok::Cmp("!="), 2),
            '<' => (Tok::Cmp("<"), 1),
            '>' if next == Some('=') => (Tok::Cmp(">="), 2),
            '>' => (Tok::Cmp(">"), 1),
            '`' => {
                let end = chars[i + 1..]
                    .iter()
                    .position(|&c| c == '`' || c == '\n')
                    .filter(|&k| chars[i + 1 + k] == '`' && k > 0)
                    .ok_or_else(|| err(line, col, "unterminated or empty quoted name".into()))?;
                (Tok::Quoted(chars[i + 1..i + 1 + end].iter().collect()), end + 2)
            }
            '"' => {
                let (s, len) = lex_string(&chars[i..]).ok_or_else(|| err(line, col, "unterminated string literal".into()))?;
                (Tok::Str(s), len)
            }
            c if c.is_ascii_digit() => {
                let mut j = i;
                while j < chars.len() && chars[j].is_ascii_digit() {
                    j += 1;
                }
                if j + 1 < chars.len() && chars[j] == '.' && chars[j + 1].is_ascii_digit() {
                    j += 1;
                    while j < chars.len() && chars[j].is_ascii_digit() {
                        j += 1;
                    }
                    (Tok::Decimal(chars[i..j].iter().collect()), j - i)
                } else {
                    let text: String = chars[i..j].iter().collect();
                    let v = text
                        .parse::<i64>()
                        .map_err(|_| err(line, col, format!("integer literal `{text}` out of range")))?;
                    (Tok::Int(v), j - i)
                }
            }
            c if is_ident_start(c) => {
                let mut j = i;
                while j < chars.len() && is_ident_char(chars[j]) {
                    j += 1;
                }
                let word: String = chars[i..j].iter().collect();
                if j < chars.len() && chars[j] == '"' && (word == "dewey" || word == "decimal") {
                    let (s, len) =
                        lex_string(&chars[j..]).ok_or_else(|| err(line, col, "unterminated string literal".into()))?;
                    (Tok::Typed(word, s), j - i + len)
                } else {
                    (Tok::Ident(word), j - i)
                }
            }
            other => return Err(err(line, col, format!("unexpected character `{other}`"))),
        };
        advance(&chars, len, &mut i, &mut line, &mut col);
        out.push(Spanned {
            tok,
            line: start_line,
            col: start_col,
        });
    }
    out.push(Spanned { tok: Tok::Eof, line, col });
    Ok(out)
}

fn advance(chars: &[char], n: usize, i: &mut usize, line: &mut usize, col: &mut usize) {
    for _ in 0..n {
        if chars[*i] == '\n' {
            *line += 1;
            *col = 1;
        } else {
            *col += 1;
        }
        *i += 1;
    }
}

/// Lexes a double-quoted string starting at `chars[0]`; returns the
/// unescaped text and the number of characters consumed.
fn lex_string(chars: &[char]) -> Option<(String, usize)> {
    let mut s = String::new();
    let mut i = 1;
    while i < chars.len() {
        match chars[i] {
            '"' => return Some((s, i + 1)),
            '\\' => {
                let e = *chars.get(i + 1)?;
                s.push(match e {
                    'n' => '\n',
                    't' => '\t',
                    other => other,
                });
                i += 2;
            }
            c => {
                s.push(c);
                i += 1;
            }
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(s: &str) -> Vec<Tok> {
        tokenize(s).unwrap().into_iter().map(|t| t.tok).collect()
    }

    #[test]
    fn operators_and_literals() {
        assert_eq!(
            toks("x.age >= 3.5 && y != \"a\\\"b\" || !z"),
            vec![
                Tok::Ident("x".into()),
                Tok::Dot,
                Tok::Ident("age".into()),
                Tok::Cmp(">="),
                Tok::Decimal("3.5".into()),
                Tok::AndAnd,
                Tok::Ident("y".into()),
                Tok::Cmp("!="),
                Tok::Str("a\"b".into()),
                Tok::OrOr,
                Tok::Bang,
                Tok::Ident("z".into()),
                Tok::Eof
            ]
        );
        assert_eq!(toks("dewey\"1.2\"")[0], Tok::Typed("dewey".into(), "1.2".into()));
        assert_eq!(toks("(A - B | C & D)")[2], Tok::Minus);
        assert_eq!(toks("`first-name`")[0], Tok::Quoted("first-name".into()));
        assert!(tokenize("`open").is_err());
    }

    #[test]
    fn positions_are_tracked() {
        let t = tokenize("{ x |\n  x in S }").unwrap();
        let x2 = &t[3];
        assert_eq!((x2.line, x2.col), (2, 3));
        let e = tokenize("{ x | x ^ y }").unwrap_err();
        assert_eq!((e.line, e.col), (1, 9));
    }
}
