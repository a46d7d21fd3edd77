use std::fmt;

use super::ScriptError;

#[derive(Debug, Clone, PartialEq)]
pub(super) enum TokenKind {
    Ident(String),
    Str(String),
    Num(f64),
    LParen,
    RParen,
    LBracket,
    RBracket,
    Comma,
    Colon,
    Eof,
}

impl fmt::Display for TokenKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TokenKind::Ident(s) => write!(f, "identifier `{s}`"),
            TokenKind::Str(s) => write!(f, "string {s:?}"),
            TokenKind::Num(n) => write!(f, "number {n}"),
            TokenKind::LParen => f.write_str("`(`"),
            TokenKind::RParen => f.write_str("`)`"),
            TokenKind::LBracket => f.write_str("`[`"),
            TokenKind::RBracket => f.write_str("`]`"),
            TokenKind::Comma => f.write_str("`,`"),
            TokenKind::Colon => f.write_str("`:`"),
            TokenKind::Eof => f.write_str("end of input"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub(super) struct Token {
    pub kind: TokenKind,
    pub line: usize,
    pub column: usize,
}

impl Token {
    pub fn error(&self, message: String) -> ScriptError {
        ScriptError::Syntax { line: self.line, column: self.column, message }
    }
}

pub(super) struct Lexer<'a> {
    chars: std::iter::Peekable<std::str::Chars<'a>>,
    line: usize,
    column: usize,
}

impl<'a> Lexer<'a> {
    pub fn new(text: &'a str) -> Self {
        let text = text.strip_prefix('\u{FEFF}').unwrap_or(text);
        Self { chars: text.chars().peekable(), line: 1, column: 1 }
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.chars.next()?;
        if c == '\n' {
            self.line += 1;
            self.column = 1;
        } else {
            self.column += 1;
        }
        Some(c)
    }

    fn error(&self, line: usize, column: usize, message: impl Into<String>) -> ScriptError {
        ScriptError::Syntax { line, column, message: message.into() }
    }

    pub fn next_token(&mut self) -> Result<Token, ScriptError> {
        while self.chars.peek().is_some_and(|c| c.is_whitespace()) {
            self.bump();
        }
        let (line, column) = (self.line, self.column);
        let token = |kind| Ok(Token { kind, line, column });
        let Some(c) = self.bump() else {
            return token(TokenKind::Eof);
        };
        match c {
            '(' => token(TokenKind::LParen),
            ')' => token(TokenKind::RParen),
            '[' => token(TokenKind::LBracket),
            ']' => token(TokenKind::RBracket),
            ',' => token(TokenKind::Comma),
            ':' => token(TokenKind::Colon),
            '"' => {
                let mut s = String::new();
                loop {
                    match self.bump() {
                        None => return Err(self.error(line, column, "unterminated string")),
                        Some('"') => break,
                        Some('\\') => match self.bump() {
                            Some('"') => s.push('"'),
                            Some('\\') => s.push('\\'),
                            Some('n') => s.push('\n'),
                            Some('t') => s.push('\t'),
                            Some(other) => {
                                return Err(self.error(
                                    self.line,
                                    self.column - 1,
                                    format!("unknown escape `\\{other}`"),
                                ))
                            }
                            None => return Err(self.error(line, column, "unterminated string")),
                        },
                        Some(c) => s.push(c),
                    }
                }
                token(TokenKind::Str(s))
            }
            c if c.is_ascii_digit() || c == '-' || c == '+' => {
                let mut s = String::from(c);
                while let Some(&n) = self.chars.peek() {
                    let exp_sign = matches!(n, '+' | '-') && s.ends_with(['e', 'E']);
                    if n.is_ascii_digit() || n == '.' || n == 'e' || n == 'E' || exp_sign {
                        s.push(n);
                        self.bump();
                    } else {
                        break;
                    }
                }
                match s.parse::<f64>() {
                    Ok(n) if n.is_finite() => token(TokenKind::Num(n)),
                    _ => Err(self.error(line, column, format!("malformed number `{s}`"))),
                }
            }
            c if c.is_alphabetic() || c == '_' => {
                let mut s = String::from(c);
                while let Some(&n) = self.chars.peek() {
                    if n.is_alphanumeric() || n == '_' {
                        s.push(n);
                        self.bump();
                    } else {
                        break;
                    }
                }
                token(TokenKind::Ident(s))
            }
            other => Err(self.error(line, column, format!("unexpected character `{other}`"))),
        }
    }
}
