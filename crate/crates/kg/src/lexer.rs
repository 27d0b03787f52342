//! Tokenizer shared by the Turtle-star reader and the query parser.

use crate::error::SyntaxError;

#[derive(Clone, Debug, PartialEq)]
pub(crate) enum Tok {
    IriRef(String),
    PName { prefix: String, local: String },
    Var(String),
    Str(String),
    Integer(String),
    Decimal(String),
    Double(String),
    Word(String),
    LangTag(String),
    BlankLabel(String),
    Punct(&'static str),
    Eof,
}

#[derive(Clone, Debug)]
pub(crate) struct Token {
    pub tok: Tok,
    pub line: usize,
    pub column: usize,
    pub text: String,
}

impl Token {
    pub fn error(&self, message: impl Into<String>) -> SyntaxError {
        SyntaxError {
            line: self.line,
            column: self.column,
            token: if self.tok == Tok::Eof {
                "<end of input>".into()
            } else {
                self.text.clone()
            },
            message: message.into(),
        }
    }

    pub fn is_punct(&self, p: &str) -> bool {
        matches!(&self.tok, Tok::Punct(q) if *q == p)
    }

    pub fn is_word(&self, w: &str) -> bool {
        matches!(&self.tok, Tok::Word(x) if x.eq_ignore_ascii_case(w))
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
pub(crate) enum Mode {
    Turtle,
    Query,
}

struct Cursor<'a> {
    chars: Vec<char>,
    pos: usize,
    line: usize,
    column: usize,
    _src: &'a str,
}

impl Cursor<'_> {
    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn peek_at(&self, n: usize) -> Option<char> {
        self.chars.get(self.pos + n).copied()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.chars.get(self.pos).copied()?;
        self.pos += 1;
        if c == '\n' {
            self.line += 1;
            self.column = 1;
        } else {
            self.column += 1;
        }
        Some(c)
    }
}

fn is_name_start(c: char) -> bool {
    c.is_alphabetic() || c == '_'
}

fn is_name_char(c: char) -> bool {
    c.is_alphanumeric() || c == '_' || c == '-'
}

pub(crate) fn tokenize(src: &str, mode: Mode) -> Result<Vec<Token>, SyntaxError> {
    let mut cur = Cursor {
        chars: src.chars().collect(),
        pos: 0,
        line: 1,
        column: 1,
        _src: src,
    };
    let mut out = Vec::new();
    loop {
        // whitespace and comments
        while let Some(c) = cur.peek() {
            if c.is_whitespace() {
                cur.bump();
            } else if c == '#' {
                while let Some(c) = cur.peek() {
                    if c == '\n' {
                        break;
                    }
                    cur.bump();
                }
            } else {
                break;
            }
        }
        let (line, column, start) = (cur.line, cur.column, cur.pos);
        let err = |cur: &Cursor, msg: &str| SyntaxError {
            line,
            column,
            token: cur.chars[start..cur.pos.max(start + 1).min(cur.chars.len())]
                .iter()
                .collect(),
            message: msg.into(),
        };
        let Some(c) = cur.peek() else {
            out.push(Token {
                tok: Tok::Eof,
                line,
                column,
                text: String::new(),
            });
            return Ok(out);
        };
        let tok = match c {
            '<' => {
                if cur.peek_at(1) == Some('<') {
                    cur.bump();
                    cur.bump();
                    Tok::Punct("<<")
                } else if let Some(iri) = scan_iri(&cur) {
                    for _ in 0..iri.chars().count() + 2 {
                        cur.bump();
                    }
                    Tok::IriRef(iri)
                } else if mode == Mode::Query {
                    cur.bump();
                    if cur.peek() == Some('=') {
                        cur.bump();
                        Tok::Punct("<=")
                    } else {
                        Tok::Punct("<")
                    }
                } else {
                    cur.bump();
                    return Err(err(&cur, "unterminated IRI"));
                }
            }
            '>' => {
                cur.bump();
                if cur.peek() == Some('>') {
                    cur.bump();
                    Tok::Punct(">>")
                } else if mode == Mode::Query && cur.peek() == Some('=') {
                    cur.bump();
                    Tok::Punct(">=")
                } else if mode == Mode::Query {
                    Tok::Punct(">")
                } else {
                    return Err(err(&cur, "unexpected `>`"));
                }
            }
            '"' | '\'' => Tok::Str(scan_string(&mut cur, c).map_err(|m| err(&cur, m))?),
            '?' | '$' if mode == Mode::Query => {
                cur.bump();
                let mut name = String::new();
                while let Some(c) = cur.peek() {
                    if is_name_char(c) && c != '-' {
                        name.push(c);
                        cur.bump();
                    } else {
                        break;
                    }
                }
                if name.is_empty() {
                    return Err(err(&cur, "empty variable name"));
                }
                Tok::Var(name)
            }
            '@' => {
                cur.bump();
                let mut name = String::new();
                while let Some(c) = cur.peek() {
                    if c.is_alphanumeric() || c == '-' {
                        name.push(c);
                        cur.bump();
                    } else {
                        break;
                    }
                }
                if name.is_empty() {
                    return Err(err(&cur, "dangling `@`"));
                }
                Tok::LangTag(name)
            }
            '^' if cur.peek_at(1) == Some('^') => {
                cur.bump();
                cur.bump();
                Tok::Punct("^^")
            }
            '_' if cur.peek_at(1) == Some(':') => {
                cur.bump();
                cur.bump();
                let mut name = String::new();
                while let Some(c) = cur.peek().filter(|c| is_name_char(*c)) {
                    name.push(c);
                    cur.bump();
                }
                Tok::BlankLabel(name)
            }
            '0'..='9' => scan_number(&mut cur, String::new()),
            '.' if cur.peek_at(1).is_some_and(|d| d.is_ascii_digit()) => {
                scan_number(&mut cur, String::new())
            }
            '+' | '-'
                if mode == Mode::Turtle
                    && (cur.peek_at(1).is_some_and(|d| d.is_ascii_digit())
                        || (cur.peek_at(1) == Some('.')
                            && cur.peek_at(2).is_some_and(|d| d.is_ascii_digit()))) =>
            {
                cur.bump();
                scan_number(&mut cur, c.to_string())
            }
            '&' if mode == Mode::Query && cur.peek_at(1) == Some('&') => {
                cur.bump();
                cur.bump();
                Tok::Punct("&&")
            }
            '|' if mode == Mode::Query && cur.peek_at(1) == Some('|') => {
                cur.bump();
                cur.bump();
                Tok::Punct("||")
            }
            '!' if mode == Mode::Query => {
                cur.bump();
                if cur.peek() == Some('=') {
                    cur.bump();
                    Tok::Punct("!=")
                } else {
                    Tok::Punct("!")
                }
            }
            c if "{}()[].;,*+-/=|^".contains(c) => {
                cur.bump();
                Tok::Punct(match c {
                    '{' => "{",
                    '}' => "}",
                    '(' => "(",
                    ')' => ")",
                    '[' => "[",
                    ']' => "]",
                    '.' => ".",
                    ';' => ";",
                    ',' => ",",
                    '*' => "*",
                    '+' => "+",
                    '-' => "-",
                    '/' => "/",
                    '=' => "=",
                    '|' => "|",
                    _ => "^",
                })
            }
            c if is_name_start(c) || c == ':' => {
                let mut prefix = String::new();
                while let Some(c) = cur.peek().filter(|c| is_name_char(*c) || *c == '.') {
                    prefix.push(c);
                    cur.bump();
                }
                if cur.peek() == Some(':') {
                    cur.bump();
                    let mut local = String::new();
                    while let Some(c) = cur.peek().filter(|c| is_name_char(*c) || *c == '.') {
                        local.push(c);
                        cur.bump();
                    }
                    // a trailing dot ends the statement, not the name
                    while local.ends_with('.') {
                        local.pop();
                        cur.pos -= 1;
                        cur.column -= 1;
                    }
                    Tok::PName { prefix, local }
                } else {
                    while prefix.ends_with('.') {
                        prefix.pop();
                        cur.pos -= 1;
                        cur.column -= 1;
                    }
                    Tok::Word(prefix)
                }
            }
            _ => {
                cur.bump();
                return Err(err(&cur, "unexpected character"));
            }
        };
        let text: String = cur.chars[start..cur.pos].iter().collect();
        out.push(Token {
            tok,
            line,
            column,
            text,
        });
    }
}

fn scan_iri(cur: &Cursor) -> Option<String> {
    let mut i = cur.pos + 1;
    let mut s = String::new();
    while let Some(&c) = cur.chars.get(i) {
        if c == '>' {
            return Some(s);
        }
        if c.is_whitespace() || "<\"{}|^`\\".contains(c) {
            return None;
        }
        s.push(c);
        i += 1;
    }
    None
}

fn scan_string(cur: &mut Cursor, quote: char) -> Result<String, &'static str> {
    cur.bump();
    let mut s = String::new();
    loop {
        match cur.bump() {
            None | Some('\n') => return Err("unterminated string"),
            Some(c) if c == quote => return Ok(s),
            Some('\\') => {
                let e = cur.bump().ok_or("unterminated escape")?;
                match e {
                    't' => s.push('\t'),
                    'b' => s.push('\u{8}'),
                    'n' => s.push('\n'),
                    'r' => s.push('\r'),
                    'f' => s.push('\u{c}'),
                    '"' => s.push('"'),
                    '\'' => s.push('\''),
                    '\\' => s.push('\\'),
                    'u' | 'U' => {
                        let n = if e == 'u' { 4 } else { 8 };
                        let mut hex = String::new();
                        for _ in 0..n {
                            hex.push(cur.bump().ok_or("truncated unicode escape")?);
                        }
                        let v = u32::from_str_radix(&hex, 16).map_err(|_| "bad unicode escape")?;
                        s.push(char::from_u32(v).ok_or("bad unicode escape")?);
                    }
                    _ => return Err("unknown escape"),
                }
            }
            Some(c) => s.push(c),
        }
    }
}

fn scan_number(cur: &mut Cursor, mut s: String) -> Tok {
    while let Some(c) = cur.peek().filter(|c| c.is_ascii_digit()) {
        s.push(c);
        cur.bump();
    }
    let mut decimal = false;
    if cur.peek() == Some('.') && cur.peek_at(1).is_some_and(|d| d.is_ascii_digit()) {
        decimal = true;
        s.push('.');
        cur.bump();
        while let Some(c) = cur.peek().filter(|c| c.is_ascii_digit()) {
            s.push(c);
            cur.bump();
        }
    }
    if matches!(cur.peek(), Some('e' | 'E')) {
        let sign = matches!(cur.peek_at(1), Some('+' | '-'));
        let digit_at = if sign { 2 } else { 1 };
        if cur.peek_at(digit_at).is_some_and(|d| d.is_ascii_digit()) {
            for _ in 0..digit_at {
                s.push(cur.bump().expect("peeked"));
            }
            while let Some(c) = cur.peek().filter(|c| c.is_ascii_digit()) {
                s.push(c);
                cur.bump();
            }
            return Tok::Double(s);
        }
    }
    if decimal {
        Tok::Decimal(s)
    } else {
        Tok::Integer(s)
    }
}
