//! S-expression reader with source positions.

use std::fmt;

use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Pos {
    pub line: u32,
    pub col: u32,
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AtomKind {
    /// Symbols, numerals, keywords and literals such as `#b01`.
    Simple,
    /// `|...|` symbol; the text excludes the bars.
    Quoted,
    /// `"..."`; the text is unescaped.
    Str,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SExpr {
    Atom { text: String, kind: AtomKind, pos: Pos },
    List { items: Vec<SExpr>, pos: Pos },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{pos}: {msg}")]
pub struct SyntaxError {
    pub pos: Pos,
    pub msg: String,
}

impl SExpr {
    pub fn pos(&self) -> Pos {
        match self {
            SExpr::Atom { pos, .. } | SExpr::List { pos, .. } => *pos,
        }
    }

    /// Text of an unquoted atom.
    pub fn as_atom(&self) -> Option<&str> {
        match self {
            SExpr::Atom { text, kind: AtomKind::Simple, .. } => Some(text),
            _ => None,
        }
    }

    /// Name of a plain or quoted symbol.
    pub fn as_symbol(&self) -> Option<&str> {
        match self {
            SExpr::Atom { text, kind: AtomKind::Simple | AtomKind::Quoted, .. } => Some(text),
            _ => None,
        }
    }

    pub fn as_list(&self) -> Option<&[SExpr]> {
        match self {
            SExpr::List { items, .. } => Some(items),
            _ => None,
        }
    }
}

impl fmt::Display for SExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SExpr::Atom { text, kind: AtomKind::Simple, .. } => write!(f, "{text}"),
            SExpr::Atom { text, kind: AtomKind::Quoted, .. } => write!(f, "|{text}|"),
            SExpr::Atom { text, kind: AtomKind::Str, .. } => {
                write!(f, "\"{}\"", text.replace('"', "\"\""))
            }
            SExpr::List { items, .. } => {
                write!(f, "(")?;
                for (i, it) in items.iter().enumerate() {
                    if i > 0 {
                        write!(f, " ")?;
                    }
                    write!(f, "{it}")?;
                }
                write!(f, ")")
            }
        }
    }
}

struct Reader<'a> {
    chars: std::iter::Peekable<std::str::Chars<'a>>,
    pos: Pos,
}

impl Reader<'_> {
    fn bump(&mut self) -> Option<char> {
        let c = self.chars.next()?;
        if c == '\n' {
            self.pos.line += 1;
            self.pos.col = 1;
        } else {
            self.pos.col += 1;
        }
        Some(c)
    }

    fn skip_ws(&mut self) {
        while let Some(&c) = self.chars.peek() {
            if c.is_whitespace() {
                self.bump();
            } else if c == ';' {
                while let Some(c) = self.bump() {
                    if c == '\n' {
                        break;
                    }
                }
            } else {
                break;
            }
        }
    }

    fn err(&self, pos: Pos, msg: impl Into<String>) -> SyntaxError {
        SyntaxError { pos, msg: msg.into() }
    }

    fn read(&mut self) -> Result<Option<SExpr>, SyntaxError> {
        self.skip_ws();
        let pos = self.pos;
        let Some(&c) = self.chars.peek() else { return Ok(None) };
        match c {
            '(' => {
                self.bump();
                let mut items = Vec::new();
                loop {
                    self.skip_ws();
                    match self.chars.peek() {
                        None => return Err(self.err(pos, "unclosed parenthesis")),
                        Some(')') => {
                            self.bump();
                            return Ok(Some(SExpr::List { items, pos }));
                        }
                        Some(_) => items.push(self.read()?.expect("input remains")),
                    }
                }
            }
            ')' => Err(self.err(pos, "unexpected ')'")),
            '|' => {
                self.bump();
                let mut text = String::new();
                loop {
                    match self.bump() {
                        None => return Err(self.err(pos, "unterminated quoted symbol")),
                        Some('|') => break,
                        Some('\\') => return Err(self.err(self.pos, "'\\' in quoted symbol")),
                        Some(c) => text.push(c),
                    }
                }
                Ok(Some(SExpr::Atom { text, kind: AtomKind::Quoted, pos }))
            }
            '"' => {
                self.bump();
                let mut text = String::new();
                loop {
                    match self.bump() {
                        None => return Err(self.err(pos, "unterminated string")),
                        Some('"') => {
                            if self.chars.peek() == Some(&'"') {
                                self.bump();
                                text.push('"');
                            } else {
                                break;
                            }
                        }
                        Some(c) => text.push(c),
                    }
                }
                Ok(Some(SExpr::Atom { text, kind: AtomKind::Str, pos }))
            }
            _ => {
                let mut text = String::new();
                while let Some(&c) = self.chars.peek() {
                    if c.is_whitespace() || "()|\";".contains(c) {
                        break;
                    }
                    text.push(c);
                    self.bump();
                }
                Ok(Some(SExpr::Atom { text, kind: AtomKind::Simple, pos }))
            }
        }
    }
}

pub fn parse_all(text: &str) -> Result<Vec<SExpr>, SyntaxError> {
    let mut r = Reader { chars: text.chars().peekable(), pos: Pos { line: 1, col: 1 } };
    let mut out = Vec::new();
    while let Some(e) = r.read()? {
        out.push(e);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reads_nested_lists() {
        let e = parse_all("(a (b |c d|) \"x\"\"y\") ; comment\n#b01").unwrap();
        assert_eq!(e.len(), 2);
        assert_eq!(e[0].to_string(), "(a (b |c d|) \"x\"\"y\")");
        let l = e[0].as_list().unwrap();
        assert_eq!(l[1].as_list().unwrap()[1].as_symbol(), Some("c d"));
        assert_eq!(e[1].as_atom(), Some("#b01"));
        assert_eq!(e[1].pos(), Pos { line: 2, col: 1 });
    }

    #[test]
    fn errors_have_positions() {
        let e = parse_all("(a\n  (b)").unwrap_err();
        assert_eq!(e.pos, Pos { line: 1, col: 1 });
        let e = parse_all("a\n )").unwrap_err();
        assert_eq!(e.pos, Pos { line: 2, col: 2 });
        assert!(parse_all("|abc").is_err());
    }
}
