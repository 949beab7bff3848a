//! S-expression reader for PDDL text.
//!
//! `;` comments run to end of line and are dropped before tokenizing.
//! Positions are 1-based line/column pairs in the original text.

use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Pos {
    pub line: usize,
    pub column: usize,
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.column)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SExpr {
    Symbol(String, Pos),
    List(Vec<SExpr>, Pos),
}

impl SExpr {
    pub fn pos(&self) -> Pos {
        match self {
            SExpr::Symbol(_, p) | SExpr::List(_, p) => *p,
        }
    }

    pub fn as_symbol(&self) -> Option<&str> {
        match self {
            SExpr::Symbol(s, _) => Some(s),
            SExpr::List(..) => None,
        }
    }

    pub fn as_list(&self) -> Option<&[SExpr]> {
        match self {
            SExpr::List(items, _) => Some(items),
            SExpr::Symbol(..) => None,
        }
    }

    /// Lowercased head symbol of a list, if any.
    pub fn head(&self) -> Option<String> {
        self.as_list()
            .and_then(|l| l.first())
            .and_then(SExpr::as_symbol)
            .map(str::to_ascii_lowercase)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("parse error at {line}:{column}: expected {expected}")]
pub struct ReadError {
    pub line: usize,
    pub column: usize,
    pub expected: String,
}

impl ReadError {
    pub fn at(pos: Pos, expected: impl Into<String>) -> Self {
        ReadError {
            line: pos.line,
            column: pos.column,
            expected: expected.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Open(Pos),
    Close(Pos),
    Symbol(String, Pos),
}

fn tokenize(text: &str) -> Vec<Token> {
    let mut tokens = Vec::new();
    let mut line = 1;
    let mut column = 0;
    let mut chars = text.chars().peekable();
    let mut current: Option<(String, Pos)> = None;

    let flush = |current: &mut Option<(String, Pos)>, tokens: &mut Vec<Token>| {
        if let Some((s, p)) = current.take() {
            tokens.push(Token::Symbol(s, p));
        }
    };

    while let Some(c) = chars.next() {
        column += 1;
        let pos = Pos { line, column };
        match c {
            '\n' => {
                flush(&mut current, &mut tokens);
                line += 1;
                column = 0;
            }
            ';' => {
                flush(&mut current, &mut tokens);
                while let Some(&n) = chars.peek() {
                    if n == '\n' {
                        break;
                    }
                    chars.next();
                }
            }
            '(' => {
                flush(&mut current, &mut tokens);
                tokens.push(Token::Open(pos));
            }
            ')' => {
                flush(&mut current, &mut tokens);
                tokens.push(Token::Close(pos));
            }
            c if c.is_whitespace() => flush(&mut current, &mut tokens),
            c => match current.as_mut() {
                Some((s, _)) => s.push(c),
                None => current = Some((c.to_string(), pos)),
            },
        }
    }
    flush(&mut current, &mut tokens);
    tokens
}

/// Reads every top-level expression in `text`.
pub fn read_all(text: &str) -> Result<Vec<SExpr>, ReadError> {
    let mut stack: Vec<(Vec<SExpr>, Pos)> = Vec::new();
    let mut top = Vec::new();
    for token in tokenize(text) {
        match token {
            Token::Open(p) => stack.push((Vec::new(), p)),
            Token::Close(p) => {
                let (items, open) = stack
                    .pop()
                    .ok_or_else(|| ReadError::at(p, "no unmatched ')'"))?;
                let list = SExpr::List(items, open);
                match stack.last_mut() {
                    Some((parent, _)) => parent.push(list),
                    None => top.push(list),
                }
            }
            Token::Symbol(s, p) => match stack.last_mut() {
                Some((parent, _)) => parent.push(SExpr::Symbol(s, p)),
                None => top.push(SExpr::Symbol(s, p)),
            },
        }
    }
    if let Some((_, open)) = stack.pop() {
        return Err(ReadError::at(open, "')' to close this list"));
    }
    Ok(top)
}

/// Reads exactly one top-level expression.
pub fn read_one(text: &str) -> Result<SExpr, ReadError> {
    let mut all = read_all(text)?;
    match all.len() {
        0 => Err(ReadError::at(Pos { line: 1, column: 1 }, "an s-expression")),
        1 => Ok(all.pop().unwrap()),
        _ => Err(ReadError::at(all[1].pos(), "end of input")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reads_nested_lists() {
        let e = read_one("(a (b c) d)").unwrap();
        let l = e.as_list().unwrap();
        assert_eq!(l.len(), 3);
        assert_eq!(l[1].as_list().unwrap().len(), 2);
        assert_eq!(e.head().as_deref(), Some("a"));
    }

    #[test]
    fn strips_comments() {
        let e = read_one("(a ; (b\n c)").unwrap();
        assert_eq!(e.as_list().unwrap().len(), 2);
    }

    #[test]
    fn positions_are_one_based() {
        let e = read_one("\n  (x\n   yy)").unwrap();
        assert_eq!(e.pos(), Pos { line: 2, column: 3 });
        assert_eq!(e.as_list().unwrap()[1].pos(), Pos { line: 3, column: 4 });
    }

    #[test]
    fn unclosed_list_reports_opening_paren() {
        let err = read_one("(define (domain d)\n  (:requirements :strips)").unwrap_err();
        assert_eq!((err.line, err.column), (1, 1));
    }

    #[test]
    fn stray_close_reports_its_position() {
        let err = read_all("(a))").unwrap_err();
        assert_eq!((err.line, err.column), (1, 4));
    }

    #[test]
    fn trailing_expression_rejected() {
        assert!(read_one("(a) (b)").is_err());
        assert!(read_one("   ").is_err());
    }
}
