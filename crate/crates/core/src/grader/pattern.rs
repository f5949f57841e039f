//! Restricted match expressions for code rules.
//!
//! A pattern is a literal string in which `?` matches any single character.
//! `\?` and `\\` escape a literal question mark and backslash. Patterns never
//! span lines, and every match has the same length, so matching is a plain
//! window scan with no backtracking.

use std::fmt;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PatternError {
    #[error("pattern is empty")]
    Empty,
    #[error("pattern may not contain a line break")]
    LineBreak,
    #[error("dangling escape at end of pattern")]
    DanglingEscape,
    #[error("unknown escape `\\{0}` (only `\\?` and `\\\\` are allowed)")]
    UnknownEscape(char),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Token {
    Literal(char),
    AnyChar,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Pattern {
    source: String,
    tokens: Vec<Token>,
}

impl Pattern {
    pub fn compile(source: &str) -> Result<Pattern, PatternError> {
        if source.is_empty() {
            return Err(PatternError::Empty);
        }
        let mut tokens = Vec::with_capacity(source.len());
        let mut chars = source.chars();
        while let Some(c) = chars.next() {
            let token = match c {
                '\n' | '\r' => return Err(PatternError::LineBreak),
                '?' => Token::AnyChar,
                '\\' => match chars.next() {
                    None => return Err(PatternError::DanglingEscape),
                    Some(e @ ('?' | '\\')) => Token::Literal(e),
                    Some(other) => return Err(PatternError::UnknownEscape(other)),
                },
                other => Token::Literal(other),
            };
            tokens.push(token);
        }
        Ok(Pattern {
            source: source.to_string(),
            tokens,
        })
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    fn matches_at(&self, window: &[char]) -> bool {
        self.tokens.iter().zip(window).all(|(t, c)| match t {
            Token::AnyChar => true,
            Token::Literal(l) => l == c,
        })
    }

    /// Non-overlapping matches within a single line.
    pub fn count_in_line(&self, line: &str) -> usize {
        let chars: Vec<char> = line.chars().collect();
        let width = self.tokens.len();
        let mut count = 0;
        let mut i = 0;
        while i + width <= chars.len() {
            if self.matches_at(&chars[i..i + width]) {
                count += 1;
                i += width;
            } else {
                i += 1;
            }
        }
        count
    }

    /// Total matches over `code`, scanned line by line with trailing
    /// whitespace removed from each line.
    pub fn count(&self, code: &str) -> usize {
        code.lines().map(|l| self.count_in_line(l.trim_end())).sum()
    }
}

impl fmt::Display for Pattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.source)
    }
}
