//! The plain-text automaton file format.
//!
//! ```text
//! 4 2
//! a 2 3 4 1
//! b 2 2 3 4
//! ```
//!
//! A header `n k`, then `k` lines `name img(1) … img(n)` with 1-based images.
//! Blank lines and lines starting with `#` are skipped.

use std::collections::HashSet;

use crate::automaton::Automaton;
use crate::error::{Error, Result};

struct Token<'a> {
    text: &'a str,
    column: usize,
}

fn tokens(line: &str) -> Vec<Token<'_>> {
    let mut out = Vec::new();
    let mut start = None;
    for (i, c) in line
        .char_indices()
        .chain(std::iter::once((line.len(), ' ')))
    {
        match (c.is_ascii_whitespace(), start) {
            (true, Some(s)) => {
                out.push(Token {
                    text: &line[s..i],
                    column: line[..s].chars().count() + 1,
                });
                start = None;
            }
            (false, None) => start = Some(i),
            _ => {}
        }
    }
    out
}

fn err(line: usize, column: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        column,
        message: message.into(),
    }
}

fn number(tok: &Token<'_>, line: usize, what: &str) -> Result<usize> {
    tok.text.parse::<usize>().map_err(|_| {
        err(
            line,
            tok.column,
            format!("expected {what}, found `{}`", tok.text),
        )
    })
}

pub fn parse_automaton(text: &str) -> Result<Automaton> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l))
        .filter(|(_, l)| {
            let t = l.trim();
            !t.is_empty() && !t.starts_with('#')
        });
    let (header_line, header) = lines
        .next()
        .ok_or_else(|| err(1, 1, "missing header `n k`"))?;
    let head = tokens(header);
    if head.len() != 2 {
        let column = head.get(2).map_or(1, |t| t.column);
        return Err(err(header_line, column, "header must be `n k`"));
    }
    let n = number(&head[0], header_line, "state count")?;
    let k = number(&head[1], header_line, "letter count")?;
    if n == 0 {
        return Err(err(
            header_line,
            head[0].column,
            "state count must be positive",
        ));
    }
    if k == 0 {
        return Err(err(
            header_line,
            head[1].column,
            "letter count must be positive",
        ));
    }
    let mut seen = HashSet::new();
    let mut letters = Vec::with_capacity(k);
    for i in 0..k {
        let (line_no, line) = lines.next().ok_or_else(|| {
            err(
                header_line,
                head[1].column,
                format!("header declares {k} letters but only {i} lines follow"),
            )
        })?;
        let toks = tokens(line);
        let name = &toks[0];
        if !seen.insert(name.text) {
            return Err(err(
                line_no,
                name.column,
                format!("duplicate letter name `{}`", name.text),
            ));
        }
        if toks.len() != n + 1 {
            let column = toks.get(n + 1).map_or(line.len() + 1, |t| t.column);
            return Err(err(
                line_no,
                column,
                format!(
                    "letter `{}` needs {n} images, found {}",
                    name.text,
                    toks.len() - 1
                ),
            ));
        }
        let mut images = Vec::with_capacity(n);
        for tok in &toks[1..] {
            let q = number(tok, line_no, "a state")?;
            if q == 0 || q > n {
                return Err(err(
                    line_no,
                    tok.column,
                    format!("image {q} is out of range 1..={n}"),
                ));
            }
            images.push(q - 1);
        }
        letters.push((name.text.to_owned(), images));
    }
    if let Some((line_no, _)) = lines.next() {
        return Err(err(
            line_no,
            1,
            format!("unexpected content after {k} letter lines"),
        ));
    }
    Automaton::new(n, letters)
}

/// The canonical file text: ASCII, LF line ends, single spaces.
pub fn emit_automaton(aut: &Automaton) -> String {
    aut.to_string()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::{cerny, random_st};
    use proptest::prelude::*;

    #[test]
    fn parses_c4() {
        let aut = parse_automaton("4 2\na 2 3 4 1\nb 2 2 3 4\n").unwrap();
        assert_eq!(aut, cerny(4).unwrap());
        assert_eq!(emit_automaton(&aut), "4 2\na 2 3 4 1\nb 2 2 3 4\n");
    }

    #[test]
    fn one_state() {
        let aut = parse_automaton("1 1\na 1\n").unwrap();
        assert_eq!(aut.n(), 1);
    }

    #[test]
    fn diagnostics() {
        assert_eq!(
            parse_automaton("2 1\na 1 3\n").unwrap_err(),
            Error::Parse {
                line: 2,
                column: 5,
                message: "image 3 is out of range 1..=2".into()
            }
        );
        assert!(matches!(
            parse_automaton("2 2\na 1 2\na 2 1\n"),
            Err(Error::Parse {
                line: 3,
                column: 1,
                ..
            })
        ));
        assert!(matches!(
            parse_automaton("2\n"),
            Err(Error::Parse { line: 1, .. })
        ));
        assert!(matches!(
            parse_automaton("x 1\n"),
            Err(Error::Parse {
                line: 1,
                column: 1,
                ..
            })
        ));
        assert!(matches!(
            parse_automaton("2 2\na 1 2\n"),
            Err(Error::Parse { .. })
        ));
        assert!(matches!(
            parse_automaton("2 1\na 1\n"),
            Err(Error::Parse { line: 2, .. })
        ));
        assert!(matches!(
            parse_automaton("2 1\na 1 2\nb 2 1\n"),
            Err(Error::Parse { line: 3, .. })
        ));
        assert!(matches!(
            parse_automaton(""),
            Err(Error::Parse { line: 1, .. })
        ));
    }

    #[test]
    fn comments_and_blank_lines() {
        let aut = parse_automaton("# C3\n\n3 2\n a 2 3 1\nb 2 2 3\n").unwrap();
        assert_eq!(aut, cerny(3).unwrap());
    }

    proptest! {
        #[test]
        fn round_trip(n in 2usize..9, seed in any::<u64>()) {
            let aut = random_st(n, 1, 1, seed).unwrap();
            prop_assert_eq!(parse_automaton(&emit_automaton(&aut)).unwrap(), aut);
        }

        #[test]
        fn round_trip_random_tables(n in 1usize..7, k in 1usize..4, seed in any::<u64>()) {
            let aut = crate::generators::random_automaton(n, k, seed).unwrap();
            prop_assert_eq!(parse_automaton(&emit_automaton(&aut)).unwrap(), aut);
        }
    }
}
