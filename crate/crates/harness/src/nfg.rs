//! Read-only import of two-player `.nfg` strategic-form files, in both the
//! payoff-list and outcome-list variants.
//!
//! ```text
//! NFG 1 R "Matching pennies" { "Row" "Col" } { 2 2 }
//! 1 -1 -1 1 -1 1 1 -1
//! ```
//!
//! Payoffs are listed per pure profile with the first player's strategy
//! varying fastest. Values are rescaled onto `[0, 1]` like any other
//! out-of-range input.

use anash_core::BimatrixGame;

use crate::error::ParseError;
use crate::format::{finish_game, LoadOptions, RawMatrix};

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Open,
    Close,
    Str(String),
    Word(String),
}

#[derive(Clone, Debug)]
struct Token {
    tok: Tok,
    line: usize,
    column: usize,
}

fn tokenize(text: &str) -> Result<Vec<Token>, ParseError> {
    let mut out = Vec::new();
    let mut chars = text.chars().peekable();
    let (mut line, mut column) = (1usize, 1usize);
    let advance = |c: char, line: &mut usize, column: &mut usize| {
        if c == '\n' {
            *line += 1;
            *column = 1;
        } else {
            *column += 1;
        }
    };
    while let Some(&c) = chars.peek() {
        let (l, col) = (line, column);
        if c.is_whitespace() || c == ',' {
            chars.next();
            advance(c, &mut line, &mut column);
        } else if c == '{' || c == '}' {
            chars.next();
            advance(c, &mut line, &mut column);
            let tok = if c == '{' { Tok::Open } else { Tok::Close };
            out.push(Token {
                tok,
                line: l,
                column: col,
            });
        } else if c == '"' {
            chars.next();
            advance(c, &mut line, &mut column);
            let mut s = String::new();
            loop {
                let Some(c) = chars.next() else {
                    return Err(ParseError::new(l, col, "unterminated string"));
                };
                advance(c, &mut line, &mut column);
                match c {
                    '"' => break,
                    '\\' => {
                        if let Some(e) = chars.next() {
                            advance(e, &mut line, &mut column);
                            s.push(e);
                        }
                    }
                    _ => s.push(c),
                }
            }
            out.push(Token {
                tok: Tok::Str(s),
                line: l,
                column: col,
            });
        } else {
            let mut s = String::new();
            while let Some(&c) = chars.peek() {
                if c.is_whitespace() || c == ',' || c == '{' || c == '}' || c == '"' {
                    break;
                }
                s.push(c);
                chars.next();
                advance(c, &mut line, &mut column);
            }
            out.push(Token {
                tok: Tok::Word(s),
                line: l,
                column: col,
            });
        }
    }
    Ok(out)
}

struct Cursor {
    toks: Vec<Token>,
    pos: usize,
    end: (usize, usize),
}

impl Cursor {
    fn peek(&self) -> Option<&Token> {
        self.toks.get(self.pos)
    }

    fn next(&mut self, what: &str) -> Result<Token, ParseError> {
        let t = self.toks.get(self.pos).cloned().ok_or_else(|| {
            ParseError::new(
                self.end.0,
                self.end.1,
                format!("unexpected end of file, expected {what}"),
            )
        })?;
        self.pos += 1;
        Ok(t)
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<(), ParseError> {
        let t = self.next(what)?;
        if t.tok == tok {
            Ok(())
        } else {
            Err(ParseError::new(
                t.line,
                t.column,
                format!("expected {what}"),
            ))
        }
    }

    fn string(&mut self, what: &str) -> Result<String, ParseError> {
        let t = self.next(what)?;
        match t.tok {
            Tok::Str(s) => Ok(s),
            _ => Err(ParseError::new(
                t.line,
                t.column,
                format!("expected {what}"),
            )),
        }
    }

    fn at(&self, tok: &Tok) -> bool {
        self.peek().is_some_and(|t| &t.tok == tok)
    }

    fn number(&mut self) -> Result<(f64, (usize, usize)), ParseError> {
        let t = self.next("a number")?;
        let Tok::Word(w) = &t.tok else {
            return Err(ParseError::new(t.line, t.column, "expected a number"));
        };
        let v = parse_number(w)
            .ok_or_else(|| ParseError::new(t.line, t.column, format!("`{w}` is not a number")))?;
        Ok((v, (t.line, t.column)))
    }

    fn count(&mut self) -> Result<usize, ParseError> {
        let t = self.next("a strategy count")?;
        match &t.tok {
            Tok::Word(w) => match w.parse::<usize>() {
                Ok(v) if v >= 1 => Ok(v),
                _ => Err(ParseError::new(
                    t.line,
                    t.column,
                    format!("bad strategy count `{w}`"),
                )),
            },
            _ => Err(ParseError::new(
                t.line,
                t.column,
                "expected a strategy count",
            )),
        }
    }
}

/// Decimal or `a/b` rational.
fn parse_number(w: &str) -> Option<f64> {
    let v = match w.split_once('/') {
        Some((a, b)) => a.parse::<f64>().ok()? / b.parse::<f64>().ok()?,
        None => w.parse::<f64>().ok()?,
    };
    v.is_finite().then_some(v)
}

pub fn parse_nfg(text: &str, opts: &LoadOptions) -> Result<BimatrixGame, ParseError> {
    let toks = tokenize(text)?;
    let last = text.lines().count().max(1);
    let mut cur = Cursor {
        toks,
        pos: 0,
        end: (last, 1),
    };

    cur.expect(Tok::Word("NFG".into()), "`NFG`")?;
    cur.expect(Tok::Word("1".into()), "format version 1")?;
    let t = cur.next("`R` or `D`")?;
    if !matches!(&t.tok, Tok::Word(w) if w == "R" || w == "D") {
        return Err(ParseError::new(t.line, t.column, "expected `R` or `D`"));
    }
    cur.string("a title string")?;

    cur.expect(Tok::Open, "`{` before player names")?;
    let mut players = 0;
    while !cur.at(&Tok::Close) {
        cur.string("a player name")?;
        players += 1;
    }
    let close = cur.next("`}`")?;
    if players != 2 {
        return Err(ParseError::new(
            close.line,
            close.column,
            format!("only two-player games are supported, found {players}"),
        ));
    }

    // `{ 2 3 }` or `{ { "a" "b" } { "c" "d" "e" } }`
    cur.expect(Tok::Open, "`{` before strategy counts")?;
    let mut dims = Vec::with_capacity(2);
    while !cur.at(&Tok::Close) {
        if cur.at(&Tok::Open) {
            cur.next("`{`")?;
            let mut k = 0;
            while !cur.at(&Tok::Close) {
                cur.string("a strategy name")?;
                k += 1;
            }
            cur.next("`}`")?;
            dims.push(k);
        } else {
            dims.push(cur.count()?);
        }
    }
    let close = cur.next("`}`")?;
    if dims.len() != 2 || dims.contains(&0) {
        return Err(ParseError::new(
            close.line,
            close.column,
            "expected two nonzero strategy counts",
        ));
    }
    let (rows, cols) = (dims[0], dims[1]);
    if matches!(
        cur.peek(),
        Some(Token {
            tok: Tok::Str(_),
            ..
        })
    ) {
        cur.next("a comment")?;
    }

    let cells = rows * cols;
    let mut r = vec![0.0; cells];
    let mut c = vec![0.0; cells];
    let mut pos_r = vec![(1, 1); cells];
    let mut pos_c = vec![(1, 1); cells];
    // profile t has the first player's strategy t % rows
    let cell = |t: usize| (t % rows) * cols + t / rows;

    if cur.at(&Tok::Open) {
        cur.next("`{`")?;
        let mut outcomes: Vec<((f64, (usize, usize)), (f64, (usize, usize)))> = Vec::new();
        while cur.at(&Tok::Open) {
            cur.next("`{`")?;
            cur.string("an outcome name")?;
            let a = cur.number()?;
            let b = cur.number()?;
            cur.expect(Tok::Close, "`}` after two payoffs")?;
            outcomes.push((a, b));
        }
        cur.expect(Tok::Close, "`}` after the outcome list")?;
        for t in 0..cells {
            let tok = cur.next("an outcome index")?;
            let idx = match &tok.tok {
                Tok::Word(w) => w.parse::<usize>().ok(),
                _ => None,
            }
            .filter(|&i| i <= outcomes.len())
            .ok_or_else(|| ParseError::new(tok.line, tok.column, "bad outcome index"))?;
            let k = cell(t);
            if idx > 0 {
                let ((a, pa), (b, pb)) = outcomes[idx - 1];
                (r[k], pos_r[k], c[k], pos_c[k]) = (a, pa, b, pb);
            } else {
                (pos_r[k], pos_c[k]) = ((tok.line, tok.column), (tok.line, tok.column));
            }
        }
    } else {
        for t in 0..cells {
            let k = cell(t);
            (r[k], pos_r[k]) = cur.number()?;
            (c[k], pos_c[k]) = cur.number()?;
        }
    }
    if let Some(t) = cur.peek() {
        return Err(ParseError::new(
            t.line,
            t.column,
            "trailing content after the payoffs",
        ));
    }

    let raw = |data, positions| RawMatrix {
        rows,
        cols,
        data,
        positions,
    };
    finish_game(raw(r, pos_r), raw(c, pos_c), opts)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn payoff_version() {
        let text = "NFG 1 R \"pennies\" { \"Row\" \"Col\" } { 2 2 }\n\n1 -1 -1 1 -1 1 1 -1\n";
        let g = parse_nfg(text, &LoadOptions::default()).unwrap();
        // profiles in order (0,0) (1,0) (0,1) (1,1)
        assert_eq!(g.row_matrix(), &[1.0, 0.0, 0.0, 1.0]);
        assert_eq!(g.col_matrix(), &[0.0, 1.0, 1.0, 0.0]);
    }

    #[test]
    fn outcome_version_with_named_strategies() {
        let text = r#"NFG 1 R "dilemma" { "A" "B" }
{ { "C" "D" } { "c" "d" } }
""
{
{ "" 3, 3 }
{ "" 0, 5 }
{ "" 5, 0 }
{ "" 1, 1 }
}
1 3 2 4
"#;
        let g = parse_nfg(text, &LoadOptions::default()).unwrap();
        assert_eq!(g.row_matrix(), &[0.6, 0.0, 1.0, 0.2]);
        assert_eq!(g.col_matrix(), &[0.6, 1.0, 0.0, 0.2]);
    }

    #[test]
    fn rational_payoffs() {
        let text = "NFG 1 R \"\" { \"a\" \"b\" } { 1 2 } 1/2 0 1/4 1\n";
        let g = parse_nfg(
            text,
            &LoadOptions {
                pad: true,
                strict: true,
            },
        )
        .unwrap();
        assert_eq!(g.row_matrix(), &[0.5, 0.25, 0.0, 0.0]);
    }

    #[test]
    fn errors_point_at_the_token() {
        let e = parse_nfg("NFG 1 R \"t\" { \"a\" } { 2 }\n", &LoadOptions::default()).unwrap_err();
        assert_eq!((e.line, e.column), (1, 19));
        let e = parse_nfg(
            "NFG 1 R \"t\" { \"a\" \"b\" } { 1 1 }\n1 x\n",
            &LoadOptions::default(),
        )
        .unwrap_err();
        assert_eq!((e.line, e.column), (2, 3));
    }
}
