//! Plain-text game and profile files.
//!
//! A game file holds a header line `n` (or `rows cols`), the row player's
//! matrix one row per line, a blank line, then the column player's matrix.
//! Entries are written with 17 significant digits so that save then load
//! reproduces every bit.

use std::fmt::Write as _;
use std::path::Path;

use anash_core::game::normalize_matrix;
use anash_core::{BimatrixGame, MixedStrategy, StrategyProfile};

use crate::error::{HarnessError, ParseError, Result};
use crate::nfg;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct LoadOptions {
    /// Reject entries outside `[0, 1]` instead of rescaling.
    pub strict: bool,
    /// Pad non-square games with all-zero dummy strategies.
    pub pad: bool,
}

/// Row-major payoff matrix as read, before validation.
#[derive(Clone, Debug, PartialEq)]
pub struct RawMatrix {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
    /// Source position of each entry, for error messages.
    pub positions: Vec<(usize, usize)>,
}

struct Line<'a> {
    number: usize,
    text: &'a str,
}

impl Line<'_> {
    /// Whitespace-separated tokens with their 1-based columns.
    fn tokens(&self) -> impl Iterator<Item = (usize, &str)> {
        let base = self.text.as_ptr() as usize;
        self.text
            .split_whitespace()
            .map(move |t| (t.as_ptr() as usize - base + 1, t))
    }

    fn is_blank(&self) -> bool {
        self.text.trim().is_empty()
    }
}

fn parse_dims(line: &Line<'_>) -> std::result::Result<(usize, usize), ParseError> {
    let toks: Vec<_> = line.tokens().collect();
    if toks.is_empty() || toks.len() > 2 {
        return Err(ParseError::new(
            line.number,
            1,
            "expected a header `n` or `rows cols`",
        ));
    }
    let mut dims = Vec::with_capacity(2);
    for &(col, t) in &toks {
        match t.parse::<usize>() {
            Ok(v) if v >= 1 => dims.push(v),
            _ => {
                return Err(ParseError::new(
                    line.number,
                    col,
                    format!("bad dimension `{t}`"),
                ))
            }
        }
    }
    Ok(if dims.len() == 1 {
        (dims[0], dims[0])
    } else {
        (dims[0], dims[1])
    })
}

fn parse_block<'a, I>(
    lines: &mut std::iter::Peekable<I>,
    rows: usize,
    cols: usize,
    last_line: usize,
) -> std::result::Result<RawMatrix, ParseError>
where
    I: Iterator<Item = Line<'a>>,
{
    let mut data = Vec::with_capacity(rows * cols);
    let mut positions = Vec::with_capacity(rows * cols);
    for _ in 0..rows {
        let line = lines
            .next()
            .ok_or_else(|| ParseError::new(last_line + 1, 1, "unexpected end of file"))?;
        if line.is_blank() {
            return Err(ParseError::new(
                line.number,
                1,
                format!("expected {cols} entries, found a blank line"),
            ));
        }
        let mut count = 0;
        for (col, tok) in line.tokens() {
            count += 1;
            if count > cols {
                return Err(ParseError::new(
                    line.number,
                    col,
                    format!("more than {cols} entries in row"),
                ));
            }
            let v: f64 = tok.parse().map_err(|_| {
                ParseError::new(line.number, col, format!("`{tok}` is not a number"))
            })?;
            if !v.is_finite() {
                return Err(ParseError::new(
                    line.number,
                    col,
                    format!("non-finite entry `{tok}`"),
                ));
            }
            data.push(v);
            positions.push((line.number, col));
        }
        if count < cols {
            let end = line.text.trim_end().len() + 1;
            return Err(ParseError::new(
                line.number,
                end,
                format!("expected {cols} entries, found {count}"),
            ));
        }
    }
    Ok(RawMatrix {
        rows,
        cols,
        data,
        positions,
    })
}

/// Reads the two matrices without range checks or padding.
pub fn parse_raw(text: &str) -> std::result::Result<(RawMatrix, RawMatrix), ParseError> {
    let all: Vec<Line<'_>> = text
        .lines()
        .enumerate()
        .map(|(k, text)| Line {
            number: k + 1,
            text,
        })
        .collect();
    let last_line = all.len();
    let mut lines = all.into_iter().peekable();
    while lines.peek().is_some_and(Line::is_blank) {
        lines.next();
    }
    let header = lines
        .next()
        .ok_or_else(|| ParseError::new(1, 1, "empty file"))?;
    let (rows, cols) = parse_dims(&header)?;
    let r = parse_block(&mut lines, rows, cols, last_line)?;
    match lines.next() {
        Some(l) if l.is_blank() => {}
        Some(l) => {
            return Err(ParseError::new(
                l.number,
                1,
                "expected a blank line between the matrices",
            ))
        }
        None => return Err(ParseError::new(last_line + 1, 1, "unexpected end of file")),
    }
    while lines.peek().is_some_and(Line::is_blank) {
        lines.next();
    }
    let c = parse_block(&mut lines, rows, cols, last_line)?;
    if let Some(extra) = lines.find(|l| !l.is_blank()) {
        return Err(ParseError::new(
            extra.number,
            1,
            "trailing content after the second matrix",
        ));
    }
    Ok((r, c))
}

/// Range check, optional rescaling and padding shared by every importer.
pub fn finish_game(
    r: RawMatrix,
    c: RawMatrix,
    opts: &LoadOptions,
) -> std::result::Result<BimatrixGame, ParseError> {
    let (rows, cols) = (r.rows, r.cols);
    if rows != cols && !opts.pad {
        return Err(ParseError::new(
            1,
            1,
            format!("game is {rows}x{cols}, not square (use --pad to add dummy strategies)"),
        ));
    }
    let mut mats = Vec::with_capacity(2);
    for (name, m) in [("R", r), ("C", c)] {
        let outside = m.data.iter().position(|v| !(0.0..=1.0).contains(v));
        let data = match outside {
            None => m.data,
            Some(k) if opts.strict => {
                let (line, col) = m.positions.get(k).copied().unwrap_or((1, 1));
                return Err(ParseError::new(
                    line,
                    col,
                    format!("{name} entry {} lies outside [0, 1]", m.data[k]),
                ));
            }
            Some(_) => {
                log::warn!("{name} has entries outside [0, 1]; rescaling it onto [0, 1]");
                normalize_matrix(m.data)
            }
        };
        mats.push(data);
    }
    let c = mats.pop().unwrap_or_default();
    let r = mats.pop().unwrap_or_default();
    let n = rows.max(cols);
    let (r, c) = if rows == cols {
        (r, c)
    } else {
        log::warn!("padding {rows}x{cols} game to {n}x{n} with zero-payoff dummy strategies");
        (pad(&r, rows, cols, n), pad(&c, rows, cols, n))
    };
    BimatrixGame::new(n, r, c).map_err(|e| ParseError::new(1, 1, e.to_string()))
}

fn pad(m: &[f64], rows: usize, cols: usize, n: usize) -> Vec<f64> {
    let mut out = vec![0.0; n * n];
    for i in 0..rows {
        out[i * n..i * n + cols].copy_from_slice(&m[i * cols..(i + 1) * cols]);
    }
    out
}

pub fn parse_game(text: &str, opts: &LoadOptions) -> std::result::Result<BimatrixGame, ParseError> {
    let (r, c) = parse_raw(text)?;
    finish_game(r, c, opts)
}

pub fn write_game(game: &BimatrixGame) -> String {
    let n = game.n();
    let mut out = format!("{n}\n");
    for (k, m) in [game.row_matrix(), game.col_matrix()]
        .into_iter()
        .enumerate()
    {
        if k == 1 {
            out.push('\n');
        }
        for row in m.chunks(n) {
            let line: Vec<String> = row.iter().map(|v| format!("{v:.16e}")).collect();
            let _ = writeln!(out, "{}", line.join(" "));
        }
    }
    out
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))
}

pub fn load_game(path: &Path, opts: &LoadOptions) -> Result<BimatrixGame> {
    let text = read(path)?;
    parse_game(&text, opts).map_err(|e| HarnessError::parse(Some(&path.display().to_string()), e))
}

/// Dispatches on extension: `.nfg` goes through the strategic-form importer.
pub fn load_any(path: &Path, opts: &LoadOptions) -> Result<BimatrixGame> {
    if path
        .extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("nfg"))
    {
        let text = read(path)?;
        nfg::parse_nfg(&text, opts)
            .map_err(|e| HarnessError::parse(Some(&path.display().to_string()), e))
    } else {
        load_game(path, opts)
    }
}

pub fn save_game(game: &BimatrixGame, path: &Path) -> Result<()> {
    std::fs::write(path, write_game(game)).map_err(|e| HarnessError::io(path, e))
}

/// Profile files: a line `n`, then the row strategy, then the column strategy.
pub fn write_profile(profile: &StrategyProfile) -> String {
    let fmt = |s: &MixedStrategy| {
        s.probs()
            .iter()
            .map(|v| format!("{v:.16e}"))
            .collect::<Vec<_>>()
            .join(" ")
    };
    format!(
        "{}\n{}\n{}\n",
        profile.n(),
        fmt(&profile.row),
        fmt(&profile.col)
    )
}

pub fn parse_profile(text: &str) -> std::result::Result<StrategyProfile, ParseError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(k, text)| Line {
            number: k + 1,
            text,
        })
        .filter(|l| !l.is_blank());
    let header = lines
        .next()
        .ok_or_else(|| ParseError::new(1, 1, "empty file"))?;
    let (n, m) = parse_dims(&header)?;
    if n != m {
        return Err(ParseError::new(
            header.number,
            1,
            "profile header must be a single `n`",
        ));
    }
    let mut strategy = |who: &str| {
        let line = lines.next().ok_or_else(|| {
            ParseError::new(header.number + 1, 1, format!("missing {who} strategy"))
        })?;
        let mut probs = Vec::with_capacity(n);
        for (col, tok) in line.tokens() {
            let v: f64 = tok.parse().map_err(|_| {
                ParseError::new(line.number, col, format!("`{tok}` is not a number"))
            })?;
            probs.push(v);
        }
        if probs.len() != n {
            return Err(ParseError::new(
                line.number,
                1,
                format!("expected {n} probabilities, found {}", probs.len()),
            ));
        }
        MixedStrategy::new(probs).map_err(|e| ParseError::new(line.number, 1, e.to_string()))
    };
    let row = strategy("row")?;
    let col = strategy("column")?;
    StrategyProfile::new(row, col).map_err(|e| ParseError::new(1, 1, e.to_string()))
}

pub fn load_profile(path: &Path) -> Result<StrategyProfile> {
    let text = read(path)?;
    parse_profile(&text).map_err(|e| HarnessError::parse(Some(&path.display().to_string()), e))
}

pub fn save_profile(profile: &StrategyProfile, path: &Path) -> Result<()> {
    std::fs::write(path, write_profile(profile)).map_err(|e| HarnessError::io(path, e))
}
