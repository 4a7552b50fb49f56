use std::fs;
use std::path::Path;

use thiserror::Error;

use crate::game::{BoardPosition, Cell, Color, Point, MAX_SIZE, MIN_SIZE};
use crate::search::Constraint;
use crate::zone::Zone;

#[derive(Debug, Error)]
pub enum InputError {
    #[error("ParseError at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("ValidationError: {0}")]
    Validation(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

fn parse_err(line: usize, column: usize, message: impl Into<String>) -> InputError {
    InputError::Parse {
        line,
        column,
        message: message.into(),
    }
}

/// Parses the text position format: N diagram rows over `.XO`, then
/// `to_move: B|W`, optional `ko: <col><row>` and `passes: 0|1`.
/// Blank lines and lines starting with `#` are ignored.
pub fn parse_position(text: &str) -> Result<BoardPosition, InputError> {
    parse_lines(text.lines().enumerate().map(|(i, l)| (i + 1, l)))
}

fn parse_lines<'a>(lines: impl Iterator<Item = (usize, &'a str)>) -> Result<BoardPosition, InputError> {
    let mut rows: Vec<(usize, Vec<Cell>)> = Vec::new();
    let mut to_move = None;
    let mut ko: Option<(usize, String)> = None;
    let mut passes = 0u8;
    let mut last_line = 0;
    for (no, raw) in lines {
        last_line = no;
        let line = raw.trim_end();
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        if let Some((key, value)) = line.split_once(':') {
            let value = value.trim();
            match key.trim() {
                "to_move" => {
                    to_move = Some(match value {
                        "B" => Color::Black,
                        "W" => Color::White,
                        _ => return Err(parse_err(no, key.len() + 2, format!("bad side to move {value:?}"))),
                    })
                }
                "ko" => ko = Some((no, value.to_string())),
                "passes" => {
                    passes = match value {
                        "0" => 0,
                        "1" => 1,
                        _ => return Err(parse_err(no, key.len() + 2, format!("bad pass count {value:?}"))),
                    }
                }
                other => return Err(parse_err(no, 1, format!("unknown key {other:?}"))),
            }
            continue;
        }
        if to_move.is_some() {
            return Err(parse_err(no, 1, "diagram row after to_move"));
        }
        let mut cells = Vec::with_capacity(line.len());
        for (col, ch) in line.chars().enumerate() {
            cells.push(match ch {
                '.' => Cell::Empty,
                'X' => Cell::Black,
                'O' => Cell::White,
                _ => return Err(parse_err(no, col + 1, format!("unknown token {ch:?}"))),
            });
        }
        rows.push((no, cells));
    }
    let Some(&(first_line, ref first)) = rows.first() else {
        return Err(parse_err(last_line.max(1), 1, "missing diagram"));
    };
    let n = first.len();
    if !(MIN_SIZE as usize..=MAX_SIZE as usize).contains(&n) {
        return Err(parse_err(first_line, 1, format!("board size {n} outside 5..=9")));
    }
    for (no, r) in &rows {
        if r.len() != n {
            return Err(parse_err(*no, r.len().min(n) + 1, format!("row has {} cells, expected {n}", r.len())));
        }
    }
    if rows.len() != n {
        let at = rows.last().map_or(first_line, |r| r.0);
        return Err(parse_err(at, 1, format!("{} rows, expected {n}", rows.len())));
    }
    let Some(to_move) = to_move else {
        return Err(parse_err(last_line.max(1), 1, "missing to_move line"));
    };
    let cells: Vec<Cell> = rows.into_iter().flat_map(|(_, r)| r).collect();
    let size = n as u8;
    let mut pos = BoardPosition::from_cells(size, &cells, to_move)
        .map_err(|e| InputError::Validation(e.to_string()))?;
    if let Some((no, label)) = ko {
        let p = Point::parse_label(&label, size)
            .ok_or_else(|| parse_err(no, 5, format!("bad ko point {label:?}")))?;
        pos = pos
            .with_ko_ban(Some(p))
            .map_err(|e| InputError::Validation(e.to_string()))?;
    }
    pos.with_pass_streak(passes)
        .map_err(|e| InputError::Validation(e.to_string()))
}

pub type ProblemSet = Vec<(String, BoardPosition)>;

/// Splits a multi-position file on `# <id>` header lines. A file without
/// headers holds one position named `default_id`.
pub fn parse_problem_set(text: &str, default_id: &str) -> Result<ProblemSet, InputError> {
    let lines: Vec<(usize, &str)> = text.lines().enumerate().map(|(i, l)| (i + 1, l)).collect();
    let mut chunks: Vec<(String, Vec<(usize, &str)>)> = Vec::new();
    for (no, line) in lines {
        if let Some(id) = line.strip_prefix('#') {
            let id = id.trim();
            if !id.is_empty() {
                chunks.push((id.to_string(), Vec::new()));
                continue;
            }
        }
        match chunks.last_mut() {
            Some((_, body)) => body.push((no, line)),
            None if line.trim().is_empty() => {}
            None => chunks.push((default_id.to_string(), vec![(no, line)])),
        }
    }
    let mut out: ProblemSet = Vec::new();
    for (id, body) in chunks {
        if out.iter().any(|(other, _)| *other == id) {
            return Err(InputError::Validation(format!("duplicate problem id {id:?}")));
        }
        out.push((id, parse_lines(body.into_iter())?));
    }
    check_sizes(&out)?;
    Ok(out)
}

fn check_sizes(set: &ProblemSet) -> Result<(), InputError> {
    if let Some((_, first)) = set.first() {
        if let Some((id, _)) = set.iter().find(|(_, p)| p.size() != first.size()) {
            return Err(InputError::Validation(format!("problem {id:?} has a different board size")));
        }
    }
    Ok(())
}

/// Loads problems from a directory (one position per file, id = file
/// stem, sorted by name) or from a multi-position file.
pub fn load_problems(path: &Path) -> Result<ProblemSet, InputError> {
    if path.is_dir() {
        let mut files: Vec<_> = fs::read_dir(path)?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.is_file())
            .collect();
        files.sort();
        let mut out = Vec::new();
        for f in files {
            let id = f.file_stem().map_or_else(String::new, |s| s.to_string_lossy().into_owned());
            let text = fs::read_to_string(&f)?;
            let pos = if f.extension().is_some_and(|e| e == "sgf") {
                parse_sgf(&text)?
            } else {
                parse_position(&text)?
            };
            out.push((id, pos));
        }
        check_sizes(&out)?;
        Ok(out)
    } else {
        let stem = path.file_stem().map_or_else(|| "problem".into(), |s| s.to_string_lossy().into_owned());
        parse_problem_set(&fs::read_to_string(path)?, &stem)
    }
}

/// Minimal SGF setup reader: `SZ`, `AB`, `AW` and `PL` from the first node.
pub fn parse_sgf(text: &str) -> Result<BoardPosition, InputError> {
    let mut size: u8 = 19;
    let mut black = Vec::new();
    let mut white = Vec::new();
    let mut to_move = Color::Black;
    let bytes = text.as_bytes();
    let mut i = 0;
    let mut ident = String::new();
    let mut line = 1;
    let mut col = 0;
    while i < bytes.len() {
        let ch = bytes[i] as char;
        col += 1;
        match ch {
            '\n' => {
                line += 1;
                col = 0;
                ident.clear();
            }
            'A'..='Z' => ident.push(ch),
            '[' => {
                let end = text[i..]
                    .find(']')
                    .map(|e| i + e)
                    .ok_or_else(|| parse_err(line, col, "unterminated property value"))?;
                let value = &text[i + 1..end];
                match ident.as_str() {
                    "SZ" => {
                        size = value
                            .trim()
                            .parse()
                            .map_err(|_| parse_err(line, col, format!("bad size {value:?}")))?
                    }
                    "AB" => black.push((line, col, value.to_string())),
                    "AW" => white.push((line, col, value.to_string())),
                    "PL" => {
                        to_move = match value.trim() {
                            "B" => Color::Black,
                            "W" => Color::White,
                            _ => return Err(parse_err(line, col, format!("bad player {value:?}"))),
                        }
                    }
                    _ => {}
                }
                col += end - i;
                i = end + 1;
                // Stacked values such as AB[aa][bb] keep the identifier.
                if bytes.get(i) != Some(&b'[') {
                    ident.clear();
                }
                continue;
            }
            ';' | '(' | ')' => ident.clear(),
            _ => {}
        }
        i += 1;
    }
    if !(MIN_SIZE..=MAX_SIZE).contains(&size) {
        return Err(InputError::Validation(format!("board size {size} outside 5..=9")));
    }
    let mut cells = vec![Cell::Empty; size as usize * size as usize];
    for (stones, cell) in [(black, Cell::Black), (white, Cell::White)] {
        for (line, col, v) in stones {
            let b = v.as_bytes();
            if b.len() != 2 {
                return Err(parse_err(line, col, format!("bad point {v:?}")));
            }
            let (c, r) = (b[0].wrapping_sub(b'a'), b[1].wrapping_sub(b'a'));
            if c >= size || r >= size {
                return Err(parse_err(line, col, format!("point {v:?} off the board")));
            }
            cells[Point::from_rc(r, c, size).index()] = cell;
        }
    }
    BoardPosition::from_cells(size, &cells, to_move).map_err(|e| InputError::Validation(e.to_string()))
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("zone or constraint does not fit a {0}x{0} board")]
pub struct RenderError(pub u8);

/// Diagram with zone cells bracketed (`[X]`), constraint cells shown as
/// ` # ` and all others plain (` X `).
pub fn render_zone(pos: &BoardPosition, zone: Zone, constraint: Option<&Constraint>) -> Result<String, RenderError> {
    let n = pos.size();
    let board = Zone::full(n);
    let forbidden = constraint.map_or(Zone::EMPTY, |c| c.forbidden);
    if !zone.is_subset(board) || !forbidden.is_subset(board) {
        return Err(RenderError(n));
    }
    let mut out = String::new();
    for r in 0..n {
        for c in 0..n {
            let p = Point::from_rc(r, c, n);
            let ch = match pos.cell(p) {
                Cell::Empty => '.',
                Cell::Black => 'X',
                Cell::White => 'O',
            };
            if zone.contains(p) {
                out.push('[');
                out.push(ch);
                out.push(']');
            } else if forbidden.contains(p) {
                out.push_str(" # ");
            } else {
                out.push(' ');
                out.push(ch);
                out.push(' ');
            }
        }
        out.push('\n');
    }
    Ok(out)
}
