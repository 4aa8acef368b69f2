//! Free-format MPS export and a reader for the subset this crate writes.
//!
//! Binary variables are declared with `BV` bounds; placements on hosts
//! without CPU additionally get `UP ... 0`. The continuous control-latency
//! auxiliaries keep the default `[0, +inf)` bounds.

use std::collections::{BTreeMap, HashMap};
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::model::{Family, ModelIr, Sense};

pub const OBJECTIVE_ROW: &str = "OBJ";

/// Writes `model` to `path`.
pub fn export_mps(model: &ModelIr, path: impl AsRef<Path>) -> Result<()> {
    let file = File::create(path)?;
    let mut out = BufWriter::new(file);
    write_mps(model, &mut out)?;
    out.flush()?;
    Ok(())
}

pub fn write_mps(model: &ModelIr, out: &mut impl Write) -> Result<()> {
    let row_names: Vec<String> = model.constraints().map(|r| r.key.to_string()).collect();

    writeln!(out, "NAME          DADO")?;
    writeln!(out, "ROWS")?;
    writeln!(out, " N  {OBJECTIVE_ROW}")?;
    for (row, name) in model.constraints().zip(&row_names) {
        let sense = match row.sense {
            Sense::Le => 'L',
            Sense::Eq => 'E',
            Sense::Ge => 'G',
        };
        writeln!(out, " {sense}  {name}")?;
    }

    // Transpose rows into columns.
    let n = model.n_vars();
    let mut counts = vec![0usize; n + 1];
    for row in model.constraints() {
        for t in row.terms {
            counts[t.var.index() + 1] += 1;
        }
    }
    for i in 0..n {
        counts[i + 1] += counts[i];
    }
    let mut fill = counts.clone();
    let mut entries = vec![(0u32, 0.0f64); counts[n]];
    for (ri, row) in model.constraints().enumerate() {
        for t in row.terms {
            let slot = &mut fill[t.var.index()];
            entries[*slot] = (ri as u32, t.coef);
            *slot += 1;
        }
    }
    let mut obj = vec![0.0; n];
    for t in model.objective() {
        obj[t.var.index()] += t.coef;
    }

    writeln!(out, "COLUMNS")?;
    for v in model.layout().ids() {
        let name = model.var_name(v);
        let i = v.index();
        let column = &entries[counts[i]..counts[i + 1]];
        if obj[i] != 0.0 || column.is_empty() {
            writeln!(out, "    {name}  {OBJECTIVE_ROW}  {}", obj[i])?;
        }
        for &(ri, coef) in column {
            writeln!(out, "    {name}  {}  {coef}", row_names[ri as usize])?;
        }
    }

    writeln!(out, "RHS")?;
    for (row, name) in model.constraints().zip(&row_names) {
        if row.rhs != 0.0 {
            writeln!(out, "    RHS  {name}  {}", row.rhs)?;
        }
    }

    writeln!(out, "BOUNDS")?;
    for v in model.layout().ids() {
        if model.is_binary(v) {
            let name = model.var_name(v);
            writeln!(out, " BV BND  {name}")?;
            if model.is_fixed_zero(v) {
                writeln!(out, " UP BND  {name}  0")?;
            }
        }
    }
    writeln!(out, "ENDATA")?;
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ColumnBounds {
    pub lower: f64,
    pub upper: f64,
    pub binary: bool,
}

/// Parsed MPS content.
#[derive(Debug, Clone, Default)]
pub struct MpsModel {
    pub name: String,
    /// Constraint rows in file order with their sense (`L`, `E`, `G`).
    pub rows: Vec<(String, char)>,
    pub columns: Vec<String>,
    /// `(row, column, coefficient)` for constraint rows.
    pub coefficients: Vec<(usize, usize, f64)>,
    pub objective: Vec<(usize, f64)>,
    pub rhs: Vec<f64>,
    pub bounds: Vec<ColumnBounds>,
}

impl MpsModel {
    /// Row counts per constraint family, decoded from row names.
    pub fn family_counts(&self) -> BTreeMap<Family, usize> {
        let mut out = BTreeMap::new();
        for (name, _) in &self.rows {
            if let Some(f) = Family::from_row_name(name) {
                *out.entry(f).or_insert(0) += 1;
            }
        }
        out
    }
}

/// Reads a free-format MPS file (NAME, ROWS, COLUMNS with optional integer
/// markers, RHS, BOUNDS with UP/LO/FX/BV/PL/MI, ENDATA).
pub fn read_mps(path: impl AsRef<Path>) -> Result<MpsModel> {
    let path = path.as_ref();
    let reader = BufReader::new(File::open(path)?);
    parse_mps(reader, path)
}

#[derive(Clone, Copy, PartialEq)]
enum Section {
    Start,
    Rows,
    Columns,
    Rhs,
    Ranges,
    Bounds,
    End,
}

fn parse_mps(reader: impl BufRead, path: &Path) -> Result<MpsModel> {
    let err = |line: usize, message: String| Error::Parse {
        path: PathBuf::from(path),
        line,
        message,
    };
    let mut m = MpsModel::default();
    let mut section = Section::Start;
    let mut objective_name: Option<String> = None;
    let mut row_index: HashMap<String, usize> = HashMap::new();
    let mut col_index: HashMap<String, usize> = HashMap::new();
    let mut integer_block = false;
    let mut integer_cols: Vec<bool> = Vec::new();
    let mut line_no = 0;

    for line in reader.lines() {
        let line = line?;
        line_no += 1;
        if line.trim().is_empty() || line.starts_with('*') {
            continue;
        }
        let tokens: Vec<&str> = line.split_whitespace().collect();
        if !line.starts_with(' ') && !line.starts_with('\t') {
            section = match tokens[0] {
                "NAME" => {
                    m.name = tokens.get(1).unwrap_or(&"").to_string();
                    Section::Start
                }
                "ROWS" => Section::Rows,
                "COLUMNS" => Section::Columns,
                "RHS" => Section::Rhs,
                "RANGES" => Section::Ranges,
                "BOUNDS" => Section::Bounds,
                "ENDATA" => Section::End,
                other => return Err(err(line_no, format!("unknown section `{other}`"))),
            };
            continue;
        }
        let num = |s: &str| -> Result<f64> {
            s.parse::<f64>()
                .map_err(|_| err(line_no, format!("bad number `{s}`")))
        };
        match section {
            Section::Rows => {
                let [kind, name] = tokens[..] else {
                    return Err(err(line_no, "expected `<type> <name>`".into()));
                };
                match kind {
                    "N" => {
                        if objective_name.is_none() {
                            objective_name = Some(name.to_string());
                        }
                    }
                    "L" | "E" | "G" => {
                        row_index.insert(name.to_string(), m.rows.len());
                        m.rows
                            .push((name.to_string(), kind.chars().next().unwrap()));
                    }
                    _ => return Err(err(line_no, format!("unknown row type `{kind}`"))),
                }
            }
            Section::Columns => {
                if tokens.len() >= 3 && tokens[1] == "'MARKER'" {
                    integer_block = tokens[2] == "'INTORG'";
                    continue;
                }
                if tokens.len() != 3 && tokens.len() != 5 {
                    return Err(err(line_no, "expected `<col> <row> <value> ...`".into()));
                }
                let col = match col_index.get(tokens[0]) {
                    Some(&c) => c,
                    None => {
                        let c = m.columns.len();
                        col_index.insert(tokens[0].to_string(), c);
                        m.columns.push(tokens[0].to_string());
                        integer_cols.push(integer_block);
                        c
                    }
                };
                for pair in tokens[1..].chunks(2) {
                    let value = num(pair[1])?;
                    if Some(pair[0]) == objective_name.as_deref() {
                        m.objective.push((col, value));
                    } else {
                        let row = *row_index
                            .get(pair[0])
                            .ok_or_else(|| err(line_no, format!("unknown row `{}`", pair[0])))?;
                        m.coefficients.push((row, col, value));
                    }
                }
            }
            Section::Rhs => {
                if m.rhs.len() != m.rows.len() {
                    m.rhs = vec![0.0; m.rows.len()];
                }
                if tokens.len() != 3 && tokens.len() != 5 {
                    return Err(err(line_no, "expected `<set> <row> <value> ...`".into()));
                }
                for pair in tokens[1..].chunks(2) {
                    let value = num(pair[1])?;
                    if Some(pair[0]) == objective_name.as_deref() {
                        continue;
                    }
                    let row = *row_index
                        .get(pair[0])
                        .ok_or_else(|| err(line_no, format!("unknown row `{}`", pair[0])))?;
                    m.rhs[row] = value;
                }
            }
            Section::Ranges => {
                return Err(err(line_no, "RANGES are not supported".into()));
            }
            Section::Bounds => {
                if m.bounds.len() != m.columns.len() {
                    m.bounds = integer_cols
                        .iter()
                        .map(|&int| ColumnBounds {
                            lower: 0.0,
                            upper: f64::INFINITY,
                            binary: int,
                        })
                        .collect();
                }
                if tokens.len() < 3 {
                    return Err(err(line_no, "expected `<type> <set> <col> [value]`".into()));
                }
                let col = *col_index
                    .get(tokens[2])
                    .ok_or_else(|| err(line_no, format!("unknown column `{}`", tokens[2])))?;
                let value = tokens.get(3).map(|s| num(s)).transpose()?;
                let need = |v: Option<f64>| {
                    v.ok_or_else(|| err(line_no, format!("bound `{}` needs a value", tokens[0])))
                };
                let b = &mut m.bounds[col];
                match tokens[0] {
                    "BV" => {
                        b.lower = 0.0;
                        b.upper = 1.0;
                        b.binary = true;
                    }
                    "UP" => b.upper = need(value)?,
                    "LO" => b.lower = need(value)?,
                    "FX" => {
                        let v = need(value)?;
                        b.lower = v;
                        b.upper = v;
                    }
                    "PL" => b.upper = f64::INFINITY,
                    "MI" => b.lower = f64::NEG_INFINITY,
                    other => return Err(err(line_no, format!("unknown bound type `{other}`"))),
                }
            }
            Section::Start | Section::End => {
                return Err(err(line_no, "data outside of a section".into()));
            }
        }
    }
    if section != Section::End {
        return Err(err(line_no, "missing ENDATA".into()));
    }
    if m.rhs.len() != m.rows.len() {
        m.rhs = vec![0.0; m.rows.len()];
    }
    if m.bounds.len() != m.columns.len() {
        m.bounds = integer_cols
            .iter()
            .map(|&int| ColumnBounds {
                lower: 0.0,
                upper: if int { 1.0 } else { f64::INFINITY },
                binary: int,
            })
            .collect();
    }
    Ok(m)
}
