//! MPS reader (fixed and whitespace-delimited free format) and conversion of
//! general linear programs to the upper-bounded standard form used by
//! [`crate::lp`].

use std::collections::{HashMap, HashSet};

use serde::Serialize;
use thiserror::Error;

use crate::linalg::{vector, DenseMatrix};
use crate::lp::{LpError, LpProblem};

#[derive(Debug, Error)]
pub enum MpsError {
    #[error("line {line}: {reason}")]
    Parse { line: usize, reason: String },
    #[error("unsupported MPS feature: {0}")]
    UnsupportedFeature(String),
    #[error("inconsistent problem data: {0}")]
    Inconsistent(String),
    #[error(transparent)]
    Lp(#[from] LpError),
}

pub type Result<T> = std::result::Result<T, MpsError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum RowKind {
    N,
    L,
    G,
    E,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum BoundKind {
    Up,
    Lo,
    Fx,
    Fr,
    Mi,
    Pl,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Row {
    pub name: String,
    pub kind: RowKind,
}

/// A linear program as written in an MPS deck: `min cᵀx + c₀` subject to
/// row constraints of kind L/G/E (optionally ranged) and column bounds.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GeneralLp {
    pub name: String,
    pub objective_name: String,
    /// Constraint rows; the objective row is held separately.
    pub rows: Vec<Row>,
    pub columns: Vec<String>,
    /// Sparse columns: `(row index, value)` pairs, duplicates summed.
    pub entries: Vec<Vec<(usize, f64)>>,
    pub objective: Vec<f64>,
    pub objective_constant: f64,
    pub rhs: Vec<f64>,
    pub ranges: Vec<Option<f64>>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl GeneralLp {
    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn num_cols(&self) -> usize {
        self.columns.len()
    }

    /// Row activities `a_iᵀx`.
    pub fn activity(&self, x: &[f64]) -> Vec<f64> {
        let mut act = vec![0.0; self.num_rows()];
        for (col, xj) in self.entries.iter().zip(x) {
            for &(i, a) in col {
                act[i] += a * xj;
            }
        }
        act
    }

    pub fn objective_value(&self, x: &[f64]) -> f64 {
        vector::dot(&self.objective, x) + self.objective_constant
    }

    /// Interval `[lo, hi]` allowed for the activity of row `i`.
    pub fn row_interval(&self, i: usize) -> (f64, f64) {
        let beta = self.rhs[i];
        let inf = f64::INFINITY;
        match (self.rows[i].kind, self.ranges[i]) {
            (RowKind::E, None) => (beta, beta),
            (RowKind::E, Some(r)) if r >= 0.0 => (beta, beta + r),
            (RowKind::E, Some(r)) => (beta + r, beta),
            (RowKind::L, None) => (-inf, beta),
            (RowKind::L, Some(r)) => (beta - r.abs(), beta),
            (RowKind::G, None) => (beta, inf),
            (RowKind::G, Some(r)) => (beta, beta + r.abs()),
            (RowKind::N, _) => (-inf, inf),
        }
    }

    /// Largest violation of any row or bound constraint at `x`.
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let act = self.activity(x);
        let rows = (0..self.num_rows()).map(|i| {
            let (lo, hi) = self.row_interval(i);
            (lo - act[i]).max(act[i] - hi).max(0.0)
        });
        let bounds = (0..self.num_cols()).map(|j| (self.lower[j] - x[j]).max(x[j] - self.upper[j]).max(0.0));
        rows.chain(bounds).fold(0.0, f64::max)
    }

    /// Flips the objective so that a maximization deck can be minimized.
    pub fn negate_objective(&mut self) {
        for c in &mut self.objective {
            *c = -*c;
        }
        self.objective_constant = -self.objective_constant;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Section {
    Name,
    Rows,
    Columns,
    Rhs,
    Ranges,
    Bounds,
    End,
}

impl Section {
    fn rank(self) -> u8 {
        match self {
            Section::Name => 0,
            Section::Rows => 1,
            Section::Columns => 2,
            Section::Rhs => 3,
            Section::Ranges => 4,
            Section::Bounds => 5,
            Section::End => 6,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Layout {
    Free,
    Fixed,
}

/// Fixed-format field boundaries (1-based columns 2-3, 5-12, 15-22, 25-36,
/// 40-47, 50-61).
const FIXED_FIELDS: [(usize, usize); 6] = [(1, 3), (4, 12), (14, 22), (24, 36), (39, 47), (49, 61)];

fn fixed_fields(line: &str) -> Vec<String> {
    let chars: Vec<char> = line.chars().collect();
    let mut out = Vec::new();
    for &(a, b) in &FIXED_FIELDS {
        if a >= chars.len() {
            break;
        }
        let field: String = chars[a..b.min(chars.len())].iter().collect();
        out.push(field.trim().to_string());
    }
    while out.last().is_some_and(|f| f.is_empty()) {
        out.pop();
    }
    out
}

/// Parses an MPS deck. Whitespace-delimited fields are tried first; if that
/// fails the deck is re-read with fixed column positions, which allows names
/// containing spaces.
pub fn parse_mps(text: &str) -> Result<GeneralLp> {
    match parse_with(text, Layout::Free) {
        Ok(g) => Ok(g),
        Err(free_err @ MpsError::Parse { .. }) => parse_with(text, Layout::Fixed).map_err(|_| free_err),
        Err(e) => Err(e),
    }
}

struct Builder {
    name: String,
    objective_name: Option<String>,
    rows: Vec<Row>,
    row_index: HashMap<String, Option<usize>>,
    columns: Vec<String>,
    col_index: HashMap<String, usize>,
    entries: Vec<HashMap<usize, f64>>,
    objective: Vec<f64>,
    objective_constant: f64,
    rhs: Vec<f64>,
    ranges: Vec<Option<f64>>,
    lower: Vec<f64>,
    upper: Vec<f64>,
    rhs_set: Option<String>,
    range_set: Option<String>,
    bound_set: Option<String>,
    bounds_seen: HashSet<(usize, BoundKind)>,
    rhs_seen: HashSet<usize>,
    ranges_seen: HashSet<usize>,
}

fn parse_err(line: usize, reason: impl Into<String>) -> MpsError {
    MpsError::Parse {
        line,
        reason: reason.into(),
    }
}

fn number(line: usize, s: &str) -> Result<f64> {
    let v: f64 = s
        .parse()
        .map_err(|_| parse_err(line, format!("malformed number `{s}`")))?;
    if !v.is_finite() {
        return Err(parse_err(line, format!("non-finite number `{s}`")));
    }
    Ok(v)
}

impl Builder {
    fn new() -> Self {
        Self {
            name: String::new(),
            objective_name: None,
            rows: Vec::new(),
            row_index: HashMap::new(),
            columns: Vec::new(),
            col_index: HashMap::new(),
            entries: Vec::new(),
            objective: Vec::new(),
            objective_constant: 0.0,
            rhs: Vec::new(),
            ranges: Vec::new(),
            lower: Vec::new(),
            upper: Vec::new(),
            rhs_set: None,
            range_set: None,
            bound_set: None,
            bounds_seen: HashSet::new(),
            rhs_seen: HashSet::new(),
            ranges_seen: HashSet::new(),
        }
    }

    /// `Ok(None)` for N rows: the objective, or an extra free row that is ignored.
    fn row(&self, line: usize, name: &str) -> Result<Option<usize>> {
        self.row_index
            .get(name)
            .copied()
            .ok_or_else(|| parse_err(line, format!("unknown row `{name}`")))
    }

    fn add_row(&mut self, line: usize, f: &[String]) -> Result<()> {
        if f.len() != 2 {
            return Err(parse_err(line, "ROWS entry needs a type and a name"));
        }
        let kind = match f[0].to_ascii_uppercase().as_str() {
            "N" => RowKind::N,
            "L" => RowKind::L,
            "G" => RowKind::G,
            "E" => RowKind::E,
            other => return Err(parse_err(line, format!("unknown row type `{other}`"))),
        };
        let name = f[1].clone();
        if self.row_index.contains_key(&name) {
            return Err(parse_err(line, format!("duplicate row `{name}`")));
        }
        if kind == RowKind::N {
            if self.objective_name.is_none() {
                self.objective_name = Some(name.clone());
            }
            self.row_index.insert(name, None);
        } else {
            self.row_index.insert(name.clone(), Some(self.rows.len()));
            self.rows.push(Row { name, kind });
            self.rhs.push(0.0);
            self.ranges.push(None);
        }
        Ok(())
    }

    fn is_objective(&self, name: &str) -> bool {
        self.objective_name.as_deref() == Some(name)
    }

    fn add_column_entry(&mut self, line: usize, f: &[String]) -> Result<()> {
        if f.iter().any(|t| t.eq_ignore_ascii_case("'MARKER'")) {
            return Err(MpsError::UnsupportedFeature("integer MARKER lines in COLUMNS".into()));
        }
        if f.len() != 3 && f.len() != 5 {
            return Err(parse_err(
                line,
                "COLUMNS entry needs a column and one or two (row, value) pairs",
            ));
        }
        let col = match self.col_index.get(&f[0]) {
            Some(&j) => j,
            None => {
                let j = self.columns.len();
                self.col_index.insert(f[0].clone(), j);
                self.columns.push(f[0].clone());
                self.entries.push(HashMap::new());
                self.objective.push(0.0);
                self.lower.push(0.0);
                self.upper.push(f64::INFINITY);
                j
            }
        };
        for pair in f[1..].chunks(2) {
            let value = number(line, &pair[1])?;
            match self.row(line, &pair[0])? {
                Some(i) => *self.entries[col].entry(i).or_insert(0.0) += value,
                None if self.is_objective(&pair[0]) => self.objective[col] += value,
                None => {}
            }
        }
        Ok(())
    }

    /// Drops a leading set name when the field count says one is present,
    /// and ignores records from any set after the first.
    fn select_set<'a>(set: &mut Option<String>, f: &'a [String], pairs_len_odd: bool) -> Option<&'a [String]> {
        let (name, rest) = if pairs_len_odd {
            (f[0].clone(), &f[1..])
        } else {
            (String::new(), f)
        };
        match set {
            Some(s) if *s != name => None,
            Some(_) => Some(rest),
            None => {
                *set = Some(name);
                Some(rest)
            }
        }
    }

    fn add_rhs(&mut self, line: usize, f: &[String]) -> Result<()> {
        if !(2..=5).contains(&f.len()) {
            return Err(parse_err(line, "RHS entry needs one or two (row, value) pairs"));
        }
        let Some(rest) = Self::select_set(&mut self.rhs_set, f, f.len() % 2 == 1) else {
            return Ok(());
        };
        for pair in rest.chunks(2) {
            if pair.len() != 2 {
                return Err(parse_err(line, "RHS entry has an unpaired field"));
            }
            let value = number(line, &pair[1])?;
            let row = self.row(line, &pair[0])?;
            let key = row.unwrap_or(usize::MAX);
            if (row.is_some() || self.is_objective(&pair[0])) && !self.rhs_seen.insert(key) {
                return Err(parse_err(line, format!("duplicate RHS for row `{}`", pair[0])));
            }
            match row {
                Some(i) => self.rhs[i] = value,
                None if self.is_objective(&pair[0]) => self.objective_constant = -value,
                None => {}
            }
        }
        Ok(())
    }

    fn add_range(&mut self, line: usize, f: &[String]) -> Result<()> {
        if !(2..=5).contains(&f.len()) {
            return Err(parse_err(line, "RANGES entry needs one or two (row, value) pairs"));
        }
        let Some(rest) = Self::select_set(&mut self.range_set, f, f.len() % 2 == 1) else {
            return Ok(());
        };
        for pair in rest.chunks(2) {
            if pair.len() != 2 {
                return Err(parse_err(line, "RANGES entry has an unpaired field"));
            }
            let value = number(line, &pair[1])?;
            match self.row(line, &pair[0])? {
                Some(i) => {
                    if !self.ranges_seen.insert(i) {
                        return Err(parse_err(line, format!("duplicate range for row `{}`", pair[0])));
                    }
                    self.ranges[i] = Some(value);
                }
                None => return Err(MpsError::UnsupportedFeature(format!("range on free row `{}`", pair[0]))),
            }
        }
        Ok(())
    }

    fn add_bound(&mut self, line: usize, f: &[String]) -> Result<()> {
        if f.is_empty() {
            return Err(parse_err(line, "empty BOUNDS entry"));
        }
        let kind = match f[0].to_ascii_uppercase().as_str() {
            "UP" => BoundKind::Up,
            "LO" => BoundKind::Lo,
            "FX" => BoundKind::Fx,
            "FR" => BoundKind::Fr,
            "MI" => BoundKind::Mi,
            "PL" => BoundKind::Pl,
            t @ ("BV" | "LI" | "UI" | "SC") => {
                return Err(MpsError::UnsupportedFeature(format!("integer bound type {t}")))
            }
            other => return Err(parse_err(line, format!("unknown bound type `{other}`"))),
        };
        let needs_value = matches!(kind, BoundKind::Up | BoundKind::Lo | BoundKind::Fx);
        let has_set = match (needs_value, f.len()) {
            (true, 4) | (false, 3) => true,
            (true, 3) | (false, 2) => false,
            _ => return Err(parse_err(line, "wrong number of fields in BOUNDS entry")),
        };
        let Some(rest) = Self::select_set(&mut self.bound_set, &f[1..], has_set) else {
            return Ok(());
        };
        let col = *self
            .col_index
            .get(&rest[0])
            .ok_or_else(|| parse_err(line, format!("unknown column `{}`", rest[0])))?;
        if !self.bounds_seen.insert((col, kind)) {
            return Err(parse_err(line, format!("duplicate {kind:?} bound on `{}`", rest[0])));
        }
        let value = if needs_value { number(line, &rest[1])? } else { 0.0 };
        match kind {
            BoundKind::Up => {
                // a negative upper bound on a column with the default lower
                // bound makes the column unbounded below (common convention)
                if value < 0.0 && self.lower[col] == 0.0 && !self.bounds_seen.contains(&(col, BoundKind::Lo)) {
                    self.lower[col] = f64::NEG_INFINITY;
                }
                self.upper[col] = value;
            }
            BoundKind::Lo => self.lower[col] = value,
            BoundKind::Fx => {
                self.lower[col] = value;
                self.upper[col] = value;
            }
            BoundKind::Fr => {
                self.lower[col] = f64::NEG_INFINITY;
                self.upper[col] = f64::INFINITY;
            }
            BoundKind::Mi => self.lower[col] = f64::NEG_INFINITY,
            BoundKind::Pl => self.upper[col] = f64::INFINITY,
        }
        Ok(())
    }

    fn finish(self) -> Result<GeneralLp> {
        let objective_name = self
            .objective_name
            .ok_or_else(|| MpsError::Inconsistent("no objective (N) row".into()))?;
        let entries = self
            .entries
            .into_iter()
            .map(|m| {
                let mut v: Vec<(usize, f64)> = m.into_iter().collect();
                v.sort_by_key(|e| e.0);
                v
            })
            .collect();
        Ok(GeneralLp {
            name: self.name,
            objective_name,
            rows: self.rows,
            columns: self.columns,
            entries,
            objective: self.objective,
            objective_constant: self.objective_constant,
            rhs: self.rhs,
            ranges: self.ranges,
            lower: self.lower,
            upper: self.upper,
        })
    }
}

fn parse_with(text: &str, layout: Layout) -> Result<GeneralLp> {
    let mut b = Builder::new();
    let mut section: Option<Section> = None;
    for (k, raw) in text.lines().enumerate() {
        let line = k + 1;
        let trimmed = raw.trim_end();
        if trimmed.trim().is_empty() || trimmed.starts_with('*') {
            continue;
        }
        if !raw.starts_with(' ') && !raw.starts_with('\t') {
            let mut words = trimmed.split_whitespace();
            let head = words.next().unwrap_or_default().to_ascii_uppercase();
            let next = match head.as_str() {
                "NAME" => {
                    b.name = words.next().unwrap_or_default().to_string();
                    Section::Name
                }
                "ROWS" => Section::Rows,
                "COLUMNS" => Section::Columns,
                "RHS" => Section::Rhs,
                "RANGES" => Section::Ranges,
                "BOUNDS" => Section::Bounds,
                "ENDATA" => Section::End,
                "OBJSENSE" | "OBJSENS" | "OBJNAME" | "SOS" | "QUADOBJ" | "QMATRIX" | "QSECTION" => {
                    return Err(MpsError::UnsupportedFeature(format!("{head} section")))
                }
                other => return Err(parse_err(line, format!("unknown section header `{other}`"))),
            };
            let prev = section.map_or(0, Section::rank);
            if section.is_some() && next.rank() <= prev || section.is_none() && next != Section::Name {
                return Err(parse_err(line, format!("section `{head}` out of order")));
            }
            section = Some(next);
            if next == Section::End {
                return b.finish();
            }
            continue;
        }
        let fields: Vec<String> = match layout {
            Layout::Free => trimmed.split_whitespace().map(str::to_string).collect(),
            Layout::Fixed => {
                let mut f = fixed_fields(trimmed);
                if f.first().is_some_and(|t| t.is_empty()) {
                    f.remove(0);
                }
                f
            }
        };
        match section {
            Some(Section::Rows) => b.add_row(line, &fields)?,
            Some(Section::Columns) => b.add_column_entry(line, &fields)?,
            Some(Section::Rhs) => b.add_rhs(line, &fields)?,
            Some(Section::Ranges) => b.add_range(line, &fields)?,
            Some(Section::Bounds) => b.add_bound(line, &fields)?,
            _ => return Err(parse_err(line, "data line outside of a section")),
        }
    }
    Err(parse_err(text.lines().count(), "missing ENDATA"))
}

/// How one original column is represented in the standard form.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum ColumnMap {
    /// `x = lower + x'[col]`
    Shift { col: usize, lower: f64 },
    /// `x = upper − x'[col]`
    Mirror { col: usize, upper: f64 },
    /// `x = x'[plus] − x'[minus]`
    Split { plus: usize, minus: usize },
    /// Column removed; `x = value`.
    Fixed { value: f64 },
}

/// A slack column added for row `row`: `a_iᵀx − sign·s = b_i`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SlackMap {
    pub row: usize,
    pub col: usize,
    pub sign: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StandardFormMap {
    pub columns: Vec<ColumnMap>,
    pub slacks: Vec<SlackMap>,
    /// Rows kept in the standard form, in order.
    pub kept_rows: Vec<usize>,
    /// Add to the standard-form objective to get the original objective.
    pub objective_constant: f64,
    pub n_std: usize,
}

impl StandardFormMap {
    /// Original variables from a standard-form point.
    pub fn recover(&self, x_std: &[f64]) -> Vec<f64> {
        self.columns
            .iter()
            .map(|c| match *c {
                ColumnMap::Shift { col, lower } => lower + x_std[col],
                ColumnMap::Mirror { col, upper } => upper - x_std[col],
                ColumnMap::Split { plus, minus } => x_std[plus] - x_std[minus],
                ColumnMap::Fixed { value } => value,
            })
            .collect()
    }

    /// Standard-form point for an original point `x`, with slacks set from
    /// the row activities. Split columns get the smallest nonnegative pair.
    pub fn forward(&self, g: &GeneralLp, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n_std];
        for (c, &xj) in self.columns.iter().zip(x) {
            match *c {
                ColumnMap::Shift { col, lower } => out[col] = xj - lower,
                ColumnMap::Mirror { col, upper } => out[col] = upper - xj,
                ColumnMap::Split { plus, minus } => {
                    out[plus] = xj.max(0.0);
                    out[minus] = (-xj).max(0.0);
                }
                ColumnMap::Fixed { .. } => {}
            }
        }
        let act = g.activity(x);
        for s in &self.slacks {
            let (lo, hi) = g.row_interval(s.row);
            let bound = if s.sign < 0.0 { hi } else { lo };
            out[s.col] = (act[s.row] - bound) / s.sign;
        }
        out
    }
}

/// Converts to `min cᵀx s.t. Ax = b, x ≥ 0, x_𝓘 ≤ u`.
pub fn to_lp_u(g: &GeneralLp) -> Result<(LpProblem, StandardFormMap)> {
    let (m0, n0) = (g.num_rows(), g.num_cols());
    let mut cols: Vec<Vec<(usize, f64)>> = Vec::new();
    let mut cost: Vec<f64> = Vec::new();
    let mut upper_idx = Vec::new();
    let mut u = Vec::new();
    let mut b = g.rhs.clone();
    let mut constant = g.objective_constant;
    let mut map = Vec::with_capacity(n0);

    for j in 0..n0 {
        let (lo, hi) = (g.lower[j], g.upper[j]);
        let col = &g.entries[j];
        let cj = g.objective[j];
        if lo > hi {
            return Err(MpsError::Inconsistent(format!(
                "column `{}` has lower bound {lo} above upper bound {hi}",
                g.columns[j]
            )));
        }
        if lo.is_finite() && hi.is_finite() && lo == hi {
            for &(i, a) in col {
                b[i] -= a * lo;
            }
            constant += cj * lo;
            map.push(ColumnMap::Fixed { value: lo });
        } else if lo.is_finite() {
            for &(i, a) in col {
                b[i] -= a * lo;
            }
            constant += cj * lo;
            let k = cols.len();
            cols.push(col.clone());
            cost.push(cj);
            if hi.is_finite() {
                upper_idx.push(k);
                u.push(hi - lo);
            }
            map.push(ColumnMap::Shift { col: k, lower: lo });
        } else if hi.is_finite() {
            for &(i, a) in col {
                b[i] -= a * hi;
            }
            constant += cj * hi;
            let k = cols.len();
            cols.push(col.iter().map(|&(i, a)| (i, -a)).collect());
            cost.push(-cj);
            map.push(ColumnMap::Mirror { col: k, upper: hi });
        } else {
            let plus = cols.len();
            cols.push(col.clone());
            cost.push(cj);
            cols.push(col.iter().map(|&(i, a)| (i, -a)).collect());
            cost.push(-cj);
            map.push(ColumnMap::Split { plus, minus: plus + 1 });
        }
    }

    // rows whose structural part vanished (all columns fixed) are checked and dropped
    let mut has_entry = vec![false; m0];
    for col in &cols {
        for &(i, a) in col {
            if a != 0.0 {
                has_entry[i] = true;
            }
        }
    }
    let mut slacks = Vec::new();
    let mut kept_rows = Vec::new();
    for i in 0..m0 {
        let (lo, hi) = g.row_interval(i);
        let shift = g.rhs[i] - b[i];
        let (lo, hi) = (lo - shift, hi - shift);
        if !has_entry[i] {
            if lo > 1e-9 * (1.0 + lo.abs()) || hi < -1e-9 * (1.0 + hi.abs()) {
                return Err(MpsError::Inconsistent(format!(
                    "row `{}` has no free columns and requires activity in [{lo}, {hi}]",
                    g.rows[i].name
                )));
            }
            continue;
        }
        kept_rows.push(i);
        let slack = |sign: f64, cols: &mut Vec<Vec<(usize, f64)>>, cost: &mut Vec<f64>| {
            let k = cols.len();
            cols.push(vec![(i, -sign)]);
            cost.push(0.0);
            k
        };
        match g.rows[i].kind {
            RowKind::E if g.ranges[i].is_none() || g.ranges[i] == Some(0.0) => {}
            RowKind::N => {}
            RowKind::L => {
                // a x + s = hi, 0 ≤ s (≤ hi − lo)
                b[i] = hi;
                let k = slack(-1.0, &mut cols, &mut cost);
                if lo.is_finite() {
                    upper_idx.push(k);
                    u.push(hi - lo);
                }
                slacks.push(SlackMap {
                    row: i,
                    col: k,
                    sign: -1.0,
                });
            }
            RowKind::G | RowKind::E => {
                // a x − s = lo, 0 ≤ s (≤ hi − lo)
                b[i] = lo;
                let k = slack(1.0, &mut cols, &mut cost);
                if hi.is_finite() {
                    upper_idx.push(k);
                    u.push(hi - lo);
                }
                slacks.push(SlackMap {
                    row: i,
                    col: k,
                    sign: 1.0,
                });
            }
        }
    }

    let n = cols.len();
    let m = kept_rows.len();
    let mut row_pos = vec![usize::MAX; m0];
    for (r, &i) in kept_rows.iter().enumerate() {
        row_pos[i] = r;
    }
    let mut a = DenseMatrix::zeros(m, n);
    for (k, col) in cols.iter().enumerate() {
        for &(i, v) in col {
            if row_pos[i] != usize::MAX {
                a[(row_pos[i], k)] += v;
            }
        }
    }
    let b_std: Vec<f64> = kept_rows.iter().map(|&i| b[i]).collect();
    let mut order: Vec<usize> = (0..upper_idx.len()).collect();
    order.sort_by_key(|&k| upper_idx[k]);
    let upper_sorted: Vec<usize> = order.iter().map(|&k| upper_idx[k]).collect();
    let u_sorted: Vec<f64> = order.iter().map(|&k| u[k]).collect();
    let lp = LpProblem::new(a, b_std, cost, upper_sorted, u_sorted)?;
    Ok((
        lp,
        StandardFormMap {
            columns: map,
            slacks,
            kept_rows,
            objective_constant: constant,
            n_std: n,
        },
    ))
}
