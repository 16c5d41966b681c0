//! Tables and their CSV / JSON renderings.

use serde_json::{Map, Number, Value};

pub const SIG_DIGITS: usize = 12;

/// Fixed-point decimal with `SIG_DIGITS` significant digits, never in
/// scientific notation.
pub fn fmt_num(x: f64) -> String {
    if !x.is_finite() {
        return if x.is_nan() { "nan".into() } else if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return format!("{:.*}", SIG_DIGITS - 1, 0.0);
    }
    let decimals = |x: f64| {
        let exp = x.abs().log10().floor() as i64;
        (SIG_DIGITS as i64 - 1 - exp).max(0) as usize
    };
    let mut d = decimals(x);
    let mut s = format!("{x:.d$}");
    // Rounding can carry into a new leading digit (9.99... -> 10.0...).
    let rounded: f64 = s.parse().expect("formatted float");
    if rounded != 0.0 && decimals(rounded) < d {
        d = decimals(rounded);
        s = format!("{x:.d$}");
    }
    if s.starts_with('-') && s[1..].chars().all(|c| c == '0' || c == '.') {
        s.remove(0);
    }
    s
}

#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(u64),
    Bool(bool),
    Text(String),
    /// Undefined value; the CSV shows the marker, JSON shows null.
    Missing(&'static str),
}

impl Cell {
    pub fn opt(x: Option<f64>, marker: &'static str) -> Cell {
        x.map_or(Cell::Missing(marker), Cell::Num)
    }

    fn csv(&self) -> String {
        match self {
            Cell::Num(x) => fmt_num(*x),
            Cell::Int(n) => n.to_string(),
            Cell::Bool(b) => b.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Missing(m) => m.to_string(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Num(x) => fmt_num(*x)
                .parse::<f64>()
                .ok()
                .and_then(Number::from_f64)
                .map_or(Value::Null, Value::Number),
            Cell::Int(n) => Value::Number((*n).into()),
            Cell::Bool(b) => Value::Bool(*b),
            Cell::Text(s) => Value::String(s.clone()),
            Cell::Missing(_) => Value::Null,
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Cell {
        Cell::Num(x)
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Cell {
        Cell::Text(s.to_string())
    }
}

/// Rows sharing a context. In CSV the context is a `# case` comment line
/// and the trailer follows as `# key=value` lines; in JSON both become
/// fields of every row.
#[derive(Clone, Debug, Default)]
pub struct Section {
    pub context: Vec<(String, Cell)>,
    pub rows: Vec<Vec<Cell>>,
    pub trailer: Vec<(String, Cell)>,
}

#[derive(Clone, Debug)]
pub struct Table {
    pub columns: Vec<String>,
    pub sections: Vec<Section>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Table {
            columns: columns.iter().map(|s| s.to_string()).collect(),
            sections: Vec::new(),
        }
    }

    /// Single-section table.
    pub fn with_rows(columns: &[&str], rows: Vec<Vec<Cell>>) -> Self {
        let mut t = Table::new(columns);
        t.sections.push(Section {
            rows,
            ..Section::default()
        });
        t
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.columns.join(",");
        out.push('\n');
        for s in &self.sections {
            if !s.context.is_empty() {
                let kv: Vec<String> = s.context.iter().map(|(k, v)| format!("{k}={}", v.csv())).collect();
                out.push_str(&format!("# case {}\n", kv.join(" ")));
            }
            for row in &s.rows {
                let cells: Vec<String> = row.iter().map(Cell::csv).collect();
                out.push_str(&cells.join(","));
                out.push('\n');
            }
            for (k, v) in &s.trailer {
                out.push_str(&format!("# {k}={}\n", v.csv()));
            }
        }
        out
    }

    pub fn to_json(&self) -> String {
        let objects: Vec<Value> = self
            .sections
            .iter()
            .flat_map(|s| {
                s.rows.iter().map(move |row| {
                    let mut m = Map::new();
                    for (k, v) in &s.context {
                        m.insert(k.clone(), v.json());
                    }
                    for (k, v) in self.columns.iter().zip(row) {
                        m.insert(k.clone(), v.json());
                    }
                    for (k, v) in &s.trailer {
                        m.insert(k.clone(), v.json());
                    }
                    Value::Object(m)
                })
            })
            .collect();
        let mut s = serde_json::to_string_pretty(&Value::Array(objects)).expect("serializable");
        s.push('\n');
        s
    }
}
