//! CSV tables with a schema comment line and one `# column: unit` line per
//! column. Floats use the shortest round-trip scientific form.

use std::fmt::Write as _;

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(i64),
    Text(String),
}

impl Cell {
    fn render(&self, out: &mut String) {
        match self {
            Cell::Num(v) => write!(out, "{v:e}").unwrap(),
            Cell::Int(v) => write!(out, "{v}").unwrap(),
            Cell::Text(s) => out.push_str(s),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<(String, String)>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: &[(&str, &str)]) -> Self {
        Table {
            columns: columns
                .iter()
                .map(|(c, u)| (c.to_string(), u.to_string()))
                .collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self, title: &str) -> String {
        let names: Vec<&str> = self.columns.iter().map(|c| c.0.as_str()).collect();
        let mut out = String::new();
        writeln!(out, "# {title}").unwrap();
        writeln!(out, "# schema: {}", names.join(",")).unwrap();
        for (c, u) in &self.columns {
            writeln!(out, "# {c}: {u}").unwrap();
        }
        writeln!(out, "{}", names.join(",")).unwrap();
        for row in &self.rows {
            for (i, cell) in row.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                cell.render(&mut out);
            }
            out.push('\n');
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParsedCsv {
    pub columns: Vec<String>,
    pub units: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

/// Parses a file written by [`Table::to_csv`], checking that the schema line,
/// unit lines and header agree and that every row has the right width.
pub fn parse_csv(text: &str) -> Result<ParsedCsv, String> {
    let mut schema: Option<Vec<String>> = None;
    let mut units = Vec::new();
    let mut header: Option<Vec<String>> = None;
    let mut rows = Vec::new();
    for (n, line) in text.lines().enumerate() {
        if let Some(c) = line.strip_prefix("# ") {
            if header.is_some() {
                return Err(format!("line {}: comment after header", n + 1));
            }
            if let Some(s) = c.strip_prefix("schema: ") {
                schema = Some(s.split(',').map(str::to_string).collect());
            } else if let (Some(sch), Some((col, unit))) = (&schema, c.split_once(": ")) {
                if sch.get(units.len()).map(String::as_str) != Some(col) {
                    return Err(format!(
                        "line {}: unit line for unexpected column `{col}`",
                        n + 1
                    ));
                }
                units.push(unit.to_string());
            }
            continue;
        }
        let fields: Vec<String> = line.split(',').map(str::to_string).collect();
        match &header {
            None => header = Some(fields),
            Some(h) => {
                if fields.len() != h.len() {
                    return Err(format!(
                        "line {}: {} fields, expected {}",
                        n + 1,
                        fields.len(),
                        h.len()
                    ));
                }
                rows.push(fields);
            }
        }
    }
    let schema = schema.ok_or("missing schema line")?;
    let header = header.ok_or("missing header row")?;
    if header != schema {
        return Err("header does not match schema line".into());
    }
    if units.len() != schema.len() {
        return Err(format!(
            "{} unit lines for {} columns",
            units.len(),
            schema.len()
        ));
    }
    Ok(ParsedCsv {
        columns: header,
        units,
        rows,
    })
}
