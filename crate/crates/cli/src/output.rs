//! Tables and their CSV / JSON renderings.

use serde::ser::{Serialize, SerializeMap, SerializeSeq, Serializer};
use serde_json::value::RawValue;

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(i64),
    Real(f64),
    Text(String),
    Bool(bool),
    Missing,
}

impl Cell {
    pub fn text(s: impl Into<String>) -> Cell {
        Cell::Text(s.into())
    }

    pub fn opt_real(v: Option<f64>) -> Cell {
        v.map_or(Cell::Missing, Cell::Real)
    }

    fn csv(&self) -> String {
        match self {
            Cell::Int(i) => i.to_string(),
            Cell::Real(v) => real(*v),
            Cell::Text(s) => quote(s),
            Cell::Bool(b) => b.to_string(),
            Cell::Missing => String::new(),
        }
    }
}

/// 17 significant digits, enough to round-trip any f64.
pub fn real(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else if v.is_nan() {
        "nan".into()
    } else if v > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

fn quote(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

impl Serialize for Cell {
    fn serialize<S: Serializer>(&self, ser: S) -> Result<S::Ok, S::Error> {
        match self {
            Cell::Int(i) => ser.serialize_i64(*i),
            Cell::Real(v) if v.is_finite() => {
                let raw = RawValue::from_string(real(*v)).map_err(serde::ser::Error::custom)?;
                raw.serialize(ser)
            }
            Cell::Real(_) | Cell::Missing => ser.serialize_none(),
            Cell::Text(s) => ser.serialize_str(s),
            Cell::Bool(b) => ser.serialize_bool(*b),
        }
    }
}

/// Ordered `(key, value)` pairs, serialized as a JSON object.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Record(pub Vec<(String, Cell)>);

impl Record {
    pub fn push(&mut self, key: &str, value: Cell) -> &mut Self {
        self.0.push((key.to_string(), value));
        self
    }
}

impl Serialize for Record {
    fn serialize<S: Serializer>(&self, ser: S) -> Result<S::Ok, S::Error> {
        let mut map = ser.serialize_map(Some(self.0.len()))?;
        for (k, v) in &self.0 {
            map.serialize_entry(k, v)?;
        }
        map.end()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: &[&'static str]) -> Table {
        Table {
            columns: columns.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    fn csv(&self, out: &mut String) {
        out.push_str(&self.columns.join(","));
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(Cell::csv).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
    }
}

struct RowsAsObjects<'a>(&'a Table);

impl Serialize for RowsAsObjects<'_> {
    fn serialize<S: Serializer>(&self, ser: S) -> Result<S::Ok, S::Error> {
        let mut seq = ser.serialize_seq(Some(self.0.rows.len()))?;
        for row in &self.0.rows {
            let rec = Record(
                self.0
                    .columns
                    .iter()
                    .zip(row)
                    .map(|(c, v)| (c.to_string(), v.clone()))
                    .collect(),
            );
            seq.serialize_element(&rec)?;
        }
        seq.end()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Section {
    /// A single record (`values` in JSON, a one-row table in CSV).
    Values(Record),
    /// A table under the given key.
    Rows(&'static str, Table),
}

/// Everything one command emits.
#[derive(Debug, Clone, PartialEq)]
pub struct Envelope {
    pub command: &'static str,
    pub parameters: Record,
    pub sections: Vec<Section>,
}

impl Serialize for Envelope {
    fn serialize<S: Serializer>(&self, ser: S) -> Result<S::Ok, S::Error> {
        let mut map = ser.serialize_map(None)?;
        map.serialize_entry("schema_version", "1")?;
        map.serialize_entry("command", self.command)?;
        map.serialize_entry("parameters", &self.parameters)?;
        for s in &self.sections {
            match s {
                Section::Values(r) => map.serialize_entry("values", r)?,
                Section::Rows(key, t) => map.serialize_entry(key, &RowsAsObjects(t))?,
            }
        }
        map.serialize_entry("deterministic", &true)?;
        map.end()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

impl Envelope {
    /// CSV sections are separated by one blank line, each with its header.
    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Json => {
                let mut s = serde_json::to_string_pretty(self).expect("envelope serializes");
                s.push('\n');
                s
            }
            Format::Csv => {
                let mut out = String::new();
                for (i, s) in self.sections.iter().enumerate() {
                    if i > 0 {
                        out.push('\n');
                    }
                    match s {
                        Section::Rows(_, t) => t.csv(&mut out),
                        Section::Values(r) => {
                            out.push_str(
                                &r.0.iter()
                                    .map(|(k, _)| k.as_str())
                                    .collect::<Vec<_>>()
                                    .join(","),
                            );
                            out.push('\n');
                            out.push_str(
                                &r.0.iter()
                                    .map(|(_, v)| v.csv())
                                    .collect::<Vec<_>>()
                                    .join(","),
                            );
                            out.push('\n');
                        }
                    }
                }
                out
            }
        }
    }
}

#[cfg(test)]
#[allow(clippy::excessive_precision)]
mod tests {
    use super::*;

    #[test]
    fn reals_round_trip() {
        for v in [0.1, 1.0 / 3.0, 1.356_626_464_006_908_9e-3, -2.5e-300, 8.0] {
            assert_eq!(real(v).parse::<f64>().unwrap(), v);
        }
        assert_eq!(real(0.5), "5.0000000000000000e-1");
    }

    #[test]
    fn csv_quoting() {
        assert_eq!(Cell::text("a,b").csv(), "\"a,b\"");
        assert_eq!(Cell::text("say \"x\"").csv(), "\"say \"\"x\"\"\"");
        assert_eq!(Cell::text("q\",").csv(), "\"q\"\",\"");
    }

    #[test]
    fn json_envelope_shape() {
        let mut t = Table::new(&["n", "v"]);
        t.push(vec![Cell::Int(1), Cell::Real(0.1)]);
        t.push(vec![Cell::Int(2), Cell::Real(f64::NAN)]);
        let env = Envelope {
            command: "demo",
            parameters: Record(vec![("n".into(), Cell::Int(2))]),
            sections: vec![Section::Rows("rows", t)],
        };
        let v: serde_json::Value = serde_json::from_str(&env.render(Format::Json)).unwrap();
        assert_eq!(v["schema_version"], "1");
        assert_eq!(v["rows"][0]["v"].as_f64(), Some(0.1));
        assert!(v["rows"][1]["v"].is_null());
        assert_eq!(v["deterministic"], true);
        assert_eq!(
            env.render(Format::Csv),
            "n,v\n1,1.0000000000000001e-1\n2,nan\n"
        );
    }
}
