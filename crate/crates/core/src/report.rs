//! JSON-lines and CSV output. Big numbers travel as decimal strings; floats must be
//! finite.

use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;
use std::str::FromStr;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;
use serde_json::{json, Value};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("serialization error: {0}")]
    Serialization(String),
    #[error("mixed record kinds: '{expected}' then '{found}'")]
    MixedRecords { expected: &'static str, found: &'static str },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Format {
    #[default]
    Jsonl,
    Csv,
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "jsonl" => Ok(Format::Jsonl),
            "csv" => Ok(Format::Csv),
            other => Err(format!("unknown format '{other}' (jsonl or csv)")),
        }
    }
}

impl fmt::Display for Format {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Format::Jsonl => "jsonl",
            Format::Csv => "csv",
        })
    }
}

/// Serializer helpers that reject NaN and infinities instead of writing `null`.
pub mod finite {
    use serde::ser::Error;
    use serde::Serializer;

    pub fn serialize<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
        if x.is_finite() {
            s.serialize_f64(*x)
        } else {
            Err(S::Error::custom(format!("non-finite float {x}")))
        }
    }

    pub fn option<S: Serializer>(x: &Option<f64>, s: S) -> Result<S::Ok, S::Error> {
        match x {
            Some(v) => serialize(v, s),
            None => s.serialize_none(),
        }
    }

    pub fn vec<S: Serializer>(x: &[f64], s: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeSeq;
        let mut seq = s.serialize_seq(Some(x.len()))?;
        for v in x {
            if !v.is_finite() {
                return Err(S::Error::custom(format!("non-finite float {v}")));
            }
            seq.serialize_element(v)?;
        }
        seq.end()
    }
}

/// A typed output record.
#[derive(Clone, Debug, PartialEq)]
pub struct Record {
    kind: &'static str,
    value: Value,
}

impl Record {
    pub fn new<T: Serialize>(kind: &'static str, payload: &T) -> Result<Self, ReportError> {
        let value = serde_json::to_value(payload).map_err(|e| ReportError::Serialization(e.to_string()))?;
        if !value.is_object() {
            return Err(ReportError::Serialization(format!("{kind} record is not an object")));
        }
        Ok(Self { kind, value })
    }

    pub fn kind(&self) -> &'static str {
        self.kind
    }

    pub fn value(&self) -> &Value {
        &self.value
    }
}

/// The optional first line identifying the run; it carries the only wall-clock data.
#[derive(Clone, Debug)]
pub struct Header {
    pub command: String,
}

impl Header {
    fn jsonl(&self) -> String {
        let ts = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
        json!({"header": {"tool": env!("CARGO_PKG_NAME"), "version": env!("CARGO_PKG_VERSION"),
            "command": self.command, "timestamp": ts.to_string()}})
        .to_string()
    }

    fn csv(&self) -> String {
        let ts = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
        format!("# {} {} command={} timestamp={ts}", env!("CARGO_PKG_NAME"), env!("CARGO_PKG_VERSION"), self.command)
    }
}

/// Incremental writer for a homogeneous record stream.
pub struct Emitter<W: Write> {
    format: Format,
    out: W,
    kind: Option<&'static str>,
    columns: Option<Vec<String>>,
}

impl<W: Write> Emitter<W> {
    pub fn new(format: Format, mut out: W, header: Option<&Header>) -> Result<Self, ReportError> {
        if let Some(h) = header {
            let line = match format {
                Format::Jsonl => h.jsonl(),
                Format::Csv => h.csv(),
            };
            writeln!(out, "{line}")?;
        }
        Ok(Self { format, out, kind: None, columns: None })
    }

    pub fn emit(&mut self, record: &Record) -> Result<(), ReportError> {
        match self.kind {
            Some(k) if k != record.kind => return Err(ReportError::MixedRecords { expected: k, found: record.kind }),
            _ => self.kind = Some(record.kind),
        }
        match self.format {
            Format::Jsonl => writeln!(self.out, "{}", record.value)?,
            Format::Csv => self.emit_csv(record)?,
        }
        Ok(())
    }

    fn emit_csv(&mut self, record: &Record) -> Result<(), ReportError> {
        let mut flat = BTreeMap::new();
        flatten("", &record.value, &mut flat);
        let keys: Vec<String> = flat.keys().cloned().collect();
        let mut writer = csv::WriterBuilder::new().from_writer(Vec::new());
        match &self.columns {
            None => {
                writer.write_record(&keys).map_err(|e| ReportError::Serialization(e.to_string()))?;
                self.columns = Some(keys);
            }
            Some(cols) if *cols != keys => {
                return Err(ReportError::Serialization("CSV rows with different columns".into()));
            }
            Some(_) => {}
        }
        writer.write_record(flat.values()).map_err(|e| ReportError::Serialization(e.to_string()))?;
        let bytes = writer.into_inner().map_err(|e| ReportError::Serialization(e.to_string()))?;
        self.out.write_all(&bytes)?;
        Ok(())
    }

    pub fn flush(&mut self) -> Result<(), ReportError> {
        self.out.flush()?;
        Ok(())
    }

    pub fn into_inner(self) -> W {
        self.out
    }
}

/// Nested objects become dotted column names; arrays of scalars are joined with ';'
/// and other arrays are written as JSON text.
fn flatten(prefix: &str, v: &Value, out: &mut BTreeMap<String, String>) {
    let key = |k: &str| if prefix.is_empty() { k.to_string() } else { format!("{prefix}.{k}") };
    match v {
        Value::Object(map) => {
            for (k, x) in map {
                match x {
                    Value::Object(_) => flatten(&key(k), x, out),
                    _ => {
                        out.insert(key(k), scalar_text(x));
                    }
                }
            }
        }
        other => {
            out.insert(prefix.to_string(), scalar_text(other));
        }
    }
}

fn scalar_text(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::String(s) => s.clone(),
        Value::Array(items) if items.iter().all(|x| !x.is_array() && !x.is_object()) => {
            items.iter().map(scalar_text).collect::<Vec<_>>().join(";")
        }
        other => other.to_string(),
    }
}

/// Writes a complete homogeneous record list.
pub fn emit_report<W: Write>(
    records: &[Record],
    format: Format,
    header: Option<&Header>,
    out: W,
) -> Result<W, ReportError> {
    let mut e = Emitter::new(format, out, header)?;
    for r in records {
        e.emit(r)?;
    }
    e.flush()?;
    Ok(e.into_inner())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[derive(Serialize)]
    struct Row {
        name: String,
        #[serde(serialize_with = "finite::serialize")]
        value: f64,
        coords: Vec<String>,
    }

    fn row(v: f64) -> Row {
        Row { name: "x".into(), value: v, coords: vec!["1".into(), "-2".into()] }
    }

    fn text(records: &[Record], format: Format) -> Result<String, ReportError> {
        Ok(String::from_utf8(emit_report(records, format, None, Vec::new())?).unwrap())
    }

    #[test]
    fn empty_list_writes_only_the_header() {
        assert_eq!(text(&[], Format::Jsonl).unwrap(), "");
        let out = emit_report(&[], Format::Jsonl, Some(&Header { command: "height".into() }), Vec::new()).unwrap();
        let line = String::from_utf8(out).unwrap();
        assert_eq!(line.lines().count(), 1);
        assert!(line.contains("\"header\""));
    }

    #[test]
    fn jsonl_and_csv_layouts() {
        let r = vec![Record::new("row", &row(1.5)).unwrap(), Record::new("row", &row(2.0)).unwrap()];
        assert_eq!(
            text(&r, Format::Jsonl).unwrap(),
            "{\"coords\":[\"1\",\"-2\"],\"name\":\"x\",\"value\":1.5}\n{\"coords\":[\"1\",\"-2\"],\"name\":\"x\",\"value\":2.0}\n"
        );
        assert_eq!(text(&r, Format::Csv).unwrap(), "coords,name,value\n1;-2,x,1.5\n1;-2,x,2.0\n");
    }

    #[test]
    fn non_finite_and_mixed_records_are_rejected() {
        assert!(matches!(Record::new("row", &row(f64::NAN)), Err(ReportError::Serialization(_))));
        let mixed = vec![Record::new("row", &row(1.0)).unwrap(), Record::new("other", &json!({"a": 1})).unwrap()];
        assert!(matches!(text(&mixed, Format::Jsonl), Err(ReportError::MixedRecords { .. })));
    }

    #[test]
    fn nested_objects_flatten_to_dotted_columns() {
        let r = vec![Record::new("s", &json!({"a": {"b": "1", "c": [[1, 2]]}, "d": null})).unwrap()];
        assert_eq!(text(&r, Format::Csv).unwrap(), "a.b,a.c,d\n1,\"[[1,2]]\",\n");
    }
}
