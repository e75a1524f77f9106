//! Result files: JSON summaries with fixed 17-significant-digit floats and CSV tables.

use serde::Serialize;
use serde_json::ser::Formatter;
use serde_json::{json, Map, Value};
use std::io;
use std::path::{Path, PathBuf};

use super::config::Format;
use crate::ensemble::MeanSe;
use crate::error::Result;

/// Compact JSON with every float written as `d.dddddddddddddddde±x`.
struct SigDigits;

impl Formatter for SigDigits {
    fn write_f64<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        write!(writer, "{value:.16e}")
    }

    fn write_f32<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        write!(writer, "{:.16e}", f64::from(value))
    }
}

pub fn to_json_string<T: Serialize>(value: &T) -> Result<String> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, SigDigits);
    value.serialize(&mut ser).map_err(io::Error::from)?;
    Ok(String::from_utf8(buf).expect("serde_json writes UTF-8"))
}

/// Flat summary: every key maps to {"value": …, "source": …}.
#[derive(Clone, Debug, Default, Serialize)]
pub struct Summary(Map<String, Value>);

impl Summary {
    pub fn new() -> Self {
        Summary(Map::new())
    }

    pub fn add<T: Serialize>(&mut self, key: &str, value: T, source: &str) {
        let v = serde_json::to_value(value).unwrap_or(Value::Null);
        self.0.insert(key.to_string(), json!({ "value": v, "source": source }));
    }

    pub fn get(&self, key: &str) -> Option<&Value> {
        self.0.get(key).and_then(|e| e.get("value"))
    }
}

pub struct Output {
    dir: PathBuf,
    json: bool,
    csv: bool,
}

impl Output {
    pub fn new(dir: PathBuf, formats: &[Format]) -> Result<Self> {
        std::fs::create_dir_all(&dir)?;
        Ok(Output { dir, json: formats.contains(&Format::Json), csv: formats.contains(&Format::Csv) })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn json<T: Serialize>(&self, name: &str, value: &T) -> Result<()> {
        if self.json {
            let mut s = to_json_string(value)?;
            s.push('\n');
            std::fs::write(self.dir.join(name), s)?;
        }
        Ok(())
    }

    pub fn csv(&self, name: &str, body: &str) -> Result<()> {
        if self.csv {
            std::fs::write(self.dir.join(name), body)?;
        }
        Ok(())
    }
}

pub fn curve_csv(header: &str, times: &[f64], curve: &[MeanSe]) -> String {
    let mut s = format!("{header}\n");
    for (t, m) in times.iter().zip(curve) {
        s.push_str(&format!("{t:.17e},{:.17e},{:.17e}\n", m.mean, m.se));
    }
    s
}
