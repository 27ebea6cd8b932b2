//! Line-oriented key/value text used for model files and study summaries.
//!
//! ```text
//! # comment
//! name = "text"
//! lambda = 0.1
//! weights [3] = 1.5 -2 0.25
//! components [2 x 3] = 1 0 0 0 1 0
//! ```
//!
//! Numbers are written in Rust's shortest round-trip form, so a write/read
//! cycle is bit-exact. Matrices are row-major.

use std::fmt::Write as _;

use nalgebra::DMatrix;

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub enum KvValue {
    Number(f64),
    Text(String),
    Vector(Vec<f64>),
    Matrix(DMatrix<f64>),
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct KvDoc {
    entries: Vec<(String, KvValue)>,
}

fn fmt_num(v: f64) -> String {
    format!("{v:?}")
}

fn valid_key(k: &str) -> bool {
    !k.is_empty() && k.chars().all(|c| c.is_ascii_alphanumeric() || "._-".contains(c))
}

impl KvDoc {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn entries(&self) -> &[(String, KvValue)] {
        &self.entries
    }

    fn push(&mut self, key: &str, v: KvValue) {
        assert!(valid_key(key), "invalid key {key:?}");
        self.entries.push((key.to_string(), v));
    }

    pub fn num(&mut self, key: &str, v: f64) {
        self.push(key, KvValue::Number(v));
    }

    pub fn text(&mut self, key: &str, v: &str) {
        assert!(!v.contains(['"', '\n']), "text values cannot hold quotes or newlines");
        self.push(key, KvValue::Text(v.to_string()));
    }

    pub fn vector(&mut self, key: &str, v: &[f64]) {
        self.push(key, KvValue::Vector(v.to_vec()));
    }

    pub fn matrix(&mut self, key: &str, m: &DMatrix<f64>) {
        self.push(key, KvValue::Matrix(m.clone()));
    }

    pub fn get(&self, key: &str) -> Result<&KvValue> {
        self.entries
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v)
            .ok_or_else(|| Error::Format {
                line: 0,
                message: format!("missing key '{key}'"),
            })
    }

    fn wrong(key: &str, want: &str) -> Error {
        Error::Format {
            line: 0,
            message: format!("key '{key}' is not a {want}"),
        }
    }

    pub fn get_num(&self, key: &str) -> Result<f64> {
        match self.get(key)? {
            KvValue::Number(v) => Ok(*v),
            _ => Err(Self::wrong(key, "number")),
        }
    }

    pub fn get_text(&self, key: &str) -> Result<&str> {
        match self.get(key)? {
            KvValue::Text(v) => Ok(v),
            _ => Err(Self::wrong(key, "text")),
        }
    }

    pub fn get_vector(&self, key: &str) -> Result<&[f64]> {
        match self.get(key)? {
            KvValue::Vector(v) => Ok(v),
            _ => Err(Self::wrong(key, "vector")),
        }
    }

    pub fn get_matrix(&self, key: &str) -> Result<&DMatrix<f64>> {
        match self.get(key)? {
            KvValue::Matrix(v) => Ok(v),
            _ => Err(Self::wrong(key, "matrix")),
        }
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.entries {
            match v {
                KvValue::Number(x) => writeln!(out, "{k} = {}", fmt_num(*x)),
                KvValue::Text(s) => writeln!(out, "{k} = \"{s}\""),
                KvValue::Vector(xs) => {
                    let body: Vec<String> = xs.iter().map(|x| fmt_num(*x)).collect();
                    writeln!(out, "{k} [{}] = {}", xs.len(), body.join(" "))
                }
                KvValue::Matrix(m) => {
                    let body: Vec<String> = m.transpose().iter().map(|x| fmt_num(*x)).collect();
                    writeln!(out, "{k} [{} x {}] = {}", m.nrows(), m.ncols(), body.join(" "))
                }
            }
            .expect("writing to String");
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut doc = KvDoc::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let err = |message: String| Error::Format { line, message };
            let t = raw.trim();
            if t.is_empty() || t.starts_with('#') {
                continue;
            }
            let (lhs, rhs) = t.split_once('=').ok_or_else(|| err("expected 'key = value'".into()))?;
            let (lhs, rhs) = (lhs.trim(), rhs.trim());
            let (key, shape) = match lhs.split_once('[') {
                Some((k, s)) => {
                    let s = s.strip_suffix(']').ok_or_else(|| err("unclosed shape".into()))?;
                    (k.trim(), Some(s))
                }
                None => (lhs, None),
            };
            if !valid_key(key) {
                return Err(err(format!("invalid key '{key}'")));
            }
            if doc.entries.iter().any(|(k, _)| k == key) {
                return Err(err(format!("duplicate key '{key}'")));
            }
            let parse_nums = |body: &str| -> Result<Vec<f64>> {
                body.split_whitespace()
                    .map(|w| w.parse::<f64>().map_err(|_| err(format!("bad number '{w}'"))))
                    .collect()
            };
            let dim = |s: &str| s.trim().parse::<usize>().map_err(|_| err(format!("bad dimension '{s}'")));
            let value = match shape {
                None if rhs.starts_with('"') => {
                    let inner = rhs
                        .strip_prefix('"')
                        .and_then(|s| s.strip_suffix('"'))
                        .filter(|s| !s.contains('"'))
                        .ok_or_else(|| err("unterminated text".into()))?;
                    KvValue::Text(inner.to_string())
                }
                None => {
                    let v = parse_nums(rhs)?;
                    if v.len() != 1 {
                        return Err(err("scalar expects one number".into()));
                    }
                    KvValue::Number(v[0])
                }
                Some(s) => {
                    let nums = parse_nums(rhs)?;
                    match s.split_once('x') {
                        None => {
                            let n = dim(s)?;
                            if nums.len() != n {
                                return Err(err(format!("expected {n} values, got {}", nums.len())));
                            }
                            KvValue::Vector(nums)
                        }
                        Some((r, c)) => {
                            let (r, c) = (dim(r)?, dim(c)?);
                            if nums.len() != r * c {
                                return Err(err(format!("expected {} values, got {}", r * c, nums.len())));
                            }
                            KvValue::Matrix(DMatrix::from_row_slice(r, c, &nums))
                        }
                    }
                }
            };
            doc.entries.push((key.to_string(), value));
        }
        Ok(doc)
    }
}
