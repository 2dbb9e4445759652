//! Plain-text `key = value` documents used for scene and experiment configs.
//!
//! Blank lines and `#` comments are ignored. Keys are unique; later
//! duplicates are rejected so a typo cannot silently shadow a setting.
//! Lists are comma separated, and numeric lists also accept the inclusive
//! range form `start:step:stop`.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::C64;

#[derive(Debug, Clone, Default, PartialEq)]
pub struct KvDoc {
    entries: BTreeMap<String, String>,
    order: Vec<String>,
}

fn cfg_err<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Config(msg.into()))
}

impl KvDoc {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut doc = Self::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = match raw.find('#') {
                Some(i) => &raw[..i],
                None => raw,
            }
            .trim();
            if line.is_empty() {
                continue;
            }
            let Some((k, v)) = line.split_once('=') else {
                return cfg_err(format!("line {}: expected `key = value`", lineno + 1));
            };
            let key = k.trim();
            if key.is_empty() {
                return cfg_err(format!("line {}: empty key", lineno + 1));
            }
            if doc.entries.contains_key(key) {
                return cfg_err(format!("line {}: duplicate key `{key}`", lineno + 1));
            }
            doc.set(key, v.trim());
        }
        Ok(doc)
    }

    pub fn set(&mut self, key: &str, value: impl Into<String>) {
        if self.entries.insert(key.to_string(), value.into()).is_none() {
            self.order.push(key.to_string());
        }
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.order.iter().map(String::as_str)
    }

    /// Fails on any key outside `known`.
    pub fn reject_unknown(&self, known: &[&str]) -> Result<()> {
        for k in self.keys() {
            if !known.contains(&k) {
                return cfg_err(format!("unknown key `{k}`"));
            }
        }
        Ok(())
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for k in &self.order {
            let _ = writeln!(out, "{k} = {}", self.entries[k]);
        }
        out
    }

    pub fn f64_or(&self, key: &str, default: f64) -> Result<f64> {
        match self.get(key) {
            Some(v) => parse_f64(key, v),
            None => Ok(default),
        }
    }

    pub fn f64_req(&self, key: &str) -> Result<f64> {
        match self.get(key) {
            Some(v) => parse_f64(key, v),
            None => cfg_err(format!("missing key `{key}`")),
        }
    }

    pub fn usize_or(&self, key: &str, default: usize) -> Result<usize> {
        match self.get(key) {
            Some(v) => parse_usize(key, v),
            None => Ok(default),
        }
    }

    pub fn usize_req(&self, key: &str) -> Result<usize> {
        match self.get(key) {
            Some(v) => parse_usize(key, v),
            None => cfg_err(format!("missing key `{key}`")),
        }
    }

    pub fn u64_or(&self, key: &str, default: u64) -> Result<u64> {
        match self.get(key) {
            Some(v) => v
                .parse()
                .or_else(|_| cfg_err(format!("`{key}`: `{v}` is not an unsigned integer"))),
            None => Ok(default),
        }
    }

    pub fn bool_or(&self, key: &str, default: bool) -> Result<bool> {
        match self.get(key) {
            Some("true" | "yes" | "1") => Ok(true),
            Some("false" | "no" | "0") => Ok(false),
            Some(v) => cfg_err(format!("`{key}`: `{v}` is not a boolean")),
            None => Ok(default),
        }
    }

    pub fn f64_list(&self, key: &str) -> Result<Option<Vec<f64>>> {
        self.get(key).map(|v| parse_f64_list(key, v)).transpose()
    }

    pub fn usize_list(&self, key: &str) -> Result<Option<Vec<usize>>> {
        self.get(key)
            .map(|v| {
                parse_f64_list(key, v)?
                    .into_iter()
                    .map(|x| {
                        if x >= 0.0 && x.fract() == 0.0 {
                            Ok(x as usize)
                        } else {
                            cfg_err(format!("`{key}`: {x} is not a count"))
                        }
                    })
                    .collect()
            })
            .transpose()
    }

    pub fn str_list(&self, key: &str) -> Option<Vec<String>> {
        self.get(key).map(|v| {
            v.split(',')
                .map(|s| s.trim().to_string())
                .filter(|s| !s.is_empty())
                .collect()
        })
    }

    /// Complex gains written as `magnitude@phase_deg`, comma separated.
    pub fn gain_list(&self, key: &str) -> Result<Option<Vec<C64>>> {
        self.get(key)
            .map(|v| {
                v.split(',')
                    .map(str::trim)
                    .filter(|s| !s.is_empty())
                    .map(|s| parse_gain(key, s))
                    .collect()
            })
            .transpose()
    }

    pub fn gain_or(&self, key: &str, default: C64) -> Result<C64> {
        match self.get(key) {
            Some(v) => parse_gain(key, v),
            None => Ok(default),
        }
    }
}

fn parse_f64(key: &str, v: &str) -> Result<f64> {
    match v.trim().parse::<f64>() {
        Ok(x) if x.is_finite() => Ok(x),
        _ => cfg_err(format!("`{key}`: `{v}` is not a finite number")),
    }
}

fn parse_usize(key: &str, v: &str) -> Result<usize> {
    v.trim()
        .parse()
        .or_else(|_| cfg_err(format!("`{key}`: `{v}` is not a count")))
}

fn parse_f64_list(key: &str, v: &str) -> Result<Vec<f64>> {
    let mut out = Vec::new();
    for item in v.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let parts: Vec<&str> = item.split(':').collect();
        match parts.as_slice() {
            [x] => out.push(parse_f64(key, x)?),
            [a, s, b] => {
                let (a, s, b) = (parse_f64(key, a)?, parse_f64(key, s)?, parse_f64(key, b)?);
                if s == 0.0 || (b - a) / s < 0.0 {
                    return cfg_err(format!("`{key}`: bad range `{item}`"));
                }
                let n = ((b - a) / s + 1e-9).floor() as usize;
                out.extend((0..=n).map(|i| a + i as f64 * s));
            }
            _ => return cfg_err(format!("`{key}`: cannot parse `{item}`")),
        }
    }
    if out.is_empty() {
        return cfg_err(format!("`{key}`: empty list"));
    }
    Ok(out)
}

fn parse_gain(key: &str, s: &str) -> Result<C64> {
    let (mag, phase) = match s.split_once('@') {
        Some((m, p)) => (parse_f64(key, m)?, parse_f64(key, p)?),
        None => (parse_f64(key, s)?, 0.0),
    };
    if mag < 0.0 {
        return cfg_err(format!("`{key}`: negative magnitude in `{s}`"));
    }
    Ok(C64::from_polar(mag, phase.to_radians()))
}

/// Inverse of the gain parser.
pub fn format_gain(g: C64) -> String {
    format!("{}@{}", g.norm(), g.arg().to_degrees())
}

pub fn format_list<T: std::fmt::Display>(items: &[T]) -> String {
    items
        .iter()
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .join(", ")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_comments_lists_and_ranges() {
        let doc = KvDoc::parse(
            "# header\n\
             snr_db = -4:2:2   # trailing\n\
             m = 16, 32\n\
             gain = 2@90\n",
        )
        .unwrap();
        assert_eq!(doc.f64_list("snr_db").unwrap().unwrap(), vec![-4.0, -2.0, 0.0, 2.0]);
        assert_eq!(doc.usize_list("m").unwrap().unwrap(), vec![16, 32]);
        let g = doc.gain_or("gain", C64::new(0.0, 0.0)).unwrap();
        assert!((g - C64::new(0.0, 2.0)).norm() < 1e-12);
    }

    #[test]
    fn rejects_malformed() {
        assert!(KvDoc::parse("novalue").is_err());
        assert!(KvDoc::parse("a = 1\na = 2").is_err());
        let doc = KvDoc::parse("x = abc\ny = 1.5").unwrap();
        assert!(doc.f64_req("x").is_err());
        assert!(doc.usize_req("y").is_err());
        assert!(doc.reject_unknown(&["x"]).is_err());
        assert!(doc.f64_req("missing").is_err());
    }

    #[test]
    fn text_round_trip_keeps_order() {
        let mut doc = KvDoc::new();
        doc.set("b", "1");
        doc.set("a", "2");
        let back = KvDoc::parse(&doc.to_text()).unwrap();
        assert_eq!(back.keys().collect::<Vec<_>>(), vec!["b", "a"]);
    }
}
