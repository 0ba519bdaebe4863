use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A single hyperparameter value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ParamValue {
    Int(i64),
    Float(f64),
    List(Vec<i64>),
    Text(String),
}

impl fmt::Display for ParamValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParamValue::Int(v) => write!(f, "{v}"),
            ParamValue::Float(v) => write!(f, "{v}"),
            ParamValue::Text(v) => f.write_str(v),
            ParamValue::List(v) => {
                for (i, x) in v.iter().enumerate() {
                    if i > 0 {
                        f.write_str(",")?;
                    }
                    write!(f, "{x}")?;
                }
                Ok(())
            }
        }
    }
}

impl ParamValue {
    /// Best-effort parse of a textual value: integer, float, integer list,
    /// otherwise text.
    pub fn parse(s: &str) -> Self {
        let s = s.trim();
        if let Ok(v) = s.parse::<i64>() {
            return ParamValue::Int(v);
        }
        if let Ok(v) = s.parse::<f64>() {
            return ParamValue::Float(v);
        }
        if s.contains(',') {
            let parsed: core::result::Result<Vec<i64>, _> =
                s.split(',').map(|p| p.trim().parse::<i64>()).collect();
            if let Ok(list) = parsed {
                return ParamValue::List(list);
            }
        }
        ParamValue::Text(s.to_string())
    }
}

pub type Hyperparams = BTreeMap<String, ParamValue>;

/// Consumes keys from a hyperparameter map, rejecting leftovers on
/// [`Schema::finish`].
pub(crate) struct Schema<'a> {
    family: &'static str,
    params: &'a Hyperparams,
    seen: Vec<&'static str>,
}

impl<'a> Schema<'a> {
    pub fn new(family: &'static str, params: &'a Hyperparams) -> Self {
        Self {
            family,
            params,
            seen: Vec::new(),
        }
    }

    fn invalid(&self, key: &str, want: &str, got: &ParamValue) -> Error {
        Error::InvalidParameter(format!(
            "{}: `{key}` must be {want}, got `{got}`",
            self.family
        ))
    }

    pub fn usize_min(&mut self, key: &'static str, default: usize, min: usize) -> Result<usize> {
        self.seen.push(key);
        match self.params.get(key) {
            None => Ok(default),
            Some(ParamValue::Int(v)) if *v >= min as i64 => Ok(*v as usize),
            Some(v) => Err(self.invalid(key, &format!("an integer >= {min}"), v)),
        }
    }

    /// Integer or the text `none`.
    pub fn opt_usize(&mut self, key: &'static str, default: Option<usize>) -> Result<Option<usize>> {
        self.seen.push(key);
        match self.params.get(key) {
            None => Ok(default),
            Some(ParamValue::Int(v)) if *v >= 1 => Ok(Some(*v as usize)),
            Some(ParamValue::Text(t)) if t.eq_ignore_ascii_case("none") => Ok(None),
            Some(v) => Err(self.invalid(key, "a positive integer or `none`", v)),
        }
    }

    pub fn f64_in(
        &mut self,
        key: &'static str,
        default: f64,
        check: impl Fn(f64) -> bool,
        want: &str,
    ) -> Result<f64> {
        self.seen.push(key);
        let v = match self.params.get(key) {
            None => return Ok(default),
            Some(ParamValue::Float(v)) => *v,
            Some(ParamValue::Int(v)) => *v as f64,
            Some(v) => return Err(self.invalid(key, want, v)),
        };
        if v.is_finite() && check(v) {
            Ok(v)
        } else {
            Err(self.invalid(key, want, &ParamValue::Float(v)))
        }
    }

    pub fn text(&mut self, key: &'static str, default: &str, allowed: &[&str]) -> Result<String> {
        self.seen.push(key);
        match self.params.get(key) {
            None => Ok(default.to_string()),
            Some(ParamValue::Text(t)) if allowed.iter().any(|a| a.eq_ignore_ascii_case(t)) => {
                Ok(t.to_ascii_lowercase())
            }
            Some(v) => Err(self.invalid(key, &format!("one of {allowed:?}"), v)),
        }
    }

    pub fn usize_list(&mut self, key: &'static str, default: &[usize]) -> Result<Vec<usize>> {
        self.seen.push(key);
        match self.params.get(key) {
            None => Ok(default.to_vec()),
            Some(ParamValue::Int(v)) if *v >= 1 => Ok(alloc::vec![*v as usize]),
            Some(ParamValue::List(v)) if !v.is_empty() && v.iter().all(|x| *x >= 1) => {
                Ok(v.iter().map(|x| *x as usize).collect())
            }
            Some(v) => Err(self.invalid(key, "a non-empty list of positive integers", v)),
        }
    }

    pub fn finish(self) -> Result<()> {
        for key in self.params.keys() {
            if !self.seen.contains(&key.as_str()) {
                return Err(Error::InvalidParameter(format!(
                    "{}: unknown hyperparameter `{key}`",
                    self.family
                )));
            }
        }
        Ok(())
    }
}
