//! Line-based sectioned key-value text, shared by material files and run configs.
//!
//! ```text
//! # comment
//! name = congruent LN
//! lambda_min_nm = 400
//!
//! [ordinary]
//! form = sellmeier_um
//! coefficients = 1.0, 2.6734, 0.01764
//! ```
//!
//! Keys before the first `[section]` header belong to the top-level section
//! (named `""`). Blank lines and lines starting with `#` are ignored, and a
//! `#` after a value starts a trailing comment. A key may appear once per
//! section, except keys listed as repeatable by the caller whose values are
//! concatenated with `,`.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum KvError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("line {line}: key `{key}` in section [{section}]: {message}")]
    Value {
        line: usize,
        section: String,
        key: String,
        message: String,
    },
    #[error("missing key `{key}` in section [{section}]")]
    Missing { section: String, key: String },
    #[error("missing section [{0}]")]
    MissingSection(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Entry {
    pub value: String,
    pub line: usize,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Section {
    pub name: String,
    pub line: usize,
    entries: BTreeMap<String, Entry>,
}

impl Section {
    pub fn get(&self, key: &str) -> Option<&Entry> {
        self.entries.get(key)
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }

    pub fn contains(&self, key: &str) -> bool {
        self.entries.contains_key(key)
    }

    pub fn require(&self, key: &str) -> Result<&Entry, KvError> {
        self.get(key).ok_or_else(|| KvError::Missing {
            section: self.name.clone(),
            key: key.to_string(),
        })
    }

    pub fn value_error(&self, key: &str, message: impl Into<String>) -> KvError {
        KvError::Value {
            line: self.get(key).map_or(self.line, |e| e.line),
            section: self.name.clone(),
            key: key.to_string(),
            message: message.into(),
        }
    }

    pub fn str(&self, key: &str) -> Result<&str, KvError> {
        self.require(key).map(|e| e.value.as_str())
    }

    pub fn parse<T>(&self, key: &str) -> Result<T, KvError>
    where
        T: FromStr,
        T::Err: fmt::Display,
    {
        let entry = self.require(key)?;
        entry
            .value
            .parse()
            .map_err(|e: T::Err| self.value_error(key, e.to_string()))
    }

    pub fn parse_or<T>(&self, key: &str, default: T) -> Result<T, KvError>
    where
        T: FromStr,
        T::Err: fmt::Display,
    {
        if self.contains(key) {
            self.parse(key)
        } else {
            Ok(default)
        }
    }

    pub fn parse_opt<T>(&self, key: &str) -> Result<Option<T>, KvError>
    where
        T: FromStr,
        T::Err: fmt::Display,
    {
        if self.contains(key) {
            self.parse(key).map(Some)
        } else {
            Ok(None)
        }
    }

    /// Comma-separated list of reals.
    pub fn f64_list(&self, key: &str) -> Result<Vec<f64>, KvError> {
        let entry = self.require(key)?;
        split_list(&entry.value)
            .map(|item| {
                item.parse::<f64>()
                    .map_err(|e| self.value_error(key, format!("`{item}`: {e}")))
            })
            .collect()
    }

    /// Comma-separated `a:b` pairs of reals.
    pub fn f64_pairs(&self, key: &str) -> Result<Vec<(f64, f64)>, KvError> {
        let entry = self.require(key)?;
        split_list(&entry.value)
            .map(|item| {
                let (a, b) = item
                    .split_once(':')
                    .ok_or_else(|| self.value_error(key, format!("`{item}` is not an x:y pair")))?;
                let parse = |s: &str| {
                    s.trim()
                        .parse::<f64>()
                        .map_err(|e| self.value_error(key, format!("`{item}`: {e}")))
                };
                Ok((parse(a)?, parse(b)?))
            })
            .collect()
    }
}

fn split_list(value: &str) -> impl Iterator<Item = &str> {
    value.split(',').map(str::trim).filter(|s| !s.is_empty())
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct KvDocument {
    sections: Vec<Section>,
}

impl KvDocument {
    pub fn parse(text: &str) -> Result<Self, KvError> {
        Self::parse_with_repeatable(text, &[])
    }

    pub fn parse_with_repeatable(text: &str, repeatable: &[&str]) -> Result<Self, KvError> {
        let mut sections = vec![Section {
            name: String::new(),
            line: 0,
            entries: BTreeMap::new(),
        }];
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = match raw.find('#') {
                Some(pos) => &raw[..pos],
                None => raw,
            }
            .trim();
            if content.is_empty() {
                continue;
            }
            if let Some(rest) = content.strip_prefix('[') {
                let name = rest.strip_suffix(']').ok_or_else(|| KvError::Syntax {
                    line,
                    message: format!("unterminated section header `{content}`"),
                })?;
                let name = name.trim();
                if name.is_empty() || !name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
                    return Err(KvError::Syntax {
                        line,
                        message: format!("invalid section name `{name}`"),
                    });
                }
                if sections.iter().any(|s| s.name == name) {
                    return Err(KvError::Syntax {
                        line,
                        message: format!("duplicate section [{name}]"),
                    });
                }
                sections.push(Section {
                    name: name.to_string(),
                    line,
                    entries: BTreeMap::new(),
                });
                continue;
            }
            let (key, value) = content.split_once('=').ok_or_else(|| KvError::Syntax {
                line,
                message: format!("expected `key = value`, found `{content}`"),
            })?;
            let key = key.trim();
            let value = value.trim();
            if key.is_empty() || !key.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
                return Err(KvError::Syntax {
                    line,
                    message: format!("invalid key `{key}`"),
                });
            }
            let section = sections.last_mut().expect("top-level section");
            match section.entries.get_mut(key) {
                Some(existing) if repeatable.contains(&key) => {
                    existing.value.push(',');
                    existing.value.push_str(value);
                }
                Some(existing) => {
                    return Err(KvError::Syntax {
                        line,
                        message: format!(
                            "duplicate key `{key}` (first set on line {})",
                            existing.line
                        ),
                    });
                }
                None => {
                    section.entries.insert(
                        key.to_string(),
                        Entry {
                            value: value.to_string(),
                            line,
                        },
                    );
                }
            }
        }
        Ok(Self { sections })
    }

    pub fn top(&self) -> &Section {
        &self.sections[0]
    }

    pub fn section(&self, name: &str) -> Option<&Section> {
        self.sections.iter().find(|s| s.name == name)
    }

    pub fn require_section(&self, name: &str) -> Result<&Section, KvError> {
        self.section(name)
            .ok_or_else(|| KvError::MissingSection(name.to_string()))
    }

    pub fn sections(&self) -> impl Iterator<Item = &Section> {
        self.sections.iter()
    }
}
