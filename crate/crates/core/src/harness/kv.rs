//! Flat `key = value` text format shared by experiment and mixture specs.
//!
//! Blank lines and lines starting with `#` are ignored. Keys may repeat; the caller
//! decides what repetition means.

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Entry {
    pub line: usize,
    pub key: String,
    pub value: String,
}

impl Entry {
    pub fn error(&self, message: impl Into<String>) -> Error {
        Error::SpecFormat {
            line: self.line,
            message: message.into(),
        }
    }

    pub fn parse<T: std::str::FromStr>(&self) -> Result<T> {
        self.value
            .parse()
            .map_err(|_| self.error(format!("cannot parse `{}` for key `{}`", self.value, self.key)))
    }

    pub fn parse_list<T: std::str::FromStr>(&self) -> Result<Vec<T>> {
        self.value
            .split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(|s| {
                s.parse()
                    .map_err(|_| self.error(format!("cannot parse list item `{s}` for key `{}`", self.key)))
            })
            .collect()
    }
}

pub(crate) fn parse(text: &str) -> Result<Vec<Entry>> {
    let mut entries = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| Error::SpecFormat {
            line: i + 1,
            message: format!("expected `key = value`, got `{line}`"),
        })?;
        entries.push(Entry {
            line: i + 1,
            key: key.trim().to_string(),
            value: value.trim().to_string(),
        });
    }
    Ok(entries)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_entries_and_skips_comments() {
        let e = parse("# header\n\nk_values = 2, 3,5\nname=demo\n").unwrap();
        assert_eq!(e.len(), 2);
        assert_eq!(e[0].line, 3);
        assert_eq!(e[0].parse_list::<usize>().unwrap(), vec![2, 3, 5]);
        assert_eq!(e[1].value, "demo");
    }

    #[test]
    fn missing_equals_reports_line() {
        match parse("a = 1\noops\n") {
            Err(Error::SpecFormat { line, .. }) => assert_eq!(line, 2),
            other => panic!("{other:?}"),
        }
    }
}
