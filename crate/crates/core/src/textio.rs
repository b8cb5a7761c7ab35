//! Helpers for the line-oriented text formats (PCA blocks, weights files).

use crate::error::{Error, Result};

/// 17 significant digits, enough to round-trip any `f64`.
pub fn fmt_real(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn fmt_row(values: &[f64]) -> String {
    values
        .iter()
        .map(|&v| fmt_real(v))
        .collect::<Vec<_>>()
        .join(" ")
}

/// Cursor over the non-blank lines of a text document.
pub struct Lines<'a> {
    inner: std::iter::Peekable<std::iter::Enumerate<std::str::Lines<'a>>>,
}

impl<'a> Lines<'a> {
    pub fn new(text: &'a str) -> Self {
        Self {
            inner: text.lines().enumerate().peekable(),
        }
    }

    fn skip_blank(&mut self) {
        while self.inner.peek().is_some_and(|(_, l)| l.trim().is_empty()) {
            self.inner.next();
        }
    }

    /// Next non-blank line, trimmed. `what` names the expected content for
    /// the truncation message.
    pub fn next_line(&mut self, what: &str) -> Result<(usize, &'a str)> {
        self.skip_blank();
        self.inner
            .next()
            .map(|(i, l)| (i + 1, l.trim()))
            .ok_or_else(|| Error::format(format!("truncated: expected {what}")))
    }

    pub fn peek_line(&mut self) -> Option<&'a str> {
        self.skip_blank();
        self.inner.peek().map(|(_, l)| l.trim())
    }

    /// Next line split into a keyword and its remaining fields. Fails unless
    /// the keyword matches.
    pub fn expect_keyword(&mut self, keyword: &str) -> Result<(usize, Vec<&'a str>)> {
        let (n, line) = self.next_line(keyword)?;
        let mut fields = line.split_whitespace();
        match fields.next() {
            Some(k) if k == keyword => Ok((n, fields.collect())),
            _ => Err(Error::format(format!(
                "line {n}: expected {keyword}, found {line:?}"
            ))),
        }
    }

    /// Next line parsed as exactly `count` finite reals.
    pub fn reals(&mut self, count: usize, what: &str) -> Result<Vec<f64>> {
        let (n, line) = self.next_line(what)?;
        parse_reals(line, count).map_err(|m| Error::format(format!("line {n}: {what}: {m}")))
    }
}

pub fn parse_reals(line: &str, count: usize) -> std::result::Result<Vec<f64>, String> {
    let values = line
        .split_whitespace()
        .map(|t| {
            t.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| format!("not a finite number: {t:?}"))
        })
        .collect::<std::result::Result<Vec<f64>, String>>()?;
    if values.len() != count {
        return Err(format!("expected {count} values, found {}", values.len()));
    }
    Ok(values)
}

pub fn parse_count(field: Option<&&str>, what: &str, line: usize) -> Result<usize> {
    field
        .and_then(|f| f.parse().ok())
        .ok_or_else(|| Error::format(format!("line {line}: bad or missing {what}")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reals_round_trip_exactly() {
        for x in [
            0.1,
            -1.0 / 3.0,
            1e-300,
            6.02214076e23,
            f64::MIN_POSITIVE,
            0.0,
        ] {
            assert_eq!(fmt_real(x).parse::<f64>().unwrap(), x);
        }
    }

    #[test]
    fn row_parsing_checks_count_and_finiteness() {
        assert_eq!(parse_reals("1 2.5 -3", 3).unwrap(), vec![1.0, 2.5, -3.0]);
        assert!(parse_reals("1 2", 3).is_err());
        assert!(parse_reals("1 NaN 2", 3).is_err());
        assert!(parse_reals("1 x 2", 3).is_err());
    }
}
