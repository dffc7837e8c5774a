//! Numeric parsing of recognized tick-value strings.

/// Parse a tick label. Accepts an optional sign (ASCII or U+2212), plain or
/// exponent notation and comma thousands separators. Returns `None` for
/// anything else, including non-finite results.
pub fn parse_value(text: &str) -> Option<f64> {
    let t: String = text
        .trim()
        .replace('\u{2212}', "-")
        .chars()
        .filter(|&c| c != ',')
        .collect();
    if t.is_empty()
        || !t
            .chars()
            .all(|c| c.is_ascii_digit() || matches!(c, '+' | '-' | '.' | 'e' | 'E'))
    {
        return None;
    }
    // a mantissa needs a digit: rules out ".", "-", "e5"
    let mantissa = t.split(['e', 'E']).next().unwrap_or("");
    if !mantissa.chars().any(|c| c.is_ascii_digit()) {
        return None;
    }
    t.parse::<f64>().ok().filter(|v| v.is_finite())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn accepted_forms() {
        assert_eq!(parse_value("0"), Some(0.0));
        assert_eq!(parse_value("-5000"), Some(-5000.0));
        assert_eq!(parse_value("\u{2212}2.5"), Some(-2.5));
        assert_eq!(parse_value("+7"), Some(7.0));
        assert_eq!(parse_value("1e3"), Some(1000.0));
        assert_eq!(parse_value("2.5E-2"), Some(0.025));
        assert_eq!(parse_value("1,250,000"), Some(1_250_000.0));
        assert_eq!(parse_value(" 0.75 "), Some(0.75));
        assert_eq!(parse_value(".5"), Some(0.5));
    }

    #[test]
    fn rejected_forms() {
        for t in [
            "", "1O", "-", ".", "e5", "1e", "inf", "NaN", "--3", "1-2", "3..1", "1e400", "12a",
        ] {
            assert_eq!(parse_value(t), None, "{t:?}");
        }
    }
}
