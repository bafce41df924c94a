//! Locale-independent number formatting for golden-file output.

/// Twelve decimals in the range where that keeps full precision, otherwise
/// scientific notation with twelve significant digits.
pub fn format_value(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let a = x.abs();
    if a == 0.0 {
        // also folds −0 into 0
        return format!("{:.12}", 0.0);
    }
    if (1e-4..1e6).contains(&a) {
        format!("{x:.12}")
    } else {
        format!("{x:.11e}")
    }
}

#[cfg(test)]
mod tests {
    use super::format_value;

    #[test]
    fn formats() {
        assert_eq!(format_value(1.0), "1.000000000000");
        assert_eq!(format_value(-0.0), "0.000000000000");
        assert_eq!(format_value(0.5849625007211562), "0.584962500721");
        assert_eq!(format_value(2.5e-7), "2.50000000000e-7");
        assert_eq!(format_value(f64::INFINITY), "inf");
    }
}
