//! Presentation helpers for run reports.

use std::time::Duration;

/// Base-10 scientific notation with 12 significant digits from a natural-log
/// value, safe far beyond f64 range (partition functions get astronomically
/// large).
pub fn sci_from_ln(ln: f64) -> String {
    if ln == f64::NEG_INFINITY {
        return "0".to_string();
    }
    if ln.is_nan() {
        return "nan".to_string();
    }
    let log10 = ln / std::f64::consts::LN_10;
    let mut exponent = log10.floor() as i64;
    let mut mantissa = 10f64.powf(log10 - exponent as f64);
    // rounding to 11 decimals may carry the mantissa up to 10
    if mantissa >= 10.0 - 5e-12 {
        mantissa /= 10.0;
        exponent += 1;
    }
    format!("{mantissa:.11}e{exponent:+}")
}

pub fn format_ms(elapsed: Duration) -> String {
    format!("{} ms", elapsed.as_millis())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sci_matches_known_values() {
        assert_eq!(sci_from_ln(650.0_f64.ln()), "6.50000000000e+2");
        assert_eq!(sci_from_ln(0.0), "1.00000000000e+0");
        assert_eq!(sci_from_ln(f64::NEG_INFINITY), "0");
        // 26^100: log10 = 100*log10(26) = 141.497334...
        let ln = 100.0 * 26.0_f64.ln();
        let s = sci_from_ln(ln);
        assert!(s.ends_with("e+141"), "{s}");
    }

    #[test]
    fn sci_handles_mantissa_carry() {
        // ln(0.9999999999999 * 10^5): mantissa rounds up to 10.0
        let ln = (10.0_f64.powi(5) * 0.99999999999999).ln();
        let s = sci_from_ln(ln);
        assert_eq!(s, "1.00000000000e+5");
    }
}
