/// Significant digits of every printed number.
pub const DIGITS: usize = 12;

/// Formats `v` with [`DIGITS`] significant digits, `%g` style: fixed
/// notation for moderate exponents, scientific otherwise, trailing zeros
/// removed. Independent of locale.
pub fn sig(v: f64) -> String {
    if v == 0.0 {
        return "0".to_string();
    }
    if !v.is_finite() {
        return v.to_string();
    }
    // round first so that the exponent reflects the rounded value
    let sci = format!("{:.*e}", DIGITS - 1, v);
    let (mantissa, exp) = sci.split_once('e').expect("scientific format has an exponent");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..DIGITS as i32).contains(&exp) {
        let decimals = (DIGITS as i32 - 1 - exp).max(0) as usize;
        trim(&format!("{:.*}", decimals, v))
    } else {
        format!("{}e{}", trim(mantissa), exp)
    }
}

fn trim(s: &str) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s.to_string()
    }
}

/// `v` rounded to [`DIGITS`] significant digits, for JSON output.
pub fn round(v: f64) -> f64 {
    if v == 0.0 || !v.is_finite() {
        return v;
    }
    format!("{:.*e}", DIGITS - 1, v).parse().expect("round trip of a formatted float")
}
