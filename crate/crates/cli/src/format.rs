//! Printing numbers with 12 significant digits.

pub const SIGNIFICANT_DIGITS: usize = 12;

/// Values this small relative to the largest printed magnitude are shown as 0,
/// so that routes differing only by rounding noise print identically.
pub const SNAP_RELATIVE: f64 = 1e-12;

/// `%.12g`-style rendering: shortest of fixed and scientific, trailing zeros
/// removed, negative zero printed as `0`.
pub fn format_number(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let p = SIGNIFICANT_DIGITS;
    let sci = format!("{:.*e}", p - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("scientific format has an exponent");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -4 || exp >= p as i32 {
        let mantissa = trim_fraction(mantissa);
        let sign = if exp < 0 { "-" } else { "+" };
        format!("{mantissa}e{sign}{:02}", exp.abs())
    } else {
        let decimals = (p as i32 - 1 - exp) as usize;
        trim_fraction(&format!("{x:.decimals$}")).to_string()
    }
}

fn trim_fraction(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// Zeroes entries that are negligible against the largest entry (or 1).
pub fn snap(values: &[f64]) -> Vec<f64> {
    let scale = values.iter().fold(1.0f64, |m, x| m.max(x.abs()));
    values
        .iter()
        .map(|&x| if x.abs() <= SNAP_RELATIVE * scale { 0.0 } else { x })
        .collect()
}

/// [`snap`] followed by [`format_number`].
pub fn format_values(values: &[f64]) -> Vec<String> {
    snap(values).into_iter().map(format_number).collect()
}
