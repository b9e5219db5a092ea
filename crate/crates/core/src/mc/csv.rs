/// `%g`-style rendering with 6 significant digits.
pub fn format_sig(x: f64) -> String {
    const DIGITS: i32 = 6;
    if x == 0.0 || !x.is_finite() {
        return if x.is_nan() { "nan".into() } else if x == 0.0 { "0".into() } else { format!("{x}") };
    }
    let exp = x.abs().log10().floor() as i32;
    let rounded: f64 = format!("{:.*e}", (DIGITS - 1) as usize, x).parse().unwrap();
    let exp = if rounded.abs() >= 10f64.powi(exp + 1) { exp + 1 } else { exp };
    if !(-5..DIGITS).contains(&exp) {
        let s = format!("{:.*e}", (DIGITS - 1) as usize, x);
        let (mantissa, e) = s.split_once('e').unwrap();
        return format!("{}e{}", trim_zeros(mantissa), e);
    }
    let decimals = (DIGITS - 1 - exp).max(0) as usize;
    trim_zeros(&format!("{x:.decimals$}")).to_string()
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}
