/// Formats `v` with `digits` significant digits, switching to exponent
/// notation for very small or large magnitudes, like C's `%g`.
pub fn sig(v: f64, digits: usize) -> String {
    if v == 0.0 || !v.is_finite() {
        return format!("{v}");
    }
    let digits = digits.max(1);
    let sci = format!("{:.*e}", digits - 1, v);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -4 || exp >= digits as i32 {
        format!("{}e{exp}", trim_zeros(mantissa))
    } else {
        let decimals = (digits as i32 - 1 - exp).max(0) as usize;
        trim_zeros(&format!("{v:.decimals$}")).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

#[cfg(test)]
mod tests {
    use super::sig;

    #[test]
    fn significant_digits() {
        assert_eq!(sig(0.99, 6), "0.99");
        assert_eq!(sig(2.7600000001, 6), "2.76");
        assert_eq!(sig(1.0 / 3.0, 6), "0.333333");
        assert_eq!(sig(5.0, 6), "5");
        assert_eq!(sig(6.0508e-9, 6), "6.0508e-9");
        assert_eq!(sig(0.000123456789, 6), "0.000123457");
        assert_eq!(sig(1234567.0, 6), "1.23457e6");
        assert_eq!(sig(999999.5, 6), "1e6");
        assert_eq!(sig(0.0, 6), "0");
    }
}
