//! Stable number formatting for tables.

/// `x` rounded to `digits` significant digits, trailing zeros removed.
pub fn sig(x: f64, digits: usize) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let mag = x.abs().log10().floor() as i32;
    let decimals = digits as i32 - 1 - mag;
    if (0..=17).contains(&decimals) {
        let s = format!("{:.*}", decimals as usize, x);
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s
        }
    } else if decimals < 0 && mag < 17 {
        let p = 10f64.powi(-decimals);
        format!("{}", (x / p).round() * p)
    } else {
        let s = format!("{:.*e}", digits - 1, x);
        let (mantissa, exp) = s.split_once('e').expect("exponent");
        let mantissa = if mantissa.contains('.') { mantissa.trim_end_matches('0').trim_end_matches('.') } else { mantissa };
        format!("{mantissa}e{exp}")
    }
}

#[cfg(test)]
mod tests {
    use super::sig;

    #[test]
    fn significant_digits() {
        assert_eq!(sig(0.180908203125, 9), "0.180908203");
        assert_eq!(sig(0.5, 9), "0.5");
        assert_eq!(sig(2.8125, 9), "2.8125");
        assert_eq!(sig(123456789012.0, 9), "123456789000");
        assert_eq!(sig(1.5e-30, 3), "1.5e-30");
        assert_eq!(sig(1e-12, 9), "1e-12");
        assert_eq!(sig(-0.001234567891, 9), "-0.00123456789");
    }
}
