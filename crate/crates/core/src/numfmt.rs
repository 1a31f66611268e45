//! Round-trip-exact text for floats and complex numbers.

use num_complex::Complex64;

/// Shortest decimal that parses back to the same `f64`. Very small or very
/// large magnitudes use exponent notation.
pub(crate) fn format_f64(x: f64) -> String {
    let x = if x == 0.0 { 0.0 } else { x };
    let a = x.abs();
    if a != 0.0 && !(1e-4..1e16).contains(&a) {
        format!("{x:e}")
    } else {
        format!("{x}")
    }
}

/// `(re±imj)`, e.g. `(0.5+0j)` or `(-1-2.5j)`.
pub(crate) fn format_complex(c: Complex64) -> String {
    let sign = if c.im.is_sign_negative() && c.im != 0.0 {
        '-'
    } else {
        '+'
    };
    format!("({}{}{}j)", format_f64(c.re), sign, format_f64(c.im.abs()))
}

/// Accepts `(a+bj)`, `a+bj`, `bj` and `a`, with optional exponents.
pub(crate) fn parse_complex(text: &str) -> Option<Complex64> {
    let t = text.trim();
    let t = t
        .strip_prefix('(')
        .and_then(|t| t.strip_suffix(')'))
        .unwrap_or(t)
        .trim();
    if t.is_empty() {
        return None;
    }
    let Some(body) = t.strip_suffix('j') else {
        return t.parse().ok().map(|re| Complex64::new(re, 0.0));
    };
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&i| matches!(bytes[i], b'+' | b'-') && !matches!(bytes[i - 1], b'e' | b'E'));
    match split {
        Some(i) => {
            let re: f64 = body[..i].parse().ok()?;
            let im: f64 = body[i..].parse().ok()?;
            Some(Complex64::new(re, im))
        }
        None => body.parse().ok().map(|im| Complex64::new(0.0, im)),
    }
}
