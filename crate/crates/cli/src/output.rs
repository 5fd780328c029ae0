//! JSON and CSV emission with a fixed number of significant digits.

use serde::Serialize;
use serde_json::{Map, Value};

pub const SIGNIFICANT_DIGITS: usize = 12;

pub fn round_sig(v: f64) -> f64 {
    if v == 0.0 {
        return 0.0;
    }
    if !v.is_finite() {
        return v;
    }
    format!("{:.*e}", SIGNIFICANT_DIGITS - 1, v).parse().unwrap()
}

pub fn fmt_num(v: f64) -> String {
    if v.is_finite() {
        round_sig(v).to_string()
    } else if v.is_nan() {
        "nan".into()
    } else if v > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

/// Rounds every float. Non-finite floats are already `null` at this point.
fn normalize(v: Value) -> Value {
    match v {
        Value::Number(n) if n.is_f64() => {
            serde_json::Number::from_f64(round_sig(n.as_f64().unwrap())).map_or(Value::Null, Value::Number)
        }
        Value::Array(a) => Value::Array(a.into_iter().map(normalize).collect()),
        Value::Object(o) => Value::Object(o.into_iter().map(|(k, v)| (k, normalize(v))).collect::<Map<_, _>>()),
        other => other,
    }
}

pub fn to_value<T: Serialize>(t: &T) -> Value {
    normalize(serde_json::to_value(t).expect("report types serialize"))
}

pub fn render(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("values serialize");
    s.push('\n');
    s
}

pub fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rounding_keeps_twelve_digits() {
        assert_eq!(round_sig(1.0 / 3.0), 0.333333333333);
        assert_eq!(round_sig(2.0), 2.0);
        assert_eq!(fmt_num(-0.0), "0");
        assert_eq!(fmt_num(123456.7890123456), "123456.789012");
        assert_eq!(fmt_num(f64::INFINITY), "inf");
        let v = to_value(&vec![1.0 / 7.0, 0.5]);
        assert_eq!(render(&v), "[\n  0.142857142857,\n  0.5\n]\n");
    }
}
