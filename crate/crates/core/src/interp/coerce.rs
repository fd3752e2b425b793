//! Comparison semantics across value types.
//!
//! | lhs \ rhs | Int/Float | Str                  | Bool             | None  |
//! |-----------|-----------|----------------------|------------------|-------|
//! | Int/Float | numeric   | parse rhs if numeric | unequal          | unequal |
//! | Str       |           | text equality        | exact True/False | unequal |
//! | Bool      |           |                      | equality         | unequal |
//! | None      |           |                      |                  | equal |
//!
//! `<` and `>` need both sides numeric (numeric strings count).

use crate::lang::{Comparator, Value};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("cannot order {lhs} and {rhs}")]
pub struct TypeMismatch {
    pub lhs: &'static str,
    pub rhs: &'static str,
}

fn numeric_str(s: &str) -> Option<f64> {
    s.trim().parse::<f64>().ok().filter(|v| v.is_finite())
}

fn as_number(v: &Value) -> Option<f64> {
    match v {
        Value::Int(_) | Value::Float(_) => v.as_f64(),
        Value::Str(s) => numeric_str(s),
        _ => None,
    }
}

fn str_bool(s: &str, b: bool) -> bool {
    match s {
        "True" => b,
        "False" => !b,
        _ => false,
    }
}

pub fn values_equal(a: &Value, b: &Value) -> bool {
    use Value::*;
    match (a, b) {
        (Int(_) | Float(_), Int(_) | Float(_)) => a.as_f64() == b.as_f64(),
        (Str(s), Int(_) | Float(_)) | (Int(_) | Float(_), Str(s)) => {
            let n = a.as_f64().or(b.as_f64());
            numeric_str(s).is_some_and(|v| Some(v) == n)
        }
        (Str(x), Str(y)) => x == y,
        (Str(s), Bool(v)) | (Bool(v), Str(s)) => str_bool(s, *v),
        (Bool(x), Bool(y)) => x == y,
        (None, None) => true,
        _ => false,
    }
}

pub fn compare(a: &Value, op: Comparator, b: &Value) -> Result<bool, TypeMismatch> {
    match op {
        Comparator::Eq => Ok(values_equal(a, b)),
        Comparator::Ne => Ok(!values_equal(a, b)),
        Comparator::Gt | Comparator::Lt => match (as_number(a), as_number(b)) {
            (Some(x), Some(y)) => Ok(if op == Comparator::Gt { x > y } else { x < y }),
            _ => Err(TypeMismatch {
                lhs: a.type_name(),
                rhs: b.type_name(),
            }),
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn samples() -> Vec<Value> {
        vec![
            Value::Int(0),
            Value::Int(1),
            Value::Float(1.0),
            Value::Float(0.5),
            Value::Str("1".into()),
            Value::Str("0.5".into()),
            Value::Str("True".into()),
            Value::Str("False".into()),
            Value::Str("apple_1".into()),
            Value::Str("".into()),
            Value::Bool(true),
            Value::Bool(false),
            Value::None,
        ]
    }

    #[test]
    fn table_is_symmetric_and_reflexive() {
        for a in samples() {
            assert!(values_equal(&a, &a), "{a:?}");
            for b in samples() {
                assert_eq!(values_equal(&a, &b), values_equal(&b, &a), "{a:?} {b:?}");
                assert_eq!(
                    compare(&a, Comparator::Ne, &b).unwrap(),
                    !compare(&a, Comparator::Eq, &b).unwrap()
                );
            }
        }
    }

    #[test]
    fn specific_rows() {
        assert!(values_equal(&Value::Int(1), &Value::Float(1.0)));
        assert!(values_equal(&Value::Str("False".into()), &Value::Bool(false)));
        assert!(!values_equal(&Value::Str("false".into()), &Value::Bool(false)));
        assert!(!values_equal(&Value::Str("apple_1".into()), &Value::Bool(false)));
        assert!(values_equal(&Value::Str("0.5".into()), &Value::Float(0.5)));
        assert!(!values_equal(&Value::Bool(true), &Value::Int(1)));
        assert!(!values_equal(&Value::None, &Value::Bool(false)));
    }

    #[test]
    fn ordering() {
        assert!(compare(&Value::Float(0.5), Comparator::Lt, &Value::Float(0.6)).unwrap());
        assert!(compare(&Value::Int(2), Comparator::Gt, &Value::Float(1.5)).unwrap());
        assert!(compare(&Value::Str("x".into()), Comparator::Gt, &Value::Int(1)).is_err());
        assert!(compare(&Value::Bool(true), Comparator::Lt, &Value::Int(1)).is_err());
    }
}
