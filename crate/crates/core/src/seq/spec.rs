//! JSON sequence specifications.
//!
//! ```json
//! {"base": 2, "kind": "product",
//!  "left":  {"kind": "block", "pattern": "11", "alpha": {"num": 1, "den": 2}},
//!  "right": {"kind": "linear", "alpha": {"num": 1, "den": 3}}}
//! ```
//!
//! Children inherit `base` from their parent when they omit it. The named
//! kinds `thue_morse` and `rudin_shapiro` default to base 2 and `one` is the
//! constant sequence 1.

use serde_json::{json, Map, Value};

use super::sequence::DigitalSequence;
use super::table::CoefficientTable;
use crate::digits::Pattern;
use crate::error::{Error, Result};
use crate::phase::{Phase, PhaseJson};

fn spec_err(path: &str, msg: impl std::fmt::Display) -> Error {
    Error::Spec(format!("{path}: {msg}"))
}

/// Parses a JSON sequence spec.
pub fn parse_spec(text: &str) -> Result<DigitalSequence> {
    let value: Value =
        serde_json::from_str(text).map_err(|e| Error::Spec(format!("line {} column {}: {e}", e.line(), e.column())))?;
    from_value(&value)
}

/// Builds a sequence from an already parsed JSON value.
pub fn from_value(value: &Value) -> Result<DigitalSequence> {
    build(value, None, "$")
}

fn object<'a>(v: &'a Value, path: &str) -> Result<&'a Map<String, Value>> {
    v.as_object().ok_or_else(|| spec_err(path, "expected an object"))
}

fn field<'a>(obj: &'a Map<String, Value>, key: &str, path: &str) -> Result<&'a Value> {
    obj.get(key)
        .ok_or_else(|| spec_err(path, format!("missing field {key:?}")))
}

fn uint(obj: &Map<String, Value>, key: &str, path: &str) -> Result<u64> {
    field(obj, key, path)?
        .as_u64()
        .ok_or_else(|| spec_err(&format!("{path}.{key}"), "expected a nonnegative integer"))
}

fn phase(obj: &Map<String, Value>, key: &str, path: &str) -> Result<Phase> {
    let v = field(obj, key, path)?;
    let raw: PhaseJson = serde_json::from_value(v.clone()).map_err(|_| {
        spec_err(
            &format!("{path}.{key}"),
            "expected {\"num\": int, \"den\": int} or a number",
        )
    })?;
    Phase::try_from(raw).map_err(|e| spec_err(&format!("{path}.{key}"), e))
}

fn pattern(obj: &Map<String, Value>, q: u32, path: &str) -> Result<Pattern> {
    let p = format!("{path}.pattern");
    match field(obj, "pattern", path)? {
        Value::String(s) => Pattern::parse(s, q),
        Value::Array(items) => {
            let digits = items
                .iter()
                .map(|d| d.as_u64().and_then(|d| u32::try_from(d).ok()))
                .collect::<Option<Vec<u32>>>()
                .ok_or_else(|| spec_err(&p, "expected digits"))?;
            Pattern::from_msb_digits(q, digits)
        }
        _ => Err(spec_err(&p, "expected a string or a digit array")),
    }
    .map_err(|e| spec_err(&p, e))
}

fn table(obj: &Map<String, Value>, q: u32, path: &str) -> Result<CoefficientTable> {
    let gap = u32::try_from(uint(obj, "gap", path)?).map_err(|_| spec_err(path, "gap too large"))?;
    let strong = match obj.get("strong") {
        None => false,
        Some(v) => v
            .as_bool()
            .ok_or_else(|| spec_err(&format!("{path}.strong"), "expected a bool"))?,
    };
    let mut t = CoefficientTable::new(q, gap, strong).map_err(|e| spec_err(path, e))?;
    let entries = field(obj, "entries", path)?
        .as_array()
        .ok_or_else(|| spec_err(&format!("{path}.entries"), "expected an array"))?;
    for (i, e) in entries.iter().enumerate() {
        let ep = format!("{path}.entries[{i}]");
        let eo = object(e, &ep)?;
        let pos = match eo.get("pos") {
            None => None,
            Some(Value::String(s)) if s == "any" => None,
            Some(v) => Some(
                v.as_u64()
                    .and_then(|p| u32::try_from(p).ok())
                    .ok_or_else(|| spec_err(&format!("{ep}.pos"), "expected an integer or \"any\""))?,
            ),
        };
        let window = field(eo, "window", &ep)?
            .as_array()
            .and_then(|w| {
                w.iter()
                    .map(|d| d.as_u64().and_then(|d| u32::try_from(d).ok()))
                    .collect::<Option<Vec<u32>>>()
            })
            .ok_or_else(|| spec_err(&format!("{ep}.window"), "expected a digit array"))?;
        let ph = phase(eo, "phase", &ep)?;
        t.set(pos, &window, ph).map_err(|e| spec_err(&ep, e))?;
    }
    Ok(t)
}

fn build(v: &Value, inherited: Option<u32>, path: &str) -> Result<DigitalSequence> {
    let obj = object(v, path)?;
    let kind = field(obj, "kind", path)?
        .as_str()
        .ok_or_else(|| spec_err(&format!("{path}.kind"), "expected a string"))?;
    let binary = matches!(kind, "thue_morse" | "rudin_shapiro");
    let q = match obj.get("base") {
        Some(b) => b
            .as_u64()
            .and_then(|b| u32::try_from(b).ok())
            .ok_or_else(|| spec_err(&format!("{path}.base"), "expected an integer"))?,
        None if binary => 2,
        None => inherited.ok_or_else(|| spec_err(path, "missing field \"base\""))?,
    };
    if binary && q != 2 {
        return Err(spec_err(
            &format!("{path}.base"),
            format!("{kind} is defined in base 2, got {q}"),
        ));
    }
    let child =
        |key: &str| -> Result<DigitalSequence> { build(field(obj, key, path)?, Some(q), &format!("{path}.{key}")) };
    let wrap = |r: Result<DigitalSequence>| r.map_err(|e| spec_err(path, e));
    match kind {
        "thue_morse" => Ok(DigitalSequence::thue_morse()),
        "rudin_shapiro" => Ok(DigitalSequence::rudin_shapiro()),
        "one" => wrap(DigitalSequence::one(q)),
        "linear" => wrap(DigitalSequence::linear(q, phase(obj, "alpha", path)?)),
        "digit_sum" => wrap(DigitalSequence::digit_sum(q, phase(obj, "alpha", path)?)),
        "block" => {
            let pat = pattern(obj, q, path)?;
            wrap(DigitalSequence::block(q, pat, phase(obj, "alpha", path)?))
        }
        "table" => wrap(DigitalSequence::from_coefficients(table(obj, q, path)?)),
        "product" => wrap(child("left")?.product(&child("right")?)),
        "conjugate" => Ok(child("of")?.conjugate()),
        "dilate" => Ok(child("of")?.dilate()),
        "subsequence" => {
            let a = uint(obj, "a", path)?;
            let b = match obj.get("b") {
                None => 0,
                Some(_) => uint(obj, "b", path)?,
            };
            wrap(child("of")?.subsequence(a, b))
        }
        other => Err(spec_err(&format!("{path}.kind"), format!("unknown kind {other:?}"))),
    }
}

/// Spec of Thue–Morse as a one-entry strong table.
pub fn thue_morse_spec() -> Value {
    json!({"base": 2, "kind": "table", "gap": 0, "strong": true,
           "entries": [{"pos": "any", "window": [1], "phase": {"num": 1, "den": 2}}]})
}

/// Spec of Rudin–Shapiro as a one-entry strong table.
pub fn rudin_shapiro_spec() -> Value {
    json!({"base": 2, "kind": "table", "gap": 1, "strong": true,
           "entries": [{"pos": "any", "window": [1, 1], "phase": {"num": 1, "den": 2}}]})
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seq::ClassTag;

    #[test]
    fn named_specs_match_builders() {
        let tm = from_value(&thue_morse_spec()).unwrap();
        let rs = from_value(&rudin_shapiro_spec()).unwrap();
        for n in 0..1024 {
            assert_eq!(
                tm.eval_phase(n).unwrap(),
                DigitalSequence::thue_morse().eval_phase(n).unwrap()
            );
            assert_eq!(
                rs.eval_phase(n).unwrap(),
                DigitalSequence::rudin_shapiro().eval_phase(n).unwrap()
            );
        }
    }

    #[test]
    fn named_kinds() {
        let tm = parse_spec(r#"{"kind": "thue_morse"}"#).unwrap();
        assert_eq!(tm.eval_phase(7).unwrap(), Phase::rational(1, 2).unwrap());
        let one = parse_spec(r#"{"kind": "one", "base": 3}"#).unwrap();
        assert!(one.eval_phase(100).unwrap().is_zero());
        assert!(parse_spec(r#"{"kind": "rudin_shapiro", "base": 3}"#).is_err());
        assert!(parse_spec(r#"{"kind": "one"}"#).is_err());
    }

    #[test]
    fn nested_spec_inherits_base() {
        let f = parse_spec(
            r#"{"base": 3, "kind": "subsequence", "a": 2, "b": 1,
                "of": {"kind": "product",
                       "left": {"kind": "digit_sum", "alpha": {"num": 1, "den": 3}},
                       "right": {"kind": "conjugate", "of": {"kind": "block", "pattern": "12", "alpha": 0.25}}}}"#,
        )
        .unwrap();
        assert_eq!(f.base(), 3);
        assert!(!f.is_exact());
        assert!(matches!(f.class(), ClassTag::QM(_)));
    }

    #[test]
    fn errors_carry_location() {
        let e = parse_spec(r#"{"base": 2, "kind": "linear""#).unwrap_err();
        assert!(matches!(&e, Error::Spec(m) if m.contains("line 1")));
        let e = parse_spec(
            r#"{"base": 2, "kind": "product", "left": {"kind": "linear"}, "right": {"kind": "linear", "alpha": 0}}"#,
        )
        .unwrap_err();
        assert!(matches!(&e, Error::Spec(m) if m.contains("$.left")));
        let e = parse_spec(r#"{"kind": "linear", "alpha": 0}"#).unwrap_err();
        assert!(matches!(&e, Error::Spec(m) if m.contains("base")));
        let e = parse_spec(r#"{"base": 2, "kind": "block", "pattern": "00", "alpha": 0}"#).unwrap_err();
        assert!(matches!(&e, Error::Spec(m) if m.contains("pattern")));
        let e = parse_spec(
            r#"{"base": 2, "kind": "table", "gap": 0, "entries": [{"pos": 0, "window": [0], "phase": {"num": 1, "den": 2}}]}"#,
        )
        .unwrap_err();
        assert!(matches!(&e, Error::Spec(m) if m.contains("entries[0]")));
        assert!(parse_spec(r#"{"base": 2, "kind": "nope"}"#).is_err());
    }

    #[test]
    fn positional_table_spec() {
        let f = parse_spec(
            r#"{"base": 2, "kind": "table", "gap": 0, "strong": false,
                "entries": [{"pos": 2, "window": [1], "phase": {"num": 1, "den": 4}}]}"#,
        )
        .unwrap();
        assert_eq!(f.eval_phase(4).unwrap(), Phase::rational(1, 4).unwrap());
        assert_eq!(f.eval_phase(3).unwrap(), Phase::zero());
    }
}
