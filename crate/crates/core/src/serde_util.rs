//! Serde helpers for f64 fields that can legitimately be non-finite
//! (degenerate t statistics, below-everything thresholds). JSON has no
//! representation for infinities, so they are tagged as strings and mapped
//! back on deserialization; reports round-trip exactly.

use serde::{Deserialize, Deserializer, Serializer};

#[derive(serde::Serialize, serde::Deserialize)]
#[serde(untagged)]
enum Repr {
    Finite(f64),
    Tagged(String),
}

fn encode(v: f64) -> Repr {
    if v.is_finite() {
        Repr::Finite(v)
    } else if v.is_nan() {
        Repr::Tagged("nan".into())
    } else if v > 0.0 {
        Repr::Tagged("inf".into())
    } else {
        Repr::Tagged("-inf".into())
    }
}

fn decode<E: serde::de::Error>(repr: Repr) -> Result<f64, E> {
    match repr {
        Repr::Finite(v) => Ok(v),
        Repr::Tagged(s) => match s.as_str() {
            "inf" => Ok(f64::INFINITY),
            "-inf" => Ok(f64::NEG_INFINITY),
            "nan" => Ok(f64::NAN),
            other => Err(E::custom(format!(
                "expected a number or inf/-inf/nan, got `{other}`"
            ))),
        },
    }
}

pub mod maybe_nonfinite {
    use super::*;

    pub fn serialize<S: Serializer>(v: &f64, serializer: S) -> Result<S::Ok, S::Error> {
        serde::Serialize::serialize(&encode(*v), serializer)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(deserializer: D) -> Result<f64, D::Error> {
        decode(Repr::deserialize(deserializer)?)
    }
}

pub mod opt_maybe_nonfinite {
    use super::*;

    pub fn serialize<S: Serializer>(v: &Option<f64>, serializer: S) -> Result<S::Ok, S::Error> {
        serde::Serialize::serialize(&v.map(encode), serializer)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(
        deserializer: D,
    ) -> Result<Option<f64>, D::Error> {
        Option::<Repr>::deserialize(deserializer)?.map(decode).transpose()
    }
}

#[cfg(test)]
mod tests {
    use serde::{Deserialize, Serialize};

    #[derive(Debug, PartialEq, Serialize, Deserialize)]
    struct Holder {
        #[serde(with = "super::maybe_nonfinite")]
        plain: f64,
        #[serde(with = "super::opt_maybe_nonfinite")]
        optional: Option<f64>,
    }

    #[test]
    fn round_trips_including_infinities() {
        for (plain, optional) in [
            (1.5, Some(2.5)),
            (f64::INFINITY, Some(f64::NEG_INFINITY)),
            (-0.0, None),
        ] {
            let h = Holder { plain, optional };
            let json = serde_json::to_string(&h).unwrap();
            let back: Holder = serde_json::from_str(&json).unwrap();
            assert_eq!(h, back);
        }
    }
}
