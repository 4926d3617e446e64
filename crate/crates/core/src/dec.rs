//! Serde adapters that write integers as decimal strings.
//!
//! Output is always a JSON string so arbitrary-precision values survive
//! bit-exactly. Input accepts either a string or a plain JSON integer;
//! integers beyond 64 bits must be given as strings.

use std::fmt::{self, Display};
use std::marker::PhantomData;
use std::str::FromStr;

use serde::de::{self, Visitor};
use serde::{Deserializer, Serializer};

pub fn serialize<T: Display, S: Serializer>(value: &T, s: S) -> Result<S::Ok, S::Error> {
    s.collect_str(value)
}

pub fn deserialize<'de, T, D>(d: D) -> Result<T, D::Error>
where
    T: FromStr,
    T::Err: Display,
    D: Deserializer<'de>,
{
    d.deserialize_any(DecVisitor(PhantomData))
}

struct DecVisitor<T>(PhantomData<T>);

impl<T> DecVisitor<T>
where
    T: FromStr,
    T::Err: Display,
{
    fn parse<E: de::Error>(s: &str) -> Result<T, E> {
        if s.is_empty() || !s.trim_start_matches('-').bytes().all(|b| b.is_ascii_digit()) {
            return Err(E::custom(format!("`{s}` is not a decimal integer")));
        }
        s.parse::<T>().map_err(|e| E::custom(format!("`{s}`: {e}")))
    }
}

impl<T> Visitor<'_> for DecVisitor<T>
where
    T: FromStr,
    T::Err: Display,
{
    type Value = T;

    fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("a decimal integer or decimal string")
    }

    fn visit_str<E: de::Error>(self, v: &str) -> Result<T, E> {
        Self::parse(v)
    }

    fn visit_u64<E: de::Error>(self, v: u64) -> Result<T, E> {
        Self::parse(&v.to_string())
    }

    fn visit_i64<E: de::Error>(self, v: i64) -> Result<T, E> {
        Self::parse(&v.to_string())
    }
}

/// The same encoding for optional values; `null` maps to `None`.
pub mod option {
    use super::*;
    use serde::Deserialize;

    pub fn serialize<T: Display, S: Serializer>(value: &Option<T>, s: S) -> Result<S::Ok, S::Error> {
        match value {
            Some(v) => s.collect_str(v),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, T, D>(d: D) -> Result<Option<T>, D::Error>
    where
        T: FromStr,
        T::Err: Display,
        D: Deserializer<'de>,
    {
        #[derive(Deserialize)]
        struct Wrap<T>(#[serde(deserialize_with = "super::deserialize")] T)
        where
            T: FromStr,
            T::Err: Display;

        Ok(Option::<Wrap<T>>::deserialize(d)?.map(|Wrap(v)| v))
    }
}

/// Sequences of decimal-encoded values.
pub mod seq {
    use super::*;
    use serde::ser::SerializeSeq;
    use serde::Deserialize;

    pub fn serialize<T: Display, S: Serializer>(values: &[T], s: S) -> Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(values.len()))?;
        for v in values {
            seq.serialize_element(&v.to_string())?;
        }
        seq.end()
    }

    pub fn deserialize<'de, T, D>(d: D) -> Result<Vec<T>, D::Error>
    where
        T: FromStr,
        T::Err: Display,
        D: Deserializer<'de>,
    {
        #[derive(Deserialize)]
        struct Wrap<T>(#[serde(deserialize_with = "super::deserialize")] T)
        where
            T: FromStr,
            T::Err: Display;

        Ok(Vec::<Wrap<T>>::deserialize(d)?
            .into_iter()
            .map(|Wrap(v)| v)
            .collect())
    }
}

#[cfg(test)]
mod tests {
    use num_bigint::BigUint;
    use serde::{Deserialize, Serialize};

    #[derive(Debug, PartialEq, Serialize, Deserialize)]
    struct Probe {
        #[serde(with = "super")]
        big: BigUint,
        #[serde(with = "super::option")]
        small: Option<u64>,
        #[serde(with = "super")]
        signed: i64,
    }

    #[test]
    fn writes_strings_reads_both() {
        let p: Probe =
            serde_json::from_str(r#"{"big":"123456789012345678901234567890","small":7,"signed":-3}"#)
                .unwrap();
        assert_eq!(p.small, Some(7));
        assert_eq!(p.signed, -3);
        let out = serde_json::to_string(&p).unwrap();
        assert_eq!(
            out,
            r#"{"big":"123456789012345678901234567890","small":"7","signed":"-3"}"#
        );
        let none: Probe = serde_json::from_str(r#"{"big":"1","small":null,"signed":"0"}"#).unwrap();
        assert_eq!(none.small, None);
    }

    #[test]
    fn rejects_non_decimal_text() {
        assert!(serde_json::from_str::<Probe>(r#"{"big":"0x10","small":1,"signed":0}"#).is_err());
        assert!(serde_json::from_str::<Probe>(r#"{"big":"1.5","small":1,"signed":0}"#).is_err());
        assert!(serde_json::from_str::<Probe>(r#"{"big":"-1","small":1,"signed":0}"#).is_err());
    }
}
