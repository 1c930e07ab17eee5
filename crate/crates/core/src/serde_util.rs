//! Serde adapters for arbitrary-precision integers.
//!
//! Integers that fit in an `i64` are written as JSON numbers, larger ones as
//! decimal strings. Both forms are accepted on input.

use num_bigint::BigInt;
use num_traits::ToPrimitive;
use serde::de::{self, Deserializer};
use serde::ser::{SerializeSeq, Serializer};
use serde::Deserialize;

#[derive(Deserialize)]
#[serde(untagged)]
enum Repr {
    Small(i64),
    Big(String),
}

impl Repr {
    fn into_bigint<E: de::Error>(self) -> Result<BigInt, E> {
        match self {
            Repr::Small(v) => Ok(BigInt::from(v)),
            Repr::Big(s) => s.parse().map_err(E::custom),
        }
    }
}

fn ser_one<S: Serializer>(v: &BigInt, s: S) -> Result<S::Ok, S::Error> {
    match v.to_i64() {
        Some(x) => s.serialize_i64(x),
        None => s.serialize_str(&v.to_string()),
    }
}

pub mod bigint {
    use super::*;

    pub fn serialize<S: Serializer>(v: &BigInt, s: S) -> Result<S::Ok, S::Error> {
        ser_one(v, s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigInt, D::Error> {
        Repr::deserialize(d)?.into_bigint()
    }
}

pub mod bigint_vec {
    use super::*;

    struct Item<'a>(&'a BigInt);

    impl serde::Serialize for Item<'_> {
        fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
            ser_one(self.0, s)
        }
    }

    pub fn serialize<S: Serializer>(v: &[BigInt], s: S) -> Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(v.len()))?;
        for x in v {
            seq.serialize_element(&Item(x))?;
        }
        seq.end()
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<BigInt>, D::Error> {
        Vec::<Repr>::deserialize(d)?
            .into_iter()
            .map(Repr::into_bigint)
            .collect()
    }
}
