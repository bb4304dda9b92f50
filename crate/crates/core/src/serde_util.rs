//! String-based serde for big integers so JSON output stays human readable.

use num_bigint::BigInt;
use serde::de::Error as DeError;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

pub mod big {
    use super::*;

    pub fn serialize<S: Serializer>(v: &BigInt, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&v.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigInt, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(D::Error::custom)
    }
}

pub mod big_opt {
    use super::*;

    pub fn serialize<S: Serializer>(v: &Option<BigInt>, s: S) -> Result<S::Ok, S::Error> {
        v.as_ref().map(|x| x.to_string()).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<BigInt>, D::Error> {
        let s: Option<String> = Option::deserialize(d)?;
        s.map(|x| x.parse().map_err(D::Error::custom)).transpose()
    }
}

pub mod big_arr4 {
    use super::*;

    pub fn serialize<S: Serializer>(v: &[BigInt; 4], s: S) -> Result<S::Ok, S::Error> {
        let strs: Vec<String> = v.iter().map(|x| x.to_string()).collect();
        strs.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<[BigInt; 4], D::Error> {
        let strs: Vec<String> = Vec::deserialize(d)?;
        if strs.len() != 4 {
            return Err(D::Error::custom("expected 4 coefficients"));
        }
        let mut out: [BigInt; 4] = std::array::from_fn(|_| BigInt::from(0));
        for (i, s) in strs.iter().enumerate() {
            out[i] = s.parse().map_err(D::Error::custom)?;
        }
        Ok(out)
    }
}

pub mod big_arr4_opt {
    use super::*;

    pub fn serialize<S: Serializer>(v: &Option<[BigInt; 4]>, s: S) -> Result<S::Ok, S::Error> {
        v.as_ref()
            .map(|a| a.iter().map(|x| x.to_string()).collect::<Vec<_>>())
            .serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<[BigInt; 4]>, D::Error> {
        let strs: Option<Vec<String>> = Option::deserialize(d)?;
        match strs {
            None => Ok(None),
            Some(v) => {
                if v.len() != 4 {
                    return Err(D::Error::custom("expected 4 coordinates"));
                }
                let mut out: [BigInt; 4] = std::array::from_fn(|_| BigInt::from(0));
                for (i, s) in v.iter().enumerate() {
                    out[i] = s.parse().map_err(D::Error::custom)?;
                }
                Ok(Some(out))
            }
        }
    }
}

pub mod profile {
    use super::*;

    pub fn serialize<S: Serializer>(
        v: &Vec<(BigInt, [u32; 4])>,
        s: S,
    ) -> Result<S::Ok, S::Error> {
        let pairs: Vec<(String, [u32; 4])> =
            v.iter().map(|(p, t)| (p.to_string(), *t)).collect();
        pairs.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(
        d: D,
    ) -> Result<Vec<(BigInt, [u32; 4])>, D::Error> {
        let pairs: Vec<(String, [u32; 4])> = Vec::deserialize(d)?;
        pairs
            .into_iter()
            .map(|(p, t)| Ok((p.parse().map_err(D::Error::custom)?, t)))
            .collect()
    }
}
