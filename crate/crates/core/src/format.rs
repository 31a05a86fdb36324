//! Serde helpers that write big integers and rationals as decimal strings.

/// `BigInt` as a decimal string.
pub mod decimal {
    use num_bigint::BigInt;
    use serde::{de::Error, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &BigInt, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(v)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigInt, D::Error> {
        let text = String::deserialize(d)?;
        text.trim().parse().map_err(|_| D::Error::custom(format!("not a decimal integer: {text:?}")))
    }
}

/// `Vec<BigInt>` as a list of decimal strings.
pub mod decimal_vec {
    use num_bigint::BigInt;
    use serde::{de::Error, ser::SerializeSeq, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &[BigInt], s: S) -> Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(v.len()))?;
        for x in v {
            seq.serialize_element(&x.to_string())?;
        }
        seq.end()
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<BigInt>, D::Error> {
        Vec::<String>::deserialize(d)?
            .into_iter()
            .map(|t| t.trim().parse().map_err(|_| D::Error::custom(format!("not a decimal integer: {t:?}"))))
            .collect()
    }
}

/// `Vec<Vec<BigInt>>` as nested lists of decimal strings.
pub mod decimal_rows {
    use num_bigint::BigInt;
    use serde::{de::Error, Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(v: &[Vec<BigInt>], s: S) -> Result<S::Ok, S::Error> {
        let rows: Vec<Vec<String>> = v.iter().map(|r| r.iter().map(ToString::to_string).collect()).collect();
        rows.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Vec<BigInt>>, D::Error> {
        Vec::<Vec<String>>::deserialize(d)?
            .into_iter()
            .map(|row| {
                row.into_iter()
                    .map(|t| t.trim().parse().map_err(|_| D::Error::custom(format!("not a decimal integer: {t:?}"))))
                    .collect()
            })
            .collect()
    }
}

/// `BigRational` as `"p/q"`, or `"p"` when the denominator is one.
pub mod rational {
    use num_rational::BigRational;
    use serde::{de::Error, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &BigRational, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(v)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigRational, D::Error> {
        let text = String::deserialize(d)?;
        super::parse_rational(&text).ok_or_else(|| D::Error::custom(format!("not a rational: {text:?}")))
    }
}

/// `Vec<BigRational>` as a list of `"p/q"` strings.
pub mod rational_vec {
    use num_rational::BigRational;
    use serde::{de::Error, Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(v: &[BigRational], s: S) -> Result<S::Ok, S::Error> {
        v.iter().map(ToString::to_string).collect::<Vec<_>>().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<BigRational>, D::Error> {
        Vec::<String>::deserialize(d)?
            .into_iter()
            .map(|t| super::parse_rational(&t).ok_or_else(|| D::Error::custom(format!("not a rational: {t:?}"))))
            .collect()
    }
}

/// Any number through its `Display` form, e.g. `f64` as its shortest
/// round-trip decimal.
pub fn display<T: std::fmt::Display, S: serde::Serializer>(v: &T, s: S) -> Result<S::Ok, S::Error> {
    s.collect_str(v)
}

/// Parses `"p"`, `"p/q"` or a finite decimal such as `"2.75"`.
pub fn parse_rational(text: &str) -> Option<num_rational::BigRational> {
    use num_bigint::BigInt;
    use num_rational::BigRational;
    use num_traits::{Pow, Zero};

    let text = text.trim();
    if let Some((p, q)) = text.split_once('/') {
        let q: BigInt = q.trim().parse().ok()?;
        if q.is_zero() {
            return None;
        }
        return Some(BigRational::new(p.trim().parse().ok()?, q));
    }
    if let Some((whole, frac)) = text.split_once('.') {
        if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) {
            return None;
        }
        let negative = whole.starts_with('-');
        let whole: BigInt = if whole.is_empty() || whole == "-" { BigInt::zero() } else { whole.parse().ok()? };
        let scale = BigInt::from(10u32).pow(frac.len() as u32);
        let frac: BigInt = frac.parse().ok()?;
        let magnitude = BigRational::new(whole.magnitude().clone().into(), BigInt::from(1))
            + BigRational::new(frac, scale);
        return Some(if negative { -magnitude } else { magnitude });
    }
    Some(BigRational::from_integer(text.parse().ok()?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;
    use num_rational::BigRational;

    fn q(p: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(p), BigInt::from(d))
    }

    #[test]
    fn rationals_parse() {
        assert_eq!(parse_rational("4"), Some(q(4, 1)));
        assert_eq!(parse_rational("11/4"), Some(q(11, 4)));
        assert_eq!(parse_rational("2.75"), Some(q(11, 4)));
        assert_eq!(parse_rational("-0.5"), Some(q(-1, 2)));
        assert_eq!(parse_rational("-1.25"), Some(q(-5, 4)));
        assert_eq!(parse_rational("1/0"), None);
        assert_eq!(parse_rational("x"), None);
        assert_eq!(parse_rational("1."), None);
    }
}
