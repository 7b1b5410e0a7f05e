//! Hexadecimal float literals (`-0x1.8p+3`) and value parsing for the text formats.

use crate::error::{Error, Result};
use crate::fpbits::FloatSpec;

/// Format `v` as a C99-style hexadecimal literal with the shortest fraction.
pub fn format_hex(v: f64) -> String {
    if v.is_nan() {
        return "nan".into();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let bits = v.to_bits();
    let sign = if bits >> 63 == 1 { "-" } else { "" };
    let biased = ((bits >> 52) & 0x7ff) as i32;
    let mut frac = bits & ((1u64 << 52) - 1);
    if biased == 0 && frac == 0 {
        return format!("{sign}0x0p+0");
    }
    let (lead, exp) = if biased == 0 { (0, -1022) } else { (1, biased - 1023) };
    let exp_sign = if exp < 0 { '-' } else { '+' };
    if frac == 0 {
        return format!("{sign}0x{lead}p{exp_sign}{}", exp.unsigned_abs());
    }
    let mut digits = 13;
    while frac & 0xf == 0 {
        frac >>= 4;
        digits -= 1;
    }
    format!(
        "{sign}0x{lead}.{frac:0digits$x}p{exp_sign}{}",
        exp.unsigned_abs()
    )
}

/// Parse a decimal or hexadecimal literal and round it to the working format.
///
/// Decimal input is rounded once, directly to the working format, so decimal
/// strings that round-trip binary32 are read back exactly.
pub fn parse_value(text: &str, spec: &FloatSpec) -> Result<f64> {
    let t = text.trim();
    let unsigned = t.trim_start_matches(['+', '-']);
    let v = if unsigned.starts_with("0x") || unsigned.starts_with("0X") {
        let normalized = t.replacen("0X", "0x", 1).replace('P', "p");
        let normalized = normalized.strip_prefix('+').unwrap_or(&normalized);
        let v = if normalized.contains('p') {
            hexf_parse::parse_hexf64(normalized, false)
        } else {
            hexf_parse::parse_hexf64(&format!("{normalized}p0"), false)
        };
        v.map_err(|e| Error::Parse(format!("bad hex float {t:?}: {e}")))?
    } else if *spec == FloatSpec::SINGLE {
        let v: f32 = t
            .parse()
            .map_err(|e| Error::Parse(format!("bad number {t:?}: {e}")))?;
        if v.is_infinite() && !unsigned.to_ascii_lowercase().starts_with("inf") {
            return Err(Error::InvalidInput(format!("{t} overflows the working format")));
        }
        v as f64
    } else {
        t.parse::<f64>()
            .map_err(|e| Error::Parse(format!("bad number {t:?}: {e}")))?
    };
    spec.to_working(v)
}

/// Serde adapters writing `f64` fields as hex strings.
pub mod serde_hex {
    use serde::{de::Error as _, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&super::format_hex(*v))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        let s = String::deserialize(d)?;
        super::parse_hex_exact(&s).map_err(D::Error::custom)
    }

    pub mod vec {
        use serde::{de::Error as _, ser::SerializeSeq, Deserialize, Deserializer, Serializer};

        pub fn serialize<S: Serializer>(v: &[f64], s: S) -> Result<S::Ok, S::Error> {
            let mut seq = s.serialize_seq(Some(v.len()))?;
            for x in v {
                seq.serialize_element(&super::super::format_hex(*x))?;
            }
            seq.end()
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<f64>, D::Error> {
            Vec::<String>::deserialize(d)?
                .iter()
                .map(|s| super::super::parse_hex_exact(s).map_err(D::Error::custom))
                .collect()
        }
    }
}

/// Parse a hex literal without rounding (plan dumps store exact values).
pub fn parse_hex_exact(text: &str) -> Result<f64> {
    let t = text.trim();
    let t = t.strip_prefix('+').unwrap_or(t);
    hexf_parse::parse_hexf64(t, false).map_err(|e| Error::Parse(format!("bad hex float {t:?}: {e}")))
}
