//! Digit-string codec and the Baire (longest-common-prefix) distance.
//!
//! A scalar is encoded as a sign, its integer digits, and exactly
//! `precision` fractional digits in the configured base. Distances are then
//! read off the digits alone: two strings at prefix depth `k` are
//! `base^-k` apart, and any sign or integer-part mismatch costs the full
//! distance 1. Identical strings sit at the floor `base^-precision`; exact
//! zero distance is unattainable at finite precision, so value identity is
//! the separate `==` on [`DigitString`].
//!
//! Encoding always operates on the positional decimal rendering of the
//! input (the shortest string that round-trips the float), never on raw
//! binary expansions. This keeps `encode(0.478)` at `[4, 7, 8]` instead of
//! the `[4, 7, 7]` that naive repeated multiplication would produce.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Largest base for which a digit still fits in a byte.
pub const MAX_BASE: u32 = 256;

/// Every representable digit string must stay faithful through an `f64`,
/// which bounds `base^precision` by 2^53.
const MAX_SCALE: f64 = 9007199254740992.0; // 2^53

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CodecError {
    #[error("value is not finite: {0}")]
    NonFinite(f64),
    #[error("base must be in 2..={MAX_BASE}, got {0}")]
    UnsupportedBase(u32),
    #[error("precision must be at least 1")]
    ZeroPrecision,
    #[error("base^precision exceeds 2^53 (base {base}, precision {precision})")]
    PrecisionOverflow { base: u32, precision: usize },
    #[error("digit strings were encoded under different parameters")]
    IncompatibleParams,
    #[error("invalid digit string: {0}")]
    MalformedDigits(String),
}

/// Sign of an encoded value, following the IEEE sign bit: `-0.0` renders
/// as `-0` and keeps its minus sign, exactly as a character scan of the
/// rendering would read it. Sign membership is part of the level-0 prefix
/// and never depends on the precision.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Sign {
    #[serde(rename = "+")]
    Plus,
    #[serde(rename = "-")]
    Minus,
}

impl Sign {
    pub fn factor(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }
}

/// How to resolve fractional digits beyond the configured precision.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Rounding {
    /// Keep the leading digits unchanged (pure prefix semantics). Default.
    #[default]
    Truncate,
    /// Round to nearest, ties to the even digit.
    HalfEven,
}

/// Encoding parameters: base, fractional precision, and rounding policy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BaireParams {
    base: u32,
    precision: usize,
    rounding: Rounding,
}

impl Default for BaireParams {
    /// Base 10 with six fractional digits, truncating.
    fn default() -> Self {
        BaireParams {
            base: 10,
            precision: 6,
            rounding: Rounding::Truncate,
        }
    }
}

impl BaireParams {
    pub fn new(base: u32, precision: usize, rounding: Rounding) -> Result<Self, CodecError> {
        if !(2..=MAX_BASE).contains(&base) {
            return Err(CodecError::UnsupportedBase(base));
        }
        if precision == 0 {
            return Err(CodecError::ZeroPrecision);
        }
        let mut scale = 1.0f64;
        for _ in 0..precision {
            scale *= base as f64;
            if scale > MAX_SCALE {
                return Err(CodecError::PrecisionOverflow { base, precision });
            }
        }
        Ok(BaireParams {
            base,
            precision,
            rounding,
        })
    }

    pub fn base(&self) -> u32 {
        self.base
    }

    pub fn precision(&self) -> usize {
        self.precision
    }

    pub fn rounding(&self) -> Rounding {
        self.rounding
    }

    /// The distance value associated with prefix depth `k`: `base^-k`.
    /// Depth 0 gives 1, the distance of any level-0 mismatch.
    ///
    /// Every module that reports a Baire distance goes through this single
    /// helper, so equal depths always compare bitwise-equal.
    pub fn level_distance(&self, depth: usize) -> f64 {
        (self.base as f64).powi(-(depth as i32))
    }
}

/// A scalar as sign, integer digits (most significant first), and exactly
/// `precision` fractional digits in the parameter base.
///
/// Equality on `DigitString` is the boolean identity test at encoding
/// resolution; the Baire distance of two equal strings is the floor
/// `base^-precision`, never 0.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct DigitString {
    sign: Sign,
    int_digits: Vec<u8>,
    frac_digits: Vec<u8>,
    params: BaireParams,
}

impl DigitString {
    /// Build a digit string from raw parts, validating the type invariants:
    /// digits below the base, exact fractional length, no leading integer
    /// zeros, and all-zero strings normalised to a plus sign.
    pub fn new(
        sign: Sign,
        int_digits: Vec<u8>,
        frac_digits: Vec<u8>,
        params: BaireParams,
    ) -> Result<Self, CodecError> {
        if int_digits.is_empty() {
            return Err(CodecError::MalformedDigits(
                "integer part must have at least the digit 0".into(),
            ));
        }
        if int_digits.len() > 1 && int_digits[0] == 0 {
            return Err(CodecError::MalformedDigits(
                "leading zero in integer digits".into(),
            ));
        }
        if frac_digits.len() != params.precision {
            return Err(CodecError::MalformedDigits(format!(
                "expected {} fractional digits, got {}",
                params.precision,
                frac_digits.len()
            )));
        }
        Self::assemble(sign, int_digits, frac_digits, params, params.base as u16)
    }

    fn assemble(
        sign: Sign,
        int_digits: Vec<u8>,
        frac_digits: Vec<u8>,
        params: BaireParams,
        limit: u16,
    ) -> Result<Self, CodecError> {
        for &d in int_digits.iter().chain(frac_digits.iter()) {
            if u16::from(d) >= limit {
                return Err(CodecError::MalformedDigits(format!(
                    "digit {d} out of range for base {}",
                    params.base
                )));
            }
        }
        Ok(DigitString {
            sign,
            int_digits,
            frac_digits,
            params,
        })
    }

    pub fn sign(&self) -> Sign {
        self.sign
    }

    pub fn int_digits(&self) -> &[u8] {
        &self.int_digits
    }

    pub fn frac_digits(&self) -> &[u8] {
        &self.frac_digits
    }

    pub fn params(&self) -> &BaireParams {
        &self.params
    }

    /// Decode back to a scalar. With base 10 this reproduces the digit
    /// string's decimal value exactly (up to `f64` resolution); other bases
    /// round once in the final division.
    pub fn to_value(&self) -> f64 {
        let m = self.params.base as f64;
        if self.params.base == 10 {
            let mut s = String::with_capacity(self.int_digits.len() + self.frac_digits.len() + 2);
            if self.sign == Sign::Minus {
                s.push('-');
            }
            for &d in &self.int_digits {
                s.push((b'0' + d) as char);
            }
            s.push('.');
            for &d in &self.frac_digits {
                s.push((b'0' + d) as char);
            }
            return s.parse().expect("digit string renders as a valid decimal");
        }
        let int_part = self
            .int_digits
            .iter()
            .fold(0.0, |acc, &d| acc * m + f64::from(d));
        let mut frac_num = 0.0f64;
        let mut scale = 1.0f64;
        for &d in &self.frac_digits {
            frac_num = frac_num * m + f64::from(d);
            scale *= m;
        }
        self.sign.factor() * (int_part + frac_num / scale)
    }
}

/// Outcome of comparing two digit strings position by position.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CommonPrefix {
    /// Sign or integer digits differ: no shared level-0 prefix at all.
    IntMismatch,
    /// Number of leading fractional digits shared (0 when the first
    /// fractional digits already differ).
    Depth(usize),
}

/// Longest common prefix of two digit strings encoded under the same
/// parameters. Coincidences after the first mismatch are ignored.
pub fn common_prefix(x: &DigitString, y: &DigitString) -> Result<CommonPrefix, CodecError> {
    if x.params != y.params {
        return Err(CodecError::IncompatibleParams);
    }
    if x.sign != y.sign || x.int_digits != y.int_digits {
        return Ok(CommonPrefix::IntMismatch);
    }
    let depth = x
        .frac_digits
        .iter()
        .zip(y.frac_digits.iter())
        .take_while(|(a, b)| a == b)
        .count();
    Ok(CommonPrefix::Depth(depth))
}

/// The Baire distance `base^-k` at prefix depth `k`; 1 for a level-0
/// mismatch or when the first fractional digits differ; `base^-precision`
/// for identical strings.
pub fn baire_distance(x: &DigitString, y: &DigitString) -> Result<f64, CodecError> {
    let depth = match common_prefix(x, y)? {
        CommonPrefix::IntMismatch => 0,
        CommonPrefix::Depth(k) => k,
    };
    Ok(x.params.level_distance(depth))
}

/// How the digits beyond the kept precision compare to half of one unit in
/// the last kept place.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Tail {
    Zero,
    BelowHalf,
    ExactHalf,
    AboveHalf,
}

/// Encode a finite scalar as a digit string under `params`.
///
/// The value is first rendered in positional decimal (the shortest string
/// that round-trips through `f64`); digits are then read from that exact
/// decimal, directly for base 10 and through exact integer arithmetic for
/// any other base.
pub fn encode(value: f64, params: &BaireParams) -> Result<DigitString, CodecError> {
    if !value.is_finite() {
        return Err(CodecError::NonFinite(value));
    }
    let sign = if value.is_sign_negative() {
        Sign::Minus
    } else {
        Sign::Plus
    };
    let rendered = format!("{}", value.abs());
    let (int_str, frac_str) = match rendered.split_once('.') {
        Some((i, f)) => (i, f),
        None => (rendered.as_str(), ""),
    };

    let (mut int_digits, mut frac_digits, tail) = if params.base == 10 {
        decimal_digits(int_str, frac_str, params.precision)
    } else {
        rebased_digits(int_str, frac_str, params)
    };

    let round_up = match params.rounding {
        Rounding::Truncate => false,
        Rounding::HalfEven => match tail {
            Tail::Zero | Tail::BelowHalf => false,
            Tail::AboveHalf => true,
            Tail::ExactHalf => frac_digits.last().is_some_and(|d| d % 2 == 1),
        },
    };
    if round_up {
        increment(&mut int_digits, &mut frac_digits, params.base);
    }

    DigitString::assemble(sign, int_digits, frac_digits, *params, params.base as u16)
}

/// Add one unit in the last fractional place, carrying through the integer
/// digits if needed.
fn increment(int_digits: &mut Vec<u8>, frac_digits: &mut [u8], base: u32) {
    for d in frac_digits.iter_mut().rev() {
        if u32::from(*d) + 1 < base {
            *d += 1;
            return;
        }
        *d = 0;
    }
    for d in int_digits.iter_mut().rev() {
        if u32::from(*d) + 1 < base {
            *d += 1;
            return;
        }
        *d = 0;
    }
    int_digits.insert(0, 1);
}

/// Base-10 digits read straight off the decimal rendering.
fn decimal_digits(int_str: &str, frac_str: &str, precision: usize) -> (Vec<u8>, Vec<u8>, Tail) {
    let int_digits: Vec<u8> = int_str.bytes().map(|b| b - b'0').collect();
    let mut frac_digits: Vec<u8> = frac_str.bytes().take(precision).map(|b| b - b'0').collect();
    frac_digits.resize(precision, 0);

    let tail_str = if frac_str.len() > precision {
        &frac_str[precision..]
    } else {
        ""
    };
    let tail = match tail_str.bytes().next() {
        None => Tail::Zero,
        Some(first) => {
            let rest_zero = tail_str[1..].bytes().all(|b| b == b'0');
            match first {
                b'0' if rest_zero => Tail::Zero,
                b'0'..=b'4' => Tail::BelowHalf,
                b'5' if rest_zero => Tail::ExactHalf,
                _ => Tail::AboveHalf,
            }
        }
    };
    (int_digits, frac_digits, tail)
}

/// Digits in a non-decimal base, extracted from the exact rational value of
/// the decimal rendering. Small inputs run on `u128`; anything wider falls
/// back to big integers.
fn rebased_digits(int_str: &str, frac_str: &str, params: &BaireParams) -> (Vec<u8>, Vec<u8>, Tail) {
    // Trailing zeros in the fractional rendering do not change the value
    // but would widen the denominator.
    let frac_str = frac_str.trim_end_matches('0');
    if int_str.len() <= 38 && frac_str.len() <= 36 {
        if let (Ok(int_val), Ok(frac_num)) = (int_str.parse::<u128>(), parse_u128_frac(frac_str)) {
            return rebased_digits_u128(int_val, frac_num, frac_str.len(), params);
        }
    }
    rebased_digits_big(int_str, frac_str, params)
}

fn parse_u128_frac(frac_str: &str) -> Result<u128, std::num::ParseIntError> {
    if frac_str.is_empty() {
        Ok(0)
    } else {
        frac_str.parse::<u128>()
    }
}

fn rebased_digits_u128(
    int_val: u128,
    frac_num: u128,
    frac_len: usize,
    params: &BaireParams,
) -> (Vec<u8>, Vec<u8>, Tail) {
    let base = params.base as u128;
    let mut int_digits = Vec::new();
    let mut n = int_val;
    while n > 0 {
        int_digits.push((n % base) as u8);
        n /= base;
    }
    if int_digits.is_empty() {
        int_digits.push(0);
    }
    int_digits.reverse();

    let den = 10u128.pow(frac_len as u32);
    let mut frac_digits = Vec::with_capacity(params.precision);
    let mut rem = frac_num;
    for _ in 0..params.precision {
        rem *= base;
        frac_digits.push((rem / den) as u8);
        rem %= den;
    }
    let tail = if rem == 0 {
        Tail::Zero
    } else {
        match (2 * rem).cmp(&den) {
            std::cmp::Ordering::Less => Tail::BelowHalf,
            std::cmp::Ordering::Equal => Tail::ExactHalf,
            std::cmp::Ordering::Greater => Tail::AboveHalf,
        }
    };
    (int_digits, frac_digits, tail)
}

fn rebased_digits_big(
    int_str: &str,
    frac_str: &str,
    params: &BaireParams,
) -> (Vec<u8>, Vec<u8>, Tail) {
    use num_bigint::BigUint;

    let base = BigUint::from(params.base);
    let to_small = |q: &BigUint| -> u8 { q.to_u64_digits().first().copied().unwrap_or(0) as u8 };

    let mut int_digits = Vec::new();
    let mut n = int_str.parse::<BigUint>().expect("rendering is decimal");
    let zero = BigUint::from(0u8);
    while n > zero {
        let q = &n / &base;
        let r = &n - &q * &base;
        int_digits.push(to_small(&r));
        n = q;
    }
    if int_digits.is_empty() {
        int_digits.push(0);
    }
    int_digits.reverse();

    let den = BigUint::from(10u8).pow(frac_str.len() as u32);
    let mut rem = if frac_str.is_empty() {
        zero.clone()
    } else {
        frac_str.parse::<BigUint>().expect("rendering is decimal")
    };
    let mut frac_digits = Vec::with_capacity(params.precision);
    for _ in 0..params.precision {
        rem *= &base;
        let q = &rem / &den;
        rem -= &q * &den;
        frac_digits.push(to_small(&q));
    }
    let tail = if rem == zero {
        Tail::Zero
    } else {
        match (rem * 2u8).cmp(&den) {
            std::cmp::Ordering::Less => Tail::BelowHalf,
            std::cmp::Ordering::Equal => Tail::ExactHalf,
            std::cmp::Ordering::Greater => Tail::AboveHalf,
        }
    };
    (int_digits, frac_digits, tail)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(base: u32, precision: usize) -> BaireParams {
        BaireParams::new(base, precision, Rounding::Truncate).unwrap()
    }

    fn enc(value: f64, p: &BaireParams) -> DigitString {
        encode(value, p).unwrap()
    }

    #[test]
    fn encodes_reference_value() {
        let p = params(10, 3);
        let d = enc(0.478, &p);
        assert_eq!(d.sign(), Sign::Plus);
        assert_eq!(d.int_digits(), &[0]);
        assert_eq!(d.frac_digits(), &[4, 7, 8]);
    }

    #[test]
    fn encodes_zero() {
        let p = params(10, 3);
        let d = enc(0.0, &p);
        assert_eq!(
            (d.sign(), d.int_digits(), d.frac_digits()),
            (Sign::Plus, &[0][..], &[0, 0, 0][..])
        );
        // -0.0 renders as "-0": its sign bit survives encoding and its
        // re-encode after decode is digit-identical.
        let neg = enc(-0.0, &p);
        assert_eq!(neg.sign(), Sign::Minus);
        assert_eq!(enc(neg.to_value(), &p), neg);
        // Likewise for negative values whose magnitude truncates to zero:
        // the sign class is independent of precision.
        assert_eq!(enc(-0.0004, &p).sign(), Sign::Minus);
    }

    #[test]
    fn truncation_drops_trailing_digit() {
        let p = params(10, 3);
        assert_eq!(enc(0.4376, &p).frac_digits(), &[4, 3, 7]);
    }

    #[test]
    fn half_even_rounding() {
        let p = BaireParams::new(10, 3, Rounding::HalfEven).unwrap();
        assert_eq!(enc(0.4376, &p).frac_digits(), &[4, 3, 8]);
        // Exact halves go to the even digit.
        assert_eq!(enc(0.1235, &p).frac_digits(), &[1, 2, 4]);
        assert_eq!(enc(0.1245, &p).frac_digits(), &[1, 2, 4]);
        // Carry across all fractional digits reaches the integer part.
        let d = enc(0.9999, &p);
        assert_eq!(d.int_digits(), &[1]);
        assert_eq!(d.frac_digits(), &[0, 0, 0]);
    }

    #[test]
    fn integer_and_sign_are_captured() {
        let p = params(10, 2);
        let d = enc(-12.34, &p);
        assert_eq!(d.sign(), Sign::Minus);
        assert_eq!(d.int_digits(), &[1, 2]);
        assert_eq!(d.frac_digits(), &[3, 4]);
    }

    #[test]
    fn base_two_digits() {
        let p = params(2, 6);
        // 0.6875 = 0.101100 in binary.
        assert_eq!(enc(0.6875, &p).frac_digits(), &[1, 0, 1, 1, 0, 0]);
        // 5 = 101 in binary.
        assert_eq!(enc(5.0, &p).int_digits(), &[1, 0, 1]);
    }

    #[test]
    fn base_three_digits() {
        let p = params(3, 4);
        // 5/9 = 0.12 in base 3.
        let d = enc(5.0 / 9.0, &p);
        assert_eq!(d.frac_digits(), &[1, 2, 0, 0]);
    }

    #[test]
    fn max_base_digits_and_carry() {
        let p = params(256, 2);
        assert_eq!(enc(0.5, &p).frac_digits(), &[128, 0]);
        // Rounding up from [255, 255] carries into the integer part.
        let p = BaireParams::new(256, 2, Rounding::HalfEven).unwrap();
        let d = enc(0.999999, &p);
        assert_eq!(d.int_digits(), &[1]);
        assert_eq!(d.frac_digits(), &[0, 0]);
    }

    #[test]
    fn non_finite_is_rejected() {
        let p = params(10, 3);
        assert!(matches!(
            encode(f64::NAN, &p),
            Err(CodecError::NonFinite(_))
        ));
        assert!(matches!(
            encode(f64::INFINITY, &p),
            Err(CodecError::NonFinite(_))
        ));
    }

    #[test]
    fn params_validation() {
        assert!(matches!(
            BaireParams::new(1, 3, Rounding::Truncate),
            Err(CodecError::UnsupportedBase(1))
        ));
        assert!(matches!(
            BaireParams::new(10, 0, Rounding::Truncate),
            Err(CodecError::ZeroPrecision)
        ));
        assert!(matches!(
            BaireParams::new(10, 16, Rounding::Truncate),
            Err(CodecError::PrecisionOverflow { .. })
        ));
        assert!(BaireParams::new(10, 15, Rounding::Truncate).is_ok());
        assert!(BaireParams::new(2, 53, Rounding::Truncate).is_ok());
    }

    #[test]
    fn prefix_reference_cases() {
        let p = params(10, 3);
        let d = |v| enc(v, &p);
        assert_eq!(
            common_prefix(&d(0.478), &d(0.472)).unwrap(),
            CommonPrefix::Depth(2)
        );
        // A later coincidence (third digit 7 in both) is not a prefix.
        assert_eq!(
            common_prefix(&d(0.437), &d(0.577)).unwrap(),
            CommonPrefix::Depth(0)
        );
        assert_eq!(
            common_prefix(&d(0.437), &d(1.437)).unwrap(),
            CommonPrefix::IntMismatch
        );
        assert_eq!(
            common_prefix(&d(0.437), &d(-0.437)).unwrap(),
            CommonPrefix::IntMismatch
        );
    }

    #[test]
    fn prefix_rejects_mixed_params() {
        let a = enc(0.5, &params(10, 3));
        let b = enc(0.5, &params(10, 4));
        assert_eq!(common_prefix(&a, &b), Err(CodecError::IncompatibleParams));
        assert_eq!(baire_distance(&a, &b), Err(CodecError::IncompatibleParams));
    }

    #[test]
    fn distance_reference_cases() {
        let p = params(10, 3);
        let d = |v| enc(v, &p);
        // Three shared fractional digits.
        assert_eq!(baire_distance(&d(0.437), &d(0.4371)).unwrap(), 1e-3);
        // Only the integer part shared.
        assert_eq!(baire_distance(&d(0.437), &d(0.571)).unwrap(), 1.0);
        // Identical strings at full precision.
        let p6 = params(10, 6);
        let x = enc(0.437, &p6);
        assert_eq!(baire_distance(&x, &x).unwrap(), 1e-6);
    }

    #[test]
    fn roundtrip_through_decode() {
        // Truncation round-trips when the decoded value's exact decimal
        // expansion survives the shortest float rendering: base 10 always,
        // binary-power bases at short precisions. Half-even rounding
        // round-trips at any supported base because the re-encode snaps to
        // the nearest digit string.
        let configs = [
            params(10, 6),
            params(2, 10),
            params(16, 3),
            BaireParams::new(16, 8, Rounding::HalfEven).unwrap(),
            BaireParams::new(3, 6, Rounding::HalfEven).unwrap(),
            BaireParams::new(7, 5, Rounding::HalfEven).unwrap(),
        ];
        for p in configs {
            for v in [0.0, 0.478, 0.125, 3.75, -2.5, 0.6, 1.0 / 3.0] {
                let d = enc(v, &p);
                let back = enc(d.to_value(), &p);
                assert_eq!(d, back, "value {v} under base {}", p.base());
            }
        }
    }

    #[test]
    fn constructor_validates() {
        let p = params(10, 3);
        assert!(DigitString::new(Sign::Plus, vec![], vec![0, 0, 0], p).is_err());
        assert!(DigitString::new(Sign::Plus, vec![0, 1], vec![0, 0, 0], p).is_err());
        assert!(DigitString::new(Sign::Plus, vec![0], vec![0, 0], p).is_err());
        assert!(DigitString::new(Sign::Plus, vec![0], vec![0, 0, 10], p).is_err());
        // A minus sign over all-zero digits is the -0 class and is kept.
        let z = DigitString::new(Sign::Minus, vec![0], vec![0, 0, 0], p).unwrap();
        assert_eq!(z.sign(), Sign::Minus);
        assert_eq!(z.to_value(), 0.0);
        assert!(z.to_value().is_sign_negative());
    }

    #[test]
    fn level_distance_floor() {
        let p = params(10, 6);
        assert_eq!(p.level_distance(0), 1.0);
        assert_eq!(p.level_distance(3), 1e-3);
        assert_eq!(p.level_distance(6), 1e-6);
    }
}
