//! Exact rational scalars.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

/// Arbitrary-precision rational, always reduced with a positive denominator.
pub type Rat = BigRational;

pub fn int(v: i64) -> Rat {
    Rat::from_integer(BigInt::from(v))
}

pub fn frac(p: i64, q: i64) -> Rat {
    Rat::new(BigInt::from(p), BigInt::from(q))
}

pub fn half() -> Rat {
    frac(1, 2)
}

pub fn zero() -> Rat {
    Rat::zero()
}

pub fn one() -> Rat {
    Rat::one()
}

/// `(-1)^k` as a rational.
pub fn sign(negative: bool) -> Rat {
    if negative {
        -Rat::one()
    } else {
        Rat::one()
    }
}

/// Parse `p`, `-p` or `p/q` (surrounding whitespace allowed).
pub fn parse_rat(text: &str) -> Result<Rat, String> {
    let t = text.trim();
    let (num, den) = match t.split_once('/') {
        Some((a, b)) => (a.trim(), Some(b.trim())),
        None => (t, None),
    };
    let p: BigInt = num
        .parse()
        .map_err(|_| format!("invalid rational literal `{text}`"))?;
    let q: BigInt = match den {
        Some(d) => d
            .parse()
            .map_err(|_| format!("invalid rational literal `{text}`"))?,
        None => BigInt::one(),
    };
    if q.is_zero() {
        return Err(format!("zero denominator in `{text}`"));
    }
    Ok(Rat::new(p, q))
}

/// Reduced-fraction text, e.g. `-3/2`, `0`, `5`.
pub fn fmt_rat(r: &Rat) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// True when `r` is an integer multiple of 1/2 but not an integer.
pub fn is_half_odd(r: &Rat) -> bool {
    let twice = r * int(2);
    twice.is_integer() && !r.is_integer()
}

/// Magnitude proxy used for pivot selection: bit length of numerator plus denominator.
pub fn height(r: &Rat) -> u64 {
    r.numer().abs().bits() + r.denom().bits()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_forms() {
        assert_eq!(parse_rat("3/6").unwrap(), frac(1, 2));
        assert_eq!(parse_rat(" -7 ").unwrap(), int(-7));
        assert_eq!(parse_rat("-1/2").unwrap(), frac(-1, 2));
        assert!(parse_rat("1/0").is_err());
        assert!(parse_rat("x").is_err());
    }

    #[test]
    fn format_reduced() {
        assert_eq!(fmt_rat(&frac(4, -6)), "-2/3");
        assert_eq!(fmt_rat(&int(0)), "0");
        assert!(is_half_odd(&frac(3, 2)));
        assert!(!is_half_odd(&int(1)));
    }
}
