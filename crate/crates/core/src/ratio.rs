//! Exact fractions for φ and ε.

use num_bigint::BigUint;
use num_rational::Ratio;
use num_traits::{One, Zero};

use crate::error::{Error, Result};

pub type Fraction = Ratio<u128>;

/// Parses `0.25`, `1/4`, `1` or `.5` into an exact fraction.
pub fn parse_fraction(text: &str) -> Result<Fraction> {
    let s = text.trim();
    let bad = || Error::BadFraction(text.to_string());
    if let Some((n, d)) = s.split_once('/') {
        let n: u128 = n.trim().parse().map_err(|_| bad())?;
        let d: u128 = d.trim().parse().map_err(|_| bad())?;
        if d == 0 {
            return Err(bad());
        }
        return Ok(Ratio::new(n, d));
    }
    if s.contains(['e', 'E']) {
        // scientific notation from f64 formatting
        let v: f64 = s.parse().map_err(|_| bad())?;
        return from_f64(v);
    }
    let (int, frac) = s.split_once('.').unwrap_or((s, ""));
    if int.is_empty() && frac.is_empty() {
        return Err(bad());
    }
    if !int.bytes().all(|b| b.is_ascii_digit()) || !frac.bytes().all(|b| b.is_ascii_digit()) {
        return Err(bad());
    }
    if frac.len() > 30 {
        return Err(bad());
    }
    let digits = format!("{int}{frac}");
    let numer: u128 = if digits.is_empty() { 0 } else { digits.parse().map_err(|_| bad())? };
    let denom = 10u128.checked_pow(frac.len() as u32).ok_or_else(bad)?;
    Ok(Ratio::new(numer, denom))
}

/// Exact fraction of the shortest decimal that round-trips `v`.
pub fn from_f64(v: f64) -> Result<Fraction> {
    if !v.is_finite() || v < 0.0 {
        return Err(Error::BadFraction(v.to_string()));
    }
    let text = format!("{v}");
    if text.contains(['e', 'E']) {
        Err(Error::BadFraction(text))
    } else {
        parse_fraction(&text)
    }
}

pub fn to_f64(r: &Fraction) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

pub fn check_phi(phi: &Fraction) -> Result<()> {
    if *phi > Fraction::one() {
        return Err(Error::PhiOutOfRange(phi.to_string()));
    }
    Ok(())
}

/// ε must lie in [0, 1); zero selects exact mode.
pub fn check_epsilon(eps: &Fraction) -> Result<()> {
    if *eps >= Fraction::one() {
        return Err(Error::EpsilonOutOfRange(eps.to_string()));
    }
    Ok(())
}

pub fn is_zero(r: &Fraction) -> bool {
    r.is_zero()
}

/// Zero-based index of the φ-quantile among `n` answers: `max(⌈φn⌉, 1) − 1`.
pub fn target_index(phi: &Fraction, n: &BigUint) -> BigUint {
    let num = BigUint::from(*phi.numer()) * n;
    let den = BigUint::from(*phi.denom());
    let ceil = (&num + &den - BigUint::one()) / &den;
    if ceil.is_zero() {
        BigUint::zero()
    } else {
        ceil - BigUint::one()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn target_index_follows_the_ceiling() {
        let n = BigUint::from(10u32);
        assert_eq!(target_index(&Fraction::new(1, 2), &n), BigUint::from(4u32));
        assert_eq!(target_index(&Fraction::new(0, 1), &n), BigUint::from(0u32));
        assert_eq!(target_index(&Fraction::new(1, 1), &n), BigUint::from(9u32));
        assert_eq!(target_index(&Fraction::new(11, 100), &n), BigUint::from(1u32));
    }

    #[test]
    fn decimals_and_ratios() {
        assert_eq!(parse_fraction("0.25").unwrap(), Ratio::new(1, 4));
        assert_eq!(parse_fraction("1/3").unwrap(), Ratio::new(1, 3));
        assert_eq!(parse_fraction(".5").unwrap(), Ratio::new(1, 2));
        assert_eq!(parse_fraction("1").unwrap(), Ratio::new(1, 1));
        assert_eq!(parse_fraction("0").unwrap(), Ratio::new(0, 1));
        assert!(parse_fraction("abc").is_err());
        assert!(parse_fraction("-0.5").is_err());
        assert!(parse_fraction("1/0").is_err());
        assert_eq!(from_f64(0.1).unwrap(), Ratio::new(1, 10));
    }
}
