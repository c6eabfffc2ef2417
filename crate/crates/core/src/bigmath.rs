//! Big-integer helpers: binomials, logarithms and correctly scaled ratios.

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};

/// `C(n, k)` as an exact integer.
pub fn binomial(n: u64, k: u64) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    for i in 0..k {
        acc = acc * (n - i) / (i + 1);
    }
    acc
}

/// `ln(n!)` by direct summation; exact enough for the factorials used here.
pub fn ln_factorial(n: u64) -> f64 {
    (2..=n).map(|k| (k as f64).ln()).sum()
}

/// Natural log of a positive big integer from its top 64 bits and bit length.
pub fn ln_biguint(x: &BigUint) -> f64 {
    if x.is_zero() {
        return f64::NEG_INFINITY;
    }
    let bits = x.bits();
    if bits <= 64 {
        return x.to_f64().unwrap_or(f64::INFINITY).ln();
    }
    let shift = bits - 64;
    let top = (x >> shift).to_f64().unwrap_or(f64::INFINITY);
    top.ln() + shift as f64 * std::f64::consts::LN_2
}

/// `num / den` rounded once to `f64`, with about 100 quotient bits before the conversion.
pub fn ratio_to_f64(num: &BigUint, den: &BigUint) -> f64 {
    assert!(!den.is_zero(), "ratio with zero denominator");
    if num.is_zero() {
        return 0.0;
    }
    let scale = (den.bits() as i64 - num.bits() as i64 + 100).max(0) as u64;
    let q = (num << scale) / den;
    let mut v = q.to_f64().unwrap_or(f64::INFINITY);
    let mut s = scale as i32;
    while s > 0 {
        let step = s.min(1000);
        v *= 2f64.powi(-step);
        s -= step;
    }
    v
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binomials() {
        assert_eq!(binomial(5, 2), BigUint::from(10u32));
        assert_eq!(binomial(5, 7), BigUint::zero());
        assert_eq!(binomial(0, 0), BigUint::one());
        assert_eq!(binomial(52, 5), BigUint::from(2_598_960u32));
    }

    #[test]
    fn logs_of_big_counts() {
        assert_eq!(ln_biguint(&BigUint::one()), 0.0);
        let x = BigUint::one() << 300u32;
        assert!((ln_biguint(&x) - 300.0 * std::f64::consts::LN_2).abs() < 1e-12);
        assert!((ln_factorial(10) - 3_628_800f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn ratios() {
        assert_eq!(
            ratio_to_f64(&BigUint::from(1u32), &BigUint::from(4u32)),
            0.25
        );
        assert_eq!(
            ratio_to_f64(&BigUint::from(1u32), &BigUint::from(3u32)),
            1.0 / 3.0
        );
        let big = BigUint::one() << 2000u32;
        let num = BigUint::from(3u32) << 1990u32;
        assert_eq!(ratio_to_f64(&num, &big), 3.0 / 1024.0);
        let tiny = ratio_to_f64(&BigUint::one(), &(BigUint::one() << 1100u32));
        assert_eq!(tiny, 0.0f64.max(2f64.powi(-1000) * 2f64.powi(-100)));
    }
}
