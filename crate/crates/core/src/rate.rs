//! Exact retrieval rates.

use num_rational::Ratio;

/// Decoded information symbols per downloaded response, as a reduced fraction.
pub type Rate = Ratio<u64>;

pub fn rate(num: u64, den: u64) -> Rate {
    Ratio::new(num, den)
}

pub fn to_f64(r: &Rate) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}
