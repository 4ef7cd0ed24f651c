//! Float formatting shared by the file formats.

use crate::error::{Error, Result};

/// Shortest representation that parses back to the same bits.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:?}")
}

pub fn parse_f64(s: &str) -> Result<f64> {
    let s = s.trim();
    s.parse::<f64>().map_err(|_| Error::Parse(format!("'{s}' is not a number")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_bits() {
        for x in [0.1, -0.0, 1e-300, 123456.789, f64::MAX, f64::MIN_POSITIVE, 1.0 / 3.0] {
            assert_eq!(parse_f64(&fmt_f64(x)).unwrap().to_bits(), x.to_bits());
        }
        assert!(parse_f64(&fmt_f64(f64::NAN)).unwrap().is_nan());
        assert!(parse_f64("abc").is_err());
    }
}
