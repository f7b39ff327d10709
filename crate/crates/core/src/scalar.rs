//! Numeric scalars accepted by the evaluator.

use std::fmt::{Debug, Display};

use num_traits::{Num, ToPrimitive};

use crate::decimal::Decimal;

/// A number type the cost and score computations can run over: the binary
/// floats or the exact [`Decimal`].
pub trait Scalar:
    Num + Copy + PartialOrd + Debug + Display + ToPrimitive + Send + Sync + 'static
{
    fn from_decimal(d: Decimal) -> Self;

    fn from_usize(n: usize) -> Self;
}

impl Scalar for f64 {
    fn from_decimal(d: Decimal) -> Self {
        d.to_f64()
    }
    fn from_usize(n: usize) -> Self {
        n as f64
    }
}

impl Scalar for f32 {
    fn from_decimal(d: Decimal) -> Self {
        d.to_f64() as f32
    }
    fn from_usize(n: usize) -> Self {
        n as f32
    }
}

impl Scalar for Decimal {
    fn from_decimal(d: Decimal) -> Self {
        d
    }
    fn from_usize(n: usize) -> Self {
        Decimal::from_int(n as i64)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn conversions_agree() {
        let d: Decimal = "0.25".parse().unwrap();
        assert_eq!(f64::from_decimal(d), 0.25);
        assert_eq!(f32::from_decimal(d), 0.25);
        assert_eq!(<Decimal as Scalar>::from_usize(4), Decimal::from_int(4));
        assert_eq!(<f64 as Scalar>::from_usize(3), 3.0);
    }
}
