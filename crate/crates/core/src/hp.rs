//! 192-bit float helpers.

use crate::error::{Error, Result};
use astro_float::{BigFloat, Consts, RoundingMode};

pub(crate) const PREC: usize = 192;

pub(crate) struct Hp {
    pub rm: RoundingMode,
    pub cc: Consts,
}

impl Hp {
    pub fn new() -> Result<Self> {
        let cc = Consts::new().map_err(|e| Error::Numeric(format!("high-precision constants: {e:?}")))?;
        Ok(Self { rm: RoundingMode::ToEven, cc })
    }

    pub fn f(&self, v: f64) -> BigFloat {
        BigFloat::from_f64(v, PREC)
    }

    pub fn to_f64(x: &BigFloat) -> Result<f64> {
        if x.is_zero() {
            return Ok(0.0);
        }
        format!("{x}").parse::<f64>().map_err(|_| Error::Numeric(format!("cannot convert {x} to f64")))
    }

    /// `exp(-(ln x)^2)`.
    pub fn witness(&mut self, x: &BigFloat) -> BigFloat {
        let l = x.ln(PREC, self.rm, &mut self.cc);
        l.mul(&l, PREC, self.rm).neg().exp(PREC, self.rm, &mut self.cc)
    }
}
