use std::f64::consts::FRAC_PI_2;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::function::{ctanh, sech2, RealFunction};
use crate::error::{Error, Result};

/// `f(t) = sum_i w_i tanh(alpha_hat (t - s_i)) + d` with `w_i >= 0` and
/// `alpha * alpha_hat = pi/2`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TanhMeasure {
    atoms: Vec<(f64, f64)>,
    offset: f64,
    alpha: f64,
}

impl TanhMeasure {
    pub fn new(atoms: Vec<(f64, f64)>, offset: f64, alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(Error::invalid(format!("alpha must be positive, got {alpha}")));
        }
        if let Some(&(s, w)) = atoms
            .iter()
            .find(|&&(s, w)| !(w >= 0.0) || !w.is_finite() || !s.is_finite())
        {
            return Err(Error::invalid(format!(
                "atom ({s}, {w}) must have a finite location and a finite nonnegative weight"
            )));
        }
        if !offset.is_finite() {
            return Err(Error::invalid("offset must be finite"));
        }
        Ok(TanhMeasure {
            atoms,
            offset,
            alpha,
        })
    }

    pub fn atoms(&self) -> &[(f64, f64)] {
        &self.atoms
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn alpha_hat(&self) -> f64 {
        FRAC_PI_2 / self.alpha
    }

    pub fn total_weight(&self) -> f64 {
        self.atoms.iter().map(|a| a.1).sum()
    }

    pub fn bracket(&self) -> VariationBracket {
        VariationBracket {
            value: 2.0 * self.total_weight(),
        }
    }

    pub fn eval_real(&self, t: f64) -> f64 {
        let a = self.alpha_hat();
        self.atoms
            .iter()
            .map(|&(s, w)| w * (a * (t - s)).tanh())
            .sum::<f64>()
            + self.offset
    }

    pub fn eval_complex(&self, z: Complex64) -> Complex64 {
        let a = self.alpha_hat();
        self.atoms
            .iter()
            .map(|&(s, w)| ctanh((z - s) * a) * w)
            .sum::<Complex64>()
            + self.offset
    }

    pub fn derivative(&self, t: f64) -> f64 {
        let a = self.alpha_hat();
        a * self
            .atoms
            .iter()
            .map(|&(s, w)| w * sech2(a * (t - s)))
            .sum::<f64>()
    }

    /// Same measure with the weight of `index` replaced (may be negative;
    /// used to build counterexamples, so no validation).
    pub fn with_weight_unchecked(&self, index: usize, w: f64) -> TanhMeasure {
        let mut m = self.clone();
        m.atoms[index].1 = w;
        m
    }

    pub fn reflect(&self) -> TanhMeasure {
        TanhMeasure {
            atoms: self.atoms.iter().map(|&(s, w)| (-s, w)).collect(),
            offset: -self.offset,
            alpha: self.alpha,
        }
    }

    pub fn into_function(self) -> RealFunction {
        RealFunction::TanhMeasure(self)
    }
}

/// Total variation `[f] = f(inf) - f(-inf)` of a bounded monotone function.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct VariationBracket {
    value: f64,
}

impl VariationBracket {
    pub fn new(value: f64) -> Result<Self> {
        if value >= 0.0 && value.is_finite() {
            Ok(VariationBracket { value })
        } else {
            Err(Error::invalid(format!(
                "variation bracket must be finite and nonnegative, got {value}"
            )))
        }
    }

    pub fn of(f: &RealFunction) -> Result<Self> {
        let b = f
            .bracket()
            .ok_or_else(|| Error::invalid("function has no limits at infinity"))?;
        Self::new(b)
    }

    pub fn value(&self) -> f64 {
        self.value
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_atom_limits() {
        let m = TanhMeasure::new(vec![(0.0, 1.0)], 0.0, FRAC_PI_2).unwrap();
        assert_eq!(m.eval_real(0.0), 0.0);
        assert!((m.eval_real(60.0) - 1.0).abs() < 1e-15);
        assert_eq!(m.alpha() * m.alpha_hat(), FRAC_PI_2);
        assert_eq!(m.bracket().value(), 2.0);
    }

    #[test]
    fn rejects_negative_weight() {
        assert!(TanhMeasure::new(vec![(0.0, -0.1)], 0.0, 1.0).is_err());
        assert!(TanhMeasure::new(vec![(0.0, 0.1)], 0.0, 0.0).is_err());
    }
}
