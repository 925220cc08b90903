//! The one-dimensional sublinear generator `G`.

use crate::error::{Error, Result};

/// Monotone sublinear generator `G(a) = ½(σ_hi² a⁺ − σ_lo² a⁻)`, stored by its
/// variance interval `[σ_lo², σ_hi²]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GFunction {
    sigma_lo_sq: f64,
    sigma_hi_sq: f64,
}

impl GFunction {
    pub fn new(sigma_lo_sq: f64, sigma_hi_sq: f64) -> Result<Self> {
        if !(sigma_lo_sq.is_finite() && sigma_hi_sq.is_finite()) {
            return Err(Error::invalid("variance bounds must be finite"));
        }
        if sigma_lo_sq < 0.0 || sigma_hi_sq <= 0.0 || sigma_lo_sq > sigma_hi_sq {
            return Err(Error::invalid(format!(
                "need 0 <= sigma_lo_sq <= sigma_hi_sq and sigma_hi_sq > 0, got [{sigma_lo_sq}, {sigma_hi_sq}]"
            )));
        }
        Ok(GFunction {
            sigma_lo_sq,
            sigma_hi_sq,
        })
    }

    /// Linear case `G(a) = ½ s a`.
    pub fn classical(s: f64) -> Result<Self> {
        Self::new(s, s)
    }

    pub fn sigma_lo_sq(&self) -> f64 {
        self.sigma_lo_sq
    }

    pub fn sigma_hi_sq(&self) -> f64 {
        self.sigma_hi_sq
    }

    pub fn eval(&self, a: f64) -> f64 {
        0.5 * (self.sigma_hi_sq * a.max(0.0) - self.sigma_lo_sq * (-a).max(0.0))
    }

    /// The variance attaining the sup in `G(a) = sup_c ½ c a`; ties go to `σ_hi²`.
    pub fn maximizer(&self, a: f64) -> f64 {
        if a >= 0.0 {
            self.sigma_hi_sq
        } else {
            self.sigma_lo_sq
        }
    }

    /// Endpoints of the variance interval, low first.
    pub fn candidates(&self) -> [f64; 2] {
        [self.sigma_lo_sq, self.sigma_hi_sq]
    }

    /// `σ_lo² > 0`. Ergodic computations require this.
    pub fn is_nondegenerate(&self) -> bool {
        self.sigma_lo_sq > 0.0
    }

    pub fn contains(&self, c: f64) -> bool {
        c >= self.sigma_lo_sq && c <= self.sigma_hi_sq
    }

    pub fn require_nondegenerate(&self) -> Result<()> {
        if self.is_nondegenerate() {
            Ok(())
        } else {
            Err(Error::Degenerate {
                sigma_lo_sq: self.sigma_lo_sq,
            })
        }
    }
}

impl Default for GFunction {
    fn default() -> Self {
        GFunction {
            sigma_lo_sq: 0.25,
            sigma_hi_sq: 1.0,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn closed_form_examples() {
        let g = GFunction::new(0.25, 1.0).unwrap();
        assert_eq!(g.eval(2.0), 1.0);
        assert_eq!(g.eval(-2.0), -0.25);
        assert_eq!(g.eval(0.0), 0.0);
        assert_eq!(GFunction::new(0.0, 3.0).unwrap().eval(0.0), 0.0);
    }

    #[test]
    fn nondegeneracy() {
        assert!(GFunction::new(0.25, 1.0).unwrap().is_nondegenerate());
        assert!(!GFunction::new(0.0, 1.0).unwrap().is_nondegenerate());
        assert!(GFunction::new(1.0, 1.0).unwrap().is_nondegenerate());
        assert!(GFunction::new(0.0, 1.0).unwrap().require_nondegenerate().is_err());
    }

    #[test]
    fn rejects_bad_intervals() {
        assert!(GFunction::new(1.0, 0.5).is_err());
        assert!(GFunction::new(-0.1, 0.5).is_err());
        assert!(GFunction::new(0.0, 0.0).is_err());
        assert!(GFunction::new(0.0, f64::NAN).is_err());
    }

    // Dyadic inputs keep every operation exact, so the axioms are checked
    // with `<=` and `==` rather than a tolerance.
    #[test]
    fn axioms_exact_on_random_dyadic_inputs() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for g in [
            GFunction::new(0.25, 1.0).unwrap(),
            GFunction::new(0.0, 2.0).unwrap(),
            GFunction::new(0.5, 0.5).unwrap(),
        ] {
            for _ in 0..1000 {
                let a = rng.random_range(-1 << 20..1 << 20) as f64 / 1024.0;
                let b = rng.random_range(-1 << 20..1 << 20) as f64 / 1024.0;
                let lam = rng.random_range(0..64) as f64 / 8.0;
                let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
                assert!(g.eval(hi) >= g.eval(lo));
                assert!(g.eval(a + b) <= g.eval(a) + g.eval(b));
                assert_eq!(g.eval(lam * a), lam * g.eval(a));
                assert!(g.eval(a).abs() <= 0.5 * g.sigma_hi_sq() * a.abs());
                assert!(g.eval(hi) - g.eval(lo) >= 0.5 * g.sigma_lo_sq() * (hi - lo));
            }
        }
    }

    #[test]
    fn maximizer_attains_sup() {
        let g = GFunction::new(0.25, 1.0).unwrap();
        for a in [-3.0, -0.1, 0.0, 0.7, 5.0] {
            assert_eq!(0.5 * g.maximizer(a) * a, g.eval(a));
        }
    }
}
