//! First-order jets: forward-mode derivatives carried alongside values.
//!
//! A [`Jet`] holds a value together with its partial derivatives with respect
//! to the chart coordinates. Seeding the coordinates and pushing them through
//! ordinary arithmetic yields exact first derivatives of any composite
//! expression, which is all the engine ever needs: every tensor formula
//! implemented here (Lie and double-bundle brackets, covariant derivatives,
//! torsions, Nijenhuis tensors, the canonical and Obata connections) is first
//! order in the field data. Quantities that would require second derivatives
//! (e.g. differentiating a bracket result again) never occur; composite
//! sections are instead differentiated as closures built from jet arithmetic.

use crate::error::{Error, Result};

/// Value plus partial derivatives with respect to the `n` chart coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct Jet {
    pub value: f64,
    pub partials: Vec<f64>,
}

impl Jet {
    /// A constant: value with all partials zero.
    pub fn constant(value: f64, n: usize) -> Jet {
        Jet { value, partials: vec![0.0; n] }
    }

    /// The `index`-th coordinate seeded at `value`: ∂(x_i)/∂(x_j) = δ_ij.
    pub fn var(value: f64, index: usize, n: usize) -> Jet {
        let mut partials = vec![0.0; n];
        partials[index] = 1.0;
        Jet { value, partials }
    }

    pub fn dim(&self) -> usize {
        self.partials.len()
    }

    /// Seed a full coordinate point. Rejects non-finite coordinates.
    pub fn seed(x: &[f64]) -> Result<Vec<Jet>> {
        for (index, &value) in x.iter().enumerate() {
            if !value.is_finite() {
                return Err(Error::InvalidPoint { index, value });
            }
        }
        Ok(x.iter()
            .enumerate()
            .map(|(i, &v)| Jet::var(v, i, x.len()))
            .collect())
    }

    fn zip(&self, other: &Jet, f: impl Fn(f64, f64) -> f64) -> Vec<f64> {
        debug_assert_eq!(self.dim(), other.dim());
        self.partials
            .iter()
            .zip(&other.partials)
            .map(|(&a, &b)| f(a, b))
            .collect()
    }

    /// Chain rule for a unary map: g(f) with given value and derivative g'(f).
    fn lift(&self, value: f64, dvalue: f64) -> Jet {
        Jet { value, partials: self.partials.iter().map(|&p| p * dvalue).collect() }
    }

    pub fn add(&self, o: &Jet) -> Jet {
        Jet { value: self.value + o.value, partials: self.zip(o, |a, b| a + b) }
    }

    pub fn sub(&self, o: &Jet) -> Jet {
        Jet { value: self.value - o.value, partials: self.zip(o, |a, b| a - b) }
    }

    pub fn mul(&self, o: &Jet) -> Jet {
        // Product rule: (fg)' = f'g + fg'.
        Jet {
            value: self.value * o.value,
            partials: self
                .partials
                .iter()
                .zip(&o.partials)
                .map(|(&a, &b)| a * o.value + self.value * b)
                .collect(),
        }
    }

    pub fn div(&self, o: &Jet) -> Result<Jet> {
        if o.value == 0.0 {
            return Err(Error::Eval("division by zero".into()));
        }
        // (f/g)' = (f'g - fg') / g².
        let g2 = o.value * o.value;
        Ok(Jet {
            value: self.value / o.value,
            partials: self
                .partials
                .iter()
                .zip(&o.partials)
                .map(|(&a, &b)| (a * o.value - self.value * b) / g2)
                .collect(),
        })
    }

    pub fn neg(&self) -> Jet {
        Jet { value: -self.value, partials: self.partials.iter().map(|&p| -p).collect() }
    }

    pub fn scale(&self, c: f64) -> Jet {
        Jet { value: c * self.value, partials: self.partials.iter().map(|&p| c * p).collect() }
    }

    pub fn sin(&self) -> Jet {
        self.lift(self.value.sin(), self.value.cos())
    }

    pub fn cos(&self) -> Jet {
        self.lift(self.value.cos(), -self.value.sin())
    }

    pub fn exp(&self) -> Jet {
        let e = self.value.exp();
        self.lift(e, e)
    }

    pub fn ln(&self) -> Result<Jet> {
        if self.value <= 0.0 {
            return Err(Error::Eval(format!("log of non-positive value {}", self.value)));
        }
        Ok(self.lift(self.value.ln(), 1.0 / self.value))
    }

    pub fn sinh(&self) -> Jet {
        self.lift(self.value.sinh(), self.value.cosh())
    }

    pub fn cosh(&self) -> Jet {
        self.lift(self.value.cosh(), self.value.sinh())
    }

    pub fn tanh(&self) -> Jet {
        let t = self.value.tanh();
        self.lift(t, 1.0 - t * t)
    }

    pub fn sqrt(&self) -> Result<Jet> {
        if self.value < 0.0 {
            return Err(Error::Eval(format!("sqrt of negative value {}", self.value)));
        }
        let s = self.value.sqrt();
        // Derivative 1/(2√f); at exactly zero this is infinite, which we let
        // propagate rather than mask.
        Ok(self.lift(s, 0.5 / s))
    }

    /// Power with a jet exponent. Integer constant exponents use the `powi`
    /// rule so that negative bases work ("-x^2" at x = -2 is fine); anything
    /// else goes through exp(b·ln a) and requires a positive base.
    pub fn pow(&self, exponent: &Jet) -> Result<Jet> {
        let constant_exp = exponent.partials.iter().all(|&p| p == 0.0);
        let int_exp = exponent.value.fract() == 0.0 && exponent.value.abs() < 2_147_483_647.0;
        if constant_exp && int_exp {
            let k = exponent.value as i32;
            if k == 0 {
                return Ok(Jet::constant(1.0, self.dim()));
            }
            if self.value == 0.0 && k < 0 {
                return Err(Error::Eval("zero raised to a negative power".into()));
            }
            let value = self.value.powi(k);
            // d(f^k) = k f^(k-1) f'
            let dvalue = f64::from(k) * self.value.powi(k - 1);
            return Ok(self.lift(value, dvalue));
        }
        if self.value <= 0.0 {
            return Err(Error::Eval(format!(
                "power with non-positive base {} and non-integer exponent",
                self.value
            )));
        }
        let value = self.value.powf(exponent.value);
        // d(a^b) = a^b (b' ln a + b a'/a)
        let ln_a = self.value.ln();
        Ok(Jet {
            value,
            partials: self
                .partials
                .iter()
                .zip(&exponent.partials)
                .map(|(&da, &db)| value * (db * ln_a + exponent.value * da / self.value))
                .collect(),
        })
    }
}

macro_rules! jet_binop {
    ($trait:ident, $method:ident, $imp:ident) => {
        impl std::ops::$trait for &Jet {
            type Output = Jet;
            fn $method(self, rhs: &Jet) -> Jet {
                self.$imp(rhs)
            }
        }
        impl std::ops::$trait for Jet {
            type Output = Jet;
            fn $method(self, rhs: Jet) -> Jet {
                (&self).$imp(&rhs)
            }
        }
    };
}

jet_binop!(Add, add, add);
jet_binop!(Sub, sub, sub);
jet_binop!(Mul, mul, mul);

impl std::ops::Neg for &Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        Jet::neg(self)
    }
}

/// Central finite differences, the independent oracle the jet arithmetic is
/// validated against.
pub fn fd_gradient(
    f: impl Fn(&[f64]) -> Result<f64>,
    x: &[f64],
    step: f64,
) -> Result<Vec<f64>> {
    let mut grad = Vec::with_capacity(x.len());
    let mut probe = x.to_vec();
    for i in 0..x.len() {
        probe[i] = x[i] + step;
        let hi = f(&probe)?;
        probe[i] = x[i] - step;
        let lo = f(&probe)?;
        probe[i] = x[i];
        grad.push((hi - lo) / (2.0 * step));
    }
    Ok(grad)
}

/// Default step for the finite-difference oracle.
pub const FD_STEP: f64 = 1e-5;

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()))
    }

    #[test]
    fn seeding_sets_unit_partials() {
        let jets = Jet::seed(&[1.5, -2.0]).unwrap();
        assert_eq!(jets[0].value, 1.5);
        assert_eq!(jets[0].partials, vec![1.0, 0.0]);
        assert_eq!(jets[1].partials, vec![0.0, 1.0]);
    }

    #[test]
    fn seeding_rejects_non_finite() {
        let err = Jet::seed(&[1.0, f64::NAN]).unwrap_err();
        assert!(matches!(err, Error::InvalidPoint { index: 1, .. }));
        assert!(matches!(
            Jet::seed(&[f64::INFINITY]).unwrap_err(),
            Error::InvalidPoint { index: 0, .. }
        ));
    }

    #[test]
    fn exp_of_square_matches_hand_derivative() {
        // f(x) = exp(x²) at x = 1: value e, derivative 2e.
        let x = Jet::var(1.0, 0, 1);
        let f = x.mul(&x).exp();
        assert!(close(f.value, std::f64::consts::E, 1e-12));
        assert!(close(f.partials[0], 2.0 * std::f64::consts::E, 1e-12));
    }

    #[test]
    fn division_by_zero_value_errors() {
        let a = Jet::constant(1.0, 1);
        let b = Jet::constant(0.0, 1);
        assert!(matches!(a.div(&b), Err(Error::Eval(_))));
    }

    #[test]
    fn domain_errors() {
        let neg = Jet::constant(-1.0, 1);
        assert!(neg.ln().is_err());
        assert!(neg.sqrt().is_err());
        // Non-integer exponent on a negative base is rejected...
        let half = Jet::constant(0.5, 1);
        assert!(neg.pow(&half).is_err());
        // ...but integer exponents are fine.
        let two = Jet::constant(2.0, 1);
        assert_eq!(neg.pow(&two).unwrap().value, 1.0);
    }

    #[test]
    fn integer_power_of_negative_base() {
        let x = Jet::var(-2.0, 0, 1);
        let three = Jet::constant(3.0, 1);
        let p = x.pow(&three).unwrap();
        assert!(close(p.value, -8.0, 1e-14));
        assert!(close(p.partials[0], 12.0, 1e-14)); // 3x² at -2
    }

    #[test]
    fn general_power_matches_exp_log_form() {
        let x = Jet::var(1.7, 0, 2);
        let y = Jet::var(0.6, 1, 2);
        let direct = x.pow(&y).unwrap();
        let via_log = y.mul(&x.ln().unwrap()).exp();
        assert!(close(direct.value, via_log.value, 1e-13));
        for i in 0..2 {
            assert!(close(direct.partials[i], via_log.partials[i], 1e-13));
        }
    }

    #[test]
    fn gradient_matches_central_differences() {
        // A composite touching every operation once.
        let f = |x: &[f64]| -> Result<f64> {
            let j = Jet::seed(x)?;
            let e = j[0]
                .sin()
                .add(&j[1].cos())
                .mul(&j[0].mul(&j[1]).exp())
                .add(&j[0].sinh().mul(&j[1].tanh()))
                .add(&j[0].cosh())
                .sub(&j[1].mul(&j[1]))
                .add(&j[0].add(&Jet::constant(2.0, 2)).sqrt()?)
                .add(&j[1].add(&Jet::constant(3.0, 2)).ln()?)
                .div(&j[0].add(&Jet::constant(4.0, 2)))?;
            Ok(e.value)
        };
        let x = [0.7, -0.4];
        let jets = Jet::seed(&x).unwrap();
        let e = jets[0]
            .sin()
            .add(&jets[1].cos())
            .mul(&jets[0].mul(&jets[1]).exp())
            .add(&jets[0].sinh().mul(&jets[1].tanh()))
            .add(&jets[0].cosh())
            .sub(&jets[1].mul(&jets[1]))
            .add(&jets[0].add(&Jet::constant(2.0, 2)).sqrt().unwrap())
            .add(&jets[1].add(&Jet::constant(3.0, 2)).ln().unwrap())
            .div(&jets[0].add(&Jet::constant(4.0, 2)))
            .unwrap();
        let fd = fd_gradient(f, &x, FD_STEP).unwrap();
        for i in 0..2 {
            let rel = (e.partials[i] - fd[i]).abs() / fd[i].abs().max(1.0);
            assert!(rel <= 1e-4, "component {i}: jet {} vs fd {}", e.partials[i], fd[i]);
        }
    }

    proptest! {
        #[test]
        fn ring_laws_hold_pointwise(a in -3.0f64..3.0, b in -3.0f64..3.0, c in -3.0f64..3.0) {
            let x = Jet::var(a, 0, 2);
            let y = Jet::var(b, 1, 2);
            let z = Jet::constant(c, 2);
            let left = x.mul(&y.add(&z));
            let right = x.mul(&y).add(&x.mul(&z));
            prop_assert!(close(left.value, right.value, 1e-12));
            for i in 0..2 {
                prop_assert!(close(left.partials[i], right.partials[i], 1e-12));
            }
        }

        #[test]
        fn product_rule_is_leibniz(a in 0.1f64..2.0, b in 0.1f64..2.0) {
            let x = Jet::var(a, 0, 1);
            let f = x.sin();
            let g = Jet::constant(b, 1).add(&x.mul(&x));
            let fg = f.mul(&g);
            let expected = f.partials[0] * g.value + f.value * g.partials[0];
            prop_assert!(close(fg.partials[0], expected, 1e-12));
        }
    }
}
