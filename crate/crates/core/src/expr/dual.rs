//! Forward-mode dual numbers over a runtime-sized partial vector.

use std::ops::{Add, Div, Mul, Neg, Sub};

use crate::Scalar;

/// Value together with its exact first-order partial derivatives with
/// respect to every chart coordinate.
#[derive(Debug, Clone, PartialEq)]
pub struct Dual<T> {
    pub value: T,
    pub partials: Vec<T>,
}

impl<T: Scalar> Dual<T> {
    /// A constant: all partials zero.
    pub fn constant(value: T, dimension: usize) -> Dual<T> {
        Dual {
            value,
            partials: vec![T::zero(); dimension],
        }
    }

    /// The `index`-th coordinate at `value`: partials form a basis vector.
    pub fn variable(value: T, index: usize, dimension: usize) -> Dual<T> {
        let mut partials = vec![T::zero(); dimension];
        partials[index] = T::one();
        Dual { value, partials }
    }

    fn map_chain(mut self, value: T, factor: T) -> Dual<T> {
        for p in &mut self.partials {
            *p = *p * factor;
        }
        Dual {
            value,
            partials: self.partials,
        }
    }

    pub fn sin(self) -> Dual<T> {
        let (v, c) = (self.value.sin(), self.value.cos());
        self.map_chain(v, c)
    }

    pub fn cos(self) -> Dual<T> {
        let (v, s) = (self.value.cos(), self.value.sin());
        self.map_chain(v, -s)
    }

    pub fn tan(self) -> Dual<T> {
        let v = self.value.tan();
        let c = self.value.cos();
        self.map_chain(v, (c * c).recip())
    }

    pub fn exp(self) -> Dual<T> {
        let v = self.value.exp();
        self.map_chain(v, v)
    }

    /// Natural logarithm; caller must ensure the value is positive.
    pub fn ln(self) -> Dual<T> {
        let v = self.value.ln();
        let d = self.value.recip();
        self.map_chain(v, d)
    }

    /// Square root; caller must ensure the value is strictly positive
    /// (the derivative is undefined at zero).
    pub fn sqrt(self) -> Dual<T> {
        let v = self.value.sqrt();
        let d = (T::of(2.0) * v).recip();
        self.map_chain(v, d)
    }

    pub fn is_constant(&self) -> bool {
        self.partials.iter().all(|p| p.is_zero())
    }
}

impl<T: Scalar> Neg for Dual<T> {
    type Output = Dual<T>;
    fn neg(mut self) -> Dual<T> {
        self.value = -self.value;
        for p in &mut self.partials {
            *p = -*p;
        }
        self
    }
}

impl<T: Scalar> Add for Dual<T> {
    type Output = Dual<T>;
    fn add(mut self, rhs: Dual<T>) -> Dual<T> {
        self.value = self.value + rhs.value;
        for (p, q) in self.partials.iter_mut().zip(rhs.partials) {
            *p = *p + q;
        }
        self
    }
}

impl<T: Scalar> Sub for Dual<T> {
    type Output = Dual<T>;
    fn sub(mut self, rhs: Dual<T>) -> Dual<T> {
        self.value = self.value - rhs.value;
        for (p, q) in self.partials.iter_mut().zip(rhs.partials) {
            *p = *p - q;
        }
        self
    }
}

impl<T: Scalar> Mul for Dual<T> {
    type Output = Dual<T>;
    fn mul(mut self, rhs: Dual<T>) -> Dual<T> {
        for (p, q) in self.partials.iter_mut().zip(&rhs.partials) {
            *p = *p * rhs.value + self.value * *q;
        }
        self.value = self.value * rhs.value;
        self
    }
}

impl<T: Scalar> Div for Dual<T> {
    type Output = Dual<T>;
    fn div(mut self, rhs: Dual<T>) -> Dual<T> {
        let denom = rhs.value * rhs.value;
        for (p, q) in self.partials.iter_mut().zip(&rhs.partials) {
            *p = (*p * rhs.value - self.value * *q) / denom;
        }
        self.value = self.value / rhs.value;
        self
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn product_rule() {
        let x = Dual::variable(2.0_f64, 0, 2);
        let y = Dual::variable(3.0_f64, 1, 2);
        let p = x * y;
        assert_eq!(p.value, 6.0);
        assert_eq!(p.partials, vec![3.0, 2.0]);
    }

    #[test]
    fn quotient_rule() {
        let x = Dual::variable(1.0_f64, 0, 1);
        let q = Dual::constant(1.0, 1) / (x.clone() * x);
        // d/dx x^-2 = -2 x^-3 = -2 at x = 1
        assert!((q.partials[0] + 2.0).abs() < 1e-15);
    }

    #[test]
    fn chain_rule_exp() {
        let x = Dual::variable(0.5_f64, 0, 1);
        let e = x.exp();
        assert!((e.partials[0] - 0.5_f64.exp()).abs() < 1e-15);
    }
}
