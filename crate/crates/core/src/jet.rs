//! Truncated Taylor series ("jets") for exact derivatives of closed-form
//! multipliers and cut-offs. Coefficient `k` holds `f^{(k)}(x0) / k!`.

use num_complex::Complex64;
use std::ops::{Add, Mul, Neg, Sub};

#[derive(Debug, Clone, PartialEq)]
pub struct Jet {
    c: Vec<Complex64>,
}

impl Jet {
    pub fn constant(v: Complex64, order: usize) -> Self {
        let mut c = vec![Complex64::new(0.0, 0.0); order + 1];
        c[0] = v;
        Jet { c }
    }

    pub fn real(v: f64, order: usize) -> Self {
        Self::constant(Complex64::new(v, 0.0), order)
    }

    /// The identity function expanded at `x0`.
    pub fn variable(x0: f64, order: usize) -> Self {
        let mut j = Self::real(x0, order);
        if order >= 1 {
            j.c[1] = Complex64::new(1.0, 0.0);
        }
        j
    }

    pub fn order(&self) -> usize {
        self.c.len() - 1
    }

    pub fn value(&self) -> Complex64 {
        self.c[0]
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.c
    }

    /// `f^{(k)}(x0)`
    pub fn derivative(&self, k: usize) -> Complex64 {
        let fact: f64 = (1..=k).map(|i| i as f64).product();
        self.c.get(k).copied().unwrap_or_default() * fact
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Jet { c: self.c.iter().map(|v| v * s).collect() }
    }

    pub fn add_scalar(&self, s: Complex64) -> Self {
        let mut out = self.clone();
        out.c[0] += s;
        out
    }

    pub fn exp(&self) -> Self {
        let n = self.c.len();
        let mut g = vec![Complex64::new(0.0, 0.0); n];
        g[0] = self.c[0].exp();
        for k in 1..n {
            let mut acc = Complex64::new(0.0, 0.0);
            for j in 1..=k {
                acc += self.c[j] * g[k - j] * j as f64;
            }
            g[k] = acc / k as f64;
        }
        Jet { c: g }
    }

    /// Principal logarithm; the expansion point must not be zero.
    pub fn ln(&self) -> Self {
        let n = self.c.len();
        let f0 = self.c[0];
        let mut g = vec![Complex64::new(0.0, 0.0); n];
        g[0] = f0.ln();
        for k in 1..n {
            let mut acc = self.c[k] * k as f64;
            for j in 1..k {
                acc -= g[j] * self.c[k - j] * j as f64;
            }
            g[k] = acc / (f0 * k as f64);
        }
        Jet { c: g }
    }

    pub fn recip(&self) -> Self {
        let n = self.c.len();
        let f0 = self.c[0];
        let mut g = vec![Complex64::new(0.0, 0.0); n];
        g[0] = f0.inv();
        for k in 1..n {
            let mut acc = Complex64::new(0.0, 0.0);
            for j in 1..=k {
                acc += self.c[j] * g[k - j];
            }
            g[k] = -acc / f0;
        }
        Jet { c: g }
    }

    /// `self^p` for complex `p`, through `exp(p ln self)`.
    pub fn powc(&self, p: Complex64) -> Self {
        self.ln().scale(p).exp()
    }

    /// Rescale the expansion variable: if `self` expands `f` at `t x0`,
    /// the result expands `x -> f(t x)` at `x0`.
    pub fn chain_scale(&self, t: f64) -> Self {
        let mut pow = 1.0;
        let c = self
            .c
            .iter()
            .map(|v| {
                let out = v * pow;
                pow *= t;
                out
            })
            .collect();
        Jet { c }
    }
}

impl Add for &Jet {
    type Output = Jet;
    fn add(self, rhs: &Jet) -> Jet {
        Jet { c: self.c.iter().zip(&rhs.c).map(|(a, b)| a + b).collect() }
    }
}

impl Sub for &Jet {
    type Output = Jet;
    fn sub(self, rhs: &Jet) -> Jet {
        Jet { c: self.c.iter().zip(&rhs.c).map(|(a, b)| a - b).collect() }
    }
}

impl Neg for &Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        Jet { c: self.c.iter().map(|a| -a).collect() }
    }
}

impl Mul for &Jet {
    type Output = Jet;
    fn mul(self, rhs: &Jet) -> Jet {
        let n = self.c.len().min(rhs.c.len());
        let mut c = vec![Complex64::new(0.0, 0.0); n];
        for (k, ck) in c.iter_mut().enumerate() {
            for j in 0..=k {
                *ck += self.c[j] * rhs.c[k - j];
            }
        }
        Jet { c }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
        (a - b).norm() <= tol * (1.0 + b.norm())
    }

    #[test]
    fn exp_of_linear() {
        let x = Jet::variable(0.7, 5);
        let e = x.scale(Complex64::new(2.0, 0.0)).exp();
        for k in 0..=5 {
            let expect = 2f64.powi(k as i32) * (1.4f64).exp();
            assert!(close(e.derivative(k), Complex64::new(expect, 0.0), 1e-13));
        }
    }

    #[test]
    fn ln_recip_pow_consistent() {
        let x = Jet::variable(1.3, 6);
        let r = x.recip();
        let p = x.powc(Complex64::new(-1.0, 0.0));
        for k in 0..=6 {
            assert!(close(r.derivative(k), p.derivative(k), 1e-12));
        }
        let l = x.ln();
        assert!(close(l.derivative(1), Complex64::new(1.0 / 1.3, 0.0), 1e-14));
        assert!(close(l.derivative(2), Complex64::new(-1.0 / 1.69, 0.0), 1e-14));
    }

    #[test]
    fn product_rule() {
        let x = Jet::variable(0.4, 4);
        let f = x.exp();
        let g = &x * &x;
        let fg = &f * &g;
        // (x^2 e^x)'' = (x^2 + 4x + 2) e^x
        let expect = (0.16 + 1.6 + 2.0) * 0.4f64.exp();
        assert!(close(fg.derivative(2), Complex64::new(expect, 0.0), 1e-13));
    }

    #[test]
    fn chain_scale_matches_dilation() {
        let t = 2.5;
        let inner = Jet::variable(t * 0.3, 4).exp();
        let dil = inner.chain_scale(t);
        for k in 0..=4 {
            let expect = t.powi(k as i32) * (t * 0.3f64).exp();
            assert!(close(dil.derivative(k), Complex64::new(expect, 0.0), 1e-13));
        }
    }
}
