//! Second-order forward-mode differentiation over complex scalars.
//!
//! A [`Jet`] carries a value, its gradient and its Hessian with respect to a
//! fixed number of independent variables. Holomorphic and antiholomorphic
//! derivatives are obtained by treating `z` and `w = z̄` as independent
//! variables (polarisation) and evaluating at `w = conj(z)`.

use std::ops::{Add, Div, Mul, Neg, Sub};

use crate::C64;

#[derive(Debug, Clone, PartialEq)]
pub struct Jet {
    pub v: C64,
    pub g: Vec<C64>,
    /// Row-major `dim × dim` Hessian.
    pub h: Vec<C64>,
}

impl Jet {
    pub fn constant(v: C64, dim: usize) -> Self {
        Self { v, g: vec![C64::new(0.0, 0.0); dim], h: vec![C64::new(0.0, 0.0); dim * dim] }
    }

    /// Independent variable number `k` at value `v`.
    pub fn variable(v: C64, k: usize, dim: usize) -> Self {
        let mut j = Self::constant(v, dim);
        j.g[k] = C64::new(1.0, 0.0);
        j
    }

    /// Seeds one jet per entry of `values`.
    pub fn variables(values: &[C64]) -> Vec<Jet> {
        let d = values.len();
        values.iter().enumerate().map(|(k, &v)| Jet::variable(v, k, d)).collect()
    }

    pub fn dim(&self) -> usize {
        self.g.len()
    }

    #[inline]
    pub fn hess(&self, i: usize, j: usize) -> C64 {
        self.h[i * self.dim() + j]
    }

    /// Applies a scalar function given its value and first two derivatives.
    pub fn chain(&self, f: C64, df: C64, d2f: C64) -> Jet {
        let d = self.dim();
        let mut h = vec![C64::new(0.0, 0.0); d * d];
        for i in 0..d {
            for j in 0..d {
                h[i * d + j] = df * self.h[i * d + j] + d2f * self.g[i] * self.g[j];
            }
        }
        Jet { v: f, g: self.g.iter().map(|x| df * x).collect(), h }
    }

    pub fn powi(&self, n: i32) -> Jet {
        let nf = n as f64;
        let f = self.v.powi(n);
        let df = if n == 0 { C64::new(0.0, 0.0) } else { self.v.powi(n - 1) * nf };
        let d2f = if n == 0 || n == 1 { C64::new(0.0, 0.0) } else { self.v.powi(n - 2) * (nf * (nf - 1.0)) };
        self.chain(f, df, d2f)
    }

    /// Principal-branch power with a real exponent.
    pub fn powf(&self, s: f64) -> Jet {
        let f = self.v.powf(s);
        self.chain(f, f * s / self.v, f * (s * (s - 1.0)) / (self.v * self.v))
    }

    pub fn recip(&self) -> Jet {
        let r = 1.0 / self.v;
        self.chain(r, -r * r, 2.0 * r * r * r)
    }

    pub fn ln(&self) -> Jet {
        let r = 1.0 / self.v;
        self.chain(self.v.ln(), r, -r * r)
    }

    pub fn scale(&self, s: C64) -> Jet {
        Jet { v: self.v * s, g: self.g.iter().map(|x| x * s).collect(), h: self.h.iter().map(|x| x * s).collect() }
    }

    pub fn add_scalar(&self, s: C64) -> Jet {
        let mut out = self.clone();
        out.v += s;
        out
    }
}

impl Add for &Jet {
    type Output = Jet;
    fn add(self, o: &Jet) -> Jet {
        Jet {
            v: self.v + o.v,
            g: self.g.iter().zip(&o.g).map(|(a, b)| a + b).collect(),
            h: self.h.iter().zip(&o.h).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &Jet {
    type Output = Jet;
    fn sub(self, o: &Jet) -> Jet {
        Jet {
            v: self.v - o.v,
            g: self.g.iter().zip(&o.g).map(|(a, b)| a - b).collect(),
            h: self.h.iter().zip(&o.h).map(|(a, b)| a - b).collect(),
        }
    }
}

impl Mul for &Jet {
    type Output = Jet;
    fn mul(self, o: &Jet) -> Jet {
        let d = self.dim();
        let mut h = vec![C64::new(0.0, 0.0); d * d];
        for i in 0..d {
            for j in 0..d {
                let k = i * d + j;
                h[k] = self.v * o.h[k] + o.v * self.h[k] + self.g[i] * o.g[j] + self.g[j] * o.g[i];
            }
        }
        Jet { v: self.v * o.v, g: self.g.iter().zip(&o.g).map(|(a, b)| self.v * b + o.v * a).collect(), h }
    }
}

impl Div for &Jet {
    type Output = Jet;
    fn div(self, o: &Jet) -> Jet {
        self * &o.recip()
    }
}

impl Neg for &Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale(C64::new(-1.0, 0.0))
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr for Jet {
            type Output = Jet;
            fn $m(self, o: Jet) -> Jet {
                (&self).$m(&o)
            }
        }
        impl $tr<&Jet> for Jet {
            type Output = Jet;
            fn $m(self, o: &Jet) -> Jet {
                (&self).$m(o)
            }
        }
        impl $tr<Jet> for &Jet {
            type Output = Jet;
            fn $m(self, o: Jet) -> Jet {
                self.$m(&o)
            }
        }
    };
}

forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);
forward_owned!(Div, div);
