//! Forward-mode automatic differentiation with truncated Taylor coefficients.
//!
//! A [`Jet`] carries the value of an expression together with all partial
//! derivatives up to a chosen order (1, 2 or 3) with respect to up to
//! [`MAX_VARS`] variables. Mixed partials are stored once in canonical
//! (sorted-index) order, so symmetry holds exactly by construction.
//!
//! Seeding the ten policy logits of both agents jointly means a single
//! evaluation of the value function yields every gradient, cross-Hessian
//! and third-order block the learning rules need.

use std::ops::{Add, Div, Mul, Neg, Sub};

/// Maximum number of seeded variables.
pub const MAX_VARS: usize = 10;
/// Maximum truncation order.
pub const MAX_ORDER: usize = 3;

// 1 + 10 + 55 + 220 coefficients at order 3 over 10 variables.
const CAP: usize = 286;

/// Canonical index of the second-order coefficient (i, j) with i <= j.
#[inline]
fn pair_idx(n: usize, i: usize, j: usize) -> usize {
    debug_assert!(i <= j && j < n);
    i * (2 * n - i + 1) / 2 + (j - i)
}

/// Canonical index of the third-order coefficient (i, j, k) with i <= j <= k.
#[inline]
fn triple_idx(n: usize, i: usize, j: usize, k: usize) -> usize {
    debug_assert!(i <= j && j <= k && k < n);
    let mut base = 0;
    for a in 0..i {
        let m = n - a;
        base += m * (m + 1) / 2;
    }
    base + pair_idx(n - i, j - i, k - i)
}

fn coef_len(nvars: usize, order: usize) -> usize {
    let n = nvars;
    let mut len = 1 + n;
    if order >= 2 {
        len += n * (n + 1) / 2;
    }
    if order >= 3 {
        len += n * (n + 1) * (n + 2) / 6;
    }
    len
}

/// Truncated Taylor value over `nvars` variables up to order `order`.
#[derive(Clone, Copy)]
pub struct Jet {
    order: u8,
    nvars: u8,
    coef: [f64; CAP],
}

impl Jet {
    /// A constant: value only, all derivative coefficients zero.
    pub fn constant(value: f64, nvars: usize, order: usize) -> Jet {
        assert!(
            (1..=MAX_ORDER).contains(&order),
            "jet order {order} out of range 1..=3"
        );
        assert!(
            (1..=MAX_VARS).contains(&nvars),
            "jet variable count {nvars} out of range 1..=10"
        );
        let mut coef = [0.0; CAP];
        coef[0] = value;
        Jet {
            order: order as u8,
            nvars: nvars as u8,
            coef,
        }
    }

    /// The `index`-th variable: first partial 1 with respect to itself.
    pub fn variable(value: f64, index: usize, nvars: usize, order: usize) -> Jet {
        assert!(index < nvars, "variable index {index} >= nvars {nvars}");
        let mut jet = Jet::constant(value, nvars, order);
        jet.coef[1 + index] = 1.0;
        jet
    }

    /// Seed all variables jointly: one jet per input value.
    pub fn seed_variables(values: &[f64], order: usize) -> Vec<Jet> {
        let n = values.len();
        values
            .iter()
            .enumerate()
            .map(|(i, &v)| Jet::variable(v, i, n, order))
            .collect()
    }

    pub fn order(&self) -> usize {
        self.order as usize
    }

    pub fn nvars(&self) -> usize {
        self.nvars as usize
    }

    pub fn value(&self) -> f64 {
        self.coef[0]
    }

    /// First partial with respect to variable `i`.
    pub fn grad(&self, i: usize) -> f64 {
        assert!(i < self.nvars());
        self.coef[1 + i]
    }

    /// Second partial d2/dxi dxj; index order is irrelevant.
    pub fn hess(&self, i: usize, j: usize) -> f64 {
        assert!(self.order() >= 2, "jet order {} has no Hessian", self.order);
        let n = self.nvars();
        assert!(i < n && j < n);
        let (i, j) = if i <= j { (i, j) } else { (j, i) };
        self.coef[1 + n + pair_idx(n, i, j)]
    }

    /// Third partial d3/dxi dxj dxk; index order is irrelevant.
    pub fn third(&self, i: usize, j: usize, k: usize) -> f64 {
        assert!(
            self.order() >= 3,
            "jet order {} has no third-order coefficients",
            self.order
        );
        let n = self.nvars();
        assert!(i < n && j < n && k < n);
        let mut idx = [i, j, k];
        idx.sort_unstable();
        self.coef[1 + n + n * (n + 1) / 2 + triple_idx(n, idx[0], idx[1], idx[2])]
    }

    /// Full gradient vector.
    pub fn gradient(&self) -> Vec<f64> {
        (0..self.nvars()).map(|i| self.grad(i)).collect()
    }

    /// Full symmetric Hessian matrix.
    pub fn hessian(&self) -> Vec<Vec<f64>> {
        let n = self.nvars();
        (0..n)
            .map(|i| (0..n).map(|j| self.hess(i, j)).collect())
            .collect()
    }

    /// Full symmetric third-order tensor.
    pub fn third_tensor(&self) -> Vec<Vec<Vec<f64>>> {
        let n = self.nvars();
        (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| (0..n).map(|k| self.third(i, j, k)).collect())
                    .collect()
            })
            .collect()
    }

    #[inline]
    fn check_match(&self, other: &Jet) {
        assert!(
            self.order == other.order && self.nvars == other.nvars,
            "jet shape mismatch: ({}, {}) vs ({}, {})",
            self.order,
            self.nvars,
            other.order,
            other.nvars
        );
    }

    fn len(&self) -> usize {
        coef_len(self.nvars(), self.order())
    }

    /// Univariate chain rule: compose with a scalar function whose value and
    /// first three derivatives at `self.value()` are given.
    fn chain(&self, v: f64, d1: f64, d2: f64, d3: f64) -> Jet {
        let n = self.nvars();
        let order = self.order();
        let mut out = Jet::constant(v, n, order);
        let g = &self.coef[1..];
        for i in 0..n {
            out.coef[1 + i] = d1 * g[i];
        }
        if order >= 2 {
            let hb = 1 + n;
            let mut idx = hb;
            for i in 0..n {
                for j in i..n {
                    out.coef[idx] = d2 * g[i] * g[j] + d1 * self.coef[idx];
                    idx += 1;
                }
            }
            if order >= 3 {
                let h = |i: usize, j: usize| self.coef[hb + pair_idx(n, i, j)];
                let mut idx = hb + n * (n + 1) / 2;
                for i in 0..n {
                    for j in i..n {
                        for k in j..n {
                            out.coef[idx] = d3 * g[i] * g[j] * g[k]
                                + d2 * (h(i, j) * g[k] + h(i, k) * g[j] + h(j, k) * g[i])
                                + d1 * self.coef[idx];
                            idx += 1;
                        }
                    }
                }
            }
        }
        out
    }

    /// Multiply every coefficient by a plain scalar.
    pub fn scale(&self, c: f64) -> Jet {
        let mut out = *self;
        for x in out.coef[..self.len()].iter_mut() {
            *x *= c;
        }
        out
    }

    pub fn exp(&self) -> Jet {
        let e = self.value().exp();
        self.chain(e, e, e, e)
    }

    /// Natural log; the value part must be positive.
    pub fn ln(&self) -> Jet {
        let x = self.value();
        assert!(x > 0.0, "jet ln: non-positive value part {x}");
        let r = 1.0 / x;
        self.chain(x.ln(), r, -r * r, 2.0 * r * r * r)
    }

    /// Reciprocal; the value part must be nonzero.
    pub fn recip(&self) -> Jet {
        let x = self.value();
        assert!(x != 0.0, "jet recip: zero value part");
        let r = 1.0 / x;
        self.chain(r, -r * r, 2.0 * r * r * r, -6.0 * r * r * r * r)
    }

    /// Logistic sigmoid, evaluated in the sign-branched stable form.
    pub fn sigmoid(&self) -> Jet {
        let s = sigmoid_f64(self.value());
        let d1 = s * (1.0 - s);
        let d2 = d1 * (1.0 - 2.0 * s);
        let d3 = d1 * (1.0 - 6.0 * s + 6.0 * s * s);
        self.chain(s, d1, d2, d3)
    }
}

impl std::fmt::Debug for Jet {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Jet")
            .field("order", &self.order)
            .field("nvars", &self.nvars)
            .field("value", &self.coef[0])
            .field("grad", &&self.coef[1..1 + self.nvars()])
            .finish()
    }
}

impl Add for Jet {
    type Output = Jet;
    fn add(self, rhs: Jet) -> Jet {
        self.check_match(&rhs);
        let mut out = self;
        for (x, y) in out.coef[..self.len()].iter_mut().zip(&rhs.coef[..self.len()]) {
            *x += y;
        }
        out
    }
}

impl Sub for Jet {
    type Output = Jet;
    fn sub(self, rhs: Jet) -> Jet {
        self.check_match(&rhs);
        let mut out = self;
        for (x, y) in out.coef[..self.len()].iter_mut().zip(&rhs.coef[..self.len()]) {
            *x -= y;
        }
        out
    }
}

impl Neg for Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale(-1.0)
    }
}

impl Mul for Jet {
    type Output = Jet;
    fn mul(self, rhs: Jet) -> Jet {
        self.check_match(&rhs);
        let n = self.nvars();
        let order = self.order();
        let f0 = self.coef[0];
        let g0 = rhs.coef[0];
        let mut out = Jet::constant(f0 * g0, n, order);
        let fg = &self.coef[1..];
        let gg = &rhs.coef[1..];
        for i in 0..n {
            out.coef[1 + i] = f0 * gg[i] + g0 * fg[i];
        }
        if order >= 2 {
            let hb = 1 + n;
            let mut idx = hb;
            for i in 0..n {
                for j in i..n {
                    out.coef[idx] =
                        f0 * rhs.coef[idx] + g0 * self.coef[idx] + fg[i] * gg[j] + fg[j] * gg[i];
                    idx += 1;
                }
            }
            if order >= 3 {
                let fh = |i: usize, j: usize| self.coef[hb + pair_idx(n, i, j)];
                let gh = |i: usize, j: usize| rhs.coef[hb + pair_idx(n, i, j)];
                let mut idx = hb + n * (n + 1) / 2;
                for i in 0..n {
                    for j in i..n {
                        for k in j..n {
                            out.coef[idx] = f0 * rhs.coef[idx]
                                + g0 * self.coef[idx]
                                + fg[i] * gh(j, k)
                                + fg[j] * gh(i, k)
                                + fg[k] * gh(i, j)
                                + gg[i] * fh(j, k)
                                + gg[j] * fh(i, k)
                                + gg[k] * fh(i, j);
                            idx += 1;
                        }
                    }
                }
            }
        }
        out
    }
}

impl Div for Jet {
    type Output = Jet;
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn div(self, rhs: Jet) -> Jet {
        self * rhs.recip()
    }
}

/// Numerically stable logistic sigmoid for plain floats.
pub fn sigmoid_f64(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// Numeric type the closed-form value function is generic over: plain `f64`
/// for evaluation, [`Jet`] for derivative propagation.
pub trait Scalar:
    Copy
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    /// A constant of the same shape as `self`.
    fn lift(&self, c: f64) -> Self;
    /// The value part.
    fn primal(&self) -> f64;
    /// Multiply by a plain constant.
    fn scale(&self, c: f64) -> Self;
    fn sigmoid(&self) -> Self;
}

impl Scalar for f64 {
    fn lift(&self, c: f64) -> f64 {
        c
    }
    fn primal(&self) -> f64 {
        *self
    }
    fn scale(&self, c: f64) -> f64 {
        self * c
    }
    fn sigmoid(&self) -> f64 {
        sigmoid_f64(*self)
    }
}

impl Scalar for Jet {
    fn lift(&self, c: f64) -> Jet {
        Jet::constant(c, self.nvars(), self.order())
    }
    fn primal(&self) -> f64 {
        self.value()
    }
    fn scale(&self, c: f64) -> Jet {
        Jet::scale(self, c)
    }
    fn sigmoid(&self) -> Jet {
        Jet::sigmoid(self)
    }
}
