//! Sparse multivariate polynomials with exact Gaussian-rational coefficients,
//! plus the normal form modulo the two diagonal quadrics of a pencil.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use super::scalar::{GaussRat, Scalar};
use crate::error::{Error, Result};

/// Exponent vector of a monomial in `N` variables.
pub type Exponents = Vec<u32>;

/// Sparse polynomial in `nvars` variables. Zero coefficients are never stored.
#[derive(Clone, PartialEq, Eq)]
pub struct MultiPoly {
    nvars: usize,
    terms: BTreeMap<Exponents, GaussRat>,
}

impl MultiPoly {
    pub fn zero(nvars: usize) -> Self {
        MultiPoly { nvars, terms: BTreeMap::new() }
    }

    pub fn constant(nvars: usize, c: GaussRat) -> Self {
        let mut p = Self::zero(nvars);
        p.add_term(vec![0; nvars], c);
        p
    }

    pub fn one(nvars: usize) -> Self {
        Self::constant(nvars, GaussRat::one())
    }

    /// The coordinate function `x_k` (0-based).
    pub fn var(nvars: usize, k: usize) -> Self {
        let mut e = vec![0; nvars];
        e[k] = 1;
        Self::monomial(e, GaussRat::one())
    }

    pub fn monomial(exps: Exponents, c: GaussRat) -> Self {
        let mut p = Self::zero(exps.len());
        p.add_term(exps, c);
        p
    }

    /// `sum_k w_k x_k^2`.
    pub fn diagonal_quadric(weights: &[GaussRat]) -> Self {
        let n = weights.len();
        let mut p = Self::zero(n);
        for (k, w) in weights.iter().enumerate() {
            let mut e = vec![0; n];
            e[k] = 2;
            p.add_term(e, w.clone());
        }
        p
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Exponents, &GaussRat)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, exps: &[u32]) -> GaussRat {
        self.terms.get(exps).cloned().unwrap_or_default()
    }

    pub fn add_term(&mut self, exps: Exponents, c: GaussRat) {
        debug_assert_eq!(exps.len(), self.nvars);
        if c.is_zero() {
            return;
        }
        match self.terms.entry(exps) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                *o.get_mut() += &c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    /// Total degree, `None` for the zero polynomial.
    pub fn degree(&self) -> Option<u32> {
        self.terms.keys().map(|e| e.iter().sum()).max()
    }

    /// `Some(d)` when every term has total degree `d`; the zero polynomial
    /// counts as homogeneous of any degree and reports `Some(0)`.
    pub fn homogeneous_degree(&self) -> Option<u32> {
        let mut degs = self.terms.keys().map(|e| e.iter().sum::<u32>());
        let Some(first) = degs.next() else { return Some(0) };
        degs.all(|d| d == first).then_some(first)
    }

    pub fn scale(&self, c: &GaussRat) -> Self {
        if c.is_zero() {
            return Self::zero(self.nvars);
        }
        MultiPoly {
            nvars: self.nvars,
            terms: self.terms.iter().map(|(e, v)| (e.clone(), v * c)).collect(),
        }
    }

    /// `x_k * self`.
    pub fn mul_var(&self, k: usize) -> Self {
        MultiPoly {
            nvars: self.nvars,
            terms: self
                .terms
                .iter()
                .map(|(e, v)| {
                    let mut e = e.clone();
                    e[k] += 1;
                    (e, v.clone())
                })
                .collect(),
        }
    }

    /// `d self / d x_k`.
    pub fn partial(&self, k: usize) -> Self {
        let mut out = Self::zero(self.nvars);
        for (e, v) in &self.terms {
            if e[k] == 0 {
                continue;
            }
            let mut d = e.clone();
            d[k] -= 1;
            out.add_term(d, v * &GaussRat::from(e[k] as i64));
        }
        out
    }

    pub fn eval<S: Scalar>(&self, point: &[S], lift: impl Fn(&GaussRat) -> S) -> S {
        assert_eq!(point.len(), self.nvars);
        self.terms.iter().fold(S::zero(), |acc, (e, v)| {
            let m = e
                .iter()
                .zip(point)
                .fold(lift(v), |m, (&k, x)| m * &x.pow(k));
            acc + m
        })
    }

    /// All monomials of total degree `<= dmax`, in lexicographic order.
    pub fn monomial_basis(nvars: usize, dmax: u32) -> Vec<Exponents> {
        fn rec(k: usize, left: u32, cur: &mut Exponents, out: &mut Vec<Exponents>) {
            if k == cur.len() {
                out.push(cur.clone());
                return;
            }
            for d in 0..=left {
                cur[k] = d;
                rec(k + 1, left - d, cur, out);
            }
            cur[k] = 0;
        }
        let mut out = Vec::new();
        rec(0, dmax, &mut vec![0; nvars], &mut out);
        out
    }
}

impl Add for &MultiPoly {
    type Output = MultiPoly;
    fn add(self, rhs: &MultiPoly) -> MultiPoly {
        let mut out = self.clone();
        for (e, v) in &rhs.terms {
            out.add_term(e.clone(), v.clone());
        }
        out
    }
}

impl Sub for &MultiPoly {
    type Output = MultiPoly;
    fn sub(self, rhs: &MultiPoly) -> MultiPoly {
        let mut out = self.clone();
        for (e, v) in &rhs.terms {
            out.add_term(e.clone(), -v);
        }
        out
    }
}

impl Neg for &MultiPoly {
    type Output = MultiPoly;
    fn neg(self) -> MultiPoly {
        self.scale(&-GaussRat::one())
    }
}

impl Mul for &MultiPoly {
    type Output = MultiPoly;
    fn mul(self, rhs: &MultiPoly) -> MultiPoly {
        let mut out = MultiPoly::zero(self.nvars);
        for (ea, va) in &self.terms {
            for (eb, vb) in &rhs.terms {
                let e = ea.iter().zip(eb).map(|(a, b)| a + b).collect();
                out.add_term(e, va * vb);
            }
        }
        out
    }
}

impl fmt::Debug for MultiPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        let mut first = true;
        for (e, v) in &self.terms {
            if !first {
                f.write_str(" + ")?;
            }
            first = false;
            write!(f, "({v})")?;
            for (k, &p) in e.iter().enumerate() {
                match p {
                    0 => {}
                    1 => write!(f, "*x{}", k + 1)?,
                    _ => write!(f, "*x{}^{}", k + 1, p)?,
                }
            }
        }
        Ok(())
    }
}

/// Which quadrics to reduce by.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum QuadricMode {
    /// Rewrite `x1^2 -> -(x2^2 + ... + xN^2)` using `q = 0`.
    QOnly,
    /// Rewrite both `x1^2` and `x2^2` using `q = 0` and `q1 = 0`.
    QAndQ1,
}

/// Normal form of `f` modulo `q = sum x_i^2` (and optionally
/// `q1 = sum mu_i x_i^2`). The leading monomials `x1^2`, `x2^2` are coprime,
/// so the rewrite rules are confluent and the result is zero exactly when `f`
/// lies in the ideal.
pub fn reduce_mod_quadrics(f: &MultiPoly, mu: &[GaussRat], mode: QuadricMode) -> Result<MultiPoly> {
    let n = f.nvars();
    if mu.len() != n {
        return Err(Error::BadIndex(format!("pencil has {} points, polynomial {} variables", mu.len(), n)));
    }
    if n < 2 {
        return Err(Error::DegeneratePencil("need at least two variables".into()));
    }
    // replacement polynomials for x1^2 and (mode q-and-q1) x2^2
    let (rule1, rule2) = match mode {
        QuadricMode::QOnly => {
            let mut r = MultiPoly::zero(n);
            for k in 1..n {
                let mut e = vec![0; n];
                e[k] = 2;
                r.add_term(e, -GaussRat::one());
            }
            (r, None)
        }
        QuadricMode::QAndQ1 => {
            if mu[0] == mu[1] {
                return Err(Error::DegeneratePencil("mu_1 = mu_2".into()));
            }
            // x1^2 + x2^2 = -R0,  mu1 x1^2 + mu2 x2^2 = -R1
            let det = &mu[1] - &mu[0];
            let mut r1 = MultiPoly::zero(n);
            let mut r2 = MultiPoly::zero(n);
            for k in 2..n {
                let mut e = vec![0; n];
                e[k] = 2;
                // x1^2 = (R1 - mu2 R0) / det,  x2^2 = (mu1 R0 - R1) / det
                r1.add_term(e.clone(), (&mu[k] - &mu[1]) / &det);
                r2.add_term(e, (&mu[0] - &mu[k]) / &det);
            }
            (r1, Some(r2))
        }
    };
    let mut todo = f.clone();
    let mut out = MultiPoly::zero(n);
    while let Some((e, v)) = todo.terms.pop_first() {
        let (var, rule) = if e[0] >= 2 {
            (0, &rule1)
        } else if let (Some(r2), true) = (&rule2, e[1] >= 2) {
            (1, r2)
        } else {
            out.add_term(e, v);
            continue;
        };
        let mut rest = e.clone();
        rest[var] -= 2;
        for (re, rv) in &rule.terms {
            let ne = rest.iter().zip(re).map(|(a, b)| a + b).collect();
            todo.add_term(ne, &v * rv);
        }
    }
    Ok(out)
}
