//! Dense univariate polynomials over a [`Scalar`] field.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use super::matrix::DenseMatrix;
use super::scalar::{GaussRat, Scalar};
use crate::error::{Error, Result};

/// Coefficients in ascending powers of `z`; the last stored coefficient is
/// nonzero unless the polynomial is zero, in which case nothing is stored.
#[derive(Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct UniPoly<S> {
    coeffs: Vec<S>,
}

impl<S: Scalar> UniPoly<S> {
    pub fn new(mut coeffs: Vec<S>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        UniPoly { coeffs }
    }

    pub fn zero() -> Self {
        UniPoly { coeffs: Vec::new() }
    }

    pub fn constant(c: S) -> Self {
        Self::new(vec![c])
    }

    /// `z - root`.
    pub fn linear_root(root: &S) -> Self {
        Self::new(vec![-root.clone(), S::one()])
    }

    /// Monic product of `(z - r)` over `roots`.
    pub fn from_roots<'a, I: IntoIterator<Item = &'a S>>(roots: I) -> Self {
        roots
            .into_iter()
            .fold(Self::constant(S::one()), |acc, r| &acc * &Self::linear_root(r))
    }

    pub fn coeffs(&self) -> &[S] {
        &self.coeffs
    }

    /// Coefficient of `z^k` (zero past the degree).
    pub fn coeff(&self, k: usize) -> S {
        self.coeffs.get(k).cloned().unwrap_or_else(S::zero)
    }

    /// `None` encodes the degree of the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn lead(&self) -> S {
        self.coeffs.last().cloned().unwrap_or_else(S::zero)
    }

    pub fn eval(&self, z: &S) -> S {
        self.coeffs
            .iter()
            .rev()
            .fold(S::zero(), |acc, c| acc * z + c)
    }

    pub fn derivative(&self) -> Self {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(k, c)| c.clone() * S::from_i64(k as i64))
            .collect();
        Self::new(coeffs)
    }

    pub fn scale(&self, s: &S) -> Self {
        Self::new(self.coeffs.iter().map(|c| c.clone() * s).collect())
    }

    pub fn monic(&self) -> Self {
        if self.is_zero() {
            return self.clone();
        }
        self.scale(&self.lead().inv())
    }

    pub fn pow(&self, e: u32) -> Self {
        (0..e).fold(Self::constant(S::one()), |acc, _| &acc * self)
    }

    /// Euclidean division; errors on a zero divisor.
    pub fn div_rem(&self, d: &Self) -> Result<(Self, Self)> {
        let dd = d.degree().ok_or(Error::UndefinedResultant)?;
        let lead_inv = d.lead().inv();
        let mut rem = self.coeffs.clone();
        let Some(nd) = self.degree().filter(|&n| n >= dd) else {
            return Ok((Self::zero(), self.clone()));
        };
        let mut quot = vec![S::zero(); nd - dd + 1];
        for k in (0..=nd - dd).rev() {
            let c = rem[k + dd].clone() * &lead_inv;
            if !c.is_zero() {
                for (j, dc) in d.coeffs.iter().enumerate() {
                    rem[k + j] = rem[k + j].clone() - c.clone() * dc;
                }
            }
            // the eliminated coefficient is zero by construction
            rem[k + dd] = S::zero();
            quot[k] = c;
        }
        rem.truncate(dd);
        Ok((Self::new(quot), Self::new(rem)))
    }

    pub fn rem(&self, d: &Self) -> Result<Self> {
        Ok(self.div_rem(d)?.1)
    }

    /// Monic gcd by the Euclidean algorithm. Meaningful for exact scalars.
    pub fn gcd(&self, other: &Self) -> Self {
        let (mut a, mut b) = (self.clone(), other.clone());
        while !b.is_zero() {
            let r = a.rem(&b).expect("nonzero divisor");
            a = b;
            b = r;
        }
        a.monic()
    }

    /// Lagrange interpolation through `(z_k, v_k)` pairs with distinct nodes.
    pub fn interpolate(points: &[(S, S)]) -> Self {
        let mut acc = Self::zero();
        for (k, (zk, vk)) in points.iter().enumerate() {
            let mut basis = Self::constant(S::one());
            let mut denom = S::one();
            for (j, (zj, _)) in points.iter().enumerate() {
                if j != k {
                    basis = &basis * &Self::linear_root(zj);
                    denom = denom * &(zk.clone() - zj);
                }
            }
            acc = &acc + &basis.scale(&(vk.clone() / &denom));
        }
        acc
    }

    pub fn map<T: Scalar>(&self, f: impl Fn(&S) -> T) -> UniPoly<T> {
        UniPoly::new(self.coeffs.iter().map(f).collect())
    }

    /// Largest coefficient modulus; 0 for the zero polynomial.
    pub fn max_coeff(&self) -> f64 {
        self.coeffs.iter().map(Scalar::magnitude).fold(0.0, f64::max)
    }

    /// Sylvester matrix of `(self, other)`, coefficient rows in descending powers.
    pub fn sylvester(&self, other: &Self) -> Result<DenseMatrix<S>> {
        let m = self.degree().ok_or(Error::UndefinedResultant)?;
        let n = other.degree().ok_or(Error::UndefinedResultant)?;
        let size = m + n;
        let mut mat = DenseMatrix::zeros(size, size);
        for r in 0..n {
            for (k, c) in self.coeffs.iter().rev().enumerate() {
                mat[(r, r + k)] = c.clone();
            }
        }
        for r in 0..m {
            for (k, c) in other.coeffs.iter().rev().enumerate() {
                mat[(n + r, r + k)] = c.clone();
            }
        }
        Ok(mat)
    }

    /// Resultant as the determinant of the Sylvester matrix, evaluated by
    /// fraction-free (Bareiss) elimination.
    pub fn resultant(&self, other: &Self) -> Result<S> {
        let m = self.degree().ok_or(Error::UndefinedResultant)?;
        let n = other.degree().ok_or(Error::UndefinedResultant)?;
        match (m, n) {
            (0, 0) => Ok(S::one()),
            (0, _) => Ok(self.lead().pow(n as u32)),
            (_, 0) => Ok(other.lead().pow(m as u32)),
            _ => Ok(self.sylvester(other)?.determinant()),
        }
    }

    /// Discriminant-style test: `resultant(p, p')`. Zero iff `p` has a
    /// repeated finite root (for degree >= 2 over an exact field).
    pub fn resultant_with_derivative(&self) -> Result<S> {
        let d = self.derivative();
        if d.is_zero() {
            // constant polynomial: no finite roots at all
            return Ok(S::one());
        }
        self.resultant(&d)
    }
}

impl UniPoly<GaussRat> {
    /// Square-free decomposition (Yun): returns `(P_1, P_2, ...)` with
    /// `monic(self) = prod P_m^m` and each `P_m` square-free and pairwise coprime.
    pub fn squarefree_decomposition(&self) -> Vec<UniPoly<GaussRat>> {
        if self.degree().unwrap_or(0) == 0 {
            return Vec::new();
        }
        let f = self.monic();
        let df = f.derivative();
        let a = f.gcd(&df);
        let mut b = f.div_rem(&a).expect("gcd is nonzero").0;
        let mut c = df.div_rem(&a).expect("gcd is nonzero").0;
        let mut d = &c - &b.derivative();
        let mut out = Vec::new();
        loop {
            let g = b.gcd(&d);
            out.push(g.clone());
            b = b.div_rem(&g).expect("nonzero").0;
            if b.degree() == Some(0) {
                break;
            }
            c = d.div_rem(&g).expect("nonzero").0;
            d = &c - &b.derivative();
        }
        while out.last().is_some_and(|p| p.degree() == Some(0)) {
            out.pop();
        }
        out
    }
}

impl<S: Scalar> Add for &UniPoly<S> {
    type Output = UniPoly<S>;
    fn add(self, rhs: &UniPoly<S>) -> UniPoly<S> {
        let len = self.coeffs.len().max(rhs.coeffs.len());
        UniPoly::new((0..len).map(|k| self.coeff(k) + rhs.coeff(k)).collect())
    }
}

impl<S: Scalar> Sub for &UniPoly<S> {
    type Output = UniPoly<S>;
    fn sub(self, rhs: &UniPoly<S>) -> UniPoly<S> {
        let len = self.coeffs.len().max(rhs.coeffs.len());
        UniPoly::new((0..len).map(|k| self.coeff(k) - rhs.coeff(k)).collect())
    }
}

impl<S: Scalar> Mul for &UniPoly<S> {
    type Output = UniPoly<S>;
    fn mul(self, rhs: &UniPoly<S>) -> UniPoly<S> {
        if self.is_zero() || rhs.is_zero() {
            return UniPoly::zero();
        }
        let mut out = vec![S::zero(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.coeffs.iter().enumerate() {
                out[i + j] = out[i + j].clone() + a.clone() * b;
            }
        }
        UniPoly::new(out)
    }
}

impl<S: Scalar> Neg for &UniPoly<S> {
    type Output = UniPoly<S>;
    fn neg(self) -> UniPoly<S> {
        UniPoly::new(self.coeffs.iter().map(|c| -c.clone()).collect())
    }
}

impl<S: fmt::Debug> fmt::Debug for UniPoly<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.coeffs.iter()).finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;
    use proptest::prelude::*;

    fn ip(c: &[i64]) -> UniPoly<GaussRat> {
        UniPoly::new(c.iter().map(|&v| GaussRat::from(v)).collect())
    }

    /// Cofactor expansion along the first row; independent of Bareiss.
    fn laplace_det(m: &[Vec<GaussRat>]) -> GaussRat {
        let n = m.len();
        if n == 1 {
            return m[0][0].clone();
        }
        let mut acc = GaussRat::zero();
        for c in 0..n {
            if m[0][c].is_zero() {
                continue;
            }
            let minor: Vec<Vec<GaussRat>> = m[1..]
                .iter()
                .map(|row| row.iter().enumerate().filter(|&(k, _)| k != c).map(|(_, v)| v.clone()).collect())
                .collect();
            let term = m[0][c].clone() * laplace_det(&minor);
            acc = if c % 2 == 0 { acc + term } else { acc - term };
        }
        acc
    }

    fn sylvester_oracle(p: &UniPoly<GaussRat>, q: &UniPoly<GaussRat>) -> GaussRat {
        let s = p.sylvester(q).unwrap();
        let rows: Vec<Vec<GaussRat>> = (0..s.rows()).map(|r| s.row(r).to_vec()).collect();
        laplace_det(&rows)
    }

    #[test]
    fn resultant_small_cases() {
        // 3x3 Sylvester matrix [[1,0,-1],[2,0,0],[0,2,0]] has determinant -4
        assert_eq!(ip(&[-1, 0, 1]).resultant(&ip(&[0, 2])).unwrap(), GaussRat::from(-4));
        let c = GaussRat::from_parts(3, 7, -1, 2);
        let lin = UniPoly::linear_root(&c);
        assert!(lin.resultant(&lin).unwrap().is_zero());
        let p = ip(&[24, -40, 10]);
        let r = p.resultant(&p.derivative()).unwrap();
        assert!(!r.is_zero());
        assert_eq!(r, sylvester_oracle(&p, &p.derivative()));
    }

    #[test]
    fn resultant_rejects_zero() {
        assert!(matches!(UniPoly::<GaussRat>::zero().resultant(&ip(&[1, 1])), Err(Error::UndefinedResultant)));
    }

    #[test]
    fn division_and_gcd() {
        let a = &ip(&[-1, 1]) * &ip(&[-2, 1]);
        let b = &ip(&[-1, 1]) * &ip(&[3, 1]);
        assert_eq!(a.gcd(&b), ip(&[-1, 1]));
        let (q, r) = a.div_rem(&ip(&[-1, 1])).unwrap();
        assert_eq!(q, ip(&[-2, 1]));
        assert!(r.is_zero());
    }

    #[test]
    fn squarefree_parts() {
        // (z-1)^2 (z+2)^3 (z-5)
        let p = &(&ip(&[-1, 1]).pow(2) * &ip(&[2, 1]).pow(3)) * &ip(&[-5, 1]).scale(&GaussRat::from(7));
        let parts = p.squarefree_decomposition();
        assert_eq!(parts.len(), 3);
        assert_eq!(parts[0], ip(&[-5, 1]));
        assert_eq!(parts[1], ip(&[-1, 1]));
        assert_eq!(parts[2], ip(&[2, 1]));
    }

    #[test]
    fn interpolation_recovers_polynomial() {
        let p = ip(&[3, -1, 4, 1]);
        let pts: Vec<_> = (0..4).map(|k| {
            let z = GaussRat::from(k);
            (z.clone(), p.eval(&z))
        }).collect();
        assert_eq!(UniPoly::interpolate(&pts), p);
    }

    #[test]
    fn float_resultant_matches_exact() {
        let p = ip(&[24, -40, 10]);
        let pf = p.map(|c| c.to_c64());
        let rf: Complex64 = pf.resultant(&pf.derivative()).unwrap();
        let re = p.resultant(&p.derivative()).unwrap().to_c64();
        assert!((rf - re).norm() < 1e-9 * re.norm());
    }

    fn arb_poly() -> impl Strategy<Value = UniPoly<GaussRat>> {
        prop::collection::vec((-4i64..5, -2i64..3), 1..7).prop_map(|cs| {
            UniPoly::new(cs.into_iter().map(|(a, b)| GaussRat::gauss(a, b)).collect())
        })
    }

    fn arb_repeated() -> impl Strategy<Value = UniPoly<GaussRat>> {
        (arb_poly(), -3i64..4).prop_map(|(p, r)| {
            let lin = ip(&[-r, 1]);
            &(&lin * &lin) * &p
        })
    }

    proptest! {
        #[test]
        fn resultant_detects_repeated_roots(p in prop_oneof![arb_poly(), arb_repeated()]) {
            prop_assume!(p.degree().unwrap_or(0) >= 1 && p.degree().unwrap() <= 6);
            let dp = p.derivative();
            let r = p.resultant(&dp).unwrap();
            let g = p.gcd(&dp);
            prop_assert_eq!(r.is_zero(), g.degree().unwrap_or(0) > 0);
        }

        #[test]
        fn resultant_matches_laplace(p in arb_poly(), q in arb_poly()) {
            prop_assume!(p.degree().unwrap_or(0) >= 1 && q.degree().unwrap_or(0) >= 1);
            prop_assert_eq!(p.resultant(&q).unwrap(), sylvester_oracle(&p, &q));
        }
    }
}
