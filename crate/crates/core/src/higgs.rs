//! The Higgs field `Φ(z) = Σ v_i⊗v_i / (z - μ_i)`, its Hamiltonians and the
//! Hecke-transformed polynomial triple.
//!
//! Matrices are written in the basis `(e1, e2)` with `⟨e1, e2⟩ = 1` and
//! `v⊗v (u) = ⟨v, u⟩ v`, so the residue at `μ_i` is
//! `[[-x_i y_i, x_i²], [-y_i², x_i y_i]]`.

use serde::{Deserialize, Serialize};

use crate::algebra::{Scalar, UniPoly};
use crate::error::{Error, Result};
use crate::phase::{Pencil, PhasePoint};

/// Row-major 2×2 matrix.
pub type Mat2<S> = [[S; 2]; 2];

pub fn mat_mul<S: Scalar>(a: &Mat2<S>, b: &Mat2<S>) -> Mat2<S> {
    let e = |r: usize, c: usize| a[r][0].clone() * &b[0][c] + &(a[r][1].clone() * &b[1][c]);
    [[e(0, 0), e(0, 1)], [e(1, 0), e(1, 1)]]
}

pub fn trace<S: Scalar>(m: &Mat2<S>) -> S {
    m[0][0].clone() + &m[1][1]
}

pub fn det<S: Scalar>(m: &Mat2<S>) -> S {
    m[0][0].clone() * &m[1][1] - m[0][1].clone() * &m[1][0]
}

pub fn mat_vec<S: Scalar>(m: &Mat2<S>, v: &[S; 2]) -> [S; 2] {
    [
        m[0][0].clone() * &v[0] + &(m[0][1].clone() * &v[1]),
        m[1][0].clone() * &v[0] + &(m[1][1].clone() * &v[1]),
    ]
}

fn mat_zero<S: Scalar>() -> Mat2<S> {
    [[S::zero(), S::zero()], [S::zero(), S::zero()]]
}

fn mat_axpy<S: Scalar>(acc: &mut Mat2<S>, s: &S, m: &Mat2<S>) {
    for r in 0..2 {
        for c in 0..2 {
            acc[r][c] = acc[r][c].clone() + &(s.clone() * &m[r][c]);
        }
    }
}

/// `v⊗v` for `v = x e1 + y e2`.
pub fn rank_one<S: Scalar>(x: &S, y: &S) -> Mat2<S> {
    let xy = x.clone() * y;
    [[-xy.clone(), x.square()], [-y.square(), xy]]
}

/// `v₀⊗v₀` for `v₀ = e2`.
pub fn v0_tensor<S: Scalar>() -> Mat2<S> {
    rank_one(&S::zero(), &S::one())
}

/// Φ stored by its residue data.
#[derive(Clone, Debug, PartialEq)]
pub struct HiggsField<S> {
    pencil: Pencil<S>,
    x: Vec<S>,
    y: Vec<S>,
}

impl<S: Scalar> HiggsField<S> {
    pub fn pencil(&self) -> &Pencil<S> {
        &self.pencil
    }

    pub fn residue(&self, i: usize) -> Mat2<S> {
        rank_one(&self.x[i], &self.y[i])
    }

    pub fn residue_sum(&self) -> Mat2<S> {
        let mut acc = mat_zero();
        for i in 0..self.x.len() {
            mat_axpy(&mut acc, &S::one(), &self.residue(i));
        }
        acc
    }

    /// `Φ(z)`; errors at a pole.
    pub fn eval(&self, z: &S) -> Result<Mat2<S>> {
        let mut acc = mat_zero();
        for (i, m) in self.pencil.mu().iter().enumerate() {
            let d = z.clone() - m;
            if d.is_zero() {
                return Err(Error::Pole { index: i });
            }
            mat_axpy(&mut acc, &d.inv(), &self.residue(i));
        }
        Ok(acc)
    }

    pub fn tr_phi_squared(&self, z: &S) -> Result<S> {
        let m = self.eval(z)?;
        Ok(trace(&mat_mul(&m, &m)))
    }

    /// `(φ₀, φ₁)` in `Φ = φ₀/z + φ₁/z² + …`: `φ₀ = Σ res_i`, `φ₁ = Σ μ_i res_i`.
    pub fn infinity_expansion(&self) -> (Mat2<S>, Mat2<S>) {
        let mut phi1 = mat_zero();
        for (i, m) in self.pencil.mu().iter().enumerate() {
            mat_axpy(&mut phi1, m, &self.residue(i));
        }
        (self.residue_sum(), phi1)
    }
}

pub fn build_phi<S: Scalar>(p: &PhasePoint<S>) -> HiggsField<S> {
    HiggsField { pencil: p.pencil().clone(), x: p.x().to_vec(), y: p.y().to_vec() }
}

/// `f_i = Σ_{j≠i} ⟨v_i,v_j⟩² / (μ_i - μ_j)`; `2 f_i` is the residue of
/// `-tr Φ²` at `μ_i`.
pub fn hamiltonians<S: Scalar>(p: &PhasePoint<S>) -> Vec<S> {
    let mu = p.mu();
    (0..p.len())
        .map(|i| {
            (0..p.len())
                .filter(|&j| j != i)
                .fold(S::zero(), |acc, j| acc + &(p.pair_invariant(i, j).square() / (mu[i].clone() - &mu[j])))
        })
        .collect()
}

/// `f` together with `h(z) = Σ f_i Π_{j≠i}(z - μ_j)`, so that
/// `-tr Φ² = 2h / p_D`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReducedQuadratic<S> {
    pub f: Vec<S>,
    pub h: UniPoly<S>,
}

pub fn reduced_tr_phi_squared<S: Scalar>(p: &PhasePoint<S>) -> ReducedQuadratic<S> {
    let f = hamiltonians(p);
    let mut h = UniPoly::zero();
    for (i, fi) in f.iter().enumerate() {
        h = &h + &p.pencil().cofactor(i).scale(fi);
    }
    ReducedQuadratic { f, h }
}

/// Polynomial entries of the Hecke-transformed field `[[b, a], [c, -b]]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HeckeTriple<S> {
    pub a: UniPoly<S>,
    pub b: UniPoly<S>,
    pub c: UniPoly<S>,
}

impl<S: Scalar> HeckeTriple<S> {
    /// `b² + ac`.
    pub fn spectral_polynomial(&self) -> UniPoly<S> {
        &(&self.b * &self.b) + &(&self.a * &self.c)
    }

    /// `b² + ac = 0`, exactly or with all coefficients at most `tol`.
    pub fn is_nilpotent(&self, tol: f64) -> bool {
        let s = self.spectral_polynomial();
        if S::EXACT {
            s.is_zero()
        } else {
            s.coeffs().iter().all(|c| c.magnitude() <= tol)
        }
    }

    /// The degree bounds `deg c <= n`, `deg b <= n+1`, `deg a <= n+2`.
    pub fn degrees_within(&self, n: usize) -> bool {
        let ok = |p: &UniPoly<S>, bound: usize| p.degree().is_none_or(|d| d <= bound);
        ok(&self.c, n) && ok(&self.b, n + 1) && ok(&self.a, n + 2)
    }
}

pub fn hecke_transform<S: Scalar>(p: &PhasePoint<S>) -> HeckeTriple<S> {
    let (mut a, mut b, mut c) = (UniPoly::zero(), UniPoly::zero(), UniPoly::zero());
    for i in 0..p.len() {
        let (xi, yi) = (&p.x()[i], &p.y()[i]);
        let cof = p.pencil().cofactor(i);
        c = &c + &cof.scale(&xi.square());
        b = &b + &cof.scale(&(xi.clone() * yi));
        a = &a - &cof.scale(&yi.square());
    }
    HeckeTriple { a, b, c }
}

pub fn spectral_polynomial<S: Scalar>(p: &PhasePoint<S>) -> UniPoly<S> {
    hecke_transform(p).spectral_polynomial()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::GaussRat;
    use crate::phase::sample_phase_point;

    fn g(a: i64, b: i64) -> GaussRat {
        GaussRat::gauss(a, b)
    }

    fn fix_c() -> PhasePoint<GaussRat> {
        let x = vec![g(1, 0), g(1, 0), g(0, 2), g(1, 0), g(1, 0)];
        let y = [3, -4, 0, 0, 1].map(|v| g(v, 0)).to_vec();
        PhasePoint::new(Pencil::standard(5).unwrap(), x, y).unwrap()
    }

    fn fix_a_rest() -> PhasePoint<GaussRat> {
        let x = vec![g(1, 0), g(1, 0), g(0, 2), g(1, 0), g(1, 0)];
        PhasePoint::new(Pencil::standard(5).unwrap(), x.clone(), x).unwrap()
    }

    #[test]
    fn residues_are_nilpotent_and_match_entries() {
        let phi = build_phi(&fix_c());
        for i in 0..5 {
            let r = phi.residue(i);
            assert!(trace(&r).is_zero() && det(&r).is_zero());
        }
        let r0 = phi.residue(0);
        assert_eq!(r0, [[g(-3, 0), g(1, 0)], [g(-9, 0), g(3, 0)]]);
        assert!(trace(&phi.eval(&g(5, 0)).unwrap()).is_zero());
        assert!(matches!(phi.eval(&g(2, 0)), Err(Error::Pole { index: 2 })));
    }

    #[test]
    fn rank_one_convention() {
        // v⊗v(u) = ⟨v,u⟩v with ⟨e1,e2⟩ = 1
        let (x, y) = (g(2, 1), g(-1, 3));
        let m = rank_one(&x, &y);
        let form = |a: &[GaussRat; 2], b: &[GaussRat; 2]| a[0].clone() * &b[1] - a[1].clone() * &b[0];
        let v = [x.clone(), y.clone()];
        for u in [[g(1, 0), g(0, 0)], [g(0, 0), g(1, 0)], [g(3, -2), g(5, 7)]] {
            let k = form(&v, &u);
            assert_eq!(mat_vec(&m, &u), [k.clone() * &x, k * &y]);
        }
    }

    #[test]
    fn zero_covector_is_nilpotent() {
        let p = fix_a_rest();
        let phi = build_phi(&p);
        for z in [g(7, 0), g(1, 1), g(-3, 2)] {
            let m = phi.eval(&z).unwrap();
            assert!(det(&m).is_zero());
        }
        assert!(hamiltonians(&p).iter().all(Scalar::is_zero));
        assert!(reduced_tr_phi_squared(&p).h.is_zero());
        assert!(hecke_transform(&p).is_nilpotent(0.0));
    }

    #[test]
    fn hamiltonian_fixture() {
        let p = fix_c();
        let f = hamiltonians(&p);
        assert_eq!(f[0], g(-35, 0));
        let mut s = [g(0, 0), g(0, 0), g(0, 0)];
        for (fi, m) in f.iter().zip(p.mu()) {
            s[0] = s[0].clone() + fi;
            s[1] = s[1].clone() + &(fi.clone() * m);
            s[2] = s[2].clone() + &(fi.clone() * m * m);
        }
        assert!(s.iter().all(Scalar::is_zero));
        let gp = p.gauge_shift(&GaussRat::from_parts(2, 3, -1, 5));
        assert_eq!(hamiltonians(&gp), f);
    }

    #[test]
    fn reduced_quadratic_identity() {
        let p = fix_c();
        let rq = reduced_tr_phi_squared(&p);
        assert!(rq.h.degree().unwrap() <= p.pencil().dim() - 1);
        let phi = build_phi(&p);
        let pd = p.pencil().p_d();
        for z in [g(5, 0), g(-1, 0), g(1, 2), g(7, -3)] {
            let lhs = -phi.tr_phi_squared(&z).unwrap();
            assert_eq!(lhs, rq.h.eval(&z) * g(2, 0) / pd.eval(&z));
        }
    }

    #[test]
    fn hecke_fixture() {
        let p = fix_c();
        let t = hecke_transform(&p);
        assert_eq!(t.c, UniPoly::new([24, -40, 10].map(GaussRat::from).to_vec()));
        assert!(t.degrees_within(2));
        let lhs = t.spectral_polynomial().scale(&g(2, 0));
        let phi = build_phi(&p);
        let pd = p.pencil().p_d();
        for z in [g(5, 0), g(-2, 1), g(9, 4)] {
            let rhs = pd.eval(&z).square() * phi.tr_phi_squared(&z).unwrap();
            assert_eq!(lhs.eval(&z), rhs);
        }
        let rq = reduced_tr_phi_squared(&p);
        assert_eq!(t.spectral_polynomial(), -&(&pd * &rq.h));
        assert!(!t.is_nilpotent(0.0));
    }

    #[test]
    fn infinity_data() {
        let p = fix_c();
        let (phi0, phi1) = build_phi(&p).infinity_expansion();
        let sy2 = p.y().iter().fold(g(0, 0), |a, v| a + &v.square());
        let mut expected = v0_tensor::<GaussRat>();
        for row in expected.iter_mut() {
            for e in row.iter_mut() {
                *e = e.clone() * &sy2;
            }
        }
        assert_eq!(phi0, expected);
        assert!(trace(&mat_mul(&phi0, &phi1)).is_zero());
        let w = mat_vec(&phi1, &[g(0, 0), g(1, 0)]);
        assert!(w[0].is_zero());
    }

    #[test]
    fn off_locus_trace_is_generic() {
        // x with Σx² = 0 only
        let x = vec![g(1, 0), g(0, 1), g(1, 0), g(0, 1), g(1, 0)];
        let y = vec![g(0, 0), g(1, 0), g(0, 0), g(0, 0), g(0, 0)];
        let phi = HiggsField { pencil: Pencil::standard(5).unwrap(), x, y };
        let (phi0, phi1) = phi.infinity_expansion();
        assert!(!trace(&mat_mul(&phi0, &phi1)).is_zero());
    }

    #[test]
    fn sampled_points_squarefree_spectral_curve() {
        let pencil = Pencil::<GaussRat>::standard(6).unwrap();
        let mut squarefree = 0;
        for s in 0..8 {
            let p = sample_phase_point(&pencil, 5, s).unwrap();
            let sp = spectral_polynomial(&p);
            if sp.degree().unwrap_or(0) > 0 && !sp.resultant_with_derivative().unwrap().is_zero() {
                squarefree += 1;
            }
        }
        assert!(squarefree >= 6);
    }
}
