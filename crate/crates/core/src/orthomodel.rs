//! The orthogonal model: the pencil `q_z = Σ (z - μ_i) u_i w_i`, the
//! skew-adjoint rank-2 matrix `A(z) = D(z)^{-1}(x yᵀ - y xᵀ)`, and its
//! agreement with the Higgs field in the frame `e1 = y_z`, `e2 = -x_z`.

use serde::{Deserialize, Serialize};

use crate::algebra::{DenseMatrix, Scalar, UniPoly};
use crate::error::{Error, Result};
use crate::higgs::{build_phi, hecke_transform, Mat2};
use crate::phase::{Pencil, PhasePoint};

/// Diagonal entries `z - μ_i` of `q_z`.
pub fn pencil_form<S: Scalar>(pencil: &Pencil<S>, z: &S) -> Vec<S> {
    pencil.mu().iter().map(|m| z.clone() - m).collect()
}

/// `q_z(u, w)`.
pub fn q_z<S: Scalar>(pencil: &Pencil<S>, z: &S, u: &[S], w: &[S]) -> S {
    pencil_form(pencil, z)
        .iter()
        .zip(u.iter().zip(w))
        .fold(S::zero(), |acc, (d, (a, b))| acc + &(d.clone() * a * b))
}

fn check_pole<S: Scalar>(pencil: &Pencil<S>, z: &S) -> Result<()> {
    match pencil.index_of_pole(z) {
        Some(index) => Err(Error::Pole { index }),
        None => Ok(()),
    }
}

/// `A_ij = (x_i y_j - y_i x_j) / (z - μ_i)`.
pub fn build_a<S: Scalar>(p: &PhasePoint<S>, z: &S) -> Result<DenseMatrix<S>> {
    check_pole(p.pencil(), z)?;
    let d = pencil_form(p.pencil(), z);
    let (x, y) = (p.x(), p.y());
    Ok(DenseMatrix::from_fn(p.len(), p.len(), |i, j| (x[i].clone() * &y[j] - y[i].clone() * &x[j]) / &d[i]))
}

/// `v_z = (v_i / (z - μ_i))`, defined for `Σ v_i x_i = 0`.
pub fn lift_vz<S: Scalar>(v: &[S], p: &PhasePoint<S>, z: &S) -> Result<Vec<S>> {
    check_pole(p.pencil(), z)?;
    let pairing = v.iter().zip(p.x()).fold(S::zero(), |acc, (a, b)| acc + &(a.clone() * b));
    let scale = v.iter().chain(p.x()).map(Scalar::magnitude).fold(0.0, f64::max).powi(2) * v.len() as f64;
    if !pairing.is_negligible(1e-9, scale) {
        return Err(Error::Constraint(format!("Σ v_i x_i = {pairing:?}")));
    }
    Ok(v.iter().zip(pencil_form(p.pencil(), z)).map(|(a, d)| a.clone() / &d).collect())
}

/// Checks at one sample `z`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleCheck<S> {
    pub z: S,
    /// `D A + Aᵀ D = 0`.
    pub skew_adjoint: bool,
    /// `A x = 0`.
    pub kills_x: bool,
    pub rank: usize,
    /// `[A(x_z), A(y_z)]` coefficients `(α, β, γ, δ)` with
    /// `A x_z = α x_z + β y_z` and `A y_z = γ x_z + δ y_z`; absent when
    /// `x_z ∥ y_z`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub coefficients: Option<[S; 4]>,
    /// The matrix of `A` in the frame `(y_z, -x_z)` equals `Φ(z)`.
    pub frame_matches_phi: bool,
    /// Relative residuals, float mode only.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub skew_residual: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kernel_residual: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub frame_residual: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl<S> SampleCheck<S> {
    pub fn passed(&self) -> bool {
        self.skew_adjoint && self.kills_x && self.rank <= 2 && (self.frame_matches_phi || self.note.is_some())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EquivalenceReport<S> {
    pub samples: Vec<SampleCheck<S>>,
    /// `p_D A · p_D x_z = b p_D x_z - c p_D y_z` and
    /// `p_D A · p_D y_z = -a p_D x_z - b p_D y_z` as polynomial vectors.
    pub polynomial_identity: bool,
}

impl<S> EquivalenceReport<S> {
    pub fn passed(&self) -> bool {
        self.polynomial_identity && self.samples.iter().all(SampleCheck::passed)
    }
}

fn negligible_all<S: Scalar>(v: &[S], tol: f64, scale: f64) -> bool {
    v.iter().all(|e| e.is_negligible(tol, scale))
}

/// Express `w` in the basis `(u, v)`; `None` when `u ∥ v` or `w` leaves the span.
fn coords_in<S: Scalar>(u: &[S], v: &[S], w: &[S], tol: f64) -> Option<(S, S)> {
    let n = u.len();
    let scale = u.iter().chain(v).map(Scalar::magnitude).fold(0.0, f64::max).powi(2);
    let mut best: Option<(usize, usize, S)> = None;
    for r in 0..n {
        for s in r + 1..n {
            let det = u[r].clone() * &v[s] - u[s].clone() * &v[r];
            if det.is_negligible(tol, scale) {
                continue;
            }
            if best.as_ref().is_none_or(|b| det.magnitude() > b.2.magnitude()) {
                best = Some((r, s, det));
            }
            if S::EXACT {
                break;
            }
        }
        if S::EXACT && best.is_some() {
            break;
        }
    }
    let (r, s, det) = best?;
    let alpha = (w[r].clone() * &v[s] - w[s].clone() * &v[r]) / &det;
    let beta = (u[r].clone() * &w[s] - u[s].clone() * &w[r]) / &det;
    let resid: Vec<S> = (0..n).map(|k| w[k].clone() - &(alpha.clone() * &u[k]) - &(beta.clone() * &v[k])).collect();
    let wscale = w.iter().map(Scalar::magnitude).fold(0.0, f64::max).max(scale.sqrt());
    negligible_all(&resid, tol, wscale).then_some((alpha, beta))
}

fn max_rel<S: Scalar>(v: impl Iterator<Item = S>, scale: f64) -> f64 {
    v.map(|e| e.magnitude()).fold(0.0, f64::max) / scale.max(f64::MIN_POSITIVE)
}

fn check_sample<S: Scalar>(p: &PhasePoint<S>, z: &S, tol: f64) -> Result<SampleCheck<S>> {
    let a = build_a(p, z)?;
    let n = p.len();
    let d = pencil_form(p.pencil(), z);
    let float = |r: f64| (!S::EXACT).then_some(r);
    let scale = a.max_abs() * d.iter().map(Scalar::magnitude).fold(1.0, f64::max);
    let skew_terms: Vec<S> = (0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .map(|(i, j)| d[i].clone() * &a[(i, j)] + &(a[(j, i)].clone() * &d[j]))
        .collect();
    let skew = negligible_all(&skew_terms, tol, scale);
    let ax = a.mul_vec(p.x());
    let xs = p.x().iter().map(Scalar::magnitude).fold(0.0, f64::max);
    let kscale = a.max_abs() * xs * n as f64;
    let kills_x = negligible_all(&ax, tol, kscale);
    let rank = a.rank(tol);
    let xz = lift_vz(p.x(), p, z)?;
    let yz = lift_vz(p.y(), p, z)?;
    let axz = a.mul_vec(&xz);
    let ayz = a.mul_vec(&yz);
    let mut check = SampleCheck {
        z: z.clone(),
        skew_adjoint: skew,
        kills_x,
        rank,
        coefficients: None,
        frame_matches_phi: false,
        skew_residual: float(max_rel(skew_terms.into_iter(), scale)),
        kernel_residual: float(max_rel(ax.into_iter(), kscale)),
        frame_residual: None,
        note: None,
    };
    let (Some((al, be)), Some((ga, de))) = (coords_in(&xz, &yz, &axz, tol), coords_in(&xz, &yz, &ayz, tol)) else {
        check.note = Some("x_z and y_z are parallel; sample skipped".into());
        return Ok(check);
    };
    // A e1 = δ e1 - γ e2, A e2 = -β e1 + α e2
    let frame: Mat2<S> = [[de.clone(), -be.clone()], [-ga.clone(), al.clone()]];
    let phi = build_phi(p).eval(z)?;
    let pscale = phi.iter().flatten().map(Scalar::magnitude).fold(1.0, f64::max);
    let diff: Vec<S> = (0..4).map(|k| frame[k / 2][k % 2].clone() - &phi[k / 2][k % 2]).collect();
    check.frame_matches_phi = negligible_all(&diff, tol, pscale);
    check.frame_residual = float(max_rel(diff.into_iter(), pscale));
    check.coefficients = Some([al, be, ga, de]);
    Ok(check)
}

/// Polynomial-vector form of the two frame identities, using the Hecke triple.
pub fn polynomial_identity<S: Scalar>(p: &PhasePoint<S>, tol: f64) -> bool {
    let n = p.len();
    let cof: Vec<UniPoly<S>> = (0..n).map(|i| p.pencil().cofactor(i)).collect();
    let xt: Vec<UniPoly<S>> = (0..n).map(|i| cof[i].scale(&p.x()[i])).collect();
    let yt: Vec<UniPoly<S>> = (0..n).map(|i| cof[i].scale(&p.y()[i])).collect();
    let t = hecke_transform(p);
    let apply = |v: &[UniPoly<S>]| -> Vec<UniPoly<S>> {
        (0..n)
            .map(|i| {
                let mut acc = UniPoly::zero();
                for j in 0..n {
                    let w = p.x()[i].clone() * &p.y()[j] - p.y()[i].clone() * &p.x()[j];
                    acc = &acc + &v[j].scale(&w);
                }
                &cof[i] * &acc
            })
            .collect()
    };
    let close = |lhs: &[UniPoly<S>], rhs: &[UniPoly<S>]| {
        lhs.iter().zip(rhs).all(|(l, r)| {
            let d = l - r;
            let s = l.max_coeff().max(r.max_coeff()).max(1.0);
            d.coeffs().iter().all(|c| c.is_negligible(tol, s))
        })
    };
    let lx = apply(&xt);
    let rx: Vec<UniPoly<S>> = (0..n).map(|i| &(&t.b * &xt[i]) - &(&t.c * &yt[i])).collect();
    let ly = apply(&yt);
    let ry: Vec<UniPoly<S>> = (0..n).map(|i| &(&(-&t.a) * &xt[i]) - &(&t.b * &yt[i])).collect();
    close(&lx, &rx) && close(&ly, &ry)
}

/// Frame matching at each sample plus the polynomial identity. `tol` is
/// ignored for exact scalars.
pub fn verify_equivalence<S: Scalar>(p: &PhasePoint<S>, z_samples: &[S], tol: f64) -> Result<EquivalenceReport<S>> {
    let samples = z_samples.iter().map(|z| check_sample(p, z, tol)).collect::<Result<Vec<_>>>()?;
    Ok(EquivalenceReport { samples, polynomial_identity: polynomial_identity(p, tol) })
}

/// Coefficients of `z^{-1}` and `z^{-2}` in `Σ x_i (x_z)_i = Σ x_i²/(z - μ_i)`
/// at infinity.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SubbundleProbe<S> {
    pub coeff_z_inv: S,
    pub coeff_z_inv2: S,
}

impl<S: Scalar> SubbundleProbe<S> {
    pub fn vanishes(&self) -> bool {
        self.coeff_z_inv.is_zero() && self.coeff_z_inv2.is_zero()
    }
}

pub fn trivial_subbundle_probe<S: Scalar>(x: &[S], pencil: &Pencil<S>) -> SubbundleProbe<S> {
    let (mut c1, mut c2) = (S::zero(), S::zero());
    for (xi, m) in x.iter().zip(pencil.mu()) {
        let sq = xi.square();
        c2 = c2 + &(sq.clone() * m);
        c1 = c1 + &sq;
    }
    SubbundleProbe { coeff_z_inv: c1, coeff_z_inv2: c2 }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::GaussRat;

    fn g(a: i64, b: i64) -> GaussRat {
        GaussRat::gauss(a, b)
    }

    fn fix_a_x() -> Vec<GaussRat> {
        vec![g(1, 0), g(1, 0), g(0, 2), g(1, 0), g(1, 0)]
    }

    fn fix_c() -> PhasePoint<GaussRat> {
        let y = [3, -4, 0, 0, 1].map(|v| g(v, 0)).to_vec();
        PhasePoint::new(Pencil::standard(5).unwrap(), fix_a_x(), y).unwrap()
    }

    #[test]
    fn a_matrix_fixture() {
        let p = fix_c();
        let z = g(5, 0);
        let a = build_a(&p, &z).unwrap();
        assert!(a.mul_vec(p.x()).iter().all(Scalar::is_zero));
        assert_eq!(a.rank(0.0), 2);
        let us = [
            vec![g(1, 0), g(0, 0), g(2, 1), g(-1, 0), g(3, 0)],
            vec![g(0, 1), g(5, 0), g(0, 0), g(1, 1), g(-2, 0)],
            vec![g(7, -1), g(1, 0), g(1, 0), g(0, 0), g(0, 4)],
        ];
        for u in &us {
            assert!(q_z(p.pencil(), &z, &a.mul_vec(u), u).is_zero());
        }
        assert!(matches!(build_a(&p, &g(3, 0)), Err(Error::Pole { index: 3 })));
        let rest = PhasePoint::new(p.pencil().clone(), fix_a_x(), fix_a_x()).unwrap();
        assert!(build_a(&rest, &z).unwrap().is_zero());
    }

    #[test]
    fn pencil_form_degenerates_at_marked_points() {
        let pen = Pencil::<GaussRat>::standard(5).unwrap();
        let d = DenseMatrix::from_fn(5, 5, |i, j| if i == j { pencil_form(&pen, &g(2, 0))[i].clone() } else { g(0, 0) });
        assert_eq!(d.rank(0.0), 4);
    }

    #[test]
    fn lifts() {
        let p = fix_c();
        let z = g(-1, 0);
        let xz = lift_vz(p.x(), &p, &z).unwrap();
        assert!(q_z(p.pencil(), &z, &xz, p.x()).is_zero());
        let yz = lift_vz(p.y(), &p, &z).unwrap();
        assert!(q_z(p.pencil(), &z, &yz, p.x()).is_zero());
        let bad = vec![g(1, 0), g(0, 0), g(0, 0), g(0, 0), g(0, 0)];
        assert!(matches!(lift_vz(&bad, &p, &z), Err(Error::Constraint(_))));
    }

    #[test]
    fn equivalence_fixture() {
        let p = fix_c();
        let rep = verify_equivalence(&p, &[g(5, 0), g(6, 0), g(-1, 0)], 0.0).unwrap();
        assert!(rep.passed());
        let b = hecke_transform(&p).b;
        let pd = p.pencil().p_d();
        for s in &rep.samples {
            let c = s.coefficients.as_ref().unwrap();
            assert_eq!(c[0], b.eval(&s.z) / pd.eval(&s.z));
        }
    }

    #[test]
    fn zero_covector_skips() {
        let p = PhasePoint::new(Pencil::standard(5).unwrap(), fix_a_x(), fix_a_x()).unwrap();
        let rep = verify_equivalence(&p, &[g(5, 0)], 0.0).unwrap();
        assert!(rep.samples[0].note.is_some());
        assert!(rep.polynomial_identity);
    }

    #[test]
    fn subbundle_probe() {
        let pen = Pencil::<GaussRat>::standard(5).unwrap();
        assert!(trivial_subbundle_probe(&fix_a_x(), &pen).vanishes());
        let fix_b = vec![g(0, 1), g(1, 0), g(1, 0), g(0, 1), g(0, 0)];
        assert!(trivial_subbundle_probe(&fix_b, &pen).vanishes());
        let off = vec![g(1, 0), g(0, 1), g(1, 0), g(0, 1), g(0, 0)];
        let pr = trivial_subbundle_probe(&off, &pen);
        assert!(pr.coeff_z_inv.is_zero() && !pr.coeff_z_inv2.is_zero());
    }
}
