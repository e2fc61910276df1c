//! Separation of variables: the auxiliary polynomial `p(z)`, its roots `a_k`,
//! the eigenvalues `λ_k`, the linear forms `ℓ_k(y) = Σ x_j y_j / (a_k - μ_j)`
//! and the evaluation matrix built from them.
//!
//! Roots are irrational in general, so every root-dependent quantity here is
//! computed in floating point. Exact rank and kernel statements go through
//! [`cleared_system`], which replaces "vanishes at the roots of `g`" by
//! "is divisible by `g`".

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::algebra::{DenseMatrix, GaussRat, RankKernel, RootCluster, Scalar, UniPoly, DEFAULT_ROOT_TOL};
use crate::error::{Error, Result};
use crate::higgs::reduced_tr_phi_squared;
use crate::phase::{Pencil, PhasePoint};

/// `h(a_k) = SOV_CONSTANT · p_D(a_k) · λ_k²` at every simple finite root.
pub const SOV_CONSTANT: f64 = -1.0;

/// `(-1)^c det M_c = κ x_c` with `κ = MINOR_CONSTANT · lead(p)^{N-1} · C`,
/// `C = Π x_i/p(μ_i) · Π_{j<k}(a_j - a_k) · Π_{l<m}(μ_m - μ_l)`.
pub const MINOR_CONSTANT: f64 = 1.0;

/// Relative distance below which a float root is taken to sit on a marked point.
pub const POLE_COLLISION_TOL: f64 = 1e-9;

/// `p(z) = Σ x_i² Π_{j≠i}(z - μ_j)`.
pub fn auxiliary_poly<S: Scalar>(x: &[S], pencil: &Pencil<S>) -> UniPoly<S> {
    let mut p = UniPoly::zero();
    for (i, xi) in x.iter().enumerate() {
        if !xi.is_zero() {
            p = &p + &pencil.cofactor(i).scale(&xi.square());
        }
    }
    p
}

/// `x` with `auxiliary_poly(x) = target`: `x_i² = target(μ_i) / w_i`, taking
/// the field's principal square root.
pub fn point_from_polynomial<S: Scalar>(target: &UniPoly<S>, pencil: &Pencil<S>) -> Result<Vec<S>> {
    if target.degree().is_some_and(|d| d > pencil.dim()) {
        return Err(Error::Constraint(format!("target degree exceeds n = {}", pencil.dim())));
    }
    if target.is_zero() {
        return Err(Error::Constraint("zero target gives x = 0".into()));
    }
    pencil
        .mu()
        .iter()
        .enumerate()
        .map(|(i, m)| {
            let sq = target.eval(m) / &pencil.weight(i);
            sq.try_sqrt().ok_or(Error::NoExactSquareRoot { index: i })
        })
        .collect()
}

/// Finite roots of `p` (clustered) and the multiplicity of `∞`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RootSet {
    pub finite: Vec<RootCluster>,
    pub infinity: usize,
}

impl RootSet {
    pub fn total(&self) -> usize {
        self.finite.iter().map(|c| c.multiplicity).sum::<usize>() + self.infinity
    }

    pub fn all_simple(&self) -> bool {
        self.infinity <= 1 && self.finite.iter().all(|c| c.multiplicity == 1)
    }

    pub fn finite_values(&self) -> Vec<Complex64> {
        self.finite.iter().map(|c| c.value).collect()
    }
}

/// Relative size below which a float leading coefficient is dropped.
pub const LEAD_TRIM: f64 = 1e-10;

/// Float copy of `p` without rounding-level leading coefficients; exact input
/// is copied unchanged.
pub fn float_trimmed<S: Scalar>(p: &UniPoly<S>) -> UniPoly<Complex64> {
    let mut c: Vec<Complex64> = p.coeffs().iter().map(Scalar::to_c64).collect();
    if !S::EXACT {
        let cut = LEAD_TRIM * p.max_coeff();
        while c.last().is_some_and(|v| v.norm() <= cut) {
            c.pop();
        }
    }
    UniPoly::new(c)
}

/// Float roots of `p` viewed as a section of `O(n)`.
pub fn root_set<S: Scalar>(p: &UniPoly<S>, n: usize) -> Result<RootSet> {
    let fp = float_trimmed(p);
    let deg = fp.degree().ok_or(Error::Constraint("p = 0".into()))?;
    let finite = crate::algebra::poly_roots(&fp, DEFAULT_ROOT_TOL)?;
    Ok(RootSet { finite, infinity: n.saturating_sub(deg) })
}

/// Newton steps applied to simple roots, on `p/p_D = Σ x_i²/(z - μ_i)`.
pub const SECULAR_NEWTON_STEPS: usize = 3;

/// [`root_set`] of `auxiliary_poly(x)` with each simple finite root refined by
/// Newton's method on `Σ x_i²/(z - μ_i)`, which avoids the cancellation in the
/// monomial coefficients of `p`.
pub fn separation_roots<S: Scalar>(x: &[S], pencil: &Pencil<S>) -> Result<RootSet> {
    let mut roots = root_set(&auxiliary_poly(x, pencil), pencil.dim())?;
    let w: Vec<Complex64> = x.iter().map(|v| v.to_c64() * v.to_c64()).collect();
    let mu: Vec<Complex64> = pencil.mu().iter().map(Scalar::to_c64).collect();
    for c in roots.finite.iter_mut().filter(|c| c.multiplicity == 1) {
        let mut a = c.value;
        for _ in 0..SECULAR_NEWTON_STEPS {
            if mu.iter().any(|m| (a - m).norm() <= POLE_COLLISION_TOL * (1.0 + m.norm())) {
                break;
            }
            let (mut r, mut dr) = (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0));
            for (wi, m) in w.iter().zip(&mu) {
                let inv = (a - m).inv();
                r += wi * inv;
                dr -= wi * inv * inv;
            }
            let step = r / dr;
            if !step.is_finite() {
                break;
            }
            a -= step;
        }
        c.value = a;
    }
    Ok(roots)
}

/// Everything separation of variables attaches to a phase point.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SeparatedData<S> {
    pub p: UniPoly<S>,
    pub roots: RootSet,
    /// `λ_k`, present when all finite roots are simple and off the marked points.
    pub lambdas: Option<Vec<Complex64>>,
}

pub fn separate<S: Scalar>(p: &PhasePoint<S>) -> Result<SeparatedData<S>> {
    let poly = auxiliary_poly(p.x(), p.pencil());
    let roots = separation_roots(p.x(), p.pencil())?;
    let lambdas = if roots.finite.iter().all(|c| c.multiplicity == 1) {
        eigenvalues(p, &roots.finite_values()).ok()
    } else {
        None
    };
    Ok(SeparatedData { p: poly, roots, lambdas })
}

fn check_off_poles(mu: &[Complex64], roots: &[Complex64]) -> Result<()> {
    for a in roots {
        if let Some(j) = mu.iter().position(|m| (a - m).norm() <= POLE_COLLISION_TOL * (1.0 + m.norm())) {
            return Err(Error::RootAtMarkedPoint { index: j });
        }
    }
    Ok(())
}

/// `λ_k = Σ x_i y_i / (a_k - μ_i)`.
pub fn eigenvalues<S: Scalar>(p: &PhasePoint<S>, roots: &[Complex64]) -> Result<Vec<Complex64>> {
    let fp = p.to_float();
    check_off_poles(fp.mu(), roots)?;
    Ok(roots
        .iter()
        .map(|a| (0..fp.len()).map(|i| fp.x()[i] * fp.y()[i] / (a - fp.mu()[i])).sum())
        .collect())
}

/// `|Σ ⟨v_i,v₀⟩ v_i/(a - μ_i) - λ v₀|` with `v₀ = e2`, where `⟨v_i, e2⟩ = x_i`.
pub fn eigen_residual<S: Scalar>(p: &PhasePoint<S>, a: Complex64, lambda: Complex64) -> f64 {
    let fp = p.to_float();
    let (mut e1, mut e2) = (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0));
    for i in 0..fp.len() {
        let w = fp.x()[i] / (a - fp.mu()[i]);
        e1 += w * fp.x()[i];
        e2 += w * fp.y()[i];
    }
    e1.norm().max((e2 - lambda).norm())
}

/// Rows `x_j/(a_k - μ_j)` for each root, then `x_j`, `μ_j x_j`, and `μ_j² x_j`
/// when `infinity_row` (a simple root at `∞`).
pub fn sov_matrix<S: Scalar>(x: &[S], roots: &[S], pencil: &Pencil<S>, infinity_row: bool) -> Result<DenseMatrix<S>> {
    let mu = pencil.mu();
    let mut rows = Vec::with_capacity(roots.len() + 3);
    for a in roots {
        let mut row = Vec::with_capacity(x.len());
        for (j, m) in mu.iter().enumerate() {
            let d = a.clone() - m;
            if d.is_negligible(POLE_COLLISION_TOL, 1.0 + m.magnitude()) {
                return Err(Error::RootAtMarkedPoint { index: j });
            }
            row.push(x[j].clone() / &d);
        }
        rows.push(row);
    }
    rows.push(x.to_vec());
    rows.push(x.iter().zip(mu).map(|(v, m)| v.clone() * m).collect());
    if infinity_row {
        rows.push(x.iter().zip(mu).map(|(v, m)| v.clone() * m * m).collect());
    }
    Ok(DenseMatrix::from_rows(rows))
}

/// Linear conditions on `y` saying that `b_y(z) = Σ x_j y_j Π_{l≠j}(z - μ_l)`
/// has degree at most `n - drop` and is divisible by `g`.
pub fn cleared_system<S: Scalar>(x: &[S], pencil: &Pencil<S>, g: &UniPoly<S>, drop: usize) -> Result<DenseMatrix<S>> {
    let n = pencil.dim();
    let big_n = pencil.len();
    let cols: Vec<UniPoly<S>> = (0..big_n).map(|j| pencil.cofactor(j).scale(&x[j])).collect();
    let mut rows: Vec<Vec<S>> = Vec::new();
    for k in (n + 1).saturating_sub(drop)..big_n {
        rows.push(cols.iter().map(|c| c.coeff(k)).collect());
    }
    if let Some(dg) = g.degree() {
        let rems = cols.iter().map(|c| c.rem(g)).collect::<Result<Vec<_>>>()?;
        for r in 0..dg {
            rows.push(rems.iter().map(|c| c.coeff(r)).collect());
        }
    } else {
        return Err(Error::Constraint("divisor g = 0".into()));
    }
    Ok(DenseMatrix::from_rows(rows))
}

/// `p / gcd(p, p')`, monic.
pub fn radical(p: &UniPoly<GaussRat>) -> UniPoly<GaussRat> {
    let parts = p.squarefree_decomposition();
    parts.iter().fold(UniPoly::constant(GaussRat::one()), |acc, f| &acc * &f.monic())
}

/// Exact kernel of the evaluation matrix over the distinct roots of `p`,
/// including a simple root at `∞`.
pub fn sov_kernel_exact(x: &[GaussRat], pencil: &Pencil<GaussRat>) -> Result<RankKernel<GaussRat>> {
    let p = auxiliary_poly(x, pencil);
    let deg = p.degree().ok_or(Error::Constraint("x = 0".into()))?;
    let m_inf = pencil.dim() - deg;
    let m = cleared_system(x, pencil, &radical(&p), m_inf.min(1))?;
    Ok(m.rank_kernel(0.0))
}

/// Outcome of the maximal-minor comparison.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MinorIdentity {
    /// `(-1)^c det M_c` for each deleted column `c`.
    pub minors: Vec<Complex64>,
    /// Best `κ` with `minors ≈ κ x`.
    pub kappa: Complex64,
    /// `Π x_i/p(μ_i) · Π_{j<k}(a_j - a_k) · Π_{l<m}(μ_m - μ_l)`.
    pub closed_form: Complex64,
    /// `κ / (lead(p)^{N-1} · closed_form)`; equals [`MINOR_CONSTANT`].
    pub normalized: Complex64,
    /// `max_c |minor_c - κ x_c| / max_c |minor_c|`.
    pub proportionality_residual: f64,
}

impl MinorIdentity {
    pub fn holds(&self, tol: f64) -> bool {
        self.proportionality_residual <= tol && (self.normalized - Complex64::new(MINOR_CONSTANT, 0.0)).norm() <= tol
    }
}

/// Compare the maximal minors of the `(N-1) × N` evaluation matrix with the
/// closed form. Needs `n` distinct finite roots and every `x_i ≠ 0`.
pub fn minor_identity_check<S: Scalar>(x: &[S], pencil: &Pencil<S>) -> Result<MinorIdentity> {
    if let Some(i) = x.iter().position(Scalar::is_zero) {
        return Err(Error::ZeroCoordinate { index: i });
    }
    let p = auxiliary_poly(x, pencil);
    let roots = separation_roots(x, pencil)?;
    if roots.infinity > 0 || !roots.all_simple() {
        return Err(Error::DegeneratePoint("minor identity needs n distinct finite roots".into()));
    }
    let a = roots.finite_values();
    let fpen = pencil.to_float();
    let fx: Vec<Complex64> = x.iter().map(Scalar::to_c64).collect();
    let m = sov_matrix(&fx, &a, &fpen, false)?;
    let big_n = x.len();
    let minors: Vec<Complex64> = (0..big_n)
        .map(|c| {
            let d = m.without_column(c).determinant();
            if c % 2 == 0 { d } else { -d }
        })
        .collect();
    let num: Complex64 = minors.iter().zip(&fx).map(|(mc, xc)| mc * xc.conj()).sum();
    let den: f64 = fx.iter().map(|v| v.norm_sqr()).sum();
    let kappa = num / den;
    let scale = minors.iter().map(|v| v.norm()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    let residual = minors.iter().zip(&fx).map(|(mc, xc)| (mc - kappa * xc).norm()).fold(0.0, f64::max) / scale;
    let fp = float_trimmed(&p);
    let mu = fpen.mu();
    let mut closed = Complex64::new(1.0, 0.0);
    // p(μ_i) = x_i² Π_{j≠i}(μ_i - μ_j)
    for (i, xi) in fx.iter().enumerate() {
        let cof: Complex64 = mu.iter().enumerate().filter(|&(j, _)| j != i).map(|(_, m)| mu[i] - m).product();
        closed /= xi * cof;
    }
    for j in 0..a.len() {
        for k in j + 1..a.len() {
            closed *= a[j] - a[k];
        }
    }
    for l in 0..big_n {
        for k in l + 1..big_n {
            closed *= mu[k] - mu[l];
        }
    }
    let normalized = kappa / (fp.lead().powu(big_n as u32 - 1) * closed);
    Ok(MinorIdentity { minors, kappa, closed_form: closed, normalized, proportionality_residual: residual })
}

/// `(λ_k²)` at the finite roots.
pub fn hamiltonians_via_sov<S: Scalar>(p: &PhasePoint<S>) -> Result<Vec<Complex64>> {
    let roots = separation_roots(p.x(), p.pencil())?;
    if !roots.finite.iter().all(|c| c.multiplicity == 1) {
        return Err(Error::DegeneratePoint("repeated finite root".into()));
    }
    Ok(eigenvalues(p, &roots.finite_values())?.into_iter().map(|l| l * l).collect())
}

/// `h` interpolated from `(a_k, SOV_CONSTANT · p_D(a_k) · λ_k²)`. Needs `n`
/// simple finite roots.
pub fn reconstruct_h<S: Scalar>(p: &PhasePoint<S>) -> Result<UniPoly<Complex64>> {
    let roots = separation_roots(p.x(), p.pencil())?;
    if roots.infinity > 0 || !roots.all_simple() {
        return Err(Error::DegeneratePoint("reconstruction needs n simple finite roots".into()));
    }
    let a = roots.finite_values();
    let lambdas = eigenvalues(p, &a)?;
    let pen = p.pencil().to_float();
    let pts: Vec<(Complex64, Complex64)> =
        a.iter().zip(&lambdas).map(|(ak, l)| (*ak, SOV_CONSTANT * pen.eval_p_d(ak) * l * l)).collect();
    Ok(UniPoly::interpolate(&pts))
}

/// Largest coefficientwise relative deviation between the reconstructed and
/// the directly computed `h`.
pub fn sov_duality_error<S: Scalar>(p: &PhasePoint<S>) -> Result<f64> {
    let rebuilt = reconstruct_h(p)?;
    let direct = reduced_tr_phi_squared(p).h.map(Scalar::to_c64);
    let scale = direct.max_coeff().max(rebuilt.max_coeff()).max(f64::MIN_POSITIVE);
    let len = direct.coeffs().len().max(rebuilt.coeffs().len());
    Ok((0..len).map(|k| (direct.coeff(k) - rebuilt.coeff(k)).norm()).fold(0.0, f64::max) / scale)
}

fn unit_row(v: Vec<Complex64>) -> Vec<Complex64> {
    let n = v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    if n > 0.0 { v.into_iter().map(|c| c / n).collect() } else { v }
}

/// Rank of the `n × N` matrix `x_j/(a_k - μ_j)` and the dimension of the span
/// of `ℓ_k²` as quadratic forms on the covector space `{Σxy = Σμxy = 0}/⟨x⟩`.
pub fn ell_ranks<S: Scalar>(x: &[S], pencil: &Pencil<S>, tol: f64) -> Result<(usize, usize)> {
    let roots = separation_roots(x, pencil)?;
    let a = roots.finite_values();
    let fpen = pencil.to_float();
    let fx: Vec<Complex64> = x.iter().map(Scalar::to_c64).collect();
    let full = sov_matrix(&fx, &a, &fpen, false)?;
    let ell = DenseMatrix::from_rows(full.to_rows().into_iter().take(a.len()).map(unit_row).collect());
    let ell_rank = ell.rank(tol);
    // basis of the covector space: kernel of the two constraint rows, modulo x
    // ℓ_k(x) = 0, so restricting to the whole constraint kernel gives the
    // same rank as restricting to its quotient by x
    let cons = DenseMatrix::from_rows(full.to_rows().into_iter().skip(a.len()).collect());
    let basis = cons.rank_kernel(tol).kernel;
    let restricted: Vec<Vec<Complex64>> =
        (0..a.len()).map(|k| basis.iter().map(|b| (0..b.len()).map(|j| ell[(k, j)] * b[j]).sum()).collect()).collect();
    let dim = basis.len();
    let squares: Vec<Vec<Complex64>> = restricted
        .iter()
        .map(|l| {
            let mut v = Vec::new();
            for r in 0..dim {
                for c in r..dim {
                    v.push(l[r] * l[c]);
                }
            }
            unit_row(v)
        })
        .collect();
    let sq_rank = if squares.is_empty() { 0 } else { DenseMatrix::from_rows(squares).rank(tol) };
    Ok((ell_rank, sq_rank))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phase::sample_phase_point;

    fn g(a: i64, b: i64) -> GaussRat {
        GaussRat::gauss(a, b)
    }

    fn ip(c: &[i64]) -> UniPoly<GaussRat> {
        UniPoly::new(c.iter().map(|&v| GaussRat::from(v)).collect())
    }

    fn pencil5() -> Pencil<GaussRat> {
        Pencil::standard(5).unwrap()
    }

    fn fix_a_x() -> Vec<GaussRat> {
        vec![g(1, 0), g(1, 0), g(0, 2), g(1, 0), g(1, 0)]
    }

    fn fix_c() -> PhasePoint<GaussRat> {
        let y = [3, -4, 0, 0, 1].map(|v| g(v, 0)).to_vec();
        PhasePoint::new(pencil5(), fix_a_x(), y).unwrap()
    }

    /// p by expanding each quartic product by hand-style convolution.
    fn p_oracle(x: &[GaussRat], mu: &[i64]) -> Vec<GaussRat> {
        let mut acc = vec![g(0, 0); mu.len()];
        for i in 0..mu.len() {
            let mut prod = vec![g(1, 0)];
            for (j, &m) in mu.iter().enumerate() {
                if j == i {
                    continue;
                }
                let mut next = vec![g(0, 0); prod.len() + 1];
                for (k, c) in prod.iter().enumerate() {
                    next[k + 1] = next[k + 1].clone() + c;
                    next[k] = next[k].clone() - &(c.clone() * &g(m, 0));
                }
                prod = next;
            }
            for (k, c) in prod.iter().enumerate() {
                acc[k] = acc[k].clone() + &(c.clone() * &x[i].square());
            }
        }
        acc
    }

    #[test]
    fn auxiliary_fixtures() {
        let p = auxiliary_poly(&fix_a_x(), &pencil5());
        assert_eq!(p, ip(&[24, -40, 10]));
        assert_eq!(UniPoly::new(p_oracle(&fix_a_x(), &[0, 1, 2, 3, 4])), p);
        assert_eq!(p.eval(&g(0, 0)), g(24, 0));
        let fix_b = vec![g(0, 1), g(1, 0), g(1, 0), g(0, 1), g(0, 0)];
        let pb = auxiliary_poly(&fix_b, &pencil5());
        assert_eq!(pb, ip(&[-24, 22, -4]));
        assert!(pb.eval(&g(4, 0)).is_zero());
    }

    #[test]
    fn inverse_interpolation() {
        let pen = pencil5();
        let x = point_from_polynomial(&ip(&[24, -40, 10]), &pen).unwrap();
        let sq: Vec<GaussRat> = x.iter().map(Scalar::square).collect();
        assert_eq!(sq, vec![g(1, 0), g(1, 0), g(-4, 0), g(1, 0), g(1, 0)]);
        assert!(point_from_polynomial(&UniPoly::zero(), &pen).is_err());
        // (2z-1)^2 has no exact square roots on this pencil; floats are fine
        let sq_target = ip(&[1, -4, 4]);
        assert!(matches!(point_from_polynomial(&sq_target, &pen), Err(Error::NoExactSquareRoot { .. })));
        let fx = point_from_polynomial(&sq_target.map(Scalar::to_c64), &pen.to_float()).unwrap();
        let back = auxiliary_poly(&fx, &pen.to_float());
        for k in 0..3 {
            assert!((back.coeff(k) - sq_target.coeff(k).to_c64()).norm() < 1e-12);
        }
    }

    #[test]
    fn lambda_fixture() {
        let p = fix_c();
        let a1 = 2.0 - 0.4 * 10f64.sqrt();
        let lam = eigenvalues(&p, &[Complex64::new(a1, 0.0)]).unwrap()[0];
        let oracle = 3.0 / a1 - 4.0 / (a1 - 1.0) + 1.0 / (a1 - 4.0);
        assert!((lam.re - oracle).abs() < 1e-10 && lam.im.abs() < 1e-12);
        assert!((lam.re - 18.87).abs() < 0.01);
        assert!(eigen_residual(&p, Complex64::new(a1, 0.0), lam) < 1e-10);
        let collide = eigenvalues(&p, &[Complex64::new(2.0, 0.0)]);
        assert!(matches!(collide, Err(Error::RootAtMarkedPoint { index: 2 })));
    }

    #[test]
    fn sov_matrix_fixture() {
        let pen = pencil5();
        let x = fix_a_x();
        let k = sov_kernel_exact(&x, &pen).unwrap();
        assert_eq!(k.rank, 4);
        assert_eq!(k.kernel.len(), 1);
        let r = DenseMatrix::from_rows(vec![k.kernel[0].clone(), x.clone()]).rank(0.0);
        assert_eq!(r, 1);
        let fx: Vec<Complex64> = x.iter().map(Scalar::to_c64).collect();
        let a = root_set(&auxiliary_poly(&x, &pen), 2).unwrap().finite_values();
        let m = sov_matrix(&fx, &a, &pen.to_float(), false).unwrap();
        assert!(m.mul_vec(&fx).iter().all(|v| v.norm() < 1e-12));
        assert_eq!(m.rank(1e-10), 4);
        assert_eq!(ell_ranks(&x, &pen, 1e-10).unwrap(), (2, 2));
    }

    #[test]
    fn duality_on_fixture() {
        let p = fix_c();
        assert!(sov_duality_error(&p).unwrap() < 1e-12);
        let l2 = hamiltonians_via_sov(&p).unwrap();
        let rq = reduced_tr_phi_squared(&p);
        let pd = p.pencil().to_float().p_d();
        let a = root_set(&auxiliary_poly(p.x(), p.pencil()), 2).unwrap().finite_values();
        for (ak, l) in a.iter().zip(&l2) {
            let h = rq.h.map(Scalar::to_c64).eval(ak);
            assert!((h / pd.eval(ak) - SOV_CONSTANT * l).norm() < 1e-9 * l.norm());
        }
        let rest = PhasePoint::new(pencil5(), fix_a_x(), fix_a_x()).unwrap();
        assert!(hamiltonians_via_sov(&rest).unwrap().iter().all(|v| v.norm() < 1e-20));
    }

    #[test]
    fn minor_constant_is_stable() {
        let r = minor_identity_check(&fix_a_x(), &pencil5()).unwrap();
        assert!(r.proportionality_residual < 1e-10);
        assert!(r.holds(1e-9), "normalized = {}", r.normalized);
        for (n_pts, s) in [(6, 0), (6, 1), (7, 0), (7, 1), (8, 0)] {
            let pen = Pencil::<GaussRat>::standard(n_pts).unwrap();
            let p = sample_phase_point(&pen, 9, s).unwrap();
            if p.x().iter().any(Scalar::is_zero) {
                continue;
            }
            let r = minor_identity_check(p.x(), &pen).unwrap();
            assert!(r.holds(1e-9), "normalized = {}", r.normalized);
        }
    }

    #[test]
    fn exact_rows_match_float_rows() {
        // every w_i is a square in Q(i) on this pencil, so (z - 1)^2 lifts exactly
        let pen = Pencil::new([0, 2, 3, 4, 6].map(GaussRat::from).to_vec()).unwrap();
        let x = point_from_polynomial(&ip(&[1, -2, 1]), &pen).unwrap();
        let k = sov_kernel_exact(&x, &pen).unwrap();
        assert_eq!(k.kernel.len(), 2);
        let m = sov_matrix(&x, &[g(1, 0)], &pen, false).unwrap();
        assert_eq!(m.rank(0.0), 3);
        assert!(matches!(sov_matrix(&x, &[g(2, 0)], &pen, false), Err(Error::RootAtMarkedPoint { index: 1 })));
    }
}
