//! Very stable versus wobbly points, the image in the symmetric product of
//! `P¹`, and nilpotent Higgs fields over wobbly points.
//!
//! Multiplicities are decided exactly (square-free decomposition) for exact
//! scalars. Float points fall back to root clustering at
//! [`FLOAT_CLASSIFY_TOL`], which is an estimate rather than a decision.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::algebra::{poly_roots, DenseMatrix, GaussRat, RankKernel, RootCluster, Scalar, UniPoly};
use crate::error::{Error, Result};
use crate::higgs::{hamiltonians, hecke_transform};
use crate::phase::{Pencil, PhasePoint};
use crate::sov::{auxiliary_poly, cleared_system, eigenvalues, RootSet};

/// Root clustering and zero tests for float points.
pub const FLOAT_CLASSIFY_TOL: f64 = 1e-6;

/// Scalars whose polynomials can be split by root multiplicity.
pub trait Factorize: Scalar {
    /// `(P_1, P_2, ...)`, each monic and square-free, with
    /// `p = lead(p) · Π P_m^m`.
    fn multiplicity_parts(p: &UniPoly<Self>) -> Result<Vec<UniPoly<Self>>>;

    /// Zero test for a coordinate of `x`.
    fn is_zero_coordinate(v: &Self, scale: f64) -> bool;

    /// Tolerance for float rank and nilpotency checks; unused when exact.
    fn check_tol() -> f64;

    /// `p` with rounding-level leading coefficients removed (floats only).
    fn trim(p: UniPoly<Self>) -> UniPoly<Self> {
        p
    }
}

impl Factorize for GaussRat {
    fn multiplicity_parts(p: &UniPoly<Self>) -> Result<Vec<UniPoly<Self>>> {
        Ok(p.squarefree_decomposition())
    }

    fn is_zero_coordinate(v: &Self, _scale: f64) -> bool {
        v.is_zero()
    }

    fn check_tol() -> f64 {
        0.0
    }
}

impl Factorize for Complex64 {
    fn multiplicity_parts(p: &UniPoly<Self>) -> Result<Vec<UniPoly<Self>>> {
        if p.degree().unwrap_or(0) == 0 {
            return Ok(Vec::new());
        }
        let clusters = poly_roots(p, FLOAT_CLASSIFY_TOL)?;
        let top = clusters.iter().map(|c| c.multiplicity).max().unwrap_or(0);
        Ok((1..=top)
            .map(|m| {
                let roots: Vec<Complex64> = clusters.iter().filter(|c| c.multiplicity == m).map(|c| c.value).collect();
                UniPoly::from_roots(roots.iter())
            })
            .collect())
    }

    fn is_zero_coordinate(v: &Self, scale: f64) -> bool {
        v.norm() <= 1e-12 * scale
    }

    fn check_tol() -> f64 {
        FLOAT_CLASSIFY_TOL
    }

    fn trim(p: UniPoly<Self>) -> UniPoly<Self> {
        crate::sov::float_trimmed(&p)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    VeryStable,
    Wobbly,
    /// Some `x_i = 0`; the point is studied on the pencil without those `μ_i`.
    Degenerate,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StabilityVerdict<S> {
    pub verdict: Verdict,
    /// All roots of `p` (finite and `∞`) are simple.
    pub very_stable: bool,
    #[serde(rename = "N")]
    pub n_points: usize,
    pub p: UniPoly<S>,
    pub roots: RootSet,
    /// Indices with `x_i = 0`.
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub zero_indices: Vec<usize>,
    /// Verdict on the pencil with `zero_indices` removed.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub reduced: Option<Box<StabilityVerdict<S>>>,
}

impl<S> StabilityVerdict<S> {
    /// Verdicts from the top level down through every reduction.
    pub fn chain(&self) -> Vec<Verdict> {
        let mut out = vec![self.verdict];
        let mut cur = self;
        while let Some(r) = &cur.reduced {
            out.push(r.verdict);
            cur = r;
        }
        out
    }
}

fn parts_and_roots<S: Factorize>(p: &UniPoly<S>, n: usize) -> Result<(Vec<UniPoly<S>>, RootSet)> {
    let deg = p.degree().ok_or(Error::Constraint("x = 0".into()))?;
    let parts = S::multiplicity_parts(p)?;
    let mut finite: Vec<RootCluster> = Vec::new();
    for (k, part) in parts.iter().enumerate() {
        if part.degree().unwrap_or(0) == 0 {
            continue;
        }
        for c in poly_roots(&part.map(Scalar::to_c64), crate::algebra::DEFAULT_ROOT_TOL)? {
            finite.push(RootCluster { value: c.value, multiplicity: c.multiplicity * (k + 1) });
        }
    }
    finite.sort_by(|a, b| a.value.re.total_cmp(&b.value.re).then(a.value.im.total_cmp(&b.value.im)));
    Ok((parts, RootSet { finite, infinity: n.saturating_sub(deg) }))
}

fn scale_of<S: Scalar>(x: &[S]) -> f64 {
    x.iter().map(Scalar::magnitude).fold(0.0, f64::max)
}

fn validate<S: Scalar>(x: &[S], pencil: &Pencil<S>) -> Result<()> {
    PhasePoint::at_rest(pencil.clone(), x.to_vec()).map(|_| ())
}

fn split<S: Factorize>(x: &[S]) -> Result<(Vec<usize>, Vec<usize>)> {
    let scale = scale_of(x);
    let (zero, keep): (Vec<usize>, Vec<usize>) = (0..x.len()).partition(|&i| S::is_zero_coordinate(&x[i], scale));
    if keep.len() < 3 {
        return Err(Error::DegeneratePoint(format!("only {} nonzero coordinates", keep.len())));
    }
    Ok((zero, keep))
}

fn classify_inner<S: Factorize>(x: &[S], pencil: &Pencil<S>) -> Result<StabilityVerdict<S>> {
    let n = pencil.dim();
    let p = S::trim(auxiliary_poly(x, pencil));
    let (parts, roots) = parts_and_roots(&p, n)?;
    let repeated = parts.iter().skip(1).any(|q| q.degree().unwrap_or(0) > 0);
    let very_stable = !repeated && roots.infinity <= 1;
    let (zero, keep) = split(x)?;
    let (verdict, reduced) = if zero.is_empty() {
        (if very_stable { Verdict::VeryStable } else { Verdict::Wobbly }, None)
    } else {
        let sub = pencil.sub_pencil(&keep)?;
        let xr: Vec<S> = keep.iter().map(|&k| x[k].clone()).collect();
        (Verdict::Degenerate, Some(Box::new(classify_inner(&xr, &sub)?)))
    };
    Ok(StabilityVerdict { verdict, very_stable, n_points: pencil.len(), p, roots, zero_indices: zero, reduced })
}

/// Verdict for a point `x` of `X`, recursing through coordinates with `x_i = 0`.
pub fn classify<S: Factorize>(x: &[S], pencil: &Pencil<S>) -> Result<StabilityVerdict<S>> {
    validate(x, pencil)?;
    classify_inner(x, pencil)
}

/// The divisor of `p` in the `n`-fold symmetric product of `P¹`.
pub fn symmetric_product_image<S: Factorize>(x: &[S], pencil: &Pencil<S>) -> Result<RootSet> {
    validate(x, pencil)?;
    let p = S::trim(auxiliary_poly(x, pencil));
    Ok(parts_and_roots(&p, pencil.dim())?.1)
}

/// Covectors `y` with `b_y` of degree at most `n - drop` and divisible by
/// `g`. With `g` the radical of `p` and `drop = min(m_∞, 1)` this is the
/// kernel of the evaluation matrix over the distinct roots.
fn kernel_for<S: Factorize>(x: &[S], pencil: &Pencil<S>, witness: bool) -> Result<RankKernel<S>> {
    let p = S::trim(auxiliary_poly(x, pencil));
    let (parts, roots) = parts_and_roots(&p, pencil.dim())?;
    let mut g = UniPoly::constant(S::one());
    for (k, part) in parts.iter().enumerate() {
        let e = if witness { (k + 2) / 2 } else { 1 };
        g = &g * &part.pow(e as u32);
    }
    let drop = if witness { roots.infinity.div_ceil(2) } else { roots.infinity.min(1) };
    let m = cleared_system(x, pencil, &g, drop)?;
    Ok(m.rank_kernel(S::check_tol()))
}

/// Kernel of the evaluation matrix over the distinct roots of `p` (with a
/// row for a root at `∞`). Requires every `x_i ≠ 0`.
pub fn sov_kernel<S: Factorize>(x: &[S], pencil: &Pencil<S>) -> Result<RankKernel<S>> {
    let (zero, _) = split(x)?;
    if let Some(&i) = zero.first() {
        return Err(Error::ZeroCoordinate { index: i });
    }
    kernel_for(x, pencil, false)
}

fn independent_of<S: Scalar>(x: &[S], v: &[S], tol: f64) -> bool {
    DenseMatrix::from_rows(vec![x.to_vec(), v.to_vec()]).rank(tol) == 2
}

/// Check that `y` is a nonzero covector at `x` on the nilpotent cone: all
/// Hamiltonians vanish and `b² + ac = 0`.
pub fn verify_witness<S: Factorize>(x: &[S], y: &[S], pencil: &Pencil<S>) -> Result<bool> {
    let tol = S::check_tol();
    if !independent_of(x, y, tol) {
        return Ok(false);
    }
    let pt = PhasePoint::new(pencil.clone(), x.to_vec(), y.to_vec())?;
    let sx = scale_of(x);
    let sy = scale_of(y);
    let hs = hamiltonians(&pt);
    let scale_f = (sx * sy).powi(2) * pencil.len() as f64;
    let f_zero = hs.iter().all(|f| f.is_negligible(tol, scale_f));
    let t = hecke_transform(&pt);
    let nil_scale = (t.b.max_coeff().powi(2) + t.a.max_coeff() * t.c.max_coeff()) * pencil.len() as f64;
    Ok(f_zero && t.is_nilpotent(tol * nil_scale))
}

/// Float kernel vectors are rescaled so the largest entry is 1.
fn normalize<S: Scalar>(v: Vec<S>) -> Vec<S> {
    if S::EXACT {
        return v;
    }
    let m = scale_of(&v);
    let inv = v.iter().find(|c| c.magnitude() == m).map(Scalar::inv).unwrap_or(S::one());
    v.into_iter().map(|c| c * &inv).collect()
}

/// A nonzero covector `y` at `x` with nilpotent Higgs field, or `None` when
/// `x` is very stable. Witnesses are verified before being returned.
pub fn nilpotent_witness<S: Factorize>(x: &[S], pencil: &Pencil<S>) -> Result<Option<Vec<S>>> {
    let v = classify(x, pencil)?;
    witness_for(x, pencil, &v)
}

fn witness_for<S: Factorize>(x: &[S], pencil: &Pencil<S>, v: &StabilityVerdict<S>) -> Result<Option<Vec<S>>> {
    match v.verdict {
        Verdict::VeryStable => Ok(None),
        Verdict::Degenerate => {
            let reduced = v.reduced.as_deref().expect("degenerate verdict carries a reduction");
            let keep: Vec<usize> = (0..x.len()).filter(|i| !v.zero_indices.contains(i)).collect();
            let xr: Vec<S> = keep.iter().map(|&k| x[k].clone()).collect();
            let sub = pencil.sub_pencil(&keep)?;
            match witness_for(&xr, &sub, reduced)? {
                Some(yr) => {
                    let mut y = vec![S::zero(); x.len()];
                    for (k, val) in keep.iter().zip(yr) {
                        y[*k] = val;
                    }
                    if !verify_witness(x, &y, pencil)? {
                        return Err(Error::WitnessUnavailable("padded witness failed verification".into()));
                    }
                    Ok(Some(y))
                }
                None if v.very_stable => Ok(None),
                None => Err(Error::WitnessUnavailable(
                    "repeated root sits at a marked point with x_i = 0; the reduced point is very stable".into(),
                )),
            }
        }
        Verdict::Wobbly => {
            let k = kernel_for(x, pencil, true)?;
            let tol = S::check_tol();
            for cand in k.kernel {
                if !independent_of(x, &cand, tol) {
                    continue;
                }
                let y = normalize(cand);
                if verify_witness(x, &y, pencil)? {
                    return Ok(Some(y));
                }
            }
            Err(Error::WitnessUnavailable("no kernel vector passed verification".into()))
        }
    }
}

/// Either a verified witness or a kernel equal to `span(x)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Dichotomy<S> {
    pub verdict: StabilityVerdict<S>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub witness: Option<Vec<S>>,
    /// Kernel dimension of the evaluation matrix on the innermost
    /// (non-degenerate) pencil.
    pub kernel_dim: usize,
}

impl<S: Factorize> Dichotomy<S> {
    /// Exactly one of the two alternatives holds, matching the verdict.
    pub fn consistent(&self) -> bool {
        let wobbly = !self.verdict.very_stable;
        match (&self.witness, wobbly) {
            (Some(_), true) => true,
            (None, false) => self.kernel_dim == 1,
            _ => false,
        }
    }
}

pub fn dichotomy<S: Factorize>(x: &[S], pencil: &Pencil<S>) -> Result<Dichotomy<S>> {
    let verdict = classify(x, pencil)?;
    let witness = witness_for(x, pencil, &verdict)?;
    let (zero, keep) = split(x)?;
    let kernel_dim = if zero.is_empty() {
        sov_kernel(x, pencil)?.kernel.len()
    } else {
        let mut cur_x: Vec<S> = keep.iter().map(|&k| x[k].clone()).collect();
        let mut cur_p = pencil.sub_pencil(&keep)?;
        loop {
            let (z, k) = split(&cur_x)?;
            if z.is_empty() {
                break sov_kernel(&cur_x, &cur_p)?.kernel.len();
            }
            cur_p = cur_p.sub_pencil(&k)?;
            cur_x = k.iter().map(|&i| cur_x[i].clone()).collect();
        }
    };
    Ok(Dichotomy { verdict, witness, kernel_dim })
}

/// `min_k |λ_k|` along one covector ray, for each radius.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ProperProbe {
    pub radii: Vec<f64>,
    pub min_abs_lambda: Vec<f64>,
    /// Least-squares slope of `log min|λ|` against `log R`; `None` when
    /// `λ` vanishes along the ray.
    pub growth_exponent: Option<f64>,
}

/// `min|λ|/|y|` below this counts as vanishing; a double root is only located
/// to about the square root of the working precision.
pub const LAMBDA_VANISH_TOL: f64 = 1e-8;

/// Track `min_k |λ_k|` for covectors `R·y` at the finite roots of `p`.
pub fn properness_probe<S: Scalar>(p: &PhasePoint<S>, radii: &[f64]) -> Result<ProperProbe> {
    let fp = p.to_float();
    let poly = auxiliary_poly(p.x(), p.pencil());
    let roots = crate::sov::root_set(&poly, p.pencil().dim())?;
    let base = eigenvalues(&fp, &roots.finite_values())?;
    let ynorm = fp.y().iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt().max(f64::MIN_POSITIVE);
    let min0 = base.iter().map(|l| l.norm() / ynorm).fold(f64::INFINITY, f64::min);
    let min_abs_lambda: Vec<f64> = radii.iter().map(|r| r * min0).collect();
    let vanishes = min0 <= LAMBDA_VANISH_TOL || !min0.is_finite();
    let growth_exponent = if vanishes || radii.len() < 2 {
        None
    } else {
        let pts: Vec<(f64, f64)> = radii.iter().zip(&min_abs_lambda).map(|(r, m)| (r.ln(), m.ln())).collect();
        let k = pts.len() as f64;
        let (sx, sy) = pts.iter().fold((0.0, 0.0), |(a, b), (x, y)| (a + x, b + y));
        let (mx, my) = (sx / k, sy / k);
        let num: f64 = pts.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
        let den: f64 = pts.iter().map(|(x, _)| (x - mx).powi(2)).sum();
        Some(num / den)
    };
    Ok(ProperProbe { radii: radii.to_vec(), min_abs_lambda, growth_exponent })
}
