//! Points of `X = Q ∩ Q1` and their cotangent representatives.
//!
//! A point is a vector `x ∈ C^N` with `Σ x_i² = 0` and `Σ μ_i x_i² = 0`; a
//! covector at `x` is stored as a full vector `y` with `Σ x_i y_i = 0` and
//! `Σ μ_i x_i y_i = 0`, modulo the gauge direction `y ~ y + t x`. Indices in
//! this API are 0-based.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::algebra::{GaussRat, Scalar, UniPoly};
use crate::error::{Error, Result};

/// Relative tolerance for float-mode constraint checks.
pub const FLOAT_CONSTRAINT_TOL: f64 = 1e-9;
const MAX_SAMPLER_ATTEMPTS: usize = 20_000;

/// The marked points `μ_1..μ_N` of the pencil `z q - q1`.
#[derive(Clone, Debug, PartialEq)]
pub struct Pencil<S> {
    mu: Vec<S>,
}

impl<S: Scalar> Pencil<S> {
    /// Requires `N >= 5` pairwise distinct points.
    pub fn new(mu: Vec<S>) -> Result<Self> {
        if mu.len() < 5 {
            return Err(Error::DegeneratePencil(format!("need N >= 5 marked points, got {}", mu.len())));
        }
        Self::with_min_size(mu, 5)
    }

    fn with_min_size(mu: Vec<S>, min: usize) -> Result<Self> {
        if mu.len() < min {
            return Err(Error::DegeneratePencil(format!("need at least {min} marked points")));
        }
        for a in 0..mu.len() {
            for b in a + 1..mu.len() {
                if (mu[a].clone() - &mu[b]).is_zero() {
                    return Err(Error::DegeneratePencil(format!("mu[{a}] = mu[{b}]")));
                }
            }
        }
        Ok(Pencil { mu })
    }

    /// `μ = (0, 1, ..., N-1)`.
    pub fn standard(n_points: usize) -> Result<Self> {
        Self::new((0..n_points as i64).map(S::from_i64).collect())
    }

    /// Sub-pencil on the kept indices. Used by dimension reduction, so it
    /// may have fewer than five points (never fewer than three).
    pub fn sub_pencil(&self, keep: &[usize]) -> Result<Self> {
        Self::with_min_size(keep.iter().map(|&k| self.mu[k].clone()).collect(), 3)
    }

    pub fn mu(&self) -> &[S] {
        &self.mu
    }

    /// Number of marked points `N`.
    pub fn len(&self) -> usize {
        self.mu.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mu.is_empty()
    }

    /// Dimension `n = N - 3` of `X`.
    pub fn dim(&self) -> usize {
        self.mu.len() - 3
    }

    /// `p_D(z) = Π (z - μ_i)`.
    pub fn p_d(&self) -> UniPoly<S> {
        UniPoly::from_roots(self.mu.iter())
    }

    /// `p_D(z)` as the product `Π (z - μ_j)`; stable in floating point near roots.
    pub fn eval_p_d(&self, z: &S) -> S {
        self.mu.iter().fold(S::one(), |acc, m| acc * &(z.clone() - m))
    }

    /// `Π_{j≠i} (z - μ_j)`.
    pub fn cofactor(&self, i: usize) -> UniPoly<S> {
        UniPoly::from_roots(self.mu.iter().enumerate().filter(|&(j, _)| j != i).map(|(_, m)| m))
    }

    /// `w_i = Π_{j≠i} (μ_i - μ_j)`.
    pub fn weight(&self, i: usize) -> S {
        self.mu
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != i)
            .fold(S::one(), |acc, (_, m)| acc * &(self.mu[i].clone() - m))
    }

    pub fn index_of_pole(&self, z: &S) -> Option<usize> {
        self.mu.iter().position(|m| (m.clone() - z).is_zero())
    }

    pub fn to_float(&self) -> Pencil<Complex64> {
        Pencil { mu: self.mu.iter().map(Scalar::to_c64).collect() }
    }
}

/// Residuals `(Σx², Σμx², Σxy, Σμxy)`.
pub fn constraint_residuals<S: Scalar>(mu: &[S], x: &[S], y: &[S]) -> [S; 4] {
    let mut r = [S::zero(), S::zero(), S::zero(), S::zero()];
    for k in 0..x.len() {
        let xx = x[k].clone() * &x[k];
        let xy = x[k].clone() * &y[k];
        r[0] = r[0].clone() + &xx;
        r[1] = r[1].clone() + &(xx * &mu[k]);
        r[2] = r[2].clone() + &xy;
        r[3] = r[3].clone() + &(xy * &mu[k]);
    }
    r
}

fn residual_scale<S: Scalar>(mu: &[S], x: &[S], y: &[S]) -> f64 {
    let mx = x.iter().map(Scalar::magnitude).fold(0.0, f64::max);
    let my = y.iter().map(Scalar::magnitude).fold(0.0, f64::max).max(mx);
    let mm = mu.iter().map(Scalar::magnitude).fold(1.0, f64::max);
    mx * my * mm * x.len() as f64
}

/// A cotangent representative `(x, y)` satisfying all four constraints.
#[derive(Clone, Debug, PartialEq)]
pub struct PhasePoint<S> {
    pencil: Pencil<S>,
    x: Vec<S>,
    y: Vec<S>,
}

impl<S: Scalar> PhasePoint<S> {
    /// Validates the four constraints: exactly for exact scalars, to
    /// [`FLOAT_CONSTRAINT_TOL`] relative for floats.
    pub fn new(pencil: Pencil<S>, x: Vec<S>, y: Vec<S>) -> Result<Self> {
        let n = pencil.len();
        if x.len() != n || y.len() != n {
            return Err(Error::BadIndex(format!("expected vectors of length {n}")));
        }
        if x.iter().all(Scalar::is_zero) {
            return Err(Error::Constraint("x = 0".into()));
        }
        let res = constraint_residuals(pencil.mu(), &x, &y);
        let scale = residual_scale(pencil.mu(), &x, &y);
        let names = ["Σx²", "Σμx²", "Σxy", "Σμxy"];
        for (r, name) in res.iter().zip(names) {
            if !r.is_negligible(FLOAT_CONSTRAINT_TOL, scale) {
                return Err(Error::Constraint(format!("{name} = {r:?}")));
            }
        }
        Ok(PhasePoint { pencil, x, y })
    }

    /// The point `x` with the zero covector.
    pub fn at_rest(pencil: Pencil<S>, x: Vec<S>) -> Result<Self> {
        let y = vec![S::zero(); x.len()];
        Self::new(pencil, x, y)
    }

    pub fn pencil(&self) -> &Pencil<S> {
        &self.pencil
    }

    pub fn mu(&self) -> &[S] {
        self.pencil.mu()
    }

    pub fn x(&self) -> &[S] {
        &self.x
    }

    pub fn y(&self) -> &[S] {
        &self.y
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    pub fn residuals(&self) -> [S; 4] {
        constraint_residuals(self.mu(), &self.x, &self.y)
    }

    /// Same point, different covector (validated).
    pub fn with_covector(&self, y: Vec<S>) -> Result<Self> {
        Self::new(self.pencil.clone(), self.x.clone(), y)
    }

    /// `⟨v_i, v_j⟩ = x_i y_j - x_j y_i`.
    pub fn pair_invariant(&self, i: usize, j: usize) -> S {
        pair(&self.x, &self.y, i, j)
    }

    /// `y ↦ y + t x`. Constraints are preserved without re-validation.
    pub fn gauge_shift(&self, t: &S) -> Self {
        let y = self.y.iter().zip(&self.x).map(|(y, x)| y.clone() + &(x.clone() * t)).collect();
        PhasePoint { pencil: self.pencil.clone(), x: self.x.clone(), y }
    }

    /// `{f_i, f_j}` under the canonical bracket `{x_k, y_l} = δ_kl`.
    pub fn poisson_bracket(&self, i: usize, j: usize) -> S {
        poisson_bracket_raw(self.mu(), &self.x, &self.y, i, j)
    }

    pub fn to_float(&self) -> PhasePoint<Complex64> {
        PhasePoint {
            pencil: self.pencil.to_float(),
            x: self.x.iter().map(Scalar::to_c64).collect(),
            y: self.y.iter().map(Scalar::to_c64).collect(),
        }
    }
}

fn pair<S: Scalar>(x: &[S], y: &[S], i: usize, j: usize) -> S {
    x[i].clone() * &y[j] - x[j].clone() * &y[i]
}

/// Gradient `(∂f_i/∂x, ∂f_i/∂y)` of `f_i = Σ_{j≠i} ⟨v_i,v_j⟩² / (μ_i - μ_j)`
/// at an arbitrary (not necessarily constrained) `(x, y)`.
pub fn hamiltonian_gradient<S: Scalar>(mu: &[S], x: &[S], y: &[S], i: usize) -> (Vec<S>, Vec<S>) {
    let n = x.len();
    let mut gx = vec![S::zero(); n];
    let mut gy = vec![S::zero(); n];
    for j in (0..n).filter(|&j| j != i) {
        let c = pair(x, y, i, j) * S::from_i64(2) / (mu[i].clone() - &mu[j]);
        // ∂P_ij/∂x_i = y_j, ∂P_ij/∂x_j = -y_i, ∂P_ij/∂y_j = x_i, ∂P_ij/∂y_i = -x_j
        gx[i] = gx[i].clone() + &(c.clone() * &y[j]);
        gx[j] = gx[j].clone() - &(c.clone() * &y[i]);
        gy[j] = gy[j].clone() + &(c.clone() * &x[i]);
        gy[i] = gy[i].clone() - &(c * &x[j]);
    }
    (gx, gy)
}

/// `{f_i, f_j}` at an arbitrary `(x, y)`; see [`PhasePoint::poisson_bracket`].
pub fn poisson_bracket_raw<S: Scalar>(mu: &[S], x: &[S], y: &[S], i: usize, j: usize) -> S {
    let (ax, ay) = hamiltonian_gradient(mu, x, y, i);
    let (bx, by) = hamiltonian_gradient(mu, x, y, j);
    (0..x.len()).fold(S::zero(), |acc, k| acc + &(ax[k].clone() * &by[k]) - &(ay[k].clone() * &bx[k]))
}

/// Deterministic generator for `(seed, stream)`; streams give independent,
/// reproducible sequences per trial.
pub fn sampler_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Scalars the samplers can draw.
pub trait SampleScalar: Scalar {
    /// Free coordinate draw: small Gaussian integers (exact) or a uniform
    /// box in `[-1, 1]²` (float).
    fn draw<R: Rng + ?Sized>(rng: &mut R) -> Self;
}

impl SampleScalar for GaussRat {
    fn draw<R: Rng + ?Sized>(rng: &mut R) -> Self {
        GaussRat::gauss(rng.random_range(-2..=2), rng.random_range(-2..=2))
    }
}

impl SampleScalar for Complex64 {
    fn draw<R: Rng + ?Sized>(rng: &mut R) -> Self {
        Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
    }
}

/// Draw `x_3..x_N`, solve the 2×2 system for `(x_1², x_2²)` and take square
/// roots. Exact mode rejects draws whose squares have no root in Q(i).
pub fn sample_point_x<S: SampleScalar, R: Rng + ?Sized>(pencil: &Pencil<S>, rng: &mut R) -> Result<Vec<S>> {
    let mu = pencil.mu();
    let n = mu.len();
    let det = mu[1].clone() - &mu[0];
    if det.is_zero() {
        return Err(Error::DegeneratePencil("mu_1 = mu_2".into()));
    }
    for _ in 0..MAX_SAMPLER_ATTEMPTS {
        let mut x: Vec<S> = std::iter::repeat_with(|| S::zero()).take(2).collect();
        x.extend((2..n).map(|_| S::draw(rng)));
        let (mut r0, mut r1) = (S::zero(), S::zero());
        for k in 2..n {
            let sq = x[k].square();
            r1 = r1 + &(sq.clone() * &mu[k]);
            r0 = r0 + &sq;
        }
        // x1² + x2² = -r0, μ1 x1² + μ2 x2² = -r1
        let u1 = (r1.clone() - &(mu[1].clone() * &r0)) / &det;
        let u2 = (mu[0].clone() * &r0 - &r1) / &det;
        let (Some(a), Some(b)) = (u1.try_sqrt(), u2.try_sqrt()) else { continue };
        x[0] = a;
        x[1] = b;
        if x.iter().all(Scalar::is_zero) {
            continue;
        }
        return Ok(x);
    }
    Err(Error::SamplingExhausted(MAX_SAMPLER_ATTEMPTS))
}

/// Draw the free entries of `y`, then solve `Σxy = 0`, `Σμxy = 0` for a
/// pivot pair `(i, j)` with `x_i, x_j ≠ 0`, preferring `(0, 1)`.
pub fn sample_point_y<S: SampleScalar, R: Rng + ?Sized>(pencil: &Pencil<S>, x: &[S], rng: &mut R) -> Result<Vec<S>> {
    let mu = pencil.mu();
    let nz: Vec<usize> = (0..x.len()).filter(|&k| !x[k].is_zero()).collect();
    if nz.len() < 2 {
        return Err(Error::DegeneratePoint("fewer than two nonzero coordinates".into()));
    }
    let (i, j) = (nz[0], nz[1]);
    let mut y: Vec<S> = (0..x.len()).map(|k| if k == i || k == j { S::zero() } else { S::draw(rng) }).collect();
    let (mut s0, mut s1) = (S::zero(), S::zero());
    for k in 0..x.len() {
        let xy = x[k].clone() * &y[k];
        s1 = s1 + &(xy.clone() * &mu[k]);
        s0 = s0 + &xy;
    }
    // u = x_i y_i, v = x_j y_j: u + v = -s0, μ_i u + μ_j v = -s1
    let v = (mu[i].clone() * &s0 - &s1) / &(mu[j].clone() - &mu[i]);
    let u = -s0 - &v;
    y[i] = u / &x[i];
    y[j] = v / &x[j];
    Ok(y)
}

/// A full random phase point for `(seed, stream)`.
pub fn sample_phase_point<S: SampleScalar>(pencil: &Pencil<S>, seed: u64, stream: u64) -> Result<PhasePoint<S>> {
    let mut rng = sampler_rng(seed, stream);
    loop {
        let x = sample_point_x(pencil, &mut rng)?;
        if x.iter().filter(|v| !v.is_zero()).count() < 2 {
            continue;
        }
        let y = sample_point_y(pencil, &x, &mut rng)?;
        return PhasePoint::new(pencil.clone(), x, y);
    }
}

/// `n` distinct rationals `a/b` with `1 <= b <= 3`, drawn from `seed` and
/// sorted.
pub fn random_rational_pencil(n_points: usize, seed: u64) -> Result<Pencil<GaussRat>> {
    if n_points < 5 {
        return Err(Error::DegeneratePencil(format!("N = {n_points} < 5")));
    }
    let mut rng = sampler_rng(seed, u64::MAX);
    let span = 4 * n_points as i64;
    let mut vals: Vec<num_rational::BigRational> = Vec::with_capacity(n_points);
    while vals.len() < n_points {
        let v = num_rational::BigRational::new(rng.random_range(-span..=span).into(), rng.random_range(1..=3i64).into());
        if !vals.contains(&v) {
            vals.push(v);
        }
    }
    vals.sort();
    Pencil::new(vals.into_iter().map(GaussRat::real).collect())
}

/// JSON form `{"mode", "N", "mu", "x", "y"}` of a phase point. `y` may be
/// omitted on input, meaning the zero covector.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "lowercase")]
pub enum PointDocument {
    Exact {
        #[serde(rename = "N")]
        n: usize,
        mu: Vec<GaussRat>,
        x: Vec<GaussRat>,
        #[serde(default)]
        y: Vec<GaussRat>,
    },
    Float {
        #[serde(rename = "N")]
        n: usize,
        mu: Vec<Complex64>,
        x: Vec<Complex64>,
        #[serde(default)]
        y: Vec<Complex64>,
    },
}

/// A phase point of either mode.
#[derive(Clone, Debug, PartialEq)]
pub enum AnyPoint {
    Exact(PhasePoint<GaussRat>),
    Float(PhasePoint<Complex64>),
}

fn point_from_doc<S: Scalar>(n: usize, mu: Vec<S>, x: Vec<S>, mut y: Vec<S>) -> Result<PhasePoint<S>> {
    if mu.len() != n {
        return Err(Error::Parse(format!("N = {n} but mu has {} entries", mu.len())));
    }
    if y.is_empty() {
        y = vec![S::zero(); n];
    }
    PhasePoint::new(Pencil::new(mu)?, x, y)
}

impl TryFrom<PointDocument> for AnyPoint {
    type Error = Error;
    fn try_from(doc: PointDocument) -> Result<Self> {
        Ok(match doc {
            PointDocument::Exact { n, mu, x, y } => AnyPoint::Exact(point_from_doc(n, mu, x, y)?),
            PointDocument::Float { n, mu, x, y } => AnyPoint::Float(point_from_doc(n, mu, x, y)?),
        })
    }
}

impl From<&PhasePoint<GaussRat>> for PointDocument {
    fn from(p: &PhasePoint<GaussRat>) -> Self {
        PointDocument::Exact { n: p.len(), mu: p.mu().to_vec(), x: p.x.clone(), y: p.y.clone() }
    }
}

impl From<&PhasePoint<Complex64>> for PointDocument {
    fn from(p: &PhasePoint<Complex64>) -> Self {
        PointDocument::Float { n: p.len(), mu: p.mu().to_vec(), x: p.x.clone(), y: p.y.clone() }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g(a: i64, b: i64) -> GaussRat {
        GaussRat::gauss(a, b)
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

    #[test]
    fn pencil_validation() {
        assert!(Pencil::<GaussRat>::standard(4).is_err());
        let dup = [0, 1, 2, 2, 4].map(GaussRat::from).to_vec();
        assert!(matches!(Pencil::new(dup), Err(Error::DegeneratePencil(_))));
    }

    #[test]
    fn fixture_points_satisfy_constraints() {
        let fix_b_x = vec![g(0, 1), g(1, 0), g(1, 0), g(0, 1), g(0, 0)];
        assert!(PhasePoint::at_rest(pencil5(), fix_a_x()).is_ok());
        assert!(PhasePoint::at_rest(pencil5(), fix_b_x).is_ok());
        let p = fix_c();
        assert!(p.residuals().iter().all(Scalar::is_zero));
        // y = x is always admissible
        assert!(PhasePoint::new(pencil5(), fix_a_x(), fix_a_x()).is_ok());
    }

    #[test]
    fn constraint_violation_reported() {
        let x = vec![g(1, 0), g(1, 0), g(1, 0), g(1, 0), g(1, 0)];
        assert!(matches!(PhasePoint::at_rest(pencil5(), x), Err(Error::Constraint(_))));
        assert!(matches!(PhasePoint::at_rest(pencil5(), vec![g(0, 0); 5]), Err(Error::Constraint(_))));
    }

    #[test]
    fn pair_invariant_values() {
        let p = fix_c();
        assert_eq!(p.pair_invariant(0, 1), g(-7, 0));
        assert_eq!(p.pair_invariant(3, 3), g(0, 0));
        assert_eq!(p.pair_invariant(1, 0), g(7, 0));
    }

    #[test]
    fn gauge_shift_behaviour() {
        let p = fix_c();
        assert_eq!(p.gauge_shift(&g(0, 0)), p);
        let s = p.gauge_shift(&g(1, 0));
        assert_eq!(s.y(), &[g(4, 0), g(-3, 0), g(0, 2), g(1, 0), g(2, 0)]);
        assert!(s.residuals().iter().all(Scalar::is_zero));
        let a = GaussRat::from_parts(1, 3, 2, 1);
        let b = g(-2, 5);
        assert_eq!(s.gauge_shift(&a).gauge_shift(&b), s.gauge_shift(&(&a + &b)));
        for i in 0..5 {
            for j in 0..5 {
                assert_eq!(s.gauge_shift(&a).pair_invariant(i, j), s.pair_invariant(i, j));
            }
        }
    }

    #[test]
    fn brackets_vanish_on_fixture() {
        let p = fix_c();
        for i in 0..5 {
            for j in 0..5 {
                assert!(p.poisson_bracket(i, j).is_zero(), "{{f_{i}, f_{j}}} != 0");
            }
        }
        let rest = PhasePoint::at_rest(pencil5(), fix_a_x()).unwrap();
        assert!(rest.poisson_bracket(0, 3).is_zero());
    }

    #[test]
    fn samplers_meet_constraints() {
        let pencil = Pencil::<GaussRat>::standard(6).unwrap();
        for stream in 0..5 {
            let p = sample_phase_point(&pencil, 7, stream).unwrap();
            assert!(p.residuals().iter().all(Scalar::is_zero));
        }
        let fp = Pencil::<Complex64>::standard(7).unwrap();
        let p = sample_phase_point(&fp, 3, 0).unwrap();
        let scale = residual_scale(fp.mu(), p.x(), p.y());
        assert!(p.residuals().iter().all(|r| r.norm() <= 1e-12 * scale));
    }

    #[test]
    fn sampling_is_deterministic() {
        let pencil = Pencil::<GaussRat>::standard(5).unwrap();
        assert_eq!(sample_phase_point(&pencil, 11, 2).unwrap(), sample_phase_point(&pencil, 11, 2).unwrap());
    }

    #[test]
    fn y_sampler_repivots_and_rejects() {
        let pencil = pencil5();
        let x = vec![g(0, 0), g(0, 1), g(1, 0), g(0, 1), g(1, 0)];
        // x is not on X, but y-sampling only needs the pivots
        let mut rng = sampler_rng(1, 0);
        let y = sample_point_y(&pencil, &x, &mut rng).unwrap();
        let r = constraint_residuals(pencil.mu(), &x, &y);
        assert!(r[2].is_zero() && r[3].is_zero());
        let lonely = vec![g(1, 0), g(0, 0), g(0, 0), g(0, 0), g(0, 0)];
        assert!(matches!(sample_point_y(&pencil, &lonely, &mut rng), Err(Error::DegeneratePoint(_))));
    }

    #[test]
    fn document_roundtrip() {
        let p = fix_c();
        let doc = PointDocument::from(&p);
        let s = serde_json::to_string(&doc).unwrap();
        assert!(s.contains("\"mode\":\"exact\"") && s.contains("\"N\":5"));
        let back: AnyPoint = serde_json::from_str::<PointDocument>(&s).unwrap().try_into().unwrap();
        assert_eq!(back, AnyPoint::Exact(p));
        let f = PointDocument::from(&fix_c().to_float());
        let s = serde_json::to_string(&f).unwrap();
        assert!(s.contains("[3.0,0.0]"));
    }
}
