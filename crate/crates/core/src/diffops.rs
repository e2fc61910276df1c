//! Second-order operators on polynomials in `x_1..x_N`: rotations
//! `X_ij = x_i ∂_j - x_j ∂_i`, Casimirs `Ω_ij = X_ij²` and
//! `Δ_i = Σ_{j≠i} Ω_ij / (μ_i - μ_j)`, with exhaustive exact checks of
//! their relations on monomial bases.

use num_rational::Rational64;
use serde::{Deserialize, Serialize};

use crate::algebra::{reduce_mod_quadrics, Exponents, GaussRat, MultiPoly, QuadricMode, Scalar};
use crate::error::{Error, Result};
use crate::par::{map_slice, Execution};
use crate::phase::{Pencil, PhasePoint};

/// Linear operator on [`MultiPoly`], built as an expression tree.
#[derive(Clone, Debug)]
pub enum PolyOperator {
    /// `X_ij`, 0-based.
    Rotation { i: usize, j: usize },
    Multiply(MultiPoly),
    /// `E = Σ x_k ∂_k`.
    Euler,
    /// `Compose(a, b) = a ∘ b`.
    Compose(Box<PolyOperator>, Box<PolyOperator>),
    Combination(Vec<(GaussRat, PolyOperator)>),
}

impl PolyOperator {
    pub fn rotation(i: usize, j: usize) -> Result<Self> {
        if i == j {
            return Err(Error::BadIndex(format!("X_{i}{i} is not a rotation")));
        }
        Ok(PolyOperator::Rotation { i, j })
    }

    pub fn omega(i: usize, j: usize) -> Result<Self> {
        let x = Self::rotation(i, j)?;
        Ok(x.clone().then_apply(x))
    }

    /// `Δ_i` on the given pencil.
    pub fn delta(i: usize, pencil: &Pencil<GaussRat>) -> Result<Self> {
        let mu = pencil.mu();
        if i >= mu.len() {
            return Err(Error::BadIndex(format!("index {i} out of range")));
        }
        let terms = (0..mu.len())
            .filter(|&j| j != i)
            .map(|j| Ok(((&mu[i] - &mu[j]).inv(), Self::omega(i, j)?)))
            .collect::<Result<Vec<_>>>()?;
        Ok(PolyOperator::Combination(terms))
    }

    /// `self ∘ inner`.
    pub fn then_apply(self, inner: PolyOperator) -> Self {
        PolyOperator::Compose(Box::new(self), Box::new(inner))
    }

    pub fn sum(ops: Vec<PolyOperator>) -> Self {
        PolyOperator::Combination(ops.into_iter().map(|o| (GaussRat::one(), o)).collect())
    }

    /// `[a, b] = ab - ba`.
    pub fn commutator(a: &PolyOperator, b: &PolyOperator) -> Self {
        PolyOperator::Combination(vec![
            (GaussRat::one(), a.clone().then_apply(b.clone())),
            (-GaussRat::one(), b.clone().then_apply(a.clone())),
        ])
    }

    pub fn apply(&self, f: &MultiPoly) -> MultiPoly {
        match self {
            PolyOperator::Rotation { i, j } => rotate(*i, *j, f),
            PolyOperator::Multiply(g) => g * f,
            PolyOperator::Euler => {
                let mut out = MultiPoly::zero(f.nvars());
                for (e, c) in f.terms() {
                    let d: u32 = e.iter().sum();
                    out.add_term(e.clone(), c * &GaussRat::from(d as i64));
                }
                out
            }
            PolyOperator::Compose(a, b) => a.apply(&b.apply(f)),
            PolyOperator::Combination(terms) => {
                let mut out = MultiPoly::zero(f.nvars());
                for (c, op) in terms {
                    out = &out + &op.apply(f).scale(c);
                }
                out
            }
        }
    }
}

fn rotate(i: usize, j: usize, f: &MultiPoly) -> MultiPoly {
    &f.partial(j).mul_var(i) - &f.partial(i).mul_var(j)
}

/// `X_ij f`.
pub fn apply_x(i: usize, j: usize, f: &MultiPoly) -> Result<MultiPoly> {
    Ok(PolyOperator::rotation(i, j)?.apply(f))
}

/// `Δ_i f`.
pub fn apply_delta(i: usize, f: &MultiPoly, pencil: &Pencil<GaussRat>) -> Result<MultiPoly> {
    check_vars(f, pencil)?;
    Ok(PolyOperator::delta(i, pencil)?.apply(f))
}

fn check_vars(f: &MultiPoly, pencil: &Pencil<GaussRat>) -> Result<()> {
    if f.nvars() != pencil.len() {
        return Err(Error::BadIndex(format!("{} variables for {} marked points", f.nvars(), pencil.len())));
    }
    Ok(())
}

/// `q = Σ x_k²`.
pub fn q(nvars: usize) -> MultiPoly {
    MultiPoly::diagonal_quadric(&vec![GaussRat::one(); nvars])
}

/// `q1 = Σ μ_k x_k²`.
pub fn q1(pencil: &Pencil<GaussRat>) -> MultiPoly {
    MultiPoly::diagonal_quadric(pencil.mu())
}

fn x_sq(nvars: usize, i: usize) -> MultiPoly {
    let mut e = vec![0; nvars];
    e[i] = 2;
    MultiPoly::monomial(e, GaussRat::one())
}

/// Deliberate defects for exercising the failure path of the harness.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Fault {
    /// Flip the sign of the last `Ω_1j` term of `Δ_1`.
    DeltaSign,
}

fn delta_with_fault(i: usize, pencil: &Pencil<GaussRat>, fault: Option<Fault>) -> Result<PolyOperator> {
    let op = PolyOperator::delta(i, pencil)?;
    match (fault, op) {
        (Some(Fault::DeltaSign), PolyOperator::Combination(mut terms)) if i == 0 => {
            if let Some(last) = terms.last_mut() {
                last.0 = -last.0.clone();
            }
            Ok(PolyOperator::Combination(terms))
        }
        (_, op) => Ok(op),
    }
}

/// Outcome of one family of relations.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RelationCheck {
    pub family: String,
    /// Number of (relation, test polynomial) pairs evaluated.
    pub checked: usize,
    pub failures: usize,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub first_counterexample: Option<String>,
}

impl RelationCheck {
    pub fn passed(&self) -> bool {
        self.failures == 0
    }
}

/// Apply every labelled operator to every basis monomial and require zero
/// (exactly, or modulo `q` when `mod_q` carries the pencil).
fn check_family(
    family: &str,
    ops: &[(String, PolyOperator)],
    basis: &[Exponents],
    mod_q: Option<&[GaussRat]>,
    exec: Execution,
) -> Result<RelationCheck> {
    let cases: Vec<(usize, usize)> = (0..ops.len()).flat_map(|o| (0..basis.len()).map(move |b| (o, b))).collect();
    let outcomes = map_slice(exec, &cases, |&(o, b)| -> Result<bool> {
        let m = MultiPoly::monomial(basis[b].clone(), GaussRat::one());
        let r = ops[o].1.apply(&m);
        Ok(match mod_q {
            Some(mu) => reduce_mod_quadrics(&r, mu, QuadricMode::QOnly)?.is_zero(),
            None => r.is_zero(),
        })
    });
    let mut failures = 0;
    let mut first = None;
    for (&(o, b), ok) in cases.iter().zip(outcomes) {
        if !ok? {
            failures += 1;
            first.get_or_insert_with(|| format!("{} on {}", ops[o].0, monomial_label(&basis[b])));
        }
    }
    Ok(RelationCheck { family: family.into(), checked: cases.len(), failures, first_counterexample: first })
}

fn monomial_label(e: &[u32]) -> String {
    let parts: Vec<String> = e
        .iter()
        .enumerate()
        .filter(|(_, &k)| k > 0)
        .map(|(v, &k)| if k == 1 { format!("x{}", v + 1) } else { format!("x{}^{}", v + 1, k) })
        .collect();
    if parts.is_empty() { "1".into() } else { parts.join("*") }
}

fn pairs(n: usize) -> Vec<(usize, usize)> {
    (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect()
}

/// `[Ω_ij, Ω_kl] = 0` (disjoint pairs), `[Ω_ij, Ω_ik + Ω_jk] = 0`, and the
/// Casimir form `[Ω_ij, Ω_ij + Ω_ik + Ω_jk] = 0`, on all monomials of degree
/// at most `dmax`.
pub fn verify_kohno_drinfeld(nvars: usize, dmax: u32, exec: Execution) -> Result<Vec<RelationCheck>> {
    let basis = MultiPoly::monomial_basis(nvars, dmax);
    let om = |a: usize, b: usize| PolyOperator::omega(a, b);
    let mut disjoint = Vec::new();
    let mut kd = Vec::new();
    let mut casimir = Vec::new();
    for &(i, j) in &pairs(nvars) {
        for &(k, l) in &pairs(nvars) {
            if (i, j) < (k, l) && i != k && i != l && j != k && j != l {
                disjoint.push((format!("[Ω{}{}, Ω{}{}]", i + 1, j + 1, k + 1, l + 1), PolyOperator::commutator(&om(i, j)?, &om(k, l)?)));
            }
        }
        for k in (0..nvars).filter(|&k| k != i && k != j) {
            let label = format!("[Ω{}{}, Ω{}{} + Ω{}{}]", i + 1, j + 1, i + 1, k + 1, j + 1, k + 1);
            let sum = PolyOperator::sum(vec![om(i, k)?, om(j, k)?]);
            kd.push((label, PolyOperator::commutator(&om(i, j)?, &sum)));
            let label = format!("[Ω{}{}, Ω{}{} + Ω{}{} + Ω{}{}]", i + 1, j + 1, i + 1, j + 1, i + 1, k + 1, j + 1, k + 1);
            let cas = PolyOperator::sum(vec![om(i, j)?, om(i, k)?, om(j, k)?]);
            casimir.push((label, PolyOperator::commutator(&om(i, j)?, &cas)));
        }
    }
    Ok(vec![
        check_family("kohno-drinfeld disjoint [Ω_ij, Ω_kl]", &disjoint, &basis, None, exec)?,
        check_family("kohno-drinfeld [Ω_ij, Ω_ik + Ω_jk]", &kd, &basis, None, exec)?,
        check_family("casimir [Ω_ij, Ω_ij + Ω_ik + Ω_jk]", &casimir, &basis, None, exec)?,
    ])
}

/// `[X_12, X_13] = -X_23`, checked on all monomials of degree at most `dmax`.
pub fn verify_so3_bracket(nvars: usize, dmax: u32, exec: Execution) -> Result<RelationCheck> {
    let basis = MultiPoly::monomial_basis(nvars, dmax);
    let br = PolyOperator::commutator(&PolyOperator::rotation(0, 1)?, &PolyOperator::rotation(0, 2)?);
    let op = PolyOperator::sum(vec![br, PolyOperator::rotation(1, 2)?]);
    check_family("so(3) [X12, X13] = -X23", &[("[X12, X13] + X23".into(), op)], &basis, None, exec)
}

/// `[Δ_i, Δ_j] = 0` exactly for all pairs.
pub fn verify_commutation(pencil: &Pencil<GaussRat>, dmax: u32, exec: Execution, fault: Option<Fault>) -> Result<RelationCheck> {
    let n = pencil.len();
    let basis = MultiPoly::monomial_basis(n, dmax);
    let deltas = (0..n).map(|i| delta_with_fault(i, pencil, fault)).collect::<Result<Vec<_>>>()?;
    let ops: Vec<(String, PolyOperator)> = pairs(n)
        .into_iter()
        .map(|(i, j)| (format!("[Δ{}, Δ{}]", i + 1, j + 1), PolyOperator::commutator(&deltas[i], &deltas[j])))
        .collect();
    check_family("commutation [Δ_i, Δ_j]", &ops, &basis, None, exec)
}

/// `Δ_i(q1) ≡ -2N x_i² (mod q)`, together with `Δ_i(q) = 0` and `Δ_i(1) = 0`.
pub fn verify_delta_q1(pencil: &Pencil<GaussRat>, fault: Option<Fault>) -> Result<Vec<RelationCheck>> {
    let n = pencil.len();
    let big_n = GaussRat::from(n as i64);
    let (mut q1_fail, mut q_fail, mut one_fail) = (None, None, None);
    for i in 0..n {
        let d = delta_with_fault(i, pencil, fault)?;
        let r = &d.apply(&q1(pencil)) + &x_sq(n, i).scale(&(big_n.clone() * GaussRat::from(2)));
        if !reduce_mod_quadrics(&r, pencil.mu(), QuadricMode::QOnly)?.is_zero() {
            q1_fail.get_or_insert(format!("Δ{}(q1) + 2N x{}²", i + 1, i + 1));
        }
        if !d.apply(&q(n)).is_zero() {
            q_fail.get_or_insert(format!("Δ{}(q)", i + 1));
        }
        if !d.apply(&MultiPoly::one(n)).is_zero() {
            one_fail.get_or_insert(format!("Δ{}(1)", i + 1));
        }
    }
    let rc = |family: &str, first: Option<String>| RelationCheck {
        family: family.into(),
        checked: n,
        failures: usize::from(first.is_some()),
        first_counterexample: first,
    };
    Ok(vec![
        rc("Δ_i(q1) ≡ -2N x_i² mod q", q1_fail),
        rc("Δ_i(q) = 0", q_fail),
        rc("Δ_i(1) = 0", one_fail),
    ])
}

/// Both descent identities for one homogeneous `f`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DescentCheck {
    pub degree: u32,
    /// `Δ_i(f q1) - Δ_i(f) q1 + (4d + 2N) x_i² f ≡ 0 (mod q)`.
    pub q1_remainder_vanishes: bool,
    /// `Δ_i(f q) = Δ_i(f) q`.
    pub q_commutes: bool,
}

pub fn verify_descent(i: usize, f: &MultiPoly, pencil: &Pencil<GaussRat>) -> Result<DescentCheck> {
    descent_with(i, f, pencil, None)
}

fn descent_with(i: usize, f: &MultiPoly, pencil: &Pencil<GaussRat>, fault: Option<Fault>) -> Result<DescentCheck> {
    check_vars(f, pencil)?;
    let d = f.homogeneous_degree().ok_or(Error::NotHomogeneous)?;
    let n = pencil.len();
    let delta = delta_with_fault(i, pencil, fault)?;
    let (qq, qq1) = (q(n), q1(pencil));
    let coef = GaussRat::from(4 * d as i64 + 2 * n as i64);
    let lhs = &(&delta.apply(&(f * &qq1)) - &(&delta.apply(f) * &qq1)) + &(&x_sq(n, i) * f).scale(&coef);
    let rem = reduce_mod_quadrics(&lhs, pencil.mu(), QuadricMode::QOnly)?;
    let commutes = delta.apply(&(f * &qq)) == &delta.apply(f) * &qq;
    Ok(DescentCheck { degree: d, q1_remainder_vanishes: rem.is_zero(), q_commutes: commutes })
}

/// Descent identities for every monomial of degree at most `dmax` and every `i`.
pub fn verify_descent_suite(pencil: &Pencil<GaussRat>, dmax: u32, exec: Execution, fault: Option<Fault>) -> Result<Vec<RelationCheck>> {
    let n = pencil.len();
    let basis = MultiPoly::monomial_basis(n, dmax);
    let cases: Vec<(usize, usize)> = (0..n).flat_map(|i| (0..basis.len()).map(move |b| (i, b))).collect();
    let out = map_slice(exec, &cases, |&(i, b)| descent_with(i, &MultiPoly::monomial(basis[b].clone(), GaussRat::one()), pencil, fault));
    let (mut f1, mut f2) = (Vec::new(), Vec::new());
    for (&(i, b), r) in cases.iter().zip(out) {
        let r = r?;
        let label = || format!("Δ{} with f = {}", i + 1, monomial_label(&basis[b]));
        if !r.q1_remainder_vanishes {
            f1.push(label());
        }
        if !r.q_commutes {
            f2.push(label());
        }
    }
    let rc = |family: &str, fails: Vec<String>| RelationCheck {
        family: family.into(),
        checked: cases.len(),
        failures: fails.len(),
        first_counterexample: fails.into_iter().next(),
    };
    Ok(vec![
        rc("descent Δ_i(f q1) - Δ_i(f) q1 + (4d+2N) x_i² f ≡ 0 mod q", f1),
        rc("descent Δ_i(f q) = Δ_i(f) q", f2),
    ])
}

/// `2 Σ_{j≠i} (X_ij q1) X_ij / (μ_i - μ_j) + 4 x_i² E ≡ 0 (mod q)` as a
/// first-order operator, on all monomials of degree at most `dmax`.
pub fn verify_symbol_consistency(pencil: &Pencil<GaussRat>, dmax: u32, exec: Execution) -> Result<RelationCheck> {
    let n = pencil.len();
    let mu = pencil.mu();
    let qq1 = q1(pencil);
    let mut ops = Vec::new();
    for i in 0..n {
        let mut terms = Vec::new();
        for j in (0..n).filter(|&j| j != i) {
            let xq = rotate(i, j, &qq1);
            let c = GaussRat::from(2) / (&mu[i] - &mu[j]);
            terms.push((c, PolyOperator::Multiply(xq).then_apply(PolyOperator::rotation(i, j)?)));
        }
        terms.push((GaussRat::from(4), PolyOperator::Multiply(x_sq(n, i)).then_apply(PolyOperator::Euler)));
        ops.push((format!("symbol of Δ{} against dq1", i + 1), PolyOperator::Combination(terms)));
    }
    let basis = MultiPoly::monomial_basis(n, dmax);
    check_family("symbol consistency", &ops, &basis, Some(mu), exec)
}

/// The principal symbol of `Δ_i` at the covector `y`, evaluated at `x`:
/// `½ Δ_i((Σ y_k x_k)²)(x)`, which equals `Σ_j (x_i y_j - x_j y_i)²/(μ_i - μ_j)`
/// whenever `Σ x_k y_k = 0`.
pub fn symbol_at(i: usize, p: &PhasePoint<GaussRat>) -> Result<GaussRat> {
    let n = p.len();
    let mut ell = MultiPoly::zero(n);
    for (k, y) in p.y().iter().enumerate() {
        ell = &ell + &MultiPoly::var(n, k).scale(y);
    }
    let v = apply_delta(i, &(&ell * &ell), p.pencil())?;
    Ok(v.eval(p.x(), Clone::clone) / GaussRat::from(2))
}

/// The descent twist `k = -(N-4)/2`, at which `-4(k-2) - 2N` vanishes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CanonicalTwist {
    #[serde(with = "ratio_string")]
    pub k: Rational64,
    pub integral: bool,
    #[serde(with = "ratio_string")]
    pub descent_coefficient: Rational64,
}

mod ratio_string {
    use num_rational::Rational64;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(r: &Rational64, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&r.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational64, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

pub fn canonical_twist(n_points: usize) -> CanonicalTwist {
    let big_n = Rational64::from_integer(n_points as i64);
    let k = -(big_n - 4) / 2;
    let descent_coefficient = -Rational64::from_integer(4) * (k - 2) - big_n * 2;
    CanonicalTwist { k, integral: k.is_integer(), descent_coefficient }
}

/// Default exhaustive degree bound.
pub fn default_dmax(n_points: usize) -> u32 {
    if n_points <= 6 { 3 } else { 2 }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DiffopsReport {
    #[serde(rename = "N")]
    pub n_points: usize,
    pub dmax: u32,
    pub relations: Vec<RelationCheck>,
    pub twist: CanonicalTwist,
}

impl DiffopsReport {
    pub fn passed(&self) -> bool {
        self.relations.iter().all(RelationCheck::passed)
    }

    pub fn first_failure(&self) -> Option<&RelationCheck> {
        self.relations.iter().find(|r| !r.passed())
    }
}

/// Every operator check on one pencil.
pub fn run_suite(pencil: &Pencil<GaussRat>, dmax: u32, exec: Execution, fault: Option<Fault>) -> Result<DiffopsReport> {
    let n = pencil.len();
    let mut relations = verify_delta_q1(pencil, fault)?;
    relations.push(verify_commutation(pencil, dmax, exec, fault)?);
    relations.extend(verify_descent_suite(pencil, dmax, exec, fault)?);
    relations.extend(verify_kohno_drinfeld(n, dmax, exec)?);
    relations.push(verify_so3_bracket(n, dmax, exec)?);
    relations.push(verify_symbol_consistency(pencil, dmax, exec)?);
    Ok(DiffopsReport { n_points: n, dmax, relations, twist: canonical_twist(n) })
}
