//! Consolidated verification over a seeded corpus of phase points: brackets,
//! Hamiltonian relations, the Hecke identity, separation of variables, the
//! orthogonal model and the operator suite.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::algebra::{GaussRat, Scalar, UniPoly};
use crate::diffops::{run_suite, DiffopsReport, Fault};
use crate::error::Result;
use crate::higgs::{build_phi, hamiltonians, hecke_transform, reduced_tr_phi_squared};
use crate::orthomodel::verify_equivalence;
use crate::par::{map_range, Execution};
use crate::phase::{hamiltonian_gradient, sample_phase_point, Pencil, PhasePoint, SampleScalar};
use crate::sov::{ell_ranks, minor_identity_check, root_set, sov_duality_error};

pub const DEFAULT_TOL: f64 = 1e-9;
/// Rank threshold for the float matrices built from root locations.
pub const RANK_TOL: f64 = 1e-8;
/// Share of samples that must have `deg c = n`.
pub const GENERIC_DEGREE_FRACTION: f64 = 0.9;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    #[default]
    Exact,
    Float,
}

#[derive(Clone, Debug)]
pub struct VerifyConfig {
    pub pencil: Pencil<GaussRat>,
    pub mode: Mode,
    pub seed: u64,
    pub trials: usize,
    pub tol: f64,
    pub dmax: u32,
    pub fault: Option<Fault>,
    pub exec: Execution,
    /// Run the operator suite (always exact, on the rational pencil).
    pub diffops: bool,
}

impl VerifyConfig {
    pub fn new(pencil: Pencil<GaussRat>) -> Self {
        let dmax = crate::diffops::default_dmax(pencil.len());
        VerifyConfig {
            pencil,
            mode: Mode::Exact,
            seed: 1,
            trials: 20,
            tol: DEFAULT_TOL,
            dmax,
            fault: None,
            exec: Execution::default(),
            diffops: true,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FailureNote {
    pub trial: usize,
    pub detail: String,
}

/// Tally of one identity over the corpus.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CheckSummary {
    pub name: String,
    pub checked: usize,
    pub failures: usize,
    pub skipped: usize,
    pub required_fraction: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub worst_residual: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub first_failure: Option<FailureNote>,
}

impl CheckSummary {
    fn new(name: &str, required_fraction: f64) -> Self {
        CheckSummary {
            name: name.into(),
            checked: 0,
            failures: 0,
            skipped: 0,
            required_fraction,
            worst_residual: None,
            first_failure: None,
        }
    }

    pub fn passed(&self) -> bool {
        if self.checked == 0 {
            return true;
        }
        (self.checked - self.failures) as f64 >= self.required_fraction * self.checked as f64
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct VerifyReport {
    pub mode: Mode,
    #[serde(rename = "N")]
    pub n_points: usize,
    pub seed: u64,
    pub trials: usize,
    pub checks: Vec<CheckSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub diffops: Option<DiffopsReport>,
    pub passed: bool,
}

impl VerifyReport {
    /// Name of the first failing check or operator relation.
    pub fn first_failure(&self) -> Option<String> {
        if let Some(c) = self.checks.iter().find(|c| !c.passed()) {
            return Some(c.name.clone());
        }
        self.diffops.as_ref().and_then(|d| d.first_failure()).map(|r| format!("diffops/{}", r.family))
    }
}

/// Outcome of one identity at one point.
#[derive(Clone, Debug)]
pub enum Item {
    Pass(Option<f64>),
    Fail(Option<f64>, String),
    Skip,
}

fn judge(ok: bool, residual: Option<f64>, detail: impl FnOnce() -> String) -> Item {
    if ok { Item::Pass(residual) } else { Item::Fail(residual, detail()) }
}

fn norm<S: Scalar>(v: &[S]) -> f64 {
    v.iter().map(|e| e.magnitude().powi(2)).sum::<f64>().sqrt()
}

/// Degree ignoring coefficients negligible against the largest.
pub fn effective_degree<S: Scalar>(p: &UniPoly<S>, tol: f64) -> Option<usize> {
    let scale = p.max_coeff();
    p.coeffs().iter().rposition(|c| !c.is_negligible(tol, scale))
}

fn residual_of<S: Scalar>(r: f64) -> Option<f64> {
    (!S::EXACT).then_some(r)
}

fn check_poisson<S: Scalar>(p: &PhasePoint<S>, tol: f64) -> Item {
    let n = p.len();
    let grads: Vec<f64> = (0..n)
        .map(|i| {
            let (gx, gy) = hamiltonian_gradient(p.mu(), p.x(), p.y(), i);
            norm(&gx).hypot(norm(&gy))
        })
        .collect();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in i + 1..n {
            let b = p.poisson_bracket(i, j);
            let scale = grads[i] * grads[j];
            if !b.is_negligible(tol, scale) {
                return Item::Fail(residual_of::<S>(b.magnitude() / scale), format!("{{f_{}, f_{}}} = {b:?}", i + 1, j + 1));
            }
            worst = worst.max(b.magnitude() / scale.max(f64::MIN_POSITIVE));
        }
    }
    Item::Pass(residual_of::<S>(worst))
}

fn check_relations<S: Scalar>(p: &PhasePoint<S>, tol: f64) -> Item {
    let f = hamiltonians(p);
    let mut worst = 0.0f64;
    for k in 0..3u32 {
        let (mut sum, mut scale) = (S::zero(), 0.0);
        for (fi, m) in f.iter().zip(p.mu()) {
            let term = fi.clone() * &m.pow(k);
            scale += term.magnitude();
            sum = sum + &term;
        }
        if !sum.is_negligible(tol, scale) {
            return Item::Fail(residual_of::<S>(sum.magnitude() / scale), format!("Σ μ^{k} f = {sum:?}"));
        }
        worst = worst.max(sum.magnitude() / scale.max(f64::MIN_POSITIVE));
    }
    Item::Pass(residual_of::<S>(worst))
}

/// Points `z` avoiding the marked points.
pub fn sample_z<S: Scalar>(pencil: &Pencil<S>, count: usize) -> Vec<S> {
    (1i64..)
        .map(|k| {
            let sign = if k % 2 == 0 { -1 } else { 1 };
            S::from_ratio(sign * (2 * k + 1), 3) + &S::from_ratio(1, 7)
        })
        .filter(|z| pencil.index_of_pole(z).is_none())
        .take(count)
        .collect()
}

fn check_hecke<S: Scalar>(p: &PhasePoint<S>, tol: f64) -> (Item, Item) {
    let n = p.pencil().dim();
    let t = hecke_transform(p);
    let sp = t.spectral_polynomial();
    let pd = p.pencil().p_d();
    // b² + ac = -p_D h as polynomials
    let ph = &pd * &reduced_tr_phi_squared(p).h;
    let sum = &sp + &ph;
    let scale = sp.max_coeff().max(ph.max_coeff());
    let mut worst = sum.max_coeff() / scale.max(f64::MIN_POSITIVE);
    if !sum.coeffs().iter().all(|c| c.is_negligible(tol, scale)) {
        return (Item::Fail(residual_of::<S>(worst), "b² + ac ≠ -p_D h".into()), Item::Skip);
    }
    // 2(b² + ac) = p_D² tr Φ² at more points than the degree
    let phi = build_phi(p);
    let two = S::from_i64(2);
    for z in sample_z(p.pencil(), 2 * p.len()) {
        let Ok(tr) = phi.tr_phi_squared(&z) else { continue };
        let lhs = two.clone() * &sp.eval(&z);
        let rhs = p.pencil().eval_p_d(&z).square() * &tr;
        // (Σ |v_i|² Π_{j≠i} (|z| + |μ_j|))² bounds every intermediate term
        let zm = z.magnitude();
        let s = (0..p.len())
            .map(|i| {
                let cof: f64 = p.mu().iter().enumerate().filter(|&(j, _)| j != i).map(|(_, m)| zm + m.magnitude()).product();
                (p.x()[i].magnitude().powi(2) + p.y()[i].magnitude().powi(2)) * cof
            })
            .sum::<f64>()
            .powi(2);
        let d = lhs - &rhs;
        if !d.is_negligible(tol, s) {
            return (Item::Fail(residual_of::<S>(d.magnitude() / s), format!("2(b² + ac) ≠ p_D² tr Φ² at z = {z:?}")), Item::Skip);
        }
        worst = worst.max(d.magnitude() / s.max(f64::MIN_POSITIVE));
    }
    let deg = |q: &UniPoly<S>| effective_degree(q, tol);
    let (dc, db, da) = (deg(&t.c), deg(&t.b), deg(&t.a));
    let within = dc.is_none_or(|d| d <= n) && db.is_none_or(|d| d <= n + 1) && da.is_none_or(|d| d <= n + 2);
    let bounds = judge(within, residual_of::<S>(worst), || format!("deg (c, b, a) = ({dc:?}, {db:?}, {da:?})"));
    let generic = judge(dc == Some(n), None, || format!("deg c = {dc:?}"));
    (bounds, generic)
}

fn check_sov<S: Scalar>(p: &PhasePoint<S>, tol: f64) -> [Item; 3] {
    let n = p.pencil().dim();
    let poly = crate::sov::auxiliary_poly(p.x(), p.pencil());
    let simple = !p.x().iter().any(|v| v.is_negligible(tol, norm(p.x())))
        && root_set(&poly, n).is_ok_and(|r| r.infinity == 0 && r.all_simple() && r.total() == n);
    if !simple {
        return [Item::Skip, Item::Skip, Item::Skip];
    }
    let duality = match sov_duality_error(p) {
        Ok(e) => judge(e <= tol, Some(e), || format!("relative error {e:e}")),
        Err(e) => Item::Fail(None, e.to_string()),
    };
    let forms = match ell_ranks(p.x(), p.pencil(), RANK_TOL) {
        Ok(r) => judge(r == (n, n), None, || format!("ranks {r:?}, expected ({n}, {n})")),
        Err(e) => Item::Fail(None, e.to_string()),
    };
    let minor = match minor_identity_check(p.x(), p.pencil()) {
        Ok(m) => {
            let r = m.proportionality_residual.max((m.normalized - Complex64::new(crate::sov::MINOR_CONSTANT, 0.0)).norm());
            judge(m.holds(tol), Some(r), || format!("normalized constant {}", m.normalized))
        }
        Err(e) => Item::Fail(None, e.to_string()),
    };
    [duality, forms, minor]
}

fn check_ortho<S: Scalar>(p: &PhasePoint<S>, tol: f64) -> Item {
    match verify_equivalence(p, &sample_z(p.pencil(), 3), tol) {
        Ok(r) => {
            let bad = r.samples.iter().find(|s| !s.passed());
            judge(r.passed(), None, || match bad {
                Some(s) => format!("at z = {:?}: {s:?}", s.z),
                None => "polynomial identity".into(),
            })
        }
        Err(e) => Item::Fail(None, e.to_string()),
    }
}

pub const CHECK_NAMES: [&str; 9] = [
    "poisson",
    "hamiltonian_relations",
    "hecke_identity",
    "hecke_generic_degree",
    "sov_duality",
    "sov_forms",
    "minor_identity",
    "orthomodel",
    "sampling",
];

/// Every per-point identity, in [`CHECK_NAMES`] order minus `sampling`.
pub fn check_point<S: Scalar>(p: &PhasePoint<S>, tol: f64) -> Vec<Item> {
    let (hecke, generic) = check_hecke(p, tol);
    let [duality, forms, minor] = check_sov(p, tol);
    vec![check_poisson(p, tol), check_relations(p, tol), hecke, generic, duality, forms, minor, check_ortho(p, tol)]
}

fn run_points<S: SampleScalar>(pencil: &Pencil<S>, cfg: &VerifyConfig) -> Vec<Vec<Item>> {
    map_range(cfg.exec, cfg.trials, |t| match sample_phase_point(pencil, cfg.seed, t as u64) {
        Ok(p) => {
            let mut items = check_point(&p, cfg.tol);
            items.push(Item::Pass(None));
            items
        }
        Err(e) => {
            let mut items = vec![Item::Skip; CHECK_NAMES.len() - 1];
            items.push(Item::Fail(None, e.to_string()));
            items
        }
    })
}

/// Fold per-trial items into summaries, in trial order.
pub fn summarize(per_trial: &[Vec<Item>]) -> Vec<CheckSummary> {
    let mut out: Vec<CheckSummary> = CHECK_NAMES
        .iter()
        .map(|&name| CheckSummary::new(name, if name == "hecke_generic_degree" { GENERIC_DEGREE_FRACTION } else { 1.0 }))
        .collect();
    for (trial, items) in per_trial.iter().enumerate() {
        for (s, item) in out.iter_mut().zip(items) {
            let res = match item {
                Item::Skip => {
                    s.skipped += 1;
                    continue;
                }
                Item::Pass(r) => r,
                Item::Fail(r, detail) => {
                    s.failures += 1;
                    if s.first_failure.is_none() {
                        s.first_failure = Some(FailureNote { trial, detail: detail.clone() });
                    }
                    r
                }
            };
            s.checked += 1;
            if let Some(r) = res {
                s.worst_residual = Some(s.worst_residual.map_or(*r, |w| w.max(*r)));
            }
        }
    }
    out
}

pub fn run_verify(cfg: &VerifyConfig) -> Result<VerifyReport> {
    let per_trial = match cfg.mode {
        Mode::Exact => run_points(&cfg.pencil, cfg),
        Mode::Float => run_points(&cfg.pencil.to_float(), cfg),
    };
    let checks = summarize(&per_trial);
    let diffops = if cfg.diffops { Some(run_suite(&cfg.pencil, cfg.dmax, cfg.exec, cfg.fault)?) } else { None };
    let passed = checks.iter().all(CheckSummary::passed) && diffops.as_ref().is_none_or(DiffopsReport::passed);
    Ok(VerifyReport {
        mode: cfg.mode,
        n_points: cfg.pencil.len(),
        seed: cfg.seed,
        trials: cfg.trials,
        checks,
        diffops,
        passed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quick(n: usize, mode: Mode) -> VerifyConfig {
        let mut cfg = VerifyConfig::new(Pencil::standard(n).unwrap());
        cfg.mode = mode;
        cfg.trials = 6;
        cfg.dmax = 2;
        cfg
    }

    #[test]
    fn exact_default_passes() {
        let r = run_verify(&quick(5, Mode::Exact)).unwrap();
        assert!(r.passed, "{:?}", r.first_failure());
        let poisson = &r.checks[0];
        assert_eq!((poisson.checked, poisson.failures), (6, 0));
        assert!(poisson.worst_residual.is_none());
    }

    #[test]
    fn float_passes_with_residuals() {
        let mut cfg = quick(7, Mode::Float);
        cfg.diffops = false;
        let r = run_verify(&cfg).unwrap();
        assert!(r.passed, "{:#?}", r.checks);
        assert!(r.checks[4].worst_residual.unwrap() < 1e-9);
    }

    #[test]
    fn fault_is_named() {
        let mut cfg = quick(5, Mode::Exact);
        cfg.fault = Some(Fault::DeltaSign);
        let r = run_verify(&cfg).unwrap();
        assert!(!r.passed);
        assert!(r.first_failure().unwrap().starts_with("diffops/"));
    }

    #[test]
    fn sequential_matches_parallel() {
        let mut cfg = quick(6, Mode::Float);
        cfg.diffops = false;
        let a = serde_json::to_string(&run_verify(&cfg).unwrap()).unwrap();
        cfg.exec = Execution::Sequential;
        let b = serde_json::to_string(&run_verify(&cfg).unwrap()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn generic_degree_fraction() {
        let mut s = CheckSummary::new("hecke_generic_degree", GENERIC_DEGREE_FRACTION);
        s.checked = 10;
        s.failures = 1;
        assert!(s.passed());
        s.failures = 2;
        assert!(!s.passed());
    }

    #[test]
    fn z_samples_avoid_poles() {
        let first = sample_z(&Pencil::<GaussRat>::standard(5).unwrap(), 1).remove(0);
        let pen = Pencil::new(vec![first.clone(), GaussRat::from_i64(0), GaussRat::from_i64(1), GaussRat::from_i64(2), GaussRat::from_i64(3)]).unwrap();
        let zs = sample_z(&pen, 10);
        assert!(!zs.contains(&first));
        assert!(zs.iter().all(|z| pen.index_of_pole(z).is_none()));
    }
}
