//! Floating-point polynomial roots by Aberth–Ehrlich simultaneous iteration.
//!
//! Roots are descriptive only: multiplicity decisions elsewhere in the crate
//! are made exactly (resultants, square-free decomposition). Clustering here
//! merges approximations `a`, `b` with `|a - b| <= tol * (1 + |a| + |b|)`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::unipoly::UniPoly;
use crate::error::{Error, Result};

pub const DEFAULT_ROOT_TOL: f64 = 1e-8;
const MAX_ITERATIONS: usize = 500;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RootCluster {
    pub value: Complex64,
    pub multiplicity: usize,
}

/// Roots of `p` with multiplicity, clustered at `tol`. The flattened multiset
/// has exactly `deg p` entries.
pub fn poly_roots(p: &UniPoly<Complex64>, tol: f64) -> Result<Vec<RootCluster>> {
    let raw = aberth(p)?;
    Ok(cluster(&raw, tol))
}

/// Flatten clusters into a multiset.
pub fn flatten(clusters: &[RootCluster]) -> Vec<Complex64> {
    clusters
        .iter()
        .flat_map(|c| std::iter::repeat_n(c.value, c.multiplicity))
        .collect()
}

fn eval_with_derivative(c: &[Complex64], z: Complex64) -> (Complex64, Complex64) {
    let mut p = Complex64::new(0.0, 0.0);
    let mut dp = Complex64::new(0.0, 0.0);
    for coef in c.iter().rev() {
        dp = dp * z + p;
        p = p * z + coef;
    }
    (p, dp)
}

/// Unclustered Aberth iteration. Errors only on the zero polynomial or on
/// failure to converge, carrying the best iterate.
pub fn aberth(p: &UniPoly<Complex64>) -> Result<Vec<Complex64>> {
    let Some(deg) = p.degree() else {
        return Err(Error::UndefinedResultant);
    };
    if deg == 0 {
        return Ok(Vec::new());
    }
    let lead = p.lead();
    let c: Vec<Complex64> = p.coeffs().iter().map(|v| v / lead).collect();
    // Fujiwara-type radius bound for the initial circle
    let radius = (0..deg)
        .map(|k| c[k].norm().powf(1.0 / (deg - k) as f64))
        .fold(0.0, f64::max)
        .max(1e-3);
    let mut z: Vec<Complex64> = (0..deg)
        .map(|k| {
            let theta = 2.0 * std::f64::consts::PI * (k as f64) / (deg as f64) + 0.4;
            Complex64::from_polar(radius, theta)
        })
        .collect();
    let mut converged = vec![false; deg];
    for _ in 0..MAX_ITERATIONS {
        for k in 0..deg {
            if converged[k] {
                continue;
            }
            let (val, der) = eval_with_derivative(&c, z[k]);
            if val.norm() == 0.0 {
                converged[k] = true;
                continue;
            }
            let ratio = val / der;
            let repulsion: Complex64 = (0..deg)
                .filter(|&j| j != k)
                .map(|j| {
                    let d = z[k] - z[j];
                    if d.norm() == 0.0 { Complex64::new(0.0, 0.0) } else { d.inv() }
                })
                .sum();
            let step = ratio / (Complex64::new(1.0, 0.0) - ratio * repulsion);
            let step = if step.is_finite() { step } else { ratio };
            z[k] -= step;
            if step.norm() <= 4.0 * f64::EPSILON * (1.0 + z[k].norm()) {
                converged[k] = true;
            }
        }
        if converged.iter().all(|&v| v) {
            return Ok(z);
        }
    }
    // accept the iterate if residuals or Newton corrections are at rounding level anyway
    let scale = |w: Complex64| c.iter().rev().fold(0.0, |acc, v| acc * w.norm() + v.norm());
    let settled = |w: Complex64| {
        let (val, der) = eval_with_derivative(&c, w);
        val.norm() <= 1e3 * f64::EPSILON * scale(w) || (val / der).norm() <= 1e3 * f64::EPSILON * (1.0 + w.norm())
    };
    if z.iter().all(|&w| settled(w)) {
        return Ok(z);
    }
    Err(Error::RootsNotConverged { iterations: MAX_ITERATIONS, best: z })
}

/// Transitive clustering; each cluster is represented by its centroid.
pub fn cluster(roots: &[Complex64], tol: f64) -> Vec<RootCluster> {
    let n = roots.len();
    let mut label: Vec<usize> = (0..n).collect();
    fn find(label: &mut [usize], k: usize) -> usize {
        let mut r = k;
        while label[r] != r {
            r = label[r];
        }
        label[k] = r;
        r
    }
    for a in 0..n {
        for b in a + 1..n {
            let (x, y) = (roots[a], roots[b]);
            if (x - y).norm() <= tol * (1.0 + x.norm() + y.norm()) {
                let (ra, rb) = (find(&mut label, a), find(&mut label, b));
                label[ra.max(rb)] = ra.min(rb);
            }
        }
    }
    let mut out: Vec<(usize, Complex64, usize)> = Vec::new();
    for k in 0..n {
        let r = find(&mut label, k);
        match out.iter_mut().find(|(id, _, _)| *id == r) {
            Some(entry) => {
                entry.1 += roots[k];
                entry.2 += 1;
            }
            None => out.push((r, roots[k], 1)),
        }
    }
    let mut clusters: Vec<RootCluster> = out
        .into_iter()
        .map(|(_, sum, m)| RootCluster { value: sum / m as f64, multiplicity: m })
        .collect();
    clusters.sort_by(|a, b| a.value.re.total_cmp(&b.value.re).then(a.value.im.total_cmp(&b.value.im)));
    clusters
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn fp(c: &[f64]) -> UniPoly<Complex64> {
        UniPoly::new(c.iter().map(|&v| Complex64::new(v, 0.0)).collect())
    }

    #[test]
    fn imaginary_pair() {
        let r = poly_roots(&fp(&[1.0, 0.0, 1.0]), DEFAULT_ROOT_TOL).unwrap();
        assert_eq!(r.len(), 2);
        assert!((r[0].value - Complex64::new(0.0, -1.0)).norm() < 1e-12);
        assert!((r[1].value - Complex64::new(0.0, 1.0)).norm() < 1e-12);
    }

    #[test]
    fn quadratic_formula_oracle() {
        // 10z^2 - 40z + 24: roots 2 -+ (2/5) sqrt(10)
        let r = poly_roots(&fp(&[24.0, -40.0, 10.0]), DEFAULT_ROOT_TOL).unwrap();
        let (a, b, c) = (10.0f64, -40.0f64, 24.0f64);
        let disc = (b * b - 4.0 * a * c).sqrt();
        let lo = (-b - disc) / (2.0 * a);
        let hi = (-b + disc) / (2.0 * a);
        assert!((r[0].value.re - lo).abs() < 1e-12 && r[0].value.im.abs() < 1e-12);
        assert!((r[1].value.re - hi).abs() < 1e-12);
        assert!((lo - 0.7351).abs() < 1e-4 && (hi - 3.2649).abs() < 1e-4);
    }

    #[test]
    fn double_root_clusters() {
        let r = poly_roots(&fp(&[1.0, -2.0, 1.0]), DEFAULT_ROOT_TOL).unwrap();
        assert_eq!(r.len(), 1);
        assert_eq!(r[0].multiplicity, 2);
        assert!((r[0].value - Complex64::new(1.0, 0.0)).norm() < 1e-8);
    }

    #[test]
    fn constant_has_no_roots() {
        assert!(poly_roots(&fp(&[3.0]), DEFAULT_ROOT_TOL).unwrap().is_empty());
        assert!(poly_roots(&UniPoly::zero(), DEFAULT_ROOT_TOL).is_err());
    }

    proptest! {
        #[test]
        fn monic_reconstruction(
            picks in prop::collection::btree_set((-6i32..7, -6i32..7), 1..9),
            lead in 0.5f64..3.0,
        ) {
            // well-separated roots on a half-integer grid
            let roots: Vec<Complex64> = picks.iter().map(|&(a, b)| Complex64::new(a as f64 * 0.5, b as f64 * 0.5)).collect();
            let p = UniPoly::from_roots(roots.iter()).scale(&Complex64::new(lead, 0.3));
            let found = flatten(&poly_roots(&p, DEFAULT_ROOT_TOL).unwrap());
            prop_assert_eq!(found.len(), roots.len());
            let rebuilt = UniPoly::from_roots(found.iter());
            let target = p.monic();
            for k in 0..=roots.len() {
                prop_assert!((rebuilt.coeff(k) - target.coeff(k)).norm() <= 1e-8 * (1.0 + target.max_coeff()));
            }
        }
    }
}
