use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use num_complex::Complex64;
use qg_core::algebra::{Scalar, UniPoly};
use qg_core::diffops::{run_suite, Fault};
use qg_core::orthomodel::{verify_equivalence, EquivalenceReport};
use qg_core::par::{map_range, Execution};
use qg_core::phase::{sample_phase_point, AnyPoint, Pencil, PhasePoint, PointDocument, SampleScalar};
use qg_core::sov::RootSet;
use qg_core::verify::{run_verify, sample_z, Mode, VerifyConfig};
use qg_core::verystable::{classify, dichotomy, verify_witness, Factorize, Verdict};
use qg_core::Error;
use serde::Serialize;

use crate::{CliError, CliResult, Common};

fn output(path: Option<&Path>) -> CliResult<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p).map_err(|e| CliError::Usage(format!("{}: {e}", p.display())))?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn emit<T: Serialize>(w: &mut dyn Write, v: &T) -> CliResult<()> {
    serde_json::to_writer(&mut *w, v).map_err(|e| CliError::Failed(e.to_string()))?;
    writeln!(w).map_err(|e| CliError::Failed(e.to_string()))
}

fn read_points(path: &Path) -> CliResult<Vec<AnyPoint>> {
    let file = File::open(path).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
    let mut out = Vec::new();
    for (k, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| CliError::Usage(e.to_string()))?;
        if line.trim().is_empty() {
            continue;
        }
        let doc: PointDocument = serde_json::from_str(&line).map_err(|e| CliError::Usage(format!("line {}: {e}", k + 1)))?;
        out.push(AnyPoint::try_from(doc).map_err(|e| CliError::Usage(format!("line {}: {e}", k + 1)))?);
    }
    Ok(out)
}

fn sampled<S: SampleScalar>(pencil: &Pencil<S>, c: &Common) -> CliResult<Vec<PhasePoint<S>>> {
    map_range(Execution::Parallel, c.trials, |t| sample_phase_point(pencil, c.seed, t as u64))
        .into_iter()
        .collect::<Result<Vec<_>, _>>()
        .map_err(CliError::from)
}

/// Sampled points in the configured mode, or the points in `input`.
fn corpus(c: &Common, input: Option<&Path>) -> CliResult<Vec<AnyPoint>> {
    if let Some(path) = input {
        return read_points(path);
    }
    let pencil = c.pencil()?;
    Ok(match Mode::from(c.mode) {
        Mode::Exact => sampled(&pencil, c)?.into_iter().map(AnyPoint::Exact).collect(),
        Mode::Float => sampled(&pencil.to_float(), c)?.into_iter().map(AnyPoint::Float).collect(),
    })
}

#[derive(Serialize)]
struct SampleLine<S> {
    trial: usize,
    #[serde(flatten)]
    point: PointDocument,
    residuals: [S; 4],
    #[serde(skip_serializing_if = "Option::is_none")]
    max_residual: Option<f64>,
}

fn sample_lines<S: SampleScalar + Serialize>(pencil: &Pencil<S>, c: &Common, w: &mut dyn Write) -> CliResult<()>
where
    for<'a> PointDocument: From<&'a PhasePoint<S>>,
{
    for (trial, p) in sampled(pencil, c)?.iter().enumerate() {
        let residuals = p.residuals();
        let max_residual = (!S::EXACT).then(|| residuals.iter().map(Scalar::magnitude).fold(0.0, f64::max));
        emit(w, &SampleLine { trial, point: PointDocument::from(p), residuals, max_residual })?;
    }
    Ok(())
}

pub fn cmd_sample(c: &Common) -> CliResult<bool> {
    let pencil = c.pencil()?;
    let mut w = output(c.out.as_deref())?;
    match Mode::from(c.mode) {
        Mode::Exact => sample_lines(&pencil, c, &mut *w)?,
        Mode::Float => sample_lines(&pencil.to_float(), c, &mut *w)?,
    }
    w.flush()?;
    Ok(true)
}

pub fn cmd_verify(c: &Common, fault: Option<Fault>, diffops: bool) -> CliResult<bool> {
    let pencil = c.pencil()?;
    let mut cfg = VerifyConfig::new(pencil);
    cfg.mode = c.mode.into();
    cfg.seed = c.seed;
    cfg.trials = c.trials;
    cfg.tol = c.tol;
    cfg.dmax = c.dmax(cfg.pencil.len());
    cfg.fault = fault;
    cfg.diffops = diffops;
    let report = run_verify(&cfg)?;
    let mut w = output(c.out.as_deref())?;
    emit(&mut *w, &report)?;
    w.flush()?;
    if let Some(name) = report.first_failure() {
        eprintln!("verification failed: {name}");
    }
    Ok(report.passed)
}

#[derive(Serialize)]
struct ClassifyLine<S> {
    index: usize,
    verdict: Verdict,
    very_stable: bool,
    #[serde(rename = "N")]
    n_points: usize,
    p: UniPoly<S>,
    roots: RootSet,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    zero_indices: Vec<usize>,
    reduced_chain: Vec<Verdict>,
    #[serde(skip_serializing_if = "Option::is_none")]
    witness: Option<Vec<S>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    witness_verified: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    witness_unavailable: Option<String>,
    kernel_dim: Option<usize>,
}

fn classify_one<S: Factorize + Serialize>(index: usize, p: &PhasePoint<S>) -> CliResult<(ClassifyLine<S>, bool)> {
    let v = classify(p.x(), p.pencil())?;
    let mut line = ClassifyLine {
        index,
        verdict: v.verdict,
        very_stable: v.very_stable,
        n_points: v.n_points,
        p: v.p.clone(),
        roots: v.roots.clone(),
        zero_indices: v.zero_indices.clone(),
        reduced_chain: v.chain(),
        witness: None,
        witness_verified: None,
        witness_unavailable: None,
        kernel_dim: None,
    };
    let ok = match dichotomy(p.x(), p.pencil()) {
        Ok(d) => {
            line.kernel_dim = Some(d.kernel_dim);
            let consistent = d.consistent();
            if let Some(y) = d.witness {
                let verified = verify_witness(p.x(), &y, p.pencil())?;
                line.witness_verified = Some(verified);
                line.witness = Some(y);
                consistent && verified
            } else {
                consistent
            }
        }
        Err(Error::WitnessUnavailable(m)) => {
            line.witness_unavailable = Some(m);
            true
        }
        Err(e) => return Err(e.into()),
    };
    Ok((line, ok))
}

pub fn cmd_classify(c: &Common, input: Option<&Path>) -> CliResult<bool> {
    let points = corpus(c, input)?;
    let mut w = output(c.out.as_deref())?;
    let mut all_ok = true;
    for (k, pt) in points.iter().enumerate() {
        let ok = match pt {
            AnyPoint::Exact(p) => {
                let (line, ok) = classify_one(k, p)?;
                emit(&mut *w, &line)?;
                ok
            }
            AnyPoint::Float(p) => {
                let (line, ok) = classify_one(k, p)?;
                emit(&mut *w, &line)?;
                ok
            }
        };
        all_ok &= ok;
    }
    w.flush()?;
    Ok(all_ok)
}

pub fn cmd_diffops(c: &Common, fault: Option<Fault>) -> CliResult<bool> {
    let pencil = c.pencil()?;
    let report = run_suite(&pencil, c.dmax(pencil.len()), Execution::Parallel, fault)?;
    let mut w = output(c.out.as_deref())?;
    emit(&mut *w, &report)?;
    w.flush()?;
    if let Some(f) = report.first_failure() {
        eprintln!("verification failed: {}", f.family);
    }
    Ok(report.passed())
}

#[derive(Serialize)]
struct OrthoLine<S> {
    index: usize,
    passed: bool,
    report: EquivalenceReport<S>,
}

#[derive(Serialize)]
struct IdentitySummary {
    name: &'static str,
    passed: bool,
    checked: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    worst_residual: Option<f64>,
}

#[derive(Default)]
struct OrthoTally {
    // skew, kills_x, rank, frame, polynomial
    fails: [usize; 5],
    checked: [usize; 5],
    worst: [Option<f64>; 5],
    skipped: usize,
}

impl OrthoTally {
    fn add(&mut self, k: usize, ok: bool, residual: Option<f64>) {
        self.checked[k] += 1;
        self.fails[k] += usize::from(!ok);
        if let Some(r) = residual {
            self.worst[k] = Some(self.worst[k].map_or(r, |w| w.max(r)));
        }
    }

    fn record<S>(&mut self, r: &EquivalenceReport<S>) {
        for s in &r.samples {
            self.add(0, s.skew_adjoint, s.skew_residual);
            self.add(1, s.kills_x, s.kernel_residual);
            self.add(2, s.rank <= 2, None);
            if s.note.is_some() {
                self.skipped += 1;
            } else {
                self.add(3, s.frame_matches_phi, s.frame_residual);
            }
        }
        self.add(4, r.polynomial_identity, None);
    }

    fn summary(&self) -> Vec<IdentitySummary> {
        ["skew_adjoint", "kills_x", "rank_at_most_2", "frame_matches_phi", "polynomial_identity"]
            .iter()
            .enumerate()
            .map(|(k, &name)| IdentitySummary { name, passed: self.fails[k] == 0, checked: self.checked[k], worst_residual: self.worst[k] })
            .collect()
    }
}

#[derive(Serialize)]
struct OrthoSummary {
    points: usize,
    skipped_samples: usize,
    identities: Vec<IdentitySummary>,
    passed: bool,
}

fn ortho_one<S: Scalar>(p: &PhasePoint<S>, tol: f64) -> CliResult<EquivalenceReport<S>> {
    Ok(verify_equivalence(p, &sample_z(p.pencil(), 3), tol)?)
}

pub fn cmd_orthomodel(c: &Common, input: Option<&Path>) -> CliResult<bool> {
    c.validate()?;
    let points = corpus(c, input)?;
    let mut w = output(c.out.as_deref())?;
    let mut tally = OrthoTally::default();
    for (index, pt) in points.iter().enumerate() {
        match pt {
            AnyPoint::Exact(p) => {
                let report = ortho_one(p, c.tol)?;
                tally.record(&report);
                emit(&mut *w, &OrthoLine { index, passed: report.passed(), report })?;
            }
            AnyPoint::Float(p) => {
                let report = ortho_one(p, c.tol)?;
                tally.record(&report);
                emit(&mut *w, &OrthoLine { index, passed: report.passed(), report })?;
            }
        }
    }
    let identities = tally.summary();
    let passed = identities.iter().all(|i| i.passed);
    emit(&mut *w, &OrthoSummary { points: points.len(), skipped_samples: tally.skipped, identities, passed })?;
    w.flush()?;
    Ok(passed)
}

#[derive(Serialize)]
struct SweepRow {
    trial: usize,
    verdict: Verdict,
    very_stable: bool,
    degree: Option<usize>,
    m_inf: usize,
    distinct_finite: usize,
    max_multiplicity: usize,
    min_root_gap: Option<f64>,
    roots: String,
}

fn fmt_c(z: Complex64) -> String {
    format!("{:.12}{:+.12}i", z.re, z.im)
}

fn sweep_row<S: Factorize>(trial: usize, p: &PhasePoint<S>) -> CliResult<SweepRow> {
    let v = classify(p.x(), p.pencil())?;
    let vals = v.roots.finite_values();
    let mut gap: Option<f64> = None;
    for i in 0..vals.len() {
        for j in i + 1..vals.len() {
            let d = (vals[i] - vals[j]).norm();
            gap = Some(gap.map_or(d, |g| g.min(d)));
        }
    }
    let max_multiplicity = v.roots.finite.iter().map(|c| c.multiplicity).chain([v.roots.infinity]).max().unwrap_or(0);
    let roots = v
        .roots
        .finite
        .iter()
        .map(|c| if c.multiplicity > 1 { format!("{}^{}", fmt_c(c.value), c.multiplicity) } else { fmt_c(c.value) })
        .collect::<Vec<_>>()
        .join(";");
    Ok(SweepRow {
        trial,
        verdict: v.verdict,
        very_stable: v.very_stable,
        degree: v.p.degree(),
        m_inf: v.roots.infinity,
        distinct_finite: vals.len(),
        max_multiplicity,
        min_root_gap: gap,
        roots,
    })
}

pub fn cmd_sweep(c: &Common) -> CliResult<bool> {
    let points = corpus(c, None)?;
    let rows: Vec<SweepRow> = points
        .iter()
        .enumerate()
        .map(|(k, pt)| match pt {
            AnyPoint::Exact(p) => sweep_row(k, p),
            AnyPoint::Float(p) => sweep_row(k, p),
        })
        .collect::<CliResult<_>>()?;
    let mut csv = csv::Writer::from_writer(output(c.out.as_deref())?);
    for r in &rows {
        csv.serialize(r).map_err(|e| CliError::Failed(e.to_string()))?;
    }
    csv.flush()?;
    Ok(true)
}
