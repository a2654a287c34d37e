//! Synchronous correlations `p(a,b|x,y) = τ(f^x_a f^y_b)` from families of
//! projective measurements in `M_d`, with `τ` the normalized trace.

use rayon::prelude::*;

use crate::classical::all_functions;
use crate::error::{Error, Result};
use crate::game::{Game, Strategy, STRATEGY_TOL};
use crate::linalg::{hermitian_eigen, random_unitary, ComplexMatrix};
use crate::quantum::{validate_measurement, MeasurementFamily, MEASUREMENT_TOL};
use crate::rng::{derive_seed, rng_from_seed};
use crate::seesaw::{hill_climb, PvmParam, SearchConfig};

/// Largest `n^k` for which scalar families are enumerated as seeds.
const SCALAR_SEED_CAP: u64 = 1_000_000;

/// `k` projective measurements with `n` outcomes each, all in `M_d`.
#[derive(Debug, Clone)]
pub struct TracialPvmFamily {
    pub d: usize,
    pub families: Vec<MeasurementFamily>,
}

impl TracialPvmFamily {
    pub fn new(families: Vec<MeasurementFamily>) -> Result<Self> {
        let d = families.first().map_or(0, |m| m.dim());
        let fam = TracialPvmFamily { d, families };
        fam.validate()?;
        Ok(fam)
    }

    /// The `d = 1` family with `f^x_{A(x)} = 1`.
    pub fn scalar(answers: &[usize], n: usize) -> Result<Self> {
        Self::new(
            answers
                .iter()
                .map(|&ans| {
                    MeasurementFamily::pvm(
                        (0..n)
                            .map(|a| ComplexMatrix::from_real(1, 1, &[if a == ans { 1.0 } else { 0.0 }]))
                            .collect(),
                    )
                })
                .collect(),
        )
    }

    pub fn k(&self) -> usize {
        self.families.len()
    }

    pub fn n(&self) -> usize {
        self.families.first().map_or(0, |m| m.len())
    }

    pub fn validate(&self) -> Result<()> {
        if self.families.is_empty() || self.d == 0 {
            return Err(Error::InvalidMeasurement("empty tracial family".into()));
        }
        let n = self.n();
        for (x, m) in self.families.iter().enumerate() {
            if m.len() != n || m.dim() != self.d {
                return Err(Error::InvalidMeasurement(format!(
                    "family {} has {} outcomes in dimension {}, expected {n} in dimension {}",
                    x + 1,
                    m.len(),
                    m.dim(),
                    self.d
                )));
            }
            let as_pvm = MeasurementFamily::pvm(m.outcomes.clone());
            let report = validate_measurement(&as_pvm);
            if !report.is_ok() {
                return Err(Error::InvalidMeasurement(format!(
                    "family {}: {}",
                    x + 1,
                    report.violations.join("; ")
                )));
            }
        }
        Ok(())
    }
}

/// `p(a,b|x,y) = (1/d) Tr(f^x_a f^y_b)`.
pub fn tracial_correlation(fam: &TracialPvmFamily) -> Result<Strategy> {
    fam.validate()?;
    let (k, n) = (fam.k(), fam.n());
    let inv_d = 1.0 / fam.d as f64;
    let mut p = Vec::with_capacity(k * k * n * n);
    for x in 0..k {
        for y in 0..k {
            for a in 0..n {
                for b in 0..n {
                    let z = fam.families[x].outcomes[a].trace_product(&fam.families[y].outcomes[b]) * inv_d;
                    if z.im.abs() >= STRATEGY_TOL {
                        return Err(Error::InvalidMeasurement(format!(
                            "trace has imaginary part {:e}",
                            z.im
                        )));
                    }
                    p.push(z.re);
                }
            }
        }
    }
    let s = Strategy::from_parts_unchecked(k, n, p);
    s.check(STRATEGY_TOL)?;
    Ok(s)
}

#[derive(Debug, Clone)]
pub struct SyncBound {
    pub value: f64,
    pub family: TracialPvmFamily,
    pub restart: usize,
    /// Whether restart 0 started from the best scalar family.
    pub scalar_seeded: bool,
}

/// `Σ π(x,y) Σ D(x,y,a,b) (1/d) Tr(f^x_a f^y_b)`.
fn tracial_objective(g: &Game, projs: &[Vec<ComplexMatrix>], d: usize) -> f64 {
    let (k, n) = (g.k(), g.n());
    let mut total = 0.0;
    for x in 0..k {
        for y in 0..k {
            let pi = g.pi(x, y);
            if pi == 0.0 {
                continue;
            }
            for a in 0..n {
                for b in 0..n {
                    if g.wins(x, y, a, b) {
                        total += pi * projs[x][a].trace_product(&projs[y][b]).re;
                    }
                }
            }
        }
    }
    total / d as f64
}

/// Best scalar (`d = 1`) synchronous strategy: a single answer function
/// used by both players.
pub fn best_scalar_family(g: &Game) -> Option<(f64, Vec<usize>)> {
    let (k, n) = (g.k(), g.n());
    let count = (n as u64).checked_pow(k as u32)?;
    if count > SCALAR_SEED_CAP {
        return None;
    }
    let mut best: Option<(f64, Vec<usize>)> = None;
    for f in all_functions(k, n) {
        let mut v = 0.0;
        for x in 0..k {
            for y in 0..k {
                v += g.pi(x, y) * g.predicate(x, y, f[x], f[y]);
            }
        }
        if best.as_ref().is_none_or(|(bv, _)| v > bv + 1e-12) {
            best = Some((v, f));
        }
    }
    best
}

/// Searches projective families in `M_d` for the synchronous value, reusing
/// the see-saw hill climber with the tracial objective. The returned value is
/// recomputed via [`tracial_correlation`] and [`Game::value`].
pub fn sync_value_lower_bound(g: &Game, config: &SearchConfig) -> Result<SyncBound> {
    config.check()?;
    let validation = g.validate();
    if !validation.is_ok() {
        return Err(Error::InvalidGame(validation.messages().join("; ")));
    }
    let (k, n, d) = (g.k(), g.n(), config.dim);
    let scalar = if config.seed_deterministic {
        best_scalar_family(g)
    } else {
        None
    };

    let results: Vec<Result<(f64, TracialPvmFamily)>> = (0..config.restarts)
        .into_par_iter()
        .map(|r| {
            let mut rng = rng_from_seed(derive_seed(config.seed, r as u64));
            let mut params: Vec<PvmParam> = match (&scalar, r) {
                (Some((_, f)), 0) => f
                    .iter()
                    .map(|&ans| PvmParam::new(ComplexMatrix::identity(d), vec![ans; d], n))
                    .collect(),
                _ => (0..k)
                    .map(|_| PvmParam::near_equal(random_unitary(d, &mut rng), n))
                    .collect(),
            };
            let mut projs: Vec<Vec<ComplexMatrix>> =
                params.iter().map(PvmParam::projections).collect();
            let mut value = tracial_objective(g, &projs, d);
            let mut stalled = 0;
            for _ in 0..config.rounds {
                let before = value;
                for x in 0..k {
                    let (param, v) = hill_climb(
                        params[x].clone(),
                        value,
                        config.climb_steps,
                        config.initial_step,
                        &mut rng,
                        |cand| {
                            let mut trial = projs.clone();
                            trial[x] = cand.projections();
                            tracial_objective(g, &trial, d)
                        },
                    );
                    projs[x] = param.projections();
                    params[x] = param;
                    value = v;
                }
                if value <= before + 1e-13 {
                    stalled += 1;
                    if stalled >= 3 {
                        break;
                    }
                } else {
                    stalled = 0;
                }
            }
            let family = TracialPvmFamily::new(params.iter().map(PvmParam::family).collect())?;
            let certified = g.value(&tracial_correlation(&family)?)?;
            Ok((certified, family))
        })
        .collect();

    let mut best: Option<(usize, f64, TracialPvmFamily)> = None;
    for (r, res) in results.into_iter().enumerate() {
        let (value, family) = res?;
        if best.as_ref().is_none_or(|(_, v, _)| value > v + 1e-12) {
            best = Some((r, value, family));
        }
    }
    let (restart, value, family) = best.expect("restarts ≥ 1");
    Ok(SyncBound {
        value,
        family,
        restart,
        scalar_seeded: scalar.is_some(),
    })
}

/// Largest input defect [`repair_almost_pvm`] accepts.
pub const REPAIR_DEFECT_LIMIT: f64 = 0.1;

/// `max(‖f − f*‖, ‖f − f²‖, ‖Σf − I‖)` in Frobenius norm.
pub fn pvm_defect(elements: &[ComplexMatrix]) -> f64 {
    let d = elements.first().map_or(0, |m| m.rows());
    let mut worst: f64 = 0.0;
    let mut sum = ComplexMatrix::zeros(d, d);
    for f in elements {
        worst = worst
            .max(f.hermitian_defect())
            .max((&(f * f) - f).frobenius_norm());
        sum = &sum + f;
    }
    worst.max((&sum - &ComplexMatrix::identity(d)).frobenius_norm())
}

/// Rounds a family with small defect to an exact PVM.
///
/// The elements are symmetrized and shifted so they sum to the identity;
/// eigenvectors of the weighted sum `Σ_a a·h_a` then serve as a common
/// approximate eigenbasis, and each eigenvector goes to the outcome whose
/// element scores it highest.
pub fn repair_almost_pvm(elements: &[ComplexMatrix]) -> Result<MeasurementFamily> {
    if elements.is_empty() {
        return Err(Error::InvalidParameter("no elements to repair".into()));
    }
    let d = elements[0].rows();
    if elements.iter().any(|m| m.rows() != d || m.cols() != d) {
        return Err(Error::DimensionMismatch("elements must share a square shape".into()));
    }
    let defect = pvm_defect(elements);
    if defect.is_nan() || defect > REPAIR_DEFECT_LIMIT {
        return Err(Error::DefectTooLarge {
            defect,
            limit: REPAIR_DEFECT_LIMIT,
        });
    }
    let n = elements.len();
    let mut sum = ComplexMatrix::zeros(d, d);
    let mut sym: Vec<ComplexMatrix> = elements
        .iter()
        .map(|f| {
            let h = (f + &f.adjoint()).scale_real(0.5);
            sum = &sum + &h;
            h
        })
        .collect();
    let correction = (&ComplexMatrix::identity(d) - &sum).scale_real(1.0 / n as f64);
    for h in &mut sym {
        *h = &*h + &correction;
    }

    let mut weighted = ComplexMatrix::zeros(d, d);
    for (a, h) in sym.iter().enumerate() {
        weighted = &weighted + &h.scale_real(a as f64);
    }
    let eig = hermitian_eigen(&weighted);

    let mut out = vec![ComplexMatrix::zeros(d, d); n];
    for j in 0..d {
        let v = eig.column(j);
        let scores: Vec<f64> = sym
            .iter()
            .map(|h| crate::linalg::inner(&v, &h.mul_vec(&v)).re)
            .collect();
        let mut best = 0;
        for (a, &s) in scores.iter().enumerate() {
            if s > scores[best] {
                best = a;
            }
        }
        out[best] = &out[best] + &ComplexMatrix::outer(&v, &v);
    }
    let family = MeasurementFamily::pvm(out);
    debug_assert!(validate_measurement(&family).worst <= MEASUREMENT_TOL);
    Ok(family)
}
