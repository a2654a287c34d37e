//! The moment map: normalized traces of all *-monomials of degree `1..=d`
//! evaluated on a tuple of contractions, plus sampled clouds of moment
//! vectors for empirical density experiments.

use std::fmt;
use std::time::Instant;

use rand::Rng as _;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{ginibre, operator_norm, ComplexMatrix, C64};
use crate::rng::{derive_seed, rng_from_seed};

/// Largest `(2n)^d` accepted by [`enumerate_monomials`].
pub const MONOMIAL_CAP: u128 = 1_000_000;
/// Largest `count · L` accepted when sampling a cloud.
pub const CLOUD_CAP: u128 = 50_000_000;
/// Largest matrix dimension accepted when sampling a cloud.
pub const MAX_SAMPLE_DIM: usize = 64;
pub const CONTRACTION_TOL: f64 = 1e-9;

/// One letter `x_i` or `x_i*`; `var` is 0-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Letter {
    pub var: usize,
    pub adjoint: bool,
}

impl Letter {
    /// Position in the alphabet `x_1, …, x_n, x_1*, …, x_n*`.
    fn code(&self, n: usize) -> usize {
        self.var + if self.adjoint { n } else { 0 }
    }

    fn from_code(code: usize, n: usize) -> Self {
        Letter {
            var: code % n,
            adjoint: code >= n,
        }
    }
}

/// A nonempty word over `{x_i, x_i*}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Monomial {
    pub letters: Vec<Letter>,
    /// Number of variables, used only for display.
    pub vars: usize,
}

impl Monomial {
    pub fn degree(&self) -> usize {
        self.letters.len()
    }

    /// `w*`: letters reversed, each starred.
    pub fn adjoint(&self) -> Monomial {
        Monomial {
            letters: self
                .letters
                .iter()
                .rev()
                .map(|l| Letter {
                    var: l.var,
                    adjoint: !l.adjoint,
                })
                .collect(),
            vars: self.vars,
        }
    }

    /// Position of this word in the canonical enumeration.
    pub fn index(&self) -> usize {
        let n = self.vars;
        let base = 2 * n;
        let offset: usize = (1..self.degree()).map(|j| base.pow(j as u32)).sum();
        let rank = self.letters.iter().fold(0, |acc, l| acc * base + l.code(n));
        offset + rank
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for l in &self.letters {
            if self.vars == 1 {
                write!(f, "x")?;
            } else {
                write!(f, "x{}", l.var + 1)?;
            }
            if l.adjoint {
                write!(f, "*")?;
            }
        }
        Ok(())
    }
}

/// `Σ_{j=1..d} (2n)^j`, or `None` on overflow.
pub fn monomial_count(n: usize, d: usize) -> Option<u128> {
    let base = 2 * n as u128;
    (1..=d as u32).try_fold(0u128, |acc, j| acc.checked_add(base.checked_pow(j)?))
}

fn check_monomial_params(n: usize, d: usize) -> Result<usize> {
    if n == 0 || d == 0 {
        return Err(Error::InvalidParameter("n and d must be ≥ 1".into()));
    }
    let top = (2 * n as u128).checked_pow(d as u32).unwrap_or(u128::MAX);
    if top > MONOMIAL_CAP {
        return Err(Error::CapExceeded {
            what: "monomials of top degree (2n)^d",
            count: top,
            cap: MONOMIAL_CAP,
            hint: "",
        });
    }
    Ok(monomial_count(n, d).expect("bounded by cap") as usize)
}

/// All words of length `1..=d`, shorter first, lexicographic within a
/// length over `x_1 < … < x_n < x_1* < … < x_n*`. The empty word is
/// excluded.
pub fn enumerate_monomials(n: usize, d: usize) -> Result<Vec<Monomial>> {
    let total = check_monomial_params(n, d)?;
    let base = 2 * n;
    let mut out = Vec::with_capacity(total);
    for len in 1..=d {
        let count = base.pow(len as u32);
        for rank in 0..count {
            let mut letters = vec![Letter { var: 0, adjoint: false }; len];
            let mut r = rank;
            for slot in letters.iter_mut().rev() {
                *slot = Letter::from_code(r % base, n);
                r /= base;
            }
            out.push(Monomial { letters, vars: n });
        }
    }
    Ok(out)
}

/// `(τ(m_i(ā)))_i` in canonical monomial order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentVector {
    pub values: Vec<C64>,
}

impl MomentVector {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// `max_i |u_i − v_i|`.
    pub fn sup_distance(&self, other: &MomentVector) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn to_csv_row(&self) -> String {
        let parts: Vec<String> = self
            .values
            .iter()
            .flat_map(|z| [z.re.to_string(), z.im.to_string()])
            .collect();
        parts.join(",")
    }
}

/// Evaluates every monomial of degree `1..=d` on `matrices` and takes the
/// normalized trace. Each matrix must have operator norm ≤ 1 (+1e-9).
pub fn moment_map(matrices: &[ComplexMatrix], d: usize) -> Result<MomentVector> {
    let n = matrices.len();
    let total = check_monomial_params(n, d)?;
    let p = matrices[0].rows();
    for (i, m) in matrices.iter().enumerate() {
        if !m.is_square() || m.rows() != p {
            return Err(Error::DimensionMismatch(format!(
                "matrix {} is {}x{}, expected {p}x{p}",
                i + 1,
                m.rows(),
                m.cols()
            )));
        }
        if !m.is_finite() {
            return Err(Error::InvalidParameter(format!("matrix {} has non-finite entries", i + 1)));
        }
        let norm = operator_norm(m);
        if norm > 1.0 + CONTRACTION_TOL {
            return Err(Error::OperatorNorm { index: i + 1, norm });
        }
    }

    // alphabet in code order
    let letters: Vec<ComplexMatrix> = matrices
        .iter()
        .cloned()
        .chain(matrices.iter().map(ComplexMatrix::adjoint))
        .collect();
    let base = letters.len();
    let inv_p = 1.0 / p as f64;
    let mut values = vec![C64::new(0.0, 0.0); total];
    let offsets: Vec<usize> = (0..=d)
        .map(|len| (1..len).map(|j| base.pow(j as u32)).sum())
        .collect();

    // depth-first over prefixes; the last letter only needs a trace
    let mut stack: Vec<(ComplexMatrix, usize, usize)> = letters
        .iter()
        .enumerate()
        .rev()
        .map(|(code, m)| (m.clone(), 1, code))
        .collect();
    while let Some((prod, len, rank)) = stack.pop() {
        values[offsets[len] + rank] = prod.trace() * inv_p;
        if len == d {
            continue;
        }
        if len + 1 == d {
            for (code, letter) in letters.iter().enumerate() {
                values[offsets[len + 1] + rank * base + code] = prod.trace_product(letter) * inv_p;
            }
        } else {
            for (code, letter) in letters.iter().enumerate().rev() {
                stack.push((&prod * letter, len + 1, rank * base + code));
            }
        }
    }
    Ok(MomentVector { values })
}

/// A random contraction: Ginibre matrix divided by its operator norm, then
/// scaled by `√u` with `u` uniform, so `1×1` samples are uniform on the disk.
pub fn random_contraction(p: usize, rng: &mut crate::rng::Rng) -> ComplexMatrix {
    loop {
        let g = ginibre(p, rng);
        let norm = operator_norm(&g);
        if norm > 0.0 {
            let radius = rng.random::<f64>().sqrt();
            return g.scale_real(radius / norm);
        }
    }
}

/// Seed for point `index` of the cloud at matrix dimension `p`.
fn point_seed(seed: u64, p: usize, index: usize) -> u64 {
    derive_seed(derive_seed(seed, p as u64), index as u64)
}

/// `count` moment vectors of random contraction tuples in `M_p`.
///
/// Every point has its own derived seed, so a shorter cloud with the same
/// `(seed, p)` is a prefix of a longer one.
pub fn sample_moment_cloud(
    n: usize,
    d: usize,
    p: usize,
    count: usize,
    seed: u64,
) -> Result<Vec<MomentVector>> {
    let len = check_monomial_params(n, d)?;
    if p == 0 || p > MAX_SAMPLE_DIM {
        return Err(Error::InvalidParameter(format!(
            "matrix dimension must be in 1..={MAX_SAMPLE_DIM}"
        )));
    }
    let work = len as u128 * count as u128;
    if work > CLOUD_CAP {
        return Err(Error::CapExceeded {
            what: "cloud size count·L",
            count: work,
            cap: CLOUD_CAP,
            hint: "",
        });
    }
    (0..count)
        .into_par_iter()
        .map(|i| {
            let mut rng = rng_from_seed(point_seed(seed, p, i));
            let tuple: Vec<ComplexMatrix> = (0..n).map(|_| random_contraction(p, &mut rng)).collect();
            moment_map(&tuple, d)
        })
        .collect()
}

pub fn cloud_to_csv(cloud: &[MomentVector]) -> String {
    let mut out = String::new();
    for v in cloud {
        out.push_str(&v.to_csv_row());
        out.push('\n');
    }
    out
}

/// Parameters and outcome of [`density_check`]. An empirical estimate from
/// finite samples, not a certificate.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DensityReport {
    pub n: usize,
    pub d: usize,
    pub p_small: usize,
    pub p_large: usize,
    pub eps: f64,
    pub count_small: usize,
    pub count_large: usize,
    pub seed: u64,
    /// Fraction of large-cloud points within `eps` of some small-cloud point.
    pub covered_fraction: f64,
    /// Largest nearest-neighbor distance.
    pub max_gap: f64,
    pub mean_gap: f64,
    pub runtime_secs: f64,
}

/// How well a sampled `X(n,d,p_small)` covers samples of `X(n,d,p_large)`
/// in the coordinatewise sup distance.
pub fn density_check(
    n: usize,
    d: usize,
    p_small: usize,
    p_large: usize,
    eps: f64,
    counts: (usize, usize),
    seed: u64,
) -> Result<DensityReport> {
    let started = Instant::now();
    if p_small > p_large {
        return Err(Error::InvalidParameter(format!(
            "p_small ({p_small}) must not exceed p_large ({p_large})"
        )));
    }
    if eps.is_nan() || eps < 0.0 {
        return Err(Error::InvalidParameter("eps must be ≥ 0".into()));
    }
    let (count_small, count_large) = counts;
    if count_small == 0 && count_large > 0 {
        return Err(Error::InvalidParameter("small cloud must be nonempty".into()));
    }
    let small = sample_moment_cloud(n, d, p_small, count_small, seed)?;
    let large = sample_moment_cloud(n, d, p_large, count_large, seed)?;

    let gaps: Vec<f64> = large
        .par_iter()
        .map(|v| {
            small
                .iter()
                .map(|s| v.sup_distance(s))
                .fold(f64::INFINITY, f64::min)
        })
        .collect();
    let covered = gaps.iter().filter(|&&g| g <= eps).count();
    let denom = gaps.len().max(1) as f64;
    Ok(DensityReport {
        n,
        d,
        p_small,
        p_large,
        eps,
        count_small,
        count_large,
        seed,
        covered_fraction: if gaps.is_empty() { 1.0 } else { covered as f64 / denom },
        max_gap: gaps.iter().copied().fold(0.0, f64::max),
        mean_gap: gaps.iter().sum::<f64>() / denom,
        runtime_secs: started.elapsed().as_secs_f64(),
    })
}
