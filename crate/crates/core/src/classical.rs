//! Deterministic and local strategies and the exact classical value.

use rand::Rng as _;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::{Game, Strategy, STRATEGY_TOL};
use crate::rng::{derive_seed, rng_from_seed};

/// Default limit on the number of deterministic strategies `n^{2k}`.
pub const DEFAULT_ENUMERATION_CAP: u128 = 10_000_000;

/// Values closer than this are treated as ties.
const TIE_TOL: f64 = 1e-12;

/// A pair of answer functions `A, B: [k] → [n]`, stored 0-based.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct DeterministicStrategy {
    pub alice: Vec<usize>,
    pub bob: Vec<usize>,
}

impl DeterministicStrategy {
    pub fn new(alice: Vec<usize>, bob: Vec<usize>) -> Self {
        DeterministicStrategy { alice, bob }
    }

    /// Both players answer with the same constant.
    pub fn constant(k: usize, answer: usize) -> Self {
        Self::new(vec![answer; k], vec![answer; k])
    }

    pub fn check(&self, k: usize, n: usize) -> Result<()> {
        if self.alice.len() != k || self.bob.len() != k {
            return Err(Error::DimensionMismatch(format!(
                "answer functions must have length k={k}"
            )));
        }
        for (who, f) in [("A", &self.alice), ("B", &self.bob)] {
            if let Some((x, &a)) = f.iter().enumerate().find(|(_, &a)| a >= n) {
                return Err(Error::InvalidStrategy(format!(
                    "{who}({}) = {} is outside [1..{n}]",
                    x + 1,
                    a + 1
                )));
            }
        }
        Ok(())
    }

    /// 1-based copies of the answer functions, as printed and serialized.
    pub fn one_based(&self) -> (Vec<usize>, Vec<usize>) {
        (
            self.alice.iter().map(|a| a + 1).collect(),
            self.bob.iter().map(|b| b + 1).collect(),
        )
    }

    pub fn to_strategy(&self, k: usize, n: usize) -> Result<Strategy> {
        self.check(k, n)?;
        Ok(Strategy::from_fn(k, n, |x, y, a, b| {
            if self.alice[x] == a && self.bob[y] == b {
                1.0
            } else {
                0.0
            }
        }))
    }
}

/// Point-mass correlation `p(a,b|x,y) = [a = A(x)][b = B(y)]`.
pub fn det_to_strategy(d: &DeterministicStrategy, k: usize, n: usize) -> Result<Strategy> {
    d.to_strategy(k, n)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassicalValue {
    pub value: f64,
    pub argmax: DeterministicStrategy,
}

/// `n^{2k}`, saturating.
pub fn deterministic_count(k: usize, n: usize) -> u128 {
    (n as u128).checked_pow(2 * k as u32).unwrap_or(u128::MAX)
}

/// Exact classical value, maximizing over all `n^{2k}` deterministic
/// strategies.
///
/// Strategies are ordered with `B` varying fastest; ties go to the
/// lexicographically smallest `(A, B)`. For a fixed `A` the value splits into
/// independent per-`y` terms, so the best `B` is found column by column; this
/// visits the same maximum as the full product enumeration.
pub fn classical_value(g: &Game, cap: u128) -> Result<ClassicalValue> {
    let (k, n) = (g.k(), g.n());
    let count = deterministic_count(k, n);
    if count > cap {
        return Err(Error::CapExceeded {
            what: "deterministic strategies n^(2k)",
            count,
            cap,
            hint: "; sample deterministic strategies for a lower bound instead",
        });
    }
    let alice_count = (n as u64).pow(k as u32);

    const CHUNK: u64 = 4096;
    let chunks = alice_count.div_ceil(CHUNK);
    let per_chunk: Vec<(f64, Vec<usize>, Vec<usize>)> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let start = c * CHUNK;
            let end = (start + CHUNK).min(alice_count);
            let mut best: Option<(f64, Vec<usize>, Vec<usize>)> = None;
            let mut alice = vec![0usize; k];
            for index in start..end {
                decode(index, n, &mut alice);
                let (value, bob) = best_response(g, &alice);
                if best.as_ref().is_none_or(|(v, _, _)| value > v + TIE_TOL) {
                    best = Some((value, alice.clone(), bob));
                }
            }
            best.expect("non-empty chunk")
        })
        .collect();

    let (value, alice, bob) = per_chunk
        .into_iter()
        .reduce(|acc, next| if next.0 > acc.0 + TIE_TOL { next } else { acc })
        .expect("at least one deterministic strategy");
    Ok(ClassicalValue {
        value,
        argmax: DeterministicStrategy::new(alice, bob),
    })
}

/// Most significant digit first, so index order is lexicographic order.
fn decode(mut index: u64, n: usize, out: &mut [usize]) {
    for slot in out.iter_mut().rev() {
        *slot = (index % n as u64) as usize;
        index /= n as u64;
    }
}

/// Best `B` for a fixed `A`, with the smallest answer winning ties per `y`.
fn best_response(g: &Game, alice: &[usize]) -> (f64, Vec<usize>) {
    let (k, n) = (g.k(), g.n());
    let mut total = 0.0;
    let mut bob = Vec::with_capacity(k);
    for y in 0..k {
        let mut best_b = 0;
        let mut best_v = f64::NEG_INFINITY;
        for b in 0..n {
            let v: f64 = (0..k)
                .map(|x| g.pi(x, y) * g.predicate(x, y, alice[x], b))
                .sum();
            if v > best_v + TIE_TOL {
                best_v = v;
                best_b = b;
            }
        }
        total += best_v;
        bob.push(best_b);
    }
    (total, bob)
}

/// Best `A` for a fixed `B`, with the smallest answer winning ties per `x`.
fn alice_best_response(g: &Game, bob: &[usize]) -> (f64, Vec<usize>) {
    let (k, n) = (g.k(), g.n());
    let mut total = 0.0;
    let mut alice = Vec::with_capacity(k);
    for x in 0..k {
        let mut best_a = 0;
        let mut best_v = f64::NEG_INFINITY;
        for a in 0..n {
            let v: f64 = (0..k)
                .map(|y| g.pi(x, y) * g.predicate(x, y, a, bob[y]))
                .sum();
            if v > best_v + TIE_TOL {
                best_v = v;
                best_a = a;
            }
        }
        total += best_v;
        alice.push(best_a);
    }
    (total, alice)
}

/// Lower bound on the classical value for games too large to enumerate:
/// each restart draws a random `A` and alternates best responses until
/// neither player improves. Deterministic in `seed`; ties between restarts
/// go to the lowest restart index.
pub fn classical_lower_bound(g: &Game, restarts: usize, seed: u64) -> Result<ClassicalValue> {
    if restarts == 0 {
        return Err(Error::InvalidParameter("restarts must be ≥ 1".into()));
    }
    let (k, n) = (g.k(), g.n());
    let results: Vec<(f64, Vec<usize>, Vec<usize>)> = (0..restarts)
        .into_par_iter()
        .map(|r| {
            let mut rng = rng_from_seed(derive_seed(seed, r as u64));
            let mut alice: Vec<usize> = (0..k).map(|_| rng.random_range(0..n)).collect();
            let (mut value, mut bob) = best_response(g, &alice);
            loop {
                let (_, next_alice) = alice_best_response(g, &bob);
                let (vb, next_bob) = best_response(g, &next_alice);
                if vb <= value + TIE_TOL {
                    break;
                }
                value = vb;
                alice = next_alice;
                bob = next_bob;
            }
            (value, alice, bob)
        })
        .collect();
    let (value, alice, bob) = results
        .into_iter()
        .reduce(|acc, next| if next.0 > acc.0 + TIE_TOL { next } else { acc })
        .expect("at least one restart");
    Ok(ClassicalValue {
        value,
        argmax: DeterministicStrategy::new(alice, bob),
    })
}

/// Convex combination of deterministic strategies (shared randomness).
pub fn sample_local(
    mixture: &[(f64, DeterministicStrategy)],
    k: usize,
    n: usize,
) -> Result<Strategy> {
    if mixture.is_empty() {
        return Err(Error::InvalidParameter("empty mixture".into()));
    }
    if let Some((w, _)) = mixture.iter().find(|(w, _)| !(w.is_finite() && *w >= 0.0)) {
        return Err(Error::InvalidParameter(format!("negative or non-finite weight {w}")));
    }
    let total: f64 = mixture.iter().map(|(w, _)| w).sum();
    if (total - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidParameter(format!("weights sum to {total}, not 1")));
    }
    let mut p = vec![0.0; k * k * n * n];
    for (w, d) in mixture {
        d.check(k, n)?;
        for x in 0..k {
            for y in 0..k {
                p[((x * k + y) * n + d.alice[x]) * n + d.bob[y]] += w;
            }
        }
    }
    Ok(Strategy::from_parts_unchecked(k, n, p))
}

/// True iff `p(a,b|x,x) ≤ 1e-9` whenever `a ≠ b`.
pub fn is_synchronous(s: &Strategy) -> bool {
    let (k, n) = (s.k(), s.n());
    (0..k).all(|x| {
        (0..n).all(|a| (0..n).all(|b| a == b || s.get(x, x, a, b) <= STRATEGY_TOL))
    })
}

/// Iterator over all `n^{2k}` deterministic strategies in enumeration order.
pub fn all_deterministic(k: usize, n: usize) -> impl Iterator<Item = DeterministicStrategy> {
    let per_side = (n as u64).pow(k as u32);
    (0..per_side).flat_map(move |ia| {
        (0..per_side).map(move |ib| {
            let mut alice = vec![0; k];
            let mut bob = vec![0; k];
            decode(ia, n, &mut alice);
            decode(ib, n, &mut bob);
            DeterministicStrategy::new(alice, bob)
        })
    })
}

/// All answer functions `[k] → [n]`, lexicographic.
pub fn all_functions(k: usize, n: usize) -> impl Iterator<Item = Vec<usize>> {
    (0..(n as u64).pow(k as u32)).map(move |i| {
        let mut f = vec![0; k];
        decode(i, n, &mut f);
        f
    })
}
