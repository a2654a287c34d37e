//! Lower bounds on the entangled value by alternating ("see-saw") search.
//!
//! Each projective measurement is parameterized as `U · E · U*`, where `E`
//! assigns every coordinate of `ℂ^d` to one outcome. A round of the search
//!
//! 1. replaces the shared state with the principal eigenvector of the game
//!    operator `Σ π(x,y) Σ D(x,y,a,b) A^x_a ⊗ B^y_b` (power iteration,
//!    warm-started from the current state), then
//! 2. hill-climbs each of Alice's unitaries against the reduced operators
//!    induced by the state and Bob's measurements, then does the same for
//!    Bob.
//!
//! Every returned value is recomputed from the returned spec through
//! [`quantum_correlation`] and [`Game::value`], so it is a certified lower
//! bound on the entangled value.

use rand::Rng as _;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::classical::{classical_value, DeterministicStrategy, DEFAULT_ENUMERATION_CAP};
use crate::error::{Error, Result};
use crate::game::Game;
use crate::linalg::{
    power_iteration, random_state, random_unitary, ComplexMatrix, StateVector, C64, ZERO,
};
use crate::quantum::{quantum_correlation, MeasurementFamily, QuantumStrategySpec};
use crate::rng::{derive_seed, rng_from_seed, Rng};

pub const POWER_ITERATIONS: usize = 200;
pub const POWER_TOL: f64 = 1e-12;

/// Restarts whose values differ by less than this are tied.
const MERGE_TIE_TOL: f64 = 1e-12;

/// Stop a restart after this many rounds without measurable progress.
const STALL_ROUNDS: usize = 3;
const STALL_TOL: f64 = 1e-13;

/// A PVM `P_a = Σ_{i : labels[i] = a} u_i u_i*` where `u_i` are the columns
/// of a unitary.
#[derive(Debug, Clone)]
pub struct PvmParam {
    pub unitary: ComplexMatrix,
    pub labels: Vec<usize>,
    pub outcomes: usize,
}

/// Coordinate labels for the near-equal partition of `d` into `n` blocks:
/// the first `d mod n` outcomes get `⌈d/n⌉` coordinates, the rest `⌊d/n⌋`.
/// Blocks are empty when `n > d`.
pub fn near_equal_labels(d: usize, n: usize) -> Vec<usize> {
    let base = d / n;
    let extra = d % n;
    let mut labels = Vec::with_capacity(d);
    for a in 0..n {
        let size = base + usize::from(a < extra);
        labels.extend(std::iter::repeat_n(a, size));
    }
    labels
}

impl PvmParam {
    pub fn new(unitary: ComplexMatrix, labels: Vec<usize>, outcomes: usize) -> Self {
        debug_assert_eq!(unitary.rows(), labels.len());
        debug_assert!(labels.iter().all(|&l| l < outcomes));
        PvmParam {
            unitary,
            labels,
            outcomes,
        }
    }

    pub fn near_equal(unitary: ComplexMatrix, outcomes: usize) -> Self {
        let d = unitary.rows();
        Self::new(unitary, near_equal_labels(d, outcomes), outcomes)
    }

    pub fn dim(&self) -> usize {
        self.labels.len()
    }

    pub fn projections(&self) -> Vec<ComplexMatrix> {
        let d = self.dim();
        let mut out = vec![ComplexMatrix::zeros(d, d); self.outcomes];
        for (i, &label) in self.labels.iter().enumerate() {
            let p = &mut out[label];
            for r in 0..d {
                let ur = self.unitary[(r, i)];
                for c in 0..d {
                    p[(r, c)] += ur * self.unitary[(c, i)].conj();
                }
            }
        }
        out
    }

    pub fn family(&self) -> MeasurementFamily {
        MeasurementFamily::pvm(self.projections())
    }

    /// `Σ_a Tr(P_a O_a)` for Hermitian `O_a`, computed column by column.
    fn linear_objective(&self, ops: &[ComplexMatrix]) -> f64 {
        let d = self.dim();
        let mut total = 0.0;
        for (i, &label) in self.labels.iter().enumerate() {
            let o = &ops[label];
            for r in 0..d {
                let ur = self.unitary[(r, i)].conj();
                if ur == ZERO {
                    continue;
                }
                let mut row = ZERO;
                for c in 0..d {
                    row += o[(r, c)] * self.unitary[(c, i)];
                }
                total += (ur * row).re;
            }
        }
        total
    }

    /// Left-multiplies the unitary by a random Givens rotation in a random
    /// coordinate plane.
    fn perturbed(&self, step: f64, rng: &mut Rng) -> PvmParam {
        let d = self.dim();
        let i = rng.random_range(0..d);
        let mut j = rng.random_range(0..d - 1);
        if j >= i {
            j += 1;
        }
        let theta: f64 = step * rng.sample::<f64, _>(StandardNormal);
        let phi: f64 = rng.random_range(0.0..std::f64::consts::TAU);
        let (s, c) = theta.sin_cos();
        let e = C64::from_polar(1.0, phi);
        // rows i, j  <-  [[c, -e s], [conj(e) s, c]] · rows i, j
        let mut u = self.unitary.clone();
        for col in 0..d {
            let ui = u[(i, col)];
            let uj = u[(j, col)];
            u[(i, col)] = ui * c - e * s * uj;
            u[(j, col)] = e.conj() * s * ui + uj * c;
        }
        PvmParam {
            unitary: u,
            labels: self.labels.clone(),
            outcomes: self.outcomes,
        }
    }
}

/// Random-perturbation hill climbing over the unitary of `param`.
///
/// Proposals are Givens rotations with angle `step · N(0,1)`; the step decays
/// linearly from `initial_step` to 2% of it. Only strict improvements are
/// accepted, so the returned value never decreases.
pub fn hill_climb(
    param: PvmParam,
    current: f64,
    steps: usize,
    initial_step: f64,
    rng: &mut Rng,
    objective: impl Fn(&PvmParam) -> f64,
) -> (PvmParam, f64) {
    if param.dim() < 2 || steps == 0 {
        return (param, current);
    }
    let mut best = param;
    let mut best_value = current;
    for t in 0..steps {
        let frac = t as f64 / steps as f64;
        let step = initial_step * (0.02 + 0.98 * (1.0 - frac));
        let candidate = best.perturbed(step, rng);
        let value = objective(&candidate);
        if value > best_value {
            best = candidate;
            best_value = value;
        }
    }
    (best, best_value)
}

/// Search settings shared by the entangled and synchronous lower bounds.
#[derive(Debug, Clone)]
pub struct SearchConfig {
    /// Local dimension `d` of each player (or of the matrix algebra).
    pub dim: usize,
    pub restarts: usize,
    pub seed: u64,
    /// Alternation rounds per restart.
    pub rounds: usize,
    /// Hill-climbing proposals per measurement per round.
    pub climb_steps: usize,
    pub initial_step: f64,
    /// Seed restart 0 with the best deterministic strategy when it can be
    /// enumerated within [`DEFAULT_ENUMERATION_CAP`].
    pub seed_deterministic: bool,
}

impl SearchConfig {
    pub fn new(dim: usize, restarts: usize, seed: u64) -> Self {
        SearchConfig {
            dim,
            restarts,
            seed,
            rounds: 40,
            climb_steps: 60,
            initial_step: 0.6,
            seed_deterministic: true,
        }
    }

    pub fn with_rounds(mut self, rounds: usize) -> Self {
        self.rounds = rounds;
        self
    }

    pub fn check(&self) -> Result<()> {
        if self.dim == 0 {
            return Err(Error::InvalidParameter("dimension must be ≥ 1".into()));
        }
        if self.dim > 64 {
            return Err(Error::InvalidParameter("dimension must be ≤ 64".into()));
        }
        if self.restarts == 0 {
            return Err(Error::InvalidParameter("restarts must be ≥ 1".into()));
        }
        if self.rounds == 0 {
            return Err(Error::InvalidParameter("iteration budget must be ≥ 1".into()));
        }
        Ok(())
    }
}

/// Best tensor-flavor spec found and its re-evaluated value.
#[derive(Debug, Clone)]
pub struct EntangledBound {
    pub value: f64,
    pub spec: QuantumStrategySpec,
    /// Which restart produced the result.
    pub restart: usize,
    /// Whether restart 0 started from the classical optimum.
    pub deterministic_seeded: bool,
}

struct TensorState {
    alice: Vec<PvmParam>,
    bob: Vec<PvmParam>,
    psi: Vec<C64>,
}

impl TensorState {
    fn game_operator(&self, g: &Game, pa: &[Vec<ComplexMatrix>], pb: &[Vec<ComplexMatrix>]) -> ComplexMatrix {
        let d = self.alice[0].dim();
        let (k, n) = (g.k(), g.n());
        let mut w = ComplexMatrix::zeros(d * d, d * d);
        for x in 0..k {
            for y in 0..k {
                let pi = g.pi(x, y);
                if pi == 0.0 {
                    continue;
                }
                for a in 0..n {
                    for b in 0..n {
                        if g.wins(x, y, a, b) {
                            let term = pa[x][a].kron(&pb[y][b]).scale_real(pi);
                            w = &w + &term;
                        }
                    }
                }
            }
        }
        w
    }
}

/// Searches tensor-product strategies with local dimensions `(d, d)`.
pub fn entangled_lower_bound(g: &Game, config: &SearchConfig) -> Result<EntangledBound> {
    config.check()?;
    let validation = g.validate();
    if !validation.is_ok() {
        return Err(Error::InvalidGame(validation.messages().join("; ")));
    }
    let seed_strategy = if config.seed_deterministic {
        classical_value(g, DEFAULT_ENUMERATION_CAP)
            .ok()
            .map(|cv| cv.argmax)
    } else {
        None
    };

    let results: Vec<Result<(f64, QuantumStrategySpec)>> = (0..config.restarts)
        .into_par_iter()
        .map(|r| {
            let mut rng = rng_from_seed(derive_seed(config.seed, r as u64));
            let start = match (&seed_strategy, r) {
                (Some(det), 0) => deterministic_start(det, config.dim, g.n()),
                _ => random_start(g, config.dim, &mut rng),
            };
            let state = run_tensor_restart(g, config, start, &mut rng);
            let spec = QuantumStrategySpec::tensor(
                StateVector::normalized(state.psi)?,
                state.alice.iter().map(PvmParam::family).collect(),
                state.bob.iter().map(PvmParam::family).collect(),
            )?;
            let value = g.value(&quantum_correlation(&spec)?)?;
            Ok((value, spec))
        })
        .collect();

    let mut best: Option<(usize, f64, QuantumStrategySpec)> = None;
    for (r, res) in results.into_iter().enumerate() {
        let (value, spec) = res?;
        if best.as_ref().is_none_or(|(_, v, _)| value > v + MERGE_TIE_TOL) {
            best = Some((r, value, spec));
        }
    }
    let (restart, value, spec) = best.expect("restarts ≥ 1");
    Ok(EntangledBound {
        value,
        spec,
        restart,
        deterministic_seeded: seed_strategy.is_some(),
    })
}

/// Product state `e₁ ⊗ e₁` with coordinate 0 carrying each player's
/// deterministic answer; reproduces the deterministic correlation exactly.
fn deterministic_start(det: &DeterministicStrategy, d: usize, n: usize) -> TensorState {
    let family = |answer: usize| {
        let mut labels = near_equal_labels(d, n);
        if let Some(pos) = labels.iter().position(|&l| l == answer) {
            labels.swap(0, pos);
        } else {
            labels[0] = answer;
        }
        PvmParam::new(ComplexMatrix::identity(d), labels, n)
    };
    let mut psi = vec![ZERO; d * d];
    psi[0] = C64::new(1.0, 0.0);
    TensorState {
        alice: det.alice.iter().map(|&a| family(a)).collect(),
        bob: det.bob.iter().map(|&b| family(b)).collect(),
        psi,
    }
}

fn random_start(g: &Game, d: usize, rng: &mut Rng) -> TensorState {
    let n = g.n();
    let fam = |rng: &mut Rng| PvmParam::near_equal(random_unitary(d, rng), n);
    let alice = (0..g.k()).map(|_| fam(rng)).collect();
    let bob = (0..g.k()).map(|_| fam(rng)).collect();
    let psi = random_state(d * d, rng).into_amplitudes();
    TensorState { alice, bob, psi }
}

fn rayleigh(w: &ComplexMatrix, v: &[C64]) -> f64 {
    crate::linalg::inner(v, &w.mul_vec(v)).re
}

fn run_tensor_restart(
    g: &Game,
    config: &SearchConfig,
    mut st: TensorState,
    rng: &mut Rng,
) -> TensorState {
    let d = config.dim;
    let (k, n) = (g.k(), g.n());
    let mut value = f64::NEG_INFINITY;
    let mut stalled = 0;

    for _ in 0..config.rounds {
        // state step
        let pa: Vec<Vec<ComplexMatrix>> = st.alice.iter().map(PvmParam::projections).collect();
        let pb: Vec<Vec<ComplexMatrix>> = st.bob.iter().map(PvmParam::projections).collect();
        let w = st.game_operator(g, &pa, &pb);
        let current = rayleigh(&w, &st.psi);
        let power = power_iteration(&w, &st.psi, POWER_ITERATIONS, POWER_TOL);
        if power.value >= current {
            st.psi = power.vector;
        }

        // ψ as a d×d matrix M, ψ[i*d + j] = M[i][j]
        let m = ComplexMatrix::from_vec(d, d, st.psi.clone()).expect("square state");
        let m_adj = m.adjoint();

        // Alice: ⟨(A⊗B)ψ,ψ⟩ = Tr(A · M Bᵀ M*)
        let pb_reduced: Vec<Vec<ComplexMatrix>> = pb
            .iter()
            .map(|fam| fam.iter().map(|b| &(&m * &b.transpose()) * &m_adj).collect())
            .collect();
        for x in 0..k {
            let ops: Vec<ComplexMatrix> = (0..n)
                .map(|a| {
                    let mut o = ComplexMatrix::zeros(d, d);
                    for y in 0..k {
                        for b in 0..n {
                            if g.wins(x, y, a, b) && g.pi(x, y) > 0.0 {
                                o = &o + &pb_reduced[y][b].scale_real(g.pi(x, y));
                            }
                        }
                    }
                    o
                })
                .collect();
            let param = st.alice[x].clone();
            let start = param.linear_objective(&ops);
            let (param, _) = hill_climb(
                param,
                start,
                config.climb_steps,
                config.initial_step,
                rng,
                |p| p.linear_objective(&ops),
            );
            st.alice[x] = param;
        }

        // Bob: ⟨(A⊗B)ψ,ψ⟩ = Tr(B · Mᵀ Aᵀ conj(M))
        let m_t = m.transpose();
        let m_conj = m.conj();
        let pa: Vec<Vec<ComplexMatrix>> = st.alice.iter().map(PvmParam::projections).collect();
        let pa_reduced: Vec<Vec<ComplexMatrix>> = pa
            .iter()
            .map(|fam| fam.iter().map(|a| &(&m_t * &a.transpose()) * &m_conj).collect())
            .collect();
        let mut bob_value = 0.0;
        for y in 0..k {
            let ops: Vec<ComplexMatrix> = (0..n)
                .map(|b| {
                    let mut o = ComplexMatrix::zeros(d, d);
                    for x in 0..k {
                        for a in 0..n {
                            if g.wins(x, y, a, b) && g.pi(x, y) > 0.0 {
                                o = &o + &pa_reduced[x][a].scale_real(g.pi(x, y));
                            }
                        }
                    }
                    o
                })
                .collect();
            let param = st.bob[y].clone();
            let start = param.linear_objective(&ops);
            let (param, v) = hill_climb(
                param,
                start,
                config.climb_steps,
                config.initial_step,
                rng,
                |p| p.linear_objective(&ops),
            );
            st.bob[y] = param;
            bob_value += v;
        }

        if bob_value <= value + STALL_TOL {
            stalled += 1;
            if stalled >= STALL_ROUNDS {
                break;
            }
        } else {
            stalled = 0;
        }
        value = value.max(bob_value);
    }
    st
}
