//! Measurements (POVM/PVM), the Born rule, Naimark dilation, and quantum
//! strategies in tensor-product and commuting-operator form.

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_4, FRAC_PI_8};

use serde::{Deserialize, Serialize};

use crate::classical::DeterministicStrategy;
use crate::error::{Error, Result};
use crate::game::{Strategy, STRATEGY_TOL};
use crate::linalg::{
    hermitian_eigen, psd_sqrt, ComplexMatrix, MatrixData, StateVector, C64, ONE, ZERO,
};

/// Tolerance for measurement and spec validation.
pub const MEASUREMENT_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Flavor {
    Povm,
    Pvm,
}

/// `n` operators on a common space, one per outcome.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementFamily {
    pub outcomes: Vec<ComplexMatrix>,
    pub flavor: Flavor,
}

/// Worst-case defects found by [`validate_measurement`].
#[derive(Debug, Clone, Default, PartialEq)]
pub struct MeasurementReport {
    pub violations: Vec<String>,
    /// Largest violation magnitude over all checks.
    pub worst: f64,
}

impl MeasurementReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }

    fn flag(&mut self, magnitude: f64, message: String) {
        self.worst = self.worst.max(magnitude);
        self.violations.push(message);
    }
}

impl MeasurementFamily {
    pub fn new(outcomes: Vec<ComplexMatrix>, flavor: Flavor) -> Self {
        MeasurementFamily { outcomes, flavor }
    }

    pub fn pvm(outcomes: Vec<ComplexMatrix>) -> Self {
        Self::new(outcomes, Flavor::Pvm)
    }

    pub fn povm(outcomes: Vec<ComplexMatrix>) -> Self {
        Self::new(outcomes, Flavor::Povm)
    }

    /// Projections onto the standard basis vectors.
    pub fn coordinate(dim: usize) -> Self {
        Self::pvm(
            (0..dim)
                .map(|i| ComplexMatrix::projector(&StateVector::basis(dim, i)))
                .collect(),
        )
    }

    /// Rank-one projections onto the columns of a unitary.
    pub fn from_basis(u: &ComplexMatrix) -> Self {
        let d = u.rows();
        Self::pvm(
            (0..u.cols())
                .map(|j| {
                    let col: Vec<C64> = (0..d).map(|i| u[(i, j)]).collect();
                    ComplexMatrix::outer(&col, &col)
                })
                .collect(),
        )
    }

    /// Two-outcome PVM onto `(cos θ, sin θ)` and its orthogonal complement.
    pub fn real_rotated(theta: f64) -> Self {
        let (s, c) = theta.sin_cos();
        let u = ComplexMatrix::from_real(2, 2, &[c, -s, s, c]);
        Self::from_basis(&u)
    }

    /// Projections onto `(e₁ ± e₂)/√2`.
    pub fn horizontal() -> Self {
        Self::real_rotated(FRAC_PI_4)
    }

    pub fn len(&self) -> usize {
        self.outcomes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.outcomes.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.outcomes.first().map_or(0, |m| m.rows())
    }

    /// The same family with each element replaced by `M ⊗ I_extra`.
    pub fn kron_identity_right(&self, extra: usize) -> Self {
        let id = ComplexMatrix::identity(extra);
        Self::new(self.outcomes.iter().map(|m| m.kron(&id)).collect(), self.flavor)
    }

    /// The same family with each element replaced by `I_extra ⊗ M`.
    pub fn kron_identity_left(&self, extra: usize) -> Self {
        let id = ComplexMatrix::identity(extra);
        Self::new(self.outcomes.iter().map(|m| id.kron(m)).collect(), self.flavor)
    }
}

/// Checks positivity and completeness (and, for PVMs, self-adjointness and
/// idempotence), all at `1e-9`.
pub fn validate_measurement(m: &MeasurementFamily) -> MeasurementReport {
    let mut report = MeasurementReport::default();
    if m.outcomes.is_empty() {
        report.flag(f64::INFINITY, "measurement has no outcomes".into());
        return report;
    }
    let dim = m.dim();
    if let Some(i) = m.outcomes.iter().position(|e| e.rows() != dim || e.cols() != dim) {
        report.flag(f64::INFINITY, format!("element {} is not {dim}x{dim}", i + 1));
        return report;
    }
    if let Some(i) = m.outcomes.iter().position(|e| !e.is_finite()) {
        report.flag(f64::INFINITY, format!("element {} has non-finite entries", i + 1));
        return report;
    }

    let mut sum = ComplexMatrix::zeros(dim, dim);
    for (i, e) in m.outcomes.iter().enumerate() {
        let herm = e.hermitian_defect();
        if herm > MEASUREMENT_TOL {
            report.flag(herm, format!("element {} is not self-adjoint (defect {herm:e})", i + 1));
        }
        let min_eig = hermitian_eigen(e).values.first().copied().unwrap_or(0.0);
        if min_eig < -MEASUREMENT_TOL {
            report.flag(
                -min_eig,
                format!("element {} is not positive (min eigenvalue {min_eig:e})", i + 1),
            );
        }
        if m.flavor == Flavor::Pvm {
            let idem = (&(e * e) - e).frobenius_norm();
            if idem > MEASUREMENT_TOL {
                report.flag(idem, format!("element {} is not idempotent (defect {idem:e})", i + 1));
            }
        }
        sum = &sum + e;
    }
    let residual = (&sum - &ComplexMatrix::identity(dim)).frobenius_norm();
    if residual > MEASUREMENT_TOL {
        report.flag(residual, format!("completeness residual {residual}"));
    }
    report
}

fn require_valid(m: &MeasurementFamily) -> Result<()> {
    let report = validate_measurement(m);
    if report.is_ok() {
        Ok(())
    } else {
        Err(Error::InvalidMeasurement(report.violations.join("; ")))
    }
}

/// Born-rule outcome probabilities `⟨P_i s, s⟩`.
pub fn born_probabilities(m: &MeasurementFamily, s: &StateVector) -> Result<Vec<f64>> {
    if m.dim() != s.dim() {
        return Err(Error::DimensionMismatch(format!(
            "measurement acts on dimension {} but state has dimension {}",
            m.dim(),
            s.dim()
        )));
    }
    require_valid(m)?;
    Ok(m.outcomes.iter().map(|e| s.expectation(e).re).collect())
}

/// Post-measurement state `M s / ‖M s‖` for outcome `index`, if it has
/// non-zero probability.
pub fn collapse(m: &MeasurementFamily, s: &StateVector, index: usize) -> Option<StateVector> {
    StateVector::normalized(m.outcomes[index].mul_vec(s.amplitudes())).ok()
}

/// Result of [`naimark_dilate`].
#[derive(Debug, Clone)]
pub struct Dilation {
    /// Projective measurement `Q_a = I ⊗ |e_a⟩⟨e_a|` on `ℂ^dim ⊗ ℂ^n`.
    pub pvm: MeasurementFamily,
    /// Isometry `V = Σ_a √P_a ⊗ e_a`, shape `(dim·n) × dim`.
    pub isometry: ComplexMatrix,
}

impl Dilation {
    /// Embeds a state of the original space.
    pub fn embed(&self, s: &StateVector) -> StateVector {
        StateVector::normalized(self.isometry.mul_vec(s.amplitudes()))
            .expect("isometry preserves norm")
    }
}

/// Square-root dilation of a POVM into a PVM on a larger space.
pub fn naimark_dilate(m: &MeasurementFamily) -> Result<Dilation> {
    let povm = MeasurementFamily::povm(m.outcomes.clone());
    require_valid(&povm)?;
    let dim = m.dim();
    let n = m.len();
    let roots = m
        .outcomes
        .iter()
        .map(|e| psd_sqrt(e, MEASUREMENT_TOL))
        .collect::<Result<Vec<_>>>()?;

    let mut isometry = ComplexMatrix::zeros(dim * n, dim);
    for (a, root) in roots.iter().enumerate() {
        for i in 0..dim {
            for j in 0..dim {
                isometry[(i * n + a, j)] = root[(i, j)];
            }
        }
    }
    let id = ComplexMatrix::identity(dim);
    let pvm = MeasurementFamily::pvm(
        (0..n)
            .map(|a| id.kron(&ComplexMatrix::projector(&StateVector::basis(n, a))))
            .collect(),
    );
    Ok(Dilation { pvm, isometry })
}

/// How the two players' operators are combined.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SpecFlavor {
    /// `A^x_a ⊗ B^y_b` on `ℂ^{d_A} ⊗ ℂ^{d_B}`.
    Tensor,
    /// `A^x_a B^y_b` on one space, with all cross pairs commuting.
    Commuting,
}

/// A quantum strategy: a shared state and one measurement per question for
/// each player.
#[derive(Debug, Clone)]
pub struct QuantumStrategySpec {
    pub flavor: SpecFlavor,
    pub state: StateVector,
    pub alice: Vec<MeasurementFamily>,
    pub bob: Vec<MeasurementFamily>,
    /// `(d_A, d_B)` for tensor specs, `(d, d)` for commuting specs.
    pub dims: (usize, usize),
}

impl QuantumStrategySpec {
    pub fn tensor(
        state: StateVector,
        alice: Vec<MeasurementFamily>,
        bob: Vec<MeasurementFamily>,
    ) -> Result<Self> {
        let dims = (
            alice.first().map_or(0, |m| m.dim()),
            bob.first().map_or(0, |m| m.dim()),
        );
        let spec = QuantumStrategySpec {
            flavor: SpecFlavor::Tensor,
            state,
            alice,
            bob,
            dims,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn commuting(
        state: StateVector,
        alice: Vec<MeasurementFamily>,
        bob: Vec<MeasurementFamily>,
    ) -> Result<Self> {
        let d = state.dim();
        let spec = QuantumStrategySpec {
            flavor: SpecFlavor::Commuting,
            state,
            alice,
            bob,
            dims: (d, d),
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn k(&self) -> usize {
        self.alice.len()
    }

    pub fn n(&self) -> usize {
        self.alice.first().map_or(0, |m| m.len())
    }

    pub fn validate(&self) -> Result<()> {
        let k = self.alice.len();
        if k == 0 || self.bob.len() != k {
            return Err(Error::InvalidSpec(format!(
                "alice has {} measurements and bob has {}; both need k ≥ 1",
                self.alice.len(),
                self.bob.len()
            )));
        }
        let n = self.n();
        let (da, db) = self.dims;
        let (want_a, want_b, want_state) = match self.flavor {
            SpecFlavor::Tensor => (da, db, da * db),
            SpecFlavor::Commuting => (da, da, da),
        };
        if self.state.dim() != want_state {
            return Err(Error::InvalidSpec(format!(
                "state has dimension {} but the spec needs {want_state}",
                self.state.dim()
            )));
        }
        for (who, fams, want) in [("alice", &self.alice, want_a), ("bob", &self.bob, want_b)] {
            for (x, m) in fams.iter().enumerate() {
                if m.len() != n {
                    return Err(Error::InvalidSpec(format!(
                        "{who} measurement {} has {} outcomes, expected {n}",
                        x + 1,
                        m.len()
                    )));
                }
                if m.dim() != want {
                    return Err(Error::InvalidSpec(format!(
                        "{who} measurement {} acts on dimension {}, expected {want}",
                        x + 1,
                        m.dim()
                    )));
                }
                let report = validate_measurement(m);
                if !report.is_ok() {
                    return Err(Error::InvalidSpec(format!(
                        "{who} measurement {}: {}",
                        x + 1,
                        report.violations.join("; ")
                    )));
                }
            }
        }
        if self.flavor == SpecFlavor::Commuting {
            for (x, ma) in self.alice.iter().enumerate() {
                for (a, ea) in ma.outcomes.iter().enumerate() {
                    for (y, mb) in self.bob.iter().enumerate() {
                        for (b, eb) in mb.outcomes.iter().enumerate() {
                            let residual = ea.commutator_norm(eb);
                            if residual > MEASUREMENT_TOL {
                                return Err(Error::Commutation { x, a, y, b, residual });
                            }
                        }
                    }
                }
            }
        }
        Ok(())
    }

    /// The same correlation written as a commuting spec via `A ⊗ I`, `I ⊗ B`.
    pub fn to_commuting(&self) -> Result<QuantumStrategySpec> {
        if self.flavor == SpecFlavor::Commuting {
            return Ok(self.clone());
        }
        let (da, db) = self.dims;
        QuantumStrategySpec::commuting(
            self.state.clone(),
            self.alice.iter().map(|m| m.kron_identity_right(db)).collect(),
            self.bob.iter().map(|m| m.kron_identity_left(da)).collect(),
        )
    }
}

/// `p(a,b|x,y) = ⟨(A^x_a ⊗ B^y_b)ψ, ψ⟩` or `⟨A^x_a B^y_b ξ, ξ⟩`.
pub fn quantum_correlation(spec: &QuantumStrategySpec) -> Result<Strategy> {
    spec.validate()?;
    let (k, n) = (spec.k(), spec.n());
    let psi = spec.state.amplitudes();
    let mut p = Vec::with_capacity(k * k * n * n);
    match spec.flavor {
        SpecFlavor::Tensor => {
            let (da, db) = spec.dims;
            // ψ viewed as a d_A × d_B matrix M; then
            // ⟨(A ⊗ B)ψ, ψ⟩ = Tr(A · M Bᵀ M*).
            let m = ComplexMatrix::from_vec(da, db, psi.to_vec())?;
            let m_adj = m.adjoint();
            for x in 0..k {
                for y in 0..k {
                    for a in 0..n {
                        for b in 0..n {
                            let reduced = &(&m * &spec.bob[y].outcomes[b].transpose()) * &m_adj;
                            let z = spec.alice[x].outcomes[a].trace_product(&reduced);
                            p.push(z.re);
                        }
                    }
                }
            }
        }
        SpecFlavor::Commuting => {
            for x in 0..k {
                for y in 0..k {
                    for a in 0..n {
                        let bpsi: Vec<Vec<C64>> =
                            (0..n).map(|b| spec.bob[y].outcomes[b].mul_vec(psi)).collect();
                        let adj_a = spec.alice[x].outcomes[a].adjoint();
                        let apsi = adj_a.mul_vec(psi);
                        for bp in &bpsi {
                            // ⟨A B ξ, ξ⟩ = ⟨B ξ, A* ξ⟩
                            let z = crate::linalg::inner(&apsi, bp);
                            if z.im.abs() >= STRATEGY_TOL {
                                return Err(Error::InvalidSpec(format!(
                                    "correlation entry has imaginary part {:e}",
                                    z.im
                                )));
                            }
                            p.push(z.re);
                        }
                    }
                }
            }
        }
    }
    let s = Strategy::from_parts_unchecked(k, n, p);
    s.check(STRATEGY_TOL)?;
    Ok(s)
}

/// Scalar POVMs on `ℂ ⊗ ℂ` with `A^x_{A(x)} = 1` and all other elements 0.
pub fn embed_deterministic(
    d: &DeterministicStrategy,
    k: usize,
    n: usize,
) -> Result<QuantumStrategySpec> {
    d.check(k, n)?;
    let scalar = |answer: usize| {
        MeasurementFamily::povm(
            (0..n)
                .map(|a| ComplexMatrix::from_real(1, 1, &[if a == answer { 1.0 } else { 0.0 }]))
                .collect(),
        )
    };
    QuantumStrategySpec::tensor(
        StateVector::basis(1, 0),
        d.alice.iter().map(|&a| scalar(a)).collect(),
        d.bob.iter().map(|&b| scalar(b)).collect(),
    )
}

/// Realizes a shared-randomness mixture `Σ w_j (A_j, B_j)` as a tensor spec
/// on `ℂ^m ⊗ ℂ^m` with state `Σ √w_j e_j ⊗ e_j` and diagonal PVMs.
pub fn local_to_quantum(
    mixture: &[(f64, DeterministicStrategy)],
    k: usize,
    n: usize,
) -> Result<QuantumStrategySpec> {
    let m = mixture.len();
    if m == 0 {
        return Err(Error::InvalidParameter("empty mixture".into()));
    }
    let mut amps = vec![ZERO; m * m];
    for (j, (w, d)) in mixture.iter().enumerate() {
        d.check(k, n)?;
        if w.is_nan() || *w < 0.0 {
            return Err(Error::InvalidParameter(format!("negative weight {w}")));
        }
        amps[j * m + j] = C64::new(w.sqrt(), 0.0);
    }
    let state = StateVector::new(amps)?;
    let family = |pick: &dyn Fn(&DeterministicStrategy) -> usize| {
        MeasurementFamily::pvm(
            (0..n)
                .map(|a| {
                    let diag: Vec<C64> = mixture
                        .iter()
                        .map(|(_, d)| if pick(d) == a { ONE } else { ZERO })
                        .collect();
                    ComplexMatrix::diagonal(&diag)
                })
                .collect(),
        )
    };
    let alice = (0..k).map(|x| family(&|d| d.alice[x])).collect();
    let bob = (0..k).map(|y| family(&|d| d.bob[y])).collect();
    QuantumStrategySpec::tensor(state, alice, bob)
}

/// `(e₁⊗e₁ + e₂⊗e₂)/√2`.
pub fn epr_state() -> StateVector {
    StateVector::from_real(&[FRAC_1_SQRT_2, 0.0, 0.0, FRAC_1_SQRT_2]).expect("unit vector")
}

/// EPR state with Alice measuring at angles `0, π/4` and Bob at `π/8, −π/8`
/// in the real plane; wins CHSH with probability `cos²(π/8)`.
pub fn chsh_optimal_spec() -> QuantumStrategySpec {
    QuantumStrategySpec::tensor(
        epr_state(),
        vec![
            MeasurementFamily::real_rotated(0.0),
            MeasurementFamily::real_rotated(FRAC_PI_4),
        ],
        vec![
            MeasurementFamily::real_rotated(FRAC_PI_8),
            MeasurementFamily::real_rotated(-FRAC_PI_8),
        ],
    )
    .expect("CHSH spec is valid")
}

/// Serialized spec: amplitudes and matrices as interleaved re/im arrays.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpecFile {
    pub flavor: SpecFlavor,
    pub dims: (usize, usize),
    pub state: Vec<f64>,
    /// `[x][a]`.
    pub alice: Vec<Vec<MatrixData>>,
    /// `[y][b]`.
    pub bob: Vec<Vec<MatrixData>>,
}

impl SpecFile {
    pub fn from_spec(spec: &QuantumStrategySpec) -> Self {
        let fams = |fs: &[MeasurementFamily]| {
            fs.iter()
                .map(|m| m.outcomes.iter().map(MatrixData::from).collect())
                .collect()
        };
        SpecFile {
            flavor: spec.flavor,
            dims: spec.dims,
            state: spec.state.to_interleaved(),
            alice: fams(&spec.alice),
            bob: fams(&spec.bob),
        }
    }

    pub fn into_spec(self) -> Result<QuantumStrategySpec> {
        let fams = |fs: Vec<Vec<MatrixData>>| -> Result<Vec<MeasurementFamily>> {
            fs.iter()
                .map(|m| {
                    Ok(MeasurementFamily::povm(
                        m.iter().map(ComplexMatrix::try_from).collect::<Result<_>>()?,
                    ))
                })
                .collect()
        };
        let spec = QuantumStrategySpec {
            flavor: self.flavor,
            state: StateVector::from_interleaved(&self.state)?,
            alice: fams(self.alice)?,
            bob: fams(self.bob)?,
            dims: self.dims,
        };
        spec.validate()?;
        Ok(spec)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classical::det_to_strategy;
    use crate::game::Game;
    use crate::linalg::{random_state, random_unitary};
    use crate::rng::rng_from_seed;

    fn trine() -> MeasurementFamily {
        MeasurementFamily::povm(
            (0..3)
                .map(|i| {
                    let t = 2.0 * std::f64::consts::PI * i as f64 / 3.0;
                    let u = StateVector::from_real(&[t.cos(), t.sin()]).unwrap();
                    ComplexMatrix::projector(&u).scale_real(2.0 / 3.0)
                })
                .collect(),
        )
    }

    #[test]
    fn coordinate_pvm_is_valid() {
        assert!(validate_measurement(&MeasurementFamily::coordinate(2)).is_ok());
    }

    #[test]
    fn half_identity_is_povm_but_not_pvm() {
        let half = ComplexMatrix::identity(2).scale_real(0.5);
        let povm = MeasurementFamily::povm(vec![half.clone(), half.clone()]);
        assert!(validate_measurement(&povm).is_ok());
        let pvm = MeasurementFamily::pvm(vec![half.clone(), half]);
        let report = validate_measurement(&pvm);
        assert!(!report.is_ok());
        assert!(report.violations.iter().any(|v| v.contains("idempotent")));
    }

    #[test]
    fn overcomplete_family_reports_residual() {
        let id = ComplexMatrix::identity(1);
        let report = validate_measurement(&MeasurementFamily::povm(vec![id.clone(), id]));
        assert_eq!(report.violations, vec!["completeness residual 1".to_string()]);
        assert_eq!(report.worst, 1.0);
    }

    #[test]
    fn born_rule_horizontal_split() {
        let probs = born_probabilities(&MeasurementFamily::horizontal(), &StateVector::basis(2, 0))
            .unwrap();
        assert!((probs[0] - 0.5).abs() < 1e-15 && (probs[1] - 0.5).abs() < 1e-15);
        let probs =
            born_probabilities(&MeasurementFamily::coordinate(2), &StateVector::basis(2, 0)).unwrap();
        assert_eq!(probs, vec![1.0, 0.0]);
    }

    #[test]
    fn born_rule_dimension_mismatch() {
        let err = born_probabilities(&MeasurementFamily::coordinate(3), &StateVector::basis(2, 0));
        assert!(matches!(err, Err(Error::DimensionMismatch(_))));
    }

    #[test]
    fn born_probabilities_sum_to_one() {
        let mut rng = rng_from_seed(3);
        let s = random_state(3, &mut rng);
        let probs = born_probabilities(&trine().kron_identity_left(1), &random_state(2, &mut rng))
            .unwrap();
        assert!((probs.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        let pvm = MeasurementFamily::from_basis(&random_unitary(3, &mut rng));
        let probs = born_probabilities(&pvm, &s).unwrap();
        assert!((probs.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(probs.iter().all(|&p| p >= -1e-12));
    }

    #[test]
    fn bit_flip_on_epr() {
        let xi = crate::linalg::pauli_x().kron(&ComplexMatrix::identity(2));
        let out = xi.mul_vec(epr_state().amplitudes());
        let h = FRAC_1_SQRT_2;
        let want = [0.0, h, h, 0.0];
        for (z, w) in out.iter().zip(want) {
            assert!((z - C64::new(w, 0.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn chsh_spec_reaches_tsirelson() {
        let spec = chsh_optimal_spec();
        for m in spec.alice.iter().chain(&spec.bob) {
            assert!(validate_measurement(m).is_ok());
        }
        let v = Game::chsh().value(&quantum_correlation(&spec).unwrap()).unwrap();
        let want = FRAC_PI_8.cos().powi(2);
        assert!((v - want).abs() < 1e-9);
        assert!(v - 0.75 > 0.10);
    }

    #[test]
    fn deterministic_embedding_is_exact() {
        let d = DeterministicStrategy::new(vec![1, 0, 2], vec![2, 2, 0]);
        let spec = embed_deterministic(&d, 3, 3).unwrap();
        let p = quantum_correlation(&spec).unwrap();
        assert_eq!(p, det_to_strategy(&d, 3, 3).unwrap());
    }

    #[test]
    fn tensor_and_commuting_agree() {
        let mut rng = rng_from_seed(21);
        let alice = (0..2)
            .map(|_| MeasurementFamily::from_basis(&random_unitary(2, &mut rng)))
            .collect();
        let bob = (0..2)
            .map(|_| MeasurementFamily::from_basis(&random_unitary(2, &mut rng)))
            .collect();
        let spec = QuantumStrategySpec::tensor(random_state(4, &mut rng), alice, bob).unwrap();
        let comm = spec.to_commuting().unwrap();
        for (ma, mb) in comm.alice.iter().zip(&comm.bob) {
            for ea in &ma.outcomes {
                for eb in &mb.outcomes {
                    assert!(ea.commutator_norm(eb) < 1e-12);
                }
            }
        }
        let p1 = quantum_correlation(&spec).unwrap();
        let p2 = quantum_correlation(&comm).unwrap();
        assert!(p1.max_abs_diff(&p2) < 1e-12);
    }

    #[test]
    fn commuting_spec_rejects_noncommuting_pair() {
        let err = QuantumStrategySpec::commuting(
            StateVector::basis(2, 0),
            vec![MeasurementFamily::coordinate(2)],
            vec![MeasurementFamily::horizontal()],
        )
        .unwrap_err();
        match err {
            Error::Commutation { x: 0, a: 0, y: 0, b: 0, residual } => assert!(residual > 0.1),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn naimark_trine_preserves_statistics() {
        let m = trine();
        let dil = naimark_dilate(&m).unwrap();
        assert!(validate_measurement(&dil.pvm).is_ok());
        let vv = &dil.isometry.adjoint() * &dil.isometry;
        assert!((&vv - &ComplexMatrix::identity(2)).frobenius_norm() < 1e-9);
        let mut rng = rng_from_seed(8);
        for _ in 0..100 {
            let s = random_state(2, &mut rng);
            let before = born_probabilities(&m, &s).unwrap();
            let after = born_probabilities(&dil.pvm, &dil.embed(&s)).unwrap();
            for (b, a) in before.iter().zip(&after) {
                assert!((a - b).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn naimark_rejects_invalid_povm() {
        let id = ComplexMatrix::identity(2);
        assert!(naimark_dilate(&MeasurementFamily::povm(vec![id.clone(), id])).is_err());
    }

    #[test]
    fn spec_file_round_trip() {
        let spec = chsh_optimal_spec();
        let text = serde_json::to_string(&SpecFile::from_spec(&spec)).unwrap();
        let back: SpecFile = serde_json::from_str(&text).unwrap();
        let back = back.into_spec().unwrap();
        let p1 = quantum_correlation(&spec).unwrap();
        let p2 = quantum_correlation(&back).unwrap();
        assert!(p1.max_abs_diff(&p2) < 1e-15);
    }
}
