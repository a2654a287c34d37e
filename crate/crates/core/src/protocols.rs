//! Superdense coding over the EPR pair, and the EPR perfect-correlation
//! experiment.

use std::fmt;
use std::str::FromStr;

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{pauli_x, pauli_z, ComplexMatrix, StateVector};
use crate::quantum::{born_probabilities, collapse, epr_state, MeasurementFamily};
use crate::rng::rng_from_seed;

/// Two classical bits, each written `1` or `2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TwoBitMessage {
    first: u8,
    second: u8,
}

impl TwoBitMessage {
    pub fn new(first: u8, second: u8) -> Result<Self> {
        if !matches!(first, 1 | 2) || !matches!(second, 1 | 2) {
            return Err(Error::InvalidParameter(format!(
                "message bits must be 1 or 2, got ({first}, {second})"
            )));
        }
        Ok(TwoBitMessage { first, second })
    }

    pub fn all() -> [TwoBitMessage; 4] {
        [(1, 1), (1, 2), (2, 1), (2, 2)].map(|(i, j)| TwoBitMessage { first: i, second: j })
    }

    pub fn first(&self) -> u8 {
        self.first
    }

    pub fn second(&self) -> u8 {
        self.second
    }

    /// Position in the Bell basis ordering `ψ₁₁, ψ₁₂, ψ₂₁, ψ₂₂`.
    pub fn index(&self) -> usize {
        2 * (self.first as usize - 1) + (self.second as usize - 1)
    }

    fn from_index(i: usize) -> Self {
        TwoBitMessage {
            first: (i / 2) as u8 + 1,
            second: (i % 2) as u8 + 1,
        }
    }

    /// Alice's local operation: `I`, `X`, `Z` or `ZX`.
    pub fn local_operator(&self) -> ComplexMatrix {
        match (self.first, self.second) {
            (1, 1) => ComplexMatrix::identity(2),
            (1, 2) => pauli_x(),
            (2, 1) => pauli_z(),
            _ => &pauli_z() * &pauli_x(),
        }
    }
}

impl fmt::Display for TwoBitMessage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.first, self.second)
    }
}

impl FromStr for TwoBitMessage {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bytes = s.trim().as_bytes();
        if bytes.len() != 2 {
            return Err(Error::InvalidParameter(format!(
                "message must be two digits from {{1,2}}, got {s:?}"
            )));
        }
        let digit = |b: u8| b.wrapping_sub(b'0');
        Self::new(digit(bytes[0]), digit(bytes[1]))
    }
}

/// `ψ_ij = (O_ij ⊗ I) ψ_EPR`.
pub fn superdense_encode(msg: TwoBitMessage) -> StateVector {
    let op = msg.local_operator().kron(&ComplexMatrix::identity(2));
    StateVector::normalized(op.mul_vec(epr_state().amplitudes())).expect("unitary image")
}

/// Bell basis `ψ₁₁, ψ₁₂, ψ₂₁, ψ₂₂`.
pub fn bell_basis() -> [StateVector; 4] {
    TwoBitMessage::all().map(superdense_encode)
}

/// Rank-one projections onto the Bell basis.
pub fn bell_measurement() -> MeasurementFamily {
    MeasurementFamily::pvm(bell_basis().iter().map(ComplexMatrix::projector).collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Decoded {
    pub message: TwoBitMessage,
    /// Outcome probabilities in Bell basis order.
    pub probabilities: [f64; 4],
}

/// Measures in the Bell basis and returns the most likely message (first
/// one on ties).
pub fn superdense_decode(s: &StateVector) -> Result<Decoded> {
    let probs = born_probabilities(&bell_measurement(), s)?;
    let mut best = 0;
    for (i, &p) in probs.iter().enumerate() {
        if p > probs[best] + 1e-12 {
            best = i;
        }
    }
    Ok(Decoded {
        message: TwoBitMessage::from_index(best),
        probabilities: [probs[0], probs[1], probs[2], probs[3]],
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SpinBasis {
    /// `e₁, e₂`.
    Vertical,
    /// `(e₁ ± e₂)/√2`.
    Horizontal,
}

impl SpinBasis {
    pub fn measurement(&self) -> MeasurementFamily {
        match self {
            SpinBasis::Vertical => MeasurementFamily::coordinate(2),
            SpinBasis::Horizontal => MeasurementFamily::horizontal(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EprStatistics {
    pub trials: usize,
    pub seed: u64,
    pub basis: SpinBasis,
    /// Probability that Bob's outcome equals Alice's, from amplitudes.
    pub agreement_probability: f64,
    /// Fraction of sampled trials in which the outcomes agreed.
    pub agreement_frequency: f64,
    pub alice_counts: [usize; 2],
    pub alice_marginal: [f64; 2],
}

/// Alice measures her half of `ψ_EPR`, the state collapses, then Bob
/// measures his half in the same basis.
pub fn epr_correlation_demo(trials: usize, seed: u64, basis: SpinBasis) -> Result<EprStatistics> {
    if trials == 0 {
        return Err(Error::InvalidParameter("trials must be ≥ 1".into()));
    }
    let local = basis.measurement();
    let alice = local.kron_identity_right(2);
    let bob = local.kron_identity_left(2);
    let psi = epr_state();

    let alice_probs = born_probabilities(&alice, &psi)?;
    let mut bob_given_alice = [[0.0; 2]; 2];
    for a in 0..2 {
        if let Some(post) = collapse(&alice, &psi, a) {
            let probs = born_probabilities(&bob, &post)?;
            bob_given_alice[a] = [probs[0], probs[1]];
        }
    }
    let agreement_probability: f64 = (0..2).map(|a| alice_probs[a] * bob_given_alice[a][a]).sum();

    let mut rng = rng_from_seed(seed);
    let mut alice_counts = [0usize; 2];
    let mut agreements = 0usize;
    let draw = |probs: &[f64], u: f64| usize::from(u >= probs[0]);
    for _ in 0..trials {
        let a = draw(&alice_probs, rng.random::<f64>());
        alice_counts[a] += 1;
        let b = draw(&bob_given_alice[a], rng.random::<f64>());
        if a == b {
            agreements += 1;
        }
    }
    Ok(EprStatistics {
        trials,
        seed,
        basis,
        agreement_probability,
        agreement_frequency: agreements as f64 / trials as f64,
        alice_counts,
        alice_marginal: alice_counts.map(|c| c as f64 / trials as f64),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{random_state, random_unitary, C64};
    use crate::rng::rng_from_seed;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn assert_state(s: &StateVector, want: [f64; 4]) {
        for (z, w) in s.amplitudes().iter().zip(want) {
            assert!((z - C64::new(w, 0.0)).norm() < 1e-15, "{s:?} vs {want:?}");
        }
    }

    #[test]
    fn encodings_match_bell_table() {
        let h = FRAC_1_SQRT_2;
        let m = |s: &str| s.parse::<TwoBitMessage>().unwrap();
        assert_state(&superdense_encode(m("11")), [h, 0.0, 0.0, h]);
        assert_state(&superdense_encode(m("12")), [0.0, h, h, 0.0]);
        assert_state(&superdense_encode(m("21")), [h, 0.0, 0.0, -h]);
        assert_state(&superdense_encode(m("22")), [0.0, h, -h, 0.0]);
    }

    #[test]
    fn bell_basis_is_orthonormal() {
        let basis = bell_basis();
        for (i, u) in basis.iter().enumerate() {
            for (j, v) in basis.iter().enumerate() {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((u.inner(v) - C64::new(want, 0.0)).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn decode_inverts_encode() {
        for m in TwoBitMessage::all() {
            let d = superdense_decode(&superdense_encode(m)).unwrap();
            assert_eq!(d.message, m);
            assert!((d.probabilities[m.index()] - 1.0).abs() < 1e-12);
        }
        assert_eq!(superdense_decode(&epr_state()).unwrap().message.to_string(), "11");
    }

    #[test]
    fn superposition_splits_evenly() {
        let [a, b, _, _] = bell_basis();
        let mix: Vec<C64> = a
            .amplitudes()
            .iter()
            .zip(b.amplitudes())
            .map(|(x, y)| (x + y) * FRAC_1_SQRT_2)
            .collect();
        let d = superdense_decode(&StateVector::new(mix).unwrap()).unwrap();
        let want = [0.5, 0.5, 0.0, 0.0];
        for (p, w) in d.probabilities.iter().zip(want) {
            assert!((p - w).abs() < 1e-12);
        }
    }

    #[test]
    fn bad_messages_rejected() {
        assert!("13".parse::<TwoBitMessage>().is_err());
        assert!("1".parse::<TwoBitMessage>().is_err());
        assert!(TwoBitMessage::new(0, 1).is_err());
    }

    #[test]
    fn epr_outcomes_always_agree() {
        for basis in [SpinBasis::Vertical, SpinBasis::Horizontal] {
            let stats = epr_correlation_demo(10_000, 42, basis).unwrap();
            assert_eq!(stats.agreement_frequency, 1.0);
            assert!((stats.agreement_probability - 1.0).abs() < 1e-12);
            assert!((stats.alice_marginal[0] - 0.5).abs() < 0.02);
        }
    }

    #[test]
    fn repeated_measurement_reproduces_outcome() {
        let mut rng = rng_from_seed(17);
        for _ in 0..50 {
            let s = random_state(3, &mut rng);
            let m = MeasurementFamily::from_basis(&random_unitary(3, &mut rng));
            let probs = born_probabilities(&m, &s).unwrap();
            for (i, &p) in probs.iter().enumerate() {
                if p < 1e-9 {
                    continue;
                }
                let post = collapse(&m, &s, i).unwrap();
                let again = born_probabilities(&m, &post).unwrap();
                assert!((again[i] - 1.0).abs() < 1e-12);
            }
        }
    }
}
