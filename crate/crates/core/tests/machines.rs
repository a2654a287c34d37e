use nlv_core::tm::{copier, looper, Move, NdOutcome, Ndtm, RunOutcome, Symbol, TuringMachine};
use proptest::prelude::*;

fn to_symbols(bits: &[bool]) -> Vec<Symbol> {
    bits.iter().map(|&b| if b { Symbol::One } else { Symbol::Zero }).collect()
}

fn to_string(bits: &[bool]) -> String {
    bits.iter().map(|&b| if b { '1' } else { '0' }).collect()
}

/// Writes the input backwards onto the output tape: walk to the end of the
/// input, then copy while moving the input head left.
fn reverser() -> TuringMachine {
    use Move::{Left as L, Right as R, Stay as S};
    TuringMachine::from_fn(&["start", "seek", "copy", "halt"], "start", "halt", |q, [s1, s2, s3]| {
        match (q, s1) {
            ("start", _) => ("seek", s2, s3, [R, S, R]),
            ("seek", Symbol::Zero | Symbol::One) => ("seek", s2, s3, [R, S, S]),
            ("seek", _) => ("copy", s2, s3, [L, S, S]),
            ("copy", Symbol::Zero | Symbol::One) => ("copy", s2, s1, [L, S, R]),
            _ => ("halt", s2, s3, [S, S, S]),
        }
    })
    .unwrap()
}

/// Accepts iff some guessed position holds a 1.
fn has_one() -> Ndtm {
    use Move::{Right as R, Stay as S};
    Ndtm::from_fn(&["start", "scan", "accept", "reject"], "start", "accept", "reject", |which, q, [s1, s2, s3]| {
        match (q, s1, which) {
            ("start", _, _) => ("scan", s2, s3, [R, S, S]),
            ("scan", Symbol::One, 1) => ("accept", s2, s3, [S, S, S]),
            ("scan", Symbol::Zero | Symbol::One, _) => ("scan", s2, s3, [R, S, S]),
            _ => ("reject", s2, s3, [S, S, S]),
        }
    })
    .unwrap()
}

#[test]
fn reverser_reverses() {
    let m = reverser();
    match m.run(&to_symbols(&[true, true, false]), 100).unwrap() {
        RunOutcome::Halted { output, .. } => assert_eq!(output, "011"),
        other => panic!("{other:?}"),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn copier_output_equals_input(bits in proptest::collection::vec(any::<bool>(), 0..24)) {
        let out = copier().run(&to_symbols(&bits), 10_000).unwrap();
        prop_assert_eq!(out, RunOutcome::Halted { output: to_string(&bits), steps: 2 * bits.len() as u64 + 3 });
    }

    #[test]
    fn runs_are_deterministic(bits in proptest::collection::vec(any::<bool>(), 0..16)) {
        let m = reverser();
        let (o1, t1) = m.run_traced(&to_symbols(&bits), 1000).unwrap();
        let (o2, t2) = m.run_traced(&to_symbols(&bits), 1000).unwrap();
        prop_assert_eq!(o1, o2);
        prop_assert_eq!(t1.steps, t2.steps);
    }

    #[test]
    fn input_tape_is_read_only(bits in proptest::collection::vec(any::<bool>(), 0..16)) {
        let m = reverser();
        let input = to_symbols(&bits);
        let (_, trace) = m.run_traced(&input, 1000).unwrap();
        for c in &trace.steps {
            prop_assert_eq!(c.tapes[0][0], Symbol::Start);
            prop_assert_eq!(&c.tapes[0][1..=input.len()], &input[..]);
            prop_assert!(c.tapes[0][input.len() + 1..].iter().all(|&s| s == Symbol::Blank));
        }
    }

    #[test]
    fn halting_is_monotone_in_budget(bits in proptest::collection::vec(any::<bool>(), 0..16), b1 in 1u64..60, extra in 0u64..60) {
        let m = reverser();
        let input = to_symbols(&bits);
        let (short, trace) = m.run_traced(&input, b1).unwrap();
        let long = m.run(&input, b1 + extra).unwrap();
        match short {
            RunOutcome::Halted { steps, .. } => {
                prop_assert_eq!(steps as usize, trace.steps.len());
                prop_assert_eq!(&long, &short);
            }
            RunOutcome::BudgetExceeded { steps } => prop_assert_eq!(steps, b1),
        }
    }

    #[test]
    fn nondeterministic_search_finds_ones(bits in proptest::collection::vec(any::<bool>(), 0..8)) {
        let out = has_one().accepts(&to_symbols(&bits), 12).unwrap();
        match bits.iter().position(|&b| b) {
            Some(i) => prop_assert_eq!(out, NdOutcome::Accept { depth: i as u64 + 2 }),
            None => prop_assert_eq!(out, NdOutcome::Reject),
        }
    }
}

#[test]
fn looper_never_halts() {
    for budget in [1, 10, 10_000] {
        assert_eq!(looper().run(&[], budget).unwrap(), RunOutcome::BudgetExceeded { steps: budget });
    }
}
