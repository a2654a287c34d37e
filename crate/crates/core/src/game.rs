//! Nonlocal games `(π, D)`, correlation tensors `p(a,b|x,y)`, and the value
//! functional `Σ π(x,y) Σ D(x,y,a,b) p(a,b|x,y)`.
//!
//! Questions and answers are 0-based in memory and 1-based in files and in
//! user-facing messages.

use std::fmt;

use rand::Rng as _;
use rand_distr::Exp1;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::rng_from_seed;

/// Tolerance for distributions read from files.
pub const DISTRIBUTION_TOL: f64 = 1e-12;
/// Tolerance for computed correlation tensors.
pub const STRATEGY_TOL: f64 = 1e-9;

/// A two-player nonlocal game with `k` questions and `n` answers per player.
#[derive(Debug, Clone, PartialEq)]
pub struct Game {
    k: usize,
    n: usize,
    /// `k*k`, indexed `[x][y]`.
    pi: Vec<f64>,
    /// `k*k*n*n`, indexed `[x][y][a][b]`; entries are 0 or 1 in a valid game.
    predicate: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    ZeroQuestions,
    ZeroAnswers,
    Shape { field: &'static str, expected: usize, found: usize },
    NegativeProbability { x: usize, y: usize, value: f64 },
    NonFiniteProbability { x: usize, y: usize },
    Mass(f64),
    NonBoolean { x: usize, y: usize, a: usize, b: usize, value: f64 },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::ZeroQuestions => write!(f, "k must be ≥ 1"),
            Violation::ZeroAnswers => write!(f, "n must be ≥ 1"),
            Violation::Shape { field, expected, found } => {
                write!(f, "{field} has {found} entries, expected {expected}")
            }
            Violation::NegativeProbability { x, y, value } => {
                write!(f, "negative probability pi[{}][{}] = {value}", x + 1, y + 1)
            }
            Violation::NonFiniteProbability { x, y } => {
                write!(f, "non-finite probability pi[{}][{}]", x + 1, y + 1)
            }
            Violation::Mass(m) => write!(f, "distribution mass {m} ≠ 1"),
            Violation::NonBoolean { x, y, a, b, value } => write!(
                f,
                "non-boolean predicate entry D[{}][{}][{}][{}] = {value}",
                x + 1,
                y + 1,
                a + 1,
                b + 1
            ),
        }
    }
}

/// Result of [`Game::validate`]: empty means valid.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn messages(&self) -> Vec<String> {
        self.violations.iter().map(|v| v.to_string()).collect()
    }
}

impl Game {
    /// Wraps raw data without checking it. Use [`Game::validate`] or
    /// [`Game::new`] before computing with it.
    pub fn from_parts_unchecked(k: usize, n: usize, pi: Vec<f64>, predicate: Vec<f64>) -> Self {
        Game { k, n, pi, predicate }
    }

    pub fn new(k: usize, n: usize, pi: Vec<f64>, predicate: Vec<f64>) -> Result<Self> {
        let game = Self::from_parts_unchecked(k, n, pi, predicate);
        game.validate_strict()?;
        Ok(game)
    }

    /// Builds a game from a winning predicate closure over 0-based indices.
    pub fn from_predicate(
        k: usize,
        n: usize,
        pi: Vec<f64>,
        wins: impl Fn(usize, usize, usize, usize) -> bool,
    ) -> Result<Self> {
        let mut predicate = vec![0.0; k * k * n * n];
        for x in 0..k {
            for y in 0..k {
                for a in 0..n {
                    for b in 0..n {
                        if wins(x, y, a, b) {
                            predicate[((x * k + y) * n + a) * n + b] = 1.0;
                        }
                    }
                }
            }
        }
        Self::new(k, n, pi, predicate)
    }

    /// The CHSH game: uniform questions on `[2]×[2]`; answers must agree
    /// unless both questions are the second one, in which case they must
    /// differ.
    pub fn chsh() -> Self {
        Self::from_predicate(2, 2, vec![0.25; 4], |x, y, a, b| {
            if x == 1 && y == 1 {
                a != b
            } else {
                a == b
            }
        })
        .expect("CHSH game is valid")
    }

    /// A game every answer pair wins.
    pub fn always_win(k: usize, n: usize) -> Self {
        let pi = vec![1.0 / (k * k) as f64; k * k];
        Self::from_predicate(k, n, pi, |_, _, _, _| true).expect("constant game is valid")
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn pi(&self, x: usize, y: usize) -> f64 {
        self.pi[x * self.k + y]
    }

    #[inline]
    pub fn predicate(&self, x: usize, y: usize, a: usize, b: usize) -> f64 {
        self.predicate[((x * self.k + y) * self.n + a) * self.n + b]
    }

    #[inline]
    pub fn wins(&self, x: usize, y: usize, a: usize, b: usize) -> bool {
        self.predicate(x, y, a, b) == 1.0
    }

    pub fn validate(&self) -> ValidationReport {
        let mut violations = Vec::new();
        if self.k == 0 {
            violations.push(Violation::ZeroQuestions);
        }
        if self.n == 0 {
            violations.push(Violation::ZeroAnswers);
        }
        let (k, n) = (self.k, self.n);
        if self.pi.len() != k * k {
            violations.push(Violation::Shape {
                field: "pi",
                expected: k * k,
                found: self.pi.len(),
            });
        }
        if self.predicate.len() != k * k * n * n {
            violations.push(Violation::Shape {
                field: "predicate",
                expected: k * k * n * n,
                found: self.predicate.len(),
            });
        }
        if !violations.is_empty() {
            return ValidationReport { violations };
        }

        let mut mass = 0.0;
        for x in 0..k {
            for y in 0..k {
                let p = self.pi(x, y);
                if !p.is_finite() {
                    violations.push(Violation::NonFiniteProbability { x, y });
                } else if p < 0.0 {
                    violations.push(Violation::NegativeProbability { x, y, value: p });
                }
                mass += p;
            }
        }
        if mass.is_finite() && (mass - 1.0).abs() > DISTRIBUTION_TOL {
            violations.push(Violation::Mass(mass));
        }
        for x in 0..k {
            for y in 0..k {
                for a in 0..n {
                    for b in 0..n {
                        let value = self.predicate(x, y, a, b);
                        if value != 0.0 && value != 1.0 {
                            violations.push(Violation::NonBoolean { x, y, a, b, value });
                        }
                    }
                }
            }
        }
        ValidationReport { violations }
    }

    fn validate_strict(&self) -> Result<()> {
        let report = self.validate();
        if report.is_ok() {
            Ok(())
        } else {
            Err(Error::InvalidGame(report.messages().join("; ")))
        }
    }

    /// `val(g, s)`, summed exactly as the definition reads.
    pub fn value(&self, s: &Strategy) -> Result<f64> {
        if s.k != self.k || s.n != self.n {
            return Err(Error::DimensionMismatch(format!(
                "game has (k, n) = ({}, {}) but strategy has ({}, {})",
                self.k, self.n, s.k, s.n
            )));
        }
        let mut total = 0.0;
        for x in 0..self.k {
            for y in 0..self.k {
                let mut inner = 0.0;
                for a in 0..self.n {
                    for b in 0..self.n {
                        inner += self.predicate(x, y, a, b) * s.get(x, y, a, b);
                    }
                }
                total += self.pi(x, y) * inner;
            }
        }
        Ok(total)
    }

    /// Applies the answer permutation `perm` (0-based) to both players'
    /// answer slots of the predicate.
    pub fn relabel_answers(&self, perm: &[usize]) -> Game {
        assert_eq!(perm.len(), self.n);
        let mut predicate = vec![0.0; self.predicate.len()];
        let (k, n) = (self.k, self.n);
        for x in 0..k {
            for y in 0..k {
                for a in 0..n {
                    for b in 0..n {
                        predicate[((x * k + y) * n + perm[a]) * n + perm[b]] =
                            self.predicate(x, y, a, b);
                    }
                }
            }
        }
        Game { predicate, ..self.clone() }
    }

    /// Returns a copy with `D(x,y,a,b)` set to `value`.
    pub fn with_predicate_entry(&self, x: usize, y: usize, a: usize, b: usize, value: f64) -> Game {
        let mut g = self.clone();
        let idx = ((x * self.k + y) * self.n + a) * self.n + b;
        g.predicate[idx] = value;
        g
    }
}

/// `π` drawn from a flat Dirichlet, each `D` entry a fair coin; deterministic
/// in `seed`.
pub fn random_game(k: usize, n: usize, seed: u64) -> Result<Game> {
    if k == 0 || n == 0 {
        return Err(Error::InvalidParameter("k and n must be ≥ 1".into()));
    }
    let mut rng = rng_from_seed(seed);
    let weights: Vec<f64> = (0..k * k).map(|_| rng.sample::<f64, _>(Exp1)).collect();
    let total: f64 = weights.iter().sum();
    let mut pi: Vec<f64> = weights.iter().map(|w| w / total).collect();
    // push the rounding residue into the largest entry
    let residue = 1.0 - pi.iter().sum::<f64>();
    let imax = (0..pi.len())
        .max_by(|&i, &j| pi[i].total_cmp(&pi[j]))
        .unwrap_or(0);
    pi[imax] += residue;
    let predicate = (0..k * k * n * n)
        .map(|_| if rng.random::<bool>() { 1.0 } else { 0.0 })
        .collect();
    Game::new(k, n, pi, predicate)
}

/// A conditional distribution `p(a,b|x,y)` stored row-major `[x][y][a][b]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Strategy {
    k: usize,
    n: usize,
    p: Vec<f64>,
}

impl Strategy {
    pub fn from_parts_unchecked(k: usize, n: usize, p: Vec<f64>) -> Self {
        Strategy { k, n, p }
    }

    /// Checks shape, range `[0,1]` and per-question normalization at `1e-9`.
    pub fn new(k: usize, n: usize, p: Vec<f64>) -> Result<Self> {
        let s = Self::from_parts_unchecked(k, n, p);
        s.check(STRATEGY_TOL)?;
        Ok(s)
    }

    pub fn from_fn(k: usize, n: usize, f: impl Fn(usize, usize, usize, usize) -> f64) -> Self {
        let mut p = Vec::with_capacity(k * k * n * n);
        for x in 0..k {
            for y in 0..k {
                for a in 0..n {
                    for b in 0..n {
                        p.push(f(x, y, a, b));
                    }
                }
            }
        }
        Strategy { k, n, p }
    }

    pub fn uniform(k: usize, n: usize) -> Self {
        let w = 1.0 / (n * n) as f64;
        Self::from_fn(k, n, |_, _, _, _| w)
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize, a: usize, b: usize) -> f64 {
        self.p[((x * self.k + y) * self.n + a) * self.n + b]
    }

    pub fn entries(&self) -> &[f64] {
        &self.p
    }

    pub fn check(&self, tol: f64) -> Result<()> {
        let (k, n) = (self.k, self.n);
        if k == 0 || n == 0 {
            return Err(Error::InvalidStrategy("k and n must be ≥ 1".into()));
        }
        if self.p.len() != k * k * n * n {
            return Err(Error::InvalidStrategy(format!(
                "tensor has {} entries, expected {}",
                self.p.len(),
                k * k * n * n
            )));
        }
        for x in 0..k {
            for y in 0..k {
                let mut sum = 0.0;
                for a in 0..n {
                    for b in 0..n {
                        let v = self.get(x, y, a, b);
                        if !v.is_finite() || v < -tol || v > 1.0 + tol {
                            return Err(Error::InvalidStrategy(format!(
                                "p({},{}|{},{}) = {v} outside [0,1]",
                                a + 1,
                                b + 1,
                                x + 1,
                                y + 1
                            )));
                        }
                        sum += v;
                    }
                }
                if (sum - 1.0).abs() > tol {
                    return Err(Error::InvalidStrategy(format!(
                        "row (x={}, y={}) sums to {sum}",
                        x + 1,
                        y + 1
                    )));
                }
            }
        }
        Ok(())
    }

    /// `λ·self + (1−λ)·other`.
    pub fn mix(&self, other: &Strategy, lambda: f64) -> Result<Strategy> {
        if self.k != other.k || self.n != other.n {
            return Err(Error::DimensionMismatch("mixing strategies of different shape".into()));
        }
        Ok(Strategy {
            k: self.k,
            n: self.n,
            p: self
                .p
                .iter()
                .zip(&other.p)
                .map(|(a, b)| lambda * a + (1.0 - lambda) * b)
                .collect(),
        })
    }

    /// Largest entrywise difference.
    pub fn max_abs_diff(&self, other: &Strategy) -> f64 {
        assert_eq!(self.p.len(), other.p.len());
        self.p
            .iter()
            .zip(&other.p)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// `p(a,b|x,y)` as nested `[x][y][a][b]` arrays.
    pub fn to_nested(&self) -> Vec<Vec<Vec<Vec<f64>>>> {
        (0..self.k)
            .map(|x| {
                (0..self.k)
                    .map(|y| {
                        (0..self.n)
                            .map(|a| (0..self.n).map(|b| self.get(x, y, a, b)).collect())
                            .collect()
                    })
                    .collect()
            })
            .collect()
    }
}

/// On-disk game: `wins` lists the 1-based `[x, y, a, b]` tuples with `D = 1`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GameFile {
    pub k: usize,
    pub n: usize,
    pub pi: Vec<Vec<f64>>,
    pub wins: Vec<[usize; 4]>,
}

impl GameFile {
    pub fn into_game(self) -> Result<Game> {
        let GameFile { k, n, pi, wins } = self;
        if k == 0 {
            return Err(field_error("k", "k must be ≥ 1"));
        }
        if n == 0 {
            return Err(field_error("n", "n must be ≥ 1"));
        }
        if pi.len() != k || pi.iter().any(|row| row.len() != k) {
            return Err(field_error("pi", format!("pi must be a {k}x{k} matrix")));
        }
        let mut predicate = vec![0.0; k * k * n * n];
        for (i, w) in wins.iter().enumerate() {
            let [x, y, a, b] = *w;
            if !(1..=k).contains(&x) || !(1..=k).contains(&y) || !(1..=n).contains(&a) || !(1..=n).contains(&b)
            {
                return Err(field_error(
                    &format!("wins[{i}]"),
                    format!("tuple {w:?} out of range for k={k}, n={n}"),
                ));
            }
            predicate[(((x - 1) * k + (y - 1)) * n + (a - 1)) * n + (b - 1)] = 1.0;
        }
        let pi = pi.into_iter().flatten().collect();
        Game::new(k, n, pi, predicate)
    }

    pub fn from_game(g: &Game) -> Self {
        let (k, n) = (g.k, g.n);
        let pi = (0..k).map(|x| (0..k).map(|y| g.pi(x, y)).collect()).collect();
        let mut wins = Vec::new();
        for x in 0..k {
            for y in 0..k {
                for a in 0..n {
                    for b in 0..n {
                        if g.wins(x, y, a, b) {
                            wins.push([x + 1, y + 1, a + 1, b + 1]);
                        }
                    }
                }
            }
        }
        GameFile { k, n, pi, wins }
    }
}

fn field_error(field: &str, message: impl Into<String>) -> Error {
    Error::Field {
        field: field.to_string(),
        message: message.into(),
    }
}

/// Parses and validates a game from its JSON text.
pub fn load_game(text: &str) -> Result<Game> {
    let file: GameFile = serde_json::from_str(text)?;
    file.into_game()
}

pub fn save_game(g: &Game) -> String {
    serde_json::to_string_pretty(&GameFile::from_game(g)).expect("game serializes")
}

/// On-disk strategy: `p[x][y][a][b]` as nested arrays (0-based positions).
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StrategyFile {
    pub k: usize,
    pub n: usize,
    pub p: Vec<Vec<Vec<Vec<f64>>>>,
}

pub fn load_strategy(text: &str) -> Result<Strategy> {
    let file: StrategyFile = serde_json::from_str(text)?;
    let (k, n) = (file.k, file.n);
    let shape_ok = file.p.len() == k
        && file.p.iter().all(|row| {
            row.len() == k && row.iter().all(|m| m.len() == n && m.iter().all(|r| r.len() == n))
        });
    if !shape_ok {
        return Err(field_error("p", format!("p must have shape [{k}][{k}][{n}][{n}]")));
    }
    let p = file.p.into_iter().flatten().flatten().flatten().collect();
    Strategy::new(k, n, p)
}

pub fn save_strategy(s: &Strategy) -> String {
    serde_json::to_string_pretty(&StrategyFile {
        k: s.k,
        n: s.n,
        p: s.to_nested(),
    })
    .expect("strategy serializes")
}

pub const CHSH_JSON: &str = include_str!("../data/chsh.json");
pub const UNIFORM_STRATEGY_JSON: &str = include_str!("../data/uniform.json");

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_chsh_files() {
        let g = load_game(CHSH_JSON).unwrap();
        assert_eq!(g, Game::chsh());
        let s = load_strategy(UNIFORM_STRATEGY_JSON).unwrap();
        assert_eq!(g.value(&s).unwrap(), 0.5);
    }

    fn det(k: usize, n: usize, a: &[usize], b: &[usize]) -> Strategy {
        Strategy::from_fn(k, n, |x, y, i, j| if a[x] == i && b[y] == j { 1.0 } else { 0.0 })
    }

    #[test]
    fn chsh_validates() {
        assert!(Game::chsh().validate().is_ok());
    }

    #[test]
    fn half_mass_is_reported() {
        let g = Game::from_parts_unchecked(2, 2, vec![0.125; 4], vec![0.0; 16]);
        let report = g.validate();
        assert_eq!(report.violations, vec![Violation::Mass(0.5)]);
        assert_eq!(report.messages(), vec!["distribution mass 0.5 ≠ 1"]);
    }

    #[test]
    fn non_boolean_entry_is_reported() {
        let g = Game::chsh().with_predicate_entry(0, 0, 0, 0, 0.7);
        let msgs = g.validate().messages();
        assert_eq!(msgs.len(), 1);
        assert!(msgs[0].starts_with("non-boolean predicate entry D[1][1][1][1]"));
    }

    #[test]
    fn chsh_constant_strategy_is_three_quarters() {
        let v = Game::chsh().value(&det(2, 2, &[0, 0], &[0, 0])).unwrap();
        assert_eq!(v, 0.75);
    }

    #[test]
    fn chsh_uniform_strategy_is_half() {
        let v = Game::chsh().value(&Strategy::uniform(2, 2)).unwrap();
        assert_eq!(v, 0.5);
    }

    #[test]
    fn always_win_has_value_one() {
        let g = Game::always_win(3, 2);
        let v = g.value(&Strategy::uniform(3, 2)).unwrap();
        assert!((v - 1.0).abs() < 1e-12);
    }

    #[test]
    fn value_rejects_shape_mismatch() {
        let err = Game::chsh().value(&Strategy::uniform(3, 2)).unwrap_err();
        assert!(matches!(err, Error::DimensionMismatch(_)));
    }

    #[test]
    fn zero_questions_rejected_on_load() {
        let err = load_game(r#"{"k": 0, "n": 2, "pi": [], "wins": []}"#).unwrap_err();
        assert_eq!(err.to_string(), "field `k`: k must be ≥ 1");
    }

    #[test]
    fn parse_error_carries_position() {
        let err = load_game("{\n  \"k\": 2,\n  \"n\": }").unwrap_err();
        match err {
            Error::Parse { line, .. } => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn out_of_range_win_tuple_rejected() {
        let text = r#"{"k": 2, "n": 2, "pi": [[0.25,0.25],[0.25,0.25]], "wins": [[3,1,1,1]]}"#;
        assert!(matches!(load_game(text), Err(Error::Field { .. })));
    }

    #[test]
    fn random_game_is_deterministic_and_valid() {
        let a = random_game(2, 2, 7).unwrap();
        let b = random_game(2, 2, 7).unwrap();
        assert_eq!(a, b);
        assert!(a.validate().is_ok());
        assert_ne!(a, random_game(2, 2, 8).unwrap());
    }

    #[test]
    fn strategy_file_round_trip() {
        let s = det(2, 3, &[0, 2], &[1, 1]);
        let back = load_strategy(&save_strategy(&s)).unwrap();
        assert_eq!(back, s);
    }

    #[test]
    fn strategy_rejects_unnormalized_row() {
        let mut p = Strategy::uniform(2, 2).entries().to_vec();
        p[0] = 0.5;
        assert!(Strategy::new(2, 2, p).is_err());
    }
}
