//! Three-tape Turing machines over `{0, 1, □, △}`: a read-only input tape,
//! a work tape and an output tape, each one-way infinite with `△` in cell 0.
//!
//! A transition `δ(q, s₁, s₂, s₃) = (q', s₂', s₃', I₁, I₂, I₃)` writes `s₂'`
//! and `s₃'` under the work and output heads, moves the three heads, then
//! enters `q'`. A head told to move left from cell 0 stays put. On halting,
//! the output is the longest blank-free string starting at cell 1 of the
//! output tape.
//!
//! Machine files are JSON with `δ` given as 10-tuples of strings:
//!
//! ```json
//! {
//!   "states": ["start", "halt"],
//!   "start": "start",
//!   "halt": "halt",
//!   "delta": [["start", ">", ">", ">", "halt", ">", ">", "S", "S", "S"], ...]
//! }
//! ```
//!
//! Symbols are written `0`, `1`, `_` (blank) and `>` (start symbol); moves
//! are `L`, `S`, `R`. Every non-halting state needs an entry for all 64
//! symbol triples.

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Symbol {
    Zero,
    One,
    Blank,
    Start,
}

impl Symbol {
    pub const ALL: [Symbol; 4] = [Symbol::Zero, Symbol::One, Symbol::Blank, Symbol::Start];

    fn code(self) -> usize {
        self as usize
    }

    pub fn as_char(self) -> char {
        match self {
            Symbol::Zero => '0',
            Symbol::One => '1',
            Symbol::Blank => '_',
            Symbol::Start => '>',
        }
    }

    pub fn from_char(c: char) -> Option<Symbol> {
        match c {
            '0' => Some(Symbol::Zero),
            '1' => Some(Symbol::One),
            '_' => Some(Symbol::Blank),
            '>' => Some(Symbol::Start),
            _ => None,
        }
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.as_char())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Move {
    Left,
    Stay,
    Right,
}

impl Move {
    pub fn as_char(self) -> char {
        match self {
            Move::Left => 'L',
            Move::Stay => 'S',
            Move::Right => 'R',
        }
    }

    pub fn from_char(c: char) -> Option<Move> {
        match c {
            'L' => Some(Move::Left),
            'S' => Some(Move::Stay),
            'R' => Some(Move::Right),
            _ => None,
        }
    }
}

/// Right-hand side of one `δ` entry. States are indices into the machine's
/// state list.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Transition {
    pub next: usize,
    pub write_work: Symbol,
    pub write_output: Symbol,
    pub moves: [Move; 3],
}

/// Dense transition table over `Q × Σ³`; entries for halting states are
/// never consulted and may be absent.
#[derive(Debug, Clone, PartialEq)]
struct Table {
    entries: Vec<Option<Transition>>,
}

impl Table {
    fn slot(state: usize, read: [Symbol; 3]) -> usize {
        state * 64 + read[0].code() * 16 + read[1].code() * 4 + read[2].code()
    }

    fn get(&self, state: usize, read: [Symbol; 3]) -> Option<&Transition> {
        self.entries[Self::slot(state, read)].as_ref()
    }
}

fn all_reads() -> impl Iterator<Item = [Symbol; 3]> {
    Symbol::ALL.into_iter().flat_map(|a| {
        Symbol::ALL
            .into_iter()
            .flat_map(move |b| Symbol::ALL.into_iter().map(move |c| [a, b, c]))
    })
}

/// A deterministic 3-tape machine `(Q, δ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TuringMachine {
    states: Vec<String>,
    start: usize,
    halt: usize,
    table: Table,
}

/// State, tape contents and head positions. Tapes are materialized lazily:
/// a cell exists once a head has visited it.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Configuration {
    pub state: usize,
    pub tapes: [Vec<Symbol>; 3],
    pub heads: [usize; 3],
}

impl Configuration {
    /// `△ z □ □ …` on the input tape, `△ □ □ …` on the other two.
    pub fn initial(start: usize, input: &[Symbol]) -> Self {
        let mut tape = vec![Symbol::Start];
        tape.extend_from_slice(input);
        Configuration {
            state: start,
            tapes: [tape, vec![Symbol::Start], vec![Symbol::Start]],
            heads: [0, 0, 0],
        }
    }

    pub fn read(&self) -> [Symbol; 3] {
        [0, 1, 2].map(|t| self.tapes[t][self.heads[t]])
    }

    /// Applies one transition in place.
    fn apply(&mut self, t: &Transition) {
        let h = self.heads;
        self.tapes[1][h[1]] = t.write_work;
        self.tapes[2][h[2]] = t.write_output;
        for (tape, mv) in t.moves.iter().enumerate() {
            let head = &mut self.heads[tape];
            match mv {
                Move::Left => *head = head.saturating_sub(1),
                Move::Stay => {}
                Move::Right => {
                    *head += 1;
                    if *head == self.tapes[tape].len() {
                        self.tapes[tape].push(Symbol::Blank);
                    }
                }
            }
        }
        self.state = t.next;
    }

    /// Longest blank-free string starting at cell 1 of the output tape.
    pub fn output(&self) -> String {
        self.tapes[2]
            .iter()
            .skip(1)
            .take_while(|&&s| s != Symbol::Blank)
            .map(|s| s.as_char())
            .collect()
    }
}

/// Tape rendering with the scanned cell in brackets, e.g. `>1[0]1`.
fn render_tape(tape: &[Symbol], head: usize) -> String {
    let mut out = String::with_capacity(tape.len() + 2);
    for (i, s) in tape.iter().enumerate() {
        if i == head {
            out.push('[');
            out.push(s.as_char());
            out.push(']');
        } else {
            out.push(s.as_char());
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum RunOutcome {
    Halted { output: String, steps: u64 },
    BudgetExceeded { steps: u64 },
}

/// Configurations visited by a run; `steps[i]` is the configuration after
/// step `i + 1`.
#[derive(Debug, Clone)]
pub struct Trace {
    pub initial: Configuration,
    pub steps: Vec<Configuration>,
}

pub fn parse_input(bits: &str) -> Result<Vec<Symbol>> {
    bits.chars()
        .map(|c| match c {
            '0' => Ok(Symbol::Zero),
            '1' => Ok(Symbol::One),
            other => Err(Error::InvalidParameter(format!(
                "input must be a binary string, found {other:?}"
            ))),
        })
        .collect()
}

impl TuringMachine {
    /// Builds a machine from a rule closure evaluated on every non-halting
    /// `(state, s₁, s₂, s₃)`.
    pub fn from_fn(
        states: &[&str],
        start: &str,
        halt: &str,
        rule: impl Fn(&str, [Symbol; 3]) -> (&'static str, Symbol, Symbol, [Move; 3]),
    ) -> Result<Self> {
        let names: Vec<String> = states.iter().map(|s| s.to_string()).collect();
        let index = state_index(&names)?;
        let lookup = |name: &str| {
            index
                .get(name)
                .copied()
                .ok_or_else(|| Error::Machine(format!("unknown state {name:?}")))
        };
        let start_i = lookup(start)?;
        let halt_i = lookup(halt)?;
        let mut entries = vec![None; names.len() * 64];
        for (q, name) in names.iter().enumerate() {
            if q == halt_i {
                continue;
            }
            for read in all_reads() {
                let (next, w2, w3, moves) = rule(name, read);
                entries[Table::slot(q, read)] = Some(Transition {
                    next: lookup(next)?,
                    write_work: w2,
                    write_output: w3,
                    moves,
                });
            }
        }
        Ok(TuringMachine {
            states: names,
            start: start_i,
            halt: halt_i,
            table: Table { entries },
        })
    }

    pub fn states(&self) -> &[String] {
        &self.states
    }

    pub fn start(&self) -> usize {
        self.start
    }

    pub fn halt(&self) -> usize {
        self.halt
    }

    pub fn state_name(&self, q: usize) -> &str {
        &self.states[q]
    }

    pub fn initial(&self, input: &[Symbol]) -> Configuration {
        Configuration::initial(self.start, input)
    }

    /// One application of `δ`.
    pub fn step(&self, c: &Configuration) -> Result<Configuration> {
        let mut next = c.clone();
        self.step_in_place(&mut next)?;
        Ok(next)
    }

    fn step_in_place(&self, c: &mut Configuration) -> Result<()> {
        if c.state == self.halt {
            return Err(Error::Halted);
        }
        let t = *self
            .table
            .get(c.state, c.read())
            .expect("table is total on non-halting states");
        c.apply(&t);
        Ok(())
    }

    /// Runs for at most `budget` steps.
    pub fn run(&self, input: &[Symbol], budget: u64) -> Result<RunOutcome> {
        Ok(self.run_inner(input, budget, None)?.0)
    }

    /// Like [`TuringMachine::run`], also returning every visited
    /// configuration.
    pub fn run_traced(&self, input: &[Symbol], budget: u64) -> Result<(RunOutcome, Trace)> {
        let mut steps = Vec::new();
        let (outcome, initial) = self.run_inner(input, budget, Some(&mut steps))?;
        Ok((outcome, Trace { initial, steps }))
    }

    fn run_inner(
        &self,
        input: &[Symbol],
        budget: u64,
        mut trace: Option<&mut Vec<Configuration>>,
    ) -> Result<(RunOutcome, Configuration)> {
        if budget == 0 {
            return Err(Error::InvalidParameter("budget must be ≥ 1".into()));
        }
        let initial = self.initial(input);
        let mut c = initial.clone();
        let mut steps = 0;
        while c.state != self.halt {
            if steps == budget {
                return Ok((RunOutcome::BudgetExceeded { steps }, initial));
            }
            self.step_in_place(&mut c)?;
            steps += 1;
            if let Some(t) = trace.as_deref_mut() {
                t.push(c.clone());
            }
        }
        Ok((
            RunOutcome::Halted {
                output: c.output(),
                steps,
            },
            initial,
        ))
    }

    /// One line per configuration: step number, state, then each tape with
    /// the scanned cell bracketed.
    pub fn format_configuration(&self, step: usize, c: &Configuration) -> String {
        format!(
            "{step:>4} {:<8} in={} work={} out={}",
            self.state_name(c.state),
            render_tape(&c.tapes[0], c.heads[0]),
            render_tape(&c.tapes[1], c.heads[1]),
            render_tape(&c.tapes[2], c.heads[2]),
        )
    }

    pub fn format_trace(&self, trace: &Trace) -> String {
        let mut out = self.format_configuration(0, &trace.initial);
        out.push('\n');
        for (i, c) in trace.steps.iter().enumerate() {
            out.push_str(&self.format_configuration(i + 1, c));
            out.push('\n');
        }
        out
    }

    pub fn to_file(&self) -> MachineFile {
        MachineFile {
            states: self.states.clone(),
            start: self.states[self.start].clone(),
            halt: self.states[self.halt].clone(),
            delta: table_rows(&self.states, &self.table, &[self.halt]),
        }
    }

    pub fn to_json(&self) -> String {
        self.to_file().to_json()
    }
}

fn state_index(names: &[String]) -> Result<HashMap<&str, usize>> {
    if names.is_empty() {
        return Err(Error::Machine("machine has no states".into()));
    }
    let mut index = HashMap::new();
    for (i, name) in names.iter().enumerate() {
        if index.insert(name.as_str(), i).is_some() {
            return Err(Error::Machine(format!("duplicate state {name:?}")));
        }
    }
    Ok(index)
}

fn table_rows(states: &[String], table: &Table, skip: &[usize]) -> Vec<[String; 10]> {
    let mut rows = Vec::new();
    for (q, name) in states.iter().enumerate() {
        if skip.contains(&q) {
            continue;
        }
        for read in all_reads() {
            if let Some(t) = table.get(q, read) {
                rows.push([
                    name.clone(),
                    read[0].to_string(),
                    read[1].to_string(),
                    read[2].to_string(),
                    states[t.next].clone(),
                    t.write_work.to_string(),
                    t.write_output.to_string(),
                    t.moves[0].as_char().to_string(),
                    t.moves[1].as_char().to_string(),
                    t.moves[2].as_char().to_string(),
                ]);
            }
        }
    }
    rows
}

fn parse_symbol(s: &str, row: usize, col: usize) -> Result<Symbol> {
    let mut chars = s.chars();
    match (chars.next(), chars.next()) {
        (Some(c), None) => Symbol::from_char(c),
        _ => None,
    }
    .ok_or_else(|| Error::Machine(format!("delta[{row}][{col}]: unknown symbol {s:?}")))
}

fn parse_move(s: &str, row: usize, col: usize) -> Result<Move> {
    let mut chars = s.chars();
    match (chars.next(), chars.next()) {
        (Some(c), None) => Move::from_char(c),
        _ => None,
    }
    .ok_or_else(|| Error::Machine(format!("delta[{row}][{col}]: unknown move {s:?}")))
}

/// Parses `δ` rows into a table, rejecting duplicates and missing entries
/// for states not listed in `terminal`.
fn build_table(
    states: &[String],
    rows: &[[String; 10]],
    terminal: &[usize],
    label: &str,
) -> Result<Table> {
    let index = state_index(states)?;
    let lookup = |name: &str, row: usize| {
        index
            .get(name)
            .copied()
            .ok_or_else(|| Error::Machine(format!("{label}[{row}]: unknown state {name:?}")))
    };
    let mut entries = vec![None; states.len() * 64];
    for (i, row) in rows.iter().enumerate() {
        let q = lookup(&row[0], i)?;
        let read = [
            parse_symbol(&row[1], i, 1)?,
            parse_symbol(&row[2], i, 2)?,
            parse_symbol(&row[3], i, 3)?,
        ];
        let t = Transition {
            next: lookup(&row[4], i)?,
            write_work: parse_symbol(&row[5], i, 5)?,
            write_output: parse_symbol(&row[6], i, 6)?,
            moves: [
                parse_move(&row[7], i, 7)?,
                parse_move(&row[8], i, 8)?,
                parse_move(&row[9], i, 9)?,
            ],
        };
        let slot = &mut entries[Table::slot(q, read)];
        if slot.is_some() {
            return Err(Error::Machine(format!(
                "{label}[{i}]: duplicate transition for ({}, {}{}{})",
                row[0], read[0], read[1], read[2]
            )));
        }
        *slot = Some(t);
    }
    let table = Table { entries };
    for (q, name) in states.iter().enumerate() {
        if terminal.contains(&q) {
            continue;
        }
        for read in all_reads() {
            if table.get(q, read).is_none() {
                return Err(Error::Machine(format!(
                    "{label} is not total: missing ({name}, {}, {}, {})",
                    read[0], read[1], read[2]
                )));
            }
        }
    }
    Ok(table)
}

/// JSON form of a deterministic machine.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MachineFile {
    pub states: Vec<String>,
    pub start: String,
    pub halt: String,
    pub delta: Vec<[String; 10]>,
}

impl MachineFile {
    pub fn into_machine(self) -> Result<TuringMachine> {
        let index = state_index(&self.states)?;
        let find = |name: &str, field: &str| {
            index
                .get(name)
                .copied()
                .ok_or_else(|| Error::Machine(format!("{field} state {name:?} is not in states")))
        };
        let start = find(&self.start, "start")?;
        let halt = find(&self.halt, "halt")?;
        let table = build_table(&self.states, &self.delta, &[halt], "delta")?;
        Ok(TuringMachine {
            states: self.states,
            start,
            halt,
            table,
        })
    }

    /// Pretty JSON with one `δ` row per line.
    pub fn to_json(&self) -> String {
        let q = |s: &str| serde_json::to_string(s).expect("string serializes");
        let states: Vec<String> = self.states.iter().map(|s| q(s)).collect();
        let rows: Vec<String> = self
            .delta
            .iter()
            .map(|r| {
                let cells: Vec<String> = r.iter().map(|s| q(s)).collect();
                format!("    [{}]", cells.join(", "))
            })
            .collect();
        format!(
            "{{\n  \"states\": [{}],\n  \"start\": {},\n  \"halt\": {},\n  \"delta\": [\n{}\n  ]\n}}\n",
            states.join(", "),
            q(&self.start),
            q(&self.halt),
            rows.join(",\n")
        )
    }
}

pub fn load_machine(text: &str) -> Result<TuringMachine> {
    let file: MachineFile = serde_json::from_str(text)?;
    file.into_machine()
}

/// Nondeterministic machine: two transition tables and two halting states.
#[derive(Debug, Clone, PartialEq)]
pub struct Ndtm {
    states: Vec<String>,
    start: usize,
    accept: usize,
    reject: usize,
    tables: [Table; 2],
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum NdOutcome {
    /// Some branch reaches the accepting state within `depth` steps.
    Accept { depth: u64 },
    /// Every branch reaches the rejecting state within the budget.
    Reject,
    BudgetExceeded,
}

enum Search {
    Accepted,
    AllRejected,
    CutOff,
}

impl Ndtm {
    pub fn from_fn(
        states: &[&str],
        start: &str,
        accept: &str,
        reject: &str,
        rule: impl Fn(usize, &str, [Symbol; 3]) -> (&'static str, Symbol, Symbol, [Move; 3]),
    ) -> Result<Self> {
        let names: Vec<String> = states.iter().map(|s| s.to_string()).collect();
        let index = state_index(&names)?;
        let lookup = |name: &str| {
            index
                .get(name)
                .copied()
                .ok_or_else(|| Error::Machine(format!("unknown state {name:?}")))
        };
        let (start_i, accept_i, reject_i) = (lookup(start)?, lookup(accept)?, lookup(reject)?);
        if accept_i == reject_i {
            return Err(Error::Machine("accept and reject states must differ".into()));
        }
        let mut tables = [
            Table { entries: vec![None; names.len() * 64] },
            Table { entries: vec![None; names.len() * 64] },
        ];
        for (which, table) in tables.iter_mut().enumerate() {
            for (q, name) in names.iter().enumerate() {
                if q == accept_i || q == reject_i {
                    continue;
                }
                for read in all_reads() {
                    let (next, w2, w3, moves) = rule(which, name, read);
                    table.entries[Table::slot(q, read)] = Some(Transition {
                        next: lookup(next)?,
                        write_work: w2,
                        write_output: w3,
                        moves,
                    });
                }
            }
        }
        Ok(Ndtm {
            states: names,
            start: start_i,
            accept: accept_i,
            reject: reject_i,
            tables,
        })
    }

    /// Iterative deepening over the binary tree of transition choices.
    pub fn accepts(&self, input: &[Symbol], depth_budget: u64) -> Result<NdOutcome> {
        if depth_budget == 0 {
            return Err(Error::InvalidParameter("depth budget must be ≥ 1".into()));
        }
        let root = Configuration::initial(self.start, input);
        if root.state == self.accept {
            return Ok(NdOutcome::Accept { depth: 0 });
        }
        for limit in 1..=depth_budget {
            match self.search(&root, limit) {
                Search::Accepted => return Ok(NdOutcome::Accept { depth: limit }),
                Search::AllRejected => return Ok(NdOutcome::Reject),
                Search::CutOff => {}
            }
        }
        Ok(NdOutcome::BudgetExceeded)
    }

    fn search(&self, c: &Configuration, remaining: u64) -> Search {
        if c.state == self.accept {
            return Search::Accepted;
        }
        if c.state == self.reject {
            return Search::AllRejected;
        }
        if remaining == 0 {
            return Search::CutOff;
        }
        let read = c.read();
        let mut cut = false;
        for table in &self.tables {
            let t = table.get(c.state, read).expect("tables are total");
            let mut next = c.clone();
            next.apply(t);
            match self.search(&next, remaining - 1) {
                Search::Accepted => return Search::Accepted,
                Search::CutOff => cut = true,
                Search::AllRejected => {}
            }
        }
        if cut {
            Search::CutOff
        } else {
            Search::AllRejected
        }
    }

    pub fn to_file(&self) -> NdtmFile {
        let terminal = [self.accept, self.reject];
        NdtmFile {
            states: self.states.clone(),
            start: self.states[self.start].clone(),
            accept: self.states[self.accept].clone(),
            reject: self.states[self.reject].clone(),
            delta0: table_rows(&self.states, &self.tables[0], &terminal),
            delta1: table_rows(&self.states, &self.tables[1], &terminal),
        }
    }
}

/// JSON form of a nondeterministic machine.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NdtmFile {
    pub states: Vec<String>,
    pub start: String,
    pub accept: String,
    pub reject: String,
    pub delta0: Vec<[String; 10]>,
    pub delta1: Vec<[String; 10]>,
}

impl NdtmFile {
    pub fn into_machine(self) -> Result<Ndtm> {
        let index = state_index(&self.states)?;
        let find = |name: &str, field: &str| {
            index
                .get(name)
                .copied()
                .ok_or_else(|| Error::Machine(format!("{field} state {name:?} is not in states")))
        };
        let start = find(&self.start, "start")?;
        let accept = find(&self.accept, "accept")?;
        let reject = find(&self.reject, "reject")?;
        if accept == reject {
            return Err(Error::Machine("accept and reject states must differ".into()));
        }
        let terminal = [accept, reject];
        let t0 = build_table(&self.states, &self.delta0, &terminal, "delta0")?;
        let t1 = build_table(&self.states, &self.delta1, &terminal, "delta1")?;
        Ok(Ndtm {
            states: self.states,
            start,
            accept,
            reject,
            tables: [t0, t1],
        })
    }
}

pub fn load_ndtm(text: &str) -> Result<Ndtm> {
    let file: NdtmFile = serde_json::from_str(text)?;
    file.into_machine()
}

use Move::{Left as L, Right as R, Stay as S};

/// Copies the input to the output tape, rewinds the output head, halts.
///
/// States: `start` steps the input and output heads onto cell 1; `copy`
/// writes each input bit to the output; on the first input blank `rewind`
/// walks the output head back to cell 0; then `halt`.
pub fn copier() -> TuringMachine {
    TuringMachine::from_fn(&["start", "copy", "rewind", "halt"], "start", "halt", |q, [s1, s2, s3]| {
        match (q, s1, s3) {
            ("start", Symbol::Start, Symbol::Start) => ("copy", s2, s3, [R, S, R]),
            ("copy", Symbol::Zero | Symbol::One, _) => ("copy", s2, s1, [R, S, R]),
            ("copy", Symbol::Blank, _) => ("rewind", s2, s3, [S, S, L]),
            ("rewind", _, Symbol::Start) => ("halt", s2, s3, [S, S, S]),
            ("rewind", _, _) => ("rewind", s2, s3, [S, S, L]),
            _ => ("halt", s2, s3, [S, S, S]),
        }
    })
    .expect("copier is well formed")
}

/// Never reaches its halting state.
pub fn looper() -> TuringMachine {
    TuringMachine::from_fn(&["start", "halt"], "start", "halt", |_, [_, s2, s3]| {
        ("start", s2, s3, [S, S, S])
    })
    .expect("looper is well formed")
}

/// Moves every head left from cell 0 and halts; the heads must stay at 0.
pub fn clamp_probe() -> TuringMachine {
    TuringMachine::from_fn(&["start", "halt"], "start", "halt", |_, [_, s2, s3]| {
        ("halt", s2, s3, [L, L, L])
    })
    .expect("clamp probe is well formed")
}

pub const COPIER_JSON: &str = include_str!("../data/copier.json");
pub const LOOPER_JSON: &str = include_str!("../data/looper.json");
pub const CLAMP_JSON: &str = include_str!("../data/clamp.json");

#[cfg(test)]
mod tests {
    use super::*;

    fn bits(s: &str) -> Vec<Symbol> {
        parse_input(s).unwrap()
    }

    /// Halts immediately from `(start, △, △, △)`.
    fn immediate_halt() -> TuringMachine {
        TuringMachine::from_fn(&["start", "halt"], "start", "halt", |_, [_, s2, s3]| {
            ("halt", s2, s3, [S, S, S])
        })
        .unwrap()
    }

    #[test]
    fn immediate_halt_has_empty_output() {
        let m = immediate_halt();
        let c = m.step(&m.initial(&bits("101"))).unwrap();
        assert_eq!(c.state, m.halt());
        assert_eq!(c.output(), "");
        assert_eq!(
            m.run(&bits("101"), 5).unwrap(),
            RunOutcome::Halted { output: String::new(), steps: 1 }
        );
    }

    #[test]
    fn stepping_halted_configuration_fails() {
        let m = immediate_halt();
        let c = m.step(&m.initial(&[])).unwrap();
        assert!(matches!(m.step(&c), Err(Error::Halted)));
    }

    #[test]
    fn left_at_edge_stays() {
        let m = clamp_probe();
        let c = m.step(&m.initial(&bits("1"))).unwrap();
        assert_eq!(c.heads, [0, 0, 0]);
        assert_eq!(c.state, m.halt());
    }

    #[test]
    fn copier_copies() {
        let m = copier();
        for input in ["", "0", "1", "1011", "0010110"] {
            match m.run(&bits(input), 1000).unwrap() {
                RunOutcome::Halted { output, .. } => assert_eq!(output, input),
                other => panic!("unexpected {other:?}"),
            }
        }
    }

    #[test]
    fn input_tape_is_never_written() {
        let m = copier();
        let (_, trace) = m.run_traced(&bits("1011"), 100).unwrap();
        for c in &trace.steps {
            assert_eq!(c.tapes[0][..5], trace.initial.tapes[0][..5]);
            assert!(c.tapes[0][5..].iter().all(|&s| s == Symbol::Blank));
        }
    }

    #[test]
    fn looper_exhausts_budget() {
        assert_eq!(
            looper().run(&bits("1"), 10_000).unwrap(),
            RunOutcome::BudgetExceeded { steps: 10_000 }
        );
    }

    #[test]
    fn zero_budget_rejected() {
        assert!(copier().run(&[], 0).is_err());
    }

    #[test]
    fn bundled_files_match_builders() {
        assert_eq!(load_machine(COPIER_JSON).unwrap(), copier());
        assert_eq!(load_machine(LOOPER_JSON).unwrap(), looper());
        assert_eq!(load_machine(CLAMP_JSON).unwrap(), clamp_probe());
        assert_eq!(copier().to_json(), COPIER_JSON);
    }

    #[test]
    fn missing_transition_rejected() {
        let mut file = copier().to_file();
        file.delta.pop();
        let err = file.into_machine().unwrap_err().to_string();
        assert!(err.contains("not total"), "{err}");
    }

    #[test]
    fn duplicate_transition_rejected() {
        let mut file = looper().to_file();
        let first = file.delta[0].clone();
        file.delta.push(first);
        assert!(file.into_machine().unwrap_err().to_string().contains("duplicate"));
    }

    #[test]
    fn bad_symbol_rejected() {
        let mut file = looper().to_file();
        file.delta[0][1] = "x".into();
        assert!(file.into_machine().is_err());
    }

    #[test]
    fn non_binary_input_rejected() {
        assert!(parse_input("10a").is_err());
    }

    /// Guesses a bit, then accepts iff it equals the first input symbol.
    fn guesser() -> Ndtm {
        Ndtm::from_fn(
            &["start", "guess0", "guess1", "accept", "reject"],
            "start",
            "accept",
            "reject",
            |which, q, [s1, s2, s3]| match (q, s1) {
                ("start", _) => (if which == 0 { "guess0" } else { "guess1" }, s2, s3, [R, S, S]),
                ("guess0", Symbol::Zero) | ("guess1", Symbol::One) => ("accept", s2, s3, [S, S, S]),
                _ => ("reject", s2, s3, [S, S, S]),
            },
        )
        .unwrap()
    }

    #[test]
    fn guesser_accepts_matching_bit() {
        assert_eq!(guesser().accepts(&bits("1"), 4).unwrap(), NdOutcome::Accept { depth: 2 });
        assert_eq!(guesser().accepts(&bits("0"), 4).unwrap(), NdOutcome::Accept { depth: 2 });
        assert_eq!(guesser().accepts(&bits(""), 4).unwrap(), NdOutcome::Reject);
    }

    #[test]
    fn immediate_reject() {
        let m = Ndtm::from_fn(&["start", "accept", "reject"], "start", "accept", "reject", |_, _, [_, s2, s3]| {
            ("reject", s2, s3, [S, S, S])
        })
        .unwrap();
        assert_eq!(m.accepts(&bits("1"), 1).unwrap(), NdOutcome::Reject);
    }

    #[test]
    fn deep_accept_exceeds_budget() {
        // walks right to the first input blank, then accepts
        let m = Ndtm::from_fn(&["start", "accept", "reject"], "start", "accept", "reject", |_, _, [s1, s2, s3]| {
            match s1 {
                Symbol::Blank => ("accept", s2, s3, [S, S, S]),
                _ => ("start", s2, s3, [R, S, S]),
            }
        })
        .unwrap();
        let input = bits("0101010101");
        assert_eq!(m.accepts(&input, 5).unwrap(), NdOutcome::BudgetExceeded);
        assert_eq!(m.accepts(&input, 12).unwrap(), NdOutcome::Accept { depth: 12 });
    }

    #[test]
    fn ndtm_file_round_trip() {
        let m = guesser();
        let text = serde_json::to_string(&m.to_file()).unwrap();
        assert_eq!(load_ndtm(&text).unwrap(), m);
    }
}
