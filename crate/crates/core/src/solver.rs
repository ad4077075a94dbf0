//! Typicality-guided simulated annealing over pattern assignments, plus an
//! exhaustive search for small instances.
//!
//! A chain starts with every phrase on its idiom pattern. Each iteration draws
//! one pattern uniformly from the verb's pattern universe and moves every
//! unlocked phrase for which that pattern is strictly more typical than its
//! current one. The whole move is then accepted or rejected as a unit:
//! shorter descriptions are always kept, longer ones with probability
//! `exp(-ΔL / T(S))`. The chain ends after `beta` consecutive iterations
//! without a change or after `max_iterations`.
//!
//! Because moves only ever raise a phrase's typicality, a chain can reach
//! only part of the assignment space. [`brute_force_optimum`] is the exact
//! reference for instances small enough to enumerate.

use std::cmp::Ordering;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::{IdiomDictionary, PhraseCorpus, PhraseDistribution, VerbPhrase};
use crate::error::{Error, Result};
use crate::mdl::{self, DescriptionLength, DEFAULT_THETA};
use crate::patterns::{candidate_patterns, Assignment, PatternKind, VerbPattern};
use crate::taxonomy::Taxonomy;

pub const DEFAULT_GAMMA: f64 = 0.01;
pub const DEFAULT_T0: f64 = 1.0;
pub const DEFAULT_COOLING_A: f64 = 0.5;
pub const DEFAULT_BETA: usize = 200;
pub const DEFAULT_RESTARTS: usize = 4;
/// Default iteration cap per chain, as a multiple of the pattern-universe size.
pub const ITERATIONS_PER_PATTERN: usize = 20;
/// Largest instance [`brute_force_optimum`] will enumerate.
pub const BRUTE_FORCE_LIMIT: u128 = 1_000_000;

/// Lengths closer than this are treated as equal when picking a winner.
const TIE_EPSILON: f64 = 1e-12;

/// How the acceptance probability of a longer description evolves with the step index `S`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CoolingSchedule {
    /// Temperature `T(S) = t0 · S^(-A)`; acceptance of worse moves becomes rarer over time.
    #[default]
    Cooling,
    /// `exp((L - L') / S^A)` taken literally. This heats the chain as `S` grows.
    Literal,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub theta: f64,
    pub gamma: f64,
    pub t0: f64,
    pub cooling_a: f64,
    pub beta: usize,
    pub seed: u64,
    pub restarts: usize,
    /// `None` means `20 ×` the number of distinct candidate patterns.
    pub max_iterations: Option<usize>,
    pub schedule: CoolingSchedule,
    /// Record every step of every chain in [`SolveResult::trace`].
    pub trace: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            theta: DEFAULT_THETA,
            gamma: DEFAULT_GAMMA,
            t0: DEFAULT_T0,
            cooling_a: DEFAULT_COOLING_A,
            beta: DEFAULT_BETA,
            seed: 0,
            restarts: DEFAULT_RESTARTS,
            max_iterations: None,
            schedule: CoolingSchedule::Cooling,
            trace: false,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        fn positive(name: &str, v: f64) -> Result<()> {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::Config(format!(
                    "{name} must be positive and finite, got {v}"
                )))
            }
        }
        if !(self.theta >= 0.0 && self.theta.is_finite()) {
            return Err(Error::Config(format!(
                "theta must be non-negative and finite, got {}",
                self.theta
            )));
        }
        positive("gamma", self.gamma)?;
        positive("t0", self.t0)?;
        positive("cooling_a", self.cooling_a)?;
        if self.beta == 0 {
            return Err(Error::Config("beta must be at least 1".into()));
        }
        if self.restarts == 0 {
            return Err(Error::Config("restarts must be at least 1".into()));
        }
        if self.max_iterations == Some(0) {
            return Err(Error::Config("max_iterations must be at least 1".into()));
        }
        Ok(())
    }
}

/// `t(p, a)`: `γ` for the phrase's own idiom, `P_T(o|c)·P_T(c|o)` for a
/// concept of the object, zero for a pattern the phrase cannot take.
pub fn typicality(
    phrase: &VerbPhrase,
    pattern: &VerbPattern,
    taxonomy: &Taxonomy,
    gamma: f64,
) -> f64 {
    if phrase.verb != pattern.verb {
        return 0.0;
    }
    match &pattern.kind {
        PatternKind::Idiom(object) if *object == phrase.object => gamma,
        PatternKind::Idiom(_) => 0.0,
        PatternKind::Concept(concept) => {
            let p = taxonomy.conditional_probabilities(&phrase.object, concept);
            p.p_e_given_c * p.p_c_given_e
        }
    }
}

/// Probability of accepting a move from `current` to `candidate` bits at step `step` (1-based).
pub fn acceptance_probability(current: f64, candidate: f64, step: u64, cfg: &SolverConfig) -> f64 {
    if candidate < current {
        return 1.0;
    }
    let s = (step.max(1) as f64).powf(cfg.cooling_a);
    let exponent = match cfg.schedule {
        CoolingSchedule::Cooling => (current - candidate) * s / cfg.t0,
        CoolingSchedule::Literal => (current - candidate) / s,
    };
    exponent.exp()
}

#[derive(Debug, Clone)]
struct Candidate {
    pattern: usize,
    typicality: f64,
    // -log2 P_T(o|c), zero for the idiom
    bits: f64,
}

/// One verb's phrases, candidate patterns and their precomputed typicalities,
/// indexed for fast annealing.
#[derive(Debug, Clone)]
pub struct SearchSpace {
    verb: String,
    objects: Vec<String>,
    probs: Vec<f64>,
    universe: Vec<PatternKind>,
    // candidates[i][0] is always phrase i's idiom
    candidates: Vec<Vec<Candidate>>,
    // per universe pattern: (phrase, candidate index)
    members: Vec<Vec<(usize, usize)>>,
    locked: Vec<bool>,
    theta: f64,
}

/// Mutable state of one chain.
#[derive(Debug, Clone)]
pub struct ChainState {
    choice: Vec<usize>,
    length: f64,
    mass: Vec<f64>,
    undo: Vec<(usize, usize)>,
}

impl ChainState {
    /// Current total description length in bits.
    pub fn length(&self) -> f64 {
        self.length
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepOutcome {
    /// Phrases reassigned by the proposal, whether or not the move was kept.
    pub moved: usize,
    pub accepted: bool,
    /// Length of the proposed assignment; equals the current length for a no-op.
    pub candidate_length: f64,
}

impl SearchSpace {
    /// `is_locked(object)` pins a phrase to its idiom pattern.
    pub fn new<F>(
        dist: &PhraseDistribution,
        taxonomy: &Taxonomy,
        is_locked: F,
        theta: f64,
        gamma: f64,
    ) -> Self
    where
        F: Fn(&str) -> bool,
    {
        let verb = dist.verb().to_owned();
        let mut per_phrase: Vec<Vec<(PatternKind, f64, f64)>> = Vec::with_capacity(dist.len());
        let mut universe: Vec<PatternKind> = Vec::new();
        for object in dist.objects() {
            let phrase = VerbPhrase::new(verb.clone(), object.clone());
            let cands: Vec<(PatternKind, f64, f64)> = candidate_patterns(&phrase, taxonomy)
                .into_iter()
                .map(|pattern| {
                    let t = typicality(&phrase, &pattern, taxonomy, gamma);
                    let bits = match &pattern.kind {
                        PatternKind::Idiom(_) => 0.0,
                        PatternKind::Concept(c) => {
                            -taxonomy.p_entity_given_concept(object, c).log2()
                        }
                    };
                    (pattern.kind, t, bits)
                })
                .collect();
            universe.extend(cands.iter().map(|(k, _, _)| k.clone()));
            per_phrase.push(cands);
        }
        universe.sort();
        universe.dedup();

        let index = |kind: &PatternKind| universe.binary_search(kind).expect("pattern in universe");
        let mut members = vec![Vec::new(); universe.len()];
        let candidates = per_phrase
            .into_iter()
            .enumerate()
            .map(|(i, cands)| {
                cands
                    .into_iter()
                    .enumerate()
                    .map(|(ci, (kind, typicality, bits))| {
                        let pattern = index(&kind);
                        members[pattern].push((i, ci));
                        Candidate {
                            pattern,
                            typicality,
                            bits,
                        }
                    })
                    .collect()
            })
            .collect();

        SearchSpace {
            verb,
            objects: dist.objects().to_vec(),
            probs: dist.probabilities().to_vec(),
            locked: dist.objects().iter().map(|o| is_locked(o)).collect(),
            universe,
            candidates,
            members,
            theta,
        }
    }

    pub fn phrase_count(&self) -> usize {
        self.objects.len()
    }

    /// Distinct candidate patterns, in pattern order. Proposals index into this.
    pub fn universe(&self) -> &[PatternKind] {
        &self.universe
    }

    pub fn pattern_index(&self, kind: &PatternKind) -> Option<usize> {
        self.universe.binary_search(kind).ok()
    }

    pub fn is_locked(&self, object: &str) -> bool {
        self.objects
            .binary_search(&object.to_owned())
            .map(|i| self.locked[i])
            .unwrap_or(false)
    }

    /// The all-idiom starting state.
    pub fn initial_state(&self) -> ChainState {
        let mut state = ChainState {
            choice: vec![0; self.objects.len()],
            length: 0.0,
            mass: vec![0.0; self.universe.len()],
            undo: Vec::new(),
        };
        state.length = self.evaluate(&state.choice, &mut state.mass);
        state
    }

    /// State for an existing assignment; fails if it maps outside the candidates.
    pub fn state_from(&self, assignment: &Assignment) -> Result<ChainState> {
        let mut state = self.initial_state();
        for (i, object) in self.objects.iter().enumerate() {
            let kind = assignment.get(object).ok_or_else(|| {
                Error::Inconsistent(format!("phrase `{} {object}` has no pattern", self.verb))
            })?;
            let pattern = self.pattern_index(kind);
            state.choice[i] = self.candidates[i]
                .iter()
                .position(|c| Some(c.pattern) == pattern)
                .ok_or_else(|| {
                    Error::InvalidAssignment(format!("`{object}` cannot take pattern {kind}"))
                })?;
        }
        if assignment.len() != self.objects.len() {
            return Err(Error::Inconsistent(
                "assignment has phrases outside the distribution".into(),
            ));
        }
        state.length = self.evaluate(&state.choice, &mut state.mass);
        Ok(state)
    }

    pub fn assignment(&self, state: &ChainState) -> Assignment {
        let mut out = Assignment::new(&self.verb);
        for (i, object) in self.objects.iter().enumerate() {
            let pattern = self.candidates[i][state.choice[i]].pattern;
            out.set(object.clone(), self.universe[pattern].clone());
        }
        out
    }

    /// Total length `L_L + θ·L_R` of `choice`. `mass` must be all zeros and is left that way.
    fn evaluate(&self, choice: &[usize], mass: &mut [f64]) -> f64 {
        for (i, &ci) in choice.iter().enumerate() {
            mass[self.candidates[i][ci].pattern] += self.probs[i];
        }
        let mut l_patterns = 0.0;
        let mut l_conditional = 0.0;
        for (i, &ci) in choice.iter().enumerate() {
            let c = &self.candidates[i][ci];
            l_patterns -= self.probs[i] * mass[c.pattern].log2();
            l_conditional += self.probs[i] * c.bits;
        }
        for (i, &ci) in choice.iter().enumerate() {
            mass[self.candidates[i][ci].pattern] = 0.0;
        }
        l_patterns + self.theta * l_conditional
    }

    /// Reassigns to `proposal` every unlocked phrase for which it is strictly
    /// more typical, then keeps or reverts the whole move.
    pub fn anneal_step<R: Rng + ?Sized>(
        &self,
        state: &mut ChainState,
        proposal: usize,
        step: u64,
        cfg: &SolverConfig,
        rng: &mut R,
    ) -> StepOutcome {
        state.undo.clear();
        if let Some(members) = self.members.get(proposal) {
            for &(i, ci) in members {
                if self.locked[i] {
                    continue;
                }
                let current = state.choice[i];
                if self.candidates[i][ci].typicality > self.candidates[i][current].typicality {
                    state.undo.push((i, current));
                    state.choice[i] = ci;
                }
            }
        }
        if state.undo.is_empty() {
            return StepOutcome {
                moved: 0,
                accepted: false,
                candidate_length: state.length,
            };
        }
        let candidate = self.evaluate(&state.choice, &mut state.mass);
        let p = acceptance_probability(state.length, candidate, step, cfg);
        let accepted = p >= 1.0 || rng.gen::<f64>() < p;
        if accepted {
            state.length = candidate;
        } else {
            for &(i, previous) in &state.undo {
                state.choice[i] = previous;
            }
        }
        StepOutcome {
            moved: state.undo.len(),
            accepted,
            candidate_length: candidate,
        }
    }

    fn max_iterations(&self, cfg: &SolverConfig) -> usize {
        cfg.max_iterations
            .unwrap_or(ITERATIONS_PER_PATTERN * self.universe.len())
            .max(1)
    }

    fn run_chain(&self, restart: usize, cfg: &SolverConfig) -> Chain {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_add(restart as u64));
        let mut state = self.initial_state();
        let mut best_choice = state.choice.clone();
        let mut best_length = state.length;
        let mut trace = cfg.trace.then(Vec::new);
        if let Some(trace) = trace.as_mut() {
            trace.push(TraceStep {
                restart,
                iteration: 0,
                proposal: None,
                moved: 0,
                accepted: true,
                length: state.length,
                assignment: Some(self.assignment(&state)),
            });
        }

        let max_iterations = self.max_iterations(cfg);
        let mut stall = 0;
        let mut iterations = 0;
        while iterations < max_iterations && stall < cfg.beta {
            iterations += 1;
            let proposal = rng.gen_range(0..self.universe.len());
            let outcome = self.anneal_step(&mut state, proposal, iterations as u64, cfg, &mut rng);
            let changed = outcome.accepted && outcome.moved > 0;
            if changed {
                stall = 0;
                if state.length < best_length {
                    best_length = state.length;
                    best_choice.clone_from(&state.choice);
                }
            } else {
                stall += 1;
            }
            if let Some(trace) = trace.as_mut() {
                trace.push(TraceStep {
                    restart,
                    iteration: iterations,
                    proposal: Some(VerbPattern {
                        verb: self.verb.clone(),
                        kind: self.universe[proposal].clone(),
                    }),
                    moved: outcome.moved,
                    accepted: outcome.accepted,
                    length: state.length,
                    assignment: changed.then(|| self.assignment(&state)),
                });
            }
        }

        state.choice = best_choice;
        state.length = best_length;
        Chain {
            assignment: self.assignment(&state),
            length: best_length,
            iterations,
            trace: trace.unwrap_or_default(),
        }
    }
}

struct Chain {
    assignment: Assignment,
    length: f64,
    iterations: usize,
    trace: Vec<TraceStep>,
}

/// One recorded chain iteration. Iteration 0 is the initial state.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceStep {
    pub restart: usize,
    pub iteration: usize,
    pub proposal: Option<VerbPattern>,
    pub moved: usize,
    pub accepted: bool,
    /// Current length after the step, in bits.
    pub length: f64,
    /// State after the step, present whenever the state changed (and for iteration 0).
    pub assignment: Option<Assignment>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveResult {
    pub verb: String,
    pub assignment: Assignment,
    pub length: DescriptionLength,
    /// Iterations run by the winning chain.
    pub iterations: usize,
    pub total_iterations: usize,
    /// Index of the winning restart.
    pub restart: usize,
    pub trace: Option<Vec<TraceStep>>,
}

/// Orders `(length, assignment)` pairs by length, then by serialized assignment.
fn better(a_len: f64, a: &Assignment, b_len: f64, b: &Assignment) -> bool {
    if (a_len - b_len).abs() > TIE_EPSILON {
        return a_len < b_len;
    }
    a.serialized().cmp(&b.serialized()) == Ordering::Less
}

/// Anneals one verb's assignment with `cfg.restarts` independent chains and
/// returns the shortest assignment found.
pub fn solve(
    verb: &str,
    corpus: &PhraseCorpus,
    taxonomy: &Taxonomy,
    idioms: &IdiomDictionary,
    cfg: &SolverConfig,
) -> Result<SolveResult> {
    cfg.validate()?;
    let dist = corpus.phrase_distribution(verb)?;
    solve_distribution(&dist, taxonomy, idioms, cfg)
}

/// [`solve`] for an already computed phrase distribution.
pub fn solve_distribution(
    dist: &PhraseDistribution,
    taxonomy: &Taxonomy,
    idioms: &IdiomDictionary,
    cfg: &SolverConfig,
) -> Result<SolveResult> {
    cfg.validate()?;
    let verb = dist.verb();
    if dist.len() <= 1 {
        let assignment = Assignment::all_idiom(dist);
        let length = mdl::description_length(&assignment, dist, taxonomy, cfg.theta)?;
        return Ok(SolveResult {
            verb: verb.to_owned(),
            assignment,
            length,
            iterations: 0,
            total_iterations: 0,
            restart: 0,
            trace: cfg.trace.then(Vec::new),
        });
    }

    let space = SearchSpace::new(
        dist,
        taxonomy,
        |o| idioms.contains(verb, o),
        cfg.theta,
        cfg.gamma,
    );
    let mut winner: Option<(usize, Chain)> = None;
    let mut total_iterations = 0;
    let mut trace = Vec::new();
    for restart in 0..cfg.restarts {
        let mut chain = space.run_chain(restart, cfg);
        total_iterations += chain.iterations;
        trace.append(&mut chain.trace);
        let replace = match &winner {
            None => true,
            Some((_, best)) => better(
                chain.length,
                &chain.assignment,
                best.length,
                &best.assignment,
            ),
        };
        if replace {
            winner = Some((restart, chain));
        }
    }
    let (restart, chain) = winner.expect("at least one restart");
    let length = mdl::description_length(&chain.assignment, dist, taxonomy, cfg.theta)?;
    Ok(SolveResult {
        verb: verb.to_owned(),
        assignment: chain.assignment,
        length,
        iterations: chain.iterations,
        total_iterations,
        restart,
        trace: cfg.trace.then_some(trace),
    })
}

/// Applies one annealing step to a standalone assignment.
///
/// Returns the next assignment and whether the move was accepted. A proposal
/// that moves no phrase leaves the state unchanged and reports `false`.
#[allow(clippy::too_many_arguments)]
pub fn anneal_step<R: Rng + ?Sized>(
    state: &Assignment,
    proposal: &VerbPattern,
    cfg: &SolverConfig,
    step: u64,
    rng: &mut R,
    locked: &IdiomDictionary,
    dist: &PhraseDistribution,
    taxonomy: &Taxonomy,
) -> Result<(Assignment, bool)> {
    cfg.validate()?;
    if step == 0 {
        return Err(Error::InvalidArgument("step index starts at 1".into()));
    }
    let verb = dist.verb();
    let space = SearchSpace::new(
        dist,
        taxonomy,
        |o| locked.contains(verb, o),
        cfg.theta,
        cfg.gamma,
    );
    let mut chain = space.state_from(state)?;
    let index = (proposal.verb == verb)
        .then(|| space.pattern_index(&proposal.kind))
        .flatten();
    let Some(index) = index else {
        return Ok((state.clone(), false));
    };
    let outcome = space.anneal_step(&mut chain, index, step, cfg, rng);
    Ok((space.assignment(&chain), outcome.accepted))
}

/// Exact minimizer of the description length by enumerating every valid
/// assignment. Dictionary idioms stay on their idiom pattern.
pub fn brute_force_optimum(
    verb: &str,
    corpus: &PhraseCorpus,
    taxonomy: &Taxonomy,
    idioms: &IdiomDictionary,
    theta: f64,
) -> Result<(Assignment, DescriptionLength)> {
    let dist = corpus.phrase_distribution(verb)?;
    let options: Vec<Vec<PatternKind>> = dist
        .objects()
        .iter()
        .map(|object| {
            if idioms.contains(verb, object) {
                vec![PatternKind::Idiom(object.clone())]
            } else {
                candidate_patterns(&VerbPhrase::new(verb, object.clone()), taxonomy)
                    .into_iter()
                    .map(|p| p.kind)
                    .collect()
            }
        })
        .collect();
    let size = options
        .iter()
        .fold(1u128, |acc, o| acc.saturating_mul(o.len() as u128));
    if size > BRUTE_FORCE_LIMIT {
        return Err(Error::InstanceTooLarge {
            size,
            limit: BRUTE_FORCE_LIMIT,
        });
    }

    let mut digits = vec![0usize; options.len()];
    let mut best: Option<(Assignment, DescriptionLength)> = None;
    loop {
        let mut assignment = Assignment::new(verb);
        for ((object, opts), &d) in dist.objects().iter().zip(&options).zip(&digits) {
            assignment.set(object.clone(), opts[d].clone());
        }
        let length = mdl::description_length(&assignment, &dist, taxonomy, theta)?;
        let replace = match &best {
            None => true,
            Some((a, l)) => better(length.total, &assignment, l.total, a),
        };
        if replace {
            best = Some((assignment, length));
        }

        // odometer increment
        let mut pos = 0;
        loop {
            if pos == digits.len() {
                return Ok(best.expect("at least one assignment"));
            }
            digits[pos] += 1;
            if digits[pos] < options[pos].len() {
                break;
            }
            digits[pos] = 0;
            pos += 1;
        }
    }
}
