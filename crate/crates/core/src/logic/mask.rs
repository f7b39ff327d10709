//! Bitmask form of a single program, used by the enumeration paths.

use std::collections::HashMap;

use super::{Atom, AtomSet, Limits, LogicError, Program, Semantics};

/// Hard ceiling imposed by the `u64` representation.
pub(crate) const MAX_MASK_ATOMS: usize = 63;

#[derive(Debug, Clone)]
pub(crate) struct Index {
    atoms: Vec<Atom>,
    bits: HashMap<Atom, u32>,
}

impl Index {
    pub(crate) fn new(alphabet: &AtomSet) -> Result<Self, LogicError> {
        if alphabet.len() > MAX_MASK_ATOMS {
            return Err(LogicError::AlphabetTooLarge {
                size: alphabet.len(),
                limit: MAX_MASK_ATOMS,
            });
        }
        let atoms: Vec<Atom> = alphabet.iter().cloned().collect();
        let bits = atoms
            .iter()
            .enumerate()
            .map(|(i, a)| (a.clone(), i as u32))
            .collect();
        Ok(Index { atoms, bits })
    }

    pub(crate) fn bit(&self, atom: &Atom) -> Option<u64> {
        self.bits.get(atom).map(|&i| 1u64 << i)
    }

    /// `None` if some atom is outside the index.
    pub(crate) fn mask<'a>(&self, atoms: impl IntoIterator<Item = &'a Atom>) -> Option<u64> {
        atoms
            .into_iter()
            .try_fold(0u64, |m, a| self.bit(a).map(|b| m | b))
    }

    pub(crate) fn set(&self, mask: u64) -> AtomSet {
        self.atoms
            .iter()
            .enumerate()
            .filter(|(i, _)| mask >> i & 1 == 1)
            .map(|(_, a)| a.clone())
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct MaskRule {
    pub head: u64,
    pub pos: u64,
    pub neg: u64,
}

impl MaskRule {
    pub(crate) fn applicable(&self, m: u64) -> bool {
        m & self.pos == self.pos && m & self.neg == 0
    }
}

/// Least model of the positive parts of `rules` containing `facts`.
pub(crate) fn least_model(rules: &[MaskRule], facts: u64) -> u64 {
    let mut m = facts;
    loop {
        let before = m;
        for r in rules {
            if m & r.pos == r.pos {
                m |= r.head;
            }
        }
        if m == before {
            return m;
        }
    }
}

/// All submasks of `mask`, starting with `mask` itself and ending with 0.
pub(crate) fn submasks(mask: u64) -> impl Iterator<Item = u64> {
    let mut next = Some(mask);
    std::iter::from_fn(move || {
        let cur = next?;
        next = if cur == 0 { None } else { Some((cur - 1) & mask) };
        Some(cur)
    })
}

fn is_minimal(candidate: u64, all: &[u64]) -> bool {
    all.iter()
        .all(|&other| other == candidate || other & candidate != other)
}

#[derive(Debug, Clone)]
pub(crate) struct CompiledProgram {
    pub index: Index,
    pub rules: Vec<MaskRule>,
    pub choices: Vec<Vec<u64>>,
    pub constraints: Vec<(u64, u64)>,
    pub semantics: Semantics,
    neg_atoms: u64,
}

impl CompiledProgram {
    pub(crate) fn new(program: &Program, limits: &Limits) -> Result<Self, LogicError> {
        let size = program.alphabet().len();
        if size > limits.max_atoms.min(MAX_MASK_ATOMS) {
            return Err(LogicError::AlphabetTooLarge {
                size,
                limit: limits.max_atoms.min(MAX_MASK_ATOMS),
            });
        }
        let index = Index::new(program.alphabet())?;
        let m = |atoms: &AtomSet| index.mask(atoms).expect("validated alphabet");
        let rules: Vec<MaskRule> = program
            .rules()
            .iter()
            .map(|r| MaskRule {
                head: index.bit(&r.head).expect("validated alphabet"),
                pos: m(&r.pos),
                neg: m(&r.neg),
            })
            .collect();
        let choices = program
            .choices()
            .iter()
            .map(|c| {
                c.alternatives()
                    .iter()
                    .map(|a| index.bit(a).expect("validated alphabet"))
                    .collect()
            })
            .collect();
        let constraints = program
            .constraints()
            .iter()
            .map(|c| (m(&c.pos), m(&c.neg)))
            .collect();
        let neg_atoms = rules.iter().fold(0, |acc, r| acc | r.neg);
        Ok(CompiledProgram {
            index,
            rules,
            choices,
            constraints,
            semantics: program.semantics(),
            neg_atoms,
        })
    }

    pub(crate) fn violates_constraints(&self, m: u64) -> bool {
        self.constraints
            .iter()
            .any(|&(pos, neg)| m & pos == pos && m & neg == 0)
    }

    /// Acceptable belief sets of the program extended with `extra` as facts.
    pub(crate) fn acceptable(&self, extra: u64, limits: &Limits) -> Result<Vec<u64>, LogicError> {
        match self.semantics {
            Semantics::AnswerSet => self.answer_sets(extra, limits),
            Semantics::ChoiceMinimalModel => self.minimal_models(extra, limits),
        }
    }

    /// Guesses the negated atoms that are true; an answer set is determined
    /// by that guess through the least model of the reduct.
    fn answer_sets(&self, extra: u64, limits: &Limits) -> Result<Vec<u64>, LogicError> {
        let guesses = 1usize
            .checked_shl(self.neg_atoms.count_ones())
            .unwrap_or(usize::MAX);
        if guesses > limits.max_candidates {
            return Err(LogicError::SearchSpaceExceeded {
                size: guesses,
                limit: limits.max_candidates,
            });
        }
        let mut out = Vec::new();
        let mut reduct = Vec::with_capacity(self.rules.len());
        for guess in submasks(self.neg_atoms) {
            reduct.clear();
            reduct.extend(self.rules.iter().filter(|r| r.neg & guess == 0).copied());
            let m = least_model(&reduct, extra);
            if m & self.neg_atoms == guess && !self.violates_constraints(m) {
                out.push(m);
            }
        }
        Ok(out)
    }

    /// One alternative per clause, closed under the rules; the minimal
    /// models are exactly the minimal elements among these closures.
    fn minimal_models(&self, extra: u64, limits: &Limits) -> Result<Vec<u64>, LogicError> {
        let total = self
            .choices
            .iter()
            .try_fold(1usize, |acc, c| acc.checked_mul(c.len()))
            .unwrap_or(usize::MAX);
        if total > limits.max_candidates {
            return Err(LogicError::SearchSpaceExceeded {
                size: total,
                limit: limits.max_candidates,
            });
        }
        let mut closures = Vec::new();
        let mut picks = vec![0usize; self.choices.len()];
        loop {
            let chosen = picks
                .iter()
                .zip(&self.choices)
                .fold(extra, |acc, (&i, c)| acc | c[i]);
            let m = least_model(&self.rules, chosen);
            if !self.violates_constraints(m) && !closures.contains(&m) {
                closures.push(m);
            }
            // odometer increment
            let mut k = 0;
            loop {
                if k == picks.len() {
                    let minimal = closures
                        .iter()
                        .copied()
                        .filter(|&c| is_minimal(c, &closures))
                        .collect();
                    return Ok(minimal);
                }
                picks[k] += 1;
                if picks[k] < self.choices[k].len() {
                    break;
                }
                picks[k] = 0;
                k += 1;
            }
        }
    }
}
