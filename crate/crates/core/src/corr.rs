//! Protocol-sequence algebra: cyclic shifts, generalized Hamming
//! cross-correlation and the SI / TI property checks.
//!
//! Users are indexed from zero. A correlation query picks an ordered subset
//! `A` of users, a mark bit `b_j` per member and a shift `tau_j` per member,
//! and counts the slots `n` in one period where every shifted sequence
//! `s_{A_j}(n - tau_j)` equals its mark.
//!
//! Correlations are evaluated on packed 64-bit words: every cyclic shift of
//! every sequence is precomputed once in a [`Correlator`], after which a query
//! is a word-wise AND (or AND-NOT for zero marks) followed by a popcount.
//!
//! Shift-invariance checks are exhaustive. A correlation is unchanged when all
//! of its shifts move by the same amount, so the first shift of each tuple is
//! pinned to zero and the remaining `L^(|A|-1)` tuples are enumerated.

use std::fmt;

use itertools::Itertools;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::{saturating_pow, Rational, Sampling, DEFAULT_WORK_BUDGET};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CorrError {
    #[error("a protocol sequence needs at least one slot")]
    EmptySequence,
    #[error("entry {index} is {value}, expected 0 or 1")]
    InvalidBit { index: usize, value: u8 },
    #[error("a sequence set needs at least one sequence")]
    EmptySet,
    #[error("sequence {index} has period {found}, expected {expected}")]
    PeriodMismatch {
        index: usize,
        expected: usize,
        found: usize,
    },
    #[error("invalid correlation query: {0}")]
    InvalidQuery(String),
    #[error("exhaustive check needs {required} work units, budget is {budget}; pass a sampling override")]
    BudgetExceeded { required: u64, budget: u64 },
    #[error("sequence file: {0}")]
    File(String),
}

/// One period of a binary protocol sequence.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BinarySequence {
    bits: Vec<u8>,
}

impl BinarySequence {
    pub fn new(bits: Vec<u8>) -> Result<Self, CorrError> {
        if bits.is_empty() {
            return Err(CorrError::EmptySequence);
        }
        if let Some((index, &value)) = bits.iter().find_position(|&&b| b > 1) {
            return Err(CorrError::InvalidBit { index, value });
        }
        Ok(BinarySequence { bits })
    }

    pub fn all_ones(period: usize) -> Self {
        assert!(period > 0);
        BinarySequence { bits: vec![1; period] }
    }

    pub fn all_zeros(period: usize) -> Self {
        assert!(period > 0);
        BinarySequence { bits: vec![0; period] }
    }

    pub fn period(&self) -> usize {
        self.bits.len()
    }

    pub fn bits(&self) -> &[u8] {
        &self.bits
    }

    /// Entry at slot `n` taken modulo the period (negative `n` allowed).
    pub fn at(&self, n: i64) -> u8 {
        self.bits[n.rem_euclid(self.bits.len() as i64) as usize]
    }

    pub fn weight(&self) -> usize {
        self.bits.iter().filter(|&&b| b == 1).count()
    }

    pub fn duty_factor(&self) -> Rational {
        Rational::new(self.weight() as u64, self.period() as u64).expect("period is positive")
    }

    /// Offsets of the ones, ascending.
    pub fn ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.bits.iter().positions(|&b| b == 1)
    }

    /// `result(n) = self(n - tau)`; `tau` is reduced modulo the period.
    pub fn cyclic_shift(&self, tau: i64) -> BinarySequence {
        let bits = (0..self.period() as i64).map(|n| self.at(n - tau)).collect();
        BinarySequence { bits }
    }

    /// Concatenates `times` copies of one period.
    pub fn repeat(&self, times: usize) -> BinarySequence {
        assert!(times > 0);
        BinarySequence {
            bits: self.bits.repeat(times),
        }
    }

    /// Copy with slot `n` inverted.
    pub fn with_flipped(&self, n: usize) -> BinarySequence {
        let mut bits = self.bits.clone();
        bits[n] ^= 1;
        BinarySequence { bits }
    }

    pub(crate) fn write_words(&self, out: &mut [u64]) {
        out.iter_mut().for_each(|w| *w = 0);
        for n in self.ones() {
            out[n / 64] |= 1 << (n % 64);
        }
    }
}

impl fmt::Debug for BinarySequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for b in &self.bits {
            write!(f, "{b}")?;
        }
        write!(f, "]")
    }
}

/// `cyclic_shift(seq, tau)(n) = seq(n - tau)`.
pub fn cyclic_shift(seq: &BinarySequence, tau: i64) -> BinarySequence {
    seq.cyclic_shift(tau)
}

/// `M >= 1` sequences sharing one period `L`.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct SequenceSet {
    sequences: Vec<BinarySequence>,
    period: usize,
}

impl SequenceSet {
    /// Rejects sequences whose periods differ; see
    /// [`SequenceSet::expand_to_common_period`] for explicit expansion.
    pub fn new(sequences: Vec<BinarySequence>) -> Result<Self, CorrError> {
        let period = sequences.first().ok_or(CorrError::EmptySet)?.period();
        if let Some((index, s)) = sequences.iter().find_position(|s| s.period() != period) {
            return Err(CorrError::PeriodMismatch {
                index,
                expected: period,
                found: s.period(),
            });
        }
        Ok(SequenceSet { sequences, period })
    }

    pub fn from_rows(rows: &[&[u8]]) -> Result<Self, CorrError> {
        let seqs = rows
            .iter()
            .map(|r| BinarySequence::new(r.to_vec()))
            .collect::<Result<Vec<_>, _>>()?;
        SequenceSet::new(seqs)
    }

    /// Repeats every sequence up to the least common multiple of the periods.
    pub fn expand_to_common_period(sequences: Vec<BinarySequence>) -> Result<Self, CorrError> {
        if sequences.is_empty() {
            return Err(CorrError::EmptySet);
        }
        let lcm = sequences
            .iter()
            .fold(1usize, |acc, s| num_integer::lcm(acc, s.period()));
        let expanded = sequences
            .iter()
            .map(|s| s.repeat(lcm / s.period()))
            .collect();
        SequenceSet::new(expanded)
    }

    pub fn len(&self) -> usize {
        self.sequences.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sequences.is_empty()
    }

    pub fn period(&self) -> usize {
        self.period
    }

    pub fn sequence(&self, i: usize) -> &BinarySequence {
        &self.sequences[i]
    }

    pub fn sequences(&self) -> &[BinarySequence] {
        &self.sequences
    }

    pub fn weights(&self) -> Vec<usize> {
        self.sequences.iter().map(BinarySequence::weight).collect()
    }

    pub fn duty_factors(&self) -> Vec<Rational> {
        self.sequences.iter().map(BinarySequence::duty_factor).collect()
    }

    /// Copy with sequence `i` replaced; the replacement must keep the period.
    pub fn with_sequence(&self, i: usize, seq: BinarySequence) -> Result<Self, CorrError> {
        let mut seqs = self.sequences.clone();
        seqs[i] = seq;
        SequenceSet::new(seqs)
    }
}

/// Mark vector `b_A` as a bit mask: bit `j` is the mark of the `j`-th member
/// of the subset.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, Default, PartialOrd, Ord)]
pub struct Marks(pub u64);

impl Marks {
    pub fn all_ones(k: usize) -> Marks {
        assert!(k <= 64);
        Marks(if k == 64 { u64::MAX } else { (1u64 << k) - 1 })
    }

    pub fn single(j: usize) -> Marks {
        Marks(1 << j)
    }

    pub fn from_bits(bits: &[u8]) -> Marks {
        assert!(bits.len() <= 64);
        Marks(
            bits.iter()
                .enumerate()
                .fold(0, |acc, (j, &b)| acc | (u64::from(b & 1) << j)),
        )
    }

    pub fn bit(self, j: usize) -> bool {
        self.0 >> j & 1 == 1
    }

    pub fn flipped(self, j: usize) -> Marks {
        Marks(self.0 ^ (1 << j))
    }

    /// Drops bit `j`, moving the higher bits down one place.
    pub fn without(self, j: usize) -> Marks {
        let low = self.0 & ((1u64 << j) - 1);
        let high = if j >= 63 { 0 } else { (self.0 >> (j + 1)) << j };
        Marks(low | high)
    }

    pub fn to_bits(self, k: usize) -> Vec<u8> {
        (0..k).map(|j| u8::from(self.bit(j))).collect()
    }

    /// All `2^k` mark vectors in increasing mask order.
    pub fn enumerate(k: usize) -> impl Iterator<Item = Marks> {
        assert!(k < 64);
        (0..1u64 << k).map(Marks)
    }
}

/// A single evaluation point of the generalized Hamming cross-correlation.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct CorrelationQuery {
    pub subset: Vec<usize>,
    pub marks: Marks,
    pub shifts: Vec<i64>,
}

impl CorrelationQuery {
    pub fn new(subset: Vec<usize>, marks: &[u8], shifts: Vec<i64>) -> Self {
        CorrelationQuery {
            subset,
            marks: Marks::from_bits(marks),
            shifts,
        }
    }

    pub fn validate(&self, set: &SequenceSet) -> Result<(), CorrError> {
        validate_subset(set, &self.subset)?;
        if self.shifts.len() != self.subset.len() {
            return Err(CorrError::InvalidQuery(format!(
                "{} shifts for a subset of size {}",
                self.shifts.len(),
                self.subset.len()
            )));
        }
        Ok(())
    }
}

/// Relative shifts of all `M` users, each in `[0, L)`.
#[derive(Clone, PartialEq, Eq, Hash, Debug, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ShiftVector(pub Vec<usize>);

impl ShiftVector {
    pub fn new(taus: &[i64], period: usize) -> Self {
        ShiftVector(
            taus.iter()
                .map(|&t| t.rem_euclid(period as i64) as usize)
                .collect(),
        )
    }

    pub fn zeros(m: usize) -> Self {
        ShiftVector(vec![0; m])
    }
}

fn validate_subset(set: &SequenceSet, subset: &[usize]) -> Result<(), CorrError> {
    if subset.len() > 63 {
        return Err(CorrError::InvalidQuery("subset larger than 63".into()));
    }
    for (j, &i) in subset.iter().enumerate() {
        if i >= set.len() {
            return Err(CorrError::InvalidQuery(format!(
                "user index {i} out of range for {} users",
                set.len()
            )));
        }
        if subset[..j].contains(&i) {
            return Err(CorrError::InvalidQuery(format!("user index {i} repeated")));
        }
    }
    Ok(())
}

/// Precomputed packed cyclic shifts of every sequence in a set.
pub struct Correlator<'a> {
    set: &'a SequenceSet,
    words: usize,
    tail_mask: u64,
    table: Vec<u64>,
}

impl<'a> Correlator<'a> {
    pub fn new(set: &'a SequenceSet) -> Self {
        let period = set.period();
        let words = period.div_ceil(64);
        let tail_bits = period - (words - 1) * 64;
        let tail_mask = if tail_bits == 64 {
            u64::MAX
        } else {
            (1u64 << tail_bits) - 1
        };
        let mut table = vec![0u64; set.len() * period * words];
        for (i, seq) in set.sequences().iter().enumerate() {
            for tau in 0..period {
                let start = (i * period + tau) * words;
                seq.cyclic_shift(tau as i64)
                    .write_words(&mut table[start..start + words]);
            }
        }
        Correlator {
            set,
            words,
            tail_mask,
            table,
        }
    }

    pub fn set(&self) -> &SequenceSet {
        self.set
    }

    fn row(&self, user: usize, tau: usize) -> &[u64] {
        let start = (user * self.set.period() + tau) * self.words;
        &self.table[start..start + self.words]
    }

    /// `H(b_A; tau_A; A)`. Shifts must already lie in `[0, L)`.
    pub fn correlation(&self, subset: &[usize], marks: Marks, shifts: &[usize]) -> usize {
        debug_assert_eq!(subset.len(), shifts.len());
        let mut total = 0;
        for w in 0..self.words {
            let mut acc = if w + 1 == self.words {
                self.tail_mask
            } else {
                u64::MAX
            };
            for (j, (&user, &tau)) in subset.iter().zip(shifts).enumerate() {
                let word = self.row(user, tau)[w];
                acc &= if marks.bit(j) { word } else { !word };
                if acc == 0 {
                    break;
                }
            }
            total += acc.count_ones() as usize;
        }
        total
    }

    /// Checked variant of [`Correlator::correlation`]; shifts are reduced
    /// modulo `L`.
    pub fn query(&self, query: &CorrelationQuery) -> Result<usize, CorrError> {
        query.validate(self.set)?;
        let shifts: Vec<usize> = ShiftVector::new(&query.shifts, self.set.period()).0;
        Ok(self.correlation(&query.subset, query.marks, &shifts))
    }
}

/// `H(b_A; tau_A; A)` for a single query.
pub fn cross_correlation(set: &SequenceSet, query: &CorrelationQuery) -> Result<usize, CorrError> {
    Correlator::new(set).query(query)
}

/// How exhaustive checks are bounded.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CheckOptions {
    /// Maximum number of shift tuples (`L^M`) enumerated exhaustively.
    pub budget: u64,
    /// Fallback used only when the budget would be exceeded.
    pub sampling: Option<Sampling>,
}

impl Default for CheckOptions {
    fn default() -> Self {
        CheckOptions {
            budget: DEFAULT_WORK_BUDGET,
            sampling: None,
        }
    }
}

impl CheckOptions {
    fn is_exhaustive(&self, period: usize, m: usize) -> Result<bool, CorrError> {
        let required = saturating_pow(period as u64, m as u32);
        if required <= self.budget {
            Ok(true)
        } else if self.sampling.is_some() {
            Ok(false)
        } else {
            Err(CorrError::BudgetExceeded {
                required,
                budget: self.budget,
            })
        }
    }
}

/// Two shift tuples at which a correlation takes different values.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct SiWitness {
    pub subset: Vec<usize>,
    pub marks: Marks,
    pub reference_shifts: Vec<usize>,
    pub reference_value: usize,
    pub shifts: Vec<usize>,
    pub value: usize,
}

impl<'a> Correlator<'a> {
    /// First shift tuple (in lexicographic order, first coordinate pinned to
    /// zero) where `H(marks; .; subset)` differs from its all-zero value.
    pub fn si_violation(
        &self,
        subset: &[usize],
        marks: Marks,
        exhaustive: bool,
        sampling: Option<Sampling>,
    ) -> Option<SiWitness> {
        let k = subset.len();
        if k <= 1 {
            return None;
        }
        let period = self.set.period();
        let zeros = vec![0usize; k];
        let reference = self.correlation(subset, marks, &zeros);
        let witness = |shifts: &[usize], value| SiWitness {
            subset: subset.to_vec(),
            marks,
            reference_shifts: zeros.clone(),
            reference_value: reference,
            shifts: shifts.to_vec(),
            value,
        };
        let mut shifts = vec![0usize; k];
        if exhaustive {
            let mut found = None;
            crate::for_each_tuple(period, k - 1, |rest| {
                shifts[1..].copy_from_slice(rest);
                let value = self.correlation(subset, marks, &shifts);
                if value != reference {
                    found = Some(witness(&shifts, value));
                    return false;
                }
                true
            });
            found
        } else {
            let sampling = sampling.expect("sampling required for non-exhaustive check");
            let mut rng = ChaCha8Rng::seed_from_u64(sampling.seed);
            for _ in 0..sampling.draws {
                shifts.iter_mut().for_each(|t| *t = rng.gen_range(0..period));
                let value = self.correlation(subset, marks, &shifts);
                if value != reference {
                    return Some(witness(&shifts, value));
                }
            }
            None
        }
    }
}

/// Whether `H(marks; .; subset)` is constant over all shift tuples.
pub fn is_si_for(set: &SequenceSet, subset: &[usize], marks: Marks) -> Result<bool, CorrError> {
    validate_subset(set, subset)?;
    let opts = CheckOptions::default();
    let exhaustive = opts.is_exhaustive(set.period(), subset.len())?;
    Ok(Correlator::new(set)
        .si_violation(subset, marks, exhaustive, opts.sampling)
        .is_none())
}

/// Subsets of `{0..m}` with at least two members, by increasing size and
/// then lexicographically.
fn nontrivial_subsets(m: usize) -> impl Iterator<Item = Vec<usize>> {
    (2..=m).flat_map(move |k| (0..m).combinations(k))
}

/// Searches every subset (all-one marks) for an SI violation. Returns the
/// first witness found, smallest subsets first.
pub fn find_si_violation(
    set: &SequenceSet,
    opts: &CheckOptions,
) -> Result<Option<SiWitness>, CorrError> {
    let exhaustive = opts.is_exhaustive(set.period(), set.len())?;
    let corr = Correlator::new(set);
    Ok(nontrivial_subsets(set.len()).find_map(|subset| {
        corr.si_violation(&subset, Marks::all_ones(subset.len()), exhaustive, opts.sampling)
    }))
}

pub fn is_si_set(set: &SequenceSet) -> Result<bool, CorrError> {
    Ok(find_si_violation(set, &CheckOptions::default())?.is_none())
}

/// Searches the full-set correlations with exactly one `1` mark for a
/// shift-dependent value.
pub fn find_ti_violation(
    set: &SequenceSet,
    opts: &CheckOptions,
) -> Result<Option<SiWitness>, CorrError> {
    let exhaustive = opts.is_exhaustive(set.period(), set.len())?;
    let corr = Correlator::new(set);
    let all: Vec<usize> = (0..set.len()).collect();
    Ok((0..set.len())
        .find_map(|h| corr.si_violation(&all, Marks::single(h), exhaustive, opts.sampling)))
}

pub fn is_ti_set(set: &SequenceSet) -> Result<bool, CorrError> {
    Ok(find_ti_violation(set, &CheckOptions::default())?.is_none())
}

/// Sum of `H(marks; tau_A; subset)` over all `L^|A|` shift tuples compared
/// against `L * prod_j H(b_j; tau_j; {A_j})`. Always true for a correct
/// correlation routine.
pub fn check_shift_sum_identity(set: &SequenceSet, subset: &[usize], marks: Marks) -> Result<bool, CorrError> {
    validate_subset(set, subset)?;
    let period = set.period();
    let required = saturating_pow(period as u64, subset.len() as u32);
    if required > DEFAULT_WORK_BUDGET {
        return Err(CorrError::BudgetExceeded {
            required,
            budget: DEFAULT_WORK_BUDGET,
        });
    }
    let corr = Correlator::new(set);
    let mut lhs: u128 = 0;
    crate::for_each_tuple(period, subset.len(), |shifts| {
        lhs += corr.correlation(subset, marks, shifts) as u128;
        true
    });
    let rhs = subset
        .iter()
        .enumerate()
        .fold(period as u128, |acc, (j, &i)| {
            let w = set.sequence(i).weight();
            acc * if marks.bit(j) { w } else { period - w } as u128
        });
    Ok(lhs == rhs)
}

/// Outcome of checking both sides of the SI characterisation by marks.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct MarkCharacterisationReport {
    /// Full-set marks whose correlation is shift-invariant and positive.
    pub full_set_witness: Option<Marks>,
    /// Every subset correlation under every mark vector is shift-invariant.
    pub all_subsets_invariant: bool,
    pub subset_violation: Option<SiWitness>,
    /// Both conditions hold or both fail.
    pub equivalent: bool,
}

pub fn check_mark_characterisation(set: &SequenceSet, opts: &CheckOptions) -> Result<MarkCharacterisationReport, CorrError> {
    let m = set.len();
    if m > 20 {
        return Err(CorrError::InvalidQuery("too many users for mark enumeration".into()));
    }
    let exhaustive = opts.is_exhaustive(set.period(), m)?;
    let corr = Correlator::new(set);
    let all: Vec<usize> = (0..m).collect();
    let zeros = vec![0usize; m];

    let full_set_witness = Marks::enumerate(m).find(|&marks| {
        corr.correlation(&all, marks, &zeros) > 0
            && corr
                .si_violation(&all, marks, exhaustive, opts.sampling)
                .is_none()
    });

    let subset_violation = nontrivial_subsets(m).find_map(|subset| {
        Marks::enumerate(subset.len())
            .find_map(|marks| corr.si_violation(&subset, marks, exhaustive, opts.sampling))
    });
    let all_subsets_invariant = subset_violation.is_none();

    Ok(MarkCharacterisationReport {
        equivalent: full_set_witness.is_some() == all_subsets_invariant,
        full_set_witness,
        all_subsets_invariant,
        subset_violation,
    })
}

/// For marks `b` and `b'` that differ only at user `flip_user`, checks
/// `H(b) + H(b') = H(b restricted to A \ {flip_user})` at every shift tuple.
pub fn check_complement_identity(
    set: &SequenceSet,
    subset: &[usize],
    marks: Marks,
    flip_user: usize,
    opts: &CheckOptions,
) -> Result<bool, CorrError> {
    validate_subset(set, subset)?;
    let j = subset.iter().position(|&u| u == flip_user).ok_or_else(|| {
        CorrError::InvalidQuery(format!("flip index {flip_user} is not in the subset"))
    })?;
    let period = set.period();
    let exhaustive = opts.is_exhaustive(period, subset.len())?;
    let corr = Correlator::new(set);
    let flipped = marks.flipped(j);
    let mut reduced_subset = subset.to_vec();
    reduced_subset.remove(j);
    let reduced_marks = marks.without(j);
    let mut reduced_shifts = Vec::with_capacity(subset.len());

    let mut holds_at = |shifts: &[usize]| {
        reduced_shifts.clear();
        reduced_shifts.extend_from_slice(shifts);
        reduced_shifts.remove(j);
        corr.correlation(subset, marks, shifts) + corr.correlation(subset, flipped, shifts)
            == corr.correlation(&reduced_subset, reduced_marks, &reduced_shifts)
    };

    let mut ok = true;
    if exhaustive {
        crate::for_each_tuple(period, subset.len(), |shifts| {
            ok = holds_at(shifts);
            ok
        });
    } else {
        let sampling = opts.sampling.expect("non-exhaustive implies sampling");
        let mut rng = ChaCha8Rng::seed_from_u64(sampling.seed);
        let mut shifts = vec![0usize; subset.len()];
        for _ in 0..sampling.draws {
            shifts.iter_mut().for_each(|t| *t = rng.gen_range(0..period));
            if !holds_at(&shifts) {
                return Ok(false);
            }
        }
    }
    Ok(ok)
}

/// On-disk sequence set: `{"period": L, "sequences": [[0,1,...], ...]}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SequenceFile {
    pub period: usize,
    pub sequences: Vec<Vec<u8>>,
}

impl SequenceFile {
    pub fn from_set(set: &SequenceSet) -> Self {
        SequenceFile {
            period: set.period(),
            sequences: set.sequences().iter().map(|s| s.bits().to_vec()).collect(),
        }
    }

    pub fn into_set(self) -> Result<SequenceSet, CorrError> {
        if self.period == 0 {
            return Err(CorrError::File("period must be positive".into()));
        }
        if self.sequences.is_empty() {
            return Err(CorrError::EmptySet);
        }
        for (i, row) in self.sequences.iter().enumerate() {
            if row.len() != self.period {
                return Err(CorrError::File(format!(
                    "row {i} has {} entries, period is {}",
                    row.len(),
                    self.period
                )));
            }
        }
        let seqs = self
            .sequences
            .into_iter()
            .map(BinarySequence::new)
            .collect::<Result<Vec<_>, _>>()?;
        SequenceSet::new(seqs)
    }

    pub fn parse(json: &str) -> Result<SequenceSet, CorrError> {
        let file: SequenceFile =
            serde_json::from_str(json).map_err(|e| CorrError::File(e.to_string()))?;
        file.into_set()
    }

    /// One row per line so that files stay diffable.
    pub fn to_json(&self) -> String {
        let rows = self
            .sequences
            .iter()
            .map(|r| format!("    [{}]", r.iter().join(",")))
            .join(",\n");
        format!(
            "{{\n  \"period\": {},\n  \"sequences\": [\n{}\n  ]\n}}\n",
            self.period, rows
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn example_set() -> SequenceSet {
        SequenceSet::from_rows(&[&[1, 1, 1, 1, 1, 1], &[1, 1, 0, 1, 1, 0], &[1, 0, 1, 0, 1, 0]])
            .unwrap()
    }

    fn pair_set() -> SequenceSet {
        SequenceSet::from_rows(&[&[1, 0], &[1, 0]]).unwrap()
    }

    #[test]
    fn cyclic_shift_examples() {
        let s = BinarySequence::new(vec![1, 0, 1, 0, 1, 0]).unwrap();
        assert_eq!(s.cyclic_shift(0), s);
        assert_eq!(s.cyclic_shift(1).bits(), &[0, 1, 0, 1, 0, 1]);
        let t = BinarySequence::new(vec![1, 1, 0, 1, 1, 0]).unwrap();
        assert_eq!(t.cyclic_shift(6), t);
        assert_eq!(t.cyclic_shift(-1), t.cyclic_shift(5));
    }

    #[test]
    fn rejects_bad_sequences() {
        assert_eq!(BinarySequence::new(vec![]), Err(CorrError::EmptySequence));
        assert_eq!(
            BinarySequence::new(vec![0, 2]),
            Err(CorrError::InvalidBit { index: 1, value: 2 })
        );
        let a = BinarySequence::new(vec![1, 0]).unwrap();
        let b = BinarySequence::new(vec![1, 0, 0]).unwrap();
        assert!(matches!(
            SequenceSet::new(vec![a.clone(), b.clone()]),
            Err(CorrError::PeriodMismatch { index: 1, .. })
        ));
        let set = SequenceSet::expand_to_common_period(vec![a, b]).unwrap();
        assert_eq!(set.period(), 6);
        assert_eq!(set.sequence(0).bits(), &[1, 0, 1, 0, 1, 0]);
        assert_eq!(set.sequence(1).bits(), &[1, 0, 0, 1, 0, 0]);
    }

    #[test]
    fn correlation_examples() {
        let set = example_set();
        let q = CorrelationQuery::new(vec![0, 1, 2], &[1, 1, 1], vec![0, 0, 0]);
        assert_eq!(cross_correlation(&set, &q).unwrap(), 2);
        let corr = Correlator::new(&set);
        let mut values = std::collections::BTreeSet::new();
        crate::for_each_tuple(6, 3, |t| {
            values.insert(corr.correlation(&[0, 1, 2], Marks::from_bits(&[1, 0, 0]), t));
            true
        });
        assert_eq!(values.into_iter().collect::<Vec<_>>(), vec![1]);
        for (i, w) in set.weights().into_iter().enumerate() {
            let q = CorrelationQuery::new(vec![i], &[1], vec![3]);
            assert_eq!(cross_correlation(&set, &q).unwrap(), w);
        }
    }

    #[test]
    fn invalid_queries() {
        let set = example_set();
        let out_of_range = CorrelationQuery::new(vec![0, 3], &[1, 1], vec![0, 0]);
        assert!(matches!(
            cross_correlation(&set, &out_of_range),
            Err(CorrError::InvalidQuery(_))
        ));
        let repeated = CorrelationQuery::new(vec![1, 1], &[1, 1], vec![0, 0]);
        assert!(cross_correlation(&set, &repeated).is_err());
        let short = CorrelationQuery::new(vec![0, 1], &[1, 1], vec![0]);
        assert!(cross_correlation(&set, &short).is_err());
    }

    #[test]
    fn long_periods_cross_word_boundaries() {
        let bits: Vec<u8> = (0..130).map(|n| u8::from(n % 3 == 0)).collect();
        let other: Vec<u8> = (0..130).map(|n| u8::from(n % 5 != 1)).collect();
        let set = SequenceSet::from_rows(&[&bits, &other]).unwrap();
        let corr = Correlator::new(&set);
        for (t0, t1) in [(0usize, 0usize), (7, 64), (129, 3)] {
            for marks in Marks::enumerate(2) {
                let direct = (0..130i64)
                    .filter(|&n| {
                        set.sequence(0).at(n - t0 as i64) == u8::from(marks.bit(0))
                            && set.sequence(1).at(n - t1 as i64) == u8::from(marks.bit(1))
                    })
                    .count();
                assert_eq!(corr.correlation(&[0, 1], marks, &[t0, t1]), direct);
            }
        }
    }

    #[test]
    fn si_for_examples() {
        let set = example_set();
        assert!(is_si_for(&set, &[1, 2], Marks::all_ones(2)).unwrap());
        let pair = pair_set();
        assert!(!is_si_for(&pair, &[0, 1], Marks::all_ones(2)).unwrap());
        let w = Correlator::new(&pair)
            .si_violation(&[0, 1], Marks::all_ones(2), true, None)
            .unwrap();
        assert_eq!((w.reference_value, w.shifts.clone(), w.value), (1, vec![0, 1], 0));
        assert!(is_si_for(&pair, &[1], Marks::all_ones(1)).unwrap());
    }

    #[test]
    fn si_and_ti_sets() {
        let set = example_set();
        assert!(is_si_set(&set).unwrap());
        assert!(is_ti_set(&set).unwrap());
        let mutated = set
            .with_sequence(1, BinarySequence::new(vec![0, 1, 0, 1, 1, 0]).unwrap())
            .unwrap();
        let w = find_si_violation(&mutated, &CheckOptions::default())
            .unwrap()
            .expect("mutant is not SI");
        assert_ne!(w.reference_value, w.value);
        assert!(!is_ti_set(&pair_set()).unwrap());
        assert!(!is_si_set(&pair_set()).unwrap());
        let single = SequenceSet::from_rows(&[&[1, 0, 0, 1, 1]]).unwrap();
        assert!(is_si_set(&single).unwrap());
        assert!(is_ti_set(&single).unwrap());
    }

    #[test]
    fn budget_refusal_and_sampling() {
        let set = example_set();
        let tight = CheckOptions {
            budget: 100,
            sampling: None,
        };
        assert_eq!(
            find_si_violation(&set, &tight),
            Err(CorrError::BudgetExceeded {
                required: 216,
                budget: 100
            })
        );
        let sampled = CheckOptions {
            budget: 100,
            sampling: Some(Sampling { draws: 500, seed: 7 }),
        };
        assert_eq!(find_si_violation(&set, &sampled).unwrap(), None);
        assert!(find_si_violation(&pair_set(), &sampled).unwrap().is_some());
    }

    #[test]
    fn shift_sum_identity_examples() {
        let set = example_set();
        assert!(check_shift_sum_identity(&set, &[1, 2], Marks::all_ones(2)).unwrap());
        for i in 0..3 {
            assert!(check_shift_sum_identity(&set, &[i], Marks::all_ones(1)).unwrap());
        }
    }

    #[test]
    fn mark_characterisation_examples() {
        let set = example_set();
        let r = check_mark_characterisation(&set, &CheckOptions::default()).unwrap();
        assert_eq!(r.full_set_witness.map(|m| m.to_bits(3)), Some(vec![1, 0, 0]));
        assert!(r.all_subsets_invariant && r.equivalent);

        let r = check_mark_characterisation(&pair_set(), &CheckOptions::default()).unwrap();
        assert_eq!(r.full_set_witness, None);
        assert!(!r.all_subsets_invariant);
        assert!(r.equivalent);

        let single = SequenceSet::from_rows(&[&[1, 1, 1]]).unwrap();
        let r = check_mark_characterisation(&single, &CheckOptions::default()).unwrap();
        assert_eq!(r.full_set_witness, Some(Marks(1)));
        assert!(r.all_subsets_invariant);
    }

    #[test]
    fn complement_identity_examples() {
        let set = example_set();
        let corr = Correlator::new(&set);
        let b = Marks::from_bits(&[1, 1]);
        let b2 = Marks::from_bits(&[1, 0]);
        assert_eq!(corr.correlation(&[1, 2], b, &[0, 0]), 2);
        assert_eq!(corr.correlation(&[1, 2], b2, &[0, 0]), 2);
        assert_eq!(corr.correlation(&[1], Marks(1), &[0]), 4);
        assert!(check_complement_identity(&set, &[1, 2], b, 2, &CheckOptions::default()).unwrap());
        assert!(check_complement_identity(&set, &[0], Marks(1), 0, &CheckOptions::default()).unwrap());
        assert!(check_complement_identity(&set, &[0, 1], b, 2, &CheckOptions::default()).is_err());
    }

    #[test]
    fn marks_helpers() {
        let m = Marks::from_bits(&[1, 0, 1, 1]);
        assert_eq!(m.without(1).to_bits(3), vec![1, 1, 1]);
        assert_eq!(m.without(0).to_bits(3), vec![0, 1, 1]);
        assert_eq!(m.without(3).to_bits(3), vec![1, 0, 1]);
        assert_eq!(m.flipped(1).to_bits(4), vec![1, 1, 1, 1]);
    }

    #[test]
    fn sequence_file_strict_parse() {
        let set = example_set();
        let json = SequenceFile::from_set(&set).to_json();
        assert_eq!(SequenceFile::parse(&json).unwrap(), set);
        assert!(SequenceFile::parse(r#"{"period": 2, "sequences": [[1,2]]}"#).is_err());
        assert!(SequenceFile::parse(r#"{"period": 2, "sequences": [[1,0],[1]]}"#).is_err());
        assert!(SequenceFile::parse(r#"{"period": 2, "sequences": []}"#).is_err());
        assert!(SequenceFile::parse(r#"{"period": 2, "sequences": [[1,0]], "x": 1}"#).is_err());
        assert!(SequenceFile::parse(r#"{"period": 2, "sequences": [[true,false]]}"#).is_err());
        assert!(SequenceFile::parse(r#"{"period": 2, "sequences": [[1.0,0]]}"#).is_err());
    }
}
