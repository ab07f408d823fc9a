//! Duty-factor planning for boundary rate vectors and the recursive
//! minimum-period SI construction.
//!
//! For a rate vector with `sum R = 1` and a decode order `(q_1, ..., q_M)`
//! (`q_1` decodes first) the planner assigns
//!
//! ```text
//! p_{q_k} = R_{q_k} / (1 - sum_{j > k} R_{q_j})
//! ```
//!
//! so that `p_{q_k} * prod_{j > k} (1 - p_{q_j}) = R_{q_k}`. The first user in
//! the order always gets duty factor 1.
//!
//! The construction builds, for duty factors `r_i / d_i` taken in list order,
//! a `(d_1 ... d_{i-1}) x d_i` 0/1 array with exactly `r_i` ones per row, reads
//! it column by column and repeats the result up to the period `d_1 ... d_M`.

use itertools::Itertools;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corr::{find_si_violation, BinarySequence, CheckOptions, CorrError, SequenceSet};
use crate::{saturating_pow, Rational, RationalError};

/// Upper limit on constructed sequence periods.
pub const MAX_CONSTRUCTED_PERIOD: u64 = 1 << 24;

/// Default cap on the number of positive-rate users whose orders are enumerated.
pub const MAX_ENUMERATED_USERS: usize = 10;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConstructError {
    #[error("rates must sum to 1 (got {0})")]
    BoundaryViolation(Rational),
    #[error("rate {0} exceeds 1")]
    RateAboveOne(Rational),
    #[error("decode order is not a permutation of the {0} users")]
    BadPermutation(usize),
    #[error("internal consistency: duty factor {0} exceeds 1")]
    DutyAboveOne(Rational),
    #[error("{users} positive-rate users give {users}! orders; pass an override to enumerate")]
    TooManyPermutations { users: usize },
    #[error("period {0} exceeds the construction limit")]
    PeriodTooLarge(u64),
    #[error("layout: {0}")]
    Layout(String),
    #[error("constructed set failed the SI check (subset {0:?})")]
    NotShiftInvariant(Vec<usize>),
    #[error(transparent)]
    Corr(#[from] CorrError),
    #[error(transparent)]
    Rational(#[from] RationalError),
}

/// Target information rates, one per user.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RateVector(Vec<Rational>);

impl RateVector {
    pub fn new(rates: Vec<Rational>) -> Result<Self, ConstructError> {
        if let Some(&r) = rates.iter().find(|&&r| r > Rational::ONE) {
            return Err(ConstructError::RateAboveOne(r));
        }
        Ok(RateVector(rates))
    }

    pub fn parse(list: &str) -> Result<Self, ConstructError> {
        RateVector::new(crate::parse_rational_list(list)?)
    }

    pub fn rates(&self) -> &[Rational] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn sum(&self) -> Rational {
        self.0.iter().sum()
    }

    /// Errors unless the rates sum to exactly 1.
    pub fn require_boundary(&self) -> Result<(), ConstructError> {
        let sum = self.sum();
        if sum != Rational::ONE {
            return Err(ConstructError::BoundaryViolation(sum));
        }
        Ok(())
    }

    /// Users with a positive rate, ascending.
    pub fn active_users(&self) -> Vec<usize> {
        self.0.iter().positions(|r| !r.is_zero()).collect()
    }

    /// `(1/M, ..., 1/M)`.
    pub fn symmetric(m: usize) -> Self {
        RateVector(vec![Rational::new(1, m as u64).expect("m > 0"); m])
    }
}

/// Duty factors realising a rate vector under a given decode order.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct DutyFactorPlan {
    /// Decode order; `permutation[0]` decodes first.
    pub permutation: Vec<usize>,
    /// Duty factor per user (indexed by user, not by order).
    pub duty_factors: Vec<Rational>,
    /// Product of the reduced duty-factor denominators.
    pub period: u64,
}

/// Exact duty factors for `rates` when users decode in `permutation` order.
pub fn plan_duty_factors(
    rates: &RateVector,
    permutation: &[usize],
) -> Result<DutyFactorPlan, ConstructError> {
    rates.require_boundary()?;
    let m = rates.len();
    if permutation.len() != m || !permutation.iter().copied().sorted().eq(0..m) {
        return Err(ConstructError::BadPermutation(m));
    }
    let r = rates.rates();
    let mut duty = vec![Rational::ZERO; m];
    let mut tail = Rational::ZERO;
    for &user in permutation.iter().rev() {
        if !r[user].is_zero() {
            let remaining = Rational::ONE
                .checked_sub(tail)
                .ok_or(ConstructError::DutyAboveOne(tail))?;
            let p = r[user] / remaining;
            if p > Rational::ONE {
                return Err(ConstructError::DutyAboveOne(p));
            }
            duty[user] = p;
        }
        tail = tail + r[user];
    }
    let period = min_period_bound(&duty);
    Ok(DutyFactorPlan {
        permutation: permutation.to_vec(),
        duty_factors: duty,
        period,
    })
}

/// One plan per order of the positive-rate users (zero-rate users appended
/// in index order), deduplicated by duty-factor vector, sorted by period and
/// then by permutation.
pub fn enumerate_plans(
    rates: &RateVector,
    allow_large: bool,
) -> Result<Vec<DutyFactorPlan>, ConstructError> {
    rates.require_boundary()?;
    let active = rates.active_users();
    if active.len() > MAX_ENUMERATED_USERS && !allow_large {
        return Err(ConstructError::TooManyPermutations {
            users: active.len(),
        });
    }
    let silent: Vec<usize> = (0..rates.len()).filter(|i| !active.contains(i)).collect();
    let mut plans = active
        .iter()
        .copied()
        .permutations(active.len())
        .map(|mut order| {
            order.extend_from_slice(&silent);
            plan_duty_factors(rates, &order)
        })
        .collect::<Result<Vec<_>, _>>()?;
    plans.sort_by(|a, b| {
        a.period
            .cmp(&b.period)
            .then_with(|| a.permutation.cmp(&b.permutation))
    });
    let mut seen = std::collections::HashSet::new();
    plans.retain(|p| seen.insert(p.duty_factors.clone()));
    Ok(plans)
}

/// Product of the reduced denominators; zero duty factors contribute 1.
pub fn min_period_bound(duty_factors: &[Rational]) -> u64 {
    duty_factors
        .iter()
        .filter(|p| !p.is_zero())
        .fold(1u64, |acc, p| acc.saturating_mul(p.denom()))
}

/// How the ones in each row of a construction array are placed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FillPolicy {
    /// Ones in the first `r_i` columns of every row.
    #[default]
    CanonicalLeft,
    /// Uniformly random `r_i`-subsets of columns from a seeded generator.
    SeededRandom(u64),
}

/// The 0/1 array for one user: `rows = d_1 ... d_{i-1}`, `cols = d_i`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GArray {
    pub rows: usize,
    pub cols: usize,
    /// Row-major cells.
    pub cells: Vec<u8>,
}

impl GArray {
    pub fn row(&self, r: usize) -> &[u8] {
        &self.cells[r * self.cols..(r + 1) * self.cols]
    }

    /// Column-by-column reading `[G_1^T G_2^T ... G_d^T]`.
    pub fn column_major(&self) -> Vec<u8> {
        (0..self.cols)
            .flat_map(|c| (0..self.rows).map(move |r| (r, c)))
            .map(|(r, c)| self.cells[r * self.cols + c])
            .collect()
    }
}

/// Per-user arrays for one construction run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConstructionLayout {
    pub arrays: Vec<GArray>,
    pub fill: FillPolicy,
}

impl ConstructionLayout {
    pub fn generate(duty_factors: &[Rational], fill: FillPolicy) -> Result<Self, ConstructError> {
        checked_period(duty_factors)?;
        let mut rng = match fill {
            FillPolicy::SeededRandom(seed) => Some(ChaCha8Rng::seed_from_u64(seed)),
            FillPolicy::CanonicalLeft => None,
        };
        let mut rows = 1usize;
        let mut arrays = Vec::with_capacity(duty_factors.len());
        for p in duty_factors {
            let (r, d) = reduced(p);
            let mut cells = vec![0u8; rows * d];
            for row in 0..rows {
                let line = &mut cells[row * d..(row + 1) * d];
                match rng.as_mut() {
                    None => line[..r].iter_mut().for_each(|c| *c = 1),
                    Some(rng) => {
                        for c in rand::seq::index::sample(rng, d, r) {
                            line[c] = 1;
                        }
                    }
                }
            }
            arrays.push(GArray {
                rows,
                cols: d,
                cells,
            });
            rows *= d;
        }
        Ok(ConstructionLayout { arrays, fill })
    }

    /// Checks shapes and row weights against the duty factors.
    pub fn validate(&self, duty_factors: &[Rational]) -> Result<(), ConstructError> {
        if self.arrays.len() != duty_factors.len() {
            return Err(ConstructError::Layout(format!(
                "{} arrays for {} users",
                self.arrays.len(),
                duty_factors.len()
            )));
        }
        let mut rows = 1usize;
        for (i, (g, p)) in self.arrays.iter().zip(duty_factors).enumerate() {
            let (r, d) = reduced(p);
            if g.rows != rows || g.cols != d || g.cells.len() != rows * d {
                return Err(ConstructError::Layout(format!(
                    "user {i}: expected a {rows}x{d} array, got {}x{}",
                    g.rows, g.cols
                )));
            }
            if g.cells.iter().any(|&c| c > 1) {
                return Err(ConstructError::Layout(format!("user {i}: non-binary cell")));
            }
            if let Some(bad) = (0..rows).find(|&k| g.row(k).iter().filter(|&&c| c == 1).count() != r)
            {
                return Err(ConstructError::Layout(format!(
                    "user {i}: row {bad} does not have exactly {r} ones"
                )));
            }
            rows *= d;
        }
        Ok(())
    }
}

/// `(r, d)` for a reduced duty factor; zero maps to `(0, 1)`.
fn reduced(p: &Rational) -> (usize, usize) {
    if p.is_zero() {
        (0, 1)
    } else {
        (p.numer() as usize, p.denom() as usize)
    }
}

fn checked_period(duty_factors: &[Rational]) -> Result<u64, ConstructError> {
    if duty_factors.is_empty() {
        return Err(ConstructError::Corr(CorrError::EmptySet));
    }
    if let Some(&p) = duty_factors.iter().find(|&&p| p > Rational::ONE) {
        return Err(ConstructError::DutyAboveOne(p));
    }
    let period = min_period_bound(duty_factors);
    if period > MAX_CONSTRUCTED_PERIOD {
        return Err(ConstructError::PeriodTooLarge(period));
    }
    Ok(period)
}

/// Builds the sequences without the post-build SI check.
pub fn build_sequences(
    duty_factors: &[Rational],
    layout: &ConstructionLayout,
) -> Result<SequenceSet, ConstructError> {
    let period = checked_period(duty_factors)? as usize;
    layout.validate(duty_factors)?;
    let seqs = layout
        .arrays
        .iter()
        .map(|g| {
            let row = g.column_major();
            BinarySequence::new(row.repeat(period / row.len()))
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(SequenceSet::new(seqs)?)
}

/// Builds a minimum-period SI set and verifies SI exhaustively when `L^M`
/// fits the default work budget.
pub fn build_si_set(
    duty_factors: &[Rational],
    layout: &ConstructionLayout,
) -> Result<SequenceSet, ConstructError> {
    let set = build_sequences(duty_factors, layout)?;
    let opts = CheckOptions::default();
    if saturating_pow(set.period() as u64, set.len() as u32) <= opts.budget {
        if let Some(w) = find_si_violation(&set, &opts)? {
            return Err(ConstructError::NotShiftInvariant(w.subset));
        }
    }
    Ok(set)
}

/// [`build_si_set`] with a generated layout.
pub fn build_si_set_with(
    duty_factors: &[Rational],
    fill: FillPolicy,
) -> Result<SequenceSet, ConstructError> {
    let layout = ConstructionLayout::generate(duty_factors, fill)?;
    build_si_set(duty_factors, &layout)
}

/// Plan sidecar written next to a constructed sequence file. User numbers
/// are 1-based.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlanSidecar {
    pub permutation: Vec<usize>,
    pub duty_factors: Vec<Rational>,
    pub period: u64,
}

impl From<&DutyFactorPlan> for PlanSidecar {
    fn from(plan: &DutyFactorPlan) -> Self {
        PlanSidecar {
            permutation: plan.permutation.iter().map(|u| u + 1).collect(),
            duty_factors: plan.duty_factors.clone(),
            period: plan.period,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: u64, d: u64) -> Rational {
        Rational::new(n, d).unwrap()
    }

    fn rates(list: &str) -> RateVector {
        RateVector::parse(list).unwrap()
    }

    #[test]
    fn plan_examples() {
        let plan = plan_duty_factors(&rates("1/6,1/3,1/2"), &[0, 1, 2]).unwrap();
        assert_eq!(plan.duty_factors, vec![q(1, 1), q(2, 3), q(1, 2)]);
        assert_eq!(plan.period, 6);

        let plan = plan_duty_factors(&rates("1/3,1/3,1/3"), &[2, 1, 0]).unwrap();
        assert_eq!(plan.duty_factors, vec![q(1, 3), q(1, 2), q(1, 1)]);
        assert_eq!(plan.period, 6);

        let plan = plan_duty_factors(&rates("1,0"), &[0, 1]).unwrap();
        assert_eq!(plan.duty_factors, vec![q(1, 1), q(0, 1)]);
        assert_eq!(plan.period, 1);

        let plan = plan_duty_factors(&rates("1,0"), &[1, 0]).unwrap();
        assert_eq!(plan.duty_factors, vec![q(1, 1), q(0, 1)]);
    }

    #[test]
    fn plan_errors() {
        assert_eq!(
            plan_duty_factors(&rates("1/2,2/3"), &[0, 1]),
            Err(ConstructError::BoundaryViolation(q(7, 6)))
        );
        assert_eq!(
            plan_duty_factors(&rates("1/2,1/2"), &[0, 0]),
            Err(ConstructError::BadPermutation(2))
        );
        assert!(RateVector::parse("3/2,0").is_err());
    }

    #[test]
    fn enumerate_examples() {
        let plans = enumerate_plans(&rates("1/6,1/3,1/2"), false).unwrap();
        assert_eq!(plans.len(), 6);
        assert_eq!(plans[0].period, 6);
        assert_eq!(plans[0].permutation, vec![0, 1, 2]);
        assert_eq!(plans[1].period, 6);
        assert_eq!(plans[1].permutation, vec![1, 0, 2]);
        assert!(plans[2..].iter().all(|p| p.period > 6));

        let plans = enumerate_plans(&RateVector::symmetric(3), false).unwrap();
        assert_eq!(plans.len(), 6);
        assert!(plans.iter().all(|p| p.period == 6));

        let plans = enumerate_plans(&rates("1/2,1/2"), false).unwrap();
        assert_eq!(plans.len(), 2);
        assert!(plans.iter().all(|p| p.period == 2));
    }

    #[test]
    fn enumerate_appends_silent_users() {
        let plans = enumerate_plans(&rates("0,1/2,0,1/2"), false).unwrap();
        assert_eq!(plans.len(), 2);
        assert_eq!(plans[0].permutation, vec![1, 3, 0, 2]);
        assert_eq!(plans[1].permutation, vec![3, 1, 0, 2]);
        assert_eq!(plans[0].duty_factors[0], Rational::ZERO);
    }

    #[test]
    fn enumerate_refuses_many_users() {
        let r = RateVector::symmetric(11);
        assert_eq!(
            enumerate_plans(&r, false),
            Err(ConstructError::TooManyPermutations { users: 11 })
        );
    }

    #[test]
    fn min_period_examples() {
        assert_eq!(min_period_bound(&[q(1, 1), q(2, 3), q(1, 2)]), 6);
        assert_eq!(min_period_bound(&[q(1, 3); 3]), 27);
        assert_eq!(min_period_bound(&[q(1, 1)]), 1);
        assert_eq!(min_period_bound(&[q(0, 1), q(1, 2)]), 2);
    }

    #[test]
    fn canonical_construction_examples() {
        let set = build_si_set_with(&[q(1, 3), q(1, 2), q(1, 1)], FillPolicy::CanonicalLeft).unwrap();
        let rows: Vec<&[u8]> = set.sequences().iter().map(|s| s.bits()).collect();
        assert_eq!(
            rows,
            vec![&[1, 0, 0, 1, 0, 0][..], &[1, 1, 1, 0, 0, 0], &[1, 1, 1, 1, 1, 1]]
        );

        let set = build_si_set_with(&[q(1, 1)], FillPolicy::CanonicalLeft).unwrap();
        assert_eq!(set.sequence(0).bits(), &[1]);

        let set = build_si_set_with(&[q(1, 2), q(1, 2)], FillPolicy::CanonicalLeft).unwrap();
        assert_eq!(set.sequence(0).bits(), &[1, 0, 1, 0]);
        assert_eq!(set.sequence(1).bits(), &[1, 1, 0, 0]);
    }

    #[test]
    fn zero_duty_gives_silent_sequence() {
        let set = build_si_set_with(&[q(0, 1), q(1, 2)], FillPolicy::CanonicalLeft).unwrap();
        assert_eq!(set.period(), 2);
        assert_eq!(set.sequence(0).weight(), 0);
    }

    #[test]
    fn random_fill_keeps_row_weights() {
        let duty = [q(2, 3), q(1, 2), q(3, 4)];
        let layout = ConstructionLayout::generate(&duty, FillPolicy::SeededRandom(9)).unwrap();
        layout.validate(&duty).unwrap();
        let again = ConstructionLayout::generate(&duty, FillPolicy::SeededRandom(9)).unwrap();
        assert_eq!(layout, again);
        let set = build_si_set(&duty, &layout).unwrap();
        assert_eq!(set.period(), 24);
        assert_eq!(set.duty_factors(), duty.to_vec());
    }

    #[test]
    fn bad_layout_rejected() {
        let duty = [q(1, 2), q(1, 2)];
        let mut layout = ConstructionLayout::generate(&duty, FillPolicy::CanonicalLeft).unwrap();
        layout.arrays[1].cells[1] = 1;
        assert!(matches!(build_si_set(&duty, &layout), Err(ConstructError::Layout(_))));
    }

    #[test]
    fn sidecar_is_one_based() {
        let plan = plan_duty_factors(&rates("1/6,1/3,1/2"), &[0, 1, 2]).unwrap();
        let json = serde_json::to_string(&PlanSidecar::from(&plan)).unwrap();
        assert_eq!(
            json,
            r#"{"permutation":[1,2,3],"duty_factors":["1/1","2/3","1/2"],"period":6}"#
        );
    }
}
