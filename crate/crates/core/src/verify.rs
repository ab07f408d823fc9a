//! Exhaustive verification over relative shift vectors.
//!
//! A sweep runs the genie SIC receiver for every `tau` in `[0, L)^M` (or a
//! seeded sample when the caller allows it) and merges the per-shift results
//! deterministically: counterexamples are the lexicographically first failing
//! shift vector, and aggregates are order-independent.
//!
//! User numbers in reports are 1-based.

use std::collections::{BTreeMap, BTreeSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::channel::{
    basic_receive, default_horizon, default_periods, identify_shifts, simulate_trace, sic_receive_with,
    source_lengths_for_rates, users_for, ChannelError, ReceiverMode, SicOptions, SicReport,
};
use crate::construct::{
    build_si_set_with, enumerate_plans, ConstructError, FillPolicy, PlanSidecar, RateVector,
};
use crate::corr::{BinarySequence, CorrError, SequenceSet, ShiftVector};
use crate::{saturating_pow, tuple_from_index, Rational, Sampling, DEFAULT_WORK_BUDGET};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum VerifyError {
    #[error("work estimate {required} exceeds budget {budget}")]
    BudgetExceeded { required: u64, budget: u64 },
    #[error("configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Corr(#[from] CorrError),
    #[error(transparent)]
    Construct(#[from] ConstructError),
    #[error(transparent)]
    Channel(#[from] ChannelError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SweepOptions {
    /// Maximum number of shift vectors to enumerate exhaustively.
    pub budget: u64,
    /// Sample instead of refusing when the budget is exceeded.
    pub sampling: Option<Sampling>,
    /// Keep every per-shift outcome in the report.
    pub keep_outcomes: bool,
    /// Horizon in periods; defaults to `2M + 1`.
    pub periods: Option<usize>,
}

impl Default for SweepOptions {
    fn default() -> Self {
        SweepOptions {
            budget: DEFAULT_WORK_BUDGET,
            sampling: None,
            keep_outcomes: false,
            periods: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FailureReason {
    /// Some measured blocks of these users never decoded.
    DecodeFailure { users: Vec<usize> },
    /// Decoded rate differs from the target.
    RateMismatch {
        user: usize,
        expected: Rational,
        achieved: Rational,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Counterexample {
    pub shifts: ShiftVector,
    pub reason: FailureReason,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ShiftOutcome {
    pub shifts: ShiftVector,
    pub success: bool,
    pub decode_order: Vec<usize>,
    pub rounds: usize,
    pub t_counts: Vec<Option<usize>>,
    pub decode_rounds: Vec<Option<usize>>,
    pub decode_delays: Vec<Option<usize>>,
    pub achieved_rates: Vec<Rational>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub failure: Option<FailureReason>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FirstRoundCounts {
    pub user: usize,
    /// Distinct clean-packet counts seen in round 1.
    pub counts: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct VerificationReport {
    pub rates: Vec<Rational>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub plan: Option<PlanSidecar>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sequences: Option<Vec<String>>,
    pub period: usize,
    pub users: usize,
    pub code_lengths: Vec<usize>,
    pub source_lengths: Vec<usize>,
    pub horizon_periods: usize,
    pub exhaustive: bool,
    pub evaluated: u64,
    pub succeeded: u64,
    /// No evaluated shift vector failed.
    pub verdict: bool,
    pub counterexample: Option<Counterexample>,
    /// Distinct decode orders seen over successful runs.
    pub decode_orders: Vec<Vec<usize>>,
    pub first_round_counts: Vec<FirstRoundCounts>,
    /// Every round-1 user had exactly `L R_h` clean packets.
    pub first_round_exact: bool,
    /// Users finishing in round `k` always decoded within `k L` slots.
    pub delay_bound_holds: bool,
    /// Largest decode delay among users finishing in round `k` (index `k-1`).
    pub max_delay_by_round: Vec<usize>,
    /// Exactly one user finished per round in every successful run.
    pub single_user_rounds: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub outcomes: Option<Vec<ShiftOutcome>>,
}

impl VerificationReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

struct SweepContext<'a> {
    set: &'a SequenceSet,
    rates: &'a [Rational],
    sources: Vec<usize>,
    horizon: usize,
}

impl SweepContext<'_> {
    fn evaluate(&self, shifts: &[usize]) -> Result<(ShiftOutcome, SicReport), VerifyError> {
        let users = users_for(self.set, &self.sources, shifts)?;
        let trace = simulate_trace(&users, self.horizon)?;
        let report = sic_receive_with(
            &trace,
            &users,
            SicOptions {
                mode: ReceiverMode::Genie,
                record_events: false,
            },
        )?;
        let achieved = report.achieved_rates(&users);
        let failure = if !report.success {
            let users = users
                .iter()
                .zip(&report.users)
                .enumerate()
                .filter(|(_, (u, o))| u.coding.m > 0 && o.decode_round.is_none())
                .map(|(i, _)| i + 1)
                .collect();
            Some(FailureReason::DecodeFailure { users })
        } else {
            achieved
                .iter()
                .zip(self.rates)
                .position(|(a, r)| a != r)
                .map(|i| FailureReason::RateMismatch {
                    user: i + 1,
                    expected: self.rates[i],
                    achieved: achieved[i],
                })
        };
        let outcome = ShiftOutcome {
            shifts: ShiftVector(shifts.to_vec()),
            success: failure.is_none(),
            decode_order: report.decode_order.iter().map(|u| u + 1).collect(),
            rounds: report.rounds,
            t_counts: report.users.iter().map(|o| o.t_count).collect(),
            decode_rounds: report.users.iter().map(|o| o.decode_round).collect(),
            decode_delays: report.users.iter().map(|o| o.decode_delay).collect(),
            achieved_rates: achieved,
            failure,
        };
        Ok((outcome, report))
    }
}

struct Tally {
    evaluated: u64,
    succeeded: u64,
    first_failure: Option<(u64, Counterexample)>,
    orders: BTreeSet<Vec<usize>>,
    first_round: BTreeMap<usize, BTreeSet<usize>>,
    max_delay_by_round: Vec<usize>,
    first_round_exact: bool,
    delay_bound_holds: bool,
    single_user_rounds: bool,
}

impl Tally {
    fn new() -> Self {
        Tally {
            evaluated: 0,
            succeeded: 0,
            first_failure: None,
            orders: BTreeSet::new(),
            first_round: BTreeMap::new(),
            max_delay_by_round: Vec::new(),
            first_round_exact: true,
            delay_bound_holds: true,
            single_user_rounds: true,
        }
    }

    fn add(mut self, index: u64, outcome: &ShiftOutcome, sources: &[usize], period: usize) -> Self {
        self.evaluated += 1;
        match &outcome.failure {
            None => {
                self.succeeded += 1;
                self.orders.insert(outcome.decode_order.clone());
                let rounds: BTreeSet<_> = outcome
                    .decode_rounds
                    .iter()
                    .zip(sources)
                    .filter(|(_, &m)| m > 0)
                    .map(|(r, _)| r)
                    .collect();
                if rounds.len() != outcome.decode_order.len() {
                    self.single_user_rounds = false;
                }
            }
            Some(reason) => {
                if self.first_failure.as_ref().is_none_or(|(i, _)| index < *i) {
                    self.first_failure = Some((
                        index,
                        Counterexample {
                            shifts: outcome.shifts.clone(),
                            reason: reason.clone(),
                        },
                    ));
                }
            }
        }
        for (user, (&round, &m)) in outcome.decode_rounds.iter().zip(sources).enumerate() {
            if m == 0 {
                continue;
            }
            if round == Some(1) {
                let count = outcome.t_counts[user].unwrap_or(0);
                self.first_round.entry(user + 1).or_default().insert(count);
                if count != m {
                    self.first_round_exact = false;
                }
            }
            if let (Some(round), Some(delay)) = (round, outcome.decode_delays[user]) {
                if delay > round * period {
                    self.delay_bound_holds = false;
                }
                if self.max_delay_by_round.len() < round {
                    self.max_delay_by_round.resize(round, 0);
                }
                let slot = &mut self.max_delay_by_round[round - 1];
                *slot = (*slot).max(delay);
            }
        }
        self
    }

    fn merge(mut self, other: Tally) -> Self {
        self.evaluated += other.evaluated;
        self.succeeded += other.succeeded;
        self.first_failure = match (self.first_failure, other.first_failure) {
            (Some(a), Some(b)) => Some(if a.0 <= b.0 { a } else { b }),
            (a, b) => a.or(b),
        };
        self.orders.extend(other.orders);
        for (user, counts) in other.first_round {
            self.first_round.entry(user).or_default().extend(counts);
        }
        if self.max_delay_by_round.len() < other.max_delay_by_round.len() {
            self.max_delay_by_round.resize(other.max_delay_by_round.len(), 0);
        }
        for (a, b) in self.max_delay_by_round.iter_mut().zip(other.max_delay_by_round) {
            *a = (*a).max(b);
        }
        self.first_round_exact &= other.first_round_exact;
        self.delay_bound_holds &= other.delay_bound_holds;
        self.single_user_rounds &= other.single_user_rounds;
        self
    }
}

/// Shift-vector indices to evaluate: all of them when `L^M` fits the budget,
/// otherwise a sorted, deduplicated seeded sample.
fn plan_indices(period: usize, users: usize, opts: &SweepOptions) -> Result<(u64, Option<Vec<u64>>), VerifyError> {
    let total = saturating_pow(period as u64, users as u32);
    if total <= opts.budget {
        return Ok((total, None));
    }
    match opts.sampling {
        Some(Sampling { draws, seed }) => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let picks: BTreeSet<u64> = (0..draws).map(|_| rng.gen_range(0..total)).collect();
            Ok((total, Some(picks.into_iter().collect())))
        }
        None => Err(VerifyError::BudgetExceeded {
            required: total,
            budget: opts.budget,
        }),
    }
}

fn horizon_for(set: &SequenceSet, opts: &SweepOptions) -> (usize, usize) {
    let periods = opts.periods.unwrap_or_else(|| default_periods(set.len()));
    (periods, periods * set.period())
}

/// Genie SIC over every shift vector, with `m_i = L R_i` source packets per
/// block and `n_i` equal to the sequence weight.
pub fn sweep_all_shifts(
    set: &SequenceSet,
    rates: &[Rational],
    opts: &SweepOptions,
) -> Result<VerificationReport, VerifyError> {
    if rates.len() != set.len() {
        return Err(VerifyError::Config(format!(
            "{} rates for {} sequences",
            rates.len(),
            set.len()
        )));
    }
    let sources = source_lengths_for_rates(set.period(), rates)?;
    let weights = set.weights();
    if let Some(i) = (0..set.len()).find(|&i| sources[i] > weights[i]) {
        return Err(VerifyError::Config(format!(
            "user {}: rate needs {} packets per period but the sequence has weight {}",
            i + 1,
            sources[i],
            weights[i]
        )));
    }
    let (periods, horizon) = horizon_for(set, opts);
    let ctx = SweepContext {
        set,
        rates,
        sources,
        horizon,
    };
    let (period, m) = (set.period(), set.len());
    let (total, sample) = plan_indices(period, m, opts)?;
    // surface configuration errors before going parallel
    ctx.evaluate(&vec![0; m])?;

    let run = |index: u64| -> Result<(u64, ShiftOutcome), VerifyError> {
        let mut shifts = vec![0usize; m];
        tuple_from_index(index, period, &mut shifts);
        Ok((index, ctx.evaluate(&shifts)?.0))
    };
    let fold = |tally: Tally, item: &(u64, ShiftOutcome)| tally.add(item.0, &item.1, &ctx.sources, period);

    let (tally, outcomes) = if opts.keep_outcomes {
        let outcomes: Vec<(u64, ShiftOutcome)> = match &sample {
            None => (0..total).into_par_iter().map(run).collect::<Result<_, _>>()?,
            Some(idx) => idx.par_iter().map(|&i| run(i)).collect::<Result<_, _>>()?,
        };
        let tally = outcomes.iter().fold(Tally::new(), fold);
        (tally, Some(outcomes.into_iter().map(|(_, o)| o).collect()))
    } else {
        let tally = match &sample {
            None => (0..total)
                .into_par_iter()
                .map(run)
                .try_fold(Tally::new, |t, item| item.map(|item| fold(t, &item)))
                .try_reduce(Tally::new, |a, b| Ok(a.merge(b))),
            Some(idx) => idx
                .par_iter()
                .map(|&i| run(i))
                .try_fold(Tally::new, |t, item| item.map(|item| fold(t, &item)))
                .try_reduce(Tally::new, |a, b| Ok(a.merge(b))),
        }?;
        (tally, None)
    };

    Ok(VerificationReport {
        rates: rates.to_vec(),
        plan: None,
        sequences: None,
        period,
        users: m,
        code_lengths: weights,
        source_lengths: ctx.sources.clone(),
        horizon_periods: periods,
        exhaustive: sample.is_none(),
        evaluated: tally.evaluated,
        succeeded: tally.succeeded,
        verdict: tally.first_failure.is_none(),
        counterexample: tally.first_failure.map(|(_, c)| c),
        decode_orders: tally.orders.into_iter().collect(),
        first_round_counts: tally
            .first_round
            .into_iter()
            .map(|(user, counts)| FirstRoundCounts {
                user,
                counts: counts.into_iter().collect(),
            })
            .collect(),
        first_round_exact: tally.first_round_exact,
        delay_bound_holds: tally.delay_bound_holds,
        max_delay_by_round: tally.max_delay_by_round,
        single_user_rounds: tally.single_user_rounds,
        outcomes,
    })
}

/// Plans the rates, builds the minimum-period SI set with the canonical fill
/// and sweeps it.
pub fn achievability_check(
    rates: &RateVector,
    opts: &SweepOptions,
) -> Result<VerificationReport, VerifyError> {
    let plans = enumerate_plans(rates, false)?;
    let plan = plans.first().expect("at least one order");
    let set = build_si_set_with(&plan.duty_factors, FillPolicy::CanonicalLeft)?;
    let mut report = sweep_all_shifts(&set, rates.rates(), opts)?;
    report.plan = Some(PlanSidecar::from(plan));
    report.sequences = Some(set.sequences().iter().map(|s| format!("{s:?}")).collect());
    Ok(report)
}

/// A shift vector under which zero-error decoding at `rates` fails, or
/// `None` if every shift vector succeeds. When the code itself cannot be
/// formed (non-integral `L R_i` or too few ones) every shift vector fails
/// and the all-zero vector is returned.
pub fn necessity_falsifier(
    set: &SequenceSet,
    rates: &RateVector,
    opts: &SweepOptions,
) -> Result<Option<ShiftVector>, VerifyError> {
    rates.require_boundary()?;
    if rates.len() != set.len() {
        return Err(VerifyError::Config(format!(
            "{} rates for {} sequences",
            rates.len(),
            set.len()
        )));
    }
    let (period, m) = (set.period(), set.len());
    let sources = match source_lengths_for_rates(period, rates.rates()) {
        Ok(s) => s,
        Err(_) => return Ok(Some(ShiftVector::zeros(m))),
    };
    if sources.iter().zip(set.weights()).any(|(&s, w)| s > w) {
        return Ok(Some(ShiftVector::zeros(m)));
    }
    let (_, horizon) = horizon_for(set, opts);
    let ctx = SweepContext {
        set,
        rates: rates.rates(),
        sources,
        horizon,
    };
    first_failure(&ctx, opts)
}

fn first_failure(ctx: &SweepContext, opts: &SweepOptions) -> Result<Option<ShiftVector>, VerifyError> {
    let (period, m) = (ctx.set.period(), ctx.set.len());
    let (total, sample) = plan_indices(period, m, opts)?;
    ctx.evaluate(&vec![0; m])?;
    let check = |index: u64| -> Option<ShiftVector> {
        let mut shifts = vec![0usize; m];
        tuple_from_index(index, period, &mut shifts);
        match ctx.evaluate(&shifts) {
            Ok((o, _)) if o.success => None,
            _ => Some(ShiftVector(shifts)),
        }
    };
    Ok(match sample {
        None => (0..total).into_par_iter().find_map_first(check),
        Some(idx) => idx.par_iter().find_map_first(|&i| check(i)),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PeriodSearchOptions {
    pub max_period: usize,
    /// Restrict weight vectors to `L p` for planner duty factors.
    pub prune: bool,
    /// Cap on `sum over L of (#candidate sets) * L^M`.
    pub budget: u64,
    pub periods: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PeriodSummary {
    pub period: usize,
    /// `None` when `L R_i` is not integral for some user.
    pub source_lengths: Option<Vec<usize>>,
    pub weight_vectors: usize,
    pub candidate_sets: u64,
    pub achieving: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PeriodSearchResult {
    pub rates: Vec<Rational>,
    pub max_period: usize,
    pub pruned: bool,
    pub estimated_work: u64,
    pub minimum_period: Option<usize>,
    /// An achieving set at the minimum period, rows as bit strings.
    pub example: Option<Vec<String>>,
    pub periods: Vec<PeriodSummary>,
}

/// `prod C(L, w_i)` summed over the weight vectors.
fn count_sets(period: usize, weight_vectors: &[Vec<usize>]) -> u64 {
    weight_vectors
        .iter()
        .map(|ws| {
            ws.iter()
                .fold(1u64, |acc, &w| acc.saturating_mul(binomial(period as u64, w as u64)))
        })
        .fold(0u64, u64::saturating_add)
}

fn binomial(n: u64, k: u64) -> u64 {
    (0..k).fold(1u64, |acc, i| acc.saturating_mul(n - i) / (i + 1))
}

fn weight_vectors(
    rates: &RateVector,
    period: usize,
    sources: &[usize],
    prune: bool,
) -> Result<Vec<Vec<usize>>, VerifyError> {
    let l = Rational::from_integer(period as u64);
    if prune {
        let set: BTreeSet<Vec<usize>> = enumerate_plans(rates, true)?
            .iter()
            .filter_map(|plan| {
                plan.duty_factors
                    .iter()
                    .map(|&p| (p * l).to_integer().map(|w| w as usize))
                    .collect::<Option<Vec<_>>>()
            })
            .collect();
        return Ok(set.into_iter().collect());
    }
    let mut out = Vec::new();
    crate::for_each_tuple(period + 1, sources.len(), |ws| {
        if ws.iter().zip(sources).all(|(w, m)| w >= m) {
            out.push(ws.to_vec());
        }
        true
    });
    Ok(out)
}

/// Every binary sequence of length `period` and weight `w`, in
/// lexicographic order of their bit vectors (descending).
fn sequences_of_weight(period: usize, w: usize) -> Vec<BinarySequence> {
    let mut out = Vec::new();
    crate::for_each_tuple(2, period, |bits| {
        if period - bits.iter().sum::<usize>() == w {
            let bits: Vec<u8> = bits.iter().map(|&b| 1 - b as u8).collect();
            out.push(BinarySequence::new(bits).expect("binary"));
        }
        true
    });
    out
}

/// Smallest period `L <= max_period` for which some `M`-tuple of period-`L`
/// sequences achieves `rates` at every shift vector.
pub fn min_period_search(
    rates: &RateVector,
    opts: &PeriodSearchOptions,
) -> Result<PeriodSearchResult, VerifyError> {
    rates.require_boundary()?;
    let m = rates.len();
    let mut plan = Vec::new();
    let mut estimated_work = 0u64;
    for period in 1..=opts.max_period {
        let sources = source_lengths_for_rates(period, rates.rates()).ok();
        let ws = match &sources {
            Some(s) => weight_vectors(rates, period, s, opts.prune)?,
            None => Vec::new(),
        };
        let sets = count_sets(period, &ws);
        estimated_work = estimated_work
            .saturating_add(sets.saturating_mul(saturating_pow(period as u64, m as u32)));
        plan.push((period, sources, ws, sets));
    }
    if estimated_work > opts.budget {
        return Err(VerifyError::BudgetExceeded {
            required: estimated_work,
            budget: opts.budget,
        });
    }

    let sweep_opts = SweepOptions {
        budget: u64::MAX,
        periods: opts.periods,
        ..SweepOptions::default()
    };
    let mut periods = Vec::new();
    let mut found: Option<(usize, SequenceSet)> = None;
    for (period, sources, ws, sets) in plan {
        let mut summary = PeriodSummary {
            period,
            source_lengths: sources.clone(),
            weight_vectors: ws.len(),
            candidate_sets: sets,
            achieving: false,
        };
        if let Some(sources) = sources {
            'weights: for weights in &ws {
                let pools: Vec<Vec<BinarySequence>> =
                    weights.iter().map(|&w| sequences_of_weight(period, w)).collect();
                let radices: Vec<usize> = pools.iter().map(Vec::len).collect();
                let mut pick = vec![0usize; m];
                loop {
                    let seqs = pick.iter().zip(&pools).map(|(&k, p)| p[k].clone()).collect();
                    let set = SequenceSet::new(seqs)?;
                    let (_, horizon) = horizon_for(&set, &sweep_opts);
                    let ctx = SweepContext {
                        set: &set,
                        rates: rates.rates(),
                        sources: sources.clone(),
                        horizon,
                    };
                    if first_failure(&ctx, &sweep_opts)?.is_none() {
                        summary.achieving = true;
                        found = Some((period, set));
                        break 'weights;
                    }
                    // mixed-radix increment
                    let mut k = m;
                    loop {
                        if k == 0 {
                            continue 'weights;
                        }
                        k -= 1;
                        pick[k] += 1;
                        if pick[k] < radices[k] {
                            break;
                        }
                        pick[k] = 0;
                    }
                }
            }
        }
        periods.push(summary);
        if found.is_some() {
            break;
        }
    }
    Ok(PeriodSearchResult {
        rates: rates.rates().to_vec(),
        max_period: opts.max_period,
        pruned: opts.prune,
        estimated_work,
        minimum_period: found.as_ref().map(|(p, _)| *p),
        example: found.map(|(_, set)| set.sequences().iter().map(|s| format!("{s:?}")).collect()),
        periods,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BaselineReport {
    pub period: usize,
    pub exhaustive: bool,
    pub evaluated: u64,
    pub duty_factors: Vec<Rational>,
    pub mean: Vec<Rational>,
    pub min: Vec<Rational>,
    pub max: Vec<Rational>,
    /// `p_i prod_{j != i} (1 - p_j)`.
    pub predicted: Vec<Rational>,
    /// Every user's throughput is the same at every shift vector.
    pub constant: bool,
    pub aggregate_mean: Rational,
    pub aggregate_min: Rational,
}

impl BaselineReport {
    pub fn to_csv(&self) -> String {
        let m = self.mean.len();
        let mut out = String::from("statistic");
        for i in 1..=m {
            out.push_str(&format!(",T_{i}"));
        }
        out.push('\n');
        for (name, row) in [
            ("duty_factor", &self.duty_factors),
            ("mean", &self.mean),
            ("min", &self.min),
            ("max", &self.max),
            ("predicted", &self.predicted),
        ] {
            out.push_str(name);
            for v in row {
                out.push_str(&format!(",{}", v.to_f64()));
            }
            out.push('\n');
        }
        out
    }
}

/// Collision-as-erasure throughput `p_i prod_{j != i} (1 - p_j)`.
pub fn predicted_basic_throughput(duty_factors: &[Rational]) -> Vec<Rational> {
    (0..duty_factors.len())
        .map(|i| {
            duty_factors
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .map(|(_, &p)| Rational::ONE - p)
                .fold(duty_factors[i], |acc, x| acc * x)
        })
        .collect()
}

/// `(1 - 1/M)^(M-1)`.
pub fn symmetric_basic_capacity(m: usize) -> Rational {
    let q = Rational::new(1, m as u64).expect("m > 0");
    (Rational::ONE - q).pow(m as u32 - 1)
}

/// Uncollided-packet throughput over every shift vector.
pub fn baseline_throughput(
    set: &SequenceSet,
    opts: &SweepOptions,
) -> Result<BaselineReport, VerifyError> {
    let (period, m) = (set.period(), set.len());
    let (total, sample) = plan_indices(period, m, opts)?;
    let zeros = vec![0usize; m];
    let counts_at = |index: u64| -> Result<Vec<usize>, VerifyError> {
        let mut shifts = vec![0usize; m];
        tuple_from_index(index, period, &mut shifts);
        let users = users_for(set, &zeros, &shifts)?;
        let trace = simulate_trace(&users, 2 * period)?;
        Ok(basic_receive(&trace, &users)?.counts)
    };
    // (shift vectors, per-user sums, per-user min, per-user max, min aggregate)
    type Acc = (u64, Vec<u64>, Vec<usize>, Vec<usize>, usize);
    let init = || -> Acc { (0, vec![0; m], vec![usize::MAX; m], vec![0; m], usize::MAX) };
    let add = |mut acc: Acc, counts: Vec<usize>| -> Acc {
        acc.0 += 1;
        acc.4 = acc.4.min(counts.iter().sum());
        for i in 0..m {
            acc.1[i] += counts[i] as u64;
            acc.2[i] = acc.2[i].min(counts[i]);
            acc.3[i] = acc.3[i].max(counts[i]);
        }
        acc
    };
    let merge = |mut a: Acc, b: Acc| -> Acc {
        a.0 += b.0;
        a.4 = a.4.min(b.4);
        for i in 0..m {
            a.1[i] += b.1[i];
            a.2[i] = a.2[i].min(b.2[i]);
            a.3[i] = a.3[i].max(b.3[i]);
        }
        a
    };
    let (evaluated, sums, mins, maxs, aggregate_min) = match &sample {
        None => (0..total)
            .into_par_iter()
            .map(counts_at)
            .try_fold(init, |acc, c| c.map(|c| add(acc, c)))
            .try_reduce(init, |a, b| Ok(merge(a, b)))?,
        Some(idx) => idx
            .par_iter()
            .map(|&i| counts_at(i))
            .try_fold(init, |acc, c| c.map(|c| add(acc, c)))
            .try_reduce(init, |a, b| Ok(merge(a, b)))?,
    };
    let l = period as u64;
    let per_slot = |c: usize| Rational::new(c as u64, l).expect("L > 0");
    let mean: Vec<Rational> = sums
        .iter()
        .map(|&s| Rational::new(s, l * evaluated).expect("evaluated > 0"))
        .collect();
    let min: Vec<Rational> = mins.iter().map(|&c| per_slot(c)).collect();
    let max: Vec<Rational> = maxs.iter().map(|&c| per_slot(c)).collect();
    let duty_factors = set.duty_factors();
    Ok(BaselineReport {
        period,
        exhaustive: sample.is_none(),
        evaluated,
        predicted: predicted_basic_throughput(&duty_factors),
        constant: mins == maxs,
        aggregate_mean: mean.iter().sum(),
        aggregate_min: per_slot(aggregate_min),
        duty_factors,
        mean,
        min,
        max,
    })
}

/// One point of a capacity region.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CapacityPoint(pub Vec<Rational>);

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RegionBoundary {
    pub users: usize,
    pub resolution: usize,
    /// `(parameter, point)` on the `sum C_i = 1` boundary.
    pub sic: Vec<(Rational, CapacityPoint)>,
    /// `(p_1, point)` on the collision-as-erasure boundary.
    pub basic: Vec<(Rational, CapacityPoint)>,
}

impl RegionBoundary {
    /// `curve,param,C_1..C_M` with floating-point values.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("curve,param");
        for i in 1..=self.users {
            out.push_str(&format!(",C_{i}"));
        }
        out.push('\n');
        for (name, rows) in [("sic", &self.sic), ("basic", &self.basic)] {
            for (param, point) in rows.iter() {
                out.push_str(&format!("{name},{}", param.to_f64()));
                for c in &point.0 {
                    out.push_str(&format!(",{}", c.to_f64()));
                }
                out.push('\n');
            }
        }
        out
    }
}

/// For `M = 2`: the SIC line `(k/r, 1 - k/r)` and the basic curve at
/// `p = (k/r, 1 - k/r)`, `k = 0..=r`. For other `M`: the simplex vertices
/// and the symmetric basic-model point.
pub fn region_boundary(users: usize, resolution: usize) -> Result<RegionBoundary, VerifyError> {
    if users == 0 || resolution == 0 {
        return Err(VerifyError::Config("need at least one user and resolution >= 1".into()));
    }
    let mut sic = Vec::new();
    let mut basic = Vec::new();
    if users == 2 {
        for k in 0..=resolution {
            let a = Rational::new(k as u64, resolution as u64).expect("resolution > 0");
            let b = Rational::ONE - a;
            sic.push((a, CapacityPoint(vec![a, b])));
            basic.push((a, CapacityPoint(predicted_basic_throughput(&[a, b]))));
        }
    } else {
        for i in 0..users {
            let mut v = vec![Rational::ZERO; users];
            v[i] = Rational::ONE;
            sic.push((Rational::from_integer(i as u64), CapacityPoint(v)));
        }
        let p = Rational::new(1, users as u64).expect("users > 0");
        basic.push((p, CapacityPoint(predicted_basic_throughput(&vec![p; users]))));
    }
    Ok(RegionBoundary {
        users,
        resolution,
        sic,
        basic,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct IdentificationReport {
    pub evaluated: u64,
    pub unique: u64,
    /// Unique identifications whose blind SIC report differed from genie.
    pub disagreements: u64,
    pub first_disagreement: Option<ShiftVector>,
}

/// Blind identification over every shift vector; compares blind and genie
/// SIC whenever the candidate is unique.
pub fn identification_sweep(
    set: &SequenceSet,
    rates: &[Rational],
    opts: &SweepOptions,
) -> Result<IdentificationReport, VerifyError> {
    let (period, m) = (set.period(), set.len());
    let sources = source_lengths_for_rates(period, rates)?;
    let total = saturating_pow(period as u64, m as u32);
    if total > opts.budget {
        return Err(VerifyError::BudgetExceeded {
            required: total,
            budget: opts.budget,
        });
    }
    let horizon = opts
        .periods
        .map_or_else(|| default_horizon(period, m), |w| w * period);
    let per_shift = |index: u64| -> Result<(u64, u64, Option<u64>), VerifyError> {
        let mut shifts = vec![0usize; m];
        tuple_from_index(index, period, &mut shifts);
        let users = users_for(set, &sources, &shifts)?;
        let trace = simulate_trace(&users, horizon)?;
        let (first, window) = trace.steady_state_window()?;
        let candidates = identify_shifts(window, first, set)?;
        if candidates.len() != 1 {
            return Ok((1, 0, None));
        }
        let opts = |mode| SicOptions {
            mode,
            record_events: true,
        };
        let genie = sic_receive_with(&trace, &users, opts(ReceiverMode::Genie))?;
        let blind = sic_receive_with(&trace, &users, opts(ReceiverMode::Blind))?;
        let same = SicReport {
            mode: ReceiverMode::Genie,
            ..blind
        } == genie;
        Ok((1, 1, (!same).then_some(index)))
    };
    let (evaluated, unique, first) = (0..total)
        .into_par_iter()
        .map(per_shift)
        .try_reduce(
            || (0, 0, None),
            |a, b| {
                let first = match (a.2, b.2) {
                    (Some(x), Some(y)) => Some(x.min(y)),
                    (x, y) => x.or(y),
                };
                Ok((a.0 + b.0, a.1 + b.1, first))
            },
        )?;
    let disagreements = if first.is_some() {
        // recount precisely; only reached on a bug
        (0..total)
            .into_par_iter()
            .filter(|&i| matches!(per_shift(i), Ok((_, _, Some(_)))))
            .count() as u64
    } else {
        0
    };
    Ok(IdentificationReport {
        evaluated,
        unique,
        disagreements,
        first_disagreement: first.map(|i| {
            let mut shifts = vec![0usize; m];
            tuple_from_index(i, period, &mut shifts);
            ShiftVector(shifts)
        }),
    })
}
