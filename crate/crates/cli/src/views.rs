//! Serializable views of library results. User numbers are 1-based here,
//! shifts and slot indices stay 0-based.

use collide_sic::channel::{BasicReport, DecodeEvent, SicReport, UserConfig};
use collide_sic::corr::{MarkCharacterisationReport, SiWitness};
use collide_sic::Rational;
use serde::Serialize;

fn one_based(users: &[usize]) -> Vec<usize> {
    users.iter().map(|u| u + 1).collect()
}

#[derive(Debug, Serialize)]
pub struct WitnessView {
    pub subset: Vec<usize>,
    pub marks: Vec<u8>,
    pub reference_shifts: Vec<usize>,
    pub reference_value: usize,
    pub shifts: Vec<usize>,
    pub value: usize,
}

impl From<&SiWitness> for WitnessView {
    fn from(w: &SiWitness) -> Self {
        WitnessView {
            subset: one_based(&w.subset),
            marks: w.marks.to_bits(w.subset.len()),
            reference_shifts: w.reference_shifts.clone(),
            reference_value: w.reference_value,
            shifts: w.shifts.clone(),
            value: w.value,
        }
    }
}

#[derive(Debug, Serialize)]
pub struct MarkCharacterisation {
    /// Full-set marks with a positive, shift-independent correlation.
    pub full_set_marks: Option<Vec<u8>>,
    pub all_subsets_invariant: bool,
    pub violation: Option<WitnessView>,
    /// Both conditions agree.
    pub consistent: bool,
}

impl MarkCharacterisation {
    pub fn new(report: &MarkCharacterisationReport, users: usize) -> Self {
        MarkCharacterisation {
            full_set_marks: report.full_set_witness.map(|m| m.to_bits(users)),
            all_subsets_invariant: report.all_subsets_invariant,
            violation: report.subset_violation.as_ref().map(WitnessView::from),
            consistent: report.equivalent,
        }
    }
}

#[derive(Debug, Serialize)]
pub struct CheckReport {
    pub period: usize,
    pub users: usize,
    pub weights: Vec<usize>,
    pub duty_factors: Vec<Rational>,
    pub exhaustive: bool,
    pub shift_invariant: bool,
    pub si_witness: Option<WitnessView>,
    pub throughput_invariant: bool,
    pub ti_witness: Option<WitnessView>,
    /// `None` when the exhaustive sum exceeds the work budget.
    pub shift_sum_identity: Option<bool>,
    pub mark_characterisation: MarkCharacterisation,
}

#[derive(Debug, Serialize)]
pub struct EventView {
    pub round: usize,
    pub user: usize,
    pub block: usize,
    pub positions: Vec<usize>,
    pub decode_time: usize,
    pub clean_packets: usize,
}

impl From<&DecodeEvent> for EventView {
    fn from(e: &DecodeEvent) -> Self {
        EventView {
            round: e.round,
            user: e.user + 1,
            block: e.block,
            positions: e.positions.clone(),
            decode_time: e.decode_time,
            clean_packets: e.clean_packets,
        }
    }
}

#[derive(Debug, Serialize)]
pub struct UserView {
    pub user: usize,
    pub code_length: usize,
    pub source_length: usize,
    pub shift: usize,
    pub measured_blocks: Vec<usize>,
    pub decode_round: Option<usize>,
    pub t_count: Option<usize>,
    pub decode_delay: Option<usize>,
    pub decoded_blocks: usize,
    pub payload_errors: usize,
    pub achieved_rate: Rational,
    pub basic_count: usize,
    pub basic_rate: Rational,
}

#[derive(Debug, Serialize)]
pub struct SimulateReport {
    pub mode: String,
    pub success: bool,
    pub period: usize,
    pub horizon_periods: usize,
    pub concrete: bool,
    pub true_shifts: Vec<usize>,
    pub decoded_shifts: Vec<usize>,
    pub rounds: usize,
    pub decode_order: Vec<usize>,
    pub iteration_users: Vec<Vec<usize>>,
    pub users: Vec<UserView>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub events: Option<Vec<EventView>>,
}

impl SimulateReport {
    pub fn new(
        report: &SicReport,
        basic: &BasicReport,
        users: &[UserConfig],
        horizon_periods: usize,
        concrete: bool,
        with_events: bool,
    ) -> Self {
        let rates = report.achieved_rates(users);
        let user_views = users
            .iter()
            .zip(&report.users)
            .enumerate()
            .map(|(i, (cfg, o))| UserView {
                user: i + 1,
                code_length: cfg.coding.n,
                source_length: cfg.coding.m,
                shift: cfg.shift,
                measured_blocks: o.measured_blocks.clone(),
                decode_round: o.decode_round,
                t_count: o.t_count,
                decode_delay: o.decode_delay,
                decoded_blocks: o.decoded_blocks,
                payload_errors: o.payload_errors,
                achieved_rate: rates[i],
                basic_count: basic.counts[i],
                basic_rate: basic.rates[i],
            })
            .collect();
        SimulateReport {
            mode: mode_name(report),
            success: report.success,
            period: users[0].sequence.period(),
            horizon_periods,
            concrete,
            true_shifts: users.iter().map(|u| u.shift).collect(),
            decoded_shifts: report.shifts.0.clone(),
            rounds: report.rounds,
            decode_order: one_based(&report.decode_order),
            iteration_users: report.iteration_users.iter().map(|r| one_based(r)).collect(),
            users: user_views,
            events: with_events.then(|| report.events.iter().map(EventView::from).collect()),
        }
    }
}

fn mode_name(report: &SicReport) -> String {
    serde_json::to_value(report.mode)
        .ok()
        .and_then(|v| v.as_str().map(str::to_owned))
        .unwrap_or_default()
}

/// Blind receiver could not pin down the shifts.
#[derive(Debug, Serialize)]
pub struct AmbiguousReport {
    pub mode: &'static str,
    pub success: bool,
    pub ambiguous: bool,
    pub true_shifts: Vec<usize>,
    pub candidates: Vec<Vec<usize>>,
}
