//! Slot-synchronous collision channel without feedback.
//!
//! Every user is already transmitting when the receiver starts listening at
//! slot 0: user `i` transmits in receiver slot `t` iff
//! `s_i((t - tau_i) mod L) = 1`. Each local period is one block. Block 0 is
//! the one in progress at slot 0, of which only the tail is observed; block
//! `j >= 1` occupies receiver slots `[tau_i + (j-1)L, tau_i + jL)`. The
//! `n_i = w_i` coded packets of a block sit on the ones of the sequence in
//! order. A slot with one contributor is a success, with two or more a
//! collision (everything lost, no capture).
//!
//! The ideal SIC receiver works in rounds. In each round it collects, for
//! every undecoded block, the packets sitting alone in their slot once all
//! previously decoded blocks are removed; every block with at least `m_i`
//! such packets is decoded, regenerated and removed from all of its slots.
//! Rounds repeat until nothing new decodes.
//!
//! With `a` users carrying data, a block is *measured* when `j >= 1`, it
//! starts no earlier than slot `a L` and `a L` more slots follow it inside the
//! horizon. Partly observed blocks at either edge may never decode and then
//! stay as interference; each SIC round reaches back less than one period, so
//! `a L` slots of margin keep measured blocks clear of that. The trailing
//! margin also leaves room for the `k L` delay bound of the `k`-th decoded
//! user. A run succeeds when every measured block of every data-carrying
//! user decodes.
//!
//! In concrete mode each slot carries the XOR of the payloads sent into it.
//! The receiver only reads a slot once it believes a single contributor is
//! left, subtracting the regenerated packets of everything it cancelled, so a
//! wrong cancellation shows up as a payload mismatch.

use std::io::{self, Write};

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corr::{BinarySequence, SequenceSet, ShiftVector};
use crate::erasure::{CodingParams, ErasureCodec, ErasureError, Packet, SourceBlock};
use crate::{saturating_pow, Rational, DEFAULT_WORK_BUDGET};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ChannelError {
    #[error("configuration: {0}")]
    Config(String),
    #[error("user {user} has period {found}, expected {expected}")]
    PeriodMismatch {
        user: usize,
        expected: usize,
        found: usize,
    },
    #[error("horizon of {horizon} slots is too short: need at least {needed}")]
    HorizonTooShort { horizon: usize, needed: usize },
    #[error("blind identification is ambiguous: {} candidate shift vectors", .0.len())]
    Ambiguous(Vec<ShiftVector>),
    #[error("no shift vector reproduces the observed slot pattern")]
    NoCandidate,
    #[error("identification needs {required} candidates, budget is {budget}")]
    BudgetExceeded { required: u64, budget: u64 },
    #[error(transparent)]
    Erasure(#[from] ErasureError),
}

/// One transmitting user: protocol sequence, code and (true) relative shift.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UserConfig {
    pub sequence: BinarySequence,
    pub coding: CodingParams,
    pub shift: usize,
}

impl UserConfig {
    /// `n` is the sequence weight; `m` source packets per block.
    pub fn new(sequence: BinarySequence, m: usize, shift: usize) -> Result<Self, ChannelError> {
        let coding = CodingParams::symbolic(sequence.weight(), m)?;
        if shift >= sequence.period() {
            return Err(ChannelError::Config(format!(
                "shift {shift} outside [0, {})",
                sequence.period()
            )));
        }
        Ok(UserConfig {
            sequence,
            coding,
            shift,
        })
    }

    pub fn with_packet_size(mut self, packet_size: usize) -> Result<Self, ChannelError> {
        self.coding = CodingParams::new(self.coding.n, self.coding.m, packet_size)?;
        Ok(self)
    }
}

/// Users for every sequence of `set` with per-user `m` and shifts.
pub fn users_for(
    set: &SequenceSet,
    source_lengths: &[usize],
    shifts: &[usize],
) -> Result<Vec<UserConfig>, ChannelError> {
    if source_lengths.len() != set.len() || shifts.len() != set.len() {
        return Err(ChannelError::Config(format!(
            "{} users but {} source lengths and {} shifts",
            set.len(),
            source_lengths.len(),
            shifts.len()
        )));
    }
    set.sequences()
        .iter()
        .zip(source_lengths)
        .zip(shifts)
        .map(|((s, &m), &tau)| UserConfig::new(s.clone(), m, tau))
        .collect()
}

/// `m_i = L R_i` for every user, if all are integers.
pub fn source_lengths_for_rates(period: usize, rates: &[Rational]) -> Result<Vec<usize>, ChannelError> {
    rates
        .iter()
        .map(|&r| {
            (r * Rational::from_integer(period as u64))
                .to_integer()
                .map(|m| m as usize)
                .ok_or_else(|| {
                    ChannelError::Config(format!("rate {r} times period {period} is not an integer"))
                })
        })
        .collect()
}

/// Default horizon in periods for `users` users: `2M + 1`, enough for a
/// measured block at every shift vector.
pub fn default_periods(users: usize) -> usize {
    2 * users + 1
}

/// [`default_periods`] in slots.
pub fn default_horizon(period: usize, users: usize) -> usize {
    default_periods(users) * period
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SlotKind {
    Idle,
    Success,
    Collision,
}

impl SlotKind {
    pub fn from_count(contributors: usize) -> SlotKind {
        match contributors {
            0 => SlotKind::Idle,
            1 => SlotKind::Success,
            _ => SlotKind::Collision,
        }
    }
}

/// `(user, block, position)` of one transmitted coded packet.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Contribution {
    pub user: usize,
    pub block: usize,
    pub position: usize,
}

/// Receiver-slot span of one block; `slots[k]` is where position
/// `first_position + k` lands. Positions outside the horizon are absent.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockSpan {
    /// First receiver slot of the block, 0 for the block in progress at slot 0.
    pub start: usize,
    pub first_position: usize,
    pub slots: Vec<usize>,
}

/// Who transmits where, for a given shift vector.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Schedule {
    horizon: usize,
    period: usize,
    shifts: Vec<usize>,
    slot_offsets: Vec<u32>,
    entries: Vec<Contribution>,
    blocks: Vec<Vec<BlockSpan>>,
}

impl Schedule {
    pub fn build(sequences: &[&BinarySequence], shifts: &[usize], horizon: usize) -> Schedule {
        let period = sequences[0].period();
        let mut counts = vec![0u32; horizon + 1];
        let mut blocks = Vec::with_capacity(sequences.len());
        for (seq, &tau) in sequences.iter().zip(shifts) {
            let ones: Vec<usize> = seq.ones().collect();
            let mut spans = Vec::new();
            if !ones.is_empty() {
                // block 0 began before slot 0
                let skipped = ones.iter().take_while(|&&o| o + tau < period).count();
                let slots: Vec<usize> = ones[skipped..]
                    .iter()
                    .map(|o| o + tau - period)
                    .take_while(|&t| t < horizon)
                    .collect();
                for &t in &slots {
                    counts[t + 1] += 1;
                }
                spans.push(BlockSpan {
                    start: 0,
                    first_position: skipped,
                    slots,
                });
                let mut start = tau;
                while start < horizon {
                    let slots: Vec<usize> = ones
                        .iter()
                        .map(|o| start + o)
                        .take_while(|&t| t < horizon)
                        .collect();
                    for &t in &slots {
                        counts[t + 1] += 1;
                    }
                    spans.push(BlockSpan {
                        start,
                        first_position: 0,
                        slots,
                    });
                    start += period;
                }
            }
            blocks.push(spans);
        }
        for t in 0..horizon {
            counts[t + 1] += counts[t];
        }
        let slot_offsets = counts;
        let mut cursor: Vec<u32> = slot_offsets[..horizon].to_vec();
        let placeholder = Contribution {
            user: 0,
            block: 0,
            position: 0,
        };
        let mut entries = vec![placeholder; slot_offsets[horizon] as usize];
        for (user, spans) in blocks.iter().enumerate() {
            for (block, span) in spans.iter().enumerate() {
                for (k, &t) in span.slots.iter().enumerate() {
                    entries[cursor[t] as usize] = Contribution {
                        user,
                        block,
                        position: span.first_position + k,
                    };
                    cursor[t] += 1;
                }
            }
        }
        Schedule {
            horizon,
            period,
            shifts: shifts.to_vec(),
            slot_offsets,
            entries,
            blocks,
        }
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn shifts(&self) -> &[usize] {
        &self.shifts
    }

    pub fn contributors(&self, t: usize) -> &[Contribution] {
        &self.entries[self.slot_offsets[t] as usize..self.slot_offsets[t + 1] as usize]
    }

    pub fn blocks(&self, user: usize) -> &[BlockSpan] {
        &self.blocks[user]
    }

    pub fn kind(&self, t: usize) -> SlotKind {
        SlotKind::from_count(self.contributors(t).len())
    }
}

/// What the receiver observes, plus hidden ground truth for tests.
#[derive(Debug, Clone)]
pub struct ChannelTrace {
    period: usize,
    kinds: Vec<SlotKind>,
    truth: Schedule,
    /// XOR of all payloads sent into each slot (concrete mode).
    signals: Option<Vec<Packet>>,
    /// Source blocks per user and block index (concrete mode).
    sources: Option<Vec<Vec<SourceBlock>>>,
}

impl ChannelTrace {
    pub fn period(&self) -> usize {
        self.period
    }

    pub fn users(&self) -> usize {
        self.truth.blocks.len()
    }

    pub fn horizon(&self) -> usize {
        self.kinds.len()
    }

    pub fn kinds(&self) -> &[SlotKind] {
        &self.kinds
    }

    pub fn is_concrete(&self) -> bool {
        self.signals.is_some()
    }

    /// Hidden contributor list of slot `t`.
    pub fn ground_truth(&self, t: usize) -> &[Contribution] {
        self.truth.contributors(t)
    }

    pub fn truth_schedule(&self) -> &Schedule {
        &self.truth
    }

    /// Received signal of slot `t` (concrete mode).
    pub fn signal(&self, t: usize) -> Option<&[u8]> {
        self.signals.as_ref().map(|s| s[t].as_slice())
    }

    /// Payload of a success slot (concrete mode).
    pub fn success_payload(&self, t: usize) -> Option<&[u8]> {
        (self.kinds[t] == SlotKind::Success)
            .then(|| self.signal(t))
            .flatten()
    }

    pub fn source_block(&self, user: usize, block: usize) -> Option<&SourceBlock> {
        self.sources.as_ref().map(|s| &s[user][block])
    }

    /// Slots `[L, 2L)`: one full period with every user active.
    pub fn steady_state_window(&self) -> Result<(usize, &[SlotKind]), ChannelError> {
        let l = self.period;
        if self.horizon() < 2 * l {
            return Err(ChannelError::HorizonTooShort {
                horizon: self.horizon(),
                needed: 2 * l,
            });
        }
        Ok((l, &self.kinds[l..2 * l]))
    }

    /// JSON lines, one object per slot; `truth` (1-based users) only when
    /// `genie_dump` is set.
    pub fn write_jsonl<W: Write>(&self, mut out: W, genie_dump: bool) -> io::Result<()> {
        #[derive(Serialize)]
        struct Line<'a> {
            t: usize,
            kind: SlotKind,
            #[serde(skip_serializing_if = "Option::is_none")]
            truth: Option<&'a [[usize; 3]]>,
        }
        let mut truth = Vec::new();
        for (t, &kind) in self.kinds.iter().enumerate() {
            truth.clear();
            truth.extend(
                self.ground_truth(t)
                    .iter()
                    .map(|c| [c.user + 1, c.block, c.position]),
            );
            let line = Line {
                t,
                kind,
                truth: genie_dump.then_some(truth.as_slice()),
            };
            serde_json::to_writer(&mut out, &line)?;
            out.write_all(b"\n")?;
        }
        Ok(())
    }
}

fn check_users(users: &[UserConfig]) -> Result<usize, ChannelError> {
    let period = users
        .first()
        .ok_or_else(|| ChannelError::Config("no users".into()))?
        .sequence
        .period();
    for (user, u) in users.iter().enumerate() {
        if u.sequence.period() != period {
            return Err(ChannelError::PeriodMismatch {
                user,
                expected: period,
                found: u.sequence.period(),
            });
        }
        if u.shift >= period {
            return Err(ChannelError::Config(format!(
                "user {user}: shift {} outside [0, {period})",
                u.shift
            )));
        }
        if u.coding.n != u.sequence.weight() {
            return Err(ChannelError::Config(format!(
                "user {user}: n = {} but the sequence weight is {}",
                u.coding.n,
                u.sequence.weight()
            )));
        }
    }
    Ok(period)
}

/// Symbolic trace over `horizon` receiver slots.
pub fn simulate_trace(users: &[UserConfig], horizon: usize) -> Result<ChannelTrace, ChannelError> {
    let period = check_users(users)?;
    if horizon < period {
        return Err(ChannelError::HorizonTooShort {
            horizon,
            needed: period,
        });
    }
    let seqs: Vec<&BinarySequence> = users.iter().map(|u| &u.sequence).collect();
    let shifts: Vec<usize> = users.iter().map(|u| u.shift).collect();
    let truth = Schedule::build(&seqs, &shifts, horizon);
    let kinds = (0..horizon).map(|t| truth.kind(t)).collect();
    Ok(ChannelTrace {
        period,
        kinds,
        truth,
        signals: None,
        sources: None,
    })
}

/// Trace with real payloads: every block carries seeded random source
/// packets encoded with the user's code.
pub fn simulate_trace_concrete(
    users: &[UserConfig],
    horizon: usize,
    seed: u64,
) -> Result<ChannelTrace, ChannelError> {
    let mut trace = simulate_trace(users, horizon)?;
    let packet_size = users.iter().map(|u| u.coding.packet_size).max().unwrap_or(1);
    if users.iter().any(|u| u.coding.packet_size != packet_size) {
        return Err(ChannelError::Config(
            "all users need the same packet size in concrete mode".into(),
        ));
    }
    let mut signals = vec![vec![0u8; packet_size]; horizon];
    let mut sources = Vec::with_capacity(users.len());
    for (i, user) in users.iter().enumerate() {
        let codec = ErasureCodec::cached(user.coding)?;
        let mut blocks = Vec::new();
        for (j, span) in trace.truth.blocks(i).iter().enumerate() {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(((i as u64) << 32) | j as u64);
            let packets = (0..user.coding.m)
                .map(|_| {
                    let mut p = vec![0u8; user.coding.packet_size];
                    rng.fill_bytes(&mut p);
                    p
                })
                .collect();
            let source = SourceBlock {
                block_id: j as u64,
                packets,
            };
            let coded = codec.encode(&source)?;
            for (k, &t) in span.slots.iter().enumerate() {
                xor_into(&mut signals[t], coded.packet(span.first_position + k));
            }
            blocks.push(source);
        }
        sources.push(blocks);
    }
    trace.signals = Some(signals);
    trace.sources = Some(sources);
    Ok(trace)
}

fn xor_into(dst: &mut [u8], src: &[u8]) {
    for (d, s) in dst.iter_mut().zip(src) {
        *d ^= s;
    }
}

/// How the receiver learns the relative shifts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReceiverMode {
    /// Told the true shifts.
    Genie,
    /// Infers them from one steady-state period of slot kinds.
    Blind,
}

/// One block decode.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecodeEvent {
    pub round: usize,
    pub user: usize,
    pub block: usize,
    /// The `m` positions used, ascending.
    pub positions: Vec<usize>,
    /// Receiver time (end of slot) at which the decode became possible.
    pub decode_time: usize,
    /// Clean packets of the block available in the decode round.
    pub clean_packets: usize,
}

/// Per-user summary over the measured blocks.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct UserOutcome {
    pub measured_blocks: Vec<usize>,
    /// Last round in which a measured block decoded, if all of them did.
    /// Statistics are `None` for users with `m = 0`.
    pub decode_round: Option<usize>,
    /// Clean packet count of the first measured block in its decode round.
    pub t_count: Option<usize>,
    /// Largest `decode_time - block start` over measured blocks.
    pub decode_delay: Option<usize>,
    pub decoded_blocks: usize,
    pub payload_errors: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SicReport {
    pub success: bool,
    pub mode: ReceiverMode,
    /// Shifts the receiver decoded with.
    pub shifts: ShiftVector,
    pub rounds: usize,
    /// Users ordered by the round their measured blocks decoded.
    pub decode_order: Vec<usize>,
    /// `iteration_users[r]` = users whose measured blocks finished in round `r + 1`.
    pub iteration_users: Vec<Vec<usize>>,
    pub users: Vec<UserOutcome>,
    /// Empty unless events were requested.
    pub events: Vec<DecodeEvent>,
}

impl SicReport {
    /// Decoded source packets per slot for each user (`m_i / L` when every
    /// measured block decoded, else zero).
    pub fn achieved_rates(&self, users: &[UserConfig]) -> Vec<Rational> {
        users
            .iter()
            .zip(&self.users)
            .map(|(u, o)| {
                if u.coding.m > 0 && o.decode_round.is_some() && o.payload_errors == 0 {
                    Rational::new(u.coding.m as u64, u.sequence.period() as u64).expect("L > 0")
                } else {
                    Rational::ZERO
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SicOptions {
    pub mode: ReceiverMode,
    pub record_events: bool,
}

impl Default for SicOptions {
    fn default() -> Self {
        SicOptions {
            mode: ReceiverMode::Genie,
            record_events: true,
        }
    }
}

pub fn sic_receive(
    trace: &ChannelTrace,
    users: &[UserConfig],
    mode: ReceiverMode,
) -> Result<SicReport, ChannelError> {
    sic_receive_with(
        trace,
        users,
        SicOptions {
            mode,
            record_events: true,
        },
    )
}

pub fn sic_receive_with(
    trace: &ChannelTrace,
    users: &[UserConfig],
    opts: SicOptions,
) -> Result<SicReport, ChannelError> {
    let period = check_users(users)?;
    if users.len() != trace.users() || period != trace.period() {
        return Err(ChannelError::Config("users do not match the trace".into()));
    }
    let true_shifts: Vec<usize> = users.iter().map(|u| u.shift).collect();
    let owned;
    let schedule = match opts.mode {
        ReceiverMode::Genie => &trace.truth,
        ReceiverMode::Blind => {
            let set = SequenceSet::new(users.iter().map(|u| u.sequence.clone()).collect())
                .map_err(|e| ChannelError::Config(e.to_string()))?;
            let (first, window) = trace.steady_state_window()?;
            let mut candidates = identify_shifts(window, first, &set)?;
            if candidates.len() != 1 {
                return Err(ChannelError::Ambiguous(candidates));
            }
            let shifts = candidates.pop().expect("one candidate").0;
            if shifts == true_shifts {
                &trace.truth
            } else {
                let seqs: Vec<&BinarySequence> = users.iter().map(|u| &u.sequence).collect();
                owned = Schedule::build(&seqs, &shifts, trace.horizon());
                &owned
            }
        }
    };
    run_sic(trace, users, schedule, opts)
}

struct BlockState {
    user: usize,
    block: usize,
    round: usize,
    time: usize,
    clean: usize,
}

fn run_sic(
    trace: &ChannelTrace,
    users: &[UserConfig],
    rx: &Schedule,
    opts: SicOptions,
) -> Result<SicReport, ChannelError> {
    let period = trace.period();
    let horizon = rx.horizon();
    let data_users = users
        .iter()
        .filter(|u| u.coding.m > 0 && u.coding.n > 0)
        .count();
    let mut base = Vec::with_capacity(users.len());
    let mut states = Vec::new();
    for (user, spans) in rx.blocks.iter().enumerate() {
        base.push(states.len());
        states.extend((0..spans.len()).map(|block| BlockState {
            user,
            block,
            round: 0,
            time: 0,
            clean: 0,
        }));
    }
    let flat = |c: &Contribution| base[c.user] + c.block;

    let mut live: Vec<u32> = (0..horizon)
        .map(|t| rx.contributors(t).len() as u32)
        .collect();
    let mut cancel_time = vec![0usize; horizon];
    let mut residual: Option<Vec<Packet>> = trace.signals.clone();
    let codecs = if residual.is_some() {
        Some(
            users
                .iter()
                .map(|u| ErasureCodec::cached(u.coding))
                .collect::<Result<Vec<_>, _>>()?,
        )
    } else {
        None
    };
    let mut payload_errors = vec![0usize; users.len()];
    let mut clean: Vec<Vec<(usize, usize)>> = vec![Vec::new(); states.len()];
    let mut events = Vec::new();
    let mut rounds = 0;

    loop {
        let round = rounds + 1;
        clean.iter_mut().for_each(Vec::clear);
        for t in 0..horizon {
            if live[t] != 1 {
                continue;
            }
            let c = rx
                .contributors(t)
                .iter()
                .find(|c| states[flat(c)].round == 0)
                .expect("one live contributor");
            clean[flat(c)].push(((t + 1).max(cancel_time[t]), c.position));
        }
        let mut decoded_now: Vec<(usize, Option<Vec<u8>>)> = Vec::new();
        for (idx, state) in states.iter_mut().enumerate() {
            if state.round != 0 {
                continue;
            }
            let coding = users[state.user].coding;
            let got = &mut clean[idx];
            if got.len() < coding.m {
                continue;
            }
            got.sort_unstable();
            let span = &rx.blocks[state.user][state.block];
            let used = &got[..coding.m];
            state.round = round;
            state.clean = got.len();
            state.time = used.last().map_or(span.start, |&(avail, _)| avail);
            let mut positions: Vec<usize> = used.iter().map(|&(_, p)| p).collect();
            positions.sort_unstable();

            if let (Some(residual), Some(codecs)) = (residual.as_ref(), codecs.as_ref()) {
                let codec = &codecs[state.user];
                let received: Vec<(usize, &[u8])> = positions
                    .iter()
                    .map(|&p| (p, residual[span.slots[p - span.first_position]].as_slice()))
                    .collect();
                let source = codec.decode(state.block as u64, &received)?;
                if trace.source_block(state.user, state.block) != Some(&source) {
                    payload_errors[state.user] += 1;
                }
                let coded = codec.reencode_from_source(&source)?;
                let flat_packets: Vec<u8> = coded
                    .packets
                    .iter()
                    .skip(span.first_position)
                    .take(span.slots.len())
                    .flat_map(|p| p.payload.iter().copied())
                    .collect();
                decoded_now.push((idx, Some(flat_packets)));
            } else {
                decoded_now.push((idx, None));
            }
            if opts.record_events {
                events.push(DecodeEvent {
                    round,
                    user: state.user,
                    block: state.block,
                    positions,
                    decode_time: state.time,
                    clean_packets: state.clean,
                });
            }
        }
        if decoded_now.is_empty() {
            break;
        }
        rounds = round;
        for (idx, packets) in decoded_now {
            let state = &states[idx];
            let span = &rx.blocks[state.user][state.block];
            let size = users[state.user].coding.packet_size;
            for (k, &t) in span.slots.iter().enumerate() {
                live[t] -= 1;
                cancel_time[t] = cancel_time[t].max(state.time);
                if let (Some(residual), Some(packets)) = (residual.as_mut(), packets.as_ref()) {
                    xor_into(&mut residual[t], &packets[k * size..(k + 1) * size]);
                }
            }
        }
    }

    let mut outcomes = Vec::with_capacity(users.len());
    let mut success = true;
    for (user, cfg) in users.iter().enumerate() {
        let spans = rx.blocks(user);
        let block_states = &states[base[user]..base[user] + spans.len()];
        let measured: Vec<usize> = (1..spans.len())
            .filter(|&j| {
                spans[j].start >= data_users * period
                    && spans[j].start + data_users * period <= horizon
            })
            .collect();
        let carries_data = cfg.coding.m > 0 && cfg.coding.n > 0;
        if carries_data && measured.is_empty() {
            return Err(ChannelError::HorizonTooShort {
                horizon,
                needed: (2 * data_users + 1) * period,
            });
        }
        let all_decoded = carries_data && measured.iter().all(|&j| block_states[j].round != 0);
        let outcome = UserOutcome {
            decode_round: (all_decoded && !measured.is_empty())
                .then(|| measured.iter().map(|&j| block_states[j].round).max())
                .flatten(),
            t_count: measured
                .first()
                .filter(|_| carries_data)
                .filter(|&&j| block_states[j].round != 0)
                .map(|&j| block_states[j].clean),
            decode_delay: all_decoded
                .then(|| {
                    measured
                        .iter()
                        .map(|&j| block_states[j].time - spans[j].start)
                        .max()
                })
                .flatten(),
            decoded_blocks: block_states.iter().filter(|s| s.round != 0).count(),
            payload_errors: payload_errors[user],
            measured_blocks: measured,
        };
        if carries_data && (outcome.decode_round.is_none() || outcome.payload_errors > 0) {
            success = false;
        }
        outcomes.push(outcome);
    }

    let mut order: Vec<(usize, usize)> = outcomes
        .iter()
        .enumerate()
        .filter(|(u, _)| users[*u].coding.m > 0 && users[*u].coding.n > 0)
        .filter_map(|(u, o)| o.decode_round.map(|r| (r, u)))
        .collect();
    order.sort_unstable();
    let max_round = order.last().map_or(0, |&(r, _)| r);
    let mut iteration_users = vec![Vec::new(); max_round];
    for &(r, u) in &order {
        iteration_users[r - 1].push(u);
    }

    Ok(SicReport {
        success,
        mode: opts.mode,
        shifts: ShiftVector(rx.shifts.clone()),
        rounds,
        decode_order: order.into_iter().map(|(_, u)| u).collect(),
        iteration_users,
        users: outcomes,
        events,
    })
}

/// Collision-as-erasure receiver: uncollided packets per user over one
/// steady-state period.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BasicReport {
    pub counts: Vec<usize>,
    pub rates: Vec<Rational>,
}

pub fn basic_receive(trace: &ChannelTrace, users: &[UserConfig]) -> Result<BasicReport, ChannelError> {
    let period = check_users(users)?;
    let (first, window) = trace.steady_state_window()?;
    let mut counts = vec![0usize; users.len()];
    for (k, kind) in window.iter().enumerate() {
        if *kind == SlotKind::Success {
            counts[trace.ground_truth(first + k)[0].user] += 1;
        }
    }
    let rates = counts
        .iter()
        .map(|&c| Rational::new(c as u64, period as u64).expect("L > 0"))
        .collect();
    Ok(BasicReport { counts, rates })
}

/// Every shift vector whose steady-state slot-kind pattern matches `kinds`
/// (the kinds of slots `first_slot .. first_slot + L`), in lexicographic
/// order.
pub fn identify_shifts(
    kinds: &[SlotKind],
    first_slot: usize,
    set: &SequenceSet,
) -> Result<Vec<ShiftVector>, ChannelError> {
    let l = set.period();
    let m = set.len();
    if kinds.len() < l {
        return Err(ChannelError::HorizonTooShort {
            horizon: kinds.len(),
            needed: l,
        });
    }
    let required = saturating_pow(l as u64, m as u32);
    if required > DEFAULT_WORK_BUDGET {
        return Err(ChannelError::BudgetExceeded {
            required,
            budget: DEFAULT_WORK_BUDGET,
        });
    }
    let target: Vec<u8> = kinds[..l]
        .iter()
        .map(|k| match k {
            SlotKind::Idle => 0,
            SlotKind::Success => 1,
            SlotKind::Collision => 2,
        })
        .collect();
    // rows[i][tau][k]: does user i transmit in window slot k under shift tau
    let rows: Vec<Vec<Vec<u8>>> = set
        .sequences()
        .iter()
        .map(|s| {
            (0..l)
                .map(|tau| {
                    (0..l)
                        .map(|k| s.at(first_slot as i64 + k as i64 - tau as i64))
                        .collect()
                })
                .collect()
        })
        .collect();

    let mut found = Vec::new();
    let mut counts = vec![0u8; l];
    let mut shifts = vec![0usize; m];
    search(&rows, &target, 0, &mut counts, &mut shifts, &mut found);
    if found.is_empty() {
        return Err(ChannelError::NoCandidate);
    }
    Ok(found)
}

fn search(
    rows: &[Vec<Vec<u8>>],
    target: &[u8],
    user: usize,
    counts: &mut [u8],
    shifts: &mut [usize],
    found: &mut Vec<ShiftVector>,
) {
    if user == rows.len() {
        if counts.iter().zip(target).all(|(&c, &t)| c.min(2) == t) {
            found.push(ShiftVector(shifts.to_vec()));
        }
        return;
    }
    for (tau, row) in rows[user].iter().enumerate() {
        let mut feasible = true;
        for (k, &b) in row.iter().enumerate() {
            counts[k] = counts[k].saturating_add(b);
            if counts[k] > target[k].max(1) && target[k] < 2 {
                feasible = false;
            }
        }
        if feasible {
            shifts[user] = tau;
            search(rows, target, user + 1, counts, shifts, found);
        }
        for (k, &b) in row.iter().enumerate() {
            counts[k] -= b;
        }
    }
}
