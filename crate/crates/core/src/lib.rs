//! Protocol sequences, ideal successive interference cancellation (SIC) and
//! zero-error capacity verification for the slot-synchronous collision
//! channel without feedback.
//!
//! The crate is organised bottom-up:
//!
//! * [`corr`]: binary protocol sequences, generalized Hamming
//!   cross-correlation and the shift-invariance (SI) / throughput-invariance
//!   (TI) checks.
//! * [`construct`]: duty-factor planning from boundary rate vectors and the
//!   recursive minimum-period SI construction.
//! * [`erasure`]: systematic any-`m`-of-`n` erasure code over GF(256).
//! * [`channel`]: slot-level channel simulation, the ideal SIC receiver, the
//!   collision-as-erasure baseline receiver and blind shift identification.
//! * [`verify`]: exhaustive sweeps over every relative shift vector.
//!
//! All rates, duty factors and throughputs are exact [`Rational`]s.

pub mod channel;
pub mod construct;
pub mod corr;
pub mod erasure;
pub mod rational;
pub mod verify;

pub use rational::{parse_rational_list, Rational, RationalError};

/// Default cap on exhaustive enumeration work (shift tuples, SIC runs).
pub const DEFAULT_WORK_BUDGET: u64 = 10_000_000;

/// Environment variable that overrides [`DEFAULT_WORK_BUDGET`].
pub const BUDGET_ENV_VAR: &str = "COLLIDE_SIC_BUDGET";

/// Work budget from `COLLIDE_SIC_BUDGET`, falling back to the default when
/// unset or unparsable.
pub fn work_budget_from_env() -> u64 {
    std::env::var(BUDGET_ENV_VAR)
        .ok()
        .and_then(|v| v.trim().parse().ok())
        .unwrap_or(DEFAULT_WORK_BUDGET)
}

/// Random sampling used in place of exhaustive enumeration when a caller
/// explicitly accepts it. Sampling can only falsify universal properties.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Sampling {
    pub draws: u64,
    pub seed: u64,
}

/// `base^exp`, saturating at `u64::MAX`.
pub(crate) fn saturating_pow(base: u64, exp: u32) -> u64 {
    let mut acc: u64 = 1;
    for _ in 0..exp {
        acc = acc.saturating_mul(base);
    }
    acc
}

/// Iterates every tuple in `[0, radix)^len` in lexicographic order.
pub(crate) fn for_each_tuple(radix: usize, len: usize, mut f: impl FnMut(&[usize]) -> bool) {
    let mut tuple = vec![0usize; len];
    if radix == 0 && len > 0 {
        return;
    }
    loop {
        if !f(&tuple) {
            return;
        }
        let mut k = len;
        loop {
            if k == 0 {
                return;
            }
            k -= 1;
            tuple[k] += 1;
            if tuple[k] < radix {
                break;
            }
            tuple[k] = 0;
        }
    }
}

/// Decodes a lexicographic tuple index into `out` (most significant first).
pub(crate) fn tuple_from_index(mut index: u64, radix: usize, out: &mut [usize]) {
    for slot in out.iter_mut().rev() {
        *slot = (index % radix as u64) as usize;
        index /= radix as u64;
    }
}
