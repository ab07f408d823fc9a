//! Brute-force reference implementations used to cross-check the library.
//! Nothing here shares code with the crate under test.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

/// Slots `n` in one period where every `subset[j]`, delayed by `shifts[j]`,
/// carries `marks[j]`.
pub fn naive_correlation(rows: &[Vec<u8>], subset: &[usize], marks: &[u8], shifts: &[usize]) -> usize {
    let l = rows[0].len();
    (0..l)
        .filter(|&n| {
            subset
                .iter()
                .zip(marks)
                .zip(shifts)
                .all(|((&i, &b), &tau)| rows[i][(n + l - tau % l) % l] == b)
        })
        .count()
}

/// Every tuple in `[0, radix)^len`.
pub fn all_tuples(radix: usize, len: usize) -> Vec<Vec<usize>> {
    let mut out = vec![vec![]];
    for _ in 0..len {
        out = out
            .into_iter()
            .flat_map(|t| {
                (0..radix).map(move |x| {
                    let mut t = t.clone();
                    t.push(x);
                    t
                })
            })
            .collect();
    }
    out
}

/// Constant over every shift tuple?
pub fn naive_is_invariant(rows: &[Vec<u8>], subset: &[usize], marks: &[u8]) -> bool {
    let l = rows[0].len();
    let values: BTreeSet<usize> = all_tuples(l, subset.len())
        .iter()
        .map(|s| naive_correlation(rows, subset, marks, s))
        .collect();
    values.len() <= 1
}

pub fn naive_is_si(rows: &[Vec<u8>]) -> bool {
    let m = rows.len();
    (1u32..(1 << m))
        .map(|mask| (0..m).filter(|i| mask >> i & 1 == 1).collect::<Vec<_>>())
        .filter(|s| s.len() >= 2)
        .all(|s| naive_is_invariant(rows, &s, &vec![1; s.len()]))
}

pub fn naive_is_ti(rows: &[Vec<u8>]) -> bool {
    let m = rows.len();
    let all: Vec<usize> = (0..m).collect();
    (0..m).all(|h| {
        let mut marks = vec![0u8; m];
        marks[h] = 1;
        naive_is_invariant(rows, &all, &marks)
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OracleOutcome {
    pub success: bool,
    /// Round in which a user's last measured block decoded.
    pub decode_rounds: Vec<Option<usize>>,
    /// Uncollided packets per user in slots `[L, 2L)`.
    pub basic_counts: Vec<usize>,
}

/// Straightforward SIC on per-slot contributor lists.
///
/// User `i` is already transmitting at slot 0; slot `t` belongs to its block
/// `(t + L - shifts[i]) / L`, so block 0 is cut off at the start and block
/// `b >= 1` starts at `shifts[i] + (b - 1) L`. Position `k` is the `k`-th one
/// of the sequence. Each round removes
/// every block that has at least `m_i` packets alone in a slot. With `a`
/// data users, measured blocks start at or after slot `a L` and end at least
/// `a L` slots before the horizon.
pub fn naive_sic(rows: &[Vec<u8>], m: &[usize], shifts: &[usize], periods: usize) -> OracleOutcome {
    let users = rows.len();
    let l = rows[0].len();
    let horizon = periods * l;
    let mut slots: Vec<Vec<(usize, usize, usize)>> = vec![Vec::new(); horizon];
    let mut blocks: BTreeSet<(usize, usize)> = BTreeSet::new();
    for i in 0..users {
        if rows[i].iter().all(|&b| b == 0) {
            continue;
        }
        for t in 0..horizon {
            let k = (t + l - shifts[i]) % l;
            let b = (t + l - shifts[i]) / l;
            blocks.insert((i, b));
            if rows[i][k] == 1 {
                let pos = rows[i][..k].iter().filter(|&&x| x == 1).count();
                slots[t].push((i, b, pos));
            }
        }
    }
    let mut basic_counts = vec![0usize; users];
    for t in l..2 * l {
        if slots[t].len() == 1 {
            basic_counts[slots[t][0].0] += 1;
        }
    }

    let mut decoded: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    let mut round = 0;
    loop {
        round += 1;
        let mut clean: BTreeMap<(usize, usize), BTreeSet<usize>> = BTreeMap::new();
        for entries in &slots {
            let live: Vec<_> = entries
                .iter()
                .filter(|(u, b, _)| !decoded.contains_key(&(*u, *b)))
                .collect();
            if let [(u, b, p)] = live[..] {
                clean.entry((*u, *b)).or_default().insert(*p);
            }
        }
        let ready: Vec<(usize, usize)> = blocks
            .iter()
            .filter(|key| !decoded.contains_key(key))
            .filter(|&&(u, b)| clean.get(&(u, b)).map_or(0, |s| s.len()) >= m[u])
            .copied()
            .collect();
        if ready.is_empty() {
            break;
        }
        for key in ready {
            decoded.insert(key, round);
        }
    }

    let active = (0..users)
        .filter(|&i| m[i] > 0 && rows[i].contains(&1))
        .count();
    let mut success = true;
    let mut decode_rounds = Vec::with_capacity(users);
    for i in 0..users {
        let measured: Vec<usize> = (1..)
            .take_while(|b| shifts[i] + (b - 1 + active) * l <= horizon)
            .filter(|b| shifts[i] + (b - 1) * l >= active * l)
            .collect();
        let rounds: Option<Vec<usize>> = measured
            .iter()
            .map(|&b| decoded.get(&(i, b)).copied())
            .collect();
        let r = rounds
            .and_then(|r| r.into_iter().max())
            .filter(|_| m[i] > 0);
        if m[i] > 0 && r.is_none() {
            success = false;
        }
        decode_rounds.push(r);
    }
    OracleOutcome {
        success,
        decode_rounds,
        basic_counts,
    }
}

/// Sequences as rows.
pub fn rows_of(set: &collide_sic::corr::SequenceSet) -> Vec<Vec<u8>> {
    set.sequences().iter().map(|s| s.bits().to_vec()).collect()
}
