//! Systematic any-`m`-of-`n` erasure coding over GF(256).
//!
//! A block of `m` source packets becomes `n` coded packets; the first `m`
//! coded packets are the source packets themselves and any `m` distinct coded
//! positions recover the block. The generator is `V * V_top^-1` where `V` is
//! the `n x m` Vandermonde matrix on the field points `0, 1, ..., n-1`; every
//! `m` rows of `V` are independent, so every `m` rows of the generator are
//! too. This caps `n` at 255.
//!
//! Symbolic mode carries no payload: decoding succeeds iff at least `m`
//! distinct positions are present, which is exactly the concrete predicate.

use std::collections::BTreeSet;
use std::sync::OnceLock;

use thiserror::Error;

/// Largest block length supported by the byte-alphabet code.
pub const MAX_BLOCK_LEN: usize = 255;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ErasureError {
    #[error("source block length m={m} exceeds coded length n={n}")]
    Parameters { n: usize, m: usize },
    #[error("coded length {0} exceeds the field capacity of {MAX_BLOCK_LEN}")]
    FieldCapacity(usize),
    #[error("packet size must be at least one byte")]
    PacketSize,
    #[error("expected {expected} source packets, got {got}")]
    SourceLength { expected: usize, got: usize },
    #[error("packet of {got} bytes, expected {expected}")]
    PacketLength { expected: usize, got: usize },
    #[error("position {position} out of range for n={n}")]
    Position { position: usize, n: usize },
    #[error("need {needed} distinct coded packets, have {got}")]
    InsufficientPackets { needed: usize, got: usize },
}

mod gf {
    use std::sync::OnceLock;

    /// x^8 + x^4 + x^3 + x^2 + 1
    const POLY: u16 = 0x11d;

    pub struct Tables {
        pub exp: [u8; 512],
        pub log: [u8; 256],
    }

    pub fn tables() -> &'static Tables {
        static TABLES: OnceLock<Tables> = OnceLock::new();
        TABLES.get_or_init(|| {
            let mut exp = [0u8; 512];
            let mut log = [0u8; 256];
            let mut x: u16 = 1;
            for i in 0..255 {
                exp[i] = x as u8;
                log[x as usize] = i as u8;
                x <<= 1;
                if x & 0x100 != 0 {
                    x ^= POLY;
                }
            }
            for i in 255..512 {
                exp[i] = exp[i - 255];
            }
            Tables { exp, log }
        })
    }

    pub fn mul(a: u8, b: u8) -> u8 {
        if a == 0 || b == 0 {
            return 0;
        }
        let t = tables();
        t.exp[t.log[a as usize] as usize + t.log[b as usize] as usize]
    }

    pub fn inv(a: u8) -> u8 {
        assert!(a != 0, "zero has no inverse in GF(256)");
        let t = tables();
        t.exp[255 - t.log[a as usize] as usize]
    }

    pub fn pow(a: u8, e: usize) -> u8 {
        if e == 0 {
            return 1;
        }
        if a == 0 {
            return 0;
        }
        let t = tables();
        t.exp[(t.log[a as usize] as usize * e) % 255]
    }

    /// `dst ^= c * src`, bytewise.
    pub fn mul_add(dst: &mut [u8], c: u8, src: &[u8]) {
        if c == 0 {
            return;
        }
        let t = tables();
        let lc = t.log[c as usize] as usize;
        for (d, &s) in dst.iter_mut().zip(src) {
            if s != 0 {
                *d ^= t.exp[lc + t.log[s as usize] as usize];
            }
        }
    }

    /// Inverts a square row-major matrix; `None` if singular.
    pub fn invert(mut a: Vec<u8>, k: usize) -> Option<Vec<u8>> {
        let mut inv = vec![0u8; k * k];
        for i in 0..k {
            inv[i * k + i] = 1;
        }
        for col in 0..k {
            let pivot = (col..k).find(|&r| a[r * k + col] != 0)?;
            if pivot != col {
                for c in 0..k {
                    a.swap(pivot * k + c, col * k + c);
                    inv.swap(pivot * k + c, col * k + c);
                }
            }
            let scale = self::inv(a[col * k + col]);
            for c in 0..k {
                a[col * k + c] = mul(a[col * k + c], scale);
                inv[col * k + c] = mul(inv[col * k + c], scale);
            }
            for r in 0..k {
                let f = a[r * k + col];
                if r != col && f != 0 {
                    for c in 0..k {
                        a[r * k + c] ^= mul(f, a[col * k + c]);
                        inv[r * k + c] ^= mul(f, inv[col * k + c]);
                    }
                }
            }
        }
        Some(inv)
    }
}

/// `(n, m)` code configuration plus the packet size in bytes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct CodingParams {
    pub n: usize,
    pub m: usize,
    pub packet_size: usize,
}

impl CodingParams {
    pub fn new(n: usize, m: usize, packet_size: usize) -> Result<Self, ErasureError> {
        if m > n {
            return Err(ErasureError::Parameters { n, m });
        }
        if packet_size == 0 {
            return Err(ErasureError::PacketSize);
        }
        Ok(CodingParams { n, m, packet_size })
    }

    /// Bookkeeping-only parameters (no payload size limit on `n`).
    pub fn symbolic(n: usize, m: usize) -> Result<Self, ErasureError> {
        CodingParams::new(n, m, 1)
    }

    /// `(0, 0)`: a user that never transmits.
    pub fn silent() -> Self {
        CodingParams {
            n: 0,
            m: 0,
            packet_size: 1,
        }
    }
}

pub type Packet = Vec<u8>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SourceBlock {
    pub block_id: u64,
    pub packets: Vec<Packet>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CodedPacket {
    pub position: usize,
    pub payload: Packet,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CodedBlock {
    pub block_id: u64,
    pub packets: Vec<CodedPacket>,
}

impl CodedBlock {
    pub fn packet(&self, position: usize) -> &[u8] {
        &self.packets[position].payload
    }
}

/// Encoder/decoder with a precomputed generator matrix.
#[derive(Debug, Clone)]
pub struct ErasureCodec {
    params: CodingParams,
    /// `n x m`, row-major; the top `m x m` block is the identity.
    generator: Vec<u8>,
}

impl ErasureCodec {
    pub fn new(params: CodingParams) -> Result<Self, ErasureError> {
        let CodingParams { n, m, .. } = CodingParams::new(params.n, params.m, params.packet_size)?;
        if n > MAX_BLOCK_LEN {
            return Err(ErasureError::FieldCapacity(n));
        }
        Ok(ErasureCodec {
            params,
            generator: systematic_generator(n, m),
        })
    }

    /// Shared codec for `params`, built once per distinct `(n, m)`.
    pub fn cached(params: CodingParams) -> Result<Self, ErasureError> {
        static CACHE: OnceLock<std::sync::Mutex<std::collections::HashMap<(usize, usize), Vec<u8>>>> =
            OnceLock::new();
        CodingParams::new(params.n, params.m, params.packet_size)?;
        if params.n > MAX_BLOCK_LEN {
            return Err(ErasureError::FieldCapacity(params.n));
        }
        let cache = CACHE.get_or_init(Default::default);
        let generator = cache
            .lock()
            .expect("codec cache poisoned")
            .entry((params.n, params.m))
            .or_insert_with(|| systematic_generator(params.n, params.m))
            .clone();
        Ok(ErasureCodec { params, generator })
    }

    pub fn params(&self) -> CodingParams {
        self.params
    }

    fn row(&self, r: usize) -> &[u8] {
        &self.generator[r * self.params.m..(r + 1) * self.params.m]
    }

    pub fn encode(&self, source: &SourceBlock) -> Result<CodedBlock, ErasureError> {
        let CodingParams { n, m, packet_size } = self.params;
        if source.packets.len() != m {
            return Err(ErasureError::SourceLength {
                expected: m,
                got: source.packets.len(),
            });
        }
        if let Some(p) = source.packets.iter().find(|p| p.len() != packet_size) {
            return Err(ErasureError::PacketLength {
                expected: packet_size,
                got: p.len(),
            });
        }
        let packets = (0..n)
            .map(|position| {
                let payload = if position < m {
                    source.packets[position].clone()
                } else {
                    let mut out = vec![0u8; packet_size];
                    for (&c, src) in self.row(position).iter().zip(&source.packets) {
                        gf::mul_add(&mut out, c, src);
                    }
                    out
                };
                CodedPacket { position, payload }
            })
            .collect();
        Ok(CodedBlock {
            block_id: source.block_id,
            packets,
        })
    }

    /// Regenerates all `n` coded packets after a decode, for cancellation.
    pub fn reencode_from_source(&self, source: &SourceBlock) -> Result<CodedBlock, ErasureError> {
        self.encode(source)
    }

    /// Recovers the source block from any `m` distinct positions. Extra
    /// packets are ignored; the lowest `m` distinct positions are used.
    pub fn decode(
        &self,
        block_id: u64,
        received: &[(usize, &[u8])],
    ) -> Result<SourceBlock, ErasureError> {
        let CodingParams { n, m, packet_size } = self.params;
        let mut chosen: Vec<(usize, &[u8])> = Vec::with_capacity(m);
        let mut seen = BTreeSet::new();
        let mut sorted = received.to_vec();
        sorted.sort_by_key(|(p, _)| *p);
        for (position, payload) in sorted {
            if position >= n {
                return Err(ErasureError::Position { position, n });
            }
            if payload.len() != packet_size {
                return Err(ErasureError::PacketLength {
                    expected: packet_size,
                    got: payload.len(),
                });
            }
            if seen.insert(position) && chosen.len() < m {
                chosen.push((position, payload));
            }
        }
        if chosen.len() < m {
            return Err(ErasureError::InsufficientPackets {
                needed: m,
                got: seen.len(),
            });
        }
        if chosen.iter().enumerate().all(|(i, (p, _))| i == *p) {
            return Ok(SourceBlock {
                block_id,
                packets: chosen.iter().map(|(_, d)| d.to_vec()).collect(),
            });
        }
        let sub: Vec<u8> = chosen
            .iter()
            .flat_map(|(p, _)| self.row(*p).iter().copied())
            .collect();
        let inv = gf::invert(sub, m).expect("any m generator rows are independent");
        let packets = (0..m)
            .map(|j| {
                let mut out = vec![0u8; packet_size];
                for (k, (_, data)) in chosen.iter().enumerate() {
                    gf::mul_add(&mut out, inv[j * m + k], data);
                }
                out
            })
            .collect();
        Ok(SourceBlock { block_id, packets })
    }

    /// Payload-free decode: the `m` lowest distinct positions on success.
    pub fn decode_symbolic(&self, positions: &[usize]) -> Result<Vec<usize>, ErasureError> {
        decode_symbolic(self.params, positions)
    }
}

fn systematic_generator(n: usize, m: usize) -> Vec<u8> {
    if m == 0 {
        return Vec::new();
    }
    let vander = |r: usize| (0..m).map(move |c| gf::pow(r as u8, c));
    let top: Vec<u8> = (0..m).flat_map(vander).collect();
    let top_inv = gf::invert(top, m).expect("Vandermonde on distinct points is invertible");
    let mut generator = vec![0u8; n * m];
    for r in 0..n {
        let v: Vec<u8> = vander(r).collect();
        for c in 0..m {
            generator[r * m + c] = (0..m).fold(0u8, |acc, k| acc ^ gf::mul(v[k], top_inv[k * m + c]));
        }
    }
    generator
}

/// Threshold bookkeeping shared by symbolic receivers.
pub fn decode_symbolic(params: CodingParams, positions: &[usize]) -> Result<Vec<usize>, ErasureError> {
    let distinct: BTreeSet<usize> = positions.iter().copied().collect();
    if let Some(&position) = distinct.iter().find(|&&p| p >= params.n) {
        return Err(ErasureError::Position {
            position,
            n: params.n,
        });
    }
    if distinct.len() < params.m {
        return Err(ErasureError::InsufficientPackets {
            needed: params.m,
            got: distinct.len(),
        });
    }
    Ok(distinct.into_iter().take(params.m).collect())
}

pub fn encode(params: CodingParams, source: &SourceBlock) -> Result<CodedBlock, ErasureError> {
    ErasureCodec::new(params)?.encode(source)
}

pub fn decode(
    params: CodingParams,
    block_id: u64,
    received: &[(usize, &[u8])],
) -> Result<SourceBlock, ErasureError> {
    ErasureCodec::new(params)?.decode(block_id, received)
}

pub fn reencode_from_source(
    params: CodingParams,
    source: &SourceBlock,
) -> Result<CodedBlock, ErasureError> {
    ErasureCodec::new(params)?.reencode_from_source(source)
}
