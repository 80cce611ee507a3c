//! Reproducible random streams for the Monte Carlo engine.
//!
//! A stream is fully determined by `(seed, stream_index, generator)`. Two
//! generators are available:
//!
//! * [`GeneratorKind::Counter`]: Philox2x64-10. Block `b` of stream `s` is
//!   the Philox bijection keyed by `seed` applied to the 128-bit counter
//!   `(lo = b, hi = s)`, yielding two 64-bit words emitted low word first.
//!   Distinct streams never share a counter, so they never overlap.
//! * [`GeneratorKind::Mlfg1279`]: multiplicative lagged Fibonacci,
//!   `x_k = x_{k-1279} * x_{k-418} mod 2^64` over odd words. The lag table is
//!   filled from a SplitMix64 sequence started at
//!   `seed ^ mix64(stream_index + 0x9e3779b97f4a7c15)`, each word forced odd,
//!   then 10 * 1279 outputs are discarded. Stream separation is
//!   probabilistic only.
//!
//! Uniforms take the top 53 bits of a word, `(x >> 11) * 2^-53`, redrawing
//! on zero, so they lie in the open interval (0, 1). Normals use Marsaglia's
//! polar method: both deviates of an accepted pair are used, the first
//! returned immediately and the second cached in the stream.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

pub const TRANSFORM_NAME: &str = "polar-marsaglia-pair-cached";

const GOLDEN_GAMMA: u64 = 0x9e37_79b9_7f4a_7c15;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum GeneratorKind {
    #[default]
    Counter,
    Mlfg1279,
}

impl GeneratorKind {
    pub fn name(self) -> &'static str {
        match self {
            GeneratorKind::Counter => "philox2x64-10",
            GeneratorKind::Mlfg1279 => "mlfg-1279",
        }
    }

    /// Lag pair recorded in table metadata; `none` for the counter generator.
    pub fn lag_pair(self) -> &'static str {
        match self {
            GeneratorKind::Counter => "none",
            GeneratorKind::Mlfg1279 => "1279,418",
        }
    }
}

impl fmt::Display for GeneratorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for GeneratorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "counter" | "philox" | "philox2x64-10" => Ok(GeneratorKind::Counter),
            "mlfg" | "mlfg1279" | "mlfg-1279" | "mlfg_1279" => Ok(GeneratorKind::Mlfg1279),
            _ => Err(Error::InvalidConfig(format!("unknown generator `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct StreamSpec {
    pub seed: u64,
    pub stream_index: u64,
    pub generator: GeneratorKind,
}

impl StreamSpec {
    pub fn new(seed: u64, stream_index: u64, generator: GeneratorKind) -> Self {
        StreamSpec {
            seed,
            stream_index,
            generator,
        }
    }
}

/// SplitMix64 output function.
#[inline]
pub(crate) fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

pub(crate) trait WordSource {
    fn next_word(&mut self) -> u64;
}

const PHILOX_M: u64 = 0xd2b7_4407_b1ce_6e93;
const PHILOX_W: u64 = 0x9e37_79b9_7f4a_7c15;

/// Ten rounds of Philox2x64 on `(lo, hi)` under `key`.
#[cfg_attr(not(test), allow(dead_code))]
pub(crate) fn philox2x64_10(key: u64, lo: u64, hi: u64) -> [u64; 2] {
    let (mut c0, mut c1, mut k) = (lo, hi, key);
    for round in 0..10 {
        if round > 0 {
            k = k.wrapping_add(PHILOX_W);
        }
        let prod = (PHILOX_M as u128) * (c0 as u128);
        let (p_hi, p_lo) = ((prod >> 64) as u64, prod as u64);
        c0 = p_hi ^ k ^ c1;
        c1 = p_lo;
    }
    [c0, c1]
}

/// Four consecutive blocks `lo, lo+1, lo+2, lo+3`, computed side by side so
/// the multiply chains overlap.
#[inline]
fn philox2x64_10_x4(key: u64, lo: u64, hi: u64) -> [u64; 8] {
    let mut c0 = [
        lo,
        lo.wrapping_add(1),
        lo.wrapping_add(2),
        lo.wrapping_add(3),
    ];
    let mut c1 = [hi; 4];
    let mut k = key;
    for round in 0..10 {
        if round > 0 {
            k = k.wrapping_add(PHILOX_W);
        }
        for lane in 0..4 {
            let prod = (PHILOX_M as u128) * (c0[lane] as u128);
            c0[lane] = ((prod >> 64) as u64) ^ k ^ c1[lane];
            c1[lane] = prod as u64;
        }
    }
    [c0[0], c1[0], c0[1], c1[1], c0[2], c1[2], c0[3], c1[3]]
}

const COUNTER_BATCH: usize = 8;

#[derive(Debug, Clone)]
pub(crate) struct CounterWords {
    key: u64,
    stream: u64,
    block: u64,
    buf: [u64; COUNTER_BATCH],
    pos: usize,
}

impl CounterWords {
    fn new(seed: u64, stream_index: u64) -> Self {
        CounterWords {
            key: seed,
            stream: stream_index,
            block: 0,
            buf: [0; COUNTER_BATCH],
            pos: COUNTER_BATCH,
        }
    }
}

impl WordSource for CounterWords {
    #[inline]
    fn next_word(&mut self) -> u64 {
        if self.pos == COUNTER_BATCH {
            self.buf = philox2x64_10_x4(self.key, self.block, self.stream);
            self.block = self.block.wrapping_add(4);
            self.pos = 0;
        }
        let w = self.buf[self.pos];
        self.pos += 1;
        w
    }
}

pub(crate) const MLFG_LONG_LAG: usize = 1279;
pub(crate) const MLFG_SHORT_LAG: usize = 418;
const MLFG_WARMUP: usize = 10 * MLFG_LONG_LAG;

#[derive(Clone)]
pub(crate) struct MlfgWords {
    lags: Box<[u64; MLFG_LONG_LAG]>,
    pos: usize,
}

impl fmt::Debug for MlfgWords {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MlfgWords").field("pos", &self.pos).finish()
    }
}

impl MlfgWords {
    fn new(seed: u64, stream_index: u64) -> Self {
        let mut lags = Box::new([0u64; MLFG_LONG_LAG]);
        let mut state = seed ^ mix64(stream_index.wrapping_add(GOLDEN_GAMMA));
        for slot in lags.iter_mut() {
            state = state.wrapping_add(GOLDEN_GAMMA);
            *slot = mix64(state) | 1;
        }
        let mut words = MlfgWords { lags, pos: 0 };
        for _ in 0..MLFG_WARMUP {
            words.next_word();
        }
        words
    }

    #[cfg(test)]
    fn lag_table(&self) -> &[u64] {
        &self.lags[..]
    }
}

impl WordSource for MlfgWords {
    #[inline]
    fn next_word(&mut self) -> u64 {
        // lags[pos] holds x_{k-1279}; x_{k-418} sits 1279 - 418 slots ahead.
        let mut partner = self.pos + (MLFG_LONG_LAG - MLFG_SHORT_LAG);
        if partner >= MLFG_LONG_LAG {
            partner -= MLFG_LONG_LAG;
        }
        let x = self.lags[self.pos].wrapping_mul(self.lags[partner]);
        self.lags[self.pos] = x;
        self.pos += 1;
        if self.pos == MLFG_LONG_LAG {
            self.pos = 0;
        }
        x
    }
}

const INV_2_53: f64 = 1.0 / (1u64 << 53) as f64;

#[derive(Debug, Clone)]
pub(crate) struct Deviates<W> {
    words: W,
    cached: Option<f64>,
}

impl<W: WordSource> Deviates<W> {
    fn new(words: W) -> Self {
        Deviates {
            words,
            cached: None,
        }
    }

    #[inline]
    fn uniform(&mut self) -> f64 {
        loop {
            let top = self.words.next_word() >> 11;
            if top != 0 {
                return top as f64 * INV_2_53;
            }
        }
    }

    #[inline]
    fn normal(&mut self) -> f64 {
        if let Some(z) = self.cached.take() {
            return z;
        }
        loop {
            let v1 = 2.0 * self.uniform() - 1.0;
            let v2 = 2.0 * self.uniform() - 1.0;
            let s = v1 * v1 + v2 * v2;
            if s < 1.0 && s > 0.0 {
                let f = (-2.0 * s.ln() / s).sqrt();
                self.cached = Some(v2 * f);
                return v1 * f;
            }
        }
    }

    #[inline]
    fn fill_normal(&mut self, out: &mut [f64]) {
        for x in out {
            *x = self.normal();
        }
    }
}

/// One independent random stream. Single-owner; move it between threads
/// freely but do not share it.
#[derive(Debug, Clone)]
pub struct Stream {
    spec: StreamSpec,
    inner: Inner,
}

#[derive(Debug, Clone)]
enum Inner {
    Counter(Deviates<CounterWords>),
    Mlfg(Deviates<MlfgWords>),
}

impl Stream {
    pub fn new(spec: StreamSpec) -> Stream {
        let inner = match spec.generator {
            GeneratorKind::Counter => Inner::Counter(Deviates::new(CounterWords::new(
                spec.seed,
                spec.stream_index,
            ))),
            GeneratorKind::Mlfg1279 => {
                Inner::Mlfg(Deviates::new(MlfgWords::new(spec.seed, spec.stream_index)))
            }
        };
        Stream { spec, inner }
    }

    pub fn spec(&self) -> StreamSpec {
        self.spec
    }

    pub fn next_u64(&mut self) -> u64 {
        match &mut self.inner {
            Inner::Counter(d) => d.words.next_word(),
            Inner::Mlfg(d) => d.words.next_word(),
        }
    }

    /// Uniform deviate in the open interval (0, 1).
    pub fn next_uniform(&mut self) -> f64 {
        match &mut self.inner {
            Inner::Counter(d) => d.uniform(),
            Inner::Mlfg(d) => d.uniform(),
        }
    }

    /// Standard normal deviate.
    pub fn next_normal(&mut self) -> f64 {
        match &mut self.inner {
            Inner::Counter(d) => d.normal(),
            Inner::Mlfg(d) => d.normal(),
        }
    }

    /// Same values as `out.len()` calls to [`Stream::next_normal`].
    pub fn fill_normal(&mut self, out: &mut [f64]) {
        match &mut self.inner {
            Inner::Counter(d) => d.fill_normal(out),
            Inner::Mlfg(d) => d.fill_normal(out),
        }
    }
}

pub fn stream_new(spec: StreamSpec) -> Stream {
    Stream::new(spec)
}
