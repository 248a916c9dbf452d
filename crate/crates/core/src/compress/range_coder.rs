//! Adaptive binary range coder (LZMA-style carry handling, 16-bit probabilities).

const TOP: u32 = 1 << 24;
const PROB_BITS: u32 = 16;
const PROB_INIT: u16 = 1 << (PROB_BITS - 1);
const MOVE_BITS: u32 = 5;

/// Adaptive probability that the next bit is 0, in units of 2^-16.
#[derive(Clone, Copy, Debug)]
pub(crate) struct Prob(u16);

impl Default for Prob {
    fn default() -> Self {
        Prob(PROB_INIT)
    }
}

impl Prob {
    #[inline]
    fn update(&mut self, bit: bool) {
        if bit {
            self.0 -= self.0 >> MOVE_BITS;
        } else {
            self.0 += (((1u32 << PROB_BITS) - u32::from(self.0)) >> MOVE_BITS) as u16;
        }
    }
}

pub(crate) struct Encoder {
    low: u64,
    range: u32,
    cache: u8,
    cache_size: u64,
    out: Vec<u8>,
}

impl Encoder {
    #[cfg(test)]
    pub fn new() -> Self {
        Self::with_output(Vec::new())
    }

    /// Continues an existing buffer (used to place a plain header in front).
    pub fn with_output(out: Vec<u8>) -> Self {
        Encoder {
            low: 0,
            range: u32::MAX,
            cache: 0,
            cache_size: 1,
            out,
        }
    }

    #[inline]
    pub fn encode_bit(&mut self, prob: &mut Prob, bit: bool) {
        let bound = (self.range >> PROB_BITS) * u32::from(prob.0);
        if bit {
            self.low += u64::from(bound);
            self.range -= bound;
        } else {
            self.range = bound;
        }
        prob.update(bit);
        self.normalize();
    }

    /// Equiprobable bits, most significant first.
    pub fn encode_direct(&mut self, value: u32, nbits: u32) {
        for i in (0..nbits).rev() {
            self.range >>= 1;
            if (value >> i) & 1 == 1 {
                self.low += u64::from(self.range);
            }
            self.normalize();
        }
    }

    /// Codes the interval `[start, start + size)` out of `total` (total < 2^16).
    #[cfg_attr(not(feature = "ppm"), allow(dead_code))]
    pub fn encode_freq(&mut self, start: u32, size: u32, total: u32) {
        let r = self.range / total;
        self.low += u64::from(r * start);
        self.range = r * size;
        self.normalize();
    }

    #[inline]
    fn normalize(&mut self) {
        while self.range < TOP {
            self.range <<= 8;
            self.shift_low();
        }
    }

    fn shift_low(&mut self) {
        if (self.low as u32) < 0xFF00_0000 || (self.low >> 32) != 0 {
            let carry = (self.low >> 32) as u8;
            let mut temp = self.cache;
            loop {
                self.out.push(temp.wrapping_add(carry));
                temp = 0xFF;
                self.cache_size -= 1;
                if self.cache_size == 0 {
                    break;
                }
            }
            self.cache = ((self.low >> 24) & 0xFF) as u8;
        }
        self.cache_size += 1;
        self.low = (self.low & 0x00FF_FFFF) << 8;
    }

    pub fn finish(mut self) -> Vec<u8> {
        for _ in 0..5 {
            self.shift_low();
        }
        self.out
    }
}

pub(crate) struct Decoder<'a> {
    input: &'a [u8],
    pos: usize,
    range: u32,
    code: u32,
}

impl<'a> Decoder<'a> {
    pub fn new(input: &'a [u8]) -> Self {
        let mut d = Decoder {
            input,
            pos: 0,
            range: u32::MAX,
            code: 0,
        };
        for _ in 0..5 {
            d.code = (d.code << 8) | u32::from(d.next_byte());
        }
        d
    }

    /// True once the decoder has read more bytes than the input holds.
    pub fn overrun(&self) -> bool {
        self.pos > self.input.len()
    }

    #[inline]
    fn next_byte(&mut self) -> u8 {
        let b = self.input.get(self.pos).copied().unwrap_or(0);
        self.pos += 1;
        b
    }

    #[inline]
    pub fn decode_bit(&mut self, prob: &mut Prob) -> bool {
        let bound = (self.range >> PROB_BITS) * u32::from(prob.0);
        let bit = if self.code < bound {
            self.range = bound;
            false
        } else {
            self.code -= bound;
            self.range -= bound;
            true
        };
        prob.update(bit);
        self.normalize();
        bit
    }

    /// Returns the cumulative frequency the next symbol falls in; follow with
    /// [`Decoder::consume_freq`].
    #[cfg_attr(not(feature = "ppm"), allow(dead_code))]
    pub fn peek_freq(&mut self, total: u32) -> u32 {
        let r = self.range / total;
        (self.code / r).min(total - 1)
    }

    #[cfg_attr(not(feature = "ppm"), allow(dead_code))]
    pub fn consume_freq(&mut self, start: u32, size: u32, total: u32) {
        let r = self.range / total;
        self.code -= r * start;
        self.range = r * size;
        self.normalize();
    }

    pub fn decode_direct(&mut self, nbits: u32) -> u32 {
        let mut value = 0u32;
        for _ in 0..nbits {
            self.range >>= 1;
            let bit = if self.code >= self.range {
                self.code -= self.range;
                1
            } else {
                0
            };
            value = (value << 1) | bit;
            self.normalize();
        }
        value
    }

    #[inline]
    fn normalize(&mut self) {
        while self.range < TOP {
            self.range <<= 8;
            self.code = (self.code << 8) | u32::from(self.next_byte());
        }
    }
}

/// Binary-tree model for symbols of a fixed bit width.
#[derive(Clone, Debug)]
pub(crate) struct BitTree {
    bits: u32,
    probs: Vec<Prob>,
}

impl BitTree {
    pub fn new(bits: u32) -> Self {
        BitTree {
            bits,
            probs: vec![Prob::default(); 1 << bits],
        }
    }

    pub fn encode(&mut self, enc: &mut Encoder, symbol: u32) {
        let mut m = 1usize;
        for i in (0..self.bits).rev() {
            let bit = (symbol >> i) & 1 == 1;
            enc.encode_bit(&mut self.probs[m], bit);
            m = (m << 1) | bit as usize;
        }
    }

    pub fn decode(&mut self, dec: &mut Decoder<'_>) -> u32 {
        let mut m = 1usize;
        for _ in 0..self.bits {
            let bit = dec.decode_bit(&mut self.probs[m]);
            m = (m << 1) | bit as usize;
        }
        (m - (1 << self.bits)) as u32
    }
}

pub(crate) fn write_varint(out: &mut Vec<u8>, mut v: u64) {
    loop {
        let byte = (v & 0x7F) as u8;
        v >>= 7;
        if v == 0 {
            out.push(byte);
            return;
        }
        out.push(byte | 0x80);
    }
}

pub(crate) fn read_varint(input: &[u8]) -> Option<(u64, usize)> {
    let mut v = 0u64;
    for (i, &b) in input.iter().enumerate().take(10) {
        v |= u64::from(b & 0x7F) << (7 * i);
        if b & 0x80 == 0 {
            return Some((v, i + 1));
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn bits_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let bits: Vec<bool> = (0..20_000).map(|_| rng.random_bool(0.95)).collect();
        let mut enc = Encoder::new();
        let mut probs = [Prob::default(); 2];
        for (i, &b) in bits.iter().enumerate() {
            enc.encode_bit(&mut probs[i % 2], b);
            if i % 100 == 0 {
                enc.encode_direct(i as u32 & 0x3FF, 10);
            }
        }
        let out = enc.finish();
        // skewed source compresses well below one bit per symbol
        assert!(out.len() * 8 < bits.len() / 2);

        let mut dec = Decoder::new(&out);
        let mut probs = [Prob::default(); 2];
        for (i, &b) in bits.iter().enumerate() {
            assert_eq!(dec.decode_bit(&mut probs[i % 2]), b);
            if i % 100 == 0 {
                assert_eq!(dec.decode_direct(10), i as u32 & 0x3FF);
            }
        }
    }

    #[test]
    fn bit_tree_round_trip() {
        let symbols: Vec<u32> = (0..3000u32).map(|i| (i * 37 + i / 7) % 256).collect();
        let mut tree = BitTree::new(8);
        let mut enc = Encoder::new();
        for &s in &symbols {
            tree.encode(&mut enc, s);
        }
        let out = enc.finish();
        let mut tree = BitTree::new(8);
        let mut dec = Decoder::new(&out);
        for &s in &symbols {
            assert_eq!(tree.decode(&mut dec), s);
        }
    }

    #[test]
    fn freq_round_trip() {
        let freqs = [5u32, 1, 30, 200, 7];
        let total: u32 = freqs.iter().sum();
        let starts: Vec<u32> = freqs
            .iter()
            .scan(0, |acc, &f| {
                let s = *acc;
                *acc += f;
                Some(s)
            })
            .collect();
        let msg: Vec<usize> = (0..5000).map(|i| (i * 7 + i / 3) % 5).collect();
        let mut enc = Encoder::new();
        for &m in &msg {
            enc.encode_freq(starts[m], freqs[m], total);
        }
        let out = enc.finish();
        let mut dec = Decoder::new(&out);
        for &m in &msg {
            let f = dec.peek_freq(total);
            let sym = starts.iter().rposition(|&s| s <= f).unwrap();
            assert_eq!(sym, m);
            dec.consume_freq(starts[sym], freqs[sym], total);
        }
    }

    #[test]
    fn varint() {
        for v in [0u64, 1, 127, 128, 300, u32::MAX as u64, u64::MAX] {
            let mut buf = Vec::new();
            write_varint(&mut buf, v);
            assert_eq!(read_varint(&buf), Some((v, buf.len())));
        }
    }
}
