//! Order-k prediction by partial matching with full exclusion, behind a
//! long-match predictor. Escapes are binary events whose probability is
//! learned per context class (secondary escape estimation). No window limit.

use std::collections::HashMap;

use super::range_coder::{read_varint, write_varint, Decoder, Encoder, Prob};
use crate::error::{Error, Result};

pub(crate) const NAME: &str = "ppm";
const MAX_TOTAL: u32 = 1 << 10;

#[derive(Default, Clone)]
struct Context {
    symbols: Vec<(u8, u32)>,
}

impl Context {
    fn bump(&mut self, sym: u8) {
        match self.symbols.iter_mut().find(|(s, _)| *s == sym) {
            Some(entry) => entry.1 += 1,
            None => self.symbols.push((sym, 1)),
        }
        let total: u32 = self.symbols.iter().map(|e| e.1).sum();
        if total + self.symbols.len() as u32 >= MAX_TOTAL {
            for e in &mut self.symbols {
                e.1 = e.1.div_ceil(2);
            }
        }
    }
}

struct Model {
    order: usize,
    contexts: HashMap<u64, Context>,
}

fn context_key(history: &[u8], order: usize) -> u64 {
    let tail = &history[history.len() - order..];
    tail.iter()
        .fold(order as u64, |acc, &b| (acc << 8) | u64::from(b))
}

impl Model {
    fn new(order: usize) -> Self {
        Model {
            order,
            contexts: HashMap::new(),
        }
    }

    fn update(&mut self, history: &[u8], sym: u8) {
        for order in 0..=self.order.min(history.len()) {
            self.contexts
                .entry(context_key(history, order))
                .or_default()
                .bump(sym);
        }
    }
}

const MATCH_MIN: usize = 8;
const MATCH_BUCKETS: usize = 16;

/// Predicts the byte that followed the most recent earlier occurrence of the
/// last `MATCH_MIN` bytes, for as long as that occurrence keeps matching.
struct MatchModel {
    table: HashMap<u64, usize>,
    ptr: Option<usize>,
    len: usize,
    hit: [Prob; MATCH_BUCKETS],
}

impl MatchModel {
    fn new() -> Self {
        MatchModel {
            table: HashMap::new(),
            ptr: None,
            len: 0,
            hit: [Prob::default(); MATCH_BUCKETS],
        }
    }

    fn predicted(&self, history: &[u8]) -> Option<(u8, usize)> {
        self.ptr.map(|p| (history[p], self.len.min(MATCH_BUCKETS - 1)))
    }

    /// Call after `history` has grown by one byte.
    fn update(&mut self, history: &[u8], was_hit: bool) {
        let n = history.len();
        match (self.ptr, was_hit) {
            (Some(p), true) => {
                self.ptr = Some(p + 1);
                self.len += 1;
            }
            _ => {
                self.ptr = None;
                self.len = 0;
            }
        }
        if n < MATCH_MIN {
            return;
        }
        let key = history[n - MATCH_MIN..]
            .iter()
            .fold(0xcbf2_9ce4_8422_2325u64, |h, &b| (h ^ u64::from(b)).wrapping_mul(0x100_0000_01b3));
        if self.ptr.is_none() {
            if let Some(&p) = self.table.get(&key) {
                if history[p - MATCH_MIN..p] == history[n - MATCH_MIN..] {
                    self.ptr = Some(p);
                    self.len = 0;
                }
            }
        }
        self.table.insert(key, n);
    }
}

const MAX_ORDER: usize = 6;
const DISTINCT_BUCKETS: usize = 6;
const MASS_BUCKETS: usize = 4;

/// Adaptive escape probabilities by (order, distinct symbols, mean count).
struct EscapeModel([Prob; (MAX_ORDER + 1) * DISTINCT_BUCKETS * MASS_BUCKETS]);

impl EscapeModel {
    fn new() -> Self {
        EscapeModel([Prob::default(); (MAX_ORDER + 1) * DISTINCT_BUCKETS * MASS_BUCKETS])
    }

    fn slot(&mut self, order: usize, distinct: usize, total: u32) -> &mut Prob {
        let d = match distinct {
            1 => 0,
            2 => 1,
            3..=4 => 2,
            5..=8 => 3,
            9..=16 => 4,
            _ => 5,
        };
        let mean = total as usize / distinct;
        let m = match mean {
            0..=1 => 0,
            2..=3 => 1,
            4..=7 => 2,
            _ => 3,
        };
        &mut self.0[(order * DISTINCT_BUCKETS + d) * MASS_BUCKETS + m]
    }
}

/// Frequency table of one context after removing excluded symbols.
fn visible(ctx: &Context, excluded: &[bool; 256]) -> Vec<(u8, u32)> {
    ctx.symbols
        .iter()
        .copied()
        .filter(|(s, _)| !excluded[*s as usize])
        .collect()
}

pub(crate) fn compress(data: &[u8], order: usize) -> Vec<u8> {
    let order = order.min(MAX_ORDER);
    let mut header = Vec::new();
    write_varint(&mut header, data.len() as u64);
    header.push(order as u8);
    let mut enc = Encoder::with_output(header);
    let mut model = Model::new(order);
    let mut matcher = MatchModel::new();
    let mut escapes = EscapeModel::new();

    for (i, &sym) in data.iter().enumerate() {
        let history = &data[..i];
        let mut excluded = [false; 256];
        let mut coded = false;
        let mut hit = false;
        if let Some((guess, bucket)) = matcher.predicted(history) {
            hit = guess == sym;
            enc.encode_bit(&mut matcher.hit[bucket], hit);
            coded = hit;
            excluded[guess as usize] = true;
        }
        for k in (0..=order.min(i)).rev() {
            if coded {
                break;
            }
            let Some(ctx) = model.contexts.get(&context_key(history, k)) else {
                continue;
            };
            let syms = visible(ctx, &excluded);
            if syms.is_empty() {
                continue;
            }
            let total: u32 = syms.iter().map(|e| e.1).sum();
            let mut start = 0;
            let mut found = None;
            for &(s, f) in &syms {
                if s == sym {
                    found = Some(f);
                    break;
                }
                start += f;
            }
            enc.encode_bit(escapes.slot(k, syms.len(), total), found.is_none());
            match found {
                Some(f) => {
                    enc.encode_freq(start, f, total);
                    coded = true;
                    break;
                }
                None => {
                    for (s, _) in syms {
                        excluded[s as usize] = true;
                    }
                }
            }
        }
        if !coded {
            let remaining = excluded.iter().filter(|e| !**e).count() as u32;
            let start = (0..sym as usize).filter(|&s| !excluded[s]).count() as u32;
            enc.encode_freq(start, 1, remaining);
        }
        model.update(history, sym);
        matcher.update(&data[..=i], hit);
    }
    enc.finish()
}

pub(crate) fn decompress(encoded: &[u8]) -> Result<Vec<u8>> {
    let corrupt = |m: &str| Error::backend(NAME, m.to_string());
    let (total_len, a) = read_varint(encoded).ok_or_else(|| corrupt("truncated header"))?;
    let order = *encoded.get(a).ok_or_else(|| corrupt("truncated header"))? as usize;
    if order > MAX_ORDER {
        return Err(corrupt("order out of range"));
    }
    let mut dec = Decoder::new(&encoded[a + 1..]);
    let mut model = Model::new(order);
    let mut matcher = MatchModel::new();
    let mut escapes = EscapeModel::new();
    let mut out: Vec<u8> = Vec::with_capacity(total_len as usize);

    while (out.len() as u64) < total_len {
        let i = out.len();
        let mut excluded = [false; 256];
        let mut decoded = None;
        let mut hit = false;
        if let Some((guess, bucket)) = matcher.predicted(&out) {
            hit = dec.decode_bit(&mut matcher.hit[bucket]);
            if hit {
                decoded = Some(guess);
            }
            excluded[guess as usize] = true;
        }
        for k in (0..=order.min(i)).rev() {
            if decoded.is_some() {
                break;
            }
            let Some(ctx) = model.contexts.get(&context_key(&out, k)) else {
                continue;
            };
            let syms = visible(ctx, &excluded);
            if syms.is_empty() {
                continue;
            }
            let total: u32 = syms.iter().map(|e| e.1).sum();
            if dec.decode_bit(escapes.slot(k, syms.len(), total)) {
                for (s, _) in syms {
                    excluded[s as usize] = true;
                }
                continue;
            }
            let target = dec.peek_freq(total);
            let mut start = 0;
            for &(s, f) in &syms {
                if target < start + f {
                    dec.consume_freq(start, f, total);
                    decoded = Some(s);
                    break;
                }
                start += f;
            }
            if decoded.is_none() {
                return Err(corrupt("symbol out of range"));
            }
        }
        let sym = match decoded {
            Some(s) => s,
            None => {
                let remaining = excluded.iter().filter(|e| !**e).count() as u32;
                if remaining == 0 {
                    return Err(corrupt("no symbol left to decode"));
                }
                let target = dec.peek_freq(remaining);
                let sym = (0..256usize)
                    .filter(|&s| !excluded[s])
                    .nth(target as usize)
                    .ok_or_else(|| corrupt("symbol out of range"))?;
                dec.consume_freq(target, 1, remaining);
                sym as u8
            }
        };
        if dec.overrun() {
            return Err(corrupt("truncated stream"));
        }
        model.update(&out, sym);
        out.push(sym);
        matcher.update(&out, hit);
    }
    Ok(out)
}
