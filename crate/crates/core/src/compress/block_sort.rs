//! Block-sorting codec: cyclic Burrows-Wheeler transform, run-length and
//! move-to-front stages, then adaptive binary range coding.
//!
//! Runs of the transformed block are coded as (move-to-front rank, run length).
//! Rotations of a block share one sorted rotation matrix, so `xy` and `yx`
//! produce the same transformed output and differ only in the primary index.

use super::range_coder::{read_varint, write_varint, BitTree, Decoder, Encoder, Prob};
use crate::error::{Error, Result};

const RANK_CONTEXTS: usize = 4;
const LEN_CONTEXTS: usize = 2;
const MAX_LEN_BITS: usize = 33;

pub(crate) const NAME: &str = "bzip-like";

/// Sorts the cyclic rotations of `s`; returns rotation start offsets in sorted order.
pub(crate) fn sort_rotations(s: &[u8]) -> Vec<u32> {
    let n = s.len();
    if n == 0 {
        return Vec::new();
    }
    let mut p = vec![0u32; n];
    let mut c = vec![0u32; n];
    let mut cnt = vec![0usize; n.max(256)];

    for &b in s {
        cnt[b as usize] += 1;
    }
    for i in 1..256 {
        cnt[i] += cnt[i - 1];
    }
    for i in (0..n).rev() {
        let b = s[i] as usize;
        cnt[b] -= 1;
        p[cnt[b]] = i as u32;
    }
    let mut classes = 1usize;
    for i in 1..n {
        if s[p[i] as usize] != s[p[i - 1] as usize] {
            classes += 1;
        }
        c[p[i] as usize] = (classes - 1) as u32;
    }

    let mut pn = vec![0u32; n];
    let mut cn = vec![0u32; n];
    let mut h = 1usize;
    while h < n && classes < n {
        for i in 0..n {
            pn[i] = ((p[i] as usize + n - h % n) % n) as u32;
        }
        cnt[..classes].iter_mut().for_each(|x| *x = 0);
        for &x in &pn {
            cnt[c[x as usize] as usize] += 1;
        }
        for i in 1..classes {
            cnt[i] += cnt[i - 1];
        }
        for i in (0..n).rev() {
            let k = c[pn[i] as usize] as usize;
            cnt[k] -= 1;
            p[cnt[k]] = pn[i];
        }
        cn[p[0] as usize] = 0;
        classes = 1;
        for i in 1..n {
            let cur = (c[p[i] as usize], c[(p[i] as usize + h) % n]);
            let prev = (c[p[i - 1] as usize], c[(p[i - 1] as usize + h) % n]);
            if cur != prev {
                classes += 1;
            }
            cn[p[i] as usize] = (classes - 1) as u32;
        }
        std::mem::swap(&mut c, &mut cn);
        h <<= 1;
    }
    p
}

/// Forward transform: last column of the sorted rotation matrix and the row
/// holding the untransformed block.
pub(crate) fn bwt(s: &[u8]) -> (Vec<u8>, usize) {
    let n = s.len();
    let order = sort_rotations(s);
    let mut last = Vec::with_capacity(n);
    let mut primary = 0;
    for (row, &start) in order.iter().enumerate() {
        let start = start as usize;
        if start == 0 {
            primary = row;
        }
        last.push(s[(start + n - 1) % n]);
    }
    (last, primary)
}

pub(crate) fn inverse_bwt(last: &[u8], primary: usize) -> Vec<u8> {
    let n = last.len();
    if n == 0 {
        return Vec::new();
    }
    let mut starts = [0usize; 256];
    for &b in last {
        starts[b as usize] += 1;
    }
    let mut sum = 0;
    for slot in starts.iter_mut() {
        let count = *slot;
        *slot = sum;
        sum += count;
    }
    let mut lf = vec![0u32; n];
    let mut seen = [0usize; 256];
    for (i, &b) in last.iter().enumerate() {
        lf[i] = (starts[b as usize] + seen[b as usize]) as u32;
        seen[b as usize] += 1;
    }
    let mut out = vec![0u8; n];
    let mut row = primary;
    for slot in out.iter_mut().rev() {
        *slot = last[row];
        row = lf[row] as usize;
    }
    out
}

fn index_bits(len: usize) -> u32 {
    if len <= 1 {
        0
    } else {
        usize::BITS - (len - 1).leading_zeros()
    }
}

fn rank_context(prev_rank: u32) -> usize {
    match prev_rank {
        0 | 1 => 0,
        2 | 3 => 1,
        4..=15 => 2,
        _ => 3,
    }
}

struct Model {
    ranks: Vec<BitTree>,
    len_unary: Vec<[Prob; MAX_LEN_BITS]>,
    len_bits: Vec<Vec<Prob>>,
}

impl Model {
    fn new() -> Self {
        Model {
            ranks: (0..RANK_CONTEXTS).map(|_| BitTree::new(8)).collect(),
            len_unary: vec![[Prob::default(); MAX_LEN_BITS]; LEN_CONTEXTS],
            len_bits: vec![vec![Prob::default(); MAX_LEN_BITS * MAX_LEN_BITS]; LEN_CONTEXTS],
        }
    }

    /// Elias-gamma shaped: unary bit width, then the bits below the leading one.
    fn encode_len(&mut self, enc: &mut Encoder, ctx: usize, len: u32) {
        let width = (u32::BITS - len.leading_zeros()) as usize;
        for i in 0..width - 1 {
            enc.encode_bit(&mut self.len_unary[ctx][i], true);
        }
        enc.encode_bit(&mut self.len_unary[ctx][width - 1], false);
        for j in (0..width - 1).rev() {
            let bit = (len >> j) & 1 == 1;
            enc.encode_bit(&mut self.len_bits[ctx][width * MAX_LEN_BITS + j], bit);
        }
    }

    fn decode_len(&mut self, dec: &mut Decoder<'_>, ctx: usize) -> Result<u32> {
        let mut width = 1usize;
        while dec.decode_bit(&mut self.len_unary[ctx][width - 1]) {
            width += 1;
            if width > 32 {
                return Err(Error::backend(NAME, "corrupt run length"));
            }
        }
        let mut len = 1u32;
        for j in (0..width - 1).rev() {
            let bit = dec.decode_bit(&mut self.len_bits[ctx][width * MAX_LEN_BITS + j]);
            len = (len << 1) | bit as u32;
        }
        Ok(len)
    }
}

pub(crate) fn compress(data: &[u8], block_size: usize) -> Vec<u8> {
    let mut header = Vec::new();
    write_varint(&mut header, data.len() as u64);
    write_varint(&mut header, block_size as u64);
    let mut enc = Encoder::with_output(header);
    let mut model = Model::new();
    let mut mtf: [u8; 256] = std::array::from_fn(|i| i as u8);
    let mut prev_rank = 0u32;

    for block in data.chunks(block_size) {
        let (last, primary) = bwt(block);
        enc.encode_direct(primary as u32, index_bits(block.len()));
        let mut i = 0;
        while i < last.len() {
            let sym = last[i];
            let mut j = i + 1;
            while j < last.len() && last[j] == sym {
                j += 1;
            }
            let rank = mtf.iter().position(|&b| b == sym).unwrap_or(0);
            mtf.copy_within(0..rank, 1);
            mtf[0] = sym;
            let rank = rank as u32;
            model.ranks[rank_context(prev_rank)].encode(&mut enc, rank);
            model.encode_len(&mut enc, usize::from(rank > 1), (j - i) as u32);
            prev_rank = rank;
            i = j;
        }
    }
    enc.finish()
}

pub(crate) fn decompress(encoded: &[u8]) -> Result<Vec<u8>> {
    let corrupt = |m: &str| Error::backend(NAME, m.to_string());
    let (total, a) = read_varint(encoded).ok_or_else(|| corrupt("truncated header"))?;
    let (block_size, b) =
        read_varint(&encoded[a..]).ok_or_else(|| corrupt("truncated header"))?;
    let total = total as usize;
    let block_size = block_size as usize;
    if block_size == 0 && total > 0 {
        return Err(corrupt("zero block size"));
    }
    let mut dec = Decoder::new(&encoded[a + b..]);
    let mut model = Model::new();
    let mut mtf: [u8; 256] = std::array::from_fn(|i| i as u8);
    let mut prev_rank = 0u32;
    let mut out = Vec::with_capacity(total);

    while out.len() < total {
        let blen = block_size.min(total - out.len());
        let primary = dec.decode_direct(index_bits(blen)) as usize;
        if primary >= blen {
            return Err(corrupt("primary index out of range"));
        }
        let mut last = Vec::with_capacity(blen);
        while last.len() < blen {
            let rank = model.ranks[rank_context(prev_rank)].decode(&mut dec);
            let len = model.decode_len(&mut dec, usize::from(rank > 1))? as usize;
            let sym = mtf[rank as usize];
            mtf.copy_within(0..rank as usize, 1);
            mtf[0] = sym;
            if last.len() + len > blen {
                return Err(corrupt("run overflows block"));
            }
            last.extend(std::iter::repeat_n(sym, len));
            prev_rank = rank;
            if dec.overrun() {
                return Err(corrupt("truncated stream"));
            }
        }
        out.extend(inverse_bwt(&last, primary));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn naive_rotation_order(s: &[u8]) -> Vec<Vec<u8>> {
        let n = s.len();
        let mut rots: Vec<Vec<u8>> = (0..n)
            .map(|i| s[i..].iter().chain(&s[..i]).copied().collect())
            .collect();
        rots.sort();
        rots
    }

    #[test]
    fn banana() {
        let (last, primary) = bwt(b"banana");
        // sorted rotations: abanan, anaban, ananab, banana, nabana, nanaba
        assert_eq!(last, b"nnbaaa");
        assert_eq!(primary, 3);
        assert_eq!(inverse_bwt(&last, primary), b"banana");
    }

    #[test]
    fn rotations_share_transform() {
        let (a, _) = bwt(b"hello world, hello block sorting");
        let (b, _) = bwt(b"lo block sortinghello world, hel");
        assert_eq!(a, b);
    }

    #[test]
    fn periodic_input_round_trips() {
        let s = b"abcabcabcabc".repeat(5);
        let (last, p) = bwt(&s);
        assert_eq!(inverse_bwt(&last, p), s);
        let enc = compress(&s, 7);
        assert_eq!(decompress(&enc).unwrap(), s);
    }

    #[test]
    fn empty_input() {
        let enc = compress(b"", 900_000);
        assert!(enc.len() <= 12);
        assert_eq!(decompress(&enc).unwrap(), Vec::<u8>::new());
    }

    proptest! {
        #[test]
        fn rotation_sort_matches_naive(s in proptest::collection::vec(0u8..4, 1..60)) {
            let order = sort_rotations(&s);
            let n = s.len();
            let got: Vec<Vec<u8>> = order
                .iter()
                .map(|&i| {
                    let i = i as usize;
                    s[i..].iter().chain(&s[..i]).copied().collect()
                })
                .collect();
            prop_assert_eq!(got, naive_rotation_order(&s));
            prop_assert_eq!(order.len(), n);
        }

        #[test]
        fn codec_round_trip(s in proptest::collection::vec(any::<u8>(), 0..2000), block in 1usize..700) {
            let enc = compress(&s, block);
            prop_assert_eq!(decompress(&enc).unwrap(), s);
        }
    }
}
