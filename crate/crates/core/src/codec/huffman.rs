//! Canonical, length-limited Huffman codes over an octet alphabet.
//!
//! Tables are built from observed symbol frequencies, capped at
//! [`MAX_CODE_LEN`] bits with the classic bit-count redistribution, and
//! assigned canonical codes in (length, symbol) order. Only the code lengths
//! need to be stored for a decoder to rebuild the identical table.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use thiserror::Error;

use super::bits::{BitError, BitReader, BitWriter};

pub const MAX_CODE_LEN: u8 = 16;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum HuffmanError {
    #[error("cannot build a code for an empty alphabet")]
    EmptyAlphabet,
    #[error("symbol {0:#04x} has no code in this table")]
    MissingSymbol(u8),
    #[error("bit pattern does not match any code")]
    Undecodable,
    #[error("bit stream ended inside a code")]
    Truncated,
    #[error("invalid table: {0}")]
    InvalidTable(&'static str),
}

impl From<BitError> for HuffmanError {
    fn from(_: BitError) -> Self {
        HuffmanError::Truncated
    }
}

/// A canonical prefix code. Symbols without a code have length zero.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HuffmanTable {
    lengths: [u8; 256],
    codes: [u16; 256],
    /// Symbols sorted by (length, symbol), the canonical order.
    sorted: Vec<u8>,
    /// Per length: first canonical code, number of codes, index into `sorted`.
    first_code: [u32; MAX_CODE_LEN as usize + 1],
    count: [u32; MAX_CODE_LEN as usize + 1],
    offset: [u32; MAX_CODE_LEN as usize + 1],
    max_len: u8,
}

impl HuffmanTable {
    /// Builds a table from per-symbol frequencies (`freqs[s]` for symbol `s`).
    ///
    /// Frequency ties are resolved by ascending symbol value so the result is
    /// fully determined by its input. A lone symbol gets a 1-bit code.
    pub fn from_frequencies(freqs: &[u64]) -> Result<Self, HuffmanError> {
        assert!(freqs.len() <= 256, "alphabet is limited to octets");
        let present: Vec<u8> = (0..freqs.len())
            .filter(|&s| freqs[s] > 0)
            .map(|s| s as u8)
            .collect();
        if present.is_empty() {
            return Err(HuffmanError::EmptyAlphabet);
        }
        if present.len() == 1 {
            return Self::from_lengths(&[(present[0], 1)]);
        }

        let depths = tree_depths(freqs, &present);
        let mut by_depth: Vec<(u8, usize)> =
            present.iter().map(|&s| (s, depths[s as usize])).collect();
        by_depth.sort_by_key(|&(s, d)| (d, s));

        let max_depth = by_depth.last().map(|&(_, d)| d).unwrap_or(1);
        let mut bits = vec![0u32; max_depth.max(MAX_CODE_LEN as usize) + 1];
        for &(_, d) in &by_depth {
            bits[d] += 1;
        }
        limit_lengths(&mut bits);

        let mut pairs = Vec::with_capacity(by_depth.len());
        let mut iter = by_depth.iter();
        for (len, &n) in bits.iter().enumerate().take(MAX_CODE_LEN as usize + 1) {
            for _ in 0..n {
                let &(s, _) = iter.next().expect("bit counts match symbol count");
                pairs.push((s, len as u8));
            }
        }
        Self::from_lengths(&pairs)
    }

    /// Rebuilds a table from (symbol, code length) pairs.
    pub fn from_lengths(pairs: &[(u8, u8)]) -> Result<Self, HuffmanError> {
        if pairs.is_empty() {
            return Err(HuffmanError::EmptyAlphabet);
        }
        let mut lengths = [0u8; 256];
        let mut kraft = 0u64; // in units of 2^-16
        for &(s, len) in pairs {
            if len == 0 || len > MAX_CODE_LEN {
                return Err(HuffmanError::InvalidTable("code length out of range"));
            }
            if lengths[s as usize] != 0 {
                return Err(HuffmanError::InvalidTable("duplicate symbol"));
            }
            lengths[s as usize] = len;
            kraft += 1u64 << (MAX_CODE_LEN - len);
        }
        if kraft > 1u64 << MAX_CODE_LEN {
            return Err(HuffmanError::InvalidTable("lengths violate the Kraft inequality"));
        }

        let mut sorted: Vec<u8> = pairs.iter().map(|&(s, _)| s).collect();
        sorted.sort_by_key(|&s| (lengths[s as usize], s));

        let mut codes = [0u16; 256];
        let mut first_code = [0u32; MAX_CODE_LEN as usize + 1];
        let mut count = [0u32; MAX_CODE_LEN as usize + 1];
        let mut offset = [0u32; MAX_CODE_LEN as usize + 1];
        for &s in &sorted {
            count[lengths[s as usize] as usize] += 1;
        }
        let mut code = 0u32;
        let mut index = 0u32;
        for len in 1..=MAX_CODE_LEN as usize {
            first_code[len] = code;
            offset[len] = index;
            code = (code + count[len]) << 1;
            index += count[len];
        }
        let mut next = first_code;
        for &s in &sorted {
            let len = lengths[s as usize] as usize;
            codes[s as usize] = next[len] as u16;
            next[len] += 1;
        }

        let max_len = sorted.last().map(|&s| lengths[s as usize]).unwrap_or(0);
        Ok(Self { lengths, codes, sorted, first_code, count, offset, max_len })
    }

    /// Code length for `symbol`, or `None` if it has no code.
    pub fn code_len(&self, symbol: u8) -> Option<u8> {
        match self.lengths[symbol as usize] {
            0 => None,
            n => Some(n),
        }
    }

    /// The code bits for `symbol` (right-aligned) and their length.
    pub fn code(&self, symbol: u8) -> Option<(u16, u8)> {
        self.code_len(symbol).map(|len| (self.codes[symbol as usize], len))
    }

    /// Symbols with codes, in canonical order.
    pub fn symbols(&self) -> &[u8] {
        &self.sorted
    }

    /// Kraft sum Σ 2^-len over all coded symbols.
    pub fn kraft_sum(&self) -> f64 {
        self.sorted
            .iter()
            .map(|&s| (-(self.lengths[s as usize] as f64)).exp2())
            .sum()
    }

    pub fn encode_symbol(&self, out: &mut BitWriter, symbol: u8) -> Result<(), HuffmanError> {
        let (code, len) = self.code(symbol).ok_or(HuffmanError::MissingSymbol(symbol))?;
        out.write_bits(code as u32, len);
        Ok(())
    }

    pub fn decode_symbol(&self, input: &mut BitReader<'_>) -> Result<u8, HuffmanError> {
        let mut code = 0u32;
        for len in 1..=self.max_len as usize {
            code = (code << 1) | input.read_bit()? as u32;
            let delta = code.wrapping_sub(self.first_code[len]);
            if code >= self.first_code[len] && delta < self.count[len] {
                return Ok(self.sorted[(self.offset[len] + delta) as usize]);
            }
        }
        Err(HuffmanError::Undecodable)
    }

    /// Encodes a whole symbol stream into 1-padded octets.
    pub fn encode(&self, symbols: &[u8]) -> Result<Vec<u8>, HuffmanError> {
        let mut out = BitWriter::new();
        for &s in symbols {
            self.encode_symbol(&mut out, s)?;
        }
        Ok(out.finish())
    }

    /// Decodes exactly `count` symbols. The padding makes the symbol count
    /// part of the framing: a table may legitimately give the all-ones
    /// pattern a meaning.
    pub fn decode(&self, bytes: &[u8], count: usize) -> Result<Vec<u8>, HuffmanError> {
        let mut input = BitReader::new(bytes);
        (0..count).map(|_| self.decode_symbol(&mut input)).collect()
    }

    /// Serialized form: big-endian u16 symbol count, then (symbol, length)
    /// octet pairs in canonical order.
    pub fn write_to(&self, out: &mut Vec<u8>) {
        out.extend_from_slice(&(self.sorted.len() as u16).to_be_bytes());
        for &s in &self.sorted {
            out.push(s);
            out.push(self.lengths[s as usize]);
        }
    }

    /// Parses the form written by [`write_to`](Self::write_to), returning the
    /// table and the number of octets consumed.
    pub fn read_from(bytes: &[u8]) -> Result<(Self, usize), HuffmanError> {
        let head = bytes.get(..2).ok_or(HuffmanError::Truncated)?;
        let n = u16::from_be_bytes([head[0], head[1]]) as usize;
        if n == 0 || n > 256 {
            return Err(HuffmanError::InvalidTable("symbol count out of range"));
        }
        let body = bytes.get(2..2 + 2 * n).ok_or(HuffmanError::Truncated)?;
        let pairs: Vec<(u8, u8)> = body.chunks_exact(2).map(|p| (p[0], p[1])).collect();
        Ok((Self::from_lengths(&pairs)?, 2 + 2 * n))
    }
}

/// Leaf depths of the plain (unlimited) Huffman tree.
fn tree_depths(freqs: &[u64], present: &[u8]) -> Vec<usize> {
    // Leaves are keyed by symbol, merged nodes by 256 + creation order, so
    // equal weights resolve toward lower symbols and then older nodes.
    let mut parent: Vec<usize> = Vec::with_capacity(2 * present.len());
    let mut heap = BinaryHeap::new();
    for (i, &s) in present.iter().enumerate() {
        parent.push(usize::MAX);
        heap.push(Reverse((freqs[s as usize], s as usize, i)));
    }
    let mut next_key = 256;
    while heap.len() > 1 {
        let Reverse((w1, _, a)) = heap.pop().unwrap();
        let Reverse((w2, _, b)) = heap.pop().unwrap();
        let node = parent.len();
        parent.push(usize::MAX);
        parent[a] = node;
        parent[b] = node;
        heap.push(Reverse((w1 + w2, next_key, node)));
        next_key += 1;
    }

    let mut depths = vec![0usize; 256];
    for (i, &s) in present.iter().enumerate() {
        let mut d = 0;
        let mut n = i;
        while parent[n] != usize::MAX {
            n = parent[n];
            d += 1;
        }
        depths[s as usize] = d;
    }
    depths
}

/// Folds code lengths above the cap back into shorter ones, preserving the
/// Kraft equality: two leaves at the deepest level become one leaf a level up
/// plus a split of the first shorter leaf found.
fn limit_lengths(bits: &mut [u32]) {
    let max = MAX_CODE_LEN as usize;
    let mut i = bits.len() - 1;
    while i > max {
        while bits[i] > 0 {
            let mut j = i - 2;
            while bits[j] == 0 {
                j -= 1;
            }
            bits[i] -= 2;
            bits[i - 1] += 1;
            bits[j + 1] += 2;
            bits[j] -= 1;
        }
        i -= 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn freqs(pairs: &[(u8, u64)]) -> Vec<u64> {
        let mut f = vec![0u64; 256];
        for &(s, n) in pairs {
            f[s as usize] = n;
        }
        f
    }

    #[test]
    fn two_equal_symbols_get_one_bit() {
        let t = HuffmanTable::from_frequencies(&freqs(&[(b'a', 1), (b'b', 1)])).unwrap();
        assert_eq!(t.code_len(b'a'), Some(1));
        assert_eq!(t.code_len(b'b'), Some(1));
        let mut w = BitWriter::new();
        for &s in b"abab" {
            t.encode_symbol(&mut w, s).unwrap();
        }
        assert_eq!(w.bit_len(), 4);
    }

    #[test]
    fn single_symbol_alphabet() {
        let t = HuffmanTable::from_frequencies(&freqs(&[(b'a', 1)])).unwrap();
        assert_eq!(t.code_len(b'a'), Some(1));
        let bytes = t.encode(b"aaaaaaaaaaa").unwrap();
        assert_eq!(t.decode(&bytes, 11).unwrap(), b"aaaaaaaaaaa");
    }

    #[test]
    fn hand_built_tree_lengths() {
        let t = HuffmanTable::from_frequencies(&freqs(&[(0, 5), (1, 2), (2, 1), (3, 1)])).unwrap();
        let lens: Vec<_> = (0..4).map(|s| t.code_len(s).unwrap()).collect();
        assert_eq!(lens, vec![1, 2, 3, 3]);
        assert_eq!(t.kraft_sum(), 1.0);
    }

    #[test]
    fn empty_alphabet_is_an_error() {
        assert_eq!(HuffmanTable::from_frequencies(&[0; 256]), Err(HuffmanError::EmptyAlphabet));
        assert_eq!(HuffmanTable::from_frequencies(&[]), Err(HuffmanError::EmptyAlphabet));
    }

    #[test]
    fn empty_stream_is_empty_payload() {
        let t = HuffmanTable::from_frequencies(&freqs(&[(7, 3), (9, 1)])).unwrap();
        assert!(t.encode(&[]).unwrap().is_empty());
        assert!(t.decode(&[], 0).unwrap().is_empty());
    }

    #[test]
    fn missing_symbol_and_garbage() {
        let t = HuffmanTable::from_frequencies(&freqs(&[(1, 1)])).unwrap();
        assert_eq!(t.encode(&[2]), Err(HuffmanError::MissingSymbol(2)));
        // Only "0" is a code; a 1 bit can never start one.
        assert_eq!(t.decode(&[0xFF], 1), Err(HuffmanError::Undecodable));
        assert_eq!(t.decode(&[0x00], 9), Err(HuffmanError::Truncated));
    }

    #[test]
    fn fibonacci_weights_are_capped_at_sixteen() {
        let mut f = vec![0u64; 256];
        let (mut a, mut b) = (1u64, 1u64);
        for s in f.iter_mut().take(30) {
            *s = a;
            (a, b) = (b, a + b);
        }
        let t = HuffmanTable::from_frequencies(&f).unwrap();
        let max = t.symbols().iter().map(|&s| t.code_len(s).unwrap()).max().unwrap();
        assert_eq!(max, MAX_CODE_LEN);
        assert!(t.kraft_sum() <= 1.0);
        let msg: Vec<u8> = (0..30).collect();
        assert_eq!(t.decode(&t.encode(&msg).unwrap(), msg.len()).unwrap(), msg);
    }

    #[test]
    fn codes_are_prefix_free() {
        let t = HuffmanTable::from_frequencies(&freqs(&[(0, 40), (1, 30), (2, 20), (3, 5), (4, 5)]))
            .unwrap();
        let codes: Vec<(u16, u8)> = t.symbols().iter().map(|&s| t.code(s).unwrap()).collect();
        for (i, &(ca, la)) in codes.iter().enumerate() {
            for &(cb, lb) in &codes[i + 1..] {
                let l = la.min(lb);
                assert_ne!(ca >> (la - l), cb >> (lb - l));
            }
        }
    }

    #[test]
    fn corrupt_serialized_tables() {
        assert_eq!(HuffmanTable::read_from(&[0]), Err(HuffmanError::Truncated));
        assert_eq!(HuffmanTable::read_from(&[0, 2, 1, 1]), Err(HuffmanError::Truncated));
        assert!(matches!(
            HuffmanTable::read_from(&[0, 3, 1, 1, 2, 1, 3, 1]),
            Err(HuffmanError::InvalidTable(_))
        ));
        assert!(matches!(
            HuffmanTable::read_from(&[0, 2, 1, 1, 1, 1]),
            Err(HuffmanError::InvalidTable(_))
        ));
    }

    proptest! {
        #[test]
        fn round_trip_and_kraft(
            weights in proptest::collection::vec(0u64..1000, 1..256),
            picks in proptest::collection::vec(any::<prop::sample::Index>(), 0..400),
        ) {
            let mut weights = weights;
            weights[0] += 1;
            let t = HuffmanTable::from_frequencies(&weights).unwrap();
            prop_assert!(t.kraft_sum() <= 1.0 + 1e-12);
            let alphabet = t.symbols().to_vec();
            let msg: Vec<u8> = picks.iter().map(|i| alphabet[i.index(alphabet.len())]).collect();
            let bytes = t.encode(&msg).unwrap();
            prop_assert_eq!(t.decode(&bytes, msg.len()).unwrap(), msg);

            let mut ser = Vec::new();
            t.write_to(&mut ser);
            let (back, used) = HuffmanTable::read_from(&ser).unwrap();
            prop_assert_eq!(used, ser.len());
            prop_assert_eq!(back, t);
        }
    }
}
