use std::fmt;
use std::ops::Range;

use bitvec::prelude::*;
use rand::RngCore;

/// Bit string of arbitrary length. File contents, subfiles and multicast
/// payloads are all `Bits`; sizes need not be byte aligned.
///
/// Storage always starts at bit 0 of the first byte and unused tail bits are
/// kept at zero, so the raw bytes are a canonical encoding.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct Bits(BitVec<u8, Msb0>);

impl Bits {
    pub fn zeros(len: usize) -> Self {
        Self(BitVec::repeat(false, len))
    }

    pub fn from_bytes(bytes: &[u8], len: usize) -> Self {
        assert!(len <= bytes.len() * 8, "not enough bytes for {len} bits");
        let mut v = BitVec::from_slice(bytes);
        v.truncate(len);
        let mut out = Self(v);
        out.clear_tail();
        out
    }

    pub fn random<R: RngCore>(rng: &mut R, len: usize) -> Self {
        let mut bytes = vec![0u8; len.div_ceil(8)];
        rng.fill_bytes(&mut bytes);
        Self::from_bytes(&bytes, len)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn slice(&self, range: Range<usize>) -> Self {
        let mut v = BitVec::with_capacity(range.len());
        v.extend_from_bitslice(&self.0[range]);
        let mut out = Self(v);
        out.clear_tail();
        out
    }

    pub fn append(&mut self, other: &Bits) {
        self.0.extend_from_bitslice(&other.0);
        self.clear_tail();
    }

    /// In-place XOR with an equal-length string.
    pub fn xor_assign(&mut self, other: &Bits) {
        assert_eq!(self.len(), other.len(), "XOR operands differ in length");
        for (a, b) in self
            .0
            .as_raw_mut_slice()
            .iter_mut()
            .zip(other.0.as_raw_slice())
        {
            *a ^= *b;
        }
    }

    pub fn as_bytes(&self) -> &[u8] {
        self.0.as_raw_slice()
    }

    fn clear_tail(&mut self) {
        self.0.set_uninitialized(false);
    }
}

impl fmt::Debug for Bits {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "Bits({} bits, {})",
            self.len(),
            hex::encode(self.as_bytes())
        )
    }
}
