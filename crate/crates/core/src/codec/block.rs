use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use rand::Rng;

use crate::error::{Error, Result};

/// Fixed-length payload combined with bytewise XOR.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct Block(Vec<u8>);

impl Block {
    pub fn zero(len: usize) -> Self {
        Block(vec![0; len])
    }

    pub fn from_bytes(bytes: impl Into<Vec<u8>>) -> Self {
        Block(bytes.into())
    }

    pub fn random<R: Rng + ?Sized>(len: usize, rng: &mut R) -> Self {
        let mut bytes = vec![0; len];
        rng.fill(&mut bytes[..]);
        Block(bytes)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&b| b == 0)
    }

    pub fn as_bytes(&self) -> &[u8] {
        &self.0
    }

    pub fn into_bytes(self) -> Vec<u8> {
        self.0
    }

    pub fn try_xor_assign(&mut self, other: &Block) -> Result<()> {
        if self.len() != other.len() {
            return Err(Error::LengthMismatch {
                expected: self.len(),
                found: other.len(),
            });
        }
        self.0.iter_mut().zip(&other.0).for_each(|(a, b)| *a ^= b);
        Ok(())
    }

    /// Panics when the lengths differ; all blocks inside one simulation
    /// share the configured payload length.
    pub fn xor_assign(&mut self, other: &Block) {
        assert_eq!(self.len(), other.len(), "block length mismatch");
        self.0.iter_mut().zip(&other.0).for_each(|(a, b)| *a ^= b);
    }
}

impl fmt::Debug for Block {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("Block(")?;
        for b in &self.0 {
            write!(f, "{b:02x}")?;
        }
        f.write_str(")")
    }
}

/// Bytewise XOR fold. An empty list yields the zero block of `len` bytes.
pub fn xor_combine<'a, I>(len: usize, blocks: I) -> Result<Block>
where
    I: IntoIterator<Item = &'a Block>,
{
    let mut acc = Block::zero(len);
    for b in blocks {
        acc.try_xor_assign(b)?;
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seed::rng_from;
    use proptest::prelude::*;

    #[test]
    fn single_and_pair() {
        let mut rng = rng_from(1);
        let b = Block::random(32, &mut rng);
        assert_eq!(xor_combine(32, [&b]).unwrap(), b);
        assert!(xor_combine(32, [&b, &b]).unwrap().is_zero());
        assert!(xor_combine(32, []).unwrap().is_zero());
    }

    #[test]
    fn length_mismatch_is_rejected() {
        let a = Block::zero(4);
        let b = Block::zero(5);
        assert_eq!(
            xor_combine(4, [&a, &b]),
            Err(Error::LengthMismatch { expected: 4, found: 5 })
        );
    }

    proptest! {
        #[test]
        fn order_does_not_matter(a in prop::collection::vec(any::<u8>(), 16),
                                 b in prop::collection::vec(any::<u8>(), 16),
                                 c in prop::collection::vec(any::<u8>(), 16)) {
            let (a, b, c) = (Block::from_bytes(a), Block::from_bytes(b), Block::from_bytes(c));
            let abc = xor_combine(16, [&a, &b, &c]).unwrap();
            prop_assert_eq!(&abc, &xor_combine(16, [&c, &a, &b]).unwrap());
            prop_assert_eq!(&abc, &xor_combine(16, [&b, &c, &a]).unwrap());
        }
    }
}
