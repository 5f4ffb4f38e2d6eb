use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bit::{majority_of_bits, Bit};
use crate::error::{Error, Result};
use crate::params::MIN_NODES;

/// The initial bits of a consensus problem.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Instance {
    pub n: usize,
    pub initial_bits: Vec<Bit>,
    pub majority_bit: Bit,
    /// Realized fraction of nodes holding `majority_bit`.
    pub advantage_fraction: f64,
}

impl Instance {
    /// Builds an instance from explicit bits. Intended for small hand-made
    /// cases, so no minimum size is enforced.
    pub fn from_bits(bits: Vec<Bit>) -> Result<Instance> {
        let majority_bit = majority_of_bits(&bits)?;
        let agree = bits.iter().filter(|&&b| b == majority_bit).count();
        Ok(Instance {
            n: bits.len(),
            advantage_fraction: agree as f64 / bits.len() as f64,
            initial_bits: bits,
            majority_bit,
        })
    }

    pub fn count_of(&self, bit: Bit) -> usize {
        self.initial_bits.iter().filter(|&&b| b == bit).count()
    }
}

/// `n` nodes, exactly `round(p n)` of which hold bit 1, in a seeded random order.
///
/// When `round(p n)` is exactly `n / 2` the majority bit is 0 by the tie rule.
pub fn make_instance(n: usize, p: f64, seed: u64) -> Result<Instance> {
    make_instance_with_majority(n, p, Bit::One, seed)
}

/// Like [`make_instance`] but the bit placed on `round(p n)` nodes is `bit`.
pub fn make_instance_with_majority(n: usize, p: f64, bit: Bit, seed: u64) -> Result<Instance> {
    if (n as u64) < MIN_NODES {
        return Err(Error::TooFewNodes(n as u64));
    }
    if !(0.5..=1.0).contains(&p) {
        return Err(Error::FractionOutOfRange(p));
    }
    let k = (p * n as f64).round() as usize;
    let mut bits = vec![bit.flip(); n];
    bits[..k].fill(bit);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    bits.shuffle(&mut rng);
    Instance::from_bits(bits)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn exact_count() {
        let inst = make_instance(100, 0.7, 3).unwrap();
        assert_eq!(inst.majority_bit, Bit::One);
        assert_eq!(inst.count_of(Bit::One), 70);
        assert!((inst.advantage_fraction - 0.7).abs() < 1e-12);
    }

    #[test]
    fn tie_goes_to_zero() {
        let inst = make_instance(100, 0.5, 3).unwrap();
        assert_eq!(inst.majority_bit, Bit::Zero);
        assert_eq!(inst.count_of(Bit::Zero), 50);
    }

    #[test]
    fn seeds_permute_only() {
        let a = make_instance(16, 0.75, 1).unwrap();
        let b = make_instance(16, 0.75, 2).unwrap();
        assert_eq!(a.count_of(Bit::One), b.count_of(Bit::One));
        assert_ne!(a.initial_bits, b.initial_bits);
        assert_eq!(a, make_instance(16, 0.75, 1).unwrap());
    }

    #[test]
    fn rejects_bad_input() {
        assert_eq!(make_instance(15, 0.7, 0), Err(Error::TooFewNodes(15)));
        assert!(matches!(make_instance(64, 0.4, 0), Err(Error::FractionOutOfRange(_))));
        assert!(matches!(make_instance(64, 1.1, 0), Err(Error::FractionOutOfRange(_))));
    }

    #[test]
    fn zero_majority() {
        let inst = make_instance_with_majority(40, 0.75, Bit::Zero, 9).unwrap();
        assert_eq!(inst.majority_bit, Bit::Zero);
        assert_eq!(inst.count_of(Bit::Zero), 30);
    }

    proptest! {
        #[test]
        fn majority_count_is_round_pn(n in 16usize..2000, p in 0.5f64..=1.0, seed: u64) {
            let inst = make_instance(n, p, seed).unwrap();
            prop_assert_eq!(inst.count_of(inst.majority_bit), (p * n as f64).round() as usize);
            prop_assert_eq!(inst.initial_bits.len(), n);
        }
    }
}
