use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive};
use rand::RngCore;

use crate::measures::IncrementLaw;

/// Largest common denominator served from a lookup table.
const TABLE_LIMIT: u64 = 1 << 16;

/// Integer increment sampler for lattice laws.
///
/// Finite laws whose masses share a small denominator `D` are drawn by
/// cutting `ceil(log2 D)`-bit chunks off 64-bit words and rejecting chunks
/// `>= D`; a simple walk then costs one bit per step.
pub(crate) enum LatticeSampler<'a> {
    Table { table: Vec<i64>, bits: u32, denom: u64, word: u64, left: u32 },
    Law(&'a IncrementLaw),
}

impl<'a> LatticeSampler<'a> {
    pub(crate) fn new(m: &'a IncrementLaw) -> Self {
        let Some(atoms) = m.exact_atoms() else {
            return LatticeSampler::Law(m);
        };
        let denom = atoms.iter().fold(BigInt::one(), |acc, (_, p)| acc.lcm(p.denom()));
        match denom.to_u64() {
            Some(d) if d <= TABLE_LIMIT => {
                let mut table = Vec::with_capacity(d as usize);
                for (k, p) in atoms {
                    let slots = (p * BigInt::from(d)).to_integer().to_usize().unwrap_or(0);
                    table.extend(std::iter::repeat_n(*k, slots));
                }
                let bits = (64 - (d - 1).leading_zeros()).max(1);
                LatticeSampler::Table { table, bits, denom: d, word: 0, left: 0 }
            }
            _ => LatticeSampler::Law(m),
        }
    }

    #[inline]
    pub(crate) fn next<R: RngCore>(&mut self, rng: &mut R) -> i128 {
        match self {
            LatticeSampler::Table { table, bits, denom, word, left } => loop {
                if *left < *bits {
                    *word = rng.next_u64();
                    *left = 64;
                }
                let v = *word & ((1u64 << *bits) - 1);
                *word >>= *bits;
                *left -= *bits;
                if v < *denom {
                    return table[v as usize] as i128;
                }
            },
            LatticeSampler::Law(m) => {
                let y = m.sample(rng);
                if y.abs() < 1e36 {
                    y as i128
                } else {
                    y.signum() as i128 * 10i128.pow(36)
                }
            }
        }
    }
}
