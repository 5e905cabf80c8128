#![allow(dead_code)]

use num_bigint::BigInt;
use num_rational::BigRational;
use rand::Rng;
use reflectlab::measures::{parse_law, IncrementLaw};

/// Law specs exercised across the integration and acceptance tests.
pub const CORPUS: &[&str] = &[
    "lat:pmf(d=1;1:0.5,2:0.5)",
    "lat:pmf(0:1/3,1:1/3,2:1/3)",
    "lat:pmf(1:1/6,2:1/3,5:1/2)",
    "lat:pmf(d=2;2:0.5,4:0.5)",
    "lat:pmf(0:0.1,3:0.6,7:0.3)",
    "lat:powerlaw(a=0.3)",
    "lat:powerlaw(a=0.4)",
    "lat:powerlaw(a=0.5)",
    "lat:powerlaw(a=0.7)",
    "lat:powerlaw(a=1)",
    "lat:powerlaw(a=1.5)",
    "lat:powerlaw(a=2.5)",
    "lat:logpow(a=0.5,b=1)",
    "lat:logpow(a=0.5,b=-1)",
    "lat:logpow(a=0.5,b=0.5)",
    "lat:logpow(a=0.8,b=1)",
    "lat:logpow(a=0.2,b=0.5)",
    "int:pmf(-1:0.5,1:0.5)",
    "int:pmf(-2:1/6,-1:1/3,1:1/3,2:1/6)",
    "int:pmf(-1:0.25,0:0.25,2:0.5)",
    "int:sympow(a=0.5)",
    "int:sympow(a=1)",
    "int:sympow(a=1.2)",
    "int:sympow(a=1.5)",
    "cont:exp(rate=1)",
    "cont:exp(rate=0.25)",
    "cont:uniform(lo=0,hi=1)",
    "cont:uniform(lo=0.5,hi=3)",
    "cont:pareto(alpha=0.4,scale=1)",
    "cont:pareto(alpha=0.5,scale=1)",
    "cont:pareto(alpha=0.75,scale=1)",
    "cont:pareto(alpha=1.5,scale=2)",
];

pub fn corpus() -> Vec<IncrementLaw> {
    CORPUS.iter().map(|s| parse_law(s).unwrap()).collect()
}

/// Corpus laws living on the half-line (lattice or continuous).
pub fn half_line_corpus() -> Vec<IncrementLaw> {
    corpus().into_iter().filter(|m| !m.is_signed()).collect()
}

pub fn ratio(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// A finite half-line lattice law with 2 to 5 atoms in `0..=9` and small
/// integer weights, held exactly.
pub fn random_rational_law<R: Rng>(rng: &mut R) -> IncrementLaw {
    loop {
        let size = rng.gen_range(2..=5);
        let mut support: Vec<i64> = Vec::new();
        while support.len() < size {
            let k = rng.gen_range(0..=9);
            if !support.contains(&k) {
                support.push(k);
            }
        }
        support.sort();
        let weights: Vec<i64> = support.iter().map(|_| rng.gen_range(1..=9)).collect();
        let total: i64 = weights.iter().sum();
        let atoms: Vec<(i64, BigRational)> =
            support.iter().zip(&weights).map(|(&k, &w)| (k, ratio(w, total))).collect();
        if let Ok(m) = IncrementLaw::lattice_pmf(&atoms) {
            return m;
        }
    }
}
