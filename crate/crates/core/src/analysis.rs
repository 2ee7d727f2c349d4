//! Closed-form success probabilities and independent brute-force oracles.
//!
//! Probabilities in this crate are dyadic rationals, so they are carried
//! exactly: [`ExactRational`] wraps an arbitrary-precision reduced
//! fraction. Floating point appears only in the large-`N` asymptote and in
//! its log-domain comparison value.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, AddAssign, Mul, Sub};

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// An exact probability as a reduced fraction of arbitrary-precision
/// integers. All in-scope probabilities have power-of-two denominators.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ExactRational(BigRational);

impl ExactRational {
    pub fn zero() -> Self {
        ExactRational(BigRational::zero())
    }

    pub fn one() -> Self {
        ExactRational(BigRational::one())
    }

    /// `num / den`; `den` must be nonzero.
    pub fn new(num: i64, den: u64) -> Self {
        ExactRational(BigRational::new(BigInt::from(num), BigInt::from(den)))
    }

    /// `num / 2^pow`.
    pub fn dyadic(num: u64, pow: u32) -> Self {
        ExactRational(BigRational::new(
            BigInt::from(num),
            BigInt::from(2u8).pow(pow),
        ))
    }

    pub fn from_big(num: BigInt, den: BigInt) -> Self {
        ExactRational(BigRational::new(num, den))
    }

    pub fn numer(&self) -> &BigInt {
        self.0.numer()
    }

    pub fn denom(&self) -> &BigInt {
        self.0.denom()
    }

    /// True when the reduced denominator is a power of two.
    pub fn is_dyadic(&self) -> bool {
        let den = self.0.denom().magnitude();
        den.count_ones() == 1
    }

    pub fn to_f64(&self) -> f64 {
        self.0.to_f64().unwrap_or(f64::NAN)
    }

    pub fn is_probability(&self) -> bool {
        !self.0.is_negative() && self.0 <= BigRational::one()
    }
}

impl fmt::Display for ExactRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.denom().is_one() {
            write!(f, "{}", self.0.numer())
        } else {
            write!(f, "{}/{}", self.0.numer(), self.0.denom())
        }
    }
}

impl PartialOrd for ExactRational {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for ExactRational {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.cmp(&other.0)
    }
}

macro_rules! rational_binop {
    ($trait:ident, $method:ident) => {
        impl $trait for ExactRational {
            type Output = ExactRational;
            fn $method(self, rhs: ExactRational) -> ExactRational {
                ExactRational((self.0).$method(rhs.0))
            }
        }

        impl $trait for &ExactRational {
            type Output = ExactRational;
            fn $method(self, rhs: &ExactRational) -> ExactRational {
                ExactRational((&self.0).$method(&rhs.0))
            }
        }
    };
}

rational_binop!(Add, add);
rational_binop!(Sub, sub);
rational_binop!(Mul, mul);

impl AddAssign<&ExactRational> for ExactRational {
    fn add_assign(&mut self, rhs: &ExactRational) {
        self.0 += &rhs.0;
    }
}

/// Binomial coefficient `C(n, k)` as an arbitrary-precision integer.
pub fn binomial(n: u64, k: u64) -> BigUint {
    num_integer::binomial(BigUint::from(n), BigUint::from(k))
}

/// Success probability of the phase-ramp schemes with an `n`-qubit
/// program: `1 - 1/2^n`.
pub fn p_vmc(n: u32) -> ExactRational {
    ExactRational::one() - ExactRational::dyadic(1, n)
}

/// Success probability with `n` copies of the single-qubit program:
/// `1 - C(n, (n-1)/2) / 2^n` for odd `n`. Even `n` gives no improvement
/// over `n - 1` copies and returns that value.
pub fn p_multicopy(n: u32) -> Result<ExactRational> {
    if n == 0 {
        return Err(Error::OutOfRange {
            what: "copies",
            got: 0,
            min: 1,
            max: u64::MAX,
        });
    }
    let n = if n.is_multiple_of(2) { n - 1 } else { n };
    let central = binomial(n as u64, (n as u64 - 1) / 2);
    let denom = BigInt::from(2u8).pow(n);
    Ok(ExactRational::one() - ExactRational::from_big(BigInt::from(central), denom))
}

/// Large-`n` limit of [`p_multicopy`]: `1 - sqrt(2 / (pi n))`.
pub fn p_asymptotic(n: u32) -> f64 {
    1.0 - (2.0 / (std::f64::consts::PI * n as f64)).sqrt()
}

/// Floating-point value of [`p_multicopy`] computed in the log domain, so
/// it stays finite for `n` far beyond what fits in a machine word.
pub fn p_multicopy_log_domain(n: u32) -> f64 {
    let n = if n.is_multiple_of(2) { n - 1 } else { n };
    let half = (n as u64 - 1) / 2;
    let log_central = ln_factorial(n as u64) - ln_factorial(half) - ln_factorial(n as u64 - half);
    1.0 - (log_central - n as f64 * std::f64::consts::LN_2).exp()
}

fn ln_factorial(n: u64) -> f64 {
    (2..=n).map(|k| (k as f64).ln()).sum()
}

/// First-passage oracle for the fair +-1 walk: enumerates all `2^n` sign
/// sequences and counts those whose partial sums reach +1. Independent of
/// the quantum simulation; `n` is capped at 25 to keep the enumeration at
/// desk scale.
pub fn first_passage_oracle(n: u32) -> Result<ExactRational> {
    if n == 0 || n > 25 {
        return Err(Error::OutOfRange {
            what: "walk length",
            got: n as u64,
            min: 1,
            max: 25,
        });
    }
    let mut hits: u64 = 0;
    for seq in 0..(1u64 << n) {
        let mut position: i32 = 0;
        for step in 0..n {
            position += if (seq >> step) & 1 == 1 { 1 } else { -1 };
            if position == 1 {
                hits += 1;
                break;
            }
        }
    }
    Ok(ExactRational::dyadic(hits, n))
}

/// Maximum-matching oracle for the single-shot construction.
///
/// Builds the bipartite graph on two copies of `{0, .., 2^n - 1}` with an
/// edge `j -> k` whenever `|k| = |j| + 1` in Hamming weight, computes a
/// maximum matching with Hopcroft-Karp, and returns the number of
/// unmatched rows. Independent of the greedy permutation builder.
pub fn matching_deficit_oracle(n: u32) -> Result<u64> {
    if n == 0 || n > 11 {
        return Err(Error::OutOfRange {
            what: "program qubits",
            got: n as u64,
            min: 1,
            max: 11,
        });
    }
    let dim = 1usize << n;
    let mut by_weight: Vec<Vec<usize>> = vec![Vec::new(); n as usize + 2];
    for j in 0..dim {
        by_weight[(j as u64).count_ones() as usize].push(j);
    }
    // adj(j) = slice of right nodes one weight level up
    let adjacency = |j: usize| -> &[usize] {
        let w = (j as u64).count_ones() as usize + 1;
        if w <= n as usize {
            &by_weight[w]
        } else {
            &[]
        }
    };
    let matched = hopcroft_karp(dim, adjacency);
    Ok((dim - matched) as u64)
}

const UNMATCHED: usize = usize::MAX;

fn hopcroft_karp<'a, F>(count: usize, adjacency: F) -> usize
where
    F: Fn(usize) -> &'a [usize],
{
    let mut pair_left = vec![UNMATCHED; count];
    let mut pair_right = vec![UNMATCHED; count];
    let mut dist = vec![usize::MAX; count];
    let mut queue = std::collections::VecDeque::new();
    let mut matched = 0usize;

    loop {
        // BFS layers from free left vertices.
        queue.clear();
        for left in 0..count {
            if pair_left[left] == UNMATCHED {
                dist[left] = 0;
                queue.push_back(left);
            } else {
                dist[left] = usize::MAX;
            }
        }
        let mut found_augmenting = false;
        while let Some(left) = queue.pop_front() {
            for &right in adjacency(left) {
                let next = pair_right[right];
                if next == UNMATCHED {
                    found_augmenting = true;
                } else if dist[next] == usize::MAX {
                    dist[next] = dist[left] + 1;
                    queue.push_back(next);
                }
            }
        }
        if !found_augmenting {
            break;
        }
        for left in 0..count {
            if pair_left[left] == UNMATCHED
                && augment(left, &adjacency, &mut pair_left, &mut pair_right, &mut dist)
            {
                matched += 1;
            }
        }
    }
    matched
}

fn augment<'a, F>(
    left: usize,
    adjacency: &F,
    pair_left: &mut [usize],
    pair_right: &mut [usize],
    dist: &mut [usize],
) -> bool
where
    F: Fn(usize) -> &'a [usize],
{
    for &right in adjacency(left) {
        let next = pair_right[right];
        if next == UNMATCHED
            || (dist[next] == dist[left].wrapping_add(1)
                && augment(next, adjacency, pair_left, pair_right, dist))
        {
            pair_left[left] = right;
            pair_right[right] = left;
            return true;
        }
    }
    dist[left] = usize::MAX;
    false
}

/// Success probability of preprocessing `2^x - 1` program copies and
/// feeding the result into a phase-ramp processor:
/// `1 - C(2^x - 1, 2^{x-1} - 1) / 2^{2^x - 1}`.
pub fn p_preprocess(x: u32) -> Result<ExactRational> {
    if x == 0 || x > 6 {
        return Err(Error::OutOfRange {
            what: "preprocessing levels",
            got: x as u64,
            min: 1,
            max: 6,
        });
    }
    let copies = (1u64 << x) - 1;
    let central = binomial(copies, (1u64 << (x - 1)) - 1);
    let denom = BigInt::from(2u8).pow(copies as u32);
    Ok(ExactRational::one() - ExactRational::from_big(BigInt::from(central), denom))
}
