//! Weak compositions and power-set enumeration.

use crate::error::{Error, Result};
use crate::numerics::{binomial_u128, ln_factorial};

/// Number of weak compositions of `total` into `parts` parts.
pub fn composition_count(total: u32, parts: u32) -> u128 {
    assert!(parts >= 1);
    binomial_u128((total + parts - 1) as u64, (parts - 1) as u64)
}

/// All weak compositions of `total` into `parts` nonnegative parts, in
/// lexicographic order.
pub fn compositions(total: u32, parts: u32) -> Vec<Vec<u32>> {
    assert!(parts >= 1);
    let mut out = Vec::new();
    let mut cur = vec![0u32; parts as usize];
    fill(total, 0, &mut cur, &mut out);
    out
}

fn fill(remaining: u32, idx: usize, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
    if idx + 1 == cur.len() {
        cur[idx] = remaining;
        out.push(cur.clone());
        return;
    }
    for v in 0..=remaining {
        cur[idx] = v;
        fill(remaining - v, idx + 1, cur, out);
    }
}

/// One composition of the multinomial expansion of `F(y)^K` for a Gamma CDF
/// with integer shape `L`:
/// `F(y)^K = sum beta1 * y^beta2 * exp(-beta3 * y)`.
///
/// `parts[j]` for `j < L` counts factors `-exp(-y/s) (y/s)^j / j!`, and
/// `parts[L]` counts the factors equal to one.
#[derive(Debug, Clone, PartialEq)]
pub struct CompositionTerm {
    pub parts: Vec<u32>,
    pub beta1_negative: bool,
    pub ln_abs_beta1: f64,
    pub beta2: u32,
    pub beta3: f64,
}

impl CompositionTerm {
    pub fn beta1(&self) -> f64 {
        let v = self.ln_abs_beta1.exp();
        if self.beta1_negative {
            -v
        } else {
            v
        }
    }
}

/// Expansion terms of `F(y)^copies` for a Gamma law of integer `shape` and
/// per-unit `scale`, refusing more than `budget` compositions.
pub fn composition_terms(
    copies: u32,
    shape: u32,
    scale: f64,
    budget: u128,
) -> Result<Vec<CompositionTerm>> {
    let count = composition_count(copies, shape + 1);
    if count > budget {
        return Err(Error::TermBudget {
            what: "compositions",
            terms: count,
            budget,
        });
    }
    let ln_k = ln_factorial(copies);
    let ln_s = scale.ln();
    Ok(compositions(copies, shape + 1)
        .into_iter()
        .map(|parts| {
            let l = shape as usize;
            let mut ln_b = ln_k;
            let mut flips = 0u32;
            let mut beta2 = 0u32;
            for (j, &n) in parts.iter().enumerate() {
                ln_b -= ln_factorial(n);
                if j < l && n > 0 {
                    let jj = j as u32;
                    ln_b -= n as f64 * (ln_factorial(jj) + jj as f64 * ln_s);
                    flips += n;
                    beta2 += n * jj;
                }
            }
            let active = copies - parts[l];
            CompositionTerm {
                beta1_negative: flips % 2 == 1,
                ln_abs_beta1: ln_b,
                beta2,
                beta3: active as f64 / scale,
                parts,
            }
        })
        .collect())
}

/// One nonempty subset of a link set in an inclusion-exclusion sum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SubsetTerm {
    pub mask: u64,
    pub cardinality: u32,
    /// `+1` for odd cardinality, `-1` for even.
    pub sign: f64,
    /// Sum of member rates.
    pub rate_sum: f64,
}

/// All nonempty subsets of the links with the given rates.
pub fn subsets(rates: &[f64], budget: u128) -> Result<Vec<SubsetTerm>> {
    let n = rates.len();
    let count: u128 = if n >= 127 { u128::MAX } else { (1u128 << n) - 1 };
    if count > budget || n > 63 {
        return Err(Error::TermBudget {
            what: "subsets",
            terms: count,
            budget,
        });
    }
    Ok((1u64..(1u64 << n))
        .map(|mask| {
            let cardinality = mask.count_ones();
            let rate_sum = (0..n)
                .filter(|&i| mask >> i & 1 == 1)
                .map(|i| rates[i])
                .sum();
            SubsetTerm {
                mask,
                cardinality,
                sign: if cardinality % 2 == 1 { 1.0 } else { -1.0 },
                rate_sum,
            }
        })
        .collect())
}
