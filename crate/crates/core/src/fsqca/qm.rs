//! Quine-McCluskey minimization with an exact minimum cover.
//!
//! Only the supplied minterms are used; remainders are never treated as
//! don't-cares, which yields the conservative solution.

use std::collections::{BTreeSet, HashSet};

use serde::{Deserialize, Serialize};

use super::QcaError;

/// A product term: condition `i` appears when bit `i` of `mask` is set,
/// positively when bit `i` of `value` is set and negated otherwise.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Implicant {
    pub mask: u32,
    pub value: u32,
}

impl Implicant {
    pub fn minterm(m: u32, k: usize) -> Self {
        let mask = full_mask(k);
        Implicant { mask, value: m & mask }
    }

    pub fn covers(&self, configuration: u32) -> bool {
        configuration & self.mask == self.value
    }

    pub fn literal_count(&self) -> u32 {
        self.mask.count_ones()
    }

    /// `unicorn*~b2c`-style expression; the empty product reads
    /// `all configurations`.
    pub fn expression(&self, conditions: &[String]) -> String {
        if self.mask == 0 {
            return "all configurations".to_string();
        }
        conditions
            .iter()
            .enumerate()
            .filter(|(i, _)| (self.mask >> i) & 1 == 1)
            .map(|(i, c)| {
                if (self.value >> i) & 1 == 1 {
                    c.clone()
                } else {
                    format!("~{c}")
                }
            })
            .collect::<Vec<_>>()
            .join("*")
    }

    /// Positional notation over `k` conditions: `1`, `0` or `-` per condition.
    pub fn pattern(&self, k: usize) -> String {
        (0..k)
            .map(|i| {
                if (self.mask >> i) & 1 == 0 {
                    '-'
                } else if (self.value >> i) & 1 == 1 {
                    '1'
                } else {
                    '0'
                }
            })
            .collect()
    }
}

fn full_mask(k: usize) -> u32 {
    if k >= 32 {
        u32::MAX
    } else {
        (1u32 << k) - 1
    }
}

fn validate(minterms: &[u32], k: usize) -> Result<BTreeSet<u32>, QcaError> {
    if k > super::MAX_CONDITIONS {
        return Err(QcaError::TooManyConditions(k));
    }
    let set: BTreeSet<u32> = minterms.iter().copied().collect();
    if set.is_empty() {
        return Err(QcaError::NoMinterms);
    }
    if let Some(&m) = set.iter().find(|&&m| m > full_mask(k)) {
        return Err(QcaError::MintermRange { minterm: m, k });
    }
    Ok(set)
}

/// All prime implicants of the minterm set, by repeated merging of terms that
/// differ in a single literal.
pub fn prime_implicants(minterms: &[u32], k: usize) -> Result<Vec<Implicant>, QcaError> {
    let set = validate(minterms, k)?;
    let mut level: HashSet<Implicant> = set.iter().map(|&m| Implicant::minterm(m, k)).collect();
    let mut primes = BTreeSet::new();
    while !level.is_empty() {
        let mut merged: HashSet<Implicant> = HashSet::new();
        let mut used: HashSet<Implicant> = HashSet::new();
        for imp in &level {
            for bit in (0..k).map(|i| 1u32 << i) {
                if imp.mask & bit == 0 || imp.value & bit != 0 {
                    continue;
                }
                let partner = Implicant {
                    mask: imp.mask,
                    value: imp.value | bit,
                };
                if level.contains(&partner) {
                    used.insert(*imp);
                    used.insert(partner);
                    merged.insert(Implicant {
                        mask: imp.mask & !bit,
                        value: imp.value,
                    });
                }
            }
        }
        primes.extend(level.iter().filter(|i| !used.contains(i)).copied());
        level = merged;
    }
    Ok(primes.into_iter().collect())
}

/// Nodes explored by the exact cover search before it settles for the best
/// cover found so far.
pub const COVER_SEARCH_BUDGET: usize = 2_000;

/// Sum of prime implicants covering exactly the given minterms, minimal in
/// the number of terms and then in literals. Cyclic cores too large for
/// [`COVER_SEARCH_BUDGET`] fall back to the best irredundant cover found.
pub fn quine_mccluskey(minterms: &[u32], k: usize) -> Result<Vec<Implicant>, QcaError> {
    let primes = prime_implicants(minterms, k)?;
    let terms: Vec<u32> = validate(minterms, k)?.into_iter().collect();
    let mut chosen = minimum_cover(&primes, &terms);
    chosen.sort_by_key(|t| (t.literal_count(), t.mask, t.value));
    Ok(chosen)
}

type Bits = Vec<u64>;

fn bits_with(len: usize, members: impl Iterator<Item = usize>) -> Bits {
    let mut b = vec![0u64; len.div_ceil(64)];
    for i in members {
        b[i / 64] |= 1 << (i % 64);
    }
    b
}

fn is_zero(b: &Bits) -> bool {
    b.iter().all(|&w| w == 0)
}

fn count(b: &Bits) -> u32 {
    b.iter().map(|w| w.count_ones()).sum()
}

fn and_count(a: &Bits, b: &Bits) -> u32 {
    a.iter().zip(b).map(|(x, y)| (x & y).count_ones()).sum()
}

fn minus(a: &Bits, b: &Bits) -> Bits {
    a.iter().zip(b).map(|(x, y)| x & !y).collect()
}

fn set_bits(b: &Bits) -> impl Iterator<Item = usize> + '_ {
    b.iter().enumerate().flat_map(|(w, &word)| {
        (0..64).filter(move |i| (word >> i) & 1 == 1).map(move |i| w * 64 + i)
    })
}

struct CoverSearch<'a> {
    primes: &'a [Implicant],
    cover: &'a [Bits],
    /// For each minterm index, the primes covering it.
    covering: &'a [Vec<usize>],
    best: (Vec<usize>, u32),
    nodes: usize,
}

impl CoverSearch<'_> {
    fn literals(&self, chosen: &[usize]) -> u32 {
        chosen.iter().map(|&p| self.primes[p].literal_count()).sum()
    }

    fn search(&mut self, uncovered: &Bits, chosen: &mut Vec<usize>) {
        self.nodes += 1;
        if is_zero(uncovered) {
            let lits = self.literals(chosen);
            if chosen.len() < self.best.0.len() || (chosen.len() == self.best.0.len() && lits < self.best.1) {
                self.best = (chosen.clone(), lits);
            }
            return;
        }
        if self.nodes > COVER_SEARCH_BUDGET {
            return;
        }
        let max_gain = self.cover.iter().map(|c| and_count(c, uncovered)).max().unwrap_or(0);
        if max_gain == 0 {
            return;
        }
        let lower = count(uncovered).div_ceil(max_gain) as usize;
        if chosen.len() + lower > self.best.0.len() {
            return;
        }
        // Branch on the uncovered minterm with the fewest covering primes.
        let m = set_bits(uncovered)
            .min_by_key(|&m| self.covering[m].len())
            .expect("uncovered minterm");
        let mut options = self.covering[m].clone();
        options.sort_by_key(|&p| {
            (
                std::cmp::Reverse(and_count(&self.cover[p], uncovered)),
                self.primes[p].literal_count(),
                p,
            )
        });
        for p in options {
            let rest = minus(uncovered, &self.cover[p]);
            chosen.push(p);
            self.search(&rest, chosen);
            chosen.pop();
        }
    }
}

/// Largest gain first, fewer literals breaking ties.
fn greedy_cover(primes: &[Implicant], cover: &[Bits], uncovered: &Bits) -> Vec<usize> {
    let mut left = uncovered.clone();
    let mut chosen = Vec::new();
    while !is_zero(&left) {
        let p = (0..primes.len())
            .max_by_key(|&p| (and_count(&cover[p], &left), std::cmp::Reverse(primes[p].literal_count()), std::cmp::Reverse(p)))
            .expect("primes cover every minterm");
        left = minus(&left, &cover[p]);
        chosen.push(p);
    }
    chosen
}

/// Drops terms whose share of `target` is covered by the remaining terms,
/// most literals first.
fn make_irredundant(primes: &[Implicant], cover: &[Bits], chosen: &mut Vec<usize>, target: &Bits) {
    let mut order = chosen.clone();
    order.sort_by_key(|&p| (std::cmp::Reverse(primes[p].literal_count()), p));
    for p in order {
        let others: Vec<usize> = chosen.iter().copied().filter(|&q| q != p).collect();
        let mut left: Bits = cover[p].iter().zip(target).map(|(c, t)| c & t).collect();
        for &q in &others {
            left = minus(&left, &cover[q]);
        }
        if is_zero(&left) {
            *chosen = others;
        }
    }
}

fn minimum_cover(primes: &[Implicant], minterms: &[u32]) -> Vec<Implicant> {
    let n = minterms.len();
    let cover: Vec<Bits> = primes
        .iter()
        .map(|p| bits_with(n, minterms.iter().enumerate().filter(|(_, &m)| p.covers(m)).map(|(i, _)| i)))
        .collect();
    let covering: Vec<Vec<usize>> = minterms
        .iter()
        .map(|&m| (0..primes.len()).filter(|&p| primes[p].covers(m)).collect())
        .collect();

    // Essential primes first.
    let mut chosen: Vec<usize> = covering
        .iter()
        .filter(|c| c.len() == 1)
        .map(|c| c[0])
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let mut uncovered = bits_with(n, 0..n);
    for &p in &chosen {
        uncovered = minus(&uncovered, &cover[p]);
    }
    if !is_zero(&uncovered) {
        let mut seed = greedy_cover(primes, &cover, &uncovered);
        make_irredundant(primes, &cover, &mut seed, &uncovered);
        let seed_lits = seed.iter().map(|&p| primes[p].literal_count()).sum();
        let mut search = CoverSearch {
            primes,
            cover: &cover,
            covering: &covering,
            best: (seed, seed_lits),
            nodes: 0,
        };
        search.search(&uncovered, &mut Vec::new());
        chosen.extend(search.best.0);
    }
    chosen.into_iter().map(|p| primes[p]).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    // bit 0 = unicorn, bit 1 = b2c, bit 2 = platform
    fn names() -> Vec<String> {
        ["unicorn", "b2c", "platform"].iter().map(|s| s.to_string()).collect()
    }

    fn exprs(terms: &[Implicant]) -> Vec<String> {
        let mut v: Vec<String> = terms.iter().map(|t| t.expression(&names())).collect();
        v.sort();
        v
    }

    #[test]
    fn five_configuration_pattern() {
        let minterms = [0b111, 0b011, 0b101, 0b001, 0b110];
        let terms = quine_mccluskey(&minterms, 3).unwrap();
        assert_eq!(exprs(&terms), vec!["b2c*platform", "unicorn"]);
        assert_eq!(terms[0].pattern(3), "1--");
    }

    #[test]
    fn single_and_full() {
        assert_eq!(exprs(&quine_mccluskey(&[0b010], 3).unwrap()), vec!["~unicorn*b2c*~platform"]);
        let all: Vec<u32> = (0..8).collect();
        let t = quine_mccluskey(&all, 3).unwrap();
        assert_eq!(t, vec![Implicant { mask: 0, value: 0 }]);
        assert_eq!(t[0].expression(&names()), "all configurations");
    }

    #[test]
    fn errors() {
        assert_eq!(quine_mccluskey(&[], 3), Err(QcaError::NoMinterms));
        assert_eq!(quine_mccluskey(&[8], 3), Err(QcaError::MintermRange { minterm: 8, k: 3 }));
    }

    #[test]
    fn cyclic_core_is_solved_minimally() {
        // Classic cyclic function: minterms 0,1,2,5,6,7 over 3 variables has
        // six two-literal primes and a minimum cover of three.
        let terms = quine_mccluskey(&[0, 1, 2, 5, 6, 7], 3).unwrap();
        assert_eq!(terms.len(), 3);
        assert!(terms.iter().all(|t| t.literal_count() == 2));
    }

    fn evaluate(terms: &[Implicant], x: u32) -> bool {
        terms.iter().any(|t| t.covers(x))
    }

    #[test]
    fn random_sets_equivalent_and_prime() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            let k = rng.random_range(1..=6);
            let density = rng.random_range(0.05..0.95);
            let mut ms: Vec<u32> = (0..(1u32 << k)).filter(|_| rng.random_bool(density)).collect();
            if ms.is_empty() {
                ms.push(0);
            }
            let set: BTreeSet<u32> = ms.iter().copied().collect();
            let terms = quine_mccluskey(&ms, k).unwrap();
            for x in 0..(1u32 << k) {
                assert_eq!(evaluate(&terms, x), set.contains(&x));
            }
            for t in &terms {
                for i in 0..k {
                    let bit = 1 << i;
                    if t.mask & bit == 0 {
                        continue;
                    }
                    let wider = Implicant { mask: t.mask & !bit, value: t.value & !bit };
                    assert!((0..(1u32 << k)).any(|x| wider.covers(x) && !set.contains(&x)));
                }
            }
        }
    }

    #[test]
    fn minimum_term_count_matches_exhaustive_search() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for _ in 0..100 {
            let k = rng.random_range(2..=4);
            let ms: Vec<u32> = (0..(1u32 << k)).filter(|_| rng.random_bool(0.5)).collect();
            if ms.is_empty() {
                continue;
            }
            let primes = prime_implicants(&ms, k).unwrap();
            let best = quine_mccluskey(&ms, k).unwrap().len();
            // Smallest subset of primes covering every minterm.
            let mut smallest = usize::MAX;
            for subset in 1u64..(1u64 << primes.len().min(20)) {
                let size = subset.count_ones() as usize;
                if size >= smallest {
                    continue;
                }
                let ok = ms.iter().all(|&m| {
                    (0..primes.len()).any(|p| (subset >> p) & 1 == 1 && primes[p].covers(m))
                });
                if ok {
                    smallest = size;
                }
            }
            assert_eq!(best, smallest, "minterms {ms:?}");
        }
    }
}
