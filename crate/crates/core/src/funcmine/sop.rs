//! Sum-of-products synthesis by Quine–McCluskey tabulation.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

pub const VARIABLES: [char; 4] = ['A', 'B', 'C', 'D'];

/// A product term over A, B, C, D. Bit 3 of `care` and `value` is A.
/// Variables outside `care` do not appear; `value` is zero there.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Term {
    pub care: u8,
    pub value: u8,
}

impl Term {
    pub fn minterm(s: u8) -> Self {
        Self {
            care: 0xF,
            value: s & 0xF,
        }
    }

    pub fn covers(self, s: u8) -> bool {
        s & self.care == self.value
    }

    pub fn literals(self) -> u32 {
        self.care.count_ones()
    }

    /// Rows where the term is true.
    pub fn table(self) -> u16 {
        (0..16u8)
            .filter(|&s| self.covers(s))
            .fold(0, |t, s| t | 1 << s)
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.care == 0 {
            return f.write_str("1");
        }
        for (i, v) in VARIABLES.iter().enumerate() {
            let bit = 1 << (3 - i);
            if self.care & bit != 0 {
                write!(f, "{v}")?;
                if self.value & bit == 0 {
                    f.write_str("'")?;
                }
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SopExpression {
    pub terms: Vec<Term>,
}

impl SopExpression {
    pub fn eval(&self, s: u8) -> bool {
        self.terms.iter().any(|t| t.covers(s))
    }

    pub fn table(&self) -> u16 {
        self.terms.iter().fold(0, |acc, t| acc | t.table())
    }
}

/// `A'B + CD'`; `0` for the empty sum and `1` for the empty product.
impl fmt::Display for SopExpression {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (i, t) in self.terms.iter().enumerate() {
            if i > 0 {
                f.write_str(" + ")?;
            }
            write!(f, "{t}")?;
        }
        Ok(())
    }
}

/// Prime implicants of the on-set of `table`.
pub fn prime_implicants(table: u16) -> Vec<Term> {
    let mut current: BTreeSet<Term> = (0..16u8)
        .filter(|&s| table >> s & 1 == 1)
        .map(Term::minterm)
        .collect();
    let mut primes = BTreeSet::new();
    while !current.is_empty() {
        let mut merged = BTreeSet::new();
        let mut used = BTreeSet::new();
        let terms: Vec<Term> = current.iter().copied().collect();
        for (i, a) in terms.iter().enumerate() {
            for b in &terms[i + 1..] {
                let diff = a.value ^ b.value;
                if a.care == b.care && diff.count_ones() == 1 {
                    merged.insert(Term {
                        care: a.care & !diff,
                        value: a.value & !diff,
                    });
                    used.insert(*a);
                    used.insert(*b);
                }
            }
        }
        primes.extend(current.difference(&used).copied());
        current = merged;
    }
    primes.into_iter().collect()
}

/// Minimised sum of products for `table`: essential prime implicants first,
/// then greedily the prime covering most uncovered rows (fewer literals,
/// then term order, break ties). Terms are listed in text order.
pub fn sop(table: u16) -> SopExpression {
    let primes = prime_implicants(table);
    let mut uncovered = table;
    let mut chosen: Vec<Term> = Vec::new();
    for s in 0..16u8 {
        if table >> s & 1 == 1 {
            let mut covering = primes.iter().filter(|p| p.covers(s));
            if let (Some(&only), None) = (covering.next(), covering.next()) {
                if !chosen.contains(&only) {
                    chosen.push(only);
                    uncovered &= !only.table();
                }
            }
        }
    }
    while uncovered != 0 {
        let best = primes
            .iter()
            .filter(|p| !chosen.contains(p))
            .max_by(|a, b| {
                let gain = |t: &Term| (t.table() & uncovered).count_ones();
                gain(a)
                    .cmp(&gain(b))
                    .then(b.literals().cmp(&a.literals()))
                    .then(b.cmp(a))
            })
            .copied()
            .expect("primes cover the on-set");
        chosen.push(best);
        uncovered &= !best.table();
    }
    chosen.sort_by_cached_key(|t| t.to_string());
    SopExpression { terms: chosen }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constants() {
        assert_eq!(sop(0).to_string(), "0");
        assert!(sop(0).terms.is_empty());
        let one = sop(0xFFFF);
        assert_eq!(one.terms, vec![Term { care: 0, value: 0 }]);
        assert_eq!(one.to_string(), "1");
    }

    #[test]
    fn nand_and_and() {
        assert_eq!(sop(0x7FFF).to_string(), "A' + B' + C' + D'");
        assert_eq!(sop(0x8000).to_string(), "ABCD");
    }

    #[test]
    fn select_and_xor() {
        // A is bit 3 of the state, so A = 1 on states 8..15.
        assert_eq!(sop(0xFF00).to_string(), "A");
        assert_eq!(sop(0x00FF).to_string(), "A'");
        assert_eq!(sop(0xAAAA).to_string(), "D");
        let xor_cd = (0..16u8)
            .filter(|s| (s >> 1 ^ s) & 1 == 1)
            .fold(0u16, |t, s| t | 1 << s);
        let e = sop(xor_cd);
        assert_eq!(e.terms.len(), 2);
        assert_eq!(e.table(), xor_cd);
    }

    #[test]
    fn literal_syntax() {
        let t = Term {
            care: 0b1010,
            value: 0b0010,
        };
        assert_eq!(t.to_string(), "A'C");
        assert_eq!(t.literals(), 2);
    }

    #[test]
    fn exhaustive_round_trip() {
        for table in 0..=u16::MAX {
            let e = sop(table);
            assert_eq!(e.table(), table, "{table:#06x} → {e}");
            for s in 0..16u8 {
                assert_eq!(e.eval(s), table >> s & 1 == 1);
            }
        }
    }

    #[test]
    fn chosen_terms_are_prime() {
        for table in (0..=u16::MAX).step_by(97) {
            let primes = prime_implicants(table);
            for t in sop(table).terms {
                assert!(primes.contains(&t));
                assert_eq!(t.table() & !table, 0);
            }
        }
    }
}
