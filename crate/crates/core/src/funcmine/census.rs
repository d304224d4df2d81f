use std::collections::BTreeMap;
use std::io::Write;

use serde::{Deserialize, Serialize};

use super::sop;
use crate::Result;

/// Histogram of mined tables keyed by their decimal value.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FunctionCensus {
    pub counts: BTreeMap<u16, u64>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CensusEntry {
    pub table_decimal: u16,
    pub hex: String,
    pub count: u64,
    pub sop: String,
}

pub fn census_functions(tables: impl IntoIterator<Item = u16>) -> FunctionCensus {
    let mut census = FunctionCensus::default();
    for t in tables {
        *census.counts.entry(t).or_insert(0) += 1;
    }
    census
}

impl FunctionCensus {
    pub fn total(&self) -> u64 {
        self.counts.values().sum()
    }

    pub fn unique(&self) -> usize {
        self.counts.len()
    }

    pub fn merge(&mut self, other: &FunctionCensus) {
        for (&t, &n) in &other.counts {
            *self.counts.entry(t).or_insert(0) += n;
        }
    }

    /// The `n` most frequent tables, ties by ascending value; constant
    /// FALSE and TRUE are left out unless `constants` is set.
    pub fn top(&self, n: usize, constants: bool) -> Vec<CensusEntry> {
        let mut v: Vec<(u16, u64)> = self
            .counts
            .iter()
            .filter(|(&t, _)| constants || (t != 0 && t != u16::MAX))
            .map(|(&t, &c)| (t, c))
            .collect();
        v.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
        v.into_iter()
            .take(n)
            .map(|(t, count)| CensusEntry {
                table_decimal: t,
                hex: format!("0x{t:04X}"),
                count,
                sop: sop(t).to_string(),
            })
            .collect()
    }

    /// `table_decimal,count` rows in ascending table order.
    pub fn write_csv(&self, mut w: impl Write) -> Result<()> {
        writeln!(w, "table_decimal,count")?;
        for (t, n) in &self.counts {
            writeln!(w, "{t},{n}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn ten_false_tables() {
        let c = census_functions(vec![0u16; 10]);
        assert_eq!(c.counts, BTreeMap::from([(0, 10)]));
        assert_eq!(c.unique(), 1);
        assert!(c.top(5, false).is_empty());
        assert_eq!(c.top(5, true)[0].sop, "0");
    }

    #[test]
    fn top_entries() {
        let c = census_functions([0x7FFF, 0x7FFF, 0x8000, 0, 0, 0, 0xFFFF]);
        let top = c.top(2, false);
        assert_eq!(top[0].table_decimal, 32767);
        assert_eq!(top[0].hex, "0x7FFF");
        assert_eq!(top[0].count, 2);
        assert_eq!(top[0].sop, "A' + B' + C' + D'");
        assert_eq!(top[1].sop, "ABCD");
        let mut out = Vec::new();
        c.write_csv(&mut out).unwrap();
        assert_eq!(
            String::from_utf8(out).unwrap(),
            "table_decimal,count\n0,3\n32767,2\n32768,1\n65535,1\n"
        );
    }

    proptest! {
        #[test]
        fn counts_are_conserved(tables in prop::collection::vec(any::<u16>(), 0..500)) {
            let c = census_functions(tables.iter().copied());
            prop_assert_eq!(c.total(), tables.len() as u64);
            let (a, b) = tables.split_at(tables.len() / 2);
            let mut merged = census_functions(a.iter().copied());
            merged.merge(&census_functions(b.iter().copied()));
            prop_assert_eq!(merged, c);
        }
    }
}
