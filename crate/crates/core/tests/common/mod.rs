#![allow(dead_code)]

use std::collections::HashMap;

use varcong::congruence::{enumerate_all_congruences, EquivalenceRelation};
use varcong::semigroup::FiniteSemigroup;
use varcong::transform::Transformation;

pub fn t(s: &str) -> Transformation {
    s.parse().expect("valid transformation")
}

/// Every idempotent of `T_n`.
pub fn idempotents(n: usize) -> Vec<Transformation> {
    Transformation::all(n).filter(Transformation::is_idempotent).collect()
}

/// Every idempotent of degree `1..=n`.
pub fn idempotents_up_to(n: usize) -> Vec<Transformation> {
    (1..=n).flat_map(idempotents).collect()
}

/// Brute-force congruence lists, computed once per key.
#[derive(Default)]
pub struct OracleCache {
    lists: HashMap<String, Vec<EquivalenceRelation>>,
}

impl OracleCache {
    pub fn get(&mut self, key: &str, s: &FiniteSemigroup) -> &[EquivalenceRelation] {
        self.lists
            .entry(key.to_string())
            .or_insert_with(|| enumerate_all_congruences(s, 300).expect("within cap"))
    }
}
