//! Syndrome lookup tables.
//!
//! A syndrome is keyed by its bits in V_S order: bit `i` of the key is s_{i+1}, and the text
//! form writes s_1 first.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::bell::{class_from_index, class_index};
use crate::compiler::CompiledCircuit;
use crate::error::{Error, Result};
use crate::pauli::{Pauli, PauliString};
use crate::sim::{LinearMap, EXACT_CAP};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DecoderTable {
    pub r_s: usize,
    pub k: usize,
    entries: BTreeMap<u64, PauliString>,
}

pub fn syndrome_key(bits: &[bool]) -> u64 {
    bits.iter().enumerate().fold(0, |acc, (i, &b)| acc | (b as u64) << i)
}

pub fn syndrome_text(r_s: usize, key: u64) -> String {
    (0..r_s).map(|i| if key >> i & 1 == 1 { '1' } else { '0' }).collect()
}

fn parse_syndrome(s: &str) -> Result<u64> {
    let mut key = 0;
    for (i, ch) in s.chars().enumerate() {
        match ch {
            '0' => {}
            '1' => key |= 1 << i,
            _ => return Err(Error::Parse { line: 1, ch }),
        }
    }
    Ok(key)
}

impl DecoderTable {
    /// Identity entries are dropped.
    pub fn from_entries(r_s: usize, k: usize, entries: &[(&str, &str)]) -> Result<Self> {
        let mut map = BTreeMap::new();
        for &(s, c) in entries {
            if s.len() != r_s {
                return Err(Error::LengthMismatch(s.len(), r_s));
            }
            let corr: PauliString = c.parse()?;
            if corr.n() != k {
                return Err(Error::LengthMismatch(corr.n(), k));
            }
            if !corr.is_identity() {
                map.insert(parse_syndrome(s)?, corr);
            }
        }
        Ok(DecoderTable { r_s, k, entries: map })
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn lookup(&self, key: u64) -> PauliString {
        self.entries.get(&key).cloned().unwrap_or_else(|| PauliString::identity(self.k))
    }

    pub fn lookup_text(&self, s: &str) -> Result<PauliString> {
        Ok(self.lookup(parse_syndrome(s)?))
    }

    /// Correction class index for every syndrome key.
    pub fn dense(&self) -> Vec<usize> {
        let mut v = vec![0; 1 << self.r_s];
        for (&key, c) in &self.entries {
            v[key as usize] = class_index(c);
        }
        v
    }

    /// Non-identity entries sorted by their text form.
    pub fn entries(&self) -> Vec<(String, PauliString)> {
        let mut v: Vec<_> = self.entries.iter().map(|(&k, c)| (syndrome_text(self.r_s, k), c.clone())).collect();
        v.sort_by(|a, b| a.0.cmp(&b.0));
        v
    }

    pub fn to_json(&self) -> String {
        #[derive(Serialize)]
        struct Entry {
            s: String,
            c: String,
        }
        #[derive(Serialize)]
        struct Out {
            syndrome_bits: usize,
            entries: Vec<Entry>,
        }
        let out = Out {
            syndrome_bits: self.r_s,
            entries: self.entries().into_iter().map(|(s, c)| Entry { s, c: c.to_string() }).collect(),
        };
        serde_json::to_string_pretty(&out).expect("plain data")
    }
}

pub fn table_513() -> DecoderTable {
    const T: [(&str, &str); 11] = [
        ("0011", "Y"),
        ("0101", "Z"),
        ("0110", "Y"),
        ("0111", "Z"),
        ("1001", "Z"),
        ("1010", "Z"),
        ("1011", "Y"),
        ("1100", "Y"),
        ("1101", "Y"),
        ("1110", "Z"),
        ("1111", "X"),
    ];
    DecoderTable::from_entries(4, 1, &T).expect("well-formed table")
}

pub fn table_713() -> DecoderTable {
    const T: [(&str, &str); 43] = [
        ("000011", "X"),
        ("000101", "X"),
        ("000110", "X"),
        ("001011", "X"),
        ("001100", "Y"),
        ("001101", "Z"),
        ("001110", "Z"),
        ("010010", "Y"),
        ("010011", "X"),
        ("010100", "Y"),
        ("010101", "X"),
        ("010110", "Z"),
        ("010111", "Y"),
        ("011000", "Z"),
        ("011001", "X"),
        ("011010", "Z"),
        ("011100", "Z"),
        ("011110", "Y"),
        ("011111", "Z"),
        ("100001", "Y"),
        ("100011", "X"),
        ("100100", "Y"),
        ("100101", "Z"),
        ("100110", "X"),
        ("100111", "Y"),
        ("101000", "Z"),
        ("101001", "Z"),
        ("101010", "X"),
        ("101100", "Z"),
        ("101101", "Y"),
        ("101111", "Z"),
        ("110000", "Z"),
        ("110001", "X"),
        ("110010", "X"),
        ("110011", "Y"),
        ("110100", "Z"),
        ("110101", "Y"),
        ("110110", "Y"),
        ("110111", "Z"),
        ("111011", "Z"),
        ("111101", "Z"),
        ("111110", "Z"),
        ("111111", "Y"),
    ];
    DecoderTable::from_entries(6, 1, &T).expect("well-formed table")
}

fn label_rank(k: usize, idx: usize) -> Vec<Pauli> {
    let c = class_from_index(k, idx);
    (0..k).map(|t| c.get(t)).collect()
}

/// Most likely logical class per syndrome under i.i.d. isotropic errors of strength
/// `p_prior`; ties go to the lexicographically smallest label with I < X < Y < Z.
pub fn generate_ml_decoder(circ: &CompiledCircuit, p_prior: f64) -> Result<DecoderTable> {
    if circ.n > EXACT_CAP {
        return Err(Error::Cap { what: "decoder enumeration", n: circ.n, cap: EXACT_CAP });
    }
    let map = LinearMap::physical(circ);
    let k = circ.k;
    let classes = 1usize << (2 * k);
    let mut w = vec![0.0; (1usize << circ.r_s()) * classes];
    let q = crate::bell::BellDiag::isotropic(p_prior).by_code();
    map.for_each(&vec![q; circ.n], |syn, cls, p| w[syn as usize * classes + cls] += p);

    let mut entries = BTreeMap::new();
    for syn in 0..1usize << circ.r_s() {
        let row = &w[syn * classes..(syn + 1) * classes];
        let top = row.iter().cloned().fold(0.0, f64::max);
        if top == 0.0 {
            continue;
        }
        let best = (0..classes)
            .filter(|&c| row[c] >= top * (1.0 - 1e-12))
            .min_by_key(|&c| label_rank(k, c))
            .expect("non-empty");
        if best != 0 {
            entries.insert(syn as u64, class_from_index(k, best));
        }
    }
    Ok(DecoderTable { r_s: circ.r_s(), k, entries })
}
