//! Bell-diagonal states described by Pauli-class probabilities.
//!
//! Pair classes use the two-bit code `x | z << 1` (I=0, X=1, Z=2, Y=3); a joint class of k
//! pairs packs pair `t` into bits `2t..2t+2`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::pauli::{Pauli, PauliString};

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BellDiag {
    pub p_i: f64,
    pub p_x: f64,
    pub p_y: f64,
    pub p_z: f64,
}

impl BellDiag {
    pub fn new(p_i: f64, p_x: f64, p_y: f64, p_z: f64) -> Result<Self> {
        let d = BellDiag { p_i, p_x, p_y, p_z };
        let all = d.by_code();
        if all.iter().any(|&v| !(0.0..=1.0 + 1e-12).contains(&v)) || (all.iter().sum::<f64>() - 1.0).abs() > 1e-12 {
            return Err(Error::Config(format!("not a distribution: {all:?}")));
        }
        Ok(d)
    }

    /// The isotropic pair (1-p)Φ+ + p I/4.
    pub fn isotropic(p: f64) -> Self {
        BellDiag { p_i: 1.0 - 0.75 * p, p_x: p / 4.0, p_y: p / 4.0, p_z: p / 4.0 }
    }

    pub fn perfect() -> Self {
        BellDiag { p_i: 1.0, p_x: 0.0, p_y: 0.0, p_z: 0.0 }
    }

    pub fn fidelity(&self) -> f64 {
        self.p_i
    }

    /// Probabilities indexed by class code.
    pub fn by_code(&self) -> [f64; 4] {
        [self.p_i, self.p_x, self.p_z, self.p_y]
    }

    pub fn from_codes(v: [f64; 4]) -> Self {
        BellDiag { p_i: v[0], p_x: v[1], p_z: v[2], p_y: v[3] }
    }

    pub fn get(&self, p: Pauli) -> f64 {
        self.by_code()[p.code()]
    }

    /// (⟨XX⟩, ⟨YY⟩, ⟨ZZ⟩) from the Bell-basis sign table.
    pub fn correlators(&self) -> [f64; 3] {
        let BellDiag { p_i, p_x, p_y, p_z } = *self;
        [p_i + p_x - p_y - p_z, -p_i + p_x - p_y + p_z, p_i - p_x - p_y + p_z]
    }

    /// Bilateral Hadamard: exchanges the X and Z classes.
    pub fn hadamard(&self) -> Self {
        BellDiag { p_x: self.p_z, p_z: self.p_x, ..*self }
    }

    /// Isotropic state with the same fidelity.
    pub fn werner(&self) -> Self {
        let e = (1.0 - self.p_i) / 3.0;
        BellDiag { p_i: self.p_i, p_x: e, p_y: e, p_z: e }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BellClassDist {
    k: usize,
    probs: Vec<f64>,
}

impl BellClassDist {
    pub fn new(k: usize, probs: Vec<f64>) -> Result<Self> {
        if probs.len() != 1 << (2 * k) {
            return Err(Error::LengthMismatch(probs.len(), 1 << (2 * k)));
        }
        let total: f64 = probs.iter().sum();
        if probs.iter().any(|&p| p < 0.0) || (total - 1.0).abs() > 1e-12 {
            return Err(Error::Config(format!("class probabilities sum to {total}")));
        }
        Ok(BellClassDist { k, probs })
    }

    /// Normalizes non-negative weights.
    pub(crate) fn from_weights(k: usize, mut w: Vec<f64>) -> Self {
        let total: f64 = w.iter().sum();
        for v in &mut w {
            *v /= total;
        }
        BellClassDist { k, probs: w }
    }

    pub fn point(k: usize) -> Self {
        let mut probs = vec![0.0; 1 << (2 * k)];
        probs[0] = 1.0;
        BellClassDist { k, probs }
    }

    pub fn product(pairs: &[BellDiag]) -> Self {
        let k = pairs.len();
        let probs = (0..1usize << (2 * k))
            .map(|idx| (0..k).map(|t| pairs[t].by_code()[(idx >> (2 * t)) & 3]).product())
            .collect();
        BellClassDist { k, probs }
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn prob(&self, class: &PauliString) -> f64 {
        self.probs[class_index(class)]
    }

    pub fn identity_prob(&self) -> f64 {
        self.probs[0]
    }

    pub fn marginal(&self, pair: usize) -> Result<BellDiag> {
        if pair >= self.k {
            return Err(Error::PairIndex { index: pair, k: self.k });
        }
        let mut m = [0.0; 4];
        for (idx, &p) in self.probs.iter().enumerate() {
            m[(idx >> (2 * pair)) & 3] += p;
        }
        Ok(BellDiag::from_codes(m))
    }

    /// Σ P log2 P, with 0 log 0 = 0.
    pub fn neg_entropy(&self) -> f64 {
        self.probs.iter().filter(|&&p| p > 0.0).map(|&p| p * p.log2()).sum()
    }
}

pub fn correlators(dist: &BellClassDist, pair: usize) -> Result<[f64; 3]> {
    Ok(dist.marginal(pair)?.correlators())
}

pub fn class_index(class: &PauliString) -> usize {
    (0..class.n()).map(|t| class.get(t).code() << (2 * t)).sum()
}

pub fn class_from_index(k: usize, idx: usize) -> PauliString {
    let mut s = PauliString::identity(k);
    for t in 0..k {
        s.set(t, Pauli::from_code((idx >> (2 * t)) & 3));
    }
    s
}
