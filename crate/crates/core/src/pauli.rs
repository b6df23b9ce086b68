//! Phase-free Pauli strings and stabilizer tableaux.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::f2::BitMatrix;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub const ALL: [Pauli; 4] = [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z];

    pub fn from_bits(x: bool, z: bool) -> Self {
        match (x, z) {
            (false, false) => Pauli::I,
            (true, false) => Pauli::X,
            (true, true) => Pauli::Y,
            (false, true) => Pauli::Z,
        }
    }

    pub fn bits(self) -> (bool, bool) {
        match self {
            Pauli::I => (false, false),
            Pauli::X => (true, false),
            Pauli::Y => (true, true),
            Pauli::Z => (false, true),
        }
    }

    /// Two-bit code `x | z << 1`, the packing used by the simulator.
    pub fn code(self) -> usize {
        let (x, z) = self.bits();
        x as usize | (z as usize) << 1
    }

    pub fn from_code(c: usize) -> Self {
        Self::from_bits(c & 1 == 1, c & 2 == 2)
    }

    pub fn to_char(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }

    pub fn from_char(c: char) -> Option<Self> {
        match c {
            'I' => Some(Pauli::I),
            'X' => Some(Pauli::X),
            'Y' => Some(Pauli::Y),
            'Z' => Some(Pauli::Z),
            _ => None,
        }
    }
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct PauliString {
    x: Vec<bool>,
    z: Vec<bool>,
}

impl PauliString {
    pub fn identity(n: usize) -> Self {
        PauliString { x: vec![false; n], z: vec![false; n] }
    }

    pub fn single(n: usize, q: usize, p: Pauli) -> Self {
        let mut s = Self::identity(n);
        s.set(q, p);
        s
    }

    pub fn from_bits(x: Vec<bool>, z: Vec<bool>) -> Result<Self> {
        if x.len() != z.len() {
            return Err(Error::LengthMismatch(x.len(), z.len()));
        }
        Ok(PauliString { x, z })
    }

    pub fn n(&self) -> usize {
        self.x.len()
    }

    pub fn x(&self) -> &[bool] {
        &self.x
    }

    pub fn z(&self) -> &[bool] {
        &self.z
    }

    pub fn get(&self, q: usize) -> Pauli {
        Pauli::from_bits(self.x[q], self.z[q])
    }

    pub fn set(&mut self, q: usize, p: Pauli) {
        let (x, z) = p.bits();
        self.x[q] = x;
        self.z[q] = z;
    }

    pub fn set_x(&mut self, q: usize, v: bool) {
        self.x[q] = v;
    }

    pub fn set_z(&mut self, q: usize, v: bool) {
        self.z[q] = v;
    }

    pub fn weight(&self) -> usize {
        self.x.iter().zip(&self.z).filter(|(a, b)| **a || **b).count()
    }

    pub fn is_identity(&self) -> bool {
        self.weight() == 0
    }

    /// Symplectic inner product x·z' + z·x' over GF(2); true means the strings anticommute.
    pub fn symplectic(&self, other: &Self) -> Result<bool> {
        if self.n() != other.n() {
            return Err(Error::LengthMismatch(self.n(), other.n()));
        }
        let mut acc = false;
        for i in 0..self.n() {
            acc ^= (self.x[i] & other.z[i]) ^ (self.z[i] & other.x[i]);
        }
        Ok(acc)
    }

    pub fn commutes(&self, other: &Self) -> Result<bool> {
        self.symplectic(other).map(|s| !s)
    }

    /// Product up to phase.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        if self.n() != other.n() {
            return Err(Error::LengthMismatch(self.n(), other.n()));
        }
        Ok(PauliString {
            x: self.x.iter().zip(&other.x).map(|(a, b)| a ^ b).collect(),
            z: self.z.iter().zip(&other.z).map(|(a, b)| a ^ b).collect(),
        })
    }

    pub fn restrict(&self, qubits: &[usize]) -> Self {
        PauliString { x: qubits.iter().map(|&q| self.x[q]).collect(), z: qubits.iter().map(|&q| self.z[q]).collect() }
    }

    /// Packs into `(x, z)` words, qubit `i` at bit `i`. Needs `n <= 64`.
    pub fn packed(&self) -> (u64, u64) {
        assert!(self.n() <= 64);
        let pack = |v: &[bool]| v.iter().enumerate().fold(0u64, |acc, (i, &b)| acc | (b as u64) << i);
        (pack(&self.x), pack(&self.z))
    }

    pub fn from_packed(n: usize, x: u64, z: u64) -> Self {
        PauliString { x: (0..n).map(|i| (x >> i) & 1 == 1).collect(), z: (0..n).map(|i| (z >> i) & 1 == 1).collect() }
    }

    /// All 4^n strings in lexicographic I<X<Y<Z order, qubit 0 most significant.
    pub fn all(n: usize) -> impl Iterator<Item = PauliString> {
        (0..4usize.pow(n as u32)).map(move |mut idx| {
            let mut s = PauliString::identity(n);
            for q in (0..n).rev() {
                s.set(q, Pauli::ALL[idx % 4]);
                idx /= 4;
            }
            s
        })
    }
}

impl FromStr for PauliString {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut out = PauliString::identity(0);
        for ch in s.chars() {
            let p = Pauli::from_char(ch).ok_or(Error::Parse { line: 1, ch })?;
            let (x, z) = p.bits();
            out.x.push(x);
            out.z.push(z);
        }
        Ok(out)
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for q in 0..self.n() {
            write!(f, "{}", self.get(q).to_char())?;
        }
        Ok(())
    }
}

impl fmt::Debug for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PauliString({self})")
    }
}

pub fn commutes(a: &PauliString, b: &PauliString) -> Result<bool> {
    a.commutes(b)
}

/// Independent, pairwise commuting stabilizer generators on `n` qubits.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Tableau {
    n: usize,
    rows: Vec<PauliString>,
}

impl Tableau {
    pub fn new(n: usize, rows: Vec<PauliString>) -> Result<Self> {
        for r in &rows {
            if r.n() != n {
                return Err(Error::LengthMismatch(r.n(), n));
            }
        }
        if rows.len() > n {
            return Err(Error::TooManyRows { rows: rows.len(), n });
        }
        for i in 0..rows.len() {
            for j in i + 1..rows.len() {
                if !rows[i].commutes(&rows[j])? {
                    return Err(Error::NonCommuting(i, j));
                }
            }
        }
        let t = Tableau { n, rows };
        if t.matrix().rank() != t.rows.len() {
            return Err(Error::DependentRows);
        }
        Ok(t)
    }

    pub fn from_strs(rows: &[&str]) -> Result<Self> {
        let rows = rows.iter().map(|r| r.parse()).collect::<Result<Vec<PauliString>>>()?;
        let n = rows.first().map_or(0, PauliString::n);
        Tableau::new(n, rows)
    }

    /// One Pauli string per line over {I,X,Y,Z}. Blank lines are skipped.
    pub fn parse(text: &str) -> Result<Self> {
        let mut rows: Vec<PauliString> = Vec::new();
        for (ln, line) in text.lines().enumerate() {
            let line = line.trim_end_matches('\r');
            if line.trim().is_empty() {
                continue;
            }
            let row = line.parse::<PauliString>().map_err(|e| match e {
                Error::Parse { ch, .. } => Error::Parse { line: ln + 1, ch },
                other => other,
            })?;
            rows.push(row);
        }
        let Some(first) = rows.first() else { return Err(Error::EmptyCode) };
        let n = first.n();
        Tableau::new(n, rows)
    }

    pub fn from_matrix(m: &BitMatrix) -> Result<Self> {
        if m.cols() % 2 == 1 {
            return Err(Error::OddDimension(m.cols()));
        }
        let n = m.cols() / 2;
        let rows = (0..m.rows())
            .map(|i| PauliString {
                x: (0..n).map(|j| m.get(i, j)).collect(),
                z: (0..n).map(|j| m.get(i, n + j)).collect(),
            })
            .collect();
        Tableau::new(n, rows)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.n - self.rows.len()
    }

    pub fn rows(&self) -> &[PauliString] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// `[T_X | T_Z]`
    pub fn matrix(&self) -> BitMatrix {
        BitMatrix::from_fn(self.rows.len(), 2 * self.n, |i, j| {
            if j < self.n {
                self.rows[i].x[j]
            } else {
                self.rows[i].z[j - self.n]
            }
        })
    }

    /// True when both tableaux generate the same stabilizer group.
    pub fn same_group(&self, other: &Tableau) -> bool {
        if self.n != other.n || self.len() != other.len() {
            return false;
        }
        let a = self.matrix();
        let stacked = a.vstack(&other.matrix()).expect("same width");
        stacked.rank() == a.rank()
    }

    /// Does `p` lie in the stabilizer group (up to phase)?
    pub fn contains(&self, p: &PauliString) -> bool {
        let a = self.matrix();
        let row = Tableau { n: self.n, rows: vec![p.clone()] }.matrix();
        a.vstack(&row).expect("same width").rank() == a.rank()
    }
}

impl fmt::Display for Tableau {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in &self.rows {
            writeln!(f, "{r}")?;
        }
        Ok(())
    }
}
