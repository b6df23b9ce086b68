//! Circuit synthesis from a standard form.
//!
//! The decoding unitary is applied in time order U1, H on V_L, U2, H on V_S, after which
//! every stabilizer has become a single Z on a V_S qubit. U1 and U2 are CZ lists read off
//! the standard-form blocks. The Hadamards on V_Z ∪ V_L and the phase gates on the γ
//! diagonal that the full reduction would start with are not emitted; the circuit
//! therefore implements the locally deformed code (see [`CompiledCircuit::encode_input`]).

use serde::Serialize;

use crate::error::{Error, Result};
use crate::f2::BitMatrix;
use crate::pauli::{PauliString, Tableau};
use crate::stabilizer::{LogicalClass, StandardForm};

pub type Edge = (usize, usize);

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CompiledCircuit {
    pub n: usize,
    pub k: usize,
    pub r_x: usize,
    pub v_s: Vec<usize>,
    pub v_l: Vec<usize>,
    pub u1_edges: Vec<Edge>,
    pub u2_edges: Vec<Edge>,
    pub h2_targets: Vec<usize>,
    pub h3_targets: Vec<usize>,
    /// Off-diagonal part of Γ = L1 + L2·J2ᵀ.
    pub gamma0: BitMatrix,
    /// Diagonal of Γ; these phase gates are dropped.
    pub gamma: Vec<bool>,
    pub form: StandardForm,
}

pub fn compile(sf: &StandardForm) -> Result<CompiledCircuit> {
    sf.check()?;
    let (n, rx, rs) = (sf.n, sf.r_x, sf.r_s());
    let g = sf.gamma();
    let gamma: Vec<bool> = (0..rx).map(|i| g.get(i, i)).collect();
    let gamma0 = BitMatrix::from_fn(rx, rx, |i, j| i != j && g.get(i, j));

    let j = sf.j1.hstack(&sf.j2)?;
    let mut u1_edges = Vec::new();
    for i in 0..rx {
        for c in 0..j.cols() {
            if j.get(i, c) {
                u1_edges.push((i, rx + c));
            }
        }
    }
    let lk = sf.l2.vstack(&sf.k2)?;
    let mut u2_edges = Vec::new();
    for i in 0..rs {
        for c in 0..sf.k {
            if lk.get(i, c) {
                u2_edges.push((i, rs + c));
            }
        }
    }
    for a in 0..rx {
        for b in a + 1..rx {
            if gamma0.get(a, b) {
                u2_edges.push((a, b));
            }
        }
    }
    u1_edges.sort_unstable();
    u2_edges.sort_unstable();

    Ok(CompiledCircuit {
        n,
        k: sf.k,
        r_x: rx,
        v_s: (0..rs).collect(),
        v_l: (rs..n).collect(),
        u1_edges,
        u2_edges,
        h2_targets: (rs..n).collect(),
        h3_targets: (0..rs).collect(),
        gamma0,
        gamma,
        form: sf.clone(),
    })
}

fn cz(p: &mut PauliString, (a, b): Edge) {
    let (xa, xb) = (p.x()[a], p.x()[b]);
    p.set_z(a, p.z()[a] ^ xb);
    p.set_z(b, p.z()[b] ^ xa);
}

fn had(p: &mut PauliString, q: usize) {
    let (x, z) = (p.x()[q], p.z()[q]);
    p.set_x(q, z);
    p.set_z(q, x);
}

#[inline]
fn cz_packed(x: u64, z: &mut u64, (a, b): Edge) {
    *z ^= ((x >> b) & 1) << a | ((x >> a) & 1) << b;
}

#[inline]
fn had_packed(x: &mut u64, z: &mut u64, mask: u64) {
    let d = (*x ^ *z) & mask;
    *x ^= d;
    *z ^= d;
}

fn mask_of(qs: &[usize]) -> u64 {
    qs.iter().fold(0, |m, &q| m | 1 << q)
}

impl CompiledCircuit {
    pub fn r_s(&self) -> usize {
        self.v_s.len()
    }

    pub fn cz_count(&self) -> usize {
        self.u1_edges.len() + self.u2_edges.len()
    }

    /// Conjugates `p` through U1, H(V_L), U2, H(V_S).
    pub fn propagate(&self, p: &PauliString) -> PauliString {
        assert_eq!(p.n(), self.n);
        let mut out = p.clone();
        for &e in &self.u1_edges {
            cz(&mut out, e);
        }
        for &q in &self.h2_targets {
            had(&mut out, q);
        }
        for &e in &self.u2_edges {
            cz(&mut out, e);
        }
        for &q in &self.h3_targets {
            had(&mut out, q);
        }
        out
    }

    /// Inverse of [`propagate`](Self::propagate).
    pub fn unpropagate(&self, p: &PauliString) -> PauliString {
        assert_eq!(p.n(), self.n);
        let mut out = p.clone();
        for &q in &self.h3_targets {
            had(&mut out, q);
        }
        for &e in self.u2_edges.iter().rev() {
            cz(&mut out, e);
        }
        for &q in &self.h2_targets {
            had(&mut out, q);
        }
        for &e in self.u1_edges.iter().rev() {
            cz(&mut out, e);
        }
        out
    }

    /// Packed form of [`propagate`](Self::propagate); needs n <= 64.
    pub fn propagate_packed(&self, mut x: u64, mut z: u64) -> (u64, u64) {
        for &e in &self.u1_edges {
            cz_packed(x, &mut z, e);
        }
        had_packed(&mut x, &mut z, mask_of(&self.h2_targets));
        for &e in &self.u2_edges {
            cz_packed(x, &mut z, e);
        }
        had_packed(&mut x, &mut z, mask_of(&self.h3_targets));
        (x, z)
    }

    /// Maps a Pauli in the input labeling of the tableau the standard form came from into the
    /// frame the circuit acts on: relocation, then H on V_Z ∪ V_L, then S on the γ diagonal.
    pub fn encode_input(&self, e: &PauliString) -> PauliString {
        let mut out = e.restrict(&self.form.perm);
        for q in self.r_x..self.n {
            had(&mut out, q);
        }
        for (q, &g) in self.gamma.iter().enumerate() {
            if g {
                out.set_z(q, out.z()[q] ^ out.x()[q]);
            }
        }
        out
    }

    /// Reads syndrome and logical class off a propagated Pauli.
    pub fn classify(&self, propagated: &PauliString) -> LogicalClass {
        if self.v_s.iter().any(|&q| propagated.x()[q]) {
            LogicalClass::Detected
        } else {
            LogicalClass::Logical(propagated.restrict(&self.v_l))
        }
    }

    /// Syndrome bits in V_S order.
    pub fn syndrome(&self, propagated: &PauliString) -> Vec<bool> {
        self.v_s.iter().map(|&q| propagated.x()[q]).collect()
    }

    /// The stabilizers the emitted gates actually measure: preimages of Z on V_S.
    pub fn implemented_code(&self) -> Tableau {
        let rows = self
            .v_s
            .iter()
            .map(|&q| self.unpropagate(&PauliString::single(self.n, q, crate::pauli::Pauli::Z)))
            .collect();
        Tableau::new(self.n, rows).expect("preimages of independent commuting Z's")
    }

    /// Symplectic matrix of U1 assembled from the J blocks (row-vector convention v ↦ v·C).
    pub fn c_u1(&self) -> BitMatrix {
        let sf = &self.form;
        let (rx, rs) = (sf.r_x, sf.r_s());
        let mut a = BitMatrix::zeros(self.n, self.n);
        put_sym(&mut a, 0, rx, &sf.j1);
        put_sym(&mut a, 0, rs, &sf.j2);
        cz_block(&a)
    }

    /// Symplectic matrix of U2 assembled from Γ0, L2 and K2.
    pub fn c_u2(&self) -> BitMatrix {
        let sf = &self.form;
        let (rx, rs) = (sf.r_x, sf.r_s());
        let mut a = BitMatrix::zeros(self.n, self.n);
        for i in 0..rx {
            for j in 0..rx {
                if self.gamma0.get(i, j) {
                    a.set(i, j, true);
                }
            }
        }
        put_sym(&mut a, 0, rs, &sf.l2);
        put_sym(&mut a, rx, rs, &sf.k2);
        cz_block(&a)
    }

    pub fn to_json(&self) -> String {
        #[derive(Serialize)]
        struct Out<'a> {
            n: usize,
            k: usize,
            v_s: &'a [usize],
            v_l: &'a [usize],
            u1: Vec<[usize; 2]>,
            u2: Vec<[usize; 2]>,
            h_blocks: [&'a [usize]; 2],
        }
        let e = |v: &[Edge]| v.iter().map(|&(a, b)| [a, b]).collect();
        let out = Out {
            n: self.n,
            k: self.k,
            v_s: &self.v_s,
            v_l: &self.v_l,
            u1: e(&self.u1_edges),
            u2: e(&self.u2_edges),
            h_blocks: [&self.h2_targets, &self.h3_targets],
        };
        serde_json::to_string_pretty(&out).expect("plain data")
    }
}

fn put_sym(a: &mut BitMatrix, r0: usize, c0: usize, block: &BitMatrix) {
    for i in 0..block.rows() {
        for j in 0..block.cols() {
            if block.get(i, j) {
                a.set(r0 + i, c0 + j, true);
                a.set(c0 + j, r0 + i, true);
            }
        }
    }
}

/// [[I, A], [0, I]] for a CZ network with symmetric adjacency A.
pub fn cz_block(a: &BitMatrix) -> BitMatrix {
    let n = a.rows();
    BitMatrix::from_fn(2 * n, 2 * n, |i, j| i == j || (i < n && j >= n && a.get(i, j - n)))
}

pub fn cz_symplectic(n: usize, edges: &[Edge]) -> BitMatrix {
    let mut a = BitMatrix::zeros(n, n);
    for &(i, j) in edges {
        a.flip(i, j);
        a.flip(j, i);
    }
    cz_block(&a)
}

/// True iff each generator of `t`, after the recorded row reduction and input frame, is carried
/// to Z on its own V_S qubit.
pub fn verify_encoding(circ: &CompiledCircuit, t: &Tableau) -> bool {
    if t.n() != circ.n || t.len() != circ.r_s() {
        return false;
    }
    if t.is_empty() {
        return true;
    }
    let n = circ.n;
    let m = t.matrix();
    let r = &circ.form.row_ops;
    if r.rows() != t.len() || r.cols() != t.len() {
        return false;
    }
    let reduced = r.mul(&m).expect("square row ops");
    let rows = Tableau::from_matrix(&reduced).expect("invertible row ops keep validity");
    for (i, row) in rows.rows().iter().enumerate() {
        let img = circ.propagate(&circ.encode_input(row));
        let want = PauliString::single(n, circ.v_s[i], crate::pauli::Pauli::Z);
        if img != want {
            return false;
        }
    }
    true
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Species {
    /// Atoms that keep the purified pairs.
    Rb,
    /// Measured ancilla atoms.
    Cs,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Atom {
    pub index: usize,
    pub species: Species,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum Instruction {
    GlobalH { species: Species, targets: Vec<usize> },
    CzLayer(Vec<Edge>),
    MeasureZ(Vec<usize>),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GateProgram {
    pub n: usize,
    pub instructions: Vec<Instruction>,
}

impl GateProgram {
    pub fn new(n: usize, instructions: Vec<Instruction>) -> Result<Self> {
        for ins in &instructions {
            match ins {
                Instruction::CzLayer(pairs) => {
                    let mut used = vec![false; n];
                    for &(a, b) in pairs {
                        if a >= n || b >= n || a == b {
                            return Err(Error::Shape(format!("CZ ({a},{b}) on {n} qubits")));
                        }
                        if std::mem::replace(&mut used[a], true) || std::mem::replace(&mut used[b], true) {
                            return Err(Error::Shape(format!("CZ layer reuses a qubit at ({a},{b})")));
                        }
                    }
                }
                Instruction::GlobalH { targets, .. } | Instruction::MeasureZ(targets) => {
                    if let Some(&q) = targets.iter().find(|&&q| q >= n) {
                        return Err(Error::Shape(format!("qubit {q} on {n} qubits")));
                    }
                }
            }
        }
        Ok(GateProgram { n, instructions })
    }

    pub fn cz_layers(&self) -> usize {
        self.instructions.iter().filter(|i| matches!(i, Instruction::CzLayer(_))).count()
    }

    /// Conjugates `p` through every gate; measurements are ignored.
    pub fn propagate(&self, p: &PauliString) -> PauliString {
        let mut out = p.clone();
        for ins in &self.instructions {
            match ins {
                Instruction::GlobalH { targets, .. } => targets.iter().for_each(|&q| had(&mut out, q)),
                Instruction::CzLayer(pairs) => pairs.iter().for_each(|&e| cz(&mut out, e)),
                Instruction::MeasureZ(_) => {}
            }
        }
        out
    }
}

/// SWAP between an Rb atom and a Cs atom from three CZs and Hadamard blocks.
pub fn swap_sequence(a: Atom, b: Atom) -> Result<GateProgram> {
    if a.index == b.index {
        return Err(Error::InvalidSwap(format!("atom {} with itself", a.index)));
    }
    if a.species == b.species {
        return Err(Error::InvalidSwap(format!("atoms {} and {} are both {:?}", a.index, b.index, a.species)));
    }
    let (rb, cs) = if a.species == Species::Rb { (a.index, b.index) } else { (b.index, a.index) };
    let h_rb = || Instruction::GlobalH { species: Species::Rb, targets: vec![rb] };
    let h_cs = || Instruction::GlobalH { species: Species::Cs, targets: vec![cs] };
    let c = || Instruction::CzLayer(vec![(rb.min(cs), rb.max(cs))]);
    GateProgram::new(rb.max(cs) + 1, vec![h_rb(), c(), h_cs(), h_rb(), c(), h_cs(), h_rb(), c(), h_rb()])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::f2::is_symplectic;
    use crate::pauli::Pauli;
    use crate::stabilizer::{five_one_three, iceberg, standard_form, steane};

    fn ps(s: &str) -> PauliString {
        s.parse().unwrap()
    }

    fn compiled(t: &Tableau) -> CompiledCircuit {
        compile(&standard_form(t)).unwrap()
    }

    #[test]
    fn five_one_three_has_nine_cz() {
        let c = compiled(&five_one_three().compile_tableau());
        assert_eq!(c.cz_count(), 9);
        assert_eq!(c.u1_edges, vec![(0, 4), (3, 4)]);
        let tilde: Vec<PauliString> = ["YZIZY", "IXZZX", "ZZXIX", "ZIZYY"].iter().map(|s| ps(s)).collect();
        assert_eq!(c.implemented_code().rows(), &tilde[..]);
    }

    #[test]
    fn steane_edge_counts() {
        let c = compiled(&steane().compile_tableau());
        assert_eq!(c.u1_edges.len(), 9);
        assert_eq!(c.u2_edges.len(), 2);
        assert!(c.gamma0.is_zero());
        assert!(c.gamma.iter().all(|&g| !g));
    }

    #[test]
    fn iceberg4_propagation() {
        let p = iceberg(4).unwrap();
        let c = compiled(&p.compile_tableau());
        // The implemented code is {XXZZ, ZZXX} up to relabeling of qubits.
        let code = c.implemented_code();
        let weights: Vec<usize> = code.rows().iter().map(|r| r.weight()).collect();
        assert_eq!(weights, vec![4, 4]);
        for r in code.rows() {
            let xs = (0..4).filter(|&q| r.get(q) == Pauli::X).count();
            let zs = (0..4).filter(|&q| r.get(q) == Pauli::Z).count();
            assert_eq!((xs, zs), (2, 2));
        }
        // Each stabilizer lands on a single V_S Z.
        let sx = c.propagate(&code.rows()[0]);
        assert_eq!(sx, PauliString::single(4, c.v_s[0], Pauli::Z));
        // Literal {XXXX, ZZZZ}: XXXX propagates to one Z on V_S.
        let lit = compiled(&p.tableau);
        let img = lit.propagate(&lit.encode_input(&ps("XXXX")));
        assert_eq!(img.weight(), 1);
        assert!(lit.v_s.iter().any(|&q| img.get(q) == Pauli::Z));
    }

    #[test]
    fn cz_conjugation() {
        let c = compiled(&Tableau::from_strs(&["XZ"]).unwrap());
        assert_eq!((c.u1_edges.len(), c.u2_edges.clone()), (0, vec![(0, 1)]));
        let mut x1 = ps("XI");
        cz(&mut x1, (0, 1));
        assert_eq!(x1, ps("XZ"));
        assert_eq!(c.propagate(&PauliString::identity(2)), PauliString::identity(2));
    }

    #[test]
    fn verify_presets_and_mutants() {
        for p in [iceberg(4).unwrap(), iceberg(6).unwrap(), five_one_three(), steane()] {
            for t in [p.tableau.clone(), p.compile_tableau()] {
                let mut c = compiled(&t);
                assert!(verify_encoding(&c, &t), "{}", p.name);
                assert!(is_symplectic(&c.c_u1()).unwrap());
                assert!(is_symplectic(&c.c_u2()).unwrap());
                assert_eq!(c.c_u1(), cz_symplectic(c.n, &c.u1_edges));
                assert_eq!(c.c_u2(), cz_symplectic(c.n, &c.u2_edges));
                if !c.u1_edges.is_empty() {
                    c.u1_edges.remove(0);
                    assert!(!verify_encoding(&c, &t), "{}", p.name);
                }
            }
        }
    }

    #[test]
    fn empty_code_verifies() {
        let t = Tableau::new(3, vec![]).unwrap();
        let c = compiled(&t);
        assert!(c.v_s.is_empty());
        assert!(verify_encoding(&c, &t));
    }

    #[test]
    fn malformed_standard_form_rejected() {
        let mut sf = standard_form(&iceberg(4).unwrap().tableau);
        sf.k1 = BitMatrix::zeros(1, 1);
        assert!(matches!(compile(&sf), Err(Error::MalformedStandardForm(_))));
    }

    #[test]
    fn swap_helper() {
        let rb = Atom { index: 0, species: Species::Rb };
        let cs = Atom { index: 1, species: Species::Cs };
        let s = swap_sequence(rb, cs).unwrap();
        assert_eq!(s.cz_layers(), 3);
        for (from, to) in [("XI", "IX"), ("ZI", "IZ"), ("IX", "XI"), ("IZ", "ZI")] {
            assert_eq!(s.propagate(&ps(from)), ps(to));
        }
        assert!(swap_sequence(rb, rb).is_err());
        assert!(swap_sequence(rb, Atom { index: 1, species: Species::Rb }).is_err());
    }

    #[test]
    fn json_shape() {
        let c = compiled(&iceberg(4).unwrap().compile_tableau());
        let text = c.to_json();
        let pos: Vec<usize> = ["\"n\"", "\"k\"", "\"v_s\"", "\"v_l\"", "\"u1\"", "\"u2\"", "\"h_blocks\""]
            .iter()
            .map(|key| text.find(key).unwrap())
            .collect();
        assert!(pos.windows(2).all(|w| w[0] < w[1]));
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(v["u1"], serde_json::json!([[0, 2], [1, 3]]));
    }
}
