//! Standard-form reduction, local frames and the built-in code presets.

use std::collections::HashSet;

use rand::Rng;

use crate::compiler::compile;
use crate::error::{Error, Result};
use crate::f2::BitMatrix;
use crate::pauli::{PauliString, Tableau};

/// Block decomposition of a tableau after column relocation and row reduction:
///
/// ```text
/// [ I  J1 J2 | L1 0  L2 ]   r_x rows
/// [ 0  0  0  | K1 I  K2 ]   r_z rows
/// ```
///
/// Column blocks are V_X (r_x), V_Z (r_z) and V_L (k).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StandardForm {
    pub n: usize,
    pub k: usize,
    pub r_x: usize,
    pub r_z: usize,
    pub j1: BitMatrix,
    pub j2: BitMatrix,
    pub k1: BitMatrix,
    pub k2: BitMatrix,
    pub l1: BitMatrix,
    pub l2: BitMatrix,
    /// `perm[j]` is the input qubit placed at position `j`.
    pub perm: Vec<usize>,
    /// `row_ops * T0[:, perm] == T1`.
    pub row_ops: BitMatrix,
}

impl StandardForm {
    pub fn r_s(&self) -> usize {
        self.r_x + self.r_z
    }

    /// L1 + L2·J2ᵀ
    pub fn gamma(&self) -> BitMatrix {
        self.l1.add(&self.l2.mul(&self.j2.transpose()).expect("shape")).expect("shape")
    }

    /// Shapes plus the two commutation relations between the blocks.
    pub fn check(&self) -> Result<()> {
        let (rx, rz, k) = (self.r_x, self.r_z, self.k);
        let bad = |what: &str| Err(Error::MalformedStandardForm(what.to_string()));
        if rx + rz + k != self.n {
            return bad("r_x + r_z + k != n");
        }
        let shapes = [
            (&self.j1, rx, rz, "J1"),
            (&self.j2, rx, k, "J2"),
            (&self.l1, rx, rx, "L1"),
            (&self.l2, rx, k, "L2"),
            (&self.k1, rz, rx, "K1"),
            (&self.k2, rz, k, "K2"),
        ];
        for (m, r, c, name) in shapes {
            if m.rows() != r || m.cols() != c {
                return bad(&format!("{name} is {}x{}, expected {r}x{c}", m.rows(), m.cols()));
            }
        }
        let mut seen = vec![false; self.n];
        if self.perm.len() != self.n || self.perm.iter().any(|&q| q >= self.n || std::mem::replace(&mut seen[q], true))
        {
            return bad("perm is not a permutation");
        }
        if !self.gamma().is_symmetric() {
            return bad("L1 + L2 J2^T is not symmetric");
        }
        let resid = self.k1.add(&self.j1.transpose())?.add(&self.k2.mul(&self.j2.transpose())?)?;
        if !resid.is_zero() {
            return bad("K1 + J1^T + K2 J2^T != 0");
        }
        Ok(())
    }

    /// The reduced tableau in relocated qubit order.
    pub fn matrix(&self) -> BitMatrix {
        let (n, rx, rs) = (self.n, self.r_x, self.r_s());
        BitMatrix::from_fn(rs, 2 * n, |i, j| {
            let (zpart, c) = if j < n { (false, j) } else { (true, j - n) };
            if i < rx {
                match (zpart, c) {
                    (false, c) if c < rx => c == i,
                    (false, c) if c < rs => self.j1.get(i, c - rx),
                    (false, c) => self.j2.get(i, c - rs),
                    (true, c) if c < rx => self.l1.get(i, c),
                    (true, c) if c < rs => false,
                    (true, c) => self.l2.get(i, c - rs),
                }
            } else {
                let i = i - rx;
                match (zpart, c) {
                    (false, _) => false,
                    (true, c) if c < rx => self.k1.get(i, c),
                    (true, c) if c < rs => c - rx == i,
                    (true, c) => self.k2.get(i, c - rs),
                }
            }
        })
    }

    pub fn tableau(&self) -> Tableau {
        Tableau::from_matrix(&self.matrix()).expect("standard form rows are a valid tableau")
    }
}

fn permute_qubit_cols(m: &mut BitMatrix, n: usize, order: &[usize]) {
    let mut cols: Vec<usize> = order.to_vec();
    cols.extend(order.iter().map(|&c| c + n));
    cols.extend(2 * n..m.cols());
    *m = m.select_cols(&cols);
}

/// Greedy reduction: pivots of T_X are taken left to right and moved to the front, then the
/// pivots of the remaining Z block likewise.
pub fn standard_form(t: &Tableau) -> StandardForm {
    let n = t.n();
    let r = t.len();
    let mut m = t.matrix().hstack(&BitMatrix::identity(r)).expect("same rows");

    let eliminate = |m: &mut BitMatrix, col: usize, next: usize, rows_from: usize| -> bool {
        let Some(p) = (next.max(rows_from)..r).find(|&i| m.get(i, col)) else { return false };
        m.swap_rows(p, next);
        for i in 0..r {
            if i != next && m.get(i, col) {
                m.add_row(next, i);
            }
        }
        true
    };

    let mut xpiv = Vec::new();
    for c in 0..n {
        if eliminate(&mut m, c, xpiv.len(), 0) {
            xpiv.push(c);
        }
    }
    let r_x = xpiv.len();
    let mut perm1 = xpiv.clone();
    perm1.extend((0..n).filter(|c| !xpiv.contains(c)));
    permute_qubit_cols(&mut m, n, &perm1);

    // Rows below r_x have no X part left, so adding them to X rows is harmless.
    let mut zpiv = Vec::new();
    for c in r_x..n {
        if eliminate(&mut m, n + c, r_x + zpiv.len(), r_x) {
            zpiv.push(c);
        }
    }
    let r_z = zpiv.len();
    assert_eq!(r_x + r_z, r, "tableau rows are independent");
    let mut perm2: Vec<usize> = (0..r_x).collect();
    perm2.extend(&zpiv);
    perm2.extend((r_x..n).filter(|c| !zpiv.contains(c)));
    permute_qubit_cols(&mut m, n, &perm2);

    let perm: Vec<usize> = perm2.iter().map(|&j| perm1[j]).collect();
    let rs = r;
    let xs = m.submatrix(0..r, 0..n);
    let zs = m.submatrix(0..r, n..2 * n);
    StandardForm {
        n,
        k: n - r,
        r_x,
        r_z,
        j1: xs.submatrix(0..r_x, r_x..rs),
        j2: xs.submatrix(0..r_x, rs..n),
        l1: zs.submatrix(0..r_x, 0..r_x),
        l2: zs.submatrix(0..r_x, rs..n),
        k1: zs.submatrix(r_x..rs, 0..r_x),
        k2: zs.submatrix(r_x..rs, rs..n),
        perm,
        row_ops: m.submatrix(0..r, 2 * n..2 * n + r),
    }
}

/// Qubit relabeling followed by Hadamards, used to pick an LC-equivalent presentation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LocalFrame {
    /// New qubit `j` is old qubit `perm[j]`.
    pub perm: Vec<usize>,
    /// Hadamard on new qubit `j`.
    pub hadamard: Vec<bool>,
}

impl LocalFrame {
    pub fn identity(n: usize) -> Self {
        LocalFrame { perm: (0..n).collect(), hadamard: vec![false; n] }
    }

    pub fn apply(&self, p: &PauliString) -> PauliString {
        let mut out = p.restrict(&self.perm);
        for (q, &h) in self.hadamard.iter().enumerate() {
            if h {
                let (x, z) = (out.x()[q], out.z()[q]);
                out.set_x(q, z);
                out.set_z(q, x);
            }
        }
        out
    }

    pub fn apply_tableau(&self, t: &Tableau) -> Tableau {
        Tableau::new(t.n(), t.rows().iter().map(|r| self.apply(r)).collect())
            .expect("local Cliffords preserve validity")
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CodePreset {
    pub name: String,
    pub tableau: Tableau,
    pub n: usize,
    pub k: usize,
    pub d: usize,
    /// Presentation handed to the compiler; chosen so the compiled circuit matches the
    /// published gate counts and decoder tables.
    pub frame: LocalFrame,
}

impl CodePreset {
    pub fn compile_tableau(&self) -> Tableau {
        self.frame.apply_tableau(&self.tableau)
    }
}

pub fn iceberg(n: usize) -> Result<CodePreset> {
    if n < 4 || n % 2 == 1 {
        return Err(Error::BadIcebergSize(n));
    }
    let xs = "X".repeat(n);
    let zs = "Z".repeat(n);
    let tableau = Tableau::from_strs(&[&xs, &zs])?;
    // H on the second half turns {X^n, Z^n} into {X..XZ..Z, Z..ZX..X}, whose compiled
    // circuit is two CZ layers instead of three.
    let frame = LocalFrame { perm: (0..n).collect(), hadamard: (0..n).map(|q| q >= n / 2).collect() };
    Ok(CodePreset { name: format!("iceberg{n}"), tableau, n, k: n - 2, d: 2, frame })
}

pub fn five_one_three() -> CodePreset {
    let tableau = Tableau::from_strs(&["XZZXI", "IXZZX", "XIXZZ", "ZXIXZ"]).expect("valid");
    let mut hadamard = vec![false; 5];
    hadamard[4] = true;
    let frame = LocalFrame { perm: (0..5).collect(), hadamard };
    CodePreset { name: "five_one_three".into(), tableau, n: 5, k: 1, d: 3, frame }
}

pub fn hamming_7_4() -> BitMatrix {
    BitMatrix::from_strs(&["1101100", "1011010", "0111001"])
}

pub fn steane() -> CodePreset {
    let h = hamming_7_4();
    let z = BitMatrix::zeros(3, 7);
    let m = h.hstack(&z).unwrap().vstack(&z.hstack(&h).unwrap()).unwrap();
    let tableau = Tableau::from_matrix(&m).expect("valid");
    let frame = LocalFrame { perm: vec![0, 1, 3, 4, 5, 6, 2], hadamard: vec![false; 7] };
    CodePreset { name: "steane".into(), tableau, n: 7, k: 1, d: 3, frame }
}

/// Accepts `iceberg<n>`, `iceberg(<n>)`, `five_one_three` and `steane`.
pub fn preset(name: &str) -> Result<CodePreset> {
    match name {
        "five_one_three" => return Ok(five_one_three()),
        "steane" => return Ok(steane()),
        _ => {}
    }
    if let Some(rest) = name.strip_prefix("iceberg") {
        let digits = rest.strip_prefix('(').and_then(|r| r.strip_suffix(')')).unwrap_or(rest);
        if let Ok(n) = digits.parse::<usize>() {
            return iceberg(n);
        }
    }
    Err(Error::UnknownPreset(name.to_string()))
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum LogicalClass {
    Detected,
    Logical(PauliString),
}

/// Classifies `e` (in the input labeling of the tableau `sf` was built from).
pub fn logical_class(sf: &StandardForm, e: &PauliString) -> LogicalClass {
    assert_eq!(e.n(), sf.n, "error and code sizes differ");
    let circ = compile(sf).expect("standard form from standard_form() is well formed");
    circ.classify(&circ.propagate(&circ.encode_input(e)))
}

/// Minimum weight of an element of N(S)\S, or `None` when k = 0. Exhaustive, n <= 12.
pub fn code_distance(t: &Tableau) -> Result<Option<usize>> {
    let n = t.n();
    if n > 12 {
        return Err(Error::Cap { what: "distance enumeration", n, cap: 12 });
    }
    if t.k() == 0 {
        return Ok(None);
    }
    let gens: Vec<(u64, u64)> = t.rows().iter().map(PauliString::packed).collect();
    let mut group = HashSet::new();
    for mask in 0u64..1 << gens.len() {
        let mut g = (0, 0);
        for (i, s) in gens.iter().enumerate() {
            if mask >> i & 1 == 1 {
                g = (g.0 ^ s.0, g.1 ^ s.1);
            }
        }
        group.insert(g);
    }
    let mut best = usize::MAX;
    for x in 0u64..1 << n {
        for z in 0u64..1 << n {
            let w = (x | z).count_ones() as usize;
            if w == 0 || w >= best {
                continue;
            }
            let central = gens.iter().all(|&(sx, sz)| ((x & sz).count_ones() + (z & sx).count_ones()) % 2 == 0);
            if central && !group.contains(&(x, z)) {
                best = w;
            }
        }
    }
    Ok(Some(best))
}

/// A random valid `[[n, k]]` tableau: Z on the first n-k qubits, scrambled by symplectic
/// transvections.
pub fn random_tableau<R: Rng>(n: usize, k: usize, rng: &mut R) -> Tableau {
    assert!(k <= n);
    let r = n - k;
    let mut m = BitMatrix::from_fn(r, 2 * n, |i, j| j == n + i);
    for _ in 0..(4 * n + 4) {
        let h: Vec<bool> = loop {
            let v: Vec<bool> = (0..2 * n).map(|_| rng.gen()).collect();
            if v.iter().any(|&b| b) {
                break v;
            }
        };
        for i in 0..r {
            let mut ip = false;
            for q in 0..n {
                ip ^= (m.get(i, q) & h[n + q]) ^ (m.get(i, n + q) & h[q]);
            }
            if ip {
                for (j, &b) in h.iter().enumerate() {
                    if b {
                        m.flip(i, j);
                    }
                }
            }
        }
    }
    Tableau::from_matrix(&m).expect("transvections preserve validity")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bm(rows: &[&str]) -> BitMatrix {
        BitMatrix::from_strs(rows)
    }

    #[test]
    fn iceberg4_literal_standard_form() {
        let sf = standard_form(&iceberg(4).unwrap().tableau);
        assert_eq!((sf.r_x, sf.r_z), (1, 1));
        assert_eq!(sf.j1, bm(&["1"]));
        assert_eq!(sf.j2, bm(&["11"]));
        assert_eq!(sf.k1, bm(&["1"]));
        assert_eq!(sf.k2, bm(&["11"]));
        assert!(sf.l1.is_zero() && sf.l2.is_zero());
        sf.check().unwrap();
    }

    #[test]
    fn k2_times_j2_transpose_vanishes_for_iceberg4() {
        let sf = standard_form(&iceberg(4).unwrap().tableau);
        let prod = crate::f2::matmul_f2(&sf.k2, &sf.j2.transpose()).unwrap();
        assert_eq!((prod.rows(), prod.cols()), (1, 1));
        assert!(prod.is_zero());
    }

    #[test]
    fn steane_matches_published_blocks() {
        let p = steane();
        let sf = standard_form(&p.compile_tableau());
        let j = sf.j1.hstack(&sf.j2).unwrap();
        assert_eq!(j, bm(&["1011", "1101", "1110"]));
        assert_eq!(sf.k2, bm(&["0", "1", "1"]));
        assert!(sf.l1.is_zero() && sf.l2.is_zero());
        assert_eq!(sf.perm, (0..7).collect::<Vec<_>>());
    }

    #[test]
    fn five_one_three_matches_published_matrices() {
        let sf = standard_form(&five_one_three().tableau);
        let t = sf.matrix();
        assert_eq!(t.submatrix(0..4, 0..5), bm(&["10001", "01001", "00101", "00011"]));
        assert_eq!(t.submatrix(0..4, 5..10), bm(&["11011", "00110", "11000", "10111"]));
        assert_eq!((sf.r_x, sf.r_z), (4, 0));

        // Compiled presentation (H on the kept qubit) swaps the roles of J2 and L2.
        let sf = standard_form(&five_one_three().compile_tableau());
        assert_eq!(sf.perm, (0..5).collect::<Vec<_>>());
        assert_eq!(sf.j1.hstack(&sf.j2).unwrap(), bm(&["1", "0", "0", "1"]));
        assert_eq!(sf.l2.vstack(&sf.k2).unwrap(), bm(&["1", "1", "1", "1"]));
        let g = sf.gamma();
        assert!(g.is_symmetric());
        let off = BitMatrix::from_fn(4, 4, |i, j| i != j && g.get(i, j));
        assert_eq!(off, bm(&["0100", "1010", "0101", "0010"]));
    }

    #[test]
    fn reassembly_generates_input_group() {
        for p in [iceberg(4).unwrap(), iceberg(8).unwrap(), five_one_three(), steane()] {
            for t in [p.tableau.clone(), p.compile_tableau()] {
                let sf = standard_form(&t);
                sf.check().unwrap();
                let permuted = t.matrix().select_cols(
                    &sf.perm.iter().copied().chain(sf.perm.iter().map(|&q| q + t.n())).collect::<Vec<_>>(),
                );
                assert_eq!(sf.row_ops.mul(&permuted).unwrap(), sf.matrix());
            }
        }
    }

    #[test]
    fn presets_by_name() {
        let p = preset("iceberg(4)").unwrap();
        assert_eq!(p.tableau.to_string(), "XXXX\nZZZZ\n");
        assert_eq!((p.n, p.k, p.d), (4, 2, 2));
        assert_eq!(preset("iceberg6").unwrap().n, 6);
        assert!(matches!(preset("iceberg5"), Err(Error::BadIcebergSize(5))));
        assert!(matches!(preset("iceberg2"), Err(Error::BadIcebergSize(2))));
        assert!(matches!(preset("toric"), Err(Error::UnknownPreset(_))));
        let s = preset("steane").unwrap();
        let m = s.tableau.matrix();
        assert_eq!(m.submatrix(0..3, 0..7), hamming_7_4());
        assert!(m.submatrix(0..3, 7..14).is_zero());
        assert_eq!(m.submatrix(3..6, 7..14), hamming_7_4());
    }

    #[test]
    fn five_one_three_cyclic_from_tilde_generators() {
        let t: Vec<PauliString> = ["YZIZY", "IXZZX", "ZZXIX", "ZIZYY"].iter().map(|s| s.parse().unwrap()).collect();
        let combos = vec![t[1].clone(), t[0].mul(&t[3]).unwrap(), t[1].mul(&t[3]).unwrap(), t[2].clone()];
        let rebuilt = Tableau::new(5, combos.clone()).unwrap();
        assert!(rebuilt.same_group(&five_one_three().tableau));
        assert_eq!(combos[0].to_string(), "IXZZX");
        assert_eq!(combos[1].to_string(), "XZZXI");
    }

    #[test]
    fn distances_by_enumeration() {
        for p in [iceberg(4).unwrap(), iceberg(6).unwrap(), iceberg(8).unwrap(), five_one_three(), steane()] {
            assert_eq!(code_distance(&p.tableau).unwrap(), Some(p.d), "{}", p.name);
            assert_eq!(code_distance(&p.compile_tableau()).unwrap(), Some(p.d), "{}", p.name);
        }
    }

    #[test]
    fn iceberg4_classes() {
        let sf = standard_form(&iceberg(4).unwrap().tableau);
        let id = logical_class(&sf, &PauliString::identity(4));
        assert_eq!(id, LogicalClass::Logical(PauliString::identity(2)));
        assert_eq!(logical_class(&sf, &"XIII".parse().unwrap()), LogicalClass::Detected);
        match logical_class(&sf, &"XXII".parse().unwrap()) {
            LogicalClass::Logical(l) => assert!(!l.is_identity()),
            LogicalClass::Detected => panic!("XX is undetectable"),
        }
    }
}
