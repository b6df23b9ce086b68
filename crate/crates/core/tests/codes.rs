use dacos::compiler::{compile, verify_encoding, GateProgram, Instruction};
use dacos::f2::{is_symplectic, matmul_f2, BitMatrix};
use dacos::pauli::{PauliString, Tableau};
use dacos::stabilizer::{
    five_one_three, iceberg, logical_class, random_tableau, standard_form, steane, CodePreset, LogicalClass,
    StandardForm,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::HashMap;

fn presets() -> Vec<CodePreset> {
    vec![iceberg(4).unwrap(), iceberg(6).unwrap(), iceberg(8).unwrap(), five_one_three(), steane()]
}

fn random_codes(count: usize, seed: u64) -> Vec<Tableau> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let n = rng.gen_range(2..=8);
            let k = rng.gen_range(1..n);
            random_tableau(n, k, &mut rng)
        })
        .collect()
}

/// Undo the qubit relocation of the standard form.
fn in_input_order(sf: &StandardForm) -> Tableau {
    let m = sf.matrix();
    let n = sf.n;
    let mut out = BitMatrix::zeros(m.rows(), 2 * n);
    for i in 0..m.rows() {
        for j in 0..n {
            out.set(i, sf.perm[j], m.get(i, j));
            out.set(i, n + sf.perm[j], m.get(i, n + j));
        }
    }
    Tableau::from_matrix(&out).unwrap()
}

fn check_form(t: &Tableau) {
    let sf = standard_form(t);
    sf.check().unwrap();
    assert!(in_input_order(&sf).same_group(t), "row space changed for\n{t}");
    let n = t.n();
    let mut cols: Vec<usize> = sf.perm.clone();
    cols.extend(sf.perm.iter().map(|&c| c + n));
    let permuted = t.matrix().select_cols(&cols);
    assert_eq!(matmul_f2(&sf.row_ops, &permuted).unwrap(), sf.matrix());
    // the commutation constraint between blocks
    let lhs = sf.k1.add(&sf.j1.transpose()).unwrap().add(&matmul_f2(&sf.k2, &sf.j2.transpose()).unwrap()).unwrap();
    assert!(lhs.is_zero());
    assert!(sf.gamma().is_symmetric());
}

#[test]
fn standard_form_preserves_row_space() {
    for p in presets() {
        check_form(&p.tableau);
        check_form(&p.compile_tableau());
    }
    for t in random_codes(200, 11) {
        check_form(&t);
    }
}

#[test]
fn logical_class_partitions_the_pauli_group() {
    let mut codes: Vec<Tableau> =
        vec![iceberg(4).unwrap().tableau, iceberg(6).unwrap().tableau, five_one_three().tableau];
    codes.extend(random_codes(20, 5).into_iter().filter(|t| t.n() <= 6));
    for t in codes {
        let (n, k) = (t.n(), t.k());
        let sf = standard_form(&t);
        let mut counts: HashMap<String, usize> = HashMap::new();
        let mut detected = 0usize;
        for e in PauliString::all(n) {
            match logical_class(&sf, &e) {
                LogicalClass::Detected => detected += 1,
                LogicalClass::Logical(c) => {
                    if c.is_identity() {
                        assert!(t.contains(&e), "{e} maps to I but is not a stabilizer of\n{t}");
                    }
                    *counts.entry(c.to_string()).or_default() += 1;
                }
            }
        }
        let group = 1usize << (n - k);
        assert_eq!(counts.len(), 1 << (2 * k));
        assert!(counts.values().all(|&c| c == group), "{counts:?}");
        assert_eq!(detected + group * (1 << (2 * k)), 1 << (2 * n));
    }
}

#[test]
fn compiled_circuits_encode_their_codes() {
    let mut codes: Vec<Tableau> = presets().iter().flat_map(|p| [p.tableau.clone(), p.compile_tableau()]).collect();
    codes.extend(random_codes(100, 23));
    for t in codes {
        let circ = compile(&standard_form(&t)).unwrap();
        assert!(verify_encoding(&circ, &t), "\n{t}");
        assert!(is_symplectic(&circ.c_u1()).unwrap());
        assert!(is_symplectic(&circ.c_u2()).unwrap());
        // dropping the input permutation and Hadamards leaves a locally equivalent code
        let implemented = circ.implemented_code();
        for row in t.rows() {
            assert!(implemented.contains(&circ.encode_input(row)));
        }
        let again = compile(&standard_form(&implemented)).unwrap();
        assert!(verify_encoding(&again, &implemented));
    }
}

proptest! {
    #[test]
    fn cz_never_changes_x_part(n in 2usize..12, seed: u64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = rng.gen_range(0..n);
        let b = (a + rng.gen_range(1..n)) % n;
        let prog = GateProgram::new(n, vec![Instruction::CzLayer(vec![(a.min(b), a.max(b))])]).unwrap();
        let x: Vec<bool> = (0..n).map(|_| rng.gen()).collect();
        let z: Vec<bool> = (0..n).map(|_| rng.gen()).collect();
        let p = PauliString::from_bits(x.clone(), z.clone()).unwrap();
        let out = prog.propagate(&p);
        prop_assert_eq!(out.x(), &x[..]);
        let mut want = z;
        want[a] ^= x[b];
        want[b] ^= x[a];
        prop_assert_eq!(out.z(), &want[..]);
    }

    #[test]
    fn propagate_inverts(seed: u64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = rng.gen_range(2..=8);
        let k = rng.gen_range(1..n);
        let circ = compile(&standard_form(&random_tableau(n, k, &mut rng))).unwrap();
        let x: Vec<bool> = (0..n).map(|_| rng.gen()).collect();
        let z: Vec<bool> = (0..n).map(|_| rng.gen()).collect();
        let p = PauliString::from_bits(x, z).unwrap();
        prop_assert_eq!(circ.unpropagate(&circ.propagate(&p)), p);
    }
}
