//! Pauli-frame simulation of compiled purification circuits.
//!
//! Input noise is folded onto Alice's half of each pair. Both parties run the same circuit;
//! circuit noise is sampled independently per side and the net frame is the XOR of the two.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::bell::{BellClassDist, BellDiag};
use crate::compiler::CompiledCircuit;
use crate::decoder::DecoderTable;
use crate::error::{Error, Result};
use crate::pauli::{Pauli, PauliString};

/// Largest n enumerated exhaustively (4^n patterns).
pub const EXACT_CAP: usize = 10;
/// Largest k tallied by the Monte Carlo simulator (4^k classes).
pub const MC_CLASS_CAP: usize = 10;

const CHUNK: u64 = 4096;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct NoiseModel {
    pub p: f64,
    pub q: f64,
}

impl NoiseModel {
    pub fn new(p: f64, q: f64) -> Result<Self> {
        for v in [p, q] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::Probability(v));
            }
        }
        Ok(NoiseModel { p, q })
    }
}

/// Two-way protocols keep only zero-syndrome runs; one-way protocols correct.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Protocol {
    TwoWay,
    OneWay(DecoderTable),
}

impl Protocol {
    /// Distance-2 codes purify by postselection and take no decoder.
    pub fn for_code(d: usize, decoder: Option<DecoderTable>) -> Result<Self> {
        match (d, decoder) {
            (d, Some(_)) if d <= 2 => Err(Error::Config("distance-2 codes run two-way and take no decoder".into())),
            (d, None) if d > 2 => Err(Error::Config(format!("distance-{d} code needs a decoder"))),
            (_, Some(t)) => Ok(Protocol::OneWay(t)),
            (_, None) => Ok(Protocol::TwoWay),
        }
    }

    fn check(&self, circ: &CompiledCircuit) -> Result<Option<Vec<usize>>> {
        match self {
            Protocol::TwoWay => Ok(None),
            Protocol::OneWay(t) => {
                if t.r_s != circ.r_s() || t.k != circ.k {
                    return Err(Error::Config(format!(
                        "decoder for {} syndrome bits / {} pairs, circuit has {} / {}",
                        t.r_s,
                        t.k,
                        circ.r_s(),
                        circ.k
                    )));
                }
                Ok(Some(t.dense()))
            }
        }
    }
}

/// GF(2)-linear map from an error pattern to (syndrome key, logical class index). V_S is
/// 0..r_s and V_L is r_s..n in every compiled circuit, so both are read off bit ranges.
pub struct LinearMap {
    n: usize,
    img: Vec<[(u64, usize); 4]>,
}

fn split(r_s: usize, k: usize, x: u64, z: u64) -> (u64, usize) {
    let syn = x & ((1u64 << r_s) - 1);
    let mut cls = 0;
    for t in 0..k {
        let q = r_s + t;
        cls |= (((x >> q) & 1) | ((z >> q) & 1) << 1) << (2 * t);
    }
    (syn, cls as usize)
}

impl LinearMap {
    /// The code the emitted gates implement.
    pub fn physical(circ: &CompiledCircuit) -> Self {
        Self::build(circ, |p| p.clone())
    }

    /// The code the standard form was computed from (errors in its input labeling).
    pub fn code_level(circ: &CompiledCircuit) -> Self {
        Self::build(circ, |p| circ.encode_input(p))
    }

    fn build(circ: &CompiledCircuit, pre: impl Fn(&PauliString) -> PauliString) -> Self {
        assert!(circ.n <= 64);
        let img = (0..circ.n)
            .map(|q| {
                let mut row = [(0, 0); 4];
                for p in [Pauli::X, Pauli::Y, Pauli::Z] {
                    let (x, z) = pre(&PauliString::single(circ.n, q, p)).packed();
                    let (x, z) = circ.propagate_packed(x, z);
                    row[p.code()] = split(circ.r_s(), circ.k, x, z);
                }
                row
            })
            .collect();
        LinearMap { n: circ.n, img }
    }

    /// Visits every pattern with non-zero weight; `weights[q]` is indexed by Pauli code.
    pub fn for_each(&self, weights: &[[f64; 4]], mut f: impl FnMut(u64, usize, f64)) {
        assert_eq!(weights.len(), self.n);
        self.walk(0, 0, 0, 1.0, weights, &mut f);
    }

    fn walk(&self, q: usize, syn: u64, cls: usize, w: f64, weights: &[[f64; 4]], f: &mut impl FnMut(u64, usize, f64)) {
        if q == self.n {
            f(syn, cls, w);
            return;
        }
        for c in 0..4 {
            let wc = weights[q][c];
            if wc == 0.0 {
                continue;
            }
            let (s, l) = self.img[q][c];
            self.walk(q + 1, syn ^ s, cls ^ l, w * wc, weights, f);
        }
    }
}

/// Raw tally over all patterns: (accepted weight, class weights).
pub(crate) fn exact_weights(
    map: &LinearMap,
    k: usize,
    decoder: Option<&[usize]>,
    weights: &[[f64; 4]],
) -> (f64, Vec<f64>) {
    let mut acc = vec![0.0; 1 << (2 * k)];
    let mut detected = 0.0;
    map.for_each(weights, |syn, cls, w| match decoder {
        None if syn != 0 => detected += w,
        None => acc[cls] += w,
        Some(d) => acc[cls ^ d[syn as usize]] += w,
    });
    let accepted: f64 = acc.iter().sum();
    debug_assert!((accepted + detected - 1.0).abs() < 1e-9);
    (accepted, acc)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StdErrors {
    pub p_success: f64,
    pub fidelity_joint: f64,
    pub fidelity_reduced: Vec<f64>,
    pub correlators: Vec<[f64; 3]>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SimResult {
    pub p_success: f64,
    pub fidelity_joint: f64,
    pub fidelity_reduced: Vec<f64>,
    pub correlators: Vec<[f64; 3]>,
    /// Output classes conditioned on success.
    pub dist: BellClassDist,
    /// Probability mass that was rejected (two-way only; exact mode).
    pub detected: f64,
    pub shots: Option<u64>,
    pub stderr: Option<StdErrors>,
}

impl SimResult {
    fn from_dist(p_success: f64, detected: f64, dist: BellClassDist) -> Self {
        let k = dist.k();
        let marg: Vec<BellDiag> = (0..k).map(|t| dist.marginal(t).expect("t < k")).collect();
        SimResult {
            p_success,
            fidelity_joint: dist.identity_prob(),
            fidelity_reduced: marg.iter().map(BellDiag::fidelity).collect(),
            correlators: marg.iter().map(BellDiag::correlators).collect(),
            dist,
            detected,
            shots: None,
            stderr: None,
        }
    }
}

pub fn simulate_exact(circ: &CompiledCircuit, protocol: &Protocol, p: f64) -> Result<SimResult> {
    NoiseModel::new(p, 0.0)?;
    if circ.n > EXACT_CAP {
        return Err(Error::Cap { what: "exact enumeration", n: circ.n, cap: EXACT_CAP });
    }
    let dec = protocol.check(circ)?;
    let map = LinearMap::physical(circ);
    let w = vec![BellDiag::isotropic(p).by_code(); circ.n];
    let (accepted, acc) = exact_weights(&map, circ.k, dec.as_deref(), &w);
    // one-way runs keep every outcome; don't report float drift as rejection
    let accepted = if dec.is_some() { 1.0 } else { accepted };
    let detected = 1.0 - accepted;
    Ok(SimResult::from_dist(accepted, detected, BellClassDist::from_weights(circ.k, acc)))
}

fn sample_code<R: Rng>(rng: &mut R, prob: f64) -> u64 {
    if prob > 0.0 && rng.gen::<f64>() < prob {
        rng.gen_range(1..4)
    } else {
        0
    }
}

/// One party's circuit with depolarizing noise after every gate. Returns the final frame.
fn noisy_run<R: Rng>(circ: &CompiledCircuit, mut x: u64, mut z: u64, q: f64, rng: &mut R) -> (u64, u64) {
    let p1 = 0.75 * q;
    let p2 = 15.0 * q / 16.0;
    let cz = |x: u64, z: &mut u64, a: usize, b: usize| *z ^= ((x >> b) & 1) << a | ((x >> a) & 1) << b;
    let had = |x: &mut u64, z: &mut u64, t: usize| {
        let d = ((*x ^ *z) >> t) & 1;
        *x ^= d << t;
        *z ^= d << t;
    };
    let kick = |x: &mut u64, z: &mut u64, t: usize, c: u64| {
        *x ^= (c & 1) << t;
        *z ^= (c >> 1) << t;
    };
    let two = |x: &mut u64, z: &mut u64, a: usize, b: usize, rng: &mut R| {
        if p2 > 0.0 && rng.gen::<f64>() < p2 {
            let e: u64 = rng.gen_range(1..16);
            kick(x, z, a, e & 3);
            kick(x, z, b, e >> 2);
        }
    };
    for &(a, b) in &circ.u1_edges {
        cz(x, &mut z, a, b);
        two(&mut x, &mut z, a, b, rng);
    }
    for &t in &circ.h2_targets {
        had(&mut x, &mut z, t);
        let c = sample_code(rng, p1);
        x ^= (c & 1) << t;
        z ^= (c >> 1) << t;
    }
    for &(a, b) in &circ.u2_edges {
        cz(x, &mut z, a, b);
        two(&mut x, &mut z, a, b, rng);
    }
    for &t in &circ.h3_targets {
        had(&mut x, &mut z, t);
        let c = sample_code(rng, p1);
        x ^= (c & 1) << t;
        z ^= (c >> 1) << t;
    }
    (x, z)
}

/// Per-shot generator: stream `shot` of the ChaCha8 key derived from `seed`.
pub fn shot_rng(seed: u64, shot: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(shot);
    rng
}

pub fn simulate_mc(
    circ: &CompiledCircuit,
    protocol: &Protocol,
    noise: NoiseModel,
    shots: u64,
    seed: u64,
) -> Result<SimResult> {
    NoiseModel::new(noise.p, noise.q)?;
    if shots == 0 {
        return Err(Error::ZeroShots);
    }
    if circ.n > 64 {
        return Err(Error::Cap { what: "Monte Carlo frame width", n: circ.n, cap: 64 });
    }
    if circ.k > MC_CLASS_CAP {
        return Err(Error::Cap { what: "Monte Carlo class table", n: circ.k, cap: MC_CLASS_CAP });
    }
    let dec = protocol.check(circ)?;
    let (r_s, k) = (circ.r_s(), circ.k);
    let classes = 1usize << (2 * k);
    let pin = 0.75 * noise.p;

    let chunks = shots.div_ceil(CHUNK);
    let tally = (0..chunks)
        .into_par_iter()
        .map(|ci| {
            let mut counts = vec![0u64; classes];
            for shot in ci * CHUNK..((ci + 1) * CHUNK).min(shots) {
                let mut rng = shot_rng(seed, shot);
                let (mut x, mut z) = (0u64, 0u64);
                for qb in 0..circ.n {
                    let c = sample_code(&mut rng, pin);
                    x |= (c & 1) << qb;
                    z |= (c >> 1) << qb;
                }
                let (ax, az) = noisy_run(circ, x, z, noise.q, &mut rng);
                let (bx, bz) = if noise.q > 0.0 { noisy_run(circ, 0, 0, noise.q, &mut rng) } else { (0, 0) };
                let (syn, cls) = split(r_s, k, ax ^ bx, az ^ bz);
                match &dec {
                    None if syn != 0 => {}
                    None => counts[cls] += 1,
                    Some(d) => counts[cls ^ d[syn as usize]] += 1,
                }
            }
            counts
        })
        .reduce(
            || vec![0u64; classes],
            |mut a, b| {
                for (x, y) in a.iter_mut().zip(b) {
                    *x += y;
                }
                a
            },
        );
    let accepted: u64 = tally.iter().sum();
    if accepted == 0 {
        return Err(Error::Config("no shot passed postselection".into()));
    }
    let weights = tally.iter().map(|&c| c as f64).collect();
    let ps = accepted as f64 / shots as f64;
    let mut res = SimResult::from_dist(ps, 1.0 - ps, BellClassDist::from_weights(k, weights));
    let na = accepted as f64;
    let bern = |f: f64, n: f64| (f * (1.0 - f) / n).max(0.0).sqrt();
    res.stderr = Some(StdErrors {
        p_success: bern(ps, shots as f64),
        fidelity_joint: bern(res.fidelity_joint, na),
        fidelity_reduced: res.fidelity_reduced.iter().map(|&f| bern(f, na)).collect(),
        correlators: res.correlators.iter().map(|c| c.map(|v| ((1.0 - v * v) / na).max(0.0).sqrt())).collect(),
    });
    res.shots = Some(shots);
    Ok(res)
}

pub fn csv_header(k: usize) -> String {
    let mut cols: Vec<String> =
        ["code", "mode", "p", "q", "shots", "p_success", "fidelity_joint"].iter().map(|s| s.to_string()).collect();
    for i in 1..=k {
        cols.extend([format!("fidelity_reduced_{i}"), format!("xx_{i}"), format!("yy_{i}"), format!("zz_{i}")]);
    }
    cols.extend(["p_success_err".to_string(), "fidelity_joint_err".to_string()]);
    for i in 1..=k {
        cols.extend([
            format!("fidelity_reduced_{i}_err"),
            format!("xx_{i}_err"),
            format!("yy_{i}_err"),
            format!("zz_{i}_err"),
        ]);
    }
    cols.join(",")
}

pub fn csv_row(code: &str, noise: NoiseModel, r: &SimResult) -> String {
    let mode = if r.shots.is_some() { "mc" } else { "exact" };
    let mut cols = vec![
        code.to_string(),
        mode.to_string(),
        noise.p.to_string(),
        noise.q.to_string(),
        r.shots.map(|s| s.to_string()).unwrap_or_default(),
        r.p_success.to_string(),
        r.fidelity_joint.to_string(),
    ];
    for (f, c) in r.fidelity_reduced.iter().zip(&r.correlators) {
        cols.push(f.to_string());
        cols.extend(c.iter().map(f64::to_string));
    }
    match &r.stderr {
        Some(e) => {
            cols.push(e.p_success.to_string());
            cols.push(e.fidelity_joint.to_string());
            for (f, c) in e.fidelity_reduced.iter().zip(&e.correlators) {
                cols.push(f.to_string());
                cols.extend(c.iter().map(f64::to_string));
            }
        }
        None => cols.extend(std::iter::repeat_n(String::new(), 2 + 4 * r.fidelity_reduced.len())),
    }
    cols.join(",")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::compiler::compile;
    use crate::decoder::{table_513, table_713};
    use crate::stabilizer::{five_one_three, iceberg, standard_form, steane, CodePreset};

    fn circuit(p: &CodePreset) -> CompiledCircuit {
        compile(&standard_form(&p.compile_tableau())).unwrap()
    }

    fn brute_force_iceberg4(p: f64) -> (f64, f64) {
        // independent oracle: stabilizer commutation on the literal code
        let s: Vec<PauliString> = ["XXXX", "ZZZZ"].iter().map(|s| s.parse().unwrap()).collect();
        let w = BellDiag::isotropic(p).by_code();
        let (mut ok, mut id) = (0.0, 0.0);
        for e in PauliString::all(4) {
            let pr: f64 = (0..4).map(|q| w[e.get(q).code()]).product();
            if s.iter().all(|g| g.commutes(&e).unwrap()) {
                ok += pr;
                let in_group = e.is_identity() || s.contains(&e) || e.to_string() == "YYYY";
                if in_group {
                    id += pr;
                }
            }
        }
        (ok, id / ok)
    }

    #[test]
    fn iceberg4_at_p_01() {
        let c = circuit(&iceberg(4).unwrap());
        let r = simulate_exact(&c, &Protocol::TwoWay, 0.1).unwrap();
        let (ps, f) = brute_force_iceberg4(0.1);
        assert!((r.p_success - 0.742075).abs() < 1e-12);
        assert!((r.p_success - ps).abs() < 1e-12);
        assert!((r.fidelity_joint - f).abs() < 1e-12);
        assert!((r.fidelity_joint - 0.986_551_645_723_141_2).abs() < 1e-12);
    }

    #[test]
    fn perfect_input() {
        for (p, proto) in [
            (iceberg(6).unwrap(), Protocol::TwoWay),
            (five_one_three(), Protocol::OneWay(table_513())),
            (steane(), Protocol::OneWay(table_713())),
        ] {
            let r = simulate_exact(&circuit(&p), &proto, 0.0).unwrap();
            assert_eq!(r.p_success, 1.0);
            assert_eq!(r.fidelity_joint, 1.0);
            for c in &r.correlators {
                assert_eq!(*c, [1.0, -1.0, 1.0]);
            }
        }
    }

    #[test]
    fn five_one_three_polynomial() {
        let c = circuit(&five_one_three());
        let proto = Protocol::OneWay(table_513());
        for i in 0..=20 {
            let p = i as f64 / 20.0;
            let r = simulate_exact(&c, &proto, p).unwrap();
            let want =
                1.0 - 45.0 / 8.0 * p.powi(2) + 75.0 / 8.0 * p.powi(3) - 45.0 / 8.0 * p.powi(4) + 9.0 / 8.0 * p.powi(5);
            assert!((r.fidelity_joint - want).abs() < 1e-12, "p={p}");
        }
    }

    #[test]
    fn protocol_configuration() {
        assert!(Protocol::for_code(2, Some(table_513())).is_err());
        assert!(Protocol::for_code(3, None).is_err());
        assert_eq!(Protocol::for_code(2, None).unwrap(), Protocol::TwoWay);
        let c = circuit(&steane());
        assert!(simulate_exact(&c, &Protocol::OneWay(table_513()), 0.1).is_err());
    }

    #[test]
    fn caps_and_bad_inputs() {
        let c = circuit(&iceberg(12).unwrap());
        assert!(matches!(simulate_exact(&c, &Protocol::TwoWay, 0.1), Err(Error::Cap { .. })));
        let c = circuit(&iceberg(4).unwrap());
        let nm = NoiseModel::new(0.1, 0.0).unwrap();
        assert!(matches!(simulate_mc(&c, &Protocol::TwoWay, nm, 0, 1), Err(Error::ZeroShots)));
        assert!(NoiseModel::new(1.5, 0.0).is_err());
    }

    #[test]
    fn mc_is_reproducible_and_thread_independent() {
        let c = circuit(&five_one_three());
        let proto = Protocol::OneWay(table_513());
        let nm = NoiseModel::new(0.05, 0.002).unwrap();
        let a = simulate_mc(&c, &proto, nm, 20_000, 3).unwrap();
        let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let b = pool.install(|| simulate_mc(&c, &proto, nm, 20_000, 3).unwrap());
        assert_eq!(a, b);
        assert_eq!(a.p_success, 1.0);
        let d = simulate_mc(&c, &proto, nm, 20_000, 4).unwrap();
        assert_ne!(a.dist, d.dist);
    }

    #[test]
    fn csv_columns_line_up() {
        let c = circuit(&iceberg(4).unwrap());
        let r = simulate_exact(&c, &Protocol::TwoWay, 0.1).unwrap();
        let h = csv_header(2);
        let row = csv_row("iceberg4", NoiseModel::new(0.1, 0.0).unwrap(), &r);
        assert_eq!(h.split(',').count(), row.split(',').count());
        assert!(h.starts_with("code,mode,p,q,shots,p_success,fidelity_joint,fidelity_reduced_1,xx_1"));
    }
}
