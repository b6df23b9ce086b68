//! Iceberg-code fidelities and asymptotic distillation rates.

use std::fmt::Write as _;
use std::str::FromStr;

use rayon::prelude::*;

use crate::bell::BellClassDist;
pub use crate::bell::BellDiag;
use crate::compiler::{compile, CompiledCircuit};
use crate::error::{Error, Result};
use crate::sim::{exact_weights, LinearMap, EXACT_CAP};
use crate::stabilizer::{iceberg, standard_form};

pub const R_MAX: usize = 20;
const YIELD_FLOOR: f64 = 1e-12;

fn check_iceberg(n: usize) -> Result<()> {
    if n < 4 || n % 2 == 1 {
        return Err(Error::BadIcebergSize(n));
    }
    Ok(())
}

/// Binary entropy with 0 log 0 = 0.
pub fn h2(x: f64) -> f64 {
    let t = |v: f64| if v > 0.0 { -v * v.log2() } else { 0.0 };
    t(x) + t(1.0 - x)
}

pub fn iceberg_fidelity(n: usize, p: f64) -> Result<f64> {
    check_iceberg(n)?;
    let n = n as i32;
    let num = (1.0 - 0.75 * p).powi(n) + 3.0 * (p / 4.0).powi(n);
    let den = 0.25 + 0.75 * (1.0 - p).powi(n);
    Ok(num / den)
}

fn binom(n: u64, k: u64) -> u128 {
    if k > n {
        return 0;
    }
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

/// Number of weight-w Pauli strings that commute with both X^n and Z^n.
pub fn n_w(n: u64, w: u64) -> u128 {
    if w > n {
        return 0;
    }
    let three = 3i128.pow(w as u32);
    let sign = if w.is_multiple_of(2) { 3 } else { -3 };
    (binom(n, w) as i128 * (three + sign) / 4) as u128
}

/// Σ_w n_w (1-3p/4)^{n-w} (p/4)^w.
pub fn undetected_prob(n: usize, p: f64) -> Result<f64> {
    check_iceberg(n)?;
    Ok((0..=n as u64)
        .map(|w| n_w(n as u64, w) as f64 * (1.0 - 0.75 * p).powi((n as u64 - w) as i32) * (p / 4.0).powi(w as i32))
        .sum())
}

pub fn undetected_prob_closed(n: usize, p: f64) -> f64 {
    (1.0 + 3.0 * (1.0 - p).powi(n as i32)) / 4.0
}

pub fn hashing_bound(p: f64) -> f64 {
    let a = 0.75 * p;
    (1.0 - h2(a) - a * 3f64.log2()).max(0.0)
}

pub fn rains_bound(p: f64) -> f64 {
    (1.0 - h2(1.0 - 0.75 * p)).max(0.0)
}

/// max{0, k + Σ P log2 P}
pub fn hashing_yield(dist: &BellClassDist) -> f64 {
    (dist.k() as f64 + dist.neg_entropy()).max(0.0)
}

pub fn bell_hashing(w: &BellDiag) -> f64 {
    hashing_yield(&BellClassDist::product(&[*w]))
}

#[derive(Clone, Debug, PartialEq)]
pub struct EppStep {
    pub p_s: f64,
    pub joint: BellClassDist,
    pub reduced: BellDiag,
}

/// One round of the [[n, n-2, 2]] two-way protocol on i.i.d. Bell-diagonal pairs.
pub struct IcebergMap {
    n: usize,
    map: LinearMap,
}

impl IcebergMap {
    pub fn new(n: usize) -> Result<Self> {
        check_iceberg(n)?;
        if n > EXACT_CAP {
            return Err(Error::Cap { what: "iceberg map enumeration", n, cap: EXACT_CAP });
        }
        let code = iceberg(n)?;
        let circ: CompiledCircuit = compile(&standard_form(&code.tableau))?;
        Ok(IcebergMap { n, map: LinearMap::code_level(&circ) })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn apply(&self, input: &BellDiag) -> EppStep {
        let k = self.n - 2;
        let (p_s, acc) = exact_weights(&self.map, k, None, &vec![input.by_code(); self.n]);
        let joint = BellClassDist::from_weights(k, acc);
        let reduced = joint.marginal(0).expect("k >= 2");
        for t in 1..k {
            let m = joint.marginal(t).expect("t < k").by_code();
            let r = reduced.by_code();
            assert!((0..4).all(|c| (m[c] - r[c]).abs() <= 1e-12), "pair {t} marginal {m:?} differs from pair 0 {r:?}");
        }
        EppStep { p_s, joint, reduced }
    }
}

pub fn epp_map(n: usize, input: &BellDiag) -> Result<EppStep> {
    Ok(IcebergMap::new(n)?.apply(input))
}

pub fn rate_ls(n: usize, p: f64) -> Result<f64> {
    let step = epp_map(n, &BellDiag::isotropic(p))?;
    Ok(step.p_s / n as f64 * hashing_yield(&step.joint))
}

/// D_Sh for r = 0..=r_max (shorter if the yield product falls below 1e-12).
fn sh_profile(map: &IcebergMap, p: f64, r_max: usize) -> Vec<f64> {
    let n = map.n() as f64;
    let mut w = BellDiag::isotropic(p);
    let mut y = 1.0;
    let mut out = vec![bell_hashing(&w)];
    for _ in 0..r_max {
        let step = map.apply(&w);
        y *= (n - 2.0) / n * step.p_s;
        if y < YIELD_FLOOR {
            break;
        }
        w = step.reduced;
        out.push(y * bell_hashing(&w));
    }
    out
}

/// Yield after r rounds of the iceberg protocol with shuffling between rounds, followed by
/// hashing. Returns 0 once the accumulated yield factor drops below 1e-12.
pub fn rate_sh(r: usize, n: usize, p: f64) -> Result<f64> {
    let map = IcebergMap::new(n)?;
    Ok(sh_profile(&map, p, r).get(r).copied().unwrap_or(0.0))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum BestBy {
    Shuffled(usize),
    LeungShor,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Best {
    pub value: f64,
    pub by: BestBy,
    /// Best D_Sh alone and its round count.
    pub sh: f64,
    pub sh_r: usize,
    pub ls: f64,
}

pub fn rate_best_detail(n: usize, p: f64, r_max: usize) -> Result<Best> {
    let map = IcebergMap::new(n)?;
    let prof = sh_profile(&map, p, r_max);
    let (sh_r, sh) =
        prof.iter()
            .copied()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |best, (r, v)| if v > best.1 { (r, v) } else { best });
    let step = map.apply(&BellDiag::isotropic(p));
    let ls = step.p_s / n as f64 * hashing_yield(&step.joint);
    let (value, by) = if ls > sh { (ls, BestBy::LeungShor) } else { (sh, BestBy::Shuffled(sh_r)) };
    Ok(Best { value, by, sh, sh_r, ls })
}

pub fn rate_best(n: usize, p: f64) -> Result<f64> {
    Ok(rate_best_detail(n, p, R_MAX)?.value)
}

/// Bilateral-CNOT 2→1 recurrence: accept when the X parts agree, output (x, z1 ⊕ z2).
pub fn recurrence(w: &BellDiag) -> (f64, BellDiag) {
    let a = w.by_code();
    let mut out = [0.0; 4];
    for c1 in 0..4 {
        for c2 in 0..4 {
            if c1 & 1 == c2 & 1 {
                out[(c1 & 1) | ((c1 ^ c2) & 2)] += a[c1] * a[c2];
            }
        }
    }
    let ps: f64 = out.iter().sum();
    (ps, BellDiag::from_codes(out.map(|v| v / ps)))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RecurrenceRates {
    pub d_r: f64,
    pub r_r: usize,
    pub d_m: f64,
    pub r_m: usize,
}

/// At least one recurrence round, at most `r_max`; each round halves the pair count and ends
/// with `between` (a twirl or a bilateral Hadamard).
fn recurrence_best(p: f64, r_max: usize, between: impl Fn(&BellDiag) -> BellDiag) -> (f64, usize) {
    let mut w = BellDiag::isotropic(p);
    let mut y = 1.0;
    let mut best = (0.0, 1);
    for r in 1..=r_max {
        let (ps, out) = recurrence(&w);
        y *= ps / 2.0;
        if y < YIELD_FLOOR {
            break;
        }
        w = between(&out);
        let v = y * bell_hashing(&w);
        if v > best.0 {
            best = (v, r);
        }
    }
    best
}

pub fn recurrence_rates_detail(p: f64, r_max: usize) -> RecurrenceRates {
    let (d_r, r_r) = recurrence_best(p, r_max, BellDiag::werner);
    let (d_m, r_m) = recurrence_best(p, r_max, BellDiag::hadamard);
    RecurrenceRates { d_r, r_r, d_m, r_m }
}

pub fn recurrence_rates(p: f64) -> (f64, f64) {
    let r = recurrence_rates_detail(p, R_MAX);
    (r.d_r, r.d_m)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FidelityProtocol {
    Input,
    Recurrence,
    Macchiavello2,
    Iceberg(usize),
}

impl FromStr for FidelityProtocol {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "input" => Ok(Self::Input),
            "recurrence" => Ok(Self::Recurrence),
            "macchiavello2" => Ok(Self::Macchiavello2),
            "iceberg4" | "iceberg(4)" => Ok(Self::Iceberg(4)),
            "iceberg6" | "iceberg(6)" => Ok(Self::Iceberg(6)),
            _ => Err(Error::UnknownProtocol(s.to_string())),
        }
    }
}

/// Fidelity of one output pair after a single application of the protocol.
pub fn f_out_red(protocol: FidelityProtocol, p: f64) -> Result<f64> {
    let w = BellDiag::isotropic(p);
    Ok(match protocol {
        FidelityProtocol::Input => w.fidelity(),
        FidelityProtocol::Recurrence => recurrence(&w).1.fidelity(),
        FidelityProtocol::Macchiavello2 => recurrence(&recurrence(&w).1.hadamard()).1.fidelity(),
        FidelityProtocol::Iceberg(n) => epp_map(n, &w)?.reduced.fidelity(),
    })
}

/// Column table over a p grid.
#[derive(Clone, Debug, PartialEq)]
pub struct RateCurve {
    pub p: Vec<f64>,
    pub columns: Vec<(String, Vec<f64>)>,
    /// Non-numeric metadata columns (maximizing round counts).
    pub meta: Vec<(String, Vec<String>)>,
}

impl RateCurve {
    pub fn column(&self, name: &str) -> Option<&[f64]> {
        self.columns.iter().find(|(n, _)| n == name).map(|(_, v)| v.as_slice())
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("p");
        for (name, _) in &self.columns {
            let _ = write!(s, ",{name}");
        }
        for (name, _) in &self.meta {
            let _ = write!(s, ",{name}");
        }
        s.push('\n');
        for (i, p) in self.p.iter().enumerate() {
            let _ = write!(s, "{p}");
            for (_, v) in &self.columns {
                let _ = write!(s, ",{}", v[i]);
            }
            for (_, v) in &self.meta {
                let _ = write!(s, ",{}", v[i]);
            }
            s.push('\n');
        }
        s
    }
}

pub fn grid(p_max: f64, points: usize) -> Vec<f64> {
    match points {
        0 => Vec::new(),
        1 => vec![0.0],
        _ => (0..points).map(|i| p_max * i as f64 / (points - 1) as f64).collect(),
    }
}

/// Rate columns for every p: bounds, recurrence rates, and per iceberg size n the D_LS,
/// best D_Sh and D_[[n]] values with the maximizing round count.
pub fn rate_curve(ps: &[f64], ns: &[usize], r_max: usize) -> Result<RateCurve> {
    let maps = ns.iter().map(|&n| IcebergMap::new(n)).collect::<Result<Vec<_>>>()?;
    let rows: Vec<(Vec<f64>, Vec<String>)> = ps
        .par_iter()
        .map(|&p| {
            let rec = recurrence_rates_detail(p, r_max);
            let mut v = vec![hashing_bound(p), rains_bound(p), rec.d_r, rec.d_m];
            let mut meta = vec![rec.r_r.to_string(), rec.r_m.to_string()];
            for map in &maps {
                let n = map.n() as f64;
                let prof = sh_profile(map, p, r_max);
                let (sh_r, sh) =
                    prof.iter()
                        .copied()
                        .enumerate()
                        .fold((0, f64::NEG_INFINITY), |b, (r, x)| if x > b.1 { (r, x) } else { b });
                let step = map.apply(&BellDiag::isotropic(p));
                let ls = step.p_s / n * hashing_yield(&step.joint);
                v.extend([ls, sh, ls.max(sh)]);
                meta.push(if ls > sh { "LS".to_string() } else { sh_r.to_string() });
            }
            (v, meta)
        })
        .collect();
    let mut names: Vec<String> = ["D_H", "Rains", "D_R", "D_M"].iter().map(|s| s.to_string()).collect();
    let mut meta_names = vec!["r_R".to_string(), "r_M".to_string()];
    for &n in ns {
        names.extend([format!("D_LS_{n}"), format!("D_Sh_best_{n}"), format!("D_best_{n}")]);
        meta_names.push(format!("r_best_{n}"));
    }
    let columns =
        names.into_iter().enumerate().map(|(c, name)| (name, rows.iter().map(|r| r.0[c]).collect())).collect();
    let meta = meta_names
        .into_iter()
        .enumerate()
        .map(|(c, name)| (name, rows.iter().map(|r| r.1[c].clone()).collect()))
        .collect();
    Ok(RateCurve { p: ps.to_vec(), columns, meta })
}

pub fn fidelity_curve(ps: &[f64]) -> Result<RateCurve> {
    let protos = [
        ("input", FidelityProtocol::Input),
        ("recurrence", FidelityProtocol::Recurrence),
        ("macchiavello2", FidelityProtocol::Macchiavello2),
        ("iceberg4", FidelityProtocol::Iceberg(4)),
        ("iceberg6", FidelityProtocol::Iceberg(6)),
    ];
    let mut columns = Vec::new();
    for (name, proto) in protos {
        let v = ps.par_iter().map(|&p| f_out_red(proto, p)).collect::<Result<Vec<_>>>()?;
        columns.push((name.to_string(), v));
    }
    Ok(RateCurve { p: ps.to_vec(), columns, meta: Vec::new() })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_forms() {
        assert_eq!(iceberg_fidelity(4, 0.0).unwrap(), 1.0);
        let f = iceberg_fidelity(4, 2.0 / 3.0).unwrap();
        assert!((f - 0.25).abs() < 1e-12);
        assert!((iceberg_fidelity(4, 0.1).unwrap() - 0.986_551_645_723_141_2).abs() < 1e-12);
        assert!(matches!(iceberg_fidelity(5, 0.1), Err(Error::BadIcebergSize(5))));
        assert_eq!(n_w(7, 0), 1);
        assert_eq!(n_w(4, 2), 18);
        assert_eq!(n_w(9, 1), 0);
        assert_eq!(undetected_prob(4, 0.0).unwrap(), 1.0);
        assert!((undetected_prob(4, 0.1).unwrap() - 0.742075).abs() < 1e-12);
        assert!((undetected_prob(4, 1.0).unwrap() - 0.25).abs() < 1e-12);
    }

    #[test]
    fn bounds() {
        assert_eq!(hashing_bound(0.0), 1.0);
        assert_eq!(rains_bound(0.0), 1.0);
        assert!((hashing_bound(0.1) - 0.496_816_268_319_416_2).abs() < 1e-14);
        assert!((rains_bound(0.1) - 0.615_688_455_873_502_9).abs() < 1e-14);
        assert_eq!(hashing_yield(&BellClassDist::point(3)), 3.0);
        assert_eq!(rains_bound(2.0 / 3.0), 0.0);
    }

    #[test]
    fn epp_map_examples() {
        let s = epp_map(4, &BellDiag::perfect()).unwrap();
        assert_eq!(s.p_s, 1.0);
        assert_eq!(s.joint, BellClassDist::point(2));
        let p = 0.1;
        let s = epp_map(4, &BellDiag::isotropic(p)).unwrap();
        assert!((s.p_s - undetected_prob_closed(4, p)).abs() < 1e-12);
        assert!((s.joint.identity_prob() - iceberg_fidelity(4, p).unwrap()).abs() < 1e-12);
        assert!(s.reduced.fidelity() > 1.0 - 0.75 * p);
    }

    #[test]
    fn asymmetric_input_marginals_agree() {
        let w = BellDiag::new(0.8, 0.1, 0.03, 0.07).unwrap();
        for n in [4, 6, 8] {
            let s = epp_map(n, &w).unwrap();
            let total: f64 = s.joint.probs().iter().sum();
            assert!((total - 1.0).abs() < 1e-12);
        }
        assert!(matches!(IcebergMap::new(12), Err(Error::Cap { .. })));
    }

    #[test]
    fn prototype_values() {
        let (dr, dm) = recurrence_rates(0.1);
        assert!((rate_best(4, 0.1).unwrap() - 0.4968).abs() < 1e-4);
        assert!((dr - 0.2769).abs() < 1e-4, "{dr}");
        assert!((dm - 0.3072).abs() < 1e-4, "{dm}");
        assert!(rate_best(4, 0.45).unwrap() > 0.0);
        assert!(rate_best(4, 0.5).unwrap() < 1e-5);
        assert_eq!(rate_best(4, 0.51).unwrap(), 0.0);
    }

    #[test]
    fn rate_examples() {
        assert!((rate_ls(4, 0.0).unwrap() - 0.5).abs() < 1e-15);
        assert!((rate_sh(1, 4, 0.0).unwrap() - 0.5).abs() < 1e-15);
        assert!(rate_ls(6, 0.2).unwrap() < rate_ls(4, 0.2).unwrap());
        for p in [0.0, 0.05, 0.3] {
            assert!((rate_sh(0, 4, p).unwrap() - hashing_bound(p)).abs() < 1e-12);
        }
    }

    #[test]
    fn recurrence_step() {
        // Werner input: known closed form for the bilateral CNOT round
        let f: f64 = 0.8;
        let e = (1.0 - f) / 3.0;
        let (ps, out) = recurrence(&BellDiag::isotropic(4.0 * (1.0 - f) / 3.0));
        let want_ps = f * f + 2.0 * f * e + 5.0 * e * e;
        assert!((ps - want_ps).abs() < 1e-12);
        assert!((out.fidelity() - (f * f + e * e) / want_ps).abs() < 1e-12);
    }

    #[test]
    fn protocol_names() {
        assert_eq!("iceberg(6)".parse::<FidelityProtocol>().unwrap(), FidelityProtocol::Iceberg(6));
        assert!(matches!("hashing".parse::<FidelityProtocol>(), Err(Error::UnknownProtocol(_))));
        for proto in ["input", "recurrence", "macchiavello2", "iceberg4", "iceberg6"] {
            assert_eq!(f_out_red(proto.parse().unwrap(), 0.0).unwrap(), 1.0);
        }
        assert!((f_out_red(FidelityProtocol::Input, 0.2).unwrap() - 0.85).abs() < 1e-15);
    }
}
