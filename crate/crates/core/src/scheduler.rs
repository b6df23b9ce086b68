//! CZ connectivity multigraph and its edge colorings (parallel CZ layers).
//!
//! `delta` below is the maximum degree.

use std::fmt::Write as _;

use serde::Serialize;

use crate::compiler::{CompiledCircuit, Edge, GateProgram, Instruction, Species};
use crate::error::Result;

pub const DEFAULT_EXACT_LIMIT: usize = 24;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MultiGraph {
    adj: Vec<Vec<u8>>,
}

impl MultiGraph {
    pub fn new(n: usize) -> Self {
        MultiGraph { adj: vec![vec![0; n]; n] }
    }

    pub fn from_edges(n: usize, edges: &[Edge]) -> Self {
        let mut g = Self::new(n);
        for &(a, b) in edges {
            g.add_edge(a, b);
        }
        g
    }

    pub fn add_edge(&mut self, a: usize, b: usize) {
        assert!(a != b, "self-loop at {a}");
        self.adj[a][b] += 1;
        self.adj[b][a] += 1;
    }

    pub fn n(&self) -> usize {
        self.adj.len()
    }

    pub fn multiplicity(&self, a: usize, b: usize) -> u8 {
        self.adj[a][b]
    }

    /// Edges with multiplicity, `a < b`, sorted.
    pub fn edges(&self) -> Vec<Edge> {
        let n = self.n();
        let mut out = Vec::new();
        for a in 0..n {
            for b in a + 1..n {
                for _ in 0..self.adj[a][b] {
                    out.push((a, b));
                }
            }
        }
        out
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adj[v].iter().map(|&m| m as usize).sum()
    }

    pub fn delta(&self) -> usize {
        (0..self.n()).map(|v| self.degree(v)).max().unwrap_or(0)
    }

    pub fn mu(&self) -> usize {
        self.mu_without(None)
    }

    fn mu_without(&self, skip: Option<usize>) -> usize {
        let n = self.n();
        let mut m = 0;
        for a in 0..n {
            for b in a + 1..n {
                if Some(a) != skip && Some(b) != skip {
                    m = m.max(self.adj[a][b] as usize);
                }
            }
        }
        m
    }

    /// min{ delta + min_v mu(G - v), floor(3 delta / 2) }
    pub fn upper_bound(&self) -> usize {
        let d = self.delta();
        let vizing = (0..self.n()).map(|v| d + self.mu_without(Some(v))).min().unwrap_or(0);
        vizing.min(3 * d / 2)
    }

    pub fn to_dot(&self) -> String {
        let mut s = String::from("graph A {\n");
        for v in 0..self.n() {
            let _ = writeln!(s, "  {v};");
        }
        for (a, b) in self.edges() {
            let _ = writeln!(s, "  {a} -- {b};");
        }
        s.push_str("}\n");
        s
    }
}

pub fn build_multigraph(circ: &CompiledCircuit) -> MultiGraph {
    let mut g = MultiGraph::new(circ.n);
    for &(a, b) in circ.u1_edges.iter().chain(&circ.u2_edges) {
        g.add_edge(a, b);
    }
    g
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LayerAssignment {
    pub layers: Vec<Vec<Edge>>,
    pub exact: bool,
}

impl LayerAssignment {
    pub fn ell(&self) -> usize {
        self.layers.len()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plain data")
    }
}

/// Side constraint for physical schedules: edges touching kept qubits in U1 must run before
/// the Hadamard block on those qubits, U2 edges touching them after it.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Phase {
    Free,
    Before,
    After,
}

struct Coloring {
    colors: Vec<usize>,
    count: usize,
}

fn compatible(a: Phase, b: Phase) -> bool {
    !matches!((a, b), (Phase::Before, Phase::After) | (Phase::After, Phase::Before))
}

fn degrees(n: usize, edges: &[Edge]) -> Vec<usize> {
    let mut d = vec![0; n];
    for &(a, b) in edges {
        d[a] += 1;
        d[b] += 1;
    }
    d
}

/// Greedy with Kempe-chain repair. Starts from `target` colors and only opens a new color when
/// no swap frees one.
fn heuristic(n: usize, edges: &[Edge], target: usize) -> Coloring {
    let deg = degrees(n, edges);
    let mut order: Vec<usize> = (0..edges.len()).collect();
    order.sort_by_key(|&e| (std::cmp::Reverse(deg[edges[e].0] + deg[edges[e].1]), edges[e]));

    let mut k = target.max(1);
    let mut color = vec![usize::MAX; edges.len()];
    // at[v][c] = edge with color c at v
    let mut at: Vec<Vec<Option<usize>>> = vec![vec![None; k]; n];

    for &e in &order {
        let (u, v) = edges[e];
        loop {
            if let Some(c) = (0..k).find(|&c| at[u][c].is_none() && at[v][c].is_none()) {
                color[e] = c;
                at[u][c] = Some(e);
                at[v][c] = Some(e);
                break;
            }
            if kempe_free(edges, &mut color, &mut at, k, u, v) || kempe_free(edges, &mut color, &mut at, k, v, u) {
                continue;
            }
            k += 1;
            for row in at.iter_mut() {
                row.push(None);
            }
        }
    }
    Coloring { colors: color, count: k }
}

/// Tries to make some color free at both `u` and `v` by flipping an (a,b) chain that starts at
/// `v`, where a is missing at `u` and b is missing at `v`.
fn kempe_free(
    edges: &[Edge],
    color: &mut [usize],
    at: &mut [Vec<Option<usize>>],
    k: usize,
    u: usize,
    v: usize,
) -> bool {
    for a in (0..k).filter(|&c| at[u][c].is_none()) {
        for b in (0..k).filter(|&c| at[v][c].is_none()) {
            // walk the chain from v along colors a, b, a, ...
            let mut path = Vec::new();
            let mut cur = v;
            let mut want = a;
            let mut hits_u = false;
            while let Some(e) = at[cur][want] {
                path.push(e);
                let (x, y) = edges[e];
                cur = if x == cur { y } else { x };
                if cur == u {
                    hits_u = true;
                    break;
                }
                want = if want == a { b } else { a };
            }
            if hits_u || path.is_empty() {
                continue;
            }
            for &e in &path {
                let (x, y) = edges[e];
                at[x][color[e]] = None;
                at[y][color[e]] = None;
            }
            for &e in &path {
                let (x, y) = edges[e];
                color[e] = if color[e] == a { b } else { a };
                at[x][color[e]] = Some(e);
                at[y][color[e]] = Some(e);
            }
            return true;
        }
    }
    false
}

struct Search<'a> {
    n: usize,
    edges: &'a [Edge],
    phase: &'a [Phase],
    order: Vec<usize>,
    k: usize,
    color: Vec<usize>,
    used: Vec<Vec<bool>>,
    left: Vec<usize>,
    class_phase: Vec<Phase>,
    class_size: Vec<usize>,
}

impl Search<'_> {
    fn run(&mut self, pos: usize, opened: usize) -> bool {
        if pos == self.order.len() {
            return true;
        }
        let e = self.order[pos];
        let (u, v) = self.edges[e];
        let limit = (opened + 1).min(self.k);
        for c in 0..limit {
            if self.used[u][c] || self.used[v][c] || !compatible(self.class_phase[c], self.phase[e]) {
                continue;
            }
            self.assign(e, c, true);
            let ok = self.feasible(u) && self.feasible(v) && self.run(pos + 1, opened.max(c + 1));
            if ok {
                return true;
            }
            self.assign(e, c, false);
        }
        false
    }

    fn assign(&mut self, e: usize, c: usize, on: bool) {
        let (u, v) = self.edges[e];
        self.used[u][c] = on;
        self.used[v][c] = on;
        if on {
            self.left[u] -= 1;
            self.left[v] -= 1;
            self.color[e] = c;
            self.class_size[c] += 1;
            if self.phase[e] != Phase::Free {
                self.class_phase[c] = self.phase[e];
            }
        } else {
            self.left[u] += 1;
            self.left[v] += 1;
            self.color[e] = usize::MAX;
            self.class_size[c] -= 1;
            // recompute the class phase from what is still in it
            self.class_phase[c] = Phase::Free;
            if self.class_size[c] > 0 {
                for (f, &col) in self.color.iter().enumerate() {
                    if col == c && self.phase[f] != Phase::Free {
                        self.class_phase[c] = self.phase[f];
                        break;
                    }
                }
            }
        }
    }

    fn feasible(&self, v: usize) -> bool {
        let free = self.used[v].iter().filter(|&&b| !b).count();
        self.left[v] <= free
    }
}

fn exact(n: usize, edges: &[Edge], phase: &[Phase], k: usize) -> Option<Vec<usize>> {
    let deg = degrees(n, edges);
    let hub = (0..n).max_by_key(|&v| (deg[v], std::cmp::Reverse(v)))?;
    let mut first: Vec<usize> = (0..edges.len()).filter(|&e| edges[e].0 == hub || edges[e].1 == hub).collect();
    first.sort_by_key(|&e| edges[e]);
    let mut rest: Vec<usize> = (0..edges.len()).filter(|e| !first.contains(e)).collect();
    rest.sort_by_key(|&e| (std::cmp::Reverse(deg[edges[e].0] + deg[edges[e].1]), edges[e]));
    let mut order = first.clone();
    order.extend(rest);
    let mut s = Search {
        n,
        edges,
        phase,
        order,
        k,
        color: vec![usize::MAX; edges.len()],
        used: vec![vec![false; k]; n],
        left: deg.clone(),
        class_phase: vec![Phase::Free; k],
        class_size: vec![0; k],
    };
    let _ = s.n;
    // The hub's edges get distinct colors anyway; the search visits them first and only
    // ever opens the next unused color, which pins them to 0, 1, 2, ...
    s.run(0, 0).then_some(s.color)
}

fn split_phases(edges: &[Edge], phase: &[Phase], c: Coloring) -> Coloring {
    // A heuristic class mixing Before and After edges is split in two.
    let mut colors = c.colors;
    let mut count = c.count;
    for col in 0..c.count {
        let mixed = (0..edges.len()).any(|e| colors[e] == col && phase[e] == Phase::Before)
            && (0..edges.len()).any(|e| colors[e] == col && phase[e] == Phase::After);
        if mixed {
            for e in 0..edges.len() {
                if colors[e] == col && phase[e] == Phase::After {
                    colors[e] = count;
                }
            }
            count += 1;
        }
    }
    Coloring { colors, count }
}

fn color(n: usize, edges: &[Edge], phase: &[Phase], exact_limit: usize) -> (Vec<Vec<Edge>>, Vec<usize>, bool) {
    if edges.is_empty() {
        return (Vec::new(), Vec::new(), true);
    }
    let g = MultiGraph::from_edges(n, edges);
    let h = split_phases(edges, phase, heuristic(n, edges, g.upper_bound()));
    let mut best = h.colors;
    let mut count = h.count;
    let is_exact = edges.len() <= exact_limit;
    if is_exact {
        for k in g.delta()..count {
            if let Some(c) = exact(n, edges, phase, k) {
                best = c;
                count = k;
                break;
            }
        }
    }
    let mut layers = vec![Vec::new(); count];
    for (e, &c) in best.iter().enumerate() {
        layers[c].push(edges[e]);
    }
    for l in &mut layers {
        l.sort_unstable();
    }
    // drop colors the heuristic opened but never used
    let keep: Vec<usize> = (0..count).filter(|&c| !layers[c].is_empty()).collect();
    let remap: Vec<usize> = {
        let mut r = vec![usize::MAX; count];
        for (i, &c) in keep.iter().enumerate() {
            r[c] = i;
        }
        r
    };
    let best = best.iter().map(|&c| remap[c]).collect();
    layers.retain(|l| !l.is_empty());
    (layers, best, is_exact)
}

/// Minimum edge coloring when the edge count is at most `exact_limit`, otherwise Kempe-chain
/// heuristic.
pub fn chromatic_index(g: &MultiGraph, exact_limit: usize) -> LayerAssignment {
    let edges = g.edges();
    let phase = vec![Phase::Free; edges.len()];
    let (layers, _, exact) = color(g.n(), &edges, &phase, exact_limit);
    LayerAssignment { layers, exact }
}

pub fn verify_layers(g: &MultiGraph, la: &LayerAssignment) -> bool {
    let n = g.n();
    let mut seen = MultiGraph::new(n);
    for layer in &la.layers {
        let mut touched = vec![false; n];
        for &(a, b) in layer {
            if a >= n || b >= n || a == b {
                return false;
            }
            if std::mem::replace(&mut touched[a], true) || std::mem::replace(&mut touched[b], true) {
                return false;
            }
            seen.add_edge(a, b);
        }
    }
    seen == *g && g.delta() <= la.ell() && la.ell() <= g.upper_bound()
}

/// Layered gate program for the circuit. Every CZ layer lies entirely before or entirely after
/// the Hadamard block on the kept qubits, so the program realizes exactly the compiled
/// unitary; the returned assignment lists the layers in program order.
pub fn schedule_program(circ: &CompiledCircuit, exact_limit: usize) -> Result<(GateProgram, LayerAssignment)> {
    let kept = |q: usize| q >= circ.r_s();
    let mut edges = Vec::new();
    let mut phase = Vec::new();
    for &(a, b) in &circ.u1_edges {
        edges.push((a, b));
        phase.push(if kept(a) || kept(b) { Phase::Before } else { Phase::Free });
    }
    for &(a, b) in &circ.u2_edges {
        edges.push((a, b));
        phase.push(if kept(a) || kept(b) { Phase::After } else { Phase::Free });
    }
    let (layers, colors, exact) = color(circ.n, &edges, &phase, exact_limit);
    let class_phase = |c: usize| {
        (0..edges.len())
            .filter(|&e| colors[e] == c && phase[e] != Phase::Free)
            .map(|e| phase[e])
            .next()
            .unwrap_or(Phase::Free)
    };
    let mut before = Vec::new();
    let mut free = Vec::new();
    let mut after = Vec::new();
    for (c, layer) in layers.into_iter().enumerate() {
        match class_phase(c) {
            Phase::Before => before.push(layer),
            Phase::Free => free.push(layer),
            Phase::After => after.push(layer),
        }
    }
    let mut ins: Vec<Instruction> = before.iter().cloned().map(Instruction::CzLayer).collect();
    ins.push(Instruction::GlobalH { species: Species::Rb, targets: circ.h2_targets.clone() });
    ins.extend(free.iter().chain(&after).cloned().map(Instruction::CzLayer));
    ins.push(Instruction::GlobalH { species: Species::Cs, targets: circ.h3_targets.clone() });
    ins.push(Instruction::MeasureZ(circ.v_s.clone()));
    let program = GateProgram::new(circ.n, ins)?;
    let mut ordered = before;
    ordered.extend(free);
    ordered.extend(after);
    Ok((program, LayerAssignment { layers: ordered, exact }))
}
