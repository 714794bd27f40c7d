//! Structural perturbations: the evasion variant of DICE (delete internally,
//! connect externally) and a label-blind random attack.
//!
//! Both spend `round(ratio * |E|)` unit operations. Each unit flips a fair
//! coin between removing an existing edge and adding an absent one; if the
//! chosen move is unavailable the other is used. Pairs with both endpoints in
//! the protected set are never touched.

use std::collections::{HashMap, HashSet};
use std::fmt::Write as _;
use std::path::Path;

use log::warn;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{self, Graph, LabelAssignment};

const REJECTION_CAP: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AttackKind {
    DiceEvasion,
    Random,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttackSpec {
    pub kind: AttackKind,
    /// Budget relative to the clean undirected edge count; may exceed 1.
    pub perturb_ratio: f64,
    /// Nodes whose induced subgraph must stay unchanged.
    #[serde(default)]
    pub protected: Vec<usize>,
    pub seed: u64,
}

impl AttackSpec {
    pub fn new(kind: AttackKind, perturb_ratio: f64, seed: u64) -> Self {
        AttackSpec {
            kind,
            perturb_ratio,
            protected: Vec::new(),
            seed,
        }
    }

    pub fn with_protected(mut self, protected: Vec<usize>) -> Self {
        self.protected = protected;
        self
    }

    pub fn budget(&self, num_edges: usize) -> Result<usize> {
        if !(self.perturb_ratio >= 0.0) || !self.perturb_ratio.is_finite() {
            return Err(Error::invalid(format!(
                "perturb ratio must be a finite non-negative number, got {}",
                self.perturb_ratio
            )));
        }
        Ok((self.perturb_ratio * num_edges as f64).round() as usize)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EdgeOp {
    Add,
    Remove,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Perturbation {
    pub op: EdgeOp,
    pub u: usize,
    pub v: usize,
}

/// Ordered record of an attack. Under DICE every removal is intra-class and
/// every addition inter-class.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PerturbationLedger {
    pub operations: Vec<Perturbation>,
    pub removals: usize,
    pub additions: usize,
    /// Set when both move types ran out before the budget was spent.
    pub exhausted: bool,
}

impl PerturbationLedger {
    fn push(&mut self, op: EdgeOp, u: usize, v: usize) {
        match op {
            EdgeOp::Add => self.additions += 1,
            EdgeOp::Remove => self.removals += 1,
        }
        self.operations.push(Perturbation { op, u, v });
    }

    pub fn len(&self) -> usize {
        self.operations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.operations.is_empty()
    }

    /// Applies the recorded operations to the clean graph.
    pub fn replay(&self, clean: &Graph) -> Result<Graph> {
        let n = clean.num_nodes();
        let mut edges: HashSet<(usize, usize)> = clean.edges().collect();
        for (line, p) in self.operations.iter().enumerate() {
            if p.u >= n || p.v >= n || p.u == p.v {
                return Err(Error::invalid(format!(
                    "ledger entry {line} ({}, {}) is not a valid pair",
                    p.u, p.v
                )));
            }
            let key = ordered(p.u, p.v);
            let applied = match p.op {
                EdgeOp::Add => edges.insert(key),
                EdgeOp::Remove => edges.remove(&key),
            };
            if !applied {
                return Err(Error::invalid(format!(
                    "ledger entry {line} does not apply to the graph ({:?} {}, {})",
                    p.op, p.u, p.v
                )));
            }
        }
        let mut list: Vec<(usize, usize)> = edges.into_iter().collect();
        list.sort_unstable();
        Graph::from_edges(&list, n)
    }

    /// `op,u,v` rows.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("op,u,v\n");
        for p in &self.operations {
            let op = match p.op {
                EdgeOp::Add => "add",
                EdgeOp::Remove => "remove",
            };
            let _ = writeln!(out, "{op},{},{}", p.u, p.v);
        }
        out
    }

    pub fn from_csv(text: &str, path: &Path) -> Result<Self> {
        let mut ledger = PerturbationLedger::default();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || (idx == 0 && line.starts_with("op")) {
                continue;
            }
            let parse_err = |message: String| Error::Parse {
                path: path.to_path_buf(),
                line: idx + 1,
                message,
            };
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            if fields.len() != 3 {
                return Err(parse_err(format!(
                    "expected op,u,v but found {} fields",
                    fields.len()
                )));
            }
            let op = match fields[0] {
                "add" => EdgeOp::Add,
                "remove" => EdgeOp::Remove,
                other => return Err(parse_err(format!("unknown op {other:?}"))),
            };
            let u = fields[1]
                .parse()
                .map_err(|e| parse_err(format!("bad node id: {e}")))?;
            let v = fields[2]
                .parse()
                .map_err(|e| parse_err(format!("bad node id: {e}")))?;
            ledger.push(op, u, v);
        }
        Ok(ledger)
    }
}

fn ordered(u: usize, v: usize) -> (usize, usize) {
    if u < v {
        (u, v)
    } else {
        (v, u)
    }
}

/// Edge set with an indexable pool of removable edges.
struct AttackState {
    n: usize,
    edges: HashSet<(usize, usize)>,
    protected: Vec<bool>,
    removable: Vec<(usize, usize)>,
    slot: HashMap<(usize, usize), usize>,
}

impl AttackState {
    fn new(graph: &Graph, protected: &[usize]) -> Result<Self> {
        let n = graph.num_nodes();
        let mut mask = vec![false; n];
        for &p in protected {
            if p >= n {
                return Err(Error::invalid(format!(
                    "protected node {p} is outside 0..{n}"
                )));
            }
            mask[p] = true;
        }
        Ok(AttackState {
            n,
            edges: graph.edges().collect(),
            protected: mask,
            removable: Vec::new(),
            slot: HashMap::new(),
        })
    }

    fn touchable(&self, u: usize, v: usize) -> bool {
        !(self.protected[u] && self.protected[v])
    }

    fn add_removable(&mut self, e: (usize, usize)) {
        self.slot.insert(e, self.removable.len());
        self.removable.push(e);
    }

    fn take_removable(&mut self, rng: &mut ChaCha8Rng) -> Option<(usize, usize)> {
        if self.removable.is_empty() {
            return None;
        }
        let idx = rng.gen_range(0..self.removable.len());
        let e = self.removable.swap_remove(idx);
        self.slot.remove(&e);
        if let Some(&moved) = self.removable.get(idx) {
            self.slot.insert(moved, idx);
        }
        self.edges.remove(&e);
        Some(e)
    }

    /// Uniform absent pair accepted by `eligible`, by rejection sampling and
    /// then exhaustive enumeration.
    fn sample_absent<F>(&self, rng: &mut ChaCha8Rng, eligible: F) -> Option<(usize, usize)>
    where
        F: Fn(usize, usize) -> bool,
    {
        if self.n < 2 {
            return None;
        }
        let ok = |u: usize, v: usize| {
            u != v && self.touchable(u, v) && !self.edges.contains(&ordered(u, v)) && eligible(u, v)
        };
        for _ in 0..REJECTION_CAP {
            let u = rng.gen_range(0..self.n);
            let v = rng.gen_range(0..self.n);
            if ok(u, v) {
                return Some(ordered(u, v));
            }
        }
        let candidates: Vec<(usize, usize)> = (0..self.n)
            .flat_map(|u| ((u + 1)..self.n).map(move |v| (u, v)))
            .filter(|&(u, v)| ok(u, v))
            .collect();
        if candidates.is_empty() {
            None
        } else {
            Some(candidates[rng.gen_range(0..candidates.len())])
        }
    }

    fn into_graph(self) -> Result<Graph> {
        let mut list: Vec<(usize, usize)> = self.edges.into_iter().collect();
        list.sort_unstable();
        Graph::from_edges(&list, self.n)
    }
}

/// Moves the attacker can still make this unit.
#[derive(Clone, Copy)]
enum Move {
    Remove,
    Add,
}

fn run_attack<F, G>(
    state: &mut AttackState,
    budget: usize,
    rng: &mut ChaCha8Rng,
    add_eligible: F,
    mut on_add: G,
) -> PerturbationLedger
where
    F: Fn(usize, usize) -> bool,
    G: FnMut(&mut AttackState, (usize, usize)),
{
    let mut ledger = PerturbationLedger::default();
    let mut additions_exhausted = false;
    for _ in 0..budget {
        let first = if rng.gen_bool(0.5) {
            Move::Remove
        } else {
            Move::Add
        };
        let second = match first {
            Move::Remove => Move::Add,
            Move::Add => Move::Remove,
        };
        let mut done = false;
        for mv in [first, second] {
            match mv {
                Move::Remove => {
                    if let Some((u, v)) = state.take_removable(rng) {
                        ledger.push(EdgeOp::Remove, u, v);
                        additions_exhausted = false;
                        done = true;
                    }
                }
                Move::Add => {
                    if additions_exhausted {
                        continue;
                    }
                    match state.sample_absent(rng, &add_eligible) {
                        Some(e) => {
                            state.edges.insert(e);
                            on_add(state, e);
                            ledger.push(EdgeOp::Add, e.0, e.1);
                            done = true;
                        }
                        None => additions_exhausted = true,
                    }
                }
            }
            if done {
                break;
            }
        }
        if !done {
            ledger.exhausted = true;
            break;
        }
    }
    ledger
}

/// Evasion DICE: removes random intra-class edges and adds random
/// inter-class edges using the true labels.
pub fn dice_evasion(
    graph: &Graph,
    labels: &LabelAssignment,
    spec: &AttackSpec,
) -> Result<(Graph, PerturbationLedger)> {
    if spec.kind != AttackKind::DiceEvasion {
        return Err(Error::invalid(
            "dice_evasion requires an AttackKind::DiceEvasion spec",
        ));
    }
    graph::check_label_cover(graph, labels)?;
    let budget = spec.budget(graph.num_edges())?;
    let mut state = AttackState::new(graph, &spec.protected)?;
    for (u, v) in graph.edges() {
        if labels.class_of(u) == labels.class_of(v) && state.touchable(u, v) {
            state.add_removable((u, v));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let ledger = run_attack(
        &mut state,
        budget,
        &mut rng,
        |u, v| labels.class_of(u) != labels.class_of(v),
        |_, _| {},
    );
    if ledger.exhausted {
        warn!(
            "DICE ran out of moves after {} of {} operations",
            ledger.len(),
            budget
        );
    }
    Ok((state.into_graph()?, ledger))
}

/// Label-blind attack: deletes random edges and adds random absent pairs
/// with equal probability.
pub fn random_attack(graph: &Graph, spec: &AttackSpec) -> Result<(Graph, PerturbationLedger)> {
    if spec.kind != AttackKind::Random {
        return Err(Error::invalid(
            "random_attack requires an AttackKind::Random spec",
        ));
    }
    let budget = spec.budget(graph.num_edges())?;
    let mut state = AttackState::new(graph, &spec.protected)?;
    for (u, v) in graph.edges() {
        if state.touchable(u, v) {
            state.add_removable((u, v));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let ledger = run_attack(
        &mut state,
        budget,
        &mut rng,
        |_, _| true,
        |s, e| s.add_removable(e),
    );
    if ledger.exhausted {
        warn!(
            "random attack ran out of moves after {} of {} operations",
            ledger.len(),
            budget
        );
    }
    Ok((state.into_graph()?, ledger))
}

/// Dispatches on `spec.kind`.
pub fn attack(
    graph: &Graph,
    labels: &LabelAssignment,
    spec: &AttackSpec,
) -> Result<(Graph, PerturbationLedger)> {
    match spec.kind {
        AttackKind::DiceEvasion => dice_evasion(graph, labels, spec),
        AttackKind::Random => random_attack(graph, spec),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::edge_homophily;
    use crate::synth::{generate_csbm, CsbmParams};

    fn induced(graph: &Graph, nodes: &[usize]) -> Vec<(usize, usize)> {
        let set: HashSet<usize> = nodes.iter().copied().collect();
        graph
            .edges()
            .filter(|(u, v)| set.contains(u) && set.contains(v))
            .collect()
    }

    #[test]
    fn zero_ratio_is_identity() {
        let p = CsbmParams::new(100, 5, 5.0, 0.5).unwrap();
        let d = generate_csbm(&p, 1).unwrap();
        let (g, ledger) = dice_evasion(
            &d.graph,
            &d.labels,
            &AttackSpec::new(AttackKind::DiceEvasion, 0.0, 3),
        )
        .unwrap();
        assert_eq!(g, d.graph);
        assert!(ledger.is_empty());
        let (g, ledger) =
            random_attack(&d.graph, &AttackSpec::new(AttackKind::Random, 0.0, 3)).unwrap();
        assert_eq!(g, d.graph);
        assert!(ledger.is_empty() && !ledger.exhausted);
    }

    #[test]
    fn complete_bipartite_exhausts() {
        let mut edges = Vec::new();
        for u in 0..3 {
            for v in 3..6 {
                edges.push((u, v));
            }
        }
        let g = Graph::from_edges(&edges, 6).unwrap();
        let labels = LabelAssignment::new(vec![0, 0, 0, 1, 1, 1], 2).unwrap();
        let (out, ledger) = dice_evasion(
            &g,
            &labels,
            &AttackSpec::new(AttackKind::DiceEvasion, 1.0, 0),
        )
        .unwrap();
        assert!(ledger.exhausted);
        assert!(ledger.is_empty());
        assert_eq!(out, g);
    }

    #[test]
    fn dice_moves_have_the_right_class_pattern() {
        let p = CsbmParams::new(300, 5, 5.0, 0.75).unwrap();
        let d = generate_csbm(&p, 2).unwrap();
        let spec = AttackSpec::new(AttackKind::DiceEvasion, 0.8, 4);
        let (attacked, ledger) = dice_evasion(&d.graph, &d.labels, &spec).unwrap();
        assert_eq!(ledger.len(), spec.budget(d.graph.num_edges()).unwrap());
        for op in &ledger.operations {
            let same = d.labels.class_of(op.u) == d.labels.class_of(op.v);
            match op.op {
                EdgeOp::Remove => assert!(same),
                EdgeOp::Add => assert!(!same),
            }
        }
        assert_eq!(ledger.removals + ledger.additions, ledger.len());
        assert_eq!(ledger.replay(&d.graph).unwrap(), attacked);
        assert!(
            edge_homophily(&attacked, &d.labels).unwrap()
                < edge_homophily(&d.graph, &d.labels).unwrap()
        );
    }

    #[test]
    fn protected_subgraph_untouched() {
        let p = CsbmParams::new(200, 5, 6.0, 0.75).unwrap();
        let d = generate_csbm(&p, 8).unwrap();
        let protected: Vec<usize> = (0..60).collect();
        for kind in [AttackKind::DiceEvasion, AttackKind::Random] {
            let spec = AttackSpec::new(kind, 1.5, 5).with_protected(protected.clone());
            let (attacked, ledger) = attack(&d.graph, &d.labels, &spec).unwrap();
            assert_eq!(
                induced(&attacked, &protected),
                induced(&d.graph, &protected)
            );
            assert!(ledger.operations.iter().all(|p| p.u >= 60 || p.v >= 60));
        }
    }

    #[test]
    fn random_attack_budget_and_replay() {
        let p = CsbmParams::new(600, 5, 5.0, 0.75).unwrap();
        let d = generate_csbm(&p, 3).unwrap();
        let spec = AttackSpec::new(AttackKind::Random, 0.2, 9);
        let budget = spec.budget(d.graph.num_edges()).unwrap();
        let (attacked, ledger) = random_attack(&d.graph, &spec).unwrap();
        let change = attacked.num_edges().abs_diff(d.graph.num_edges());
        assert!(change <= budget);
        assert_eq!(ledger.len(), budget);
        assert_eq!(ledger.replay(&d.graph).unwrap(), attacked);
        let again = random_attack(&d.graph, &spec).unwrap();
        assert_eq!(again.0, attacked);
        assert_eq!(again.1, ledger);
    }

    #[test]
    fn kind_mismatch_rejected() {
        let g = Graph::from_edges(&[(0, 1)], 2).unwrap();
        let l = LabelAssignment::new(vec![0, 1], 2).unwrap();
        assert!(dice_evasion(&g, &l, &AttackSpec::new(AttackKind::Random, 0.1, 0)).is_err());
        assert!(random_attack(&g, &AttackSpec::new(AttackKind::DiceEvasion, 0.1, 0)).is_err());
        assert!(AttackSpec::new(AttackKind::Random, -1.0, 0)
            .budget(10)
            .is_err());
    }

    #[test]
    fn ledger_csv_round_trip() {
        let p = CsbmParams::new(80, 5, 4.0, 0.5).unwrap();
        let d = generate_csbm(&p, 1).unwrap();
        let (_, ledger) = dice_evasion(
            &d.graph,
            &d.labels,
            &AttackSpec::new(AttackKind::DiceEvasion, 0.5, 1),
        )
        .unwrap();
        let csv = ledger.to_csv();
        let parsed = PerturbationLedger::from_csv(&csv, Path::new("ledger.csv")).unwrap();
        assert_eq!(parsed.operations, ledger.operations);
        let err = PerturbationLedger::from_csv("op,u,v\nadd,1\n", Path::new("x.csv")).unwrap_err();
        assert!(err.to_string().contains("x.csv:2"));
    }

    #[test]
    fn ledger_rejects_inapplicable_ops() {
        let g = Graph::from_edges(&[(0, 1)], 3).unwrap();
        let ledger = PerturbationLedger {
            operations: vec![Perturbation {
                op: EdgeOp::Remove,
                u: 1,
                v: 2,
            }],
            removals: 1,
            additions: 0,
            exhausted: false,
        };
        assert!(ledger.replay(&g).is_err());
    }
}
