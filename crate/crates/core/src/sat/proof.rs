//! Resolution proofs recorded by the solver, their checker, and the
//! proof-based core.

use std::fmt::Write as _;

use super::{Lit, Var};
use crate::error::{Error, Result};

/// Index of a node in a [`ProofLog`].
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeId(pub u32);

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ProofNode {
    /// An input clause, identified by its id in the solver.
    Leaf { clause: usize, lits: Vec<Lit> },
    /// Resolution of `left` and `right` on `pivot`.
    Resolvent { pivot: Var, left: NodeId, right: NodeId, lits: Vec<Lit> },
}

impl ProofNode {
    pub fn lits(&self) -> &[Lit] {
        match self {
            ProofNode::Leaf { lits, .. } | ProofNode::Resolvent { lits, .. } => lits,
        }
    }
}

/// Append-only resolution DAG. Once the empty clause is derived, `root`
/// points at it.
#[derive(Clone, Debug, Default)]
pub struct ProofLog {
    nodes: Vec<ProofNode>,
    root: Option<NodeId>,
}

fn normalize(mut lits: Vec<Lit>) -> Vec<Lit> {
    lits.sort_unstable();
    lits.dedup();
    lits
}

/// Resolvent of two clauses on `pivot`, or `None` if the pivot does not
/// occur with opposite signs.
pub fn resolve(a: &[Lit], b: &[Lit], pivot: Var) -> Option<Vec<Lit>> {
    let pos = pivot.lit(true);
    let neg = pivot.lit(false);
    let ok = (a.contains(&pos) && b.contains(&neg)) || (a.contains(&neg) && b.contains(&pos));
    if !ok {
        return None;
    }
    Some(normalize(a.iter().chain(b).copied().filter(|l| l.var() != pivot).collect()))
}

impl ProofLog {
    pub fn new() -> ProofLog {
        ProofLog::default()
    }

    pub fn nodes(&self) -> &[ProofNode] {
        &self.nodes
    }

    pub fn node(&self, id: NodeId) -> &ProofNode {
        &self.nodes[id.0 as usize]
    }

    pub fn root(&self) -> Option<NodeId> {
        self.root
    }

    pub fn set_root(&mut self, id: NodeId) {
        self.root = Some(id);
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn add_leaf(&mut self, clause: usize, lits: &[Lit]) -> NodeId {
        self.nodes.push(ProofNode::Leaf { clause, lits: normalize(lits.to_vec()) });
        NodeId(self.nodes.len() as u32 - 1)
    }

    /// Records `left ⊗ right` on `pivot`. Panics if the step is not a valid
    /// resolution; callers only resolve on reason literals.
    pub fn add_resolvent(&mut self, left: NodeId, right: NodeId, pivot: Var) -> NodeId {
        let lits = resolve(self.node(left).lits(), self.node(right).lits(), pivot)
            .expect("resolution pivot must occur with opposite signs");
        self.nodes.push(ProofNode::Resolvent { pivot, left, right, lits });
        NodeId(self.nodes.len() as u32 - 1)
    }

    /// Pushes a raw node without checking it.
    pub fn push_unchecked(&mut self, node: ProofNode) -> NodeId {
        self.nodes.push(node);
        NodeId(self.nodes.len() as u32 - 1)
    }

    /// Nodes reachable from the root, in increasing index order.
    fn reachable(&self) -> Result<Vec<bool>> {
        let root = self.root.ok_or(Error::Proof { node: self.nodes.len(), msg: "no empty clause derived".into() })?;
        let mut mark = vec![false; self.nodes.len()];
        let mut stack = vec![root];
        while let Some(n) = stack.pop() {
            let i = n.0 as usize;
            if i >= self.nodes.len() {
                return Err(Error::Proof { node: i, msg: "dangling node reference".into() });
            }
            if mark[i] {
                continue;
            }
            mark[i] = true;
            if let ProofNode::Resolvent { left, right, .. } = &self.nodes[i] {
                if left.0 >= n.0 || right.0 >= n.0 {
                    return Err(Error::Proof { node: i, msg: "premise does not precede resolvent".into() });
                }
                stack.push(*left);
                stack.push(*right);
            }
        }
        Ok(mark)
    }

    /// Checks every resolvent reachable from the root and that the root is
    /// the empty clause.
    pub fn validate(&self) -> Result<()> {
        let mark = self.reachable()?;
        for (i, node) in self.nodes.iter().enumerate() {
            if !mark[i] {
                continue;
            }
            if let ProofNode::Resolvent { pivot, left, right, lits } = node {
                match resolve(self.node(*left).lits(), self.node(*right).lits(), *pivot) {
                    None => {
                        return Err(Error::Proof {
                            node: i,
                            msg: format!("pivot {} does not clash in the premises", pivot.0 + 1),
                        })
                    }
                    Some(r) if r != *lits => {
                        return Err(Error::Proof { node: i, msg: "stored clause is not the resolvent".into() })
                    }
                    Some(_) => {}
                }
            }
        }
        let root = self.root.expect("checked by reachable");
        if !self.node(root).lits().is_empty() {
            return Err(Error::Proof { node: root.0 as usize, msg: "root clause is not empty".into() });
        }
        Ok(())
    }

    /// Writes the proof as a text trace: `L <clause>` for leaves and
    /// `R <pivot> <left> <right>` for resolvents, one node per line, nodes
    /// referenced by line number from 0.
    pub fn to_trace(&self) -> String {
        let mut out = String::new();
        for node in &self.nodes {
            match node {
                ProofNode::Leaf { clause, .. } => writeln!(out, "L {clause}"),
                ProofNode::Resolvent { pivot, left, right, .. } => {
                    writeln!(out, "R {} {} {}", pivot.0 + 1, left.0, right.0)
                }
            }
            .expect("writing to a String");
        }
        if let Some(r) = self.root {
            writeln!(out, "E {}", r.0).expect("writing to a String");
        }
        out
    }

    /// Rebuilds a proof from a trace, recomputing the resolvents from the
    /// given input clauses. Invalid steps are kept as-is so that
    /// [`check_proof`] can report them.
    pub fn from_trace(text: &str, inputs: &[Vec<Lit>]) -> Result<ProofLog> {
        let mut log = ProofLog::new();
        for (ln, line) in text.lines().enumerate() {
            let bad = |msg: &str| Error::Proof { node: ln, msg: msg.to_string() };
            let mut it = line.split_whitespace();
            let num = |s: Option<&str>| -> Result<u32> {
                s.and_then(|s| s.parse().ok()).ok_or_else(|| bad("expected a number"))
            };
            match it.next() {
                None => continue,
                Some("L") => {
                    let c = num(it.next())? as usize;
                    let lits = inputs.get(c).ok_or_else(|| bad("leaf clause out of range"))?;
                    log.add_leaf(c, lits);
                }
                Some("R") => {
                    let pivot = Var(num(it.next())?.checked_sub(1).ok_or_else(|| bad("pivot 0"))?);
                    let (l, r) = (num(it.next())?, num(it.next())?);
                    if l as usize >= log.len() || r as usize >= log.len() {
                        return Err(bad("forward reference"));
                    }
                    let lits = resolve(log.node(NodeId(l)).lits(), log.node(NodeId(r)).lits(), pivot)
                        .unwrap_or_default();
                    log.push_unchecked(ProofNode::Resolvent { pivot, left: NodeId(l), right: NodeId(r), lits });
                }
                Some("E") => log.root = Some(NodeId(num(it.next())?)),
                Some(_) => return Err(bad("unknown node kind")),
            }
        }
        Ok(log)
    }
}

/// Verifies that `proof` derives the empty clause from `inputs`: every
/// reachable resolvent is a correct resolution step and every reachable leaf
/// is the input clause it names.
pub fn check_proof(proof: &ProofLog, inputs: &[Vec<Lit>]) -> Result<()> {
    proof.validate()?;
    let mark = proof.reachable()?;
    for (i, node) in proof.nodes().iter().enumerate() {
        if let (true, ProofNode::Leaf { clause, lits }) = (mark[i], node) {
            match inputs.get(*clause) {
                None => return Err(Error::Proof { node: i, msg: format!("leaf names unknown clause {clause}") }),
                Some(c) if normalize(c.clone()) != *lits => {
                    return Err(Error::Proof { node: i, msg: format!("leaf does not match input clause {clause}") })
                }
                Some(_) => {}
            }
        }
    }
    Ok(())
}

/// Ids of the distinct leaf clauses reachable from the root, ascending.
pub fn proof_core(proof: &ProofLog) -> Result<Vec<usize>> {
    proof.validate()?;
    let mark = proof.reachable()?;
    let mut out: Vec<usize> = proof
        .nodes()
        .iter()
        .enumerate()
        .filter_map(|(i, n)| match n {
            ProofNode::Leaf { clause, .. } if mark[i] => Some(*clause),
            _ => None,
        })
        .collect();
    out.sort_unstable();
    out.dedup();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(xs: &[i32]) -> Vec<Lit> {
        xs.iter().map(|&x| Lit::from_dimacs(x)).collect()
    }

    #[test]
    fn hand_built_chain_checks() {
        // (1), (-1 2), (-2): resolve to (2), then to ().
        let inputs = vec![c(&[1]), c(&[-1, 2]), c(&[-2])];
        let mut p = ProofLog::new();
        let a = p.add_leaf(0, &inputs[0]);
        let b = p.add_leaf(1, &inputs[1]);
        let d = p.add_leaf(2, &inputs[2]);
        let ab = p.add_resolvent(a, b, Var(0));
        assert_eq!(p.node(ab).lits(), &c(&[2])[..]);
        let e = p.add_resolvent(ab, d, Var(1));
        p.set_root(e);
        check_proof(&p, &inputs).unwrap();
        assert_eq!(proof_core(&p).unwrap(), vec![0, 1, 2]);
    }

    #[test]
    fn corrupted_pivot_is_reported_at_its_node() {
        let inputs = vec![c(&[1]), c(&[-1])];
        let mut p = ProofLog::new();
        let a = p.add_leaf(0, &inputs[0]);
        let b = p.add_leaf(1, &inputs[1]);
        let r = p.push_unchecked(ProofNode::Resolvent { pivot: Var(5), left: a, right: b, lits: vec![] });
        p.set_root(r);
        match check_proof(&p, &inputs) {
            Err(Error::Proof { node, .. }) => assert_eq!(node, 2),
            other => panic!("expected violation, got {other:?}"),
        }
    }

    #[test]
    fn leaf_mismatch_is_a_violation() {
        let inputs = vec![c(&[1]), c(&[-1])];
        let mut p = ProofLog::new();
        let a = p.add_leaf(0, &c(&[1]));
        let b = p.add_leaf(1, &c(&[-1]));
        let r = p.add_resolvent(a, b, Var(0));
        p.set_root(r);
        check_proof(&p, &inputs).unwrap();
        assert!(check_proof(&p, &[c(&[1]), c(&[-1, 2])]).is_err());
    }

    #[test]
    fn missing_root_is_malformed() {
        let mut p = ProofLog::new();
        p.add_leaf(0, &c(&[1]));
        assert!(proof_core(&p).is_err());
    }

    #[test]
    fn trace_round_trip() {
        let inputs = vec![c(&[1, 2]), c(&[-1]), c(&[-2])];
        let mut p = ProofLog::new();
        let a = p.add_leaf(0, &inputs[0]);
        let b = p.add_leaf(1, &inputs[1]);
        let d = p.add_leaf(2, &inputs[2]);
        let ab = p.add_resolvent(a, b, Var(0));
        let e = p.add_resolvent(ab, d, Var(1));
        p.set_root(e);
        let text = p.to_trace();
        assert_eq!(text, "L 0\nL 1\nL 2\nR 1 0 1\nR 2 3 2\nE 4\n");
        let q = ProofLog::from_trace(&text, &inputs).unwrap();
        check_proof(&q, &inputs).unwrap();
        let broken = text.replace("R 2 3 2", "R 1 3 2");
        let q = ProofLog::from_trace(&broken, &inputs).unwrap();
        assert!(check_proof(&q, &inputs).is_err());
    }
}
