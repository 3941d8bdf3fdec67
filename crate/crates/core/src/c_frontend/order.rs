//! Dependency graph over fragments and the translation-order computation:
//! repeatedly emit every fragment whose dependencies are processed; when an
//! entire sweep emits nothing, fuse one ready strongly-connected component
//! into a single group (or fail in strict mode).

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::fragments::CodeFragment;
use super::FrontendError;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DependencyGraph {
    /// Node names in declaration order; the tie-break basis for ordering.
    pub nodes: Vec<String>,
    pub edges: BTreeMap<String, BTreeSet<String>>,
}

impl DependencyGraph {
    pub fn node_set(&self) -> BTreeSet<&str> {
        self.nodes.iter().map(|s| s.as_str()).collect()
    }
}

/// Builds the graph from fragments. Edges are restricted to names in the
/// fragment set; library symbols stay on the fragments as context.
pub fn build_graph(fragments: &[CodeFragment]) -> Result<DependencyGraph, FrontendError> {
    let mut nodes = Vec::new();
    let mut seen = BTreeSet::new();
    for f in fragments {
        if !seen.insert(f.name.clone()) {
            return Err(FrontendError::DuplicateName { name: f.name.clone() });
        }
        nodes.push(f.name.clone());
    }
    let mut edges = BTreeMap::new();
    for f in fragments {
        let deps: BTreeSet<String> =
            f.deps.iter().filter(|d| seen.contains(*d)).cloned().collect();
        edges.insert(f.name.clone(), deps);
    }
    Ok(DependencyGraph { nodes, edges })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TranslationPlan {
    /// Groups in translation order; a group of size > 1 is a fused
    /// circular-dependency cluster translated as one unit.
    pub groups: Vec<Vec<String>>,
}

impl TranslationPlan {
    pub fn flattened(&self) -> Vec<&str> {
        self.groups.iter().flatten().map(|s| s.as_str()).collect()
    }

    /// Compact rendering like `[[atoi],[main]]`.
    pub fn render(&self) -> String {
        let groups: Vec<String> =
            self.groups.iter().map(|g| format!("[{}]", g.join(","))).collect();
        format!("[{}]", groups.join(","))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CyclePolicy {
    /// Fuse cycles into one group via SCC detection.
    Fuse,
    /// Treat any cycle as a hard error.
    Strict,
}

pub fn compute_translation_order(
    graph: &DependencyGraph,
    policy: CyclePolicy,
) -> Result<TranslationPlan, FrontendError> {
    let index: BTreeMap<&str, usize> =
        graph.nodes.iter().enumerate().map(|(i, n)| (n.as_str(), i)).collect();
    let mut processed: BTreeSet<&str> = BTreeSet::new();
    let mut groups: Vec<Vec<String>> = Vec::new();
    while processed.len() < graph.nodes.len() {
        let mut emitted = false;
        for name in &graph.nodes {
            if processed.contains(name.as_str()) {
                continue;
            }
            let ready = graph.edges[name]
                .iter()
                // A self-edge is recursion, not a cycle.
                .filter(|d| d.as_str() != name)
                .all(|d| processed.contains(d.as_str()));
            if ready {
                processed.insert(name.as_str());
                groups.push(vec![name.clone()]);
                emitted = true;
            }
        }
        if !emitted {
            let remaining: Vec<&str> = graph
                .nodes
                .iter()
                .map(|s| s.as_str())
                .filter(|n| !processed.contains(*n))
                .collect();
            let sccs = strongly_connected(&remaining, &graph.edges);
            let fused = sccs
                .into_iter()
                .filter(|scc| scc.len() > 1)
                // Ready to fuse: every dependency outside the component is
                // already processed.
                .filter(|scc| {
                    scc.iter().all(|n| {
                        graph.edges[*n]
                            .iter()
                            .all(|d| scc.contains(&d.as_str()) || processed.contains(d.as_str()))
                    })
                })
                .min_by_key(|scc| scc.iter().map(|n| index[*n]).min().unwrap_or(usize::MAX))
                .expect("a stalled sweep implies a ready multi-node SCC");
            let mut members: Vec<String> = fused.iter().map(|s| s.to_string()).collect();
            members.sort_by_key(|n| index[n.as_str()]);
            if policy == CyclePolicy::Strict {
                return Err(FrontendError::CircularDependency { members });
            }
            for m in &fused {
                processed.insert(m);
            }
            groups.push(members);
        }
    }
    Ok(TranslationPlan { groups })
}

/// Tarjan's algorithm over the induced subgraph on `nodes`.
fn strongly_connected<'a>(
    nodes: &[&'a str],
    edges: &'a BTreeMap<String, BTreeSet<String>>,
) -> Vec<Vec<&'a str>> {
    struct State<'a> {
        index_of: BTreeMap<&'a str, usize>,
        lowlink: BTreeMap<&'a str, usize>,
        on_stack: BTreeSet<&'a str>,
        stack: Vec<&'a str>,
        counter: usize,
        result: Vec<Vec<&'a str>>,
    }
    fn visit<'a>(
        v: &'a str,
        nodes: &BTreeSet<&'a str>,
        edges: &'a BTreeMap<String, BTreeSet<String>>,
        st: &mut State<'a>,
    ) {
        let idx = st.counter;
        st.counter += 1;
        st.index_of.insert(v, idx);
        st.lowlink.insert(v, idx);
        st.stack.push(v);
        st.on_stack.insert(v);
        if let Some(deps) = edges.get(v) {
            for d in deps {
                let d = d.as_str();
                if d == v || !nodes.contains(d) {
                    continue;
                }
                if !st.index_of.contains_key(d) {
                    visit(d, nodes, edges, st);
                    let low = st.lowlink[d].min(st.lowlink[v]);
                    st.lowlink.insert(v, low);
                } else if st.on_stack.contains(d) {
                    let low = st.index_of[d].min(st.lowlink[v]);
                    st.lowlink.insert(v, low);
                }
            }
        }
        if st.lowlink[v] == st.index_of[v] {
            let mut scc = Vec::new();
            while let Some(w) = st.stack.pop() {
                st.on_stack.remove(w);
                scc.push(w);
                if w == v {
                    break;
                }
            }
            st.result.push(scc);
        }
    }
    let node_set: BTreeSet<&str> = nodes.iter().copied().collect();
    let mut st = State {
        index_of: BTreeMap::new(),
        lowlink: BTreeMap::new(),
        on_stack: BTreeSet::new(),
        stack: Vec::new(),
        counter: 0,
        result: Vec::new(),
    };
    for n in nodes {
        if !st.index_of.contains_key(n) {
            visit(n, &node_set, edges, &mut st);
        }
    }
    st.result
}

#[cfg(test)]
mod tests {
    use super::*;

    fn graph(nodes: &[&str], edges: &[(&str, &str)]) -> DependencyGraph {
        let mut e: BTreeMap<String, BTreeSet<String>> =
            nodes.iter().map(|n| (n.to_string(), BTreeSet::new())).collect();
        for (from, to) in edges {
            e.get_mut(*from).unwrap().insert(to.to_string());
        }
        DependencyGraph { nodes: nodes.iter().map(|s| s.to_string()).collect(), edges: e }
    }

    #[test]
    fn atoi_before_main() {
        let g = graph(&["atoi", "main"], &[("main", "atoi")]);
        let plan = compute_translation_order(&g, CyclePolicy::Fuse).unwrap();
        assert_eq!(plan.groups, vec![vec!["atoi".to_string()], vec!["main".to_string()]]);
        assert_eq!(plan.render(), "[[atoi],[main]]");
    }

    #[test]
    fn empty_graph_empty_plan() {
        let g = graph(&[], &[]);
        let plan = compute_translation_order(&g, CyclePolicy::Fuse).unwrap();
        assert!(plan.groups.is_empty());
    }

    #[test]
    fn two_cycle_fuses_before_dependent() {
        let g = graph(&["a", "b", "c"], &[("a", "b"), ("b", "a"), ("c", "a")]);
        let plan = compute_translation_order(&g, CyclePolicy::Fuse).unwrap();
        assert_eq!(
            plan.groups,
            vec![vec!["a".to_string(), "b".to_string()], vec!["c".to_string()]]
        );
    }

    #[test]
    fn strict_mode_rejects_cycles() {
        let g = graph(&["a", "b"], &[("a", "b"), ("b", "a")]);
        match compute_translation_order(&g, CyclePolicy::Strict) {
            Err(FrontendError::CircularDependency { members }) => {
                assert_eq!(members, vec!["a".to_string(), "b".to_string()]);
            }
            other => panic!("expected CircularDependency, got {other:?}"),
        }
    }

    #[test]
    fn self_edges_are_not_cycles() {
        let g = graph(&["fact", "main"], &[("fact", "fact"), ("main", "fact")]);
        let plan = compute_translation_order(&g, CyclePolicy::Fuse).unwrap();
        assert_eq!(plan.groups, vec![vec!["fact".to_string()], vec!["main".to_string()]]);
        // Strict mode is also unaffected by self-recursion.
        assert!(compute_translation_order(&g, CyclePolicy::Strict).is_ok());
    }

    #[test]
    fn ready_cycle_fuses_before_downstream_cycle() {
        let g = graph(
            &["a", "b", "c", "d"],
            &[("a", "b"), ("b", "a"), ("c", "d"), ("d", "c"), ("c", "a")],
        );
        let plan = compute_translation_order(&g, CyclePolicy::Fuse).unwrap();
        assert_eq!(
            plan.groups,
            vec![
                vec!["a".to_string(), "b".to_string()],
                vec!["c".to_string(), "d".to_string()]
            ]
        );
    }

    #[test]
    fn ties_break_in_declaration_order() {
        let g = graph(&["z", "m", "a"], &[]);
        let plan = compute_translation_order(&g, CyclePolicy::Fuse).unwrap();
        assert_eq!(plan.flattened(), vec!["z", "m", "a"]);
    }
}
