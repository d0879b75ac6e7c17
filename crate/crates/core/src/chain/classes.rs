use serde::{Deserialize, Serialize};

use super::ChainKernel;

/// A strongly connected class of the kernel's support digraph.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CommunicatingClass {
    /// Flat indices, ascending.
    pub members: Vec<usize>,
    /// No supported transition leaves the class.
    pub closed: bool,
}

/// Tarjan's algorithm with an explicit stack. Returns the component id of
/// every node; ids are in reverse topological order of the condensation.
pub(crate) fn scc_csr(offsets: &[usize], targets: &[usize]) -> (Vec<usize>, usize) {
    const UNVISITED: usize = usize::MAX;
    let n = offsets.len() - 1;
    let mut index = vec![UNVISITED; n];
    let mut low = vec![0usize; n];
    let mut on_stack = vec![false; n];
    let mut comp = vec![UNVISITED; n];
    let mut stack = Vec::new();
    let mut call: Vec<(usize, usize)> = Vec::new();
    let mut next_index = 0;
    let mut next_comp = 0;

    for root in 0..n {
        if index[root] != UNVISITED {
            continue;
        }
        call.push((root, offsets[root]));
        index[root] = next_index;
        low[root] = next_index;
        next_index += 1;
        stack.push(root);
        on_stack[root] = true;

        while let Some(top) = call.last_mut() {
            let v = top.0;
            if top.1 < offsets[v + 1] {
                let w = targets[top.1];
                top.1 += 1;
                if index[w] == UNVISITED {
                    index[w] = next_index;
                    low[w] = next_index;
                    next_index += 1;
                    stack.push(w);
                    on_stack[w] = true;
                    call.push((w, offsets[w]));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
                continue;
            }
            call.pop();
            if let Some(&(parent, _)) = call.last() {
                low[parent] = low[parent].min(low[v]);
            }
            if low[v] == index[v] {
                loop {
                    let w = stack.pop().expect("component root is on the stack");
                    on_stack[w] = false;
                    comp[w] = next_comp;
                    if w == v {
                        break;
                    }
                }
                next_comp += 1;
            }
        }
    }
    (comp, next_comp)
}

/// Communicating classes ordered by smallest member.
pub fn communicating_classes(kernel: &ChainKernel<'_>) -> Vec<CommunicatingClass> {
    let (comp, count) = scc_csr(&kernel.offsets, &kernel.targets);
    let mut members = vec![Vec::new(); count];
    for (v, &c) in comp.iter().enumerate() {
        members[c].push(v);
    }
    let mut closed = vec![true; count];
    for v in 0..kernel.num_states() {
        if kernel.support(v).iter().any(|&w| comp[w] != comp[v]) {
            closed[comp[v]] = false;
        }
    }
    let mut classes: Vec<CommunicatingClass> = members
        .into_iter()
        .zip(closed)
        .map(|(members, closed)| CommunicatingClass { members, closed })
        .collect();
    classes.sort_by_key(|c| c.members[0]);
    classes
}
