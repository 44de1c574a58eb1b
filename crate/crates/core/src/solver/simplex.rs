//! Network-simplex backend.
//!
//! Works on the same lower-bound-eliminated supply problem as the
//! successive-shortest-paths solver: artificial big-M arcs to a root node
//! form the initial strongly feasible spanning tree, entering arcs are found
//! by block search on reduced costs, and the leaving arc is the last
//! blocking arc met when traversing the pivot cycle from its apex in the
//! augmentation direction, which keeps the tree strongly feasible.

use crate::network::{FlowNetwork, Value};

use super::{flow_from_residual_shipments, infeasible, prepare, Flow};

const LOWER: i8 = 0;
const TREE: i8 = 1;
const UPPER: i8 = 2;

const NO_NODE: usize = usize::MAX;
const NO_ARC: usize = usize::MAX;
const ART_CAP: Value = Value::MAX / 8;

struct Simplex {
    from: Vec<usize>,
    to: Vec<usize>,
    cap: Vec<Value>,
    cost: Vec<Value>,
    flow: Vec<Value>,
    state: Vec<i8>,
    parent: Vec<usize>,
    pred: Vec<usize>,
    depth: Vec<usize>,
    pi: Vec<Value>,
    root: usize,
}

/// Same contract as [`super::solve_min_cost_flow`], solved with the network
/// simplex method. The two backends must agree on total cost.
pub fn solve_with_network_simplex(net: &FlowNetwork) -> Flow {
    let work = match prepare(net) {
        Ok(w) => w,
        Err(unsatisfied) => return infeasible(net, unsatisfied),
    };
    let n = work.node_count;
    let root = n;
    let real_count = work.arcs.len();
    let arc_count = real_count + n;

    let mut sx = Simplex {
        from: vec![0; arc_count],
        to: vec![0; arc_count],
        cap: vec![0; arc_count],
        cost: vec![0; arc_count],
        flow: vec![0; arc_count],
        state: vec![LOWER; arc_count],
        parent: vec![NO_NODE; n + 1],
        pred: vec![NO_ARC; n + 1],
        depth: vec![0; n + 1],
        pi: vec![0; n + 1],
        root,
    };

    let mut cost_volume: Value = 0;
    for (i, a) in work.arcs.iter().enumerate() {
        sx.from[i] = a.from;
        sx.to[i] = a.to;
        sx.cap[i] = a.cap;
        sx.cost[i] = a.cost;
        cost_volume += a.cost.abs().saturating_mul(a.cap);
    }
    // Must dominate the cost of any feasible flow on real arcs.
    let big_m = cost_volume + 1;

    for v in 0..n {
        let a = real_count + v;
        let b = work.supplies[v];
        if b >= 0 {
            sx.from[a] = v;
            sx.to[a] = root;
            sx.flow[a] = b;
            sx.pi[v] = big_m;
        } else {
            sx.from[a] = root;
            sx.to[a] = v;
            sx.flow[a] = -b;
            sx.pi[v] = -big_m;
        }
        sx.cap[a] = ART_CAP;
        sx.cost[a] = big_m;
        sx.state[a] = TREE;
        sx.parent[v] = root;
        sx.pred[v] = a;
        sx.depth[v] = 1;
    }

    let block = ((arc_count as f64).sqrt().ceil() as usize).max(8);
    let mut scan = 0usize;
    let mut pivots: u64 = 0;
    loop {
        let mut entering = NO_ARC;
        let mut best: Value = 0;
        let mut examined = 0;
        while examined < arc_count {
            let stop = (examined + block).min(arc_count);
            while examined < stop {
                let a = scan;
                scan += 1;
                if scan == arc_count {
                    scan = 0;
                }
                examined += 1;
                let violation = match sx.state[a] {
                    s if s == LOWER => -sx.reduced(a),
                    s if s == UPPER => sx.reduced(a),
                    _ => 0,
                };
                if violation > best {
                    best = violation;
                    entering = a;
                }
            }
            if entering != NO_ARC {
                break;
            }
        }
        if entering == NO_ARC {
            break;
        }
        pivots += 1;
        if pivots > 10_000_000 {
            panic!("network simplex exceeded its pivot budget");
        }
        sx.pivot(entering);
    }

    let mut unsatisfied = Vec::new();
    for v in 0..n {
        if sx.flow[real_count + v] > 0 && work.supplies[v] > 0 {
            unsatisfied.push(net.nodes()[v]);
        }
    }
    if !unsatisfied.is_empty() || (0..n).any(|v| sx.flow[real_count + v] > 0) {
        return infeasible(net, unsatisfied);
    }

    let shipped: Vec<Value> = (0..net.edges().len()).map(|i| sx.flow[i]).collect();
    flow_from_residual_shipments(net, &shipped)
}

impl Simplex {
    fn reduced(&self, a: usize) -> Value {
        self.cost[a] - self.pi[self.from[a]] + self.pi[self.to[a]]
    }

    fn residual(&self, a: usize, along: bool) -> Value {
        if along {
            self.cap[a] - self.flow[a]
        } else {
            self.flow[a]
        }
    }

    fn pivot(&mut self, entering: usize) {
        let push_forward = self.state[entering] == LOWER;
        let (src, dst) = if push_forward {
            (self.from[entering], self.to[entering])
        } else {
            (self.to[entering], self.from[entering])
        };

        let apex = {
            let (mut x, mut y) = (src, dst);
            while self.depth[x] > self.depth[y] {
                x = self.parent[x];
            }
            while self.depth[y] > self.depth[x] {
                y = self.parent[y];
            }
            while x != y {
                x = self.parent[x];
                y = self.parent[y];
            }
            x
        };

        // Cycle arcs in traversal order starting at the apex:
        // apex down to src, the entering arc, dst up to apex. `along` marks
        // arcs whose flow grows under augmentation.
        let mut cycle: Vec<(usize, bool)> = Vec::new();
        let mut u = src;
        while u != apex {
            let a = self.pred[u];
            cycle.push((a, self.to[a] == u));
            u = self.parent[u];
        }
        cycle.reverse();
        cycle.push((entering, push_forward));
        let mut u = dst;
        while u != apex {
            let a = self.pred[u];
            cycle.push((a, self.from[a] == u));
            u = self.parent[u];
        }

        let mut delta = Value::MAX;
        let mut leave_idx = 0;
        for (idx, &(a, along)) in cycle.iter().enumerate() {
            let r = self.residual(a, along);
            // `<=` keeps the last blocking arc, maintaining strong
            // feasibility.
            if r <= delta {
                delta = r;
                leave_idx = idx;
            }
        }
        let (leaving, leaving_along) = cycle[leave_idx];

        if delta > 0 {
            for &(a, along) in &cycle {
                if along {
                    self.flow[a] += delta;
                } else {
                    self.flow[a] -= delta;
                }
            }
        }

        // The blocked arc sits at the bound it ran into; with zero capacity
        // the flow value alone cannot tell the two bounds apart.
        let blocked_state = |along: bool| if along { UPPER } else { LOWER };

        if leaving == entering {
            self.state[entering] = blocked_state(push_forward);
            return;
        }

        // Child-side endpoint of the leaving arc roots the cut subtree.
        let cut = if self.pred[self.from[leaving]] == leaving {
            self.from[leaving]
        } else {
            self.to[leaving]
        };
        debug_assert_eq!(self.pred[cut], leaving);

        let in_sub = self.subtree_mask(cut);
        debug_assert!(in_sub[self.from[entering]] != in_sub[self.to[entering]]);

        let rc = self.reduced(entering);
        let shift = if in_sub[self.to[entering]] { -rc } else { rc };
        for (pi, &inside) in self.pi.iter_mut().zip(&in_sub) {
            if inside {
                *pi += shift;
            }
        }

        // Re-hang the cut subtree from the entering arc, reversing parent
        // pointers along the path from the entering endpoint up to the cut.
        let q = if in_sub[self.from[entering]] {
            self.from[entering]
        } else {
            self.to[entering]
        };
        let p = if q == self.from[entering] {
            self.to[entering]
        } else {
            self.from[entering]
        };
        let mut hang_parent = p;
        let mut hang_arc = entering;
        let mut u = q;
        loop {
            let next = self.parent[u];
            let next_arc = self.pred[u];
            self.parent[u] = hang_parent;
            self.pred[u] = hang_arc;
            if u == cut {
                break;
            }
            hang_parent = u;
            hang_arc = next_arc;
            u = next;
        }

        self.state[entering] = TREE;
        self.state[leaving] = blocked_state(leaving_along);
        self.recompute_depths();
    }

    fn children_of(&self) -> Vec<Vec<usize>> {
        let len = self.parent.len();
        let mut children: Vec<Vec<usize>> = vec![Vec::new(); len];
        for v in 0..len {
            if self.parent[v] != NO_NODE {
                children[self.parent[v]].push(v);
            }
        }
        children
    }

    fn subtree_mask(&self, top: usize) -> Vec<bool> {
        let children = self.children_of();
        let mut mask = vec![false; self.parent.len()];
        let mut stack = vec![top];
        while let Some(v) = stack.pop() {
            if mask[v] {
                continue;
            }
            mask[v] = true;
            stack.extend(&children[v]);
        }
        mask
    }

    fn recompute_depths(&mut self) {
        let children = self.children_of();
        let mut stack = vec![self.root];
        self.depth[self.root] = 0;
        while let Some(v) = stack.pop() {
            for &c in &children[v] {
                self.depth[c] = self.depth[v] + 1;
                stack.push(c);
            }
        }
    }
}
