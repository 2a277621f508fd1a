use crate::code::{Builder, CodeAssignment, Input};
use crate::ff::{Elem, Field};
use crate::netgraph::{EdgeSet, Network, NodeId};

use super::{require_flow, CodegenError};

/// A node injecting a fixed combination on all of its out-edges.
#[derive(Debug, Clone)]
pub struct Emitter {
    pub node: NodeId,
    pub inputs: Vec<(Input, Elem)>,
}

fn support(v: &[Elem]) -> Vec<usize> {
    v.iter().enumerate().filter(|(_, x)| !x.is_zero()).map(|(i, _)| i).collect()
}

/// Greedy 0/1 encoding restricted to `mask`: emitters send their payload,
/// every other node combines, with coefficient 1, inputs whose supports are
/// disjoint, taking larger supports first. When every carried vector is a
/// union of payload blocks, the output support is the union of the input
/// supports.
pub fn greedy_encode(b: &mut Builder, mask: Option<&EdgeSet>, emitters: &[Emitter]) {
    let net = b.network();
    let one = b.field().one();
    let inside = |e: usize| mask.is_none_or(|m| m.contains(e));
    for &v in net.topo_order() {
        let outs: Vec<usize> = net.out_edges(v).iter().copied().filter(|&e| inside(e)).collect();
        if outs.is_empty() {
            continue;
        }
        let inputs = match emitters.iter().find(|em| em.node == v) {
            Some(em) => em.inputs.clone(),
            None => {
                let mut cands: Vec<(usize, Vec<usize>)> = net
                    .in_edges(v)
                    .iter()
                    .copied()
                    .filter(|&x| inside(x))
                    .map(|x| (x, support(b.beta(x))))
                    .filter(|(_, s)| !s.is_empty())
                    .collect();
                cands.sort_by(|a, b| b.1.len().cmp(&a.1.len()).then(a.0.cmp(&b.0)));
                let mut taken: Vec<usize> = Vec::new();
                let mut chosen = Vec::new();
                for (x, s) in cands {
                    if s.iter().all(|i| !taken.contains(i)) {
                        taken.extend(s);
                        chosen.push((Input::Edge(x), one));
                    }
                }
                chosen
            }
        };
        if inputs.is_empty() {
            continue;
        }
        for e in outs {
            b.assign(e, inputs.clone());
        }
    }
}

/// Greedy code for two sources and any number of terminals; every terminal
/// reached by both sources recovers `X1 + X2`.
pub fn assign_greedy_2s(net: &Network, field: &Field) -> Result<CodeAssignment, CodegenError> {
    if net.source_count() != 2 || net.terminal_count() == 0 {
        return Err(CodegenError::WrongShape {
            expected: "2 sources and at least one terminal",
            sources: net.source_count(),
            terminals: net.terminal_count(),
        });
    }
    require_flow(net, 1, false)?;
    let mut b = Builder::new(net, *field);
    let emitters: Vec<Emitter> = net
        .sources()
        .iter()
        .enumerate()
        .map(|(i, &s)| Emitter { node: s, inputs: vec![(Input::Source(i + 1), field.one())] })
        .collect();
    greedy_encode(&mut b, None, &emitters);
    Ok(b.finish())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netgraph::NetworkBuilder;
    use crate::verify::{check_sum_decodable, propagate};

    #[test]
    fn merge_at_terminal() {
        let mut b = NetworkBuilder::new();
        let s1 = b.source(1);
        let s2 = b.source(2);
        let t1 = b.terminal(1);
        b.chain(s1, t1, 1);
        b.chain(s2, t1, 1);
        let net = b.build().unwrap();
        let f = Field::gf3();
        let code = assign_greedy_2s(&net, &f).unwrap();
        let beta = propagate(&net, &code).unwrap();
        let into: Vec<_> = net.in_edges(t1).iter().map(|&e| beta[e].clone()).collect();
        assert_eq!(into, vec![f.unit(2, 0), f.unit(2, 1)]);
        assert!(check_sum_decodable(&net, &code).unwrap().all_decodable);
    }

    #[test]
    fn overlapping_inputs_take_union() {
        // v receives [1,0] and [1,1]; its output is [1,1]
        let mut b = NetworkBuilder::new();
        let s1 = b.source(1);
        let s2 = b.source(2);
        let m = b.internal("m");
        let v = b.internal("v");
        let t = b.terminal(1);
        b.edge(s1, m);
        b.edge(s2, m);
        b.edge(s1, v);
        b.edge(m, v);
        let out = b.edge(v, t);
        let net = b.build().unwrap();
        let f = Field::gf3();
        let code = assign_greedy_2s(&net, &f).unwrap();
        let beta = propagate(&net, &code).unwrap();
        assert_eq!(beta[out], f.ones(2));
    }

    #[test]
    fn disconnected_pair_is_named() {
        let mut b = NetworkBuilder::new();
        let s1 = b.source(1);
        let _s2 = b.source(2);
        let t = b.terminal(1);
        b.edge(s1, t);
        let net = b.build().unwrap();
        assert_eq!(
            assign_greedy_2s(&net, &Field::gf3()),
            Err(CodegenError::Connectivity { s: 2, t: 1, found: 0, needed: 1 })
        );
    }
}
