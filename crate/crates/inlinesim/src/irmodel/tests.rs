use super::*;
use crate::fixtures::{mutually_recursive_module, reference_module, single_site_module};

fn func(id: &str, linkage: Linkage, size: i64, savings: &[i64], sites: Vec<CallSite>) -> FunctionDef {
    FunctionDef {
        id: FunctionId::new(id),
        linkage,
        size,
        basic_block_count: 2,
        conditional_block_count: 1,
        param_savings: savings.to_vec(),
        call_sites: sites,
    }
}

fn site(id: &str, caller: &str, callee: &str, mask: &[bool]) -> CallSite {
    CallSite { id: id.into(), caller: caller.into(), callee: callee.into(), const_args: mask.to_vec() }
}

#[test]
fn module_size_sums_declared_sizes() {
    assert_eq!(reference_module().module_size(), 19);
    let empty = ModuleGraph::new("empty", vec![]).unwrap();
    assert_eq!(empty.module_size(), 0);
    // Reference module without the leaf: callees dangle, size still sums.
    let mut m = reference_module();
    let funcs: Vec<FunctionDef> = m
        .functions()
        .filter(|f| f.id.as_str() != "f_leaf")
        .cloned()
        .collect();
    m = ModuleGraph::new("ref_no_leaf", funcs).unwrap();
    assert_eq!(m.module_size(), 16);
}

#[test]
fn inline_shared_leaf_keeps_callee() {
    let mut m = reference_module();
    let out = m.inline(&"c3".into()).unwrap();
    assert_eq!(m.function(&"f_helper".into()).unwrap().size, 8);
    assert!(!out.callee_deleted);
    assert_eq!(out.step_reward, -2);
    assert!(out.cloned_call_sites.is_empty());
    assert_eq!(m.module_size(), 21);
    assert!(m.validate().is_empty());
}

#[test]
fn inline_last_user_deletes_internal_callee() {
    let mut m = reference_module();
    m.inline(&"c3".into()).unwrap();
    let out = m.inline(&"c1".into()).unwrap();
    let main = m.function(&"f_main".into()).unwrap();
    assert_eq!(main.size, 15);
    assert!(out.callee_deleted);
    assert_eq!(out.step_reward, 10 - 15 + 8);
    assert!(out.cloned_call_sites.is_empty());
    assert!(!m.contains_function(&"f_helper".into()));
    assert!(m.validate().is_empty());
}

#[test]
fn external_callee_is_never_deleted() {
    let mut m = ModuleGraph::new(
        "ext",
        vec![
            func("f_a", Linkage::External, 5, &[], vec![site("s", "f_a", "f_b", &[])]),
            func("f_b", Linkage::External, 3, &[], vec![]),
        ],
    )
    .unwrap();
    let out = m.inline(&"s".into()).unwrap();
    assert!(!out.callee_deleted);
    // No +S(callee) term: reward is just the caller delta.
    assert_eq!(out.step_reward, 5 - 7);
    assert!(m.contains_function(&"f_b".into()));
}

#[test]
fn inline_splices_clones_at_call_position() {
    let mut m = ModuleGraph::new(
        "clones",
        vec![
            func(
                "f_top",
                Linkage::External,
                10,
                &[],
                vec![
                    site("pre", "f_top", "f_leaf", &[]),
                    site("mid", "f_top", "f_mid", &[]),
                    site("post", "f_top", "f_leaf", &[]),
                ],
            ),
            func(
                "f_mid",
                Linkage::Internal,
                7,
                &[],
                vec![
                    site("m1", "f_mid", "f_leaf", &[true]),
                    site("m2", "f_mid", "f_leaf2", &[]),
                ],
            ),
            func("f_leaf", Linkage::External, 3, &[0], vec![]),
            func("f_leaf2", Linkage::External, 3, &[], vec![]),
        ],
    )
    .unwrap();
    let out = m.inline(&"mid".into()).unwrap();
    assert!(out.callee_deleted);
    assert_eq!(out.cloned_call_sites.len(), 2);
    let top = m.function(&"f_top".into()).unwrap();
    let order: Vec<&str> = top.call_sites.iter().map(|c| c.id.as_str()).collect();
    assert_eq!(order[0], "pre");
    assert_eq!(order[1], out.cloned_call_sites[0].as_str());
    assert_eq!(order[2], out.cloned_call_sites[1].as_str());
    assert_eq!(order[3], "post");
    // Clones keep callee targets and const masks, in the callee's order.
    assert_eq!(top.call_sites[1].callee, "f_leaf".into());
    assert_eq!(top.call_sites[1].const_args, vec![true]);
    assert_eq!(top.call_sites[2].callee, "f_leaf2".into());
    assert!(m.validate().is_empty());
}

#[test]
fn inline_refuses_recursive_edges() {
    let mut m = mutually_recursive_module();
    match m.inline(&"e_ab".into()) {
        Err(ModelError::RecursionRefused(id)) => assert_eq!(id, "e_ab".into()),
        other => panic!("expected recursion-refused, got {other:?}"),
    }
}

#[test]
fn inline_unknown_site_fails() {
    let mut m = reference_module();
    assert!(matches!(m.inline(&"nope".into()), Err(ModelError::InvalidCallSite(_))));
    m.inline(&"c3".into()).unwrap();
    assert!(matches!(m.inline(&"c3".into()), Err(ModelError::InvalidCallSite(_))));
}

#[test]
fn delete_if_dead_respects_users_and_linkage() {
    let mut m = ModuleGraph::new(
        "dead",
        vec![
            func("f_int", Linkage::Internal, 4, &[], vec![]),
            func("f_ext", Linkage::External, 4, &[], vec![]),
            func("f_used", Linkage::Internal, 4, &[], vec![]),
            func("f_user", Linkage::External, 5, &[], vec![site("u", "f_user", "f_used", &[])]),
        ],
    )
    .unwrap();
    assert!(m.delete_if_dead(&"f_int".into()).unwrap());
    assert!(!m.delete_if_dead(&"f_ext".into()).unwrap());
    assert!(!m.delete_if_dead(&"f_used".into()).unwrap());
    assert!(matches!(
        m.delete_if_dead(&"f_missing".into()),
        Err(ModelError::UnknownFunction(_))
    ));
    assert_eq!(m.module_size(), 13);
    assert!(m.validate().is_empty());
}

#[test]
fn validate_reports_mask_and_size_violations() {
    assert!(reference_module().validate().is_empty());

    let m = ModuleGraph::new(
        "badmask",
        vec![
            func("f_a", Linkage::External, 5, &[], vec![site("s", "f_a", "f_b", &[true])]),
            func("f_b", Linkage::External, 3, &[], vec![]),
        ],
    )
    .unwrap();
    let v = m.validate();
    assert_eq!(v.len(), 1);
    assert!(matches!(v[0], Violation::MaskLengthMismatch { .. }));

    let m = ModuleGraph::new(
        "toosmall",
        vec![
            func(
                "f_a",
                Linkage::External,
                2,
                &[],
                vec![site("s", "f_a", "f_b", &[]), site("t", "f_a", "f_b", &[])],
            ),
            func("f_b", Linkage::External, 3, &[], vec![]),
        ],
    )
    .unwrap();
    let v = m.validate();
    assert_eq!(v.len(), 1);
    assert!(matches!(v[0], Violation::SizeTooSmall { .. }));
}

#[test]
fn reward_conservation_on_reference_sequences() {
    // Every maximal inline sequence conserves: sum of rewards equals the
    // total size reduction.
    for seq in [vec!["c3", "c1", "c2"], vec!["c1", "c2"], vec!["c2"]] {
        let mut m = reference_module();
        let before = m.module_size();
        let mut total = 0;
        for s in seq {
            total += m.inline(&s.into()).unwrap().step_reward;
        }
        assert_eq!(total, before - m.module_size());
        assert!(m.validate().is_empty());
    }
}

#[test]
fn user_counts_match_recomputation_after_ops() {
    let mut m = reference_module();
    m.inline(&"c3".into()).unwrap();
    m.inline(&"c1".into()).unwrap();
    let fresh = m.recompute_users();
    for f in m.functions() {
        assert_eq!(m.user_count(&f.id), fresh[&f.id]);
    }
}

#[test]
fn single_site_module_inline_drops_one_instruction() {
    let mut m = single_site_module();
    let before = m.module_size();
    let out = m.inline(&"s0".into()).unwrap();
    assert!(out.callee_deleted);
    assert_eq!(out.step_reward, 1);
    assert_eq!(m.module_size(), before - 1);
}

#[test]
fn duplicate_function_ids_are_rejected() {
    let r = ModuleGraph::new(
        "dup",
        vec![func("f", Linkage::External, 3, &[], vec![]), func("f", Linkage::External, 4, &[], vec![])],
    );
    assert!(matches!(r, Err(ModelError::DuplicateFunction(_))));
}

#[test]
fn condensation_orders_sccs_bottom_up() {
    let m = reference_module();
    let cond = m.initial_condensation();
    assert_eq!(cond.scc_count(), 3);
    // Reverse topological: the leaf's SCC strictly precedes its callers'.
    let leaf = cond.scc_of(&"f_leaf".into()).unwrap();
    let helper = cond.scc_of(&"f_helper".into()).unwrap();
    let main = cond.scc_of(&"f_main".into()).unwrap();
    assert!(leaf < helper && helper < main);

    let cycle = mutually_recursive_module();
    assert_eq!(cycle.initial_condensation().scc_count(), 1);
}
