//! Tiny hand-built modules shared by tests and documentation examples.

use crate::irmodel::{CallSite, FunctionDef, FunctionId, Linkage, ModuleGraph};

fn func(
    id: &str,
    linkage: Linkage,
    size: i64,
    blocks: i64,
    cond: i64,
    savings: &[i64],
    sites: Vec<CallSite>,
) -> FunctionDef {
    FunctionDef {
        id: FunctionId::new(id),
        linkage,
        size,
        basic_block_count: blocks,
        conditional_block_count: cond,
        param_savings: savings.to_vec(),
        call_sites: sites,
    }
}

fn site(id: &str, caller: &str, callee: &str, mask: &[bool]) -> CallSite {
    CallSite {
        id: id.into(),
        caller: caller.into(),
        callee: callee.into(),
        const_args: mask.to_vec(),
    }
}

/// The three-function reference module: an external `f_main` calling an
/// internal helper (which benefits from constant arguments) and an internal
/// leaf shared by both. Exercises cloning, constant-argument savings and
/// callee deletion in a hand-traceable setting.
pub fn reference_module() -> ModuleGraph {
    ModuleGraph::new(
        "ref3",
        vec![
            func(
                "f_main",
                Linkage::External,
                10,
                3,
                1,
                &[],
                vec![
                    site("c1", "f_main", "f_helper", &[true, false]),
                    site("c2", "f_main", "f_leaf", &[]),
                ],
            ),
            func(
                "f_helper",
                Linkage::Internal,
                6,
                2,
                1,
                &[2, 1],
                vec![site("c3", "f_helper", "f_leaf", &[])],
            ),
            func("f_leaf", Linkage::Internal, 3, 1, 0, &[], vec![]),
        ],
    )
    .expect("reference module is well-formed")
}

/// One caller, one internal single-user callee, no savings: inlining removes
/// exactly the call instruction, so the optimal final size is `size - 1`.
pub fn single_site_module() -> ModuleGraph {
    ModuleGraph::new(
        "pair",
        vec![
            func(
                "f_outer",
                Linkage::External,
                5,
                2,
                1,
                &[],
                vec![site("s0", "f_outer", "f_inner", &[])],
            ),
            func("f_inner", Linkage::Internal, 4, 2, 0, &[], vec![]),
        ],
    )
    .expect("pair module is well-formed")
}

/// Two internal functions calling each other: a single non-trivial SCC with
/// no inlinable edges.
pub fn mutually_recursive_module() -> ModuleGraph {
    ModuleGraph::new(
        "cycle",
        vec![
            func(
                "f_a",
                Linkage::Internal,
                4,
                2,
                1,
                &[],
                vec![site("e_ab", "f_a", "f_b", &[])],
            ),
            func(
                "f_b",
                Linkage::Internal,
                4,
                2,
                1,
                &[],
                vec![site("e_ba", "f_b", "f_a", &[])],
            ),
        ],
    )
    .expect("cycle module is well-formed")
}
