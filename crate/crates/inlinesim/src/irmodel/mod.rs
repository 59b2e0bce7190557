//! Mini-IR call-graph model with exact inlining semantics and size accounting.
//!
//! A [`ModuleGraph`] is a set of functions connected by call sites. Inlining a
//! call site splices the callee's (simplified) body size into the caller,
//! clones the callee's call sites into the caller, and deletes the callee when
//! its last in-module user disappears and its linkage permits. All size
//! arithmetic is integer-exact, so the per-step reward of an inlining episode
//! always sums to the module's total size reduction.

mod callgraph;
pub mod textfmt;

use std::collections::HashMap;
use std::fmt;

use indexmap::IndexMap;
use thiserror::Error;

pub use callgraph::Condensation;

/// Name of a function within a module.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FunctionId(String);

/// Name of a call site within a module. Unique module-wide.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CallSiteId(String);

macro_rules! id_impls {
    ($ty:ident) => {
        impl $ty {
            pub fn new(s: impl Into<String>) -> Self {
                $ty(s.into())
            }

            pub fn as_str(&self) -> &str {
                &self.0
            }
        }

        impl fmt::Display for $ty {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(&self.0)
            }
        }

        impl fmt::Debug for $ty {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                write!(f, "{}({})", stringify!($ty), self.0)
            }
        }

        impl From<&str> for $ty {
            fn from(s: &str) -> Self {
                $ty(s.to_owned())
            }
        }
    };
}

id_impls!(FunctionId);
id_impls!(CallSiteId);

/// Symbol visibility. Only `Internal` functions may be deleted once unused.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Linkage {
    Internal,
    External,
}

impl fmt::Display for Linkage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Linkage::Internal => f.write_str("internal"),
            Linkage::External => f.write_str("external"),
        }
    }
}

/// A call instruction inside some caller, targeting `callee`.
///
/// `const_args[p]` marks the p-th argument as compile-time constant; inlining
/// then removes `callee.param_savings[p]` instructions from the spliced body.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CallSite {
    pub id: CallSiteId,
    pub caller: FunctionId,
    pub callee: FunctionId,
    pub const_args: Vec<bool>,
}

/// One function: size bookkeeping plus its outgoing call sites in
/// declaration order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FunctionDef {
    pub id: FunctionId,
    pub linkage: Linkage,
    /// Instruction count. Every call site occupies exactly one instruction.
    pub size: i64,
    pub basic_block_count: i64,
    pub conditional_block_count: i64,
    /// Instructions removed from the body when the corresponding argument is
    /// compile-time constant at a call site. Length defines the param count.
    pub param_savings: Vec<i64>,
    pub call_sites: Vec<CallSite>,
}

impl FunctionDef {
    pub fn param_count(&self) -> usize {
        self.param_savings.len()
    }
}

/// Result of one inline operation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InlineOutcome {
    /// Exact signed size reduction of the module caused by this operation:
    /// `S(caller_before) - S(caller_after) + (callee deleted ? S(callee) : 0)`.
    pub step_reward: i64,
    pub callee_deleted: bool,
    /// Call sites cloned from the callee into the caller, in the callee's
    /// declaration order.
    pub cloned_call_sites: Vec<CallSiteId>,
}

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("unknown or dead call site `{0}`")]
    InvalidCallSite(CallSiteId),
    #[error("call site `{0}` stays within one strongly connected component; recursive edges are not inlined")]
    RecursionRefused(CallSiteId),
    #[error("unknown function `{0}`")]
    UnknownFunction(FunctionId),
    #[error("duplicate function id `{0}`")]
    DuplicateFunction(FunctionId),
}

/// A single invariant violation reported by [`ModuleGraph::validate`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    DanglingCallee { site: CallSiteId, callee: FunctionId },
    MaskLengthMismatch { site: CallSiteId, expected: usize, actual: usize },
    CallerFieldMismatch { site: CallSiteId, recorded: FunctionId, actual: FunctionId },
    DuplicateSiteId { site: CallSiteId },
    SizeTooSmall { function: FunctionId, size: i64, call_sites: usize },
    SavingsExceedBudget { function: FunctionId, total: i64, budget: i64 },
    NegativeSaving { function: FunctionId, index: usize },
    BlockCountNotPositive { function: FunctionId, blocks: i64 },
    ConditionalBlocksExceedBlocks { function: FunctionId, conditional: i64, blocks: i64 },
    SizeAccountingDrift { computed: i64, maintained: i64 },
    UserCountDrift { function: FunctionId, computed: i64, maintained: i64 },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::DanglingCallee { site, callee } => {
                write!(f, "call site `{site}` targets unknown function `{callee}`")
            }
            Violation::MaskLengthMismatch { site, expected, actual } => write!(
                f,
                "call site `{site}` const mask has {actual} entries, callee declares {expected} params"
            ),
            Violation::CallerFieldMismatch { site, recorded, actual } => write!(
                f,
                "call site `{site}` records caller `{recorded}` but belongs to `{actual}`"
            ),
            Violation::DuplicateSiteId { site } => {
                write!(f, "call site id `{site}` is not unique")
            }
            Violation::SizeTooSmall { function, size, call_sites } => write!(
                f,
                "function `{function}` has size {size}, below 1 + {call_sites} call sites"
            ),
            Violation::SavingsExceedBudget { function, total, budget } => write!(
                f,
                "function `{function}` declares {total} total param savings, budget is {budget}"
            ),
            Violation::NegativeSaving { function, index } => {
                write!(f, "function `{function}` param saving #{index} is negative")
            }
            Violation::BlockCountNotPositive { function, blocks } => {
                write!(f, "function `{function}` has non-positive block count {blocks}")
            }
            Violation::ConditionalBlocksExceedBlocks { function, conditional, blocks } => write!(
                f,
                "function `{function}` has {conditional} conditional blocks out of {blocks}"
            ),
            Violation::SizeAccountingDrift { computed, maintained } => write!(
                f,
                "module size drift: fresh sum {computed}, maintained total {maintained}"
            ),
            Violation::UserCountDrift { function, computed, maintained } => write!(
                f,
                "user count drift for `{function}`: fresh {computed}, maintained {maintained}"
            ),
        }
    }
}

/// A compilation unit: ordered functions, frozen initial call-graph
/// condensation, and incrementally maintained size/user accounting.
#[derive(Clone, Debug)]
pub struct ModuleGraph {
    id: String,
    functions: IndexMap<FunctionId, FunctionDef>,
    initial_size: i64,
    growth_cap_factor: f64,
    condensation: Condensation,
    current_size: i64,
    users: HashMap<FunctionId, i64>,
    clone_seq: u64,
}

pub const DEFAULT_GROWTH_CAP_FACTOR: f64 = 1.5;

impl ModuleGraph {
    /// Builds a module from functions in declaration order. The initial size,
    /// user counts and call-graph condensation are frozen here; only
    /// duplicate function ids are rejected outright (everything else is
    /// reported by [`validate`](Self::validate)).
    pub fn new(id: impl Into<String>, functions: Vec<FunctionDef>) -> Result<Self, ModelError> {
        let mut map = IndexMap::with_capacity(functions.len());
        for f in functions {
            let fid = f.id.clone();
            if map.insert(fid.clone(), f).is_some() {
                return Err(ModelError::DuplicateFunction(fid));
            }
        }
        let current_size = map.values().map(|f| f.size).sum();
        let users = compute_users(&map);
        let condensation = Condensation::build(&map);
        Ok(ModuleGraph {
            id: id.into(),
            functions: map,
            initial_size: current_size,
            growth_cap_factor: DEFAULT_GROWTH_CAP_FACTOR,
            condensation,
            current_size,
            users,
            clone_seq: 0,
        })
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    /// Module size at load time, frozen.
    pub fn initial_size(&self) -> i64 {
        self.initial_size
    }

    pub fn growth_cap_factor(&self) -> f64 {
        self.growth_cap_factor
    }

    pub fn set_growth_cap_factor(&mut self, factor: f64) {
        self.growth_cap_factor = factor;
    }

    /// Incrementally maintained total size. [`module_size`] recomputes the
    /// same quantity from scratch.
    pub fn current_size(&self) -> i64 {
        self.current_size
    }

    /// Condensation of the call graph as it was at load time. Inlining never
    /// re-derives this: traversal order, recursion checks and call-site
    /// heights all refer to the original graph.
    pub fn initial_condensation(&self) -> &Condensation {
        &self.condensation
    }

    pub fn functions(&self) -> impl Iterator<Item = &FunctionDef> {
        self.functions.values()
    }

    pub fn function(&self, id: &FunctionId) -> Option<&FunctionDef> {
        self.functions.get(id)
    }

    pub fn contains_function(&self, id: &FunctionId) -> bool {
        self.functions.contains_key(id)
    }

    pub fn function_count(&self) -> usize {
        self.functions.len()
    }

    /// Total live call sites.
    pub fn call_site_count(&self) -> usize {
        self.functions.values().map(|f| f.call_sites.len()).sum()
    }

    /// In-module call sites targeting `id` (incrementally maintained).
    pub fn user_count(&self, id: &FunctionId) -> i64 {
        self.users.get(id).copied().unwrap_or(0)
    }

    /// Looks a call site up by id, returning its owner.
    pub fn find_site(&self, id: &CallSiteId) -> Option<(&FunctionDef, &CallSite)> {
        self.functions.values().find_map(|f| {
            f.call_sites.iter().find(|c| &c.id == id).map(|c| (f, c))
        })
    }

    fn site_id_exists(&self, id: &CallSiteId) -> bool {
        self.functions
            .values()
            .any(|f| f.call_sites.iter().any(|c| &c.id == id))
    }

    fn fresh_site_id(&mut self, base: &CallSiteId) -> CallSiteId {
        loop {
            self.clone_seq += 1;
            let candidate = CallSiteId::new(format!("{}_cl{}", base, self.clone_seq));
            if !self.site_id_exists(&candidate) {
                return candidate;
            }
        }
    }

    /// Sum of live function sizes, recomputed from scratch.
    pub fn module_size(&self) -> i64 {
        self.functions.values().map(|f| f.size).sum()
    }

    /// Inlines one call site, mutating the caller in place.
    ///
    /// With caller A, callee B and `sav` the savings unlocked by constant
    /// arguments: the call instruction is removed, B's simplified body is
    /// spliced in (`A.size += B.size - sav - 1`), B's entry block fuses into
    /// A, B's call sites are cloned into A at the position the call occupied,
    /// and B is deleted if this was its last user and it has internal
    /// linkage. The returned reward is the exact module size reduction.
    pub fn inline(&mut self, site: &CallSiteId) -> Result<InlineOutcome, ModelError> {
        let (caller_id, site_idx) = self
            .functions
            .values()
            .find_map(|f| {
                f.call_sites
                    .iter()
                    .position(|c| &c.id == site)
                    .map(|i| (f.id.clone(), i))
            })
            .ok_or_else(|| ModelError::InvalidCallSite(site.clone()))?;
        let cs = self.functions[&caller_id].call_sites[site_idx].clone();
        let callee = match self.functions.get(&cs.callee) {
            Some(f) => f.clone(),
            None => return Err(ModelError::InvalidCallSite(site.clone())),
        };
        if cs.const_args.len() != callee.param_count() {
            return Err(ModelError::InvalidCallSite(site.clone()));
        }
        if self.condensation.scc_of(&caller_id) == self.condensation.scc_of(&cs.callee) {
            return Err(ModelError::RecursionRefused(site.clone()));
        }

        let savings: i64 = cs
            .const_args
            .iter()
            .zip(&callee.param_savings)
            .filter_map(|(&is_const, &s)| is_const.then_some(s))
            .sum();

        // Clone the callee's call sites before touching the caller so fresh
        // ids are checked against the full current id set.
        let mut clones = Vec::with_capacity(callee.call_sites.len());
        for inner in &callee.call_sites {
            let id = self.fresh_site_id(&inner.id);
            clones.push(CallSite {
                id,
                caller: caller_id.clone(),
                callee: inner.callee.clone(),
                const_args: inner.const_args.clone(),
            });
        }
        let cloned_ids: Vec<CallSiteId> = clones.iter().map(|c| c.id.clone()).collect();

        let caller_size_before;
        let caller_size_after;
        {
            let caller = self.functions.get_mut(&caller_id).expect("caller is live");
            caller_size_before = caller.size;
            caller.size = caller.size - 1 + (callee.size - savings);
            caller.basic_block_count += (callee.basic_block_count - 1).max(0);
            caller.conditional_block_count += callee.conditional_block_count;
            caller.call_sites.splice(site_idx..=site_idx, clones);
            caller_size_after = caller.size;
        }
        self.current_size += caller_size_after - caller_size_before;

        // The inlined call no longer targets the callee; the clones add one
        // user per cloned edge.
        *self.users.entry(cs.callee.clone()).or_insert(0) -= 1;
        for inner in &callee.call_sites {
            *self.users.entry(inner.callee.clone()).or_insert(0) += 1;
        }

        let mut callee_deleted = false;
        if self.user_count(&cs.callee) == 0 && callee.linkage == Linkage::Internal {
            // The clones keep every transitive callee alive, so this deletion
            // can never cascade.
            self.remove_function(&cs.callee);
            callee_deleted = true;
        }

        let step_reward = caller_size_before - caller_size_after
            + if callee_deleted { callee.size } else { 0 };

        Ok(InlineOutcome { step_reward, callee_deleted, cloned_call_sites: cloned_ids })
    }

    /// Deletes `id` iff it has zero in-module users and internal linkage.
    pub fn delete_if_dead(&mut self, id: &FunctionId) -> Result<bool, ModelError> {
        let f = self
            .functions
            .get(id)
            .ok_or_else(|| ModelError::UnknownFunction(id.clone()))?;
        if f.linkage != Linkage::Internal || self.user_count(id) != 0 {
            return Ok(false);
        }
        self.remove_function(id);
        Ok(true)
    }

    fn remove_function(&mut self, id: &FunctionId) {
        let f = self
            .functions
            .shift_remove(id)
            .expect("remove_function called on a live function");
        self.current_size -= f.size;
        self.users.remove(id);
        for cs in &f.call_sites {
            if let Some(n) = self.users.get_mut(&cs.callee) {
                *n -= 1;
            }
        }
    }

    /// Recomputes user counts from scratch (the oracle for the incrementally
    /// maintained map).
    pub fn recompute_users(&self) -> HashMap<FunctionId, i64> {
        compute_users(&self.functions)
    }

    /// Checks every module invariant; an empty list means the module is valid.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        let mut seen_sites: HashMap<&CallSiteId, ()> = HashMap::new();
        for f in self.functions.values() {
            if f.basic_block_count < 1 {
                out.push(Violation::BlockCountNotPositive {
                    function: f.id.clone(),
                    blocks: f.basic_block_count,
                });
            }
            if f.conditional_block_count < 0
                || f.conditional_block_count > f.basic_block_count
            {
                out.push(Violation::ConditionalBlocksExceedBlocks {
                    function: f.id.clone(),
                    conditional: f.conditional_block_count,
                    blocks: f.basic_block_count,
                });
            }
            let n_sites = f.call_sites.len();
            if f.size < 1 + n_sites as i64 {
                out.push(Violation::SizeTooSmall {
                    function: f.id.clone(),
                    size: f.size,
                    call_sites: n_sites,
                });
            }
            for (i, s) in f.param_savings.iter().enumerate() {
                if *s < 0 {
                    out.push(Violation::NegativeSaving { function: f.id.clone(), index: i });
                }
            }
            let budget = f.size - n_sites as i64 - 1;
            let total: i64 = f.param_savings.iter().sum();
            if total > budget {
                out.push(Violation::SavingsExceedBudget {
                    function: f.id.clone(),
                    total,
                    budget,
                });
            }
            for cs in &f.call_sites {
                if seen_sites.insert(&cs.id, ()).is_some() {
                    out.push(Violation::DuplicateSiteId { site: cs.id.clone() });
                }
                if cs.caller != f.id {
                    out.push(Violation::CallerFieldMismatch {
                        site: cs.id.clone(),
                        recorded: cs.caller.clone(),
                        actual: f.id.clone(),
                    });
                }
                match self.functions.get(&cs.callee) {
                    None => out.push(Violation::DanglingCallee {
                        site: cs.id.clone(),
                        callee: cs.callee.clone(),
                    }),
                    Some(callee) => {
                        if cs.const_args.len() != callee.param_count() {
                            out.push(Violation::MaskLengthMismatch {
                                site: cs.id.clone(),
                                expected: callee.param_count(),
                                actual: cs.const_args.len(),
                            });
                        }
                    }
                }
            }
        }
        let computed = self.module_size();
        if computed != self.current_size {
            out.push(Violation::SizeAccountingDrift {
                computed,
                maintained: self.current_size,
            });
        }
        let fresh_users = self.recompute_users();
        for f in self.functions.values() {
            let computed = fresh_users.get(&f.id).copied().unwrap_or(0);
            let maintained = self.user_count(&f.id);
            if computed != maintained {
                out.push(Violation::UserCountDrift {
                    function: f.id.clone(),
                    computed,
                    maintained,
                });
            }
        }
        out
    }
}

fn compute_users(map: &IndexMap<FunctionId, FunctionDef>) -> HashMap<FunctionId, i64> {
    let mut users: HashMap<FunctionId, i64> =
        map.keys().map(|id| (id.clone(), 0)).collect();
    for f in map.values() {
        for cs in &f.call_sites {
            if let Some(n) = users.get_mut(&cs.callee) {
                *n += 1;
            }
        }
    }
    users
}

#[cfg(test)]
mod tests;
