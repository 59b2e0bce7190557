//! A self-contained inlining-for-size laboratory.
//!
//! The crate models a compiler's inlining pass over a miniature call-graph IR
//! with exact integer size accounting, and trains small feed-forward policies
//! to beat a cost/threshold heuristic at shrinking modules:
//!
//! - [`irmodel`]: the call-graph model, inlining semantics, module file format.
//! - [`corpusgen`]: seeded synthetic module corpora.
//! - [`features`]: the 11-feature state encoding fed to policies.
//! - [`heuristic`]: the cost-vs-threshold baseline decision rule.
//! - [`environment`]: deterministic traversal, episodes, trajectory logs.
//! - [`policy`]: the feed-forward policy network with analytic gradients.
//! - [`trainers`]: behavioral cloning, policy gradient, evolution strategies,
//!   and size-reduction evaluation.
//! - [`oracle`]: exhaustive optimal inlining for tiny modules.

pub mod environment;
pub mod features;
pub mod fixtures;
pub mod heuristic;
pub mod irmodel;
pub mod oracle;
pub mod policy;
pub mod trainers;

pub mod corpusgen;

pub(crate) mod seeding;
