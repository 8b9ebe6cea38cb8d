//! Weight-balanced binary search trees with two rebalancing schemes under
//! configurable ⟨Δ,Γ⟩ parameters, a red-black baseline, seeded workload
//! generators and instrumentation for comparing them.
//!
//! ```
//! use wbtree::{Canonical, Rebalance, WbTree};
//!
//! let mut t = WbTree::new(Canonical::TopDown.params(), Rebalance::TopDown);
//! for k in [5, 1, 9, 3] {
//!     t.insert(k);
//! }
//! assert!(t.remove(&3));
//! assert!(t.validate().is_clean());
//! ```

mod bottom_up;
pub mod keygen;
pub mod metrics;
pub mod oracle;
pub mod params;
pub mod rbtree;
mod top_down;
pub mod tree;
pub mod view;

pub use keygen::{Distribution, KeyWorkload, SkewWindows, SplitMix64};
pub use metrics::{average_depth, count_violations, DoubleCount, MetricsRecord, MetricsSink};
pub use params::{BalanceParams, Canonical, Mode, ParamError};
pub use rbtree::RbTree;
pub use tree::{Rebalance, ValidationReport, ViolationKind, WbTree};
pub use view::{Dir, NodeId, TreeView, WeightedView};
