//! Deterministic scenario generators and reward oracles.

pub mod example;
pub mod wcst;

pub use example::{
    desired_partition, desired_partition_reached, example_actions, example_oracle, example_percept, example_schema,
    prototype, ObjectKind, PartitionReport, PrototypeMatch, Variant,
};
pub use wcst::{
    wcst_actions, wcst_deck, wcst_oracle, wcst_percept, wcst_schema, Assignment, SortingRule, WcstCard, WcstState,
};
