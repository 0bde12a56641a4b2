//! Hash-consuming data structures and sketches, each exposing the statistic
//! the corresponding guarantee is about.

mod cuckoo;
mod probe;
mod sketch;
mod two_choice;

pub use cuckoo::{cuckoo_build, cuckoo_feasible, CuckooFailure, CuckooTables};
pub use probe::{window_cost, ChainingTable, LinearProbeTable, ProbeStats, ProbeTable, TableOp};
pub use sketch::{
    effective_probability, jaccard_kpartition, jaccard_repetition, kpartition_fraction,
    kpartition_sample, minwise_sample, threshold_sample, MinwiseSample,
};
pub use two_choice::{two_choice_place, TwoChoiceResult};
