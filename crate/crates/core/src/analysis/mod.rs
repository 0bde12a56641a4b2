//! Exact and statistical verification machinery: full enumeration of table
//! fillings, output-character uniqueness and peeling, reference tail bounds,
//! moment estimation, and a Monte-Carlo chi-square companion for geometries
//! too large to enumerate.

mod bounds;
mod chisq;
mod exact;
mod unique;

pub use bounds::{chernoff_bound, chernoff_bound_ln, empirical_central_moment, BoundQuery, BoundSide};
pub use chisq::{independence_chi_square, ChiSquareReport};
pub use exact::{exact_joint_distribution, EnumScheme, JointDistribution};
pub use unique::{
    is_k_unique, is_k_unique_sampled, peel_unique, subset_check_unique, DerivedKeyMatrix,
    KUniqueVerdict, PeelVerdict,
};
