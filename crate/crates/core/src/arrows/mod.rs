//! Operators, double arrows and their exact classification.

mod distance;
mod double;
mod operator;
mod perturb;

pub use distance::{arrow_distance_upper, DistanceBound};
pub use double::{
    compose, compose_certified, eps_commutativity, exactify_projection, scale_to_contractive, ArrowClass, DoubleArrow,
};
pub use operator::Operator;
pub use perturb::{perturb_projection, Perturbation};
