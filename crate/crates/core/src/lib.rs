//! Linear classifiers with mistake-bound and margin guarantees in hyperbolic space.
//!
//! Every classifier works in the tangent space at a reference point `p` of the Poincaré ball,
//! where a hyperplane `⟨log_p(x), w⟩ = 0` becomes an ordinary linear separator and the point
//! weight `η` converts tangent inner products back into hyperbolic distances. The hyperboloid
//! perceptron is reference-point free.
//!
//! | module | contents |
//! |--------|----------|
//! | [`geometry`] | Möbius algebra, exp/log maps, hyperplanes, ball ↔ hyperboloid |
//! | [`hulls`] | hyperbolic convex hulls in the disk and reference-point learning |
//! | [`perceptrons`] | first-order, second-order, strategic and hyperboloid perceptrons, mistake bounds |
//! | [`svm`] | soft/hard-margin SVM in the tangent space, Euclidean baseline |
//! | [`multiclass`] | one-vs-rest with Platt-calibrated heads |
//! | [`datagen`] | planted instances, strategic agents, dataset files |

pub mod datagen;
pub mod error;
pub mod geometry;
pub mod hulls;
pub mod label;
pub mod multiclass;
pub mod perceptrons;
pub mod svm;
mod vecops;

pub use error::{Error, Result};
pub use label::Label;
