//! Gyrovector and manifold kernel for the Poincaré ball and hyperboloid models (curvature -1).

mod ball;
mod hyperplane;
mod lorentz;

pub use ball::{
    conformal_factor, dist, exp_map, geodesic, log_map, mobius_add, mobius_scalar, BallPoint,
    TangentVec, MAX_ATANH_ARG, MAX_BALL_NORM,
};
pub use hyperplane::{
    decide, decide_ball_form, hyperplane_dist, hyperplane_dist_tangent, point_weight, Hyperplane,
    TangentBatch,
};
pub use lorentz::{
    ball_to_lorentz, lorentz_dist, lorentz_normal, lorentz_to_ball, minkowski, LorentzPoint,
    HYPERBOLOID_TOL,
};

pub(crate) use ball::{conformal_raw, dist_raw, exp_map_raw, log_map_raw, mobius_sub_raw};
pub(crate) use hyperplane::point_weight_raw;
pub(crate) use lorentz::minkowski_raw;
