//! Depth-based endpoint sampling and steering for memoryless local planners.
//!
//! A planner draws trajectory endpoints in the camera's pixel × depth space,
//! optionally squeezing the depth draw in front of the observed surface,
//! connects each to a rest-to-rest quintic, scores it by alignment with the
//! goal and checks it against the single latest depth frame. When nothing is
//! feasible for a while, the vehicle stops and turns away from the nearest
//! obstacle.

// negated comparisons are used on purpose to reject NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod collision;
pub mod depth_image;
pub mod geometry;
pub mod planner;
pub mod sampling;
pub mod simulator;
pub mod steering;
pub mod trajectory;

pub use collision::{check, check_indexed, classify_ground_truth, is_free_indexed, CheckReport, CollisionConfig, CollisionVerdict, DepthIndex, TrajectoryClass};
pub use depth_image::{DepthImage, DepthImageError, NearestPoint, INVALID_DEPTH};
pub use geometry::{bearing, deproject, project, CameraIntrinsics, GeometryError, ImagePoint, Pose, Vec3};
pub use planner::{average_velocity_cost, direction_cost, CheckOrder, plan, plan_indexed, Budget, CostError, CostKind, PlanCounters, PlanOutcome, PlannerConfig};
pub use sampling::{constrain_depth, depth_based_sample, sample_uniform, sample_uniform_candidate, Candidate, SampleBounds, SamplerKind, SamplingError};
pub use steering::{decide, steering_sign, steering_yaw, yaw_setpoint, Command, SteeringConfig, SteeringState, YawTarget};
pub use trajectory::{duration_for, plan_to_rest, DurationLimits, PolynomialTrajectory, TrajectoryError, VehicleState};
