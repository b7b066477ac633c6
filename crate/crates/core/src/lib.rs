//! Closed-loop benchmark for long-tail driving scenarios: synthetic maps,
//! reactive traffic, rule-based and LLM-driven planners, and scoring.

pub mod agents;
pub mod geometry;
pub mod llm;
pub mod map;
pub mod metrics;
pub mod planners;
pub mod scalar;
pub mod scenario;
pub mod sim;

pub use scalar::Scalar;

pub type Pose = geometry::Pose2D<f64>;
pub type Point = geometry::Vec2<f64>;
pub type Obb = geometry::OrientedBox<f64>;
pub type Line = geometry::Polyline<f64>;
pub type Frenet = geometry::FrenetPoint<f64>;
pub type Idm = agents::IdmParams<f64>;
