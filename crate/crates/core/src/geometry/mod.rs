//! Sampled curves, homogeneous spaces, distances and lengths.

pub mod curve;
pub mod distance;
pub mod lift;
pub mod probes;
pub mod space;

pub use curve::{curve_length_p, quotient_length, simpson_weights, CurveTarget, DerivativeRule, Generator, SampledCurve};
pub use distance::{minimal_geodesic, quotient_distance, unitary_distance, GeodesicResult, QuotientDistance, QuotientDistanceOptions};
pub use space::{ActionKind, Constant, HomSpace, KnownConstants};
pub use lift::{epsilon_isometric_lift, lift_ode_solve, EpsilonLift, LiftOptions, LiftSolution, PolygonalField};
pub use probes::{convexity_probe, minimality_probe, rectifiable_path_length, CompetitorKind, ConvexityProfile, MinimalityOptions, MinimalityReport, RectifiableLength};
