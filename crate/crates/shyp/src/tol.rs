//! Default tolerances and sampling sizes.

/// Global comparison tolerance.
pub const TOL: f64 = 1e-9;

/// Slack allowed on sampled triangle inequalities.
pub const TRIANGLE_SLACK: f64 = 1e-12;

/// Relative safety factor applied to sampled Lipschitz constants.
pub const SAFETY: f64 = 1.01;

/// Fraction of the sampled Lebesgue number used as δ.
pub const LEBESGUE_FRACTION: f64 = 0.9;

/// Grid size for sublevel sets on circles.
pub const CIRCLE_GRID: usize = 20_000;

/// Path steps used to lift circle maps through a covering.
pub const LIFT_STEPS: usize = 10_000;

/// Default isometric-arc shrink fraction for Schottky regions.
pub const SCHOTTKY_SHRINK: f64 = 0.02;

/// Default word depth of free-boundary points.
pub const BOUNDARY_DEPTH: usize = 40;

/// Default breadth-first search radius for word metrics.
pub const BFS_CAP: usize = 12;

/// Points on the boundary net of a pushed-forward ball.
pub const BALL_NET: usize = 64;

/// Relative separation required of an expansivity witness.
pub const EXPANSIVITY_SLACK: f64 = 1e-6;

/// Search depth for expansivity witnesses and conjugacy iterations.
pub const MAX_DEPTH: usize = 200;

/// Distance below which a computed orbit point is snapped back onto Λ.
pub const SNAP: f64 = 1e-10;

/// Maximum chain length in N-equivalence searches.
pub const MAX_CHAIN: usize = 3;

/// Finite-difference step.
pub const FD_STEP: f64 = 1e-6;

/// Word depth of the default Schottky net.
pub const NET_DEPTH: usize = 8;

/// Word depth of the default free-boundary net.
pub const BOUNDARY_NET_DEPTH: usize = 6;

/// Smallest index sets accepted as infinite in the `≈^N` surrogate.
pub const MIN_SUBSET: usize = 3;
