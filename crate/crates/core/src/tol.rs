//! Shared numerical tolerances.

/// Relative singularity threshold for 2x2 inversion and hermiticity checks.
pub const ARITHMETIC: f64 = 1e-12;

/// Separates genuine rank deficiency of `D` from roundoff.
pub const CLASS: f64 = 1e-8;

/// Smallest singular value treated as a kernel direction of `DM - C`.
pub const KERNEL: f64 = 1e-10;

/// Maximum `|total phase / 2 pi - winding|` accepted for a closed loop.
pub const LOOP_CLOSURE: f64 = 0.05;

/// One-sided offset used for boundary traces at the origin.
pub const TRACE_OFFSET: f64 = 1e-6;

/// Eigenvalues must land inside `(-m + EDGE, m - EDGE)` (in units of m).
pub const THRESHOLD_EDGE: f64 = 1e-12;
