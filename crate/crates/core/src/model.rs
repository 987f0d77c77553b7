//! Junction geometry, potentials and solver configuration.
//!
//! Lengths are in the scaled units of the Schrödinger operator `-Δ + q`, so
//! energies are spectral parameters `λ` with units of inverse length squared.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

/// Side of the rectangular well a wire is attached to.
///
/// The well occupies `0 < ξ1 < a`, `0 < ξ2 < b`. Left/right sides are
/// parameterized by `ξ2`, bottom/top sides by `ξ1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Side {
    Left,
    Right,
    Top,
    Bottom,
}

impl Side {
    pub const ALL: [Side; 4] = [Side::Left, Side::Right, Side::Top, Side::Bottom];

    pub fn name(self) -> &'static str {
        match self {
            Side::Left => "left",
            Side::Right => "right",
            Side::Top => "top",
            Side::Bottom => "bottom",
        }
    }

    pub fn from_name(name: &str) -> Option<Side> {
        Side::ALL.into_iter().find(|side| side.name() == name)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WellSpec {
    pub width_a: f64,
    pub height_b: f64,
    /// Scaled electric field; the well potential is `⟨field, ξ⟩`.
    pub field: [f64; 2],
}

impl WellSpec {
    pub fn side_length(&self, side: Side) -> f64 {
        match side {
            Side::Left | Side::Right => self.height_b,
            Side::Top | Side::Bottom => self.width_a,
        }
    }

    pub fn diameter(&self) -> f64 {
        libm::hypot(self.width_a, self.height_b)
    }

    pub fn has_field(&self) -> bool {
        self.field.iter().any(|&f| f != 0.0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WireSpec {
    /// 1-based wire number, equal to its position in [`JunctionSpec::wires`] plus one.
    pub index: usize,
    pub side: Side,
    /// Start of the attachment segment along the side.
    pub offset: f64,
    /// Wire width `δ`.
    pub width: f64,
    /// Constant potential in the wire.
    pub q_inf: f64,
}

impl WireSpec {
    pub fn segment(&self) -> (f64, f64) {
        (self.offset, self.offset + self.width)
    }

    /// Threshold of transverse mode `l`: `π²l²/δ² + q_inf`.
    pub fn threshold(&self, mode: usize) -> f64 {
        let k = PI * mode as f64 / self.width;
        k * k + self.q_inf
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Grid {
    /// Closed-form separable eigenpairs (zero field only).
    Analytic,
    /// Finite-difference spacing.
    Spacing(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    /// Highest transverse mode `L_max` kept per wire.
    pub closed_modes: usize,
    /// Number `N` of interior eigenpairs in the DN series.
    pub interior_modes: usize,
    pub grid: Grid,
    pub quadrature_points: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            closed_modes: 8,
            interior_modes: 60,
            grid: Grid::Analytic,
            quadrature_points: 256,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct JunctionSpec {
    pub well: WellSpec,
    pub wires: Vec<WireSpec>,
    pub solver: SolverConfig,
}

/// A failed invariant. `code` is stable and machine readable.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub code: &'static str,
    /// 1-based index of the offending wire, if any.
    pub wire: Option<usize>,
    pub message: String,
}

impl Violation {
    fn new(code: &'static str, wire: Option<usize>, message: String) -> Self {
        Self {
            code,
            wire,
            message,
        }
    }
}

impl core::fmt::Display for Violation {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self.wire {
            Some(w) => write!(f, "{} (wire {}): {}", self.code, w, self.message),
            None => write!(f, "{}: {}", self.code, self.message),
        }
    }
}

const MIN_FD_INTERVALS: usize = 16;
const MIN_QUADRATURE_POINTS: usize = 16;

/// Number of finite-difference intervals along a side of length `len`.
pub fn grid_intervals(len: f64, h: f64) -> usize {
    let n = libm::round(len / h);
    if n.is_finite() && n > 0.0 {
        n as usize
    } else {
        0
    }
}

/// Checks every invariant of the spec. An empty list means valid.
pub fn validate(spec: &JunctionSpec) -> Vec<Violation> {
    let mut out = Vec::new();
    let well = &spec.well;

    if !(well.width_a > 0.0 && well.width_a.is_finite()) {
        out.push(Violation::new(
            "well.width.nonpositive",
            None,
            format!("a = {}", well.width_a),
        ));
    }
    if !(well.height_b > 0.0 && well.height_b.is_finite()) {
        out.push(Violation::new(
            "well.height.nonpositive",
            None,
            format!("b = {}", well.height_b),
        ));
    }
    if well.field.iter().any(|f| !f.is_finite()) {
        out.push(Violation::new(
            "well.field.nonfinite",
            None,
            format!("field = {:?}", well.field),
        ));
    }

    if spec.wires.is_empty() {
        out.push(Violation::new(
            "wires.empty",
            None,
            String::from("at least one wire is required"),
        ));
    }

    for (pos, wire) in spec.wires.iter().enumerate() {
        let id = Some(pos + 1);
        if wire.index != pos + 1 {
            out.push(Violation::new(
                "wire.index.nonconsecutive",
                id,
                format!("index {} at position {}", wire.index, pos + 1),
            ));
        }
        if !(wire.width > 0.0 && wire.width.is_finite()) {
            out.push(Violation::new(
                "wire.width.nonpositive",
                id,
                format!("width = {}", wire.width),
            ));
        }
        if !(wire.offset >= 0.0 && wire.offset.is_finite()) {
            out.push(Violation::new(
                "wire.offset.negative",
                id,
                format!("offset = {}", wire.offset),
            ));
        }
        if !wire.q_inf.is_finite() {
            out.push(Violation::new(
                "wire.potential.nonfinite",
                id,
                format!("q_inf = {}", wire.q_inf),
            ));
        }
        let len = well.side_length(wire.side);
        let end = wire.offset + wire.width;
        if end > len * (1.0 + 1e-12) {
            out.push(Violation::new(
                "wire.segment.out_of_bounds",
                id,
                format!(
                    "segment ends at {} on {} side of length {}",
                    end,
                    wire.side.name(),
                    len
                ),
            ));
        }
    }

    for (i, wi) in spec.wires.iter().enumerate() {
        for (j, wj) in spec.wires.iter().enumerate().skip(i + 1) {
            if wi.side != wj.side {
                continue;
            }
            let (a0, a1) = wi.segment();
            let (b0, b1) = wj.segment();
            let overlap = a1.min(b1) - a0.max(b0);
            if overlap > 1e-12 * well.side_length(wi.side) {
                out.push(Violation::new(
                    "wire.segment.overlap",
                    Some(j + 1),
                    format!(
                        "segment overlaps wire {} on the {} side",
                        i + 1,
                        wi.side.name()
                    ),
                ));
            }
        }
    }

    let solver = &spec.solver;
    if solver.closed_modes < 2 {
        out.push(Violation::new(
            "solver.closed_modes.too_small",
            None,
            format!("closed_modes = {} (need >= 2)", solver.closed_modes),
        ));
    }
    if solver.interior_modes < 1 {
        out.push(Violation::new(
            "solver.interior_modes.too_small",
            None,
            String::from("interior_modes = 0"),
        ));
    }
    if solver.quadrature_points < MIN_QUADRATURE_POINTS {
        out.push(Violation::new(
            "solver.quadrature_points.too_small",
            None,
            format!(
                "quadrature_points = {} (need >= {})",
                solver.quadrature_points, MIN_QUADRATURE_POINTS
            ),
        ));
    }
    match solver.grid {
        Grid::Analytic => {
            if well.has_field() {
                out.push(Violation::new(
                    "solver.grid.analytic_with_field",
                    None,
                    String::from("a nonzero field needs a finite-difference grid"),
                ));
            }
        }
        Grid::Spacing(h) => {
            if !(h > 0.0 && h.is_finite()) {
                out.push(Violation::new(
                    "solver.grid.nonpositive",
                    None,
                    format!("grid = {}", h),
                ));
            } else {
                let nx = grid_intervals(well.width_a, h);
                let ny = grid_intervals(well.height_b, h);
                if nx < MIN_FD_INTERVALS || ny < MIN_FD_INTERVALS {
                    out.push(Violation::new(
                        "solver.grid.too_coarse",
                        None,
                        format!("{} x {} intervals (need >= {})", nx, ny, MIN_FD_INTERVALS),
                    ));
                }
            }
        }
    }

    out
}

/// The asymmetric T-junction: a `π × π` well with three wires of width `π/2`.
///
/// Wire 1 sits on the upper half of the left side, wires 2 and 3 in the
/// middles of the top and right sides. These placements are the ones for
/// which the l = 1 profiles reduce to `(2/√π) sin 2ξ2`, `(2/√π) cos 2ξ1`
/// and `(2/√π) cos 2ξ2`.
pub fn builtin_example() -> JunctionSpec {
    let half = PI / 2.0;
    JunctionSpec {
        well: WellSpec {
            width_a: PI,
            height_b: PI,
            field: [0.0, 0.0],
        },
        wires: vec![
            WireSpec {
                index: 1,
                side: Side::Left,
                offset: half,
                width: half,
                q_inf: 0.0,
            },
            WireSpec {
                index: 2,
                side: Side::Top,
                offset: PI / 4.0,
                width: half,
                q_inf: 0.0,
            },
            WireSpec {
                index: 3,
                side: Side::Right,
                offset: PI / 4.0,
                width: half,
                q_inf: 0.0,
            },
        ],
        solver: SolverConfig::default(),
    }
}

/// A T-junction symmetric under `ξ1 → a − ξ1`: wire 1 in the middle of the
/// bottom side, wires 2 and 3 facing each other in the middles of the left
/// and right sides. The well is `π × 1.25π` so that its in-band spectrum has
/// simple eigenvalues.
pub fn symmetric_example() -> JunctionSpec {
    let a = PI;
    let b = 1.25 * PI;
    let delta = PI / 2.0;
    JunctionSpec {
        well: WellSpec {
            width_a: a,
            height_b: b,
            field: [0.0, 0.0],
        },
        wires: vec![
            WireSpec {
                index: 1,
                side: Side::Bottom,
                offset: (a - delta) / 2.0,
                width: delta,
                q_inf: 0.0,
            },
            WireSpec {
                index: 2,
                side: Side::Left,
                offset: (b - delta) / 2.0,
                width: delta,
                q_inf: 0.0,
            },
            WireSpec {
                index: 3,
                side: Side::Right,
                offset: (b - delta) / 2.0,
                width: delta,
                q_inf: 0.0,
            },
        ],
        solver: SolverConfig::default(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn codes(spec: &JunctionSpec) -> Vec<&'static str> {
        validate(spec).into_iter().map(|v| v.code).collect()
    }

    #[test]
    fn builtin_example_is_valid() {
        assert!(validate(&builtin_example()).is_empty());
        assert!(validate(&symmetric_example()).is_empty());
    }

    #[test]
    fn builtin_example_layout() {
        let spec = builtin_example();
        let w1 = &spec.wires[0];
        assert_eq!(w1.side, Side::Left);
        assert_eq!(w1.segment(), (PI / 2.0, PI));
        assert_eq!(spec.wires[1].side, Side::Top);
        assert_eq!(spec.wires[2].side, Side::Right);
        for wire in &spec.wires {
            assert_eq!(wire.width, PI / 2.0);
            assert!((wire.threshold(1) - 4.0).abs() < 1e-12);
            assert!((wire.threshold(2) - 16.0).abs() < 1e-12);
            assert!((wire.threshold(3) - 36.0).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_width_wire() {
        let mut spec = builtin_example();
        spec.wires[1].width = 0.0;
        assert_eq!(codes(&spec), vec!["wire.width.nonpositive"]);
        assert_eq!(validate(&spec)[0].wire, Some(2));
    }

    #[test]
    fn segment_out_of_bounds() {
        let mut spec = builtin_example();
        spec.wires[0].offset = 2.0;
        assert_eq!(codes(&spec), vec!["wire.segment.out_of_bounds"]);
    }

    #[test]
    fn overlapping_segments() {
        let mut spec = builtin_example();
        spec.wires[2].side = Side::Left;
        spec.wires[2].offset = 1.0;
        let v = validate(&spec);
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].code, "wire.segment.overlap");
        assert_eq!(v[0].wire, Some(3));
    }

    #[test]
    fn touching_segments_are_allowed() {
        let mut spec = builtin_example();
        spec.wires[2].side = Side::Left;
        spec.wires[2].offset = 0.0;
        assert!(validate(&spec).is_empty());
    }

    #[test]
    fn solver_limits() {
        let mut spec = builtin_example();
        spec.solver.closed_modes = 1;
        spec.solver.interior_modes = 0;
        spec.solver.quadrature_points = 8;
        assert_eq!(
            codes(&spec),
            vec![
                "solver.closed_modes.too_small",
                "solver.interior_modes.too_small",
                "solver.quadrature_points.too_small"
            ]
        );
    }

    #[test]
    fn field_needs_grid() {
        let mut spec = builtin_example();
        spec.well.field = [0.1, 0.0];
        assert_eq!(codes(&spec), vec!["solver.grid.analytic_with_field"]);
        spec.solver.grid = Grid::Spacing(PI / 8.0);
        assert_eq!(codes(&spec), vec!["solver.grid.too_coarse"]);
        spec.solver.grid = Grid::Spacing(PI / 32.0);
        assert!(validate(&spec).is_empty());
    }

    #[test]
    fn empty_and_misnumbered_wires() {
        let mut spec = builtin_example();
        spec.wires[1].index = 7;
        assert_eq!(codes(&spec), vec!["wire.index.nonconsecutive"]);
        spec.wires.clear();
        assert_eq!(codes(&spec), vec!["wires.empty"]);
    }
}
