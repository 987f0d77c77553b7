//! TOML configuration files.
//!
//! ```toml
//! [well]
//! a = 3.141592653589793
//! b = 3.141592653589793
//! field = [0.0, 0.0]        # optional
//!
//! [[wires]]                 # wire 1, 2, ... in order
//! side = "left"             # left | right | top | bottom
//! offset = 1.5707963267948966
//! width = 1.5707963267948966
//! q_inf = 0.0               # optional
//!
//! [solver]                  # optional, every key optional
//! closed_modes = 8
//! interior_modes = 60
//! grid = "analytic"         # or a finite-difference spacing
//! quadrature_points = 256
//! ```

use junction_core::model::{Grid, JunctionSpec, Side, SolverConfig, WellSpec, WireSpec};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub well: WellConfig,
    pub wires: Vec<WireConfig>,
    #[serde(default)]
    pub solver: SolverSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WellConfig {
    pub a: f64,
    pub b: f64,
    #[serde(default)]
    pub field: [f64; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WireConfig {
    /// 1-based; defaults to the position in the list.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub index: Option<usize>,
    pub side: String,
    pub offset: f64,
    pub width: f64,
    #[serde(default)]
    pub q_inf: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GridConfig {
    Name(String),
    Spacing(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverSection {
    pub closed_modes: usize,
    pub interior_modes: usize,
    pub grid: GridConfig,
    pub quadrature_points: usize,
}

impl Default for SolverSection {
    fn default() -> Self {
        let d = SolverConfig::default();
        Self {
            closed_modes: d.closed_modes,
            interior_modes: d.interior_modes,
            grid: GridConfig::Name("analytic".into()),
            quadrature_points: d.quadrature_points,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("{0}")]
    Parse(#[from] toml::de::Error),
    #[error("wire {wire}: unknown side {side:?} (expected left, right, top or bottom)")]
    Side { wire: usize, side: String },
    #[error("solver.grid must be \"analytic\" or a spacing, got {0:?}")]
    Grid(String),
}

impl Config {
    pub fn to_spec(&self) -> Result<JunctionSpec, ConfigError> {
        let wires = self
            .wires
            .iter()
            .enumerate()
            .map(|(k, w)| {
                let side = Side::from_name(&w.side).ok_or_else(|| ConfigError::Side {
                    wire: k + 1,
                    side: w.side.clone(),
                })?;
                Ok(WireSpec {
                    index: w.index.unwrap_or(k + 1),
                    side,
                    offset: w.offset,
                    width: w.width,
                    q_inf: w.q_inf,
                })
            })
            .collect::<Result<Vec<_>, ConfigError>>()?;
        let grid = match &self.solver.grid {
            GridConfig::Name(name) if name == "analytic" => Grid::Analytic,
            GridConfig::Name(name) => return Err(ConfigError::Grid(name.clone())),
            GridConfig::Spacing(h) => Grid::Spacing(*h),
        };
        Ok(JunctionSpec {
            well: WellSpec {
                width_a: self.well.a,
                height_b: self.well.b,
                field: self.well.field,
            },
            wires,
            solver: SolverConfig {
                closed_modes: self.solver.closed_modes,
                interior_modes: self.solver.interior_modes,
                grid,
                quadrature_points: self.solver.quadrature_points,
            },
        })
    }

    pub fn from_spec(spec: &JunctionSpec) -> Self {
        Self {
            well: WellConfig {
                a: spec.well.width_a,
                b: spec.well.height_b,
                field: spec.well.field,
            },
            wires: spec
                .wires
                .iter()
                .map(|w| WireConfig {
                    index: None,
                    side: w.side.name().into(),
                    offset: w.offset,
                    width: w.width,
                    q_inf: w.q_inf,
                })
                .collect(),
            solver: SolverSection {
                closed_modes: spec.solver.closed_modes,
                interior_modes: spec.solver.interior_modes,
                grid: match spec.solver.grid {
                    Grid::Analytic => GridConfig::Name("analytic".into()),
                    Grid::Spacing(h) => GridConfig::Spacing(h),
                },
                quadrature_points: spec.solver.quadrature_points,
            },
        }
    }
}

pub fn parse_junction(text: &str) -> Result<JunctionSpec, ConfigError> {
    let config: Config = toml::from_str(text)?;
    config.to_spec()
}

pub fn load_junction(path: &str) -> Result<JunctionSpec, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.into(),
        source,
    })?;
    parse_junction(&text)
}

pub fn serialize(spec: &JunctionSpec) -> String {
    toml::to_string(&Config::from_spec(spec))
        .expect("configuration is always representable in TOML")
}

#[cfg(test)]
mod tests {
    use super::*;
    use junction_core::builtin_example;
    use junction_core::model::symmetric_example;

    #[test]
    fn round_trip() {
        for spec in [builtin_example(), symmetric_example()] {
            assert_eq!(parse_junction(&serialize(&spec)).unwrap(), spec);
        }
        let mut fd = builtin_example();
        fd.solver.grid = Grid::Spacing(0.05);
        fd.well.field = [0.1, -0.2];
        assert_eq!(parse_junction(&serialize(&fd)).unwrap(), fd);
    }

    #[test]
    fn defaults_and_errors() {
        let text =
            "[well]\na = 1.0\nb = 2.0\n[[wires]]\nside = \"top\"\noffset = 0.1\nwidth = 0.5\n";
        let spec = parse_junction(text).unwrap();
        assert_eq!(spec.solver, SolverConfig::default());
        assert_eq!(spec.well.field, [0.0, 0.0]);
        assert_eq!(spec.wires[0].index, 1);

        let bad_side = text.replace("top", "up");
        assert!(matches!(
            parse_junction(&bad_side),
            Err(ConfigError::Side { wire: 1, .. })
        ));
        let bad_grid = format!("{text}[solver]\ngrid = \"fine\"\n");
        assert!(matches!(
            parse_junction(&bad_grid),
            Err(ConfigError::Grid(_))
        ));
        let unknown = format!("{text}[solver]\nmodes = 3\n");
        assert!(matches!(
            parse_junction(&unknown),
            Err(ConfigError::Parse(_))
        ));
        assert!(matches!(
            load_junction("/nonexistent/x.toml"),
            Err(ConfigError::Io { .. })
        ));
    }
}
