//! A prepared junction: validated spec, channel basis and spectral data.

use alloc::vec::Vec;

use crate::channels::{ChannelBasis, ChannelError};
use crate::dn::{
    intermediate_dn, single_pole_fit, validity_report, DnError, DnMatrix, GroupSelector,
    IntermediateDn, SinglePoleModel, SpectralData, ValidityReport,
};
use crate::interior::{boundary_current, fd_eigenpairs, lowest_rect_eigenpairs, EigenError};
use crate::model::{validate, Grid, JunctionSpec, Violation};
use crate::oracle::{mode_match_smatrix, OracleError};
use crate::scattering::{
    s_approx, s_exact, Method, SMatrix, ScatteringError, SweepFlag, SweepResult, SweepRow,
};

/// Sweep points closer than this to a channel threshold are flagged.
pub const THRESHOLD_GUARD: f64 = 1e-8;
/// Sweep points closer than this to a retained eigenvalue are flagged.
pub const EIGENVALUE_GUARD: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PipelineError {
    #[error("invalid junction ({} problem(s)): {}", .0.len(), .0.first().map(|v| alloc::format!("{v}")).unwrap_or_default())]
    Invalid(Vec<Violation>),
    #[error("no eigen-group {group} inside the open band")]
    NoGroup { group: usize },
    #[error("no eigenvalue of the well lies inside the open band")]
    NoResonance,
    #[error(transparent)]
    Channel(#[from] ChannelError),
    #[error(transparent)]
    Eigen(#[from] EigenError),
    #[error(transparent)]
    Dn(#[from] DnError),
    #[error(transparent)]
    Scattering(#[from] ScatteringError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
}

/// Eigen-group strictly inside the open band.
#[derive(Debug, Clone, PartialEq)]
pub struct BandGroup {
    pub group: usize,
    pub lambda: f64,
    /// Indices into the spectral data.
    pub members: Vec<usize>,
    /// `(m, n)` labels of the members.
    pub labels: Vec<(usize, usize)>,
    /// Distance to the nearest retained eigenvalue outside the group.
    pub spacing: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Junction {
    spec: JunctionSpec,
    basis: ChannelBasis,
    data: SpectralData,
}

impl Junction {
    pub fn prepare(spec: &JunctionSpec) -> Result<Self, PipelineError> {
        let violations = validate(spec);
        if !violations.is_empty() {
            return Err(PipelineError::Invalid(violations));
        }
        let basis = ChannelBasis::new(spec)?;
        let count = spec.solver.interior_modes;
        let pairs = match spec.solver.grid {
            Grid::Analytic => lowest_rect_eigenpairs(&spec.well, count)?,
            Grid::Spacing(h) => fd_eigenpairs(&spec.well, h, count)?,
        };
        let currents = pairs.iter().map(|p| boundary_current(p, &basis)).collect();
        let data = SpectralData::new(pairs, currents)?;
        Ok(Self {
            spec: spec.clone(),
            basis,
            data,
        })
    }

    pub fn spec(&self) -> &JunctionSpec {
        &self.spec
    }

    pub fn basis(&self) -> &ChannelBasis {
        &self.basis
    }

    pub fn data(&self) -> &SpectralData {
        &self.data
    }

    pub fn band(&self) -> (f64, f64) {
        self.basis.band()
    }

    pub fn momenta(&self, lambda: f64) -> Result<Vec<f64>, PipelineError> {
        Ok(self.basis.open_momenta(lambda)?)
    }

    pub fn dn(&self, lambda: f64) -> Result<DnMatrix, PipelineError> {
        Ok(self.data.dn(lambda, &self.basis)?)
    }

    pub fn intermediate_dn(&self, lambda: f64) -> Result<IntermediateDn, PipelineError> {
        let dn = self.dn(lambda)?;
        let kminus = self.basis.k_minus(lambda)?;
        Ok(intermediate_dn(&dn, &kminus)?)
    }

    pub fn s_exact(&self, lambda: f64) -> Result<SMatrix, PipelineError> {
        let momenta = self.momenta(lambda)?;
        let dnf = self.intermediate_dn(lambda)?;
        Ok(s_exact(&dnf.matrix, lambda, &momenta)?)
    }

    pub fn s_oracle(&self, lambda: f64) -> Result<SMatrix, PipelineError> {
        Ok(mode_match_smatrix(&self.data, &self.basis, lambda)?)
    }

    pub fn s_approx(&self, model: &SinglePoleModel, lambda: f64) -> Result<SMatrix, PipelineError> {
        let momenta = self.momenta(lambda)?;
        Ok(s_approx(model, lambda, &momenta)?)
    }

    /// Retained eigen-groups strictly inside the open band, ascending.
    pub fn in_band_groups(&self) -> Vec<BandGroup> {
        let (lo, hi) = self.band();
        self.data
            .groups_in(lo, hi)
            .into_iter()
            .map(|(group, lambda, members)| BandGroup {
                group,
                lambda,
                labels: members
                    .iter()
                    .map(|&i| self.data.pairs[i].label())
                    .collect(),
                spacing: self.data.spacing(group),
                members,
            })
            .collect()
    }

    /// Fits the single-pole model of eigen-group `group` (an id from
    /// [`Junction::in_band_groups`]).
    pub fn fit_resonance(
        &self,
        group: usize,
        selector: GroupSelector,
    ) -> Result<SinglePoleModel, PipelineError> {
        let members = self.data.group_members(group);
        let selection = selector.select(&members);
        if members.is_empty() || selection.is_empty() {
            return Err(PipelineError::NoGroup { group });
        }
        Ok(single_pole_fit(&selection, &self.data, &self.basis)?)
    }

    /// The lowest in-band group, whole.
    pub fn default_resonance(&self) -> Result<SinglePoleModel, PipelineError> {
        let group = self
            .in_band_groups()
            .first()
            .map(|g| g.group)
            .ok_or(PipelineError::NoResonance)?;
        self.fit_resonance(group, GroupSelector::Full)
    }

    pub fn validity_report(&self, model: &SinglePoleModel) -> ValidityReport {
        validity_report(&self.spec, model, &self.data, &self.basis)
    }

    fn guard(&self, lambda: f64, method: Method) -> Option<SweepFlag> {
        let (lo, hi) = self.band();
        if !(lambda > lo && lambda < hi) {
            return Some(SweepFlag::OutsideBand);
        }
        if self
            .basis
            .modes()
            .iter()
            .any(|m| (lambda - m.threshold).abs() < THRESHOLD_GUARD)
        {
            return Some(SweepFlag::NearThreshold);
        }
        if method == Method::Exact
            && self
                .data
                .pairs
                .iter()
                .any(|p| (lambda - p.lambda).abs() < EIGENVALUE_GUARD)
        {
            return Some(SweepFlag::NearEigenvalue);
        }
        None
    }

    /// One sweep point. `model` is required for [`Method::SinglePole`].
    pub fn sweep_point(
        &self,
        lambda: f64,
        method: Method,
        model: Option<&SinglePoleModel>,
    ) -> SweepRow {
        if let Some(flag) = self.guard(lambda, method) {
            return SweepRow {
                lambda,
                result: Err(flag),
            };
        }
        let result = match (method, model) {
            (Method::SinglePole, Some(m)) => self.s_approx(m, lambda),
            (Method::SinglePole, None) => Err(PipelineError::NoResonance),
            (Method::Exact, _) => self.s_exact(lambda),
        };
        let result = result.map_err(|e| match e {
            PipelineError::Dn(DnError::SingularD { .. }) => SweepFlag::SingularClosedBlock,
            PipelineError::Dn(DnError::Pole { .. }) => SweepFlag::NearEigenvalue,
            PipelineError::Channel(_) => SweepFlag::OutsideBand,
            _ => SweepFlag::SingularDenominator,
        });
        SweepRow { lambda, result }
    }

    /// Sequential sweep over `grid`; the single-pole method fits the lowest
    /// in-band group first.
    pub fn sweep(&self, grid: &[f64], method: Method) -> Result<SweepResult, PipelineError> {
        let model = match method {
            Method::SinglePole => Some(self.default_resonance()?),
            Method::Exact => None,
        };
        let rows = grid
            .iter()
            .map(|&l| self.sweep_point(l, method, model.as_ref()))
            .collect();
        Ok(SweepResult { method, rows })
    }
}

/// `steps` equally spaced points from `lo` to `hi` inclusive.
pub fn linear_grid(lo: f64, hi: f64, steps: usize) -> Vec<f64> {
    match steps {
        0 => Vec::new(),
        1 => alloc::vec![lo],
        _ => (0..steps)
            .map(|k| lo + (hi - lo) * k as f64 / (steps - 1) as f64)
            .collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{builtin_example, symmetric_example};

    #[test]
    fn example_groups() {
        let j = Junction::prepare(&builtin_example()).unwrap();
        let groups = j.in_band_groups();
        let lambdas: Vec<f64> = groups.iter().map(|g| g.lambda).collect();
        assert_eq!(lambdas, [5.0, 8.0, 10.0, 13.0]);
        assert_eq!(groups[0].labels, [(1, 2), (2, 1)]);
        assert_eq!(groups[0].spacing, 3.0);
    }

    #[test]
    fn invalid_spec_is_rejected() {
        let mut spec = builtin_example();
        spec.well.width_a = -1.0;
        assert!(matches!(
            Junction::prepare(&spec),
            Err(PipelineError::Invalid(_))
        ));
    }

    #[test]
    fn sweep_flags_and_defects() {
        let j = Junction::prepare(&builtin_example()).unwrap();
        let grid = [3.0, 4.0, 5.0, 4.5, 9.0, 16.0];
        let exact = j.sweep(&grid, Method::Exact).unwrap();
        let flags: Vec<Option<SweepFlag>> = exact
            .rows
            .iter()
            .map(|r| r.result.as_ref().err().copied())
            .collect();
        assert_eq!(flags[0], Some(SweepFlag::OutsideBand));
        assert_eq!(flags[1], Some(SweepFlag::OutsideBand));
        assert_eq!(flags[2], Some(SweepFlag::NearEigenvalue));
        assert_eq!(flags[5], Some(SweepFlag::OutsideBand));
        assert!(exact.max_unitarity_defect() <= 1e-10);
        let pole = j.sweep(&grid, Method::SinglePole).unwrap();
        assert!(pole.rows[2].smatrix().is_some());
        assert!(pole.max_unitarity_defect() <= 1e-12);
        assert!(j.sweep(&[], Method::Exact).unwrap().rows.is_empty());
    }

    #[test]
    fn symmetric_junction_prepares() {
        let j = Junction::prepare(&symmetric_example()).unwrap();
        assert!(!j.in_band_groups().is_empty());
        let model = j.default_resonance().unwrap();
        assert!(model.lambda0_f < model.lambda0);
        let report = j.validity_report(&model);
        assert!(report.rho0 > 0.0);
    }

    #[test]
    fn grids() {
        assert!(linear_grid(0.0, 1.0, 0).is_empty());
        assert_eq!(linear_grid(2.0, 3.0, 1), [2.0]);
        assert_eq!(linear_grid(0.0, 1.0, 5), [0.0, 0.25, 0.5, 0.75, 1.0]);
    }
}
