//! Transverse wire modes, thresholds and the open/closed channel split.
//!
//! Channel `(s, l)` of wire `s` has the transverse profile
//! `e_s^l(y) = σ √(2/δ) sin(π l y / δ)`, with `y` measured from the start of
//! the attachment segment along the increasing side coordinate and the fixed
//! orientation sign `σ = PROFILE_SIGN`. The l = 1 profiles of all wires span
//! the open space `E+`; modes `2 ≤ l ≤ L_max` span the closed space `E−`.
//!
//! Channel vectors are ordered open block first (one entry per wire), then the
//! closed block wire-major: `(1,2), …, (1,L_max), (2,2), …`.

use alloc::vec::Vec;
use core::f64::consts::PI;
use nalgebra::DVector;
use num_complex::Complex64;

use crate::model::{JunctionSpec, Side, WireSpec};
use crate::quadrature::CompositeRule;

/// Orientation sign of every transverse profile. With `-1` the l = 1 profile
/// is negative on its segment, which makes the T-junction profiles read
/// `(2/√π) sin 2ξ2`, `(2/√π) cos 2ξ1` and `(2/√π) cos 2ξ2`.
pub const PROFILE_SIGN: f64 = -1.0;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ChannelError {
    #[error("empty open band: first thresholds reach {lower}, second thresholds start at {upper}")]
    EmptyBand { lower: f64, upper: f64 },
    #[error("λ = {lambda} is not below the threshold {threshold} of closed channel ({wire}, {mode}); raise closed_modes")]
    AboveClosedThreshold {
        lambda: f64,
        wire: usize,
        mode: usize,
        threshold: f64,
    },
    #[error("λ = {lambda} is not above the first threshold {threshold} of wire {wire}")]
    BelowOpenThreshold {
        lambda: f64,
        wire: usize,
        threshold: f64,
    },
    #[error("junction has no wires")]
    NoWires,
}

/// Channel momentum: `+√(λ − τ)` above threshold, `+i√(τ − λ)` below.
pub fn momentum(lambda: f64, threshold: f64) -> Complex64 {
    let d = lambda - threshold;
    if d >= 0.0 {
        Complex64::new(libm::sqrt(d), 0.0)
    } else {
        Complex64::new(0.0, libm::sqrt(-d))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TransverseMode {
    /// 0-based wire position.
    pub wire: usize,
    /// Mode number `l ≥ 1`.
    pub mode: usize,
    pub threshold: f64,
    pub width: f64,
    /// Segment start along the side coordinate.
    pub origin: f64,
    pub orientation: f64,
}

impl TransverseMode {
    pub fn wavenumber(&self) -> f64 {
        PI * self.mode as f64 / self.width
    }

    /// Profile value at side coordinate `t` (zero off the segment).
    pub fn profile(&self, t: f64) -> f64 {
        let y = t - self.origin;
        if !(0.0..=self.width).contains(&y) {
            return 0.0;
        }
        self.orientation * libm::sqrt(2.0 / self.width) * libm::sin(self.wavenumber() * y)
    }

    pub fn segment(&self) -> (f64, f64) {
        (self.origin, self.origin + self.width)
    }
}

/// `a · sin(ω t + φ)` in the side coordinate `t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrigTerm {
    pub amplitude: f64,
    pub frequency: f64,
    pub phase: f64,
}

impl TrigTerm {
    pub fn eval(&self, t: f64) -> f64 {
        self.amplitude * libm::sin(self.frequency * t + self.phase)
    }
}

/// A function on a segment, for [`ChannelBasis::trace_decompose`].
pub enum TraceFunction<'a> {
    /// Sum of sine terms; decomposed in closed form.
    Trig(&'a [TrigTerm]),
    /// Anything else; decomposed by quadrature.
    General(&'a dyn Fn(f64) -> f64),
}

/// `∫_0^w cos(c u + φ) du`, stable at `c → 0`.
fn cos_integral(c: f64, phase: f64, w: f64) -> f64 {
    let x = 0.5 * c * w;
    let sinc = if x.abs() < 1e-8 {
        1.0 - x * x / 6.0
    } else {
        libm::sin(x) / x
    };
    w * libm::cos(x + phase) * sinc
}

/// Closed-form `∫_segment term(t) · e(t) dt`.
pub fn trig_overlap(term: &TrigTerm, mode: &TransverseMode) -> f64 {
    let k = mode.wavenumber();
    let w = mode.width;
    let phase = term.frequency * mode.origin + term.phase;
    let s = 0.5
        * (cos_integral(term.frequency - k, phase, w) - cos_integral(term.frequency + k, phase, w));
    term.amplitude * mode.orientation * libm::sqrt(2.0 / w) * s
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChannelBasis {
    wires: Vec<WireSpec>,
    l_max: usize,
    modes: Vec<TransverseMode>,
    band: (f64, f64),
    quadrature_points: usize,
}

impl ChannelBasis {
    /// Builds the channel basis for a (validated) spec.
    pub fn new(spec: &JunctionSpec) -> Result<Self, ChannelError> {
        if spec.wires.is_empty() {
            return Err(ChannelError::NoWires);
        }
        let l_max = spec.solver.closed_modes.max(2);
        let n = spec.wires.len();
        let mode = |s: usize, l: usize| {
            let w = &spec.wires[s];
            TransverseMode {
                wire: s,
                mode: l,
                threshold: w.threshold(l),
                width: w.width,
                origin: w.offset,
                orientation: PROFILE_SIGN,
            }
        };
        let mut modes = Vec::with_capacity(n * l_max);
        modes.extend((0..n).map(|s| mode(s, 1)));
        for s in 0..n {
            modes.extend((2..=l_max).map(|l| mode(s, l)));
        }
        let lower = spec
            .wires
            .iter()
            .map(|w| w.threshold(1))
            .fold(f64::NEG_INFINITY, f64::max);
        let upper = spec
            .wires
            .iter()
            .map(|w| w.threshold(2))
            .fold(f64::INFINITY, f64::min);
        if !(lower < upper) {
            return Err(ChannelError::EmptyBand { lower, upper });
        }
        Ok(Self {
            wires: spec.wires.clone(),
            l_max,
            modes,
            band: (lower, upper),
            quadrature_points: spec.solver.quadrature_points.max(16),
        })
    }

    pub fn n_wires(&self) -> usize {
        self.wires.len()
    }

    pub fn n_open(&self) -> usize {
        self.wires.len()
    }

    pub fn n_closed(&self) -> usize {
        self.wires.len() * (self.l_max - 1)
    }

    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    pub fn l_max(&self) -> usize {
        self.l_max
    }

    pub fn wires(&self) -> &[WireSpec] {
        &self.wires
    }

    pub fn modes(&self) -> &[TransverseMode] {
        &self.modes
    }

    /// `(max_s τ_{s,1}, min_s τ_{s,2})`.
    pub fn band(&self) -> (f64, f64) {
        self.band
    }

    pub fn quadrature_points(&self) -> usize {
        self.quadrature_points
    }

    /// Global index of channel `(wire, mode)`; `wire` 0-based, `mode` 1-based.
    pub fn index(&self, wire: usize, mode: usize) -> usize {
        debug_assert!(wire < self.n_wires() && (1..=self.l_max).contains(&mode));
        if mode == 1 {
            wire
        } else {
            self.n_open() + wire * (self.l_max - 1) + (mode - 2)
        }
    }

    /// Global indices of the channels of one wire, in increasing `l`.
    pub fn wire_indices(&self, wire: usize) -> impl Iterator<Item = usize> + '_ {
        (1..=self.l_max).map(move |l| self.index(wire, l))
    }

    pub fn side_of(&self, wire: usize) -> Side {
        self.wires[wire].side
    }

    /// Open-channel momenta `p_s = √(λ − τ_{s,1})`, one per wire.
    pub fn open_momenta(&self, lambda: f64) -> Result<Vec<f64>, ChannelError> {
        self.modes[..self.n_open()]
            .iter()
            .map(|m| {
                if lambda > m.threshold {
                    Ok(libm::sqrt(lambda - m.threshold))
                } else {
                    Err(ChannelError::BelowOpenThreshold {
                        lambda,
                        wire: m.wire + 1,
                        threshold: m.threshold,
                    })
                }
            })
            .collect()
    }

    /// Diagonal of the closed-channel symbol: `κ_{s,l} = √(τ_{s,l} − λ) > 0`.
    pub fn k_minus(&self, lambda: f64) -> Result<DVector<f64>, ChannelError> {
        let closed = &self.modes[self.n_open()..];
        let mut out = DVector::zeros(closed.len());
        for (i, m) in closed.iter().enumerate() {
            if lambda >= m.threshold {
                return Err(ChannelError::AboveClosedThreshold {
                    lambda,
                    wire: m.wire + 1,
                    mode: m.mode,
                    threshold: m.threshold,
                });
            }
            out[i] = libm::sqrt(m.threshold - lambda);
        }
        Ok(out)
    }

    /// Coefficients `c_l = ∫_segment f e_s^l`, `l = 1..=L_max`, for wire `wire` (0-based).
    pub fn trace_decompose(&self, wire: usize, f: &TraceFunction<'_>) -> Vec<f64> {
        let modes: Vec<&TransverseMode> = self.wire_indices(wire).map(|i| &self.modes[i]).collect();
        match f {
            TraceFunction::Trig(terms) => modes
                .iter()
                .map(|m| terms.iter().map(|t| trig_overlap(t, m)).sum())
                .collect(),
            TraceFunction::General(g) => {
                let (lo, hi) = modes[0].segment();
                let rule = CompositeRule::new(lo, hi, self.quadrature_points);
                modes
                    .iter()
                    .map(|m| rule.integrate(|t| g(t) * m.profile(t)))
                    .collect()
            }
        }
    }
}
