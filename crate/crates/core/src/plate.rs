//! Simply supported thin plate carrying a point mass.
//!
//! The modal response of mode `(m, n)` to an excitation with spatial sine
//! coefficient `F(m, n, ω)` is
//!
//! ```text
//! W(m, n, ω) = F / ( -ω² (ρ + m0 sin(mπx0/a) sin(nπy0/b)) + D ω_mn² )
//! ```
//!
//! with `ω_mn = sqrt(D/ρ) ((mπ/a)² + (nπ/b)²)`. Its first-order expansion in
//! the item mass `m0` is the linear model the estimator relies on. A viscous
//! term `2jζω sqrt(ρD) ω_mn` is added to the denominator when the plate's
//! damping ratio is non-zero; the oracle comparisons use `ζ = 0`.
//!
//! The static `m0 g` load only shifts the zero-frequency deflection and is not
//! part of the dynamic spectrum.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const STANDARD_GRAVITY: f64 = 9.80665;

/// Relative singularity tolerance on the modal denominator.
pub const DEFAULT_SINGULARITY_TOL: f64 = 1e-9;

/// How the point mass enters the modal mass term.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MassCoupling {
    /// `ρ + m0·sin·sin`, the form used throughout the estimator theory.
    #[default]
    Printed,
    /// `ρ + (4 m0 / ab)·sin·sin`, normalizing the point mass by the modal area.
    AreaNormalized,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PlateModel {
    /// Length along x, m.
    pub length_a: f64,
    /// Width along y, m.
    pub width_b: f64,
    /// Flexural rigidity D, N·m.
    pub flexural_rigidity: f64,
    /// Mass per unit area ρ, kg/m².
    pub areal_density: f64,
    pub poisson_ratio: f64,
    /// Per-mode viscous damping ratio ζ.
    pub damping_ratio: f64,
    pub gravity: f64,
    #[serde(default)]
    pub mass_coupling: MassCoupling,
    #[serde(default = "default_tol")]
    pub singularity_tol: f64,
}

fn default_tol() -> f64 {
    DEFAULT_SINGULARITY_TOL
}

impl Default for PlateModel {
    /// 91.44 cm × 46.72 cm gondola shelf.
    fn default() -> Self {
        Self {
            length_a: 0.9144,
            width_b: 0.4672,
            flexural_rigidity: 100.0,
            areal_density: 20.0,
            poisson_ratio: 0.3,
            damping_ratio: 0.02,
            gravity: STANDARD_GRAVITY,
            mass_coupling: MassCoupling::Printed,
            singularity_tol: DEFAULT_SINGULARITY_TOL,
        }
    }
}

impl PlateModel {
    pub fn new(
        length_a: f64,
        width_b: f64,
        flexural_rigidity: f64,
        areal_density: f64,
        poisson_ratio: f64,
        damping_ratio: f64,
    ) -> Result<Self> {
        let plate = Self {
            length_a,
            width_b,
            flexural_rigidity,
            areal_density,
            poisson_ratio,
            damping_ratio,
            ..Self::default()
        };
        plate.validate()?;
        Ok(plate)
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("length_a", self.length_a),
            ("width_b", self.width_b),
            ("flexural_rigidity", self.flexural_rigidity),
            ("areal_density", self.areal_density),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::invalid(format!("{name} must be > 0, got {v}")));
            }
        }
        if !(0.0..0.5).contains(&self.poisson_ratio) {
            return Err(Error::invalid(format!(
                "poisson_ratio must be in [0, 0.5), got {}",
                self.poisson_ratio
            )));
        }
        if !(0.0..1.0).contains(&self.damping_ratio) {
            return Err(Error::invalid(format!(
                "damping_ratio must be in [0, 1), got {}",
                self.damping_ratio
            )));
        }
        if !(self.singularity_tol >= 0.0) {
            return Err(Error::invalid("singularity_tol must be >= 0"));
        }
        Ok(())
    }

    /// Same plate with ζ = 0.
    pub fn undamped(&self) -> Self {
        Self {
            damping_ratio: 0.0,
            ..*self
        }
    }

    pub fn area(&self) -> f64 {
        self.length_a * self.width_b
    }

    pub fn contains(&self, x: f64, y: f64) -> bool {
        (0.0..=self.length_a).contains(&x) && (0.0..=self.width_b).contains(&y)
    }

    pub fn check_inside(&self, x: f64, y: f64) -> Result<()> {
        if self.contains(x, y) {
            Ok(())
        } else {
            Err(Error::OutOfBounds {
                x,
                y,
                a: self.length_a,
                b: self.width_b,
            })
        }
    }

    /// `sin(mπx/a)·sin(nπy/b)`.
    pub fn mode_shape(&self, idx: ModalIndex, x: f64, y: f64) -> f64 {
        (idx.m as f64 * PI * x / self.length_a).sin() * (idx.n as f64 * PI * y / self.width_b).sin()
    }

    /// `(mπ/a)² + (nπ/b)²`.
    pub fn wavenumber_sq(&self, idx: ModalIndex) -> f64 {
        let km = idx.m as f64 * PI / self.length_a;
        let kn = idx.n as f64 * PI / self.width_b;
        km * km + kn * kn
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ModalIndex {
    pub m: u32,
    pub n: u32,
}

impl ModalIndex {
    pub fn new(m: u32, n: u32) -> Result<Self> {
        if m == 0 || n == 0 {
            return Err(Error::invalid(format!("modal index ({m},{n}) must be >= 1")));
        }
        Ok(Self { m, n })
    }
}

/// Highest mode numbers kept in a modal sum.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Truncation {
    pub max_m: u32,
    pub max_n: u32,
}

impl Default for Truncation {
    fn default() -> Self {
        Self {
            max_m: 20,
            max_n: 20,
        }
    }
}

impl Truncation {
    pub fn new(max_m: u32, max_n: u32) -> Result<Self> {
        if max_m == 0 || max_n == 0 {
            return Err(Error::invalid("truncation must be at least 1x1"));
        }
        Ok(Self { max_m, max_n })
    }

    pub fn doubled(self) -> Self {
        Self {
            max_m: self.max_m * 2,
            max_n: self.max_n * 2,
        }
    }

    pub fn indices(self) -> impl Iterator<Item = ModalIndex> {
        (1..=self.max_m).flat_map(move |m| (1..=self.max_n).map(move |n| ModalIndex { m, n }))
    }
}

/// Item idealized as a point mass.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointLoad {
    /// kg
    pub mass: f64,
    pub x: f64,
    pub y: f64,
}

impl PointLoad {
    pub fn new(plate: &PlateModel, mass: f64, x: f64, y: f64) -> Result<Self> {
        if !(mass.is_finite() && mass >= 0.0) {
            return Err(Error::invalid(format!("mass must be >= 0, got {mass}")));
        }
        plate.check_inside(x, y)?;
        Ok(Self { mass, x, y })
    }

    pub fn with_mass(self, mass: f64) -> Self {
        Self { mass, ..self }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SensorPosition {
    pub x: f64,
    pub y: f64,
}

impl SensorPosition {
    pub fn new(plate: &PlateModel, x: f64, y: f64) -> Result<Self> {
        plate.check_inside(x, y)?;
        Ok(Self { x, y })
    }
}

/// Time history of the force applied at a point source.
#[derive(Clone, Debug, PartialEq)]
pub enum ForceWaveform {
    /// Dirac impulse: flat spectrum of the given amplitude.
    Impulse { amplitude: f64 },
    /// Sampled force, first sample at `start_s`.
    Sampled {
        samples: Vec<f64>,
        sampling_rate_hz: f64,
        start_s: f64,
    },
}

impl ForceWaveform {
    /// Continuous-time Fourier transform, approximated by the DTFT of the
    /// samples scaled by the sample period.
    pub fn spectrum(&self, omega: f64) -> Complex64 {
        match self {
            ForceWaveform::Impulse { amplitude } => Complex64::new(*amplitude, 0.0),
            ForceWaveform::Sampled {
                samples,
                sampling_rate_hz,
                start_s,
            } => {
                let dt = 1.0 / sampling_rate_hz;
                let step = Complex64::from_polar(1.0, -omega * dt);
                let mut phasor = Complex64::from_polar(1.0, -omega * start_s);
                let mut acc = Complex64::new(0.0, 0.0);
                for &s in samples {
                    if s != 0.0 {
                        acc += phasor * s;
                    }
                    phasor *= step;
                }
                acc * dt
            }
        }
    }

    pub fn scaled(&self, k: f64) -> Self {
        match self {
            ForceWaveform::Impulse { amplitude } => ForceWaveform::Impulse {
                amplitude: amplitude * k,
            },
            ForceWaveform::Sampled {
                samples,
                sampling_rate_hz,
                start_s,
            } => ForceWaveform::Sampled {
                samples: samples.iter().map(|s| s * k).collect(),
                sampling_rate_hz: *sampling_rate_hz,
                start_s: *start_s,
            },
        }
    }
}

/// Excitation term `F(m, n, ω)` of the modal equation.
#[derive(Clone, Debug, PartialEq)]
pub enum ExcitationSpec {
    /// The same spatial coefficient for every mode and frequency.
    Uniform(Complex64),
    /// Force concentrated at `(x, y)`.
    PointSource {
        x: f64,
        y: f64,
        waveform: ForceWaveform,
    },
}

impl ExcitationSpec {
    pub fn unit_impulse_at(x: f64, y: f64) -> Self {
        ExcitationSpec::PointSource {
            x,
            y,
            waveform: ForceWaveform::Impulse { amplitude: 1.0 },
        }
    }

    pub fn validate(&self, plate: &PlateModel) -> Result<()> {
        match self {
            ExcitationSpec::Uniform(c) => {
                if !(c.re.is_finite() && c.im.is_finite()) {
                    return Err(Error::invalid("excitation coefficient not finite"));
                }
            }
            ExcitationSpec::PointSource { x, y, waveform } => {
                plate.check_inside(*x, *y)?;
                let finite = match waveform {
                    ForceWaveform::Impulse { amplitude } => amplitude.is_finite(),
                    ForceWaveform::Sampled {
                        samples,
                        sampling_rate_hz,
                        start_s,
                    } => {
                        samples.iter().all(|s| s.is_finite())
                            && *sampling_rate_hz > 0.0
                            && start_s.is_finite()
                    }
                };
                if !finite {
                    return Err(Error::invalid("force waveform not finite"));
                }
            }
        }
        Ok(())
    }

    /// Mode-dependent, frequency-independent factor.
    pub fn spatial_weight(&self, plate: &PlateModel, idx: ModalIndex) -> f64 {
        match self {
            ExcitationSpec::Uniform(_) => 1.0,
            ExcitationSpec::PointSource { x, y, .. } => {
                4.0 / plate.area() * plate.mode_shape(idx, *x, *y)
            }
        }
    }

    /// Frequency-dependent, mode-independent factor.
    pub fn temporal(&self, omega: f64) -> Complex64 {
        match self {
            ExcitationSpec::Uniform(c) => *c,
            ExcitationSpec::PointSource { waveform, .. } => waveform.spectrum(omega),
        }
    }

    pub fn coefficient(&self, plate: &PlateModel, idx: ModalIndex, omega: f64) -> Complex64 {
        self.temporal(omega) * self.spatial_weight(plate, idx)
    }
}

/// Natural angular frequency ω_mn = sqrt(D/ρ)((mπ/a)² + (nπ/b)²), rad/s.
pub fn modal_frequency(plate: &PlateModel, idx: ModalIndex) -> f64 {
    (plate.flexural_rigidity / plate.areal_density).sqrt() * plate.wavenumber_sq(idx)
}

/// Frequency at which the unloaded, undamped denominator `-ω²ρ + D ω_mn²`
/// vanishes: `sqrt(D/ρ)·ω_mn`.
pub fn resonant_frequency(plate: &PlateModel, idx: ModalIndex) -> f64 {
    (plate.flexural_rigidity / plate.areal_density).sqrt() * modal_frequency(plate, idx)
}

/// Peak of the damped single-mode magnitude response, `Ω sqrt(1 - 2ζ²)`.
pub fn damped_peak_frequency(plate: &PlateModel, idx: ModalIndex) -> f64 {
    let z = plate.damping_ratio;
    resonant_frequency(plate, idx) * (1.0 - 2.0 * z * z).max(0.0).sqrt()
}

/// Added mass term of mode `idx` for `load`, in the units of ρ.
pub fn load_coupling(plate: &PlateModel, load: &PointLoad, idx: ModalIndex) -> f64 {
    let shape = plate.mode_shape(idx, load.x, load.y);
    match plate.mass_coupling {
        MassCoupling::Printed => load.mass * shape,
        MassCoupling::AreaNormalized => 4.0 * load.mass / plate.area() * shape,
    }
}

/// Per-mode constants of the modal denominator.
#[derive(Clone, Copy, Debug)]
struct ModalTerm {
    idx: ModalIndex,
    /// `D ω_mn²`
    stiffness: f64,
    /// `2ζ sqrt(ρD) ω_mn`
    damping: f64,
}

impl ModalTerm {
    fn new(plate: &PlateModel, idx: ModalIndex) -> Self {
        let w = modal_frequency(plate, idx);
        Self {
            idx,
            stiffness: plate.flexural_rigidity * w * w,
            damping: 2.0
                * plate.damping_ratio
                * (plate.areal_density * plate.flexural_rigidity).sqrt()
                * w,
        }
    }

    fn denominator(&self, mass: f64, omega: f64, tol: f64) -> Result<Complex64> {
        let inertia = omega * omega * mass;
        let den = Complex64::new(self.stiffness - inertia, omega * self.damping);
        let scale = inertia.abs() + self.stiffness;
        if den.norm() <= tol * scale {
            return Err(Error::Resonance {
                m: self.idx.m,
                n: self.idx.n,
                omega,
                magnitude: den.norm(),
            });
        }
        Ok(den)
    }
}

/// Exact modal amplitude of mode `idx` at angular frequency `omega`.
pub fn exact_spectrum(
    plate: &PlateModel,
    load: &PointLoad,
    excitation: &ExcitationSpec,
    idx: ModalIndex,
    omega: f64,
) -> Result<Complex64> {
    let term = ModalTerm::new(plate, idx);
    let mass = plate.areal_density + load_coupling(plate, load, idx);
    let den = term.denominator(mass, omega, plate.singularity_tol)?;
    Ok(excitation.coefficient(plate, idx, omega) / den)
}

/// First-order expansion of [`exact_spectrum`] in the item mass about `m0 = 0`.
pub fn linearized_spectrum(
    plate: &PlateModel,
    load: &PointLoad,
    excitation: &ExcitationSpec,
    idx: ModalIndex,
    omega: f64,
) -> Result<Complex64> {
    let term = ModalTerm::new(plate, idx);
    let d0 = term.denominator(plate.areal_density, omega, plate.singularity_tol)?;
    let base = excitation.coefficient(plate, idx, omega) / d0;
    let slope = omega * omega * load_coupling(plate, load, idx) / d0;
    Ok(base * (1.0 + slope))
}

/// Modal superposition evaluated at one sensor for a fixed plate, load and
/// excitation geometry. Precomputes the per-mode constants so that many
/// frequencies can be evaluated cheaply.
#[derive(Clone, Debug)]
pub struct ModalSuperposition {
    terms: Vec<(ModalTerm, f64, f64)>,
    tol: f64,
}

impl ModalSuperposition {
    pub fn new(
        plate: &PlateModel,
        load: &PointLoad,
        excitation: &ExcitationSpec,
        sensor: &SensorPosition,
        truncation: Truncation,
    ) -> Self {
        let terms = truncation
            .indices()
            .map(|idx| {
                let mass = plate.areal_density + load_coupling(plate, load, idx);
                let weight = excitation.spatial_weight(plate, idx)
                    * plate.mode_shape(idx, sensor.x, sensor.y);
                (ModalTerm::new(plate, idx), mass, weight)
            })
            .collect();
        Self {
            terms,
            tol: plate.singularity_tol,
        }
    }

    /// Response at `omega` for an excitation whose temporal factor is `temporal`.
    pub fn eval(&self, omega: f64, temporal: Complex64) -> Result<Complex64> {
        let mut acc = Complex64::new(0.0, 0.0);
        for (term, mass, weight) in &self.terms {
            let den = term.denominator(*mass, omega, self.tol)?;
            acc += *weight / den;
        }
        Ok(acc * temporal)
    }
}

/// Displacement spectrum at `sensor`: sum of modal amplitudes times mode
/// shapes up to `truncation`.
pub fn sensor_spectrum(
    plate: &PlateModel,
    load: &PointLoad,
    excitation: &ExcitationSpec,
    sensor: &SensorPosition,
    omega: f64,
    truncation: Truncation,
) -> Result<Complex64> {
    ModalSuperposition::new(plate, load, excitation, sensor, truncation)
        .eval(omega, excitation.temporal(omega))
}

/// True when `omega` is at least `margin` (relative) away from the unloaded
/// resonance of every mode up to `truncation`.
pub fn is_off_resonance(plate: &PlateModel, omega: f64, truncation: Truncation, margin: f64) -> bool {
    truncation.indices().all(|idx| {
        let w = resonant_frequency(plate, idx);
        (omega - w).abs() > margin * w
    })
}
