//! Probe families standing in for "all `v`" in the operator-norm checks.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::littlewood_paley::shell_weight;
use crate::spectral::{Grid, SpectralField};
use crate::{par, Error, Result};

/// Boundary magnitude (relative to the peak) a probe may have.
pub const PROBE_BOUNDARY_TOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ProbeFamilySpec {
    /// Widths `w` of `e^{−|x|²/(2w²)}`.
    pub gaussian_widths: Vec<f64>,
    /// Carrier frequencies `c` of `e^{i c x₁} e^{−|x|²/(2w²)}`.
    pub carriers: Vec<f64>,
    /// Envelope width of the modulated probes.
    pub carrier_width: f64,
    /// Dyadic levels of the random-phase shell probes.
    pub shells: Vec<usize>,
    /// Seed of the random shell phases; experiment configs set it from their top-level seed.
    #[serde(skip)]
    pub seed: u64,
}

impl Default for ProbeFamilySpec {
    fn default() -> Self {
        Self {
            gaussian_widths: vec![0.25, 0.5, 1.0, 2.0],
            carriers: vec![1.0, 2.0, 4.0, 8.0],
            carrier_width: 1.0,
            shells: vec![1, 2, 3, 4],
            seed: 0x0da3_9a7e_5eed_0001,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ProbeKind {
    Gaussian { width: f64 },
    Modulated { width: f64, carrier: f64 },
    Shell { level: usize },
}

impl ProbeKind {
    pub fn label(&self) -> String {
        match self {
            Self::Gaussian { width } => format!("gauss-w{width}"),
            Self::Modulated { carrier, .. } => format!("mod-c{carrier}"),
            Self::Shell { level } => format!("shell-j{level}"),
        }
    }
}

#[derive(Clone, Debug)]
pub struct Probe {
    pub label: String,
    pub kind: ProbeKind,
    pub field: SpectralField,
}

impl Probe {
    /// `x ↦ v(t·x)`: closed form for the Gaussian kinds, spectral interpolation otherwise.
    pub fn dilate(&self, t: f64) -> Result<SpectralField> {
        if !(t > 0.0 && t.is_finite()) {
            return Err(Error::InvalidParameter(format!("dilation factor {t}")));
        }
        let grid = self.field.grid();
        let out = match self.kind {
            ProbeKind::Gaussian { width } => gaussian_field(grid, width / t),
            ProbeKind::Modulated { width, carrier } => modulated_gaussian_field(grid, width / t, carrier * t),
            ProbeKind::Shell { .. } => return self.field.dilate(t),
        };
        let ratio = out.boundary_ratio();
        if ratio > crate::spectral::DILATION_BOUNDARY_TOL {
            return Err(Error::DilationOutsideBox { factor: t, ratio });
        }
        Ok(out)
    }
}

/// `e^{−|x|²/(2w²)}`.
pub fn gaussian_field(grid: &Grid, width: f64) -> SpectralField {
    let a = 0.5 / (width * width);
    SpectralField::from_real_fn(grid, |x| (-a * (x[0] * x[0] + x[1] * x[1] + x[2] * x[2])).exp())
}

/// `e^{i c x₁} e^{−|x|²/(2w²)}`.
pub fn modulated_gaussian_field(grid: &Grid, width: f64, carrier: f64) -> SpectralField {
    let a = 0.5 / (width * width);
    SpectralField::from_fn(grid, |x| {
        Complex64::from_polar((-a * (x[0] * x[0] + x[1] * x[1] + x[2] * x[2])).exp(), carrier * x[0])
    })
}

/// Width of the spatial window applied to random shell probes.
pub fn shell_window_width(grid: &Grid) -> f64 {
    (grid.length() / 16.0).min(4.0)
}

/// Spectrum `φ_j · e^{iθ}` with seeded uniform phases, windowed by a Gaussian
/// of width [`shell_window_width`] and scaled to unit peak.
pub fn shell_random_field(grid: &Grid, level: usize, seed: u64) -> Result<SpectralField> {
    let needed = 2f64.powi(level as i32 + 1);
    if grid.nyquist() < needed {
        return Err(Error::UnresolvedShell {
            level,
            needed,
            nyquist: grid.nyquist(),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add((level as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15)));
    let radii = grid.radii();
    let spectrum: Vec<Complex64> = radii
        .iter()
        .map(|&r| {
            let theta = rng.gen::<f64>() * 2.0 * PI;
            Complex64::from_polar(shell_weight(level, r), theta)
        })
        .collect();
    let raw = SpectralField::from_spectrum(grid, spectrum)?;
    let s = shell_window_width(grid);
    let a = 0.5 / (s * s);
    let mut values = raw.into_values();
    par::fill_indexed_in_place(&mut values, |i, z| {
        let x = grid.point(i);
        z * (-a * (x[0] * x[0] + x[1] * x[1] + x[2] * x[2])).exp()
    });
    let windowed = SpectralField::from_values(grid, values)?;
    let peak = windowed.sup_norm();
    if peak == 0.0 {
        return Err(Error::ZeroProbe(format!("shell-j{level}")));
    }
    Ok(windowed.scaled(Complex64::new(1.0 / peak, 0.0)))
}

/// A probe family on a grid; members are materialised on demand so that
/// large grids never hold the whole family in memory.
#[derive(Clone, Debug)]
pub struct ProbeFamily {
    grid: Grid,
    spec: ProbeFamilySpec,
    kinds: Vec<ProbeKind>,
}

impl ProbeFamily {
    pub fn new(grid: &Grid, spec: &ProbeFamilySpec) -> Self {
        let mut kinds: Vec<ProbeKind> = spec
            .gaussian_widths
            .iter()
            .map(|&width| ProbeKind::Gaussian { width })
            .collect();
        kinds.extend(spec.carriers.iter().map(|&carrier| ProbeKind::Modulated {
            width: spec.carrier_width,
            carrier,
        }));
        kinds.extend(spec.shells.iter().map(|&level| ProbeKind::Shell { level }));
        Self {
            grid: grid.clone(),
            spec: spec.clone(),
            kinds,
        }
    }

    /// A family of explicitly listed kinds.
    pub fn from_kinds(grid: &Grid, kinds: Vec<ProbeKind>, seed: u64) -> Self {
        Self {
            grid: grid.clone(),
            spec: ProbeFamilySpec {
                seed,
                ..ProbeFamilySpec::default()
            },
            kinds,
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn len(&self) -> usize {
        self.kinds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.kinds.is_empty()
    }

    pub fn kinds(&self) -> &[ProbeKind] {
        &self.kinds
    }

    /// Materialises member `i` and checks that it is nonzero and localised.
    pub fn build(&self, i: usize) -> Result<Probe> {
        let kind = self.kinds[i];
        let label = kind.label();
        let field = match kind {
            ProbeKind::Gaussian { width } => gaussian_field(&self.grid, width),
            ProbeKind::Modulated { width, carrier } => modulated_gaussian_field(&self.grid, width, carrier),
            ProbeKind::Shell { level } => shell_random_field(&self.grid, level, self.spec.seed)?,
        };
        if field.sup_norm() == 0.0 {
            return Err(Error::ZeroProbe(label));
        }
        let ratio = field.boundary_ratio();
        if ratio >= PROBE_BOUNDARY_TOL {
            return Err(Error::ProbeNotLocalized { label, ratio });
        }
        Ok(Probe { label, kind, field })
    }

    /// Builds every member once, returning the first failure.
    pub fn validate(&self) -> Result<()> {
        for i in 0..self.len() {
            self.build(i)?;
        }
        Ok(())
    }
}
