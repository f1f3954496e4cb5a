//! Plane scans: initial conditions (Julia-type) and parameters (Mandelbrot-type).
//!
//! Every pixel is an independent orbit; pixels are evaluated in parallel and
//! collected in row-major order, so the output does not depend on scheduling.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::dynamics::{classify, detect_cycle, iterate, Cycle, CycleCriterion, Regime, System};
use crate::error::{Error, Result};
use crate::quat::Quaternion;
use crate::qubit_state::aligned_state;
use crate::raster::Raster;

/// A rectangular window sampled at `nx × ny` pixel centres.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
    pub nx: usize,
    pub ny: usize,
}

impl GridSpec {
    pub fn new(
        x_min: f64,
        x_max: f64,
        y_min: f64,
        y_max: f64,
        nx: usize,
        ny: usize,
    ) -> Result<Self> {
        let g = Self {
            x_min,
            x_max,
            y_min,
            y_max,
            nx,
            ny,
        };
        g.validate()?;
        Ok(g)
    }

    /// `[−half, half]²` at `n × n`.
    pub fn square(half: f64, n: usize) -> Result<Self> {
        Self::new(-half, half, -half, half, n, n)
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [self.x_min, self.x_max, self.y_min, self.y_max]
            .iter()
            .all(|v| v.is_finite());
        if !finite || !(self.x_min < self.x_max) || !(self.y_min < self.y_max) {
            return Err(Error::InvalidGrid(format!(
                "window [{}, {}] x [{}, {}] is empty or not finite",
                self.x_min, self.x_max, self.y_min, self.y_max
            )));
        }
        if self.nx < 2 || self.ny < 2 {
            return Err(Error::InvalidGrid(format!(
                "resolution {}x{} below 2x2",
                self.nx, self.ny
            )));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Centre abscissa of column `col`.
    pub fn x(&self, col: usize) -> f64 {
        self.x_min + (col as f64 + 0.5) * (self.x_max - self.x_min) / self.nx as f64
    }

    /// Centre ordinate of row `row`; row 0 is the top (`y_max`) edge.
    pub fn y(&self, row: usize) -> f64 {
        self.y_max - (row as f64 + 0.5) * (self.y_max - self.y_min) / self.ny as f64
    }

    pub fn point(&self, col: usize, row: usize) -> Complex64 {
        Complex64::new(self.x(col), self.y(row))
    }
}

/// Which 2D slice a scan covers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Slice {
    /// Initial states `ζ₀` with `Co ζ₀ = x + ıy` and `|ζ₀ − Co ζ₀|² = concurrence_sq`.
    InitialPlane { concurrence_sq: f64 },
    /// Dephasing family, `p = x + ıy`, started from `ζ₀ = 0`.
    PPlane,
    /// `du` family, `q = x + ıy + ȷ·im2 + k·im3`, started from `ζ₀ = 0`.
    QPlane { im2: f64, im3: f64 },
}

impl Slice {
    /// Default q-plane: `Im₂ q = 0`, `Im₃ q = 0.1`.
    pub fn default_q_plane() -> Self {
        Slice::QPlane { im2: 0.0, im3: 0.1 }
    }
}

/// Per-orbit analysis settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanSettings {
    pub iters: usize,
    pub cycle: CycleCriterion,
    pub window: usize,
    pub threshold: f64,
}

impl Default for ScanSettings {
    fn default() -> Self {
        Self {
            iters: 100,
            cycle: CycleCriterion::default(),
            window: 10,
            threshold: 0.75,
        }
    }
}

/// What one orbit reduces to in a scan.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PixelOutcome {
    /// Final purity; `1` for absorbed orbits, NaN when unresolved.
    pub purity: f64,
    pub cycle: Option<Cycle>,
    pub regime: Regime,
}

pub fn analyse(zeta0: Quaternion, system: &System, settings: &ScanSettings) -> PixelOutcome {
    let orbit = iterate(zeta0, system, settings.iters);
    let regime = classify(&orbit, settings.window, settings.threshold);
    let purity = match regime {
        Regime::Unresolved => f64::NAN,
        _ => orbit.final_purity(),
    };
    PixelOutcome {
        purity,
        cycle: detect_cycle(&orbit, &settings.cycle).cycle,
        regime,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScanResult {
    pub grid: GridSpec,
    pub purity: Raster<f64>,
    /// Iterations to reach a cycle, −1 when none was found.
    pub cycle_entry: Raster<i32>,
    /// Cycle period, 0 when none was found.
    pub cycle_period: Raster<i32>,
    pub class: Raster<Regime>,
}

impl ScanResult {
    fn from_outcomes(grid: GridSpec, outcomes: Vec<PixelOutcome>) -> Self {
        let (nx, ny) = (grid.nx, grid.ny);
        let pick = |f: &dyn Fn(&PixelOutcome) -> i32| Raster {
            nx,
            ny,
            data: outcomes.iter().map(f).collect(),
        };
        let cycle_entry = pick(&|o| o.cycle.map_or(-1, |c| c.entry_index as i32));
        let cycle_period = pick(&|o| o.cycle.map_or(0, |c| c.period as i32));
        Self {
            grid,
            purity: Raster {
                nx,
                ny,
                data: outcomes.iter().map(|o| o.purity).collect(),
            },
            cycle_entry,
            cycle_period,
            class: Raster {
                nx,
                ny,
                data: outcomes.iter().map(|o| o.regime).collect(),
            },
        }
    }

    pub fn fraction(&self, regime: Regime) -> f64 {
        let n = self.class.data.iter().filter(|&&r| r == regime).count();
        n as f64 / self.class.data.len() as f64
    }

    pub fn has_both_classes(&self) -> bool {
        self.fraction(Regime::Purification) > 0.0 && self.fraction(Regime::Decoherence) > 0.0
    }
}

/// Initial state of an initial-plane pixel: `Co ζ₀ = w`, `|ζ₀ − Co ζ₀|² = concurrence_sq`.
pub fn initial_state(w: Complex64, concurrence_sq: f64) -> Quaternion {
    aligned_state(w, concurrence_sq.sqrt())
}

fn run_pixels(grid: &GridSpec, f: impl Fn(Complex64) -> PixelOutcome + Sync) -> Vec<PixelOutcome> {
    let nx = grid.nx;
    (0..grid.len())
        .into_par_iter()
        .map(|idx| f(grid.point(idx % nx, idx / nx)))
        .collect()
}

/// Scans initial states over `grid` at a fixed concurrence slice.
pub fn julia_scan(
    grid: &GridSpec,
    concurrence_sq: f64,
    system: &System,
    settings: &ScanSettings,
) -> Result<ScanResult> {
    grid.validate()?;
    if !(concurrence_sq >= 0.0) || !concurrence_sq.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "concurrence_sq must be finite and non-negative, got {concurrence_sq}"
        )));
    }
    let outcomes = run_pixels(grid, |w| {
        analyse(initial_state(w, concurrence_sq), system, settings)
    });
    Ok(ScanResult::from_outcomes(*grid, outcomes))
}

/// Scans the parameter `p` (dephasing family) or `q` (`du` family) over `grid`,
/// each orbit starting at `ζ₀ = 0`. Parameters other than the scanned one are taken
/// from `system`.
pub fn mandel_scan(
    grid: &GridSpec,
    slice: &Slice,
    system: &System,
    settings: &ScanSettings,
) -> Result<ScanResult> {
    grid.validate()?;
    let outcomes = match (slice, system) {
        (Slice::PPlane, System::Dephasing(base)) => run_pixels(grid, |p| {
            let sys = System::Dephasing(crate::dynamics::DephasingParams { p, ..*base });
            analyse(Quaternion::ZERO, &sys, settings)
        }),
        (Slice::QPlane { im2, im3 }, System::Du(base)) => run_pixels(grid, |w| {
            let q = Quaternion::new(w.re, w.im, *im2, *im3);
            let sys = System::Du(crate::dynamics::DuParams { q, ..*base });
            analyse(Quaternion::ZERO, &sys, settings)
        }),
        (Slice::InitialPlane { .. }, _) => {
            return Err(Error::InvalidParameter(
                "initial-plane slices are scanned with julia_scan".into(),
            ))
        }
        (slice, system) => {
            return Err(Error::InvalidParameter(format!(
                "{slice:?} does not apply to the {} family",
                system.name()
            )))
        }
    };
    Ok(ScanResult::from_outcomes(*grid, outcomes))
}

/// Dispatches on the slice kind.
pub fn scan(
    grid: &GridSpec,
    slice: &Slice,
    system: &System,
    settings: &ScanSettings,
) -> Result<ScanResult> {
    match slice {
        Slice::InitialPlane { concurrence_sq } => {
            julia_scan(grid, *concurrence_sq, system, settings)
        }
        _ => mandel_scan(grid, slice, system, settings),
    }
}

/// Runs `f` on a dedicated pool of `threads` workers (`0` = one per core).
pub fn with_threads<R: Send>(threads: usize, f: impl FnOnce() -> R + Send) -> Result<R> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::InvalidParameter(format!("thread pool: {e}")))?;
    Ok(pool.install(f))
}
