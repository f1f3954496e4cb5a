//! Borders between purification- and decoherence-dominated regions: extraction,
//! box-counting dimension, the 3D embedding and bulb voxelisation.

use rayon::prelude::*;

use crate::dynamics::{Regime, System};
use crate::error::{Error, Result};
use crate::quat::Quaternion;
use crate::qubit_state::{aligned_state, project_p};
use crate::raster::Raster;
use crate::scan::{analyse, julia_scan, GridSpec, ScanSettings};

/// Minimum number of marked cells accepted by the box-counting estimator.
pub const MIN_BOX_POINTS: usize = 32;

/// Point of the 3D embedding `(Re ζ, Im₁ ζ, −|ζ − Co ζ|)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EmbeddingPoint {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl EmbeddingPoint {
    pub fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn norm(&self) -> f64 {
        self.x.hypot(self.y).hypot(self.z)
    }
}

pub fn embed(zeta: &Quaternion) -> EmbeddingPoint {
    EmbeddingPoint::new(zeta.a, zeta.b, -zeta.jk_norm())
}

/// Aligned quaternion whose embedding is `pt`: `Co ζ = X + ıY`, `|ζ − Co ζ| = −Z`.
///
/// This equals `from_polar(z, λ)` with `|z| = √(X²+Y²+Z²)`, `arg z = atan2(Y, X)`
/// and `λ = atan2(−Z, √(X²+Y²))`; points on the axis give `ȷ|Z|`.
pub fn unembed(pt: &EmbeddingPoint) -> Result<Quaternion> {
    if !(pt.z <= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "embedding requires Z <= 0, got {}",
            pt.z
        )));
    }
    Ok(aligned_state(
        num_complex::Complex64::new(pt.x, pt.y),
        -pt.z,
    ))
}

/// Marks a cell whose class differs from its right or lower neighbour, so every
/// class-discontinuous 4-adjacent pair contributes exactly one cell.
pub fn extract_boundary<T: PartialEq>(classes: &Raster<T>) -> Raster<bool> {
    let (nx, ny) = (classes.nx, classes.ny);
    Raster::from_fn(nx, ny, |col, row| {
        let here = classes.get(col, row);
        (col + 1 < nx && classes.get(col + 1, row) != here)
            || (row + 1 < ny && classes.get(col, row + 1) != here)
    })
}

/// Box counts and the fitted box-counting dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct BoxDimEstimate {
    /// Box edge lengths in cells, finest first.
    pub scales: Vec<usize>,
    /// Occupied boxes at each scale.
    pub counts: Vec<usize>,
    /// Least-squares slope of `ln N(ε)` against `ln(1/ε)` over `range_used`.
    pub dimension: f64,
    pub r2: f64,
    /// Indices into `scales` (inclusive) used by the fit.
    pub range_used: (usize, usize),
}

/// Dyadic box sizes `2^k`, `k = 1 … log₂(min extent) − 2`.
fn dyadic_levels(min_extent: usize) -> Result<usize> {
    let log2 = usize::BITS - 1 - min_extent.leading_zeros();
    let levels = log2 as usize;
    // need at least two fit scales after dropping both ends
    if levels < 6 {
        return Err(Error::InvalidGrid(format!(
            "box counting needs an extent of at least 64 cells, got {min_extent}"
        )));
    }
    Ok(levels - 2)
}

fn fit(scales: Vec<usize>, counts: Vec<usize>) -> BoxDimEstimate {
    let lo = 1;
    let hi = scales.len() - 2;
    let pts: Vec<(f64, f64)> = (lo..=hi)
        .map(|i| ((1.0 / scales[i] as f64).ln(), (counts[i] as f64).ln()))
        .collect();
    let (slope, r2) = least_squares(&pts);
    BoxDimEstimate {
        scales,
        counts,
        dimension: slope,
        r2,
        range_used: (lo, hi),
    }
}

/// Slope and coefficient of determination of the least-squares line.
fn least_squares(pts: &[(f64, f64)]) -> (f64, f64) {
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = pts.iter().map(|p| (p.1 - my).powi(2)).sum();
    let slope = sxy / sxx;
    let r2 = if syy == 0.0 {
        1.0
    } else {
        (sxy * sxy) / (sxx * syy)
    };
    (slope, r2)
}

/// Upper box-counting dimension of the marked cells of a 2D raster.
///
/// Counts occupied `2^k`-boxes for `k = 1 … log₂(min(nx, ny)) − 2` and fits the
/// slope over all but the finest and coarsest scale.
pub fn box_dim(marks: &Raster<bool>) -> Result<BoxDimEstimate> {
    let found = marks.count();
    if found < MIN_BOX_POINTS {
        return Err(Error::TooFewPoints {
            found,
            required: MIN_BOX_POINTS,
        });
    }
    let levels = dyadic_levels(marks.nx.min(marks.ny))?;
    let (mut w, mut h) = (marks.nx, marks.ny);
    let mut level = marks.data.clone();
    let mut scales = Vec::with_capacity(levels);
    let mut counts = Vec::with_capacity(levels);
    for k in 1..=levels {
        let (w2, h2) = (w.div_ceil(2), h.div_ceil(2));
        let mut next = vec![false; w2 * h2];
        for row in 0..h {
            for col in 0..w {
                if level[row * w + col] {
                    next[(row / 2) * w2 + col / 2] = true;
                }
            }
        }
        level = next;
        (w, h) = (w2, h2);
        scales.push(1 << k);
        counts.push(level.iter().filter(|&&b| b).count());
    }
    Ok(fit(scales, counts))
}

/// 3D field of `nx × ny × nz` cells, index `(layer * ny + row) * nx + col`.
#[derive(Debug, Clone, PartialEq)]
pub struct VoxelField<T> {
    pub nx: usize,
    pub ny: usize,
    pub nz: usize,
    pub data: Vec<T>,
}

impl<T> VoxelField<T> {
    pub fn index(&self, col: usize, row: usize, layer: usize) -> usize {
        (layer * self.ny + row) * self.nx + col
    }

    pub fn get(&self, col: usize, row: usize, layer: usize) -> &T {
        &self.data[self.index(col, row, layer)]
    }

    /// One `nx × ny` layer as a raster.
    pub fn layer(&self, layer: usize) -> Raster<T>
    where
        T: Clone,
    {
        let start = layer * self.nx * self.ny;
        Raster {
            nx: self.nx,
            ny: self.ny,
            data: self.data[start..start + self.nx * self.ny].to_vec(),
        }
    }
}

/// 3D analogue of [`extract_boundary`] over the three forward neighbours.
pub fn extract_boundary_3d<T: PartialEq>(field: &VoxelField<T>) -> VoxelField<bool> {
    let (nx, ny, nz) = (field.nx, field.ny, field.nz);
    let mut data = Vec::with_capacity(field.data.len());
    for layer in 0..nz {
        for row in 0..ny {
            for col in 0..nx {
                let here = field.get(col, row, layer);
                let marked = (col + 1 < nx && field.get(col + 1, row, layer) != here)
                    || (row + 1 < ny && field.get(col, row + 1, layer) != here)
                    || (layer + 1 < nz && field.get(col, row, layer + 1) != here);
                data.push(marked);
            }
        }
    }
    VoxelField { nx, ny, nz, data }
}

/// Box-counting dimension of the marked voxels, same scale scheme as [`box_dim`].
pub fn box_dim_3d(marks: &VoxelField<bool>) -> Result<BoxDimEstimate> {
    let found = marks.data.iter().filter(|&&b| b).count();
    if found < MIN_BOX_POINTS {
        return Err(Error::TooFewPoints {
            found,
            required: MIN_BOX_POINTS,
        });
    }
    let levels = dyadic_levels(marks.nx.min(marks.ny).min(marks.nz))?;
    let (mut w, mut h, mut d) = (marks.nx, marks.ny, marks.nz);
    let mut level = marks.data.clone();
    let mut scales = Vec::with_capacity(levels);
    let mut counts = Vec::with_capacity(levels);
    for k in 1..=levels {
        let (w2, h2, d2) = (w.div_ceil(2), h.div_ceil(2), d.div_ceil(2));
        let mut next = vec![false; w2 * h2 * d2];
        for z in 0..d {
            for y in 0..h {
                for x in 0..w {
                    if level[(z * h + y) * w + x] {
                        next[((z / 2) * h2 + y / 2) * w2 + x / 2] = true;
                    }
                }
            }
        }
        level = next;
        (w, h, d) = (w2, h2, d2);
        scales.push(1 << k);
        counts.push(level.iter().filter(|&&b| b).count());
    }
    Ok(fit(scales, counts))
}

/// Box in embedding space sampled at voxel centres. Layer 0 is the one nearest
/// `Z = z_max`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec3 {
    pub plane: GridSpec,
    pub z_min: f64,
    pub z_max: f64,
    pub nz: usize,
}

impl GridSpec3 {
    pub fn new(plane: GridSpec, z_min: f64, z_max: f64, nz: usize) -> Result<Self> {
        plane.validate()?;
        if !(z_min < z_max) || !z_min.is_finite() || z_max > 0.0 {
            return Err(Error::InvalidGrid(format!(
                "Z range [{z_min}, {z_max}] must be non-empty and lie in (-inf, 0]"
            )));
        }
        if nz < 2 {
            return Err(Error::InvalidGrid(format!("nz = {nz} below 2")));
        }
        Ok(Self {
            plane,
            z_min,
            z_max,
            nz,
        })
    }

    /// `[−half, half]² × [−half, 0]` at `n³`.
    pub fn cube(half: f64, n: usize) -> Result<Self> {
        Self::new(GridSpec::square(half, n)?, -half, 0.0, n)
    }

    pub fn z(&self, layer: usize) -> f64 {
        self.z_max - (layer as f64 + 0.5) * (self.z_max - self.z_min) / self.nz as f64
    }

    pub fn center(&self, col: usize, row: usize, layer: usize) -> EmbeddingPoint {
        EmbeddingPoint::new(self.plane.x(col), self.plane.y(row), self.z(layer))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BulbScan {
    pub grid: GridSpec3,
    pub classes: VoxelField<Regime>,
    pub boundary_mask: VoxelField<bool>,
    /// Centres of the boundary voxels, in voxel index order.
    pub boundary: Vec<EmbeddingPoint>,
}

/// Classifies every voxel centre of `grid` as an initial state and extracts the
/// class border as a point cloud.
pub fn bulb_scan(grid: &GridSpec3, system: &System, settings: &ScanSettings) -> Result<BulbScan> {
    let (nx, ny, nz) = (grid.plane.nx, grid.plane.ny, grid.nz);
    let classes: Vec<Regime> = (0..nx * ny * nz)
        .into_par_iter()
        .map(|idx| {
            let (col, rest) = (idx % nx, idx / nx);
            let (row, layer) = (rest % ny, rest / ny);
            let zeta0 = unembed(&grid.center(col, row, layer)).expect("voxel centres have Z <= 0");
            analyse(zeta0, system, settings).regime
        })
        .collect();
    let classes = VoxelField {
        nx,
        ny,
        nz,
        data: classes,
    };
    let boundary_mask = extract_boundary_3d(&classes);
    let mut boundary = Vec::new();
    for layer in 0..nz {
        for row in 0..ny {
            for col in 0..nx {
                if *boundary_mask.get(col, row, layer) {
                    boundary.push(grid.center(col, row, layer));
                }
            }
        }
    }
    Ok(BulbScan {
        grid: *grid,
        classes,
        boundary_mask,
        boundary,
    })
}

/// Why a profile entry carries no dimension.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProfileStatus {
    Ok,
    EmptyBoundary,
    TooFewPoints,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DimProfileEntry {
    pub concurrence_sq: f64,
    pub boundary_cells: usize,
    pub purification_fraction: f64,
    pub estimate: Option<BoxDimEstimate>,
    pub status: ProfileStatus,
}

impl DimProfileEntry {
    /// Fitted dimension, 0 for flagged slices.
    pub fn dimension(&self) -> f64 {
        self.estimate.as_ref().map_or(0.0, |e| e.dimension)
    }

    pub fn r2(&self) -> f64 {
        self.estimate.as_ref().map_or(0.0, |e| e.r2)
    }
}

/// Box-counting dimension of the border in successive concurrence slices.
pub fn dim_profile(
    system: &System,
    grid: &GridSpec,
    concurrence_sq_values: &[f64],
    settings: &ScanSettings,
) -> Result<Vec<DimProfileEntry>> {
    concurrence_sq_values
        .iter()
        .map(|&c| {
            let res = julia_scan(grid, c, system, settings)?;
            let boundary = extract_boundary(&res.class);
            let cells = boundary.count();
            let (estimate, status) = if cells == 0 {
                (None, ProfileStatus::EmptyBoundary)
            } else {
                match box_dim(&boundary) {
                    Ok(e) => (Some(e), ProfileStatus::Ok),
                    Err(Error::TooFewPoints { .. }) => (None, ProfileStatus::TooFewPoints),
                    Err(e) => return Err(e),
                }
            };
            Ok(DimProfileEntry {
                concurrence_sq: c,
                boundary_cells: cells,
                purification_fraction: res.fraction(Regime::Purification),
                estimate,
                status,
            })
        })
        .collect()
}

/// `embed` after `project_p`; the point is the same for every representative.
pub fn embed_state(zeta: &Quaternion) -> EmbeddingPoint {
    embed(&project_p(zeta))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::DephasingParams;
    use crate::qubit_state::{from_polar, PolarState};
    use num_complex::Complex64;
    use proptest::prelude::*;

    #[test]
    fn embed_examples() {
        assert_eq!(
            embed(&Quaternion::new(1.0, 0.0, 1.0, 0.0)),
            EmbeddingPoint::new(1.0, 0.0, -1.0)
        );
        assert_eq!(
            embed(&Quaternion::from(2.0)),
            EmbeddingPoint::new(2.0, 0.0, -0.0)
        );
        assert_eq!(
            unembed(&EmbeddingPoint::new(0.0, 0.0, -1.0)).unwrap(),
            Quaternion::J
        );
        assert!(unembed(&EmbeddingPoint::new(0.0, 0.0, 0.5)).is_err());
    }

    #[test]
    fn unembed_agrees_with_polar_route() {
        let pt = EmbeddingPoint::new(0.4, -1.1, -0.7);
        let r = pt.norm();
        let lambda = (-pt.z).atan2(pt.x.hypot(pt.y));
        let z = Complex64::from_polar(r, pt.y.atan2(pt.x));
        let want = from_polar(&PolarState::new(z, lambda));
        assert!(unembed(&pt).unwrap().dist(&want) < 1e-12);
    }

    #[test]
    fn boundary_examples() {
        let uniform = Raster::filled(8, 8, 3u8);
        assert_eq!(extract_boundary(&uniform).count(), 0);
        // horizontal split between rows 3 and 4
        let split = Raster::from_fn(8, 8, |_, row| row >= 4);
        let b = extract_boundary(&split);
        assert_eq!(b.count(), 8);
        assert!((0..8).all(|col| *b.get(col, 3)));
    }

    #[test]
    fn boundary_commutes_with_relabelling() {
        let r = Raster::from_fn(20, 20, |c, r| ((c * 7 + r * 3) % 5) as u8);
        let perm = [3u8, 0, 4, 1, 2];
        let relabelled = r.map(|&v| perm[v as usize]);
        assert_eq!(extract_boundary(&r), extract_boundary(&relabelled));
    }

    fn segment(n: usize) -> Raster<bool> {
        // slanted line y = 0.37 x + 100
        Raster::from_fn(n, n, |c, r| {
            let y = 0.37 * c as f64 + 100.0;
            (r as f64 - y).abs() < 0.5
        })
    }

    #[test]
    fn segment_has_dimension_one() {
        let est = box_dim(&segment(1024)).unwrap();
        assert!((est.dimension - 1.0).abs() < 0.07, "{est:?}");
        assert_eq!(est.scales, vec![2, 4, 8, 16, 32, 64, 128, 256]);
        assert_eq!(est.range_used, (1, 6));
    }

    #[test]
    fn rectangle_has_dimension_two() {
        let r = Raster::from_fn(1024, 1024, |c, r| {
            (128..896).contains(&c) && (256..1024).contains(&r)
        });
        let est = box_dim(&r).unwrap();
        assert!((est.dimension - 2.0).abs() < 0.07, "{est:?}");
    }

    #[test]
    fn too_few_points_and_small_rasters() {
        let mut r = Raster::filled(128, 128, false);
        for i in 0..31 {
            r.set(i, i, true);
        }
        assert!(matches!(
            box_dim(&r),
            Err(Error::TooFewPoints { found: 31, .. })
        ));
        assert!(box_dim(&Raster::filled(32, 32, true)).is_err());
    }

    #[test]
    fn voxel_dimensions() {
        let n = 64;
        let plane = VoxelField {
            nx: n,
            ny: n,
            nz: n,
            data: (0..n * n * n).map(|i| i / (n * n) == 20).collect(),
        };
        let est = box_dim_3d(&plane).unwrap();
        assert!((est.dimension - 2.0).abs() < 0.1, "{est:?}");
        let solid = VoxelField {
            nx: n,
            ny: n,
            nz: n,
            data: vec![true; n * n * n],
        };
        assert!((box_dim_3d(&solid).unwrap().dimension - 3.0).abs() < 0.1);
    }

    #[test]
    fn boundary_3d_of_two_half_spaces() {
        let n = 6;
        let field = VoxelField {
            nx: n,
            ny: n,
            nz: n,
            data: (0..n * n * n)
                .map(|i| (i / (n * n)) >= 3)
                .collect::<Vec<_>>(),
        };
        let b = extract_boundary_3d(&field);
        assert_eq!(b.data.iter().filter(|&&x| x).count(), n * n);
        assert!(b.layer(2).data.iter().all(|&x| x));
    }

    #[test]
    fn single_class_bulb_is_empty() {
        let sys =
            System::Dephasing(DephasingParams::new(0.0, 0.0, Complex64::new(0.0, 0.0)).unwrap());
        let grid = GridSpec3::new(GridSpec::square(0.9, 4).unwrap(), -0.0001, 0.0, 2).unwrap();
        let bulb = bulb_scan(&grid, &sys, &ScanSettings::default()).unwrap();
        assert!(bulb.boundary.is_empty());
    }

    #[test]
    fn empty_profile_is_flagged() {
        let sys =
            System::Dephasing(DephasingParams::new(0.0, 0.0, Complex64::new(0.0, 0.0)).unwrap());
        let grid = GridSpec::square(2.0, 64).unwrap();
        let prof = dim_profile(&sys, &grid, &[0.0], &ScanSettings::default()).unwrap();
        assert_eq!(prof[0].status, ProfileStatus::EmptyBoundary);
        assert_eq!(prof[0].dimension(), 0.0);
    }

    #[test]
    fn grid3_validation() {
        let plane = GridSpec::square(1.0, 4).unwrap();
        assert!(GridSpec3::new(plane, -1.0, 0.5, 4).is_err());
        assert!(GridSpec3::new(plane, 0.0, -1.0, 4).is_err());
        let g = GridSpec3::cube(2.0, 4).unwrap();
        assert_eq!(g.z(0), -0.25);
        assert_eq!(g.z(3), -1.75);
    }

    fn comp() -> impl Strategy<Value = f64> {
        -3.0..3.0f64
    }

    proptest! {
        #[test]
        fn embedding_round_trips(x in comp(), y in comp(), z in -3.0..0.0f64) {
            let pt = EmbeddingPoint::new(x, y, z);
            let back = embed(&unembed(&pt).unwrap());
            prop_assert!((back.x - x).abs() < 1e-12 && (back.y - y).abs() < 1e-12 && (back.z - z).abs() < 1e-12);
        }

        #[test]
        fn state_round_trips(a in comp(), b in comp(), c in comp(), d in comp()) {
            let q = project_p(&Quaternion::new(a, b, c, d));
            prop_assert!(unembed(&embed(&q)).unwrap().dist(&q) < 1e-12);
        }

        #[test]
        fn embedding_is_spherical(re in comp(), im in comp(), lambda in 0.0..std::f64::consts::FRAC_PI_2) {
            let z = Complex64::new(re, im);
            let pt = embed(&from_polar(&PolarState::new(z, lambda)));
            prop_assert!((pt.norm() - z.norm()).abs() < 1e-12);
            prop_assert!(pt.z <= 0.0);
        }

        #[test]
        fn adding_marks_never_lowers_counts(seed in 0u64..1000) {
            let base = segment(128);
            let mut more = base.clone();
            let mut s = seed;
            for _ in 0..50 {
                s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                let i = (s >> 33) as usize % (128 * 128);
                more.data[i] = true;
            }
            let (a, b) = (box_dim(&base).unwrap(), box_dim(&more).unwrap());
            prop_assert!(a.counts.iter().zip(&b.counts).all(|(x, y)| y >= x));
        }
    }
}
