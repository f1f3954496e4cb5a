//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any fails.
//!
//! Runs without the libtest harness so every line is printed. A positional
//! argument restricts the run to criteria whose label contains it.

use std::f64::consts::PI;
use std::fs;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use quatpurify::dynamics::{
    classify, detect_cycle, f_complex, iterate, map_d, map_s, map_u, step, CycleCriterion,
    CycleMetric, DephasingParams, DuParams, Regime, StepOutcome, System,
};
use quatpurify::fractal::{box_dim, dim_profile, embed, extract_boundary, unembed, EmbeddingPoint};
use quatpurify::qubit_state::{from_polar, project_p, rho_of, PolarState};
use quatpurify::reference_oracle::{s_matrix, u_conj, DensityMatrix};
use quatpurify::scan::{julia_scan, mandel_scan, GridSpec, ScanSettings, Slice};
use quatpurify::{Complex64, Quaternion, Raster};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

impl Outcome {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Self {
            pass,
            detail: detail.into(),
        }
    }
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn weak_dephasing() -> System {
    System::Dephasing(DephasingParams::new(0.0, 0.01, c(1.0, 0.1)).unwrap())
}

fn random_quat(rng: &mut ChaCha8Rng, r: f64) -> Quaternion {
    Quaternion::new(
        rng.gen_range(-r..=r),
        rng.gen_range(-r..=r),
        rng.gen_range(-r..=r),
        rng.gen_range(-r..=r),
    )
}

/// Exact maps against the 2×2 matrix implementation.
fn criterion_1() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let (mut worst_s, mut worst_u) = (0.0f64, 0.0f64);
    for _ in 0..1000 {
        let z = random_quat(&mut rng, 3.0);
        let alpha = rng.gen_range(-PI..PI);
        let p = c(rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0));
        let rho = rho_of(&z);
        worst_s = worst_s.max(rho_of(&map_s(&z)).max_entry_dist(&s_matrix(&rho).unwrap()));
        let u = map_u(&z, alpha, p).unwrap();
        worst_u =
            worst_u.max(rho_of(&u).max_entry_dist(&u_conj(&rho, alpha, p.arg(), p.norm().atan())));
    }
    let elapsed = start.elapsed();
    Outcome::new(
        worst_s <= 1e-10 && worst_u <= 1e-10 && elapsed < Duration::from_secs(1),
        format!("max |Δρ| s {worst_s:.2e}, u {worst_u:.2e} (tol 1e-10); {elapsed:.2?} (limit 1 s)"),
    )
}

/// `|ρ₀₁(d ζ)|/|ρ₀₁(ζ)| − (1 − β)` is second order in `β`.
fn criterion_2() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let betas = [1e-2, 1e-3, 1e-4];
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for _ in 0..50 {
        let z = Complex64::from_polar(rng.gen_range(0.3..2.0), rng.gen_range(-PI..PI));
        let zeta = from_polar(&PolarState::new(z, rng.gen_range(0.2..1.3)));
        let off0 = rho_of(&zeta).rho01.norm();
        let pts: Vec<(f64, f64)> = betas
            .iter()
            .map(|&b| {
                let ratio = rho_of(&map_d(&zeta, b)).rho01.norm() / off0;
                (b.ln(), (ratio - (1.0 - b)).abs().ln())
            })
            .collect();
        let n = pts.len() as f64;
        let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
        let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
        let slope = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>()
            / pts.iter().map(|p| (p.0 - mx).powi(2)).sum::<f64>();
        lo = lo.min(slope);
        hi = hi.max(slope);
    }
    Outcome::new(
        lo >= 1.7 && hi <= 2.3,
        format!("log-log slopes over 50 states in [{lo:.4}, {hi:.4}] (want 2 ± 0.3)"),
    )
}

/// Complex seeds with `β = 0` follow the complex map.
fn criterion_3() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let (mut worst, mut worst_jk, mut steps) = (0.0f64, 0.0f64, 0usize);
    let mut mismatched_absorption = 0;
    for _ in 0..100 {
        let alpha = rng.gen_range(-PI..PI);
        let p = c(rng.gen_range(-1.5..1.5), rng.gen_range(-1.5..1.5));
        let sys = System::Dephasing(DephasingParams::new(alpha, 0.0, p).unwrap());
        let mut z = c(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
        let mut q = Quaternion::from_complex(z);
        for _ in 0..50 {
            let next = f_complex(z, alpha, p);
            match (step(&q, &sys), next) {
                (StepOutcome::Next(nq), Ok(nz)) => {
                    worst = worst.max(((nq.a - nz.re).powi(2) + (nq.b - nz.im).powi(2)).sqrt());
                    worst_jk = worst_jk.max(nq.c.abs().max(nq.d.abs()));
                    steps += 1;
                    q = nq;
                    z = nz;
                }
                (StepOutcome::Absorbed, Err(_)) => break,
                _ => {
                    mismatched_absorption += 1;
                    break;
                }
            }
        }
    }
    Outcome::new(
        worst <= 1e-10 && worst_jk < 1e-12 && mismatched_absorption == 0,
        format!(
            "{steps} steps: max |Δ| {worst:.2e} (tol 1e-10), max |Im₂|,|Im₃| {worst_jk:.2e} (tol 1e-12), \
             absorption mismatches {mismatched_absorption}"
        ),
    )
}

/// Norm laws, projection and embedding round trips, and the maximally mixed state.
fn criterion_4() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst = [0.0f64; 6];
    for _ in 0..10_000 {
        let z = random_quat(&mut rng, 3.0);
        let n = z.norm();
        worst[0] = worst[0].max((map_s(&z).norm() - n * n).abs());
        worst[1] = worst[1].max((map_d(&z, rng.gen_range(0.0..1.0)).norm() - n).abs());
        let p = project_p(&z);
        let proj = rho_of(&p)
            .max_entry_dist(&rho_of(&z))
            .max((p.norm() - n).abs())
            .max(project_p(&p).dist(&p));
        worst[2] = worst[2].max(proj);
        let back = unembed(&embed(&p)).unwrap();
        worst[3] = worst[3].max(back.dist(&p));
        let pt = EmbeddingPoint::new(z.a, z.b, -z.c.abs());
        let e = embed(&unembed(&pt).unwrap());
        worst[4] = worst[4].max(
            (e.x - pt.x)
                .abs()
                .max((e.y - pt.y).abs())
                .max((e.z - pt.z).abs()),
        );
    }
    // ζ = ȷ is ρ = ½·id: u and the dephasing step map it to ρ = ½·id, and u with α = 0
    // returns ȷ itself.
    let mm = DensityMatrix::maximally_mixed();
    let mut fixed = 0.0f64;
    for _ in 0..1000 {
        let alpha = rng.gen_range(-PI..PI);
        let p = c(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
        let beta = rng.gen_range(0.0..1.0);
        fixed = fixed.max(rho_of(&map_u(&Quaternion::J, alpha, p).unwrap()).max_entry_dist(&mm));
        fixed = fixed.max(map_u(&Quaternion::J, 0.0, p).unwrap().dist(&Quaternion::J));
        let sys = System::Dephasing(DephasingParams::new(alpha, beta, p).unwrap());
        match step(&Quaternion::J, &sys) {
            StepOutcome::Next(q) => fixed = fixed.max(rho_of(&q).max_entry_dist(&mm)),
            StepOutcome::Absorbed => fixed = f64::INFINITY,
        }
    }
    worst[5] = fixed;
    let labels = [
        "|s|-|ζ|²",
        "|d|-|ζ|",
        "project_p",
        "unembed∘embed",
        "embed∘unembed",
        "ȷ fixed",
    ];
    let detail = labels
        .iter()
        .zip(worst)
        .map(|(l, w)| format!("{l} {w:.1e}"))
        .collect::<Vec<_>>()
        .join(", ");
    Outcome::new(
        worst.iter().all(|&w| w < 1e-12),
        format!("{detail} (tol 1e-12)"),
    )
}

/// `ζ₀ = ȷ` under weak dephasing with `p = 1 + 0.1ı`.
fn criterion_5() -> Outcome {
    let orbit = iterate(Quaternion::J, &weak_dephasing(), 100);
    let expected = |n: usize| match n {
        0 => Quaternion::J,
        1 => Quaternion::K,
        n if n % 2 == 0 => -Quaternion::J,
        _ => -Quaternion::K,
    };
    let dev = orbit
        .states
        .iter()
        .enumerate()
        .map(|(n, q)| q.dist(&expected(n)))
        .fold(0.0, f64::max);
    let quat = detect_cycle(&orbit, &CycleCriterion::default()).cycle;
    let rho = detect_cycle(
        &orbit,
        &CycleCriterion {
            metric: CycleMetric::DensityMatrix,
            ..CycleCriterion::default()
        },
    )
    .cycle;
    let class = classify(&orbit, 10, 0.75);
    let q_ok = quat.is_some_and(|c| c.period == 2 && c.entry_index == 2);
    let r_ok = rho.is_some_and(|c| c.period == 1 && c.entry_index == 0);
    Outcome::new(
        dev < 1e-12 && q_ok && r_ok && class == Regime::Decoherence && orbit.states.len() == 101,
        format!("orbit deviation {dev:.1e}; quaternion cycle {quat:?}; density-matrix cycle {rho:?}; class {class:?}"),
    )
}

/// Julia scans at two concurrence slices and their border dimensions.
fn criterion_6() -> Outcome {
    let start = Instant::now();
    let grid = GridSpec::square(2.0, 256).unwrap();
    let settings = ScanSettings::default();
    let mut dims = Vec::new();
    let mut notes = Vec::new();
    let mut structural = true;
    for cst in [0.01, 0.81] {
        let res = julia_scan(&grid, cst, &weak_dephasing(), &settings).unwrap();
        let boundary = extract_boundary(&res.class);
        structural &= res.has_both_classes() && boundary.count() > 0;
        let est = box_dim(&boundary).unwrap();
        notes.push(format!(
            "C={cst}: purification {:.3}, border cells {}, dim {:.4} (r² {:.4})",
            res.fraction(Regime::Purification),
            boundary.count(),
            est.dimension,
            est.r2
        ));
        dims.push(est.dimension);
    }
    let elapsed = start.elapsed();
    let drop_ok = dims[0] - dims[1] >= 0.1;
    let range_ok = (0.9..=1.15).contains(&dims[1]);
    let time_ok = elapsed < Duration::from_secs(300);
    Outcome::new(
        structural && drop_ok && range_ok && time_ok,
        format!(
            "{}; both classes + border {}; drop {:.4} >= 0.1 {}; dim(0.81) in [0.9, 1.15] {}; {elapsed:.2?} (limit 5 min)",
            notes.join("; "),
            ok(structural),
            dims[0] - dims[1],
            ok(drop_ok),
            ok(range_ok)
        ),
    )
}

fn ok(b: bool) -> &'static str {
    if b {
        "ok"
    } else {
        "FAILED"
    }
}

/// The `du` orbit from `ζ₀ = 1` and a `du` scan reaching the maximally mixed state.
fn criterion_7() -> Outcome {
    let prm = DuParams::new(0.1, 0.0, 0.0, Quaternion::new(1.0, 0.0, 0.0, 1.0)).unwrap();
    let orbit = iterate(Quaternion::ONE, &System::Du(prm), 100);
    let purities: Vec<f64> = orbit.observables.iter().map(|o| o.purity).collect();
    let in_range = purities
        .iter()
        .all(|&p| (0.5 - 1e-12..=1.0 + 1e-12).contains(&p));
    let max_drop = purities
        .windows(2)
        .map(|w| w[0] - w[1])
        .fold(f64::NEG_INFINITY, f64::max);
    let max_rise = purities
        .windows(2)
        .map(|w| w[1] - w[0])
        .fold(f64::NEG_INFINITY, f64::max);

    // q = x + ıy + 0.1ȷ, every orbit from ζ₀ = 0
    let base = DuParams::new(0.1, 0.0, 0.0, Quaternion::ZERO).unwrap();
    let grid = GridSpec::square(2.0, 64).unwrap();
    let res = mandel_scan(
        &grid,
        &Slice::QPlane { im2: 0.1, im3: 0.0 },
        &System::Du(base),
        &ScanSettings::default(),
    )
    .unwrap();
    let mm = DensityMatrix::maximally_mixed();
    let mut hits = 0;
    let mut best = f64::INFINITY;
    for row in 0..grid.ny {
        for col in 0..grid.nx {
            if *res.purity.get(col, row) > 0.51 {
                continue;
            }
            let w = grid.point(col, row);
            let sys = System::Du(DuParams {
                q: Quaternion::new(w.re, w.im, 0.1, 0.0),
                ..base
            });
            let end = iterate(Quaternion::ZERO, &sys, 100);
            let d = rho_of(end.last()).max_entry_dist(&mm);
            best = best.min(d);
            if d < 1e-3 {
                hits += 1;
            }
        }
    }
    Outcome::new(
        in_range && max_drop > 0.05 && max_rise > 0.0 && hits > 0,
        format!(
            "orbit purity in [{:.4}, {:.4}], largest drop {max_drop:.4} (> 0.05); \
             q-plane scan: {hits} orbits end within 1e-3 of ½·id (closest {best:.1e})",
            purities.iter().cloned().fold(f64::INFINITY, f64::min),
            purities.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
        ),
    )
}

fn sierpinski_carpet(depth: u32, n: usize) -> Raster<bool> {
    let side = 3usize.pow(depth);
    Raster::from_fn(n, n, |col, row| {
        if col >= side || row >= side {
            return false;
        }
        let (mut x, mut y) = (col, row);
        for _ in 0..depth {
            if x % 3 == 1 && y % 3 == 1 {
                return false;
            }
            x /= 3;
            y /= 3;
        }
        true
    })
}

/// Box counting on synthetic rasters with known dimension.
fn criterion_8() -> Outcome {
    let n = 1024;
    let cases: [(&str, Raster<bool>, f64, f64); 3] = [
        (
            "segment",
            Raster::from_fn(n, n, |col, row| {
                ((row as f64) - (0.61 * col as f64 + 150.0)).abs() < 0.5
            }),
            1.0,
            0.07,
        ),
        (
            "rectangle",
            Raster::from_fn(n, n, |col, row| {
                (128..896).contains(&col) && (256..1024).contains(&row)
            }),
            2.0,
            0.07,
        ),
        (
            "carpet",
            sierpinski_carpet(6, n),
            8f64.ln() / 3f64.ln(),
            0.1,
        ),
    ];
    let mut pass = true;
    let mut notes = Vec::new();
    for (name, raster, want, tol) in cases {
        let start = Instant::now();
        let est = box_dim(&raster).unwrap();
        let elapsed = start.elapsed();
        let good = (est.dimension - want).abs() <= tol && elapsed < Duration::from_secs(10);
        pass &= good;
        notes.push(format!(
            "{name} {:.4} (want {want:.3} ± {tol}, {elapsed:.1?})",
            est.dimension
        ));
    }
    Outcome::new(pass, notes.join("; "))
}

/// Criterion 6 through the CLI with 1, 4 and all threads.
fn criterion_9() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let common = [
        "--system",
        "dephasing",
        "--alpha",
        "0",
        "--beta",
        "0.01",
        "--p",
        "1,0.1",
        "--window",
        "-2,2,-2,2",
        "--resolution",
        "256",
        "--iters",
        "100",
    ];
    let mut outputs: Vec<Vec<Vec<u8>>> = Vec::new();
    let mut codes = Vec::new();
    for threads in ["1", "4", "0"] {
        let prefix = dir.path().join(format!("t{threads}"));
        let prefix = prefix.to_str().unwrap();
        let mut files = Vec::new();
        for cst in ["0.01", "0.81"] {
            let out = format!("{prefix}_c{cst}");
            let mut argv = vec!["quatpurify", "julia"];
            argv.extend(common);
            argv.extend(["--concurrence-sq", cst, "--threads", threads, "--out", &out]);
            codes.push(quatpurify::cli::run(argv));
            for suffix in ["_purity.pgm", "_cycles.pgm", "_class.pgm"] {
                files.push(fs::read(format!("{out}{suffix}")).unwrap_or_default());
            }
        }
        let csv = format!("{prefix}_dims.csv");
        let mut argv = vec!["quatpurify", "dimscan"];
        argv.extend(common);
        argv.extend(["--slices", "0.01,0.81", "--threads", threads, "--out", &csv]);
        codes.push(quatpurify::cli::run(argv));
        files.push(fs::read(&csv).unwrap_or_default());
        outputs.push(files);
    }
    let identical = outputs.windows(2).all(|w| w[0] == w[1]);
    let nonempty = outputs[0].iter().all(|f| !f.is_empty());
    let bytes: usize = outputs[0].iter().map(Vec::len).sum();
    Outcome::new(
        identical && nonempty && codes.iter().all(|&c| c == 0),
        format!(
            "{} files ({bytes} bytes) per run, identical across --threads 1/4/0: {identical}; exit codes {codes:?}",
            outputs[0].len()
        ),
    )
}

/// Only the trend of the dimension profile is asserted, not its values.
fn criterion_10() -> Outcome {
    let grid = GridSpec::square(2.0, 256).unwrap();
    let slices: Vec<f64> = (0..10).map(|i| i as f64 / 10.0).collect();
    let prof = dim_profile(&weak_dephasing(), &grid, &slices, &ScanSettings::default()).unwrap();
    let dims: Vec<f64> = prof.iter().map(|e| e.dimension()).collect();
    let small = dims[0].max(dims[1]);
    let trend = small > dims[9];
    Outcome::new(
        trend,
        format!(
            "profile {} ; max(dim(0), dim(0.1)) > dim(0.9): {trend} (values reported, not asserted)",
            prof.iter()
                .map(|e| format!("{}:{:.3}", e.concurrence_sq, e.dimension()))
                .collect::<Vec<_>>()
                .join(" ")
        ),
    )
}

fn main() {
    let filter: Vec<String> = std::env::args()
        .skip(1)
        .filter(|a| !a.starts_with('-'))
        .collect();
    type Criterion = (&'static str, fn() -> Outcome);
    let criteria: [Criterion; 10] = [
        ("criterion 1 oracle equivalence", criterion_1),
        ("criterion 2 dephasing first-order law", criterion_2),
        ("criterion 3 complex reduction", criterion_3),
        ("criterion 4 structural invariants", criterion_4),
        ("criterion 5 hand orbit", criterion_5),
        ("criterion 6 julia slices and border dimension", criterion_6),
        (
            "criterion 7 du orbit and maximally mixed fixed point",
            criterion_7,
        ),
        ("criterion 8 box-dimension oracles", criterion_8),
        ("criterion 9 thread-count determinism", criterion_9),
        ("criterion 10 dimension trend only", criterion_10),
    ];
    let mut failed = 0;
    let mut ran = 0;
    for (label, f) in criteria {
        if !filter.is_empty() && !filter.iter().any(|p| label.contains(p.as_str())) {
            continue;
        }
        ran += 1;
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Outcome::new(false, format!("panicked: {msg}"))
        });
        if !outcome.pass {
            failed += 1;
        }
        println!(
            "{} {label}: {}",
            if outcome.pass { "PASS" } else { "FAIL" },
            outcome.detail
        );
    }
    println!("acceptance: {} passed, {failed} failed", ran - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
