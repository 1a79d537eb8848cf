//! Acceptance criteria 1–9. Each prints one PASS/FAIL line; the process exits
//! non-zero if any fails.
//!
//! Run alone with `cargo test --test acceptance`.

mod common;

use std::f64::consts::PI;
use std::fmt::Display;
use std::panic;
use std::process::Command;
use std::time::{Duration, Instant};

use common::{random_element, small_element, GROUPS};
use pcgauge::consistencize::{
    consistencize_abelian, consistencize_riemannian, objective, objective_gradient,
    DescentOptions,
};
use pcgauge::integration::{expectation, run_report, Observable};
use pcgauge::pc_matrix::{from_gauge_vector, gauge_extract, ii3};
use pcgauge::simplicial::{
    gauge_transform_field, global_ii, holonomy_pc_matrix, triangle_curvature, EdgeField,
    SimplicialComplex2,
};
use pcgauge::{Element, GaugeVector, Group, Indicator, PcMatrix, Variance};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn s<E: Display>(e: E) -> String {
    e.to_string()
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn random_gauge<R: Rng>(g: Group, n: usize, rng: &mut R) -> GaugeVector {
    GaugeVector::new((0..n).map(|_| random_element(g, rng)).collect()).unwrap()
}

fn random_field<R: Rng>(k: &SimplicialComplex2, g: Group, rng: &mut R) -> EdgeField {
    let values = (0..k.edges().len()).map(|_| random_element(g, rng)).collect();
    EdgeField::from_values(k, g, values).unwrap()
}

fn random_matrix<R: Rng>(g: Group, n: usize, rng: &mut R) -> PcMatrix {
    let upper: Vec<Element> = (0..n * (n - 1) / 2).map(|_| random_element(g, rng)).collect();
    PcMatrix::from_upper(g, n, &upper, Variance::Covariant).unwrap()
}

fn scalar(e: &Element) -> f64 {
    match e {
        Element::RPlus(x) => *x,
        _ => panic!("not an rplus element"),
    }
}

/// Theorem 1 round trip.
fn criterion_1() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let mut worst = 0.0f64;
    for g in GROUPS {
        for t in 0..500 {
            let n = 2 + t % 7;
            let lambda = random_gauge(g, n, &mut rng);
            let a = from_gauge_vector(&lambda).map_err(s)?;
            let c = a.is_consistent(1e-10).map_err(s)?;
            ensure(c.consistent, || format!("{g}: matrix from gauge vector inconsistent, defect {:e}", c.max_defect))?;
            let back = gauge_extract(&a, 1e-10).map_err(s)?;
            let want = lambda.normalized(Variance::Covariant).map_err(s)?;
            let d = back.max_distance(&want).map_err(s)?;
            worst = worst.max(d);
            ensure(d <= 1e-10, || format!("{g}: recovered gauge off by {d:e}"))?;
        }
    }
    Ok(format!("2000 gauge vectors, max recovery error {worst:.1e}"))
}

fn is_flat(k: &SimplicialComplex2, f: &EdgeField, tol: f64) -> Result<bool, String> {
    for &t in k.triangles() {
        if triangle_curvature(k, f, t).map_err(s)?.norm() > tol {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Consistency of the holonomy matrix ⇔ flatness of the field.
fn criterion_2() -> Outcome {
    let tol = 1e-9;
    let k = SimplicialComplex2::full_simplex(4);
    let mut rng = ChaCha8Rng::seed_from_u64(202);
    let mut tally = Vec::new();
    for g in GROUPS {
        let (mut flat_n, mut curved_n) = (0, 0);
        for t in 0..200 {
            let field = if t % 4 == 0 {
                random_field(&k, g, &mut rng)
            } else {
                let lambda = random_gauge(g, k.vertex_count(), &mut rng);
                let mut values = EdgeField::from_vertex_gauge(&k, &lambda).unwrap().values().to_vec();
                let eps = match t % 4 {
                    1 => None,
                    2 => Some(1e-12),
                    _ => Some(1e-6),
                };
                if let Some(eps) = eps {
                    if !matches!(g, Group::ZMod(_)) || t % 4 == 3 {
                        let e = rng.random_range(0..values.len());
                        values[e] = values[e].mul(&small_element(g, eps, &mut rng)).unwrap();
                    }
                }
                EdgeField::from_values(&k, g, values).unwrap()
            };
            let flat = is_flat(&k, &field, tol)?;
            let m = holonomy_pc_matrix(&k, &field).map_err(s)?;
            ensure(m.variance() == Variance::Contravariant, || "holonomy matrix not contravariant".into())?;
            let consistent = m.is_consistent(tol).map_err(s)?.consistent;
            ensure(flat == consistent, || {
                format!("{g}, field {t}: flat = {flat} but consistent = {consistent}")
            })?;
            if flat {
                flat_n += 1;
            } else {
                curved_n += 1;
            }
        }
        ensure(flat_n > 0 && curved_n > 0, || format!("{g}: only one class sampled"))?;
        tally.push(format!("{g} {flat_n}/{curved_n}"));
    }

    // ℤ_2 on one triangle: flat iff the edge labels sum to 0 mod 2.
    let tri = SimplicialComplex2::full_simplex(2);
    let mut flat_cases = 0;
    for bits in 0..8u32 {
        let values: Vec<Element> = (0..3)
            .map(|e| Element::zmod(2, ((bits >> e) & 1) as i64).unwrap())
            .collect();
        let expected = bits.count_ones() % 2 == 0;
        let f = EdgeField::from_values(&tri, Group::ZMod(2), values).unwrap();
        let flat = is_flat(&tri, &f, tol)?;
        let consistent = holonomy_pc_matrix(&tri, &f).map_err(s)?.is_consistent(tol).map_err(s)?.consistent;
        ensure(flat == expected && consistent == expected, || {
            format!("z2 labels {bits:03b}: expected {expected}, flat {flat}, consistent {consistent}")
        })?;
        flat_cases += usize::from(expected);
    }
    ensure(flat_cases == 4, || format!("{flat_cases} flat z2 fields, expected 4"))?;
    Ok(format!("flat/curved per group: {}; z2 triangle 8 cases", tally.join(", ")))
}

/// ii3 golden values and the exponential form.
fn criterion_3() -> Outcome {
    let golden = [
        ((2.0, 8.0, 4.0), 0.0),
        ((1.0, 2.0, 1.0), 0.5),
        ((2.0, 4.0, 4.0), 0.5),
        ((2.0, 4.0, 8.0), 0.75),
    ];
    for ((x, y, z), want) in golden {
        let got = ii3(x, y, z).map_err(s)?;
        ensure((got - want).abs() <= 1e-12, || format!("ii3({x}, {y}, {z}) = {got}, expected {want}"))?;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(303);
    let mut worst = 0.0f64;
    for _ in 0..10_000 {
        let [x, y, z]: [f64; 3] = std::array::from_fn(|_| rng.random_range(-5.0f64..5.0).exp());
        let closed = 1.0 - (-(y / (x * z)).ln().abs()).exp();
        let got = ii3(x, y, z).map_err(s)?;
        let m = PcMatrix::from_upper(
            Group::RPlus,
            3,
            &[Element::rplus(x).unwrap(), Element::rplus(y).unwrap(), Element::rplus(z).unwrap()],
            Variance::Covariant,
        )
        .map_err(s)?;
        let scaled = m.ii_indicator(&Indicator::Ii3Scale).map_err(s)?.value;
        worst = worst.max((got - closed).abs()).max((scaled - closed).abs());
    }
    ensure(worst <= 1e-12, || format!("exponential form off by {worst:e}"))?;
    Ok(format!("4 golden values; 10^4 random triads, max deviation {worst:.1e}"))
}

/// Closed-form consistencization beats a grid over the consistent 3×3 manifold.
fn criterion_4() -> Outcome {
    // consistent matrices [[1, x, xy], [1/x, 1, y], [1/(xy), 1/y, 1]]
    let grid: Vec<f64> = (0..200).map(|p| -8.0 + 16.0 * p as f64 / 199.0).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(404);
    let mut min_gap = f64::INFINITY;
    for t in 0..100 {
        let logs: [f64; 3] = std::array::from_fn(|_| rng.random_range(-3.0..3.0));
        let upper: Vec<Element> = logs.iter().map(|l| Element::rplus(l.exp()).unwrap()).collect();
        let a = PcMatrix::from_upper(Group::RPlus, 3, &upper, Variance::Covariant).map_err(s)?;
        let r = consistencize_abelian(&a).map_err(s)?;
        let [l01, l02, l12] = logs;
        let resid = |lx: f64, ly: f64| (l01 - lx).powi(2) + (l02 - lx - ly).powi(2) + (l12 - ly).powi(2);
        let c = &r.consistent;
        let cx = scalar(c.get(0, 1).unwrap()).ln();
        let cy = scalar(c.get(1, 2).unwrap()).ln();
        let cxy = scalar(c.get(0, 2).unwrap()).ln();
        ensure((cxy - cx - cy).abs() <= 1e-10, || format!("matrix {t}: output not on the consistent manifold"))?;
        let closed = resid(cx, cy);
        ensure((closed - r.residual).abs() <= 1e-10, || {
            format!("matrix {t}: reported residual {} vs recomputed {closed}", r.residual)
        })?;
        let best = grid
            .iter()
            .flat_map(|&lx| grid.iter().map(move |&ly| (lx, ly)))
            .map(|(lx, ly)| resid(lx, ly))
            .fold(f64::INFINITY, f64::min);
        ensure(closed <= best + 1e-12, || format!("matrix {t}: grid residual {best} < closed form {closed}"))?;
        min_gap = min_gap.min(best - closed);
        ensure(r.ii_after.abs() <= 1e-10, || format!("matrix {t}: ii_after = {}", r.ii_after))?;
    }
    Ok(format!("100 matrices, min(grid − closed form) = {min_gap:.2e}"))
}

fn central_difference_error(a: &PcMatrix, lambda: &GaugeVector) -> Result<f64, String> {
    let h = 1e-5;
    let g = objective_gradient(a, lambda).map_err(s)?;
    let (mut num, mut den) = (0.0, 0.0);
    for m in 0..lambda.len() {
        for d in 0..3 {
            let f = |sign: f64| {
                let mut e = [0.0; 3];
                e[d] = sign * h;
                let mut l = lambda.as_slice().to_vec();
                l[m] = l[m].mul(&Group::Su2.exp_coords(&e).unwrap()).unwrap();
                objective(a, &GaugeVector::new(l).unwrap()).unwrap()
            };
            let fd = (f(1.0) - f(-1.0)) / (2.0 * h);
            num += (fd - g[m][d]).powi(2);
            den += fd * fd;
        }
    }
    Ok((num / den).sqrt())
}

/// Riemannian descent on perturbed SU(2) matrices.
fn criterion_5() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(505);
    let (mut improved, mut worst_grad) = (0, 0.0f64);
    for t in 0..100 {
        let base = from_gauge_vector(&random_gauge(Group::Su2, 4, &mut rng)).map_err(s)?;
        let upper: Vec<Element> = base
            .upper_triangle()
            .into_iter()
            .map(|e| {
                let eps = rng.random_range(0.05..0.5);
                e.unwrap().mul(&small_element(Group::Su2, eps, &mut rng)).unwrap()
            })
            .collect();
        let a = PcMatrix::from_upper(Group::Su2, 4, &upper, Variance::Covariant).map_err(s)?;

        let probe = random_gauge(Group::Su2, 4, &mut rng);
        let err = central_difference_error(&a, &probe)?;
        worst_grad = worst_grad.max(err);
        ensure(err < 1e-6, || format!("matrix {t}: gradient relative error {err:e}"))?;

        let r = consistencize_riemannian(&a, &DescentOptions::default()).map_err(s)?;
        if let Some(w) = r.objective_trace.windows(2).find(|w| w[1] > w[0]) {
            return Err(format!("matrix {t}: objective increased {} -> {}", w[0], w[1]));
        }
        if r.ii_after < r.ii_before {
            improved += 1;
        }
    }
    ensure(improved >= 99, || format!("ii decreased in only {improved}/100 cases"))?;
    Ok(format!("max gradient error {worst_grad:.1e}; ii decreased in {improved}/100"))
}

/// Gauge invariance of global_ii and ii_indicator.
fn criterion_6() -> Outcome {
    let k = SimplicialComplex2::full_simplex(3);
    let mut rng = ChaCha8Rng::seed_from_u64(606);
    let mut worst = 0.0f64;
    let indicators = [Indicator::Distance, Indicator::Ii3Scale];
    for g in GROUPS {
        let field = random_field(&k, g, &mut rng);
        let cov = random_matrix(g, 5, &mut rng);
        let contra = cov.dualize().map_err(s)?;
        for t in 0..1000 {
            let mu = random_gauge(g, k.vertex_count(), &mut rng);
            let moved = gauge_transform_field(&k, &field, &mu).map_err(s)?;
            let nu = random_gauge(g, 5, &mut rng);
            let a = if t % 2 == 0 { &cov } else { &contra };
            let b = a.gauge_transform(&nu).map_err(s)?;
            for ind in &indicators {
                let d1 = (global_ii(&k, &field, ind).map_err(s)?.value
                    - global_ii(&k, &moved, ind).map_err(s)?.value)
                    .abs();
                let d2 = (a.ii_indicator(ind).map_err(s)?.value - b.ii_indicator(ind).map_err(s)?.value).abs();
                worst = worst.max(d1).max(d2);
                ensure(d1 <= 1e-10 && d2 <= 1e-10, || {
                    format!("{g}, transform {t}, {ind:?}: global_ii moved {d1:e}, ii moved {d2:e}")
                })?;
            }
        }
    }
    Ok(format!("4000 transforms, max change {worst:.1e}"))
}

fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let h = (b - a) / n as f64;
    let mut acc = f(a) + f(b);
    for i in 1..n {
        acc += f(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    acc * h / 3.0
}

/// Monte Carlo constants.
fn criterion_7() -> Outcome {
    let budget = Duration::from_secs(30);
    // U(1): θ uniform on (−π, π], d = |θ|.
    let u1 = simpson(|t| t.abs() / (2.0 * PI), -PI, PI, 100_000);
    // SU(2): d = ψ ∈ [0, π] with Haar density (2/π)·sin²ψ.
    let su2 = simpson(|p| p * p.sin().powi(2) * 2.0 / PI, 0.0, PI, 100_000);
    ensure((u1 - PI / 2.0).abs() < 1e-9 && (su2 - PI / 2.0).abs() < 1e-9, || {
        format!("quadrature gives {u1}, {su2}")
    })?;

    let tri = SimplicialComplex2::full_simplex(2);
    let mut notes = Vec::new();
    let runs = [
        (Group::U1, Observable::MeanCurvatureIn(Indicator::Distance), PI / 2.0),
        (Group::Su2, Observable::MeanCurvatureIn(Indicator::Distance), PI / 2.0),
        (Group::U1, Observable::WilsonCharacter(None), 0.0),
    ];
    for (i, (g, obs, want)) in runs.iter().enumerate() {
        let start = Instant::now();
        let est = expectation(Some(&tri), *g, obs, 100_000, 7 + i as u64).map_err(s)?;
        let el = start.elapsed();
        let z = (est.mean - want).abs() / est.std_error;
        ensure(z <= 3.0, || format!("{g} {}: mean {} is {z:.2} std errors from {want}", est.observable, est.mean))?;
        ensure(est.std_error < 0.01, || format!("{g} {}: std_error {}", est.observable, est.std_error))?;
        ensure(el < budget, || format!("{g} {}: took {el:.2?}", est.observable))?;
        notes.push(format!("{g} {} {:.4}±{:.4} ({el:.1?})", est.observable, est.mean, est.std_error));
    }
    Ok(notes.join("; "))
}

/// Determinism across runs and worker counts.
fn criterion_8() -> Outcome {
    let grid = SimplicialComplex2::grid(2);
    let cases = [
        (Some(&grid), Group::Su2, Observable::MeanCurvatureIn(Indicator::Distance)),
        (Some(&grid), Group::U1, Observable::WilsonCharacter(None)),
        (None, Group::ZMod(3), Observable::IiOfRandomMatrix { n: 4, indicator: Indicator::Distance }),
    ];
    for (k, g, obs) in &cases {
        let reports: Vec<String> = [Some(1), Some(2), Some(8), Some(1)]
            .into_iter()
            .map(|w| {
                let r = run_report(*k, *g, obs, 5000, 42, w, true).unwrap();
                serde_json::to_string_pretty(&r).unwrap()
            })
            .collect();
        ensure(reports.windows(2).all(|w| w[0] == w[1]), || {
            format!("{g} {}: reports differ across worker counts", obs.tag())
        })?;
    }

    let exe = env!("CARGO_BIN_EXE_pcgauge");
    let outputs: Vec<Vec<u8>> = ["1", "2", "8", "2"]
        .iter()
        .map(|w| {
            let o = Command::new(exe)
                .args(["montecarlo", "--group", "su2", "--grid", "2", "-N", "3000", "--seed", "9", "--workers", w])
                .output()
                .expect("run pcgauge");
            assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
            o.stdout
        })
        .collect();
    ensure(outputs.windows(2).all(|w| w[0] == w[1]), || "CLI output differs between runs".into())?;
    Ok(format!("{} library configurations × 4 runs, CLI 4 runs byte-identical", cases.len()))
}

/// Brute force over ℤ_3 with n = 3, independent of the library.
fn criterion_9() -> Outcome {
    let m = 3i64;
    let metric = |r: i64| {
        let r = r.rem_euclid(m);
        2.0 * PI * r.min(m - r) as f64 / m as f64
    };
    let mut consistent_count = 0;
    for code in 0..27i64 {
        let (x, y, z) = (code % 3, (code / 3) % 3, code / 9);
        // a[i][j] as residues, a[j][i] = −a[i][j]
        let mut a = [[0i64; 3]; 3];
        for (i, j, v) in [(0, 1, x), (0, 2, y), (1, 2, z)] {
            a[i][j] = v;
            a[j][i] = (-v).rem_euclid(m);
        }
        let mut brute_consistent = true;
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    if (a[i][j] + a[j][k] - a[i][k]).rem_euclid(m) != 0 {
                        brute_consistent = false;
                    }
                }
            }
        }
        let brute_ii = metric(-(a[0][1] + a[1][2] + a[2][0]));

        let upper: Vec<Element> = [x, y, z].iter().map(|&v| Element::zmod(3, v).unwrap()).collect();
        for variance in [Variance::Covariant, Variance::Contravariant] {
            let lib = PcMatrix::from_upper(Group::ZMod(3), 3, &upper, variance).map_err(s)?;
            let c = lib.is_consistent(1e-10).map_err(s)?.consistent;
            ensure(c == brute_consistent, || format!("({x}, {y}, {z}) {variance:?}: consistency {c} vs {brute_consistent}"))?;
            for (i, j, k) in [(0, 1, 2), (0, 2, 1), (1, 0, 2), (1, 2, 0), (2, 0, 1), (2, 1, 0)] {
                let h = lib.triad_holonomy(i, j, k).map_err(s)?;
                let want = (a[i][j] + a[j][k] + a[k][i]).rem_euclid(m) as u32;
                ensure(h == Element::ZMod { m: 3, r: want }, || {
                    format!("({x}, {y}, {z}) {variance:?}: holonomy of ({i}, {j}, {k}) is {h:?}, expected {want}")
                })?;
            }
            let ii = lib.ii_indicator(&Indicator::Distance).map_err(s)?.value;
            ensure((ii - brute_ii).abs() <= 1e-12, || format!("({x}, {y}, {z}): ii {ii} vs {brute_ii}"))?;
        }
        consistent_count += usize::from(brute_consistent);
    }
    ensure(consistent_count == 9, || format!("{consistent_count} consistent assignments, expected 9"))?;
    Ok("27 assignments × 2 variances agree; 9 consistent".into())
}

struct Criterion {
    id: u32,
    name: &'static str,
    budget: Option<Duration>,
    run: fn() -> Outcome,
}

fn main() {
    let criteria = [
        Criterion { id: 1, name: "gauge vector round trip", budget: Some(Duration::from_secs(5)), run: criterion_1 },
        Criterion { id: 2, name: "consistency iff flat holonomy", budget: Some(Duration::from_secs(10)), run: criterion_2 },
        Criterion { id: 3, name: "ii3 golden values", budget: None, run: criterion_3 },
        Criterion { id: 4, name: "abelian consistencization optimality", budget: Some(Duration::from_secs(30)), run: criterion_4 },
        Criterion { id: 5, name: "riemannian descent", budget: Some(Duration::from_secs(60)), run: criterion_5 },
        Criterion { id: 6, name: "gauge invariance", budget: None, run: criterion_6 },
        Criterion { id: 7, name: "monte carlo constants", budget: None, run: criterion_7 },
        Criterion { id: 8, name: "determinism", budget: None, run: criterion_8 },
        Criterion { id: 9, name: "z3 brute-force oracle", budget: None, run: criterion_9 },
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    let mut ran = 0;
    for c in &criteria {
        let label = format!("criterion {} ({})", c.id, c.name);
        if !filter.is_empty() && !filter.iter().any(|f| label.contains(f.as_str())) {
            continue;
        }
        ran += 1;
        let start = Instant::now();
        let outcome = panic::catch_unwind(c.run).unwrap_or_else(|p| {
            Err(p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panicked".into()))
        });
        let elapsed = start.elapsed();
        let outcome = match (outcome, c.budget) {
            (Ok(msg), Some(b)) if elapsed > b => Err(format!("{msg}; runtime {elapsed:.2?} over {b:?}")),
            (o, _) => o,
        };
        match outcome {
            Ok(msg) => println!("{label}: PASS [{elapsed:.2?}] {msg}"),
            Err(msg) => {
                failed += 1;
                println!("{label}: FAIL [{elapsed:.2?}] {msg}");
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", ran - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
