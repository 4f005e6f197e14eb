//! Acceptance criteria. Runs without the libtest harness and prints one
//! `PASS`/`FAIL` line per criterion; exits non-zero if any criterion fails.
//!
//! `cargo test --test acceptance -- 1 4 7` runs a subset.

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use equicalib::bounds::{ece_lower, ece_upper_fiberwise, ece_upper_naive, hoeffding_n, ConfidenceDensity};
use equicalib::dataset::{PointKind, WeightedDataset};
use equicalib::evidential::{beta_nll, evidential_nll, NigParams};
use equicalib::generators::{calibrated_gaussian, circle20, permutation24, swiss_rolls, NoiseSampling, VectorFieldKind};
use equicalib::group::{build_group, decompose_orbits, FiniteGroup, GroupDescriptor, DEFAULT_TOL};
use equicalib::metrics::{ece_binned, gence, gence_sq, regression_error, ClassifierOutput, FiberMode, FiberPartition, RegressorOutput};
use equicalib::models::experiments::{
    run_swissroll_sweep, run_vectorfield_experiment, summarize_sweep, SwissConfig, VectorFieldConfig,
};
use equicalib::models::VectorModelKind;
use equicalib::numeric::spearman;
use equicalib::rng::{child_seed, stream};
use equicalib::symmetry::{
    classification_bounds, equivariant_orbit_lower_bound, fiber_dissent, invariant_regression_lower_bound,
    orbit_mean_predictor,
};
use equicalib::worked::{example_4_2, example_4_3, example_4_4, example_5_1};
use rand::Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol
}

// ─── 1-4: closed-form bounds ────────────────────────────────────────────────────

fn c1() -> Outcome {
    let v = |mu: f64| ece_upper_naive(&ConfidenceDensity::TruncatedNormal { mu, sigma: 0.1, a: 0.0, b: 1.0 }).unwrap().value;
    let (a, b, c) = (v(0.25), v(0.5), v(0.75));
    outcome(
        close(b, 0.58, 0.01) && close(a, 0.75, 0.01) && close(c, 0.75, 0.01),
        format!("mu=0.25 -> {a:.4}, mu=0.5 -> {b:.4}, mu=0.75 -> {c:.4}"),
    )
}

fn c2() -> Outcome {
    let r = example_4_2().unwrap();
    let rot = example_4_3().unwrap()[0].value;
    outcome(
        close(r[0].value, 0.9, 1e-12) && close(r[1].value, 0.7, 1e-12) && close(rot, 0.7, 1e-12),
        format!("two fibers {}, one fiber {}, rotation {}", r[0].value, r[1].value, rot),
    )
}

fn c3() -> Outcome {
    let r = example_4_4().unwrap();
    let (mp, nominal, exact) = (r[0].value, r[1].value, &r[2]);
    let flagged = exact.flags.iter().any(|f| f.contains("discrepancy"));
    outcome(
        close(mp, 0.25, 1e-12) && close(nominal, 0.0009375, 1e-12) && close(exact.value, 2.55e-4, 0.005e-4) && flagged,
        format!("m'={mp}, nominal {nominal:.7}, exact {:.4e} (flagged: {flagged})", exact.value),
    )
}

fn c4() -> Outcome {
    let mut ok = true;
    let mut detail = String::new();
    for s1 in [0.5, 1.0, 2.0] {
        let r = example_5_1(s1).unwrap();
        let c = |n: &str| r[0].component(n).unwrap();
        ok &= close(c("err_s1"), PI / 8.0, 1e-12) && c("err_s2") == 0.0;
        ok &= close(c("mass_s1"), 0.5, 1e-12) && close(c("mass_s2"), 0.5, 1e-12);
        ok &= close(r[0].value, 1.0 + PI * PI / (16.0 * s1), 1e-12);
        if s1 == 1.0 {
            ok &= close(r[0].value, 1.6169, 1e-4);
            detail = format!("errors {{0, {:.6}}}, masses {{0.5, 0.5}}, UB(s1=1) = {:.6}", c("err_s1"), r[0].value);
        }
    }
    outcome(ok, detail)
}

// ─── 5: bound sandwich ───────────────────────────────────────────────────────

struct Instance {
    ds: WeightedDataset,
    group: FiniteGroup,
}

/// Orbits of random planar base points under a random small group, with
/// random weights and labels. Some instances have label-balanced orbits.
fn random_instance(rng: &mut impl Rng) -> Instance {
    let descriptor = match rng.random_range(0..3) {
        0 => GroupDescriptor::Cyclic(rng.random_range(2..7)),
        1 => GroupDescriptor::Dihedral(rng.random_range(2..5)),
        _ => GroupDescriptor::ReflectX,
    };
    let group = build_group(descriptor).unwrap();
    let n_classes = rng.random_range(2..4);
    let balanced = rng.random_bool(0.3);
    let mut points = Vec::new();
    let mut labels = Vec::new();
    let mut weights = Vec::new();
    for _ in 0..rng.random_range(3..12) {
        let (r, t): (f64, f64) = (rng.random_range(0.5..2.0), rng.random_range(0.0..2.0 * PI));
        let base = [r * t.cos(), r * t.sin()];
        for (j, g) in (0..group.order()).enumerate() {
            let y = group.apply(g, &base, equicalib::group::Side::Input, PointKind::Vector { dim: 2 }).unwrap();
            points.push(y);
            labels.push(if balanced { j % n_classes } else { rng.random_range(0..n_classes) });
            weights.push(rng.random_range(0.1..1.0));
        }
    }
    let total: f64 = weights.iter().sum();
    weights.iter_mut().for_each(|w| *w /= total);
    let ds = WeightedDataset::new(PointKind::Vector { dim: 2 }, points, Some(labels), None, weights).unwrap();
    Instance { ds, group }
}

fn c5() -> Outcome {
    let n_bins = 10;
    let slack = 1.0 / n_bins as f64;
    let mut rng = stream(5, 0);
    let (mut violations, mut instances, mut nontrivial_lower) = (0, 0, 0);
    while instances < 250 {
        let Instance { ds, group } = random_instance(&mut rng);
        let orbits = decompose_orbits(&ds, &group, DEFAULT_TOL).unwrap();
        let n_classes = ds.num_classes();
        // invariant classifier: one label and one fiber per orbit; each
        // fiber sits in its own bin
        let orbit_label: Vec<usize> = (0..orbits.len()).map(|_| rng.random_range(0..n_classes)).collect();
        let orbit_fiber: Vec<usize> = (0..orbits.len()).map(|_| rng.random_range(0..n_bins)).collect();
        let fiber_conf: Vec<f64> = (0..n_bins).map(|k| (k as f64 + rng.random_range(0.05..0.95)) / n_bins as f64).collect();
        let outputs: Vec<ClassifierOutput> = (0..ds.len())
            .map(|i| {
                let o = orbits.orbit_of[i];
                ClassifierOutput { label: orbit_label[o], confidence: fiber_conf[orbit_fiber[o]] }
            })
            .collect();
        let labels = ds.labels().unwrap();
        let measured = ece_binned(&outputs, labels, &ds.weights, n_bins).unwrap().ece;

        let fibers: Vec<Vec<usize>> = (0..n_bins)
            .map(|k| (0..ds.len()).filter(|&i| orbit_fiber[orbits.orbit_of[i]] == k).collect::<Vec<_>>())
            .filter(|f| !f.is_empty())
            .collect();
        let dissent = fiber_dissent(&ds, &group, &fibers, DEFAULT_TOL).unwrap();
        let mut p2 = 0.0;
        for f in &fibers {
            let mass: f64 = f.iter().map(|&i| ds.weights[i]).sum();
            let acc = f.iter().filter(|&&i| outputs[i].label == labels[i]).map(|&i| ds.weights[i]).sum::<f64>() / mass;
            if acc >= outputs[f[0]].confidence {
                p2 += mass;
            }
        }
        let m_up = dissent.iter().map(|d| d.majority).fold(f64::INFINITY, f64::min);
        let m_low = dissent.iter().map(|d| 1.0 - d.minority).fold(f64::INFINITY, f64::min).max(0.0);
        let r = ConfidenceDensity::Empirical { values: outputs.iter().map(|o| o.confidence).collect(), weights: ds.weights.clone() };
        let upper = ece_upper_fiberwise(&r, m_up.min(1.0), p2.min(1.0)).unwrap().value;
        let lower = ece_lower(&r, m_low.min(1.0)).unwrap().value;
        if lower > 0.0 {
            nontrivial_lower += 1;
        }
        if !(lower - slack <= measured && measured <= upper + slack) {
            violations += 1;
        }
        instances += 1;
    }
    outcome(violations == 0, format!("{instances} instances, {violations} violations, {nontrivial_lower} with a positive lower bound"))
}

// ─── 6: error bounds ─────────────────────────────────────────────────────────

fn ring_regression(rng: &mut impl Rng, group: &FiniteGroup, dim: usize) -> WeightedDataset {
    let mut points = Vec::new();
    let mut targets = Vec::new();
    let mut weights = Vec::new();
    for _ in 0..8 {
        let (r, t): (f64, f64) = (rng.random_range(0.5..2.0), rng.random_range(0.0..2.0 * PI));
        let base = vec![r * t.cos(), r * t.sin(), 0.0];
        for g in 0..group.order() {
            points.push(group.apply(g, &base, equicalib::group::Side::Input, PointKind::Vector { dim }).unwrap());
            targets.push((0..dim).map(|_| rng.random_range(-1.0..1.0)).collect::<Vec<f64>>());
            weights.push(rng.random_range(0.1..1.0));
        }
    }
    let total: f64 = weights.iter().sum();
    weights.iter_mut().for_each(|w| *w /= total);
    WeightedDataset::new(PointKind::Vector { dim }, points, None, Some(targets), weights).unwrap()
}

fn c6() -> Outcome {
    let mut rng = stream(6, 0);
    let mut cls_ok = true;
    let datasets: Vec<(WeightedDataset, GroupDescriptor)> = vec![
        (circle20(), GroupDescriptor::ReflectX),
        (circle20(), GroupDescriptor::Cyclic(20)),
        (swiss_rolls(0.5, 40, 3).unwrap(), GroupDescriptor::ZSwap),
        (permutation24(), GroupDescriptor::Symmetric(4)),
    ];
    for (ds, g) in &datasets {
        let group = build_group(*g).unwrap();
        let b = classification_bounds(ds, &group, DEFAULT_TOL).unwrap();
        let labels = ds.labels().unwrap();
        let n_classes = ds.num_classes();
        for _ in 0..1000 {
            let pick: Vec<usize> = (0..b.orbits.len()).map(|_| rng.random_range(0..n_classes)).collect();
            let err: f64 = (0..ds.len()).filter(|&i| pick[b.orbits.orbit_of[i]] != labels[i]).map(|i| ds.weights[i]).sum();
            cls_ok &= b.lower - 1e-12 <= err && err <= b.upper + 1e-12;
        }
    }
    let mut reg_gap: f64 = 0.0;
    let mut eq_gap: f64 = 0.0;
    for (k, d) in [GroupDescriptor::Cyclic(4), GroupDescriptor::Dihedral(3), GroupDescriptor::Cyclic(6)].into_iter().enumerate() {
        let group = build_group(d).unwrap().embedded(3).unwrap();
        for dim_out in [1usize, 3] {
            let ds = ring_regression(&mut stream(60 + k as u64, dim_out as u64), &group, 3);
            let ds = if dim_out == 1 {
                let t: Vec<Vec<f64>> = ds.targets().unwrap().iter().map(|t| vec![t[0]]).collect();
                WeightedDataset::new(ds.kind, ds.points.clone(), None, Some(t), ds.weights.clone()).unwrap()
            } else {
                ds
            };
            let orbits = decompose_orbits(&ds, &group, DEFAULT_TOL).unwrap();
            let bound = invariant_regression_lower_bound(&ds, &orbits).unwrap();
            let pred = orbit_mean_predictor(&ds, &orbits).unwrap();
            let achieved = regression_error(&pred, ds.targets().unwrap(), &ds.weights, None).unwrap();
            reg_gap = reg_gap.max((achieved - bound).abs());
            let identity = vec![nalgebra::DMatrix::<f64>::identity(dim_out, dim_out); group.order()];
            let trivial = group.clone().with_output_rep(identity).unwrap();
            let eq = equivariant_orbit_lower_bound(&ds, &trivial, DEFAULT_TOL).unwrap();
            eq_gap = eq_gap.max((eq - bound).abs());
        }
    }
    outcome(
        cls_ok && reg_gap <= 1e-10 && eq_gap <= 1e-10,
        format!("classifier errors within bounds: {cls_ok}; orbit-mean gap {reg_gap:.1e}; equivariant-vs-invariant gap {eq_gap:.1e}"),
    )
}

// ─── 7: GENCE baselines ──────────────────────────────────────────────────────

fn c7() -> Outcome {
    let cg = calibrated_gaussian(1_000_000, 1, (0.5, 2.0), 7, NoiseSampling::Stratified).unwrap();
    let outputs: Vec<RegressorOutput> = cg
        .means
        .iter()
        .zip(&cg.variances)
        .map(|(m, s)| RegressorOutput { mean: m.clone(), variance: s.clone() })
        .collect();
    let w = &cg.dataset.weights;
    let fibers = FiberPartition::from_vectors(&cg.variances, w, FiberMode::Exact).unwrap();
    let t = cg.dataset.targets().unwrap();
    let g = gence(&outputs, t, w, &fibers).unwrap().value;
    let gs = gence_sq(&outputs, t, w, &fibers).unwrap().value;
    let base = (PI - 2.0) / 2.0;
    outcome(close(g, base, 0.003) && close(gs, 2.0, 0.01), format!("GENCE {g:.5} (target {base:.5}), GENCE_sq {gs:.5} (target 2)"))
}

// ─── 8: gradient checks ──────────────────────────────────────────────────────

fn rel_err(analytic: f64, fd: f64) -> f64 {
    (analytic - fd).abs() / fd.abs().max(analytic.abs()).max(1e-3)
}

fn c8() -> Outcome {
    let mut rng = stream(8, 0);
    let h = 1e-6;
    let mut worst_nig: f64 = 0.0;
    for _ in 0..100 {
        let y: f64 = rng.random_range(-3.0..3.0);
        let lambda: f64 = rng.random_range(0.0..0.5);
        let p: [f64; 4] = [rng.random_range(-3.0..3.0), rng.random_range(0.2..5.0), rng.random_range(1.2..6.0), rng.random_range(0.2..5.0)];
        // keep the |y − γ| kink away from the stencil
        if (y - p[0]).abs() < 1e-3 {
            continue;
        }
        let f = |q: [f64; 4]| evidential_nll(y, NigParams::new(q[0], q[1], q[2], q[3]).unwrap(), lambda).unwrap().0;
        let (_, g) = evidential_nll(y, NigParams::new(p[0], p[1], p[2], p[3]).unwrap(), lambda).unwrap();
        let analytic = [g.gamma, g.nu, g.alpha, g.beta];
        for k in 0..4 {
            let (mut up, mut dn) = (p, p);
            up[k] += h;
            dn[k] -= h;
            worst_nig = worst_nig.max(rel_err(analytic[k], (f(up) - f(dn)) / (2.0 * h)));
        }
    }
    let mut worst_beta: f64 = 0.0;
    for _ in 0..100 {
        let (y, mu, s2, b): (f64, f64, f64, f64) = (rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0), rng.random_range(0.1..4.0), rng.random_range(0.0..1.0));
        let (_, dm, ds) = beta_nll(y, mu, s2, b).unwrap();
        // the weighting factor is a constant: differentiate with it frozen
        let frozen = |m: f64, s: f64| s2.powf(b) * beta_nll(y, m, s, 0.0).unwrap().0;
        worst_beta = worst_beta.max(rel_err(dm, (frozen(mu + h, s2) - frozen(mu - h, s2)) / (2.0 * h)));
        worst_beta = worst_beta.max(rel_err(ds, (frozen(mu, s2 + h) - frozen(mu, s2 - h)) / (2.0 * h)));
    }
    outcome(worst_nig < 1e-5 && worst_beta < 1e-5, format!("worst relative error: evidential {worst_nig:.2e}, beta-NLL {worst_beta:.2e}"))
}

// ─── 9-10: experiments ───────────────────────────────────────────────────────

fn seeds() -> Vec<u64> {
    (0..5).map(|i| child_seed(0, i)).collect()
}

fn c9() -> Outcome {
    let ratios = [0.0, 0.25, 0.5, 0.75, 1.0];
    let rows = run_swissroll_sweep(&ratios, &seeds(), &SwissConfig::default()).unwrap();
    let summary = summarize_sweep(&rows);
    let pick = |model: &str, f: fn(&equicalib::models::experiments::SwissSummary) -> f64| -> Vec<f64> {
        summary.iter().filter(|s| s.model == model).map(f).collect()
    };
    let inv_acc = pick("invariant", |s| s.acc);
    let inv_ece = pick("invariant", |s| s.ece);
    let unc_acc = pick("unconstrained", |s| s.acc);
    let increasing = inv_acc.windows(2).all(|w| w[1] > w[0]);
    let rho = spearman(&ratios, &inv_acc);
    let ece_drop = inv_ece[0] - inv_ece[4];
    let spread = unc_acc.iter().copied().fold(f64::NEG_INFINITY, f64::max) - unc_acc.iter().copied().fold(f64::INFINITY, f64::min);
    let fmt = |v: &[f64]| v.iter().map(|x| format!("{x:.3}")).collect::<Vec<_>>().join(" ");
    outcome(
        increasing && rho > 0.9 && ece_drop >= 0.05 && spread < 0.1,
        format!(
            "invariant acc [{}] (rho {rho:.2}), ECE(0)-ECE(1) = {ece_drop:.3}, unconstrained acc [{}] (spread {spread:.3})",
            fmt(&inv_acc),
            fmt(&unc_acc)
        ),
    )
}

fn c10() -> Outcome {
    let cfg = VectorFieldConfig::default();
    let spiral = run_vectorfield_experiment(VectorFieldKind::Spiral, &seeds(), &cfg).unwrap();
    let sinus = run_vectorfield_experiment(VectorFieldKind::Sinusoidal, &seeds(), &cfg).unwrap();
    let (u, r) = (VectorModelKind::Unconstrained, VectorModelKind::RadialEquivariant);
    let sp_ratio = spiral.mean_of(r, |x| x.bleed) / spiral.mean_of(u, |x| x.bleed);
    let si_ratio = sinus.mean_of(r, |x| x.bleed) / sinus.mean_of(u, |x| x.bleed);
    let (si_mse_r, si_mse_u) = (sinus.mean_of(r, |x| x.mse), sinus.mean_of(u, |x| x.mse));
    outcome(
        sp_ratio >= 5.0 && si_ratio <= 2.0 && si_mse_r <= si_mse_u,
        format!(
            "spiral bleed ratio {sp_ratio:.1}; sinusoidal bleed ratio {si_ratio:.2}, MSE radial {si_mse_r:.4} vs unconstrained {si_mse_u:.4}"
        ),
    )
}

// ─── 11: Hoeffding ───────────────────────────────────────────────────────────

fn c11() -> Outcome {
    let n = hoeffding_n(0.1, 0.05).unwrap();
    // confidences on [0.5, 1] with accuracy p² at confidence p; the
    // calibration error at p is |p² − p|
    let ce = |p: f64| (p * p - p).abs();
    let mut rng = stream(11, 0);
    let draw = |rng: &mut equicalib::rng::Rng, k: usize| -> f64 { (0..k).map(|_| ce(rng.random_range(0.5..1.0))).sum::<f64>() / k as f64 };
    let reference = draw(&mut rng, 1_000_000);
    let trials = 500;
    let failures = (0..trials).filter(|_| (draw(&mut rng, 200) - reference).abs() > 0.1).count();
    let rate = failures as f64 / trials as f64;
    let allowed = 0.05 + 3.0 * (0.05f64 * 0.95 / trials as f64).sqrt();
    outcome(n == 185 && rate <= allowed, format!("n(0.1, 0.05) = {n}; {failures}/{trials} deviations > 0.1 (allowed rate {allowed:.3})"))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome, Duration); 11] = [
        ("naive ECE bound", c1, Duration::from_secs(1)),
        ("fiber-count bounds", c2, Duration::from_secs(1)),
        ("bi-Lipschitz lower bound", c3, Duration::from_secs(1)),
        ("GENCE fiber bound", c4, Duration::from_secs(1)),
        ("bound sandwich", c5, Duration::from_secs(60)),
        ("error bounds", c6, Duration::from_secs(60)),
        ("GENCE baselines", c7, Duration::from_secs(30)),
        ("gradient checks", c8, Duration::from_secs(5)),
        ("swiss-roll sweep", c9, Duration::from_secs(600)),
        ("vector-field bleed", c10, Duration::from_secs(600)),
        ("hoeffding", c11, Duration::from_secs(60)),
    ];
    let selected: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut failed = 0;
    for (i, (name, run, limit)) in criteria.iter().enumerate() {
        let id = i + 1;
        if !selected.is_empty() && !selected.contains(&id) {
            continue;
        }
        let start = Instant::now();
        let o = run();
        let elapsed = start.elapsed();
        let in_time = elapsed <= *limit;
        let pass = o.pass && in_time;
        if !pass {
            failed += 1;
        }
        let timing = if in_time { String::new() } else { format!(" (over the {}s limit)", limit.as_secs()) };
        println!(
            "criterion {id:>2} {}: {name}: {} [{:.2}s{timing}]",
            if pass { "PASS" } else { "FAIL" },
            o.detail,
            elapsed.as_secs_f64()
        );
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
