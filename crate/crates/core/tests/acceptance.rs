use std::f64::consts::FRAC_PI_2;
use std::io::Write;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use gyromat::grassmann::{gr_log_identity, onb_log_identity, principal_angle_distance, tau, OnbFrame};
use gyromat::kgc::{random_model, rank_metrics, RankMetrics};
use gyromat::spd_gyro::SpdMetric;
use gyromat::spd_mlr::{demo_fit, DemoConfig};
use gyromat::verify::{property_of, run_suite, Dim, SuiteConfig, SuiteId, VerifyReport};

const SEED: u64 = 42;

struct Criterion {
    id: usize,
    title: &'static str,
    pass: bool,
    detail: String,
}

fn suite(id: SuiteId, trials: usize, tol: f64) -> VerifyReport {
    let mut cfg = SuiteConfig::new(id, trials, SEED);
    cfg.tol = tol;
    run_suite(&cfg).expect("suite configuration is valid")
}

/// Passes if every check whose property is in `props` passed; also fails if
/// none matched.
fn judge(report: &VerifyReport, props: &[&str]) -> (bool, String) {
    let chosen: Vec<_> = report
        .checks
        .iter()
        .filter(|c| props.contains(&property_of(&c.name)))
        .collect();
    let failed: Vec<&str> = chosen.iter().filter(|c| !c.pass).map(|c| c.name.as_str()).collect();
    let worst = chosen
        .iter()
        .map(|c| c.max_residual.unwrap_or(f64::NAN))
        .fold(0.0f64, |a, b| if b.is_nan() || a.is_nan() { f64::NAN } else { a.max(b) });
    let pass = !chosen.is_empty() && failed.is_empty();
    let detail = if failed.is_empty() {
        format!("{} checks, worst residual {worst:.2e}", chosen.len())
    } else {
        format!("failed: {}", failed.join(", "))
    };
    (pass, detail)
}

fn all_props(report: &VerifyReport) -> Vec<&str> {
    let mut props: Vec<&str> = report.checks.iter().map(|c| property_of(&c.name)).collect();
    props.dedup();
    props
}

fn axioms() -> Criterion {
    let start = Instant::now();
    let spd = suite(SuiteId::SpdAxioms, 500, 1e-8);
    let gr = suite(SuiteId::GrAxioms, 500, 1e-8);
    let elapsed = start.elapsed();
    let (ps, ds) = judge(&spd, &all_props(&spd));
    let (pg, dg) = judge(&gr, &all_props(&gr));
    Criterion {
        id: 1,
        title: "SPD and Grassmann gyrovector axioms, 500 trials at 1e-8",
        pass: ps && pg && elapsed < Duration::from_secs(180),
        detail: format!("spd: {ds}; gr: {dg}; {:.1} s", elapsed.as_secs_f64()),
    }
}

fn isometries(spd_iso: &VerifyReport) -> Criterion {
    let gr = suite(SuiteId::GrIsometries, 500, 1e-8);
    let (pg, dg) = judge(&gr, &all_props(&gr));
    let (ps, ds) = judge(
        spd_iso,
        &["spd.left_translation_isometry", "spd.gyration_isometry", "spd.inverse_isometry"],
    );
    Criterion {
        id: 2,
        title: "isometries preserve gyrodistance, 500 trials at 1e-8",
        pass: pg && ps,
        detail: format!("gr: {dg}; spd: {ds}"),
    }
}

fn diffeomorphisms() -> Criterion {
    let onb = suite(SuiteId::GrOnbConsistency, 200, 1e-9);
    let spd = suite(SuiteId::SpdAxioms, 200, 1e-9);
    let (po, d_o) = judge(&onb, &["gr.tau_add", "gr.tau_scale", "gr.tau_gyr"]);
    let (pc, dc) = judge(&spd, &["spd.cholesky_square"]);
    Criterion {
        id: 3,
        title: "frame/projector squares and the Cholesky square, 200 trials at 1e-9",
        pass: po && pc,
        detail: format!("tau: {d_o}; cholesky: {dc}"),
    }
}

fn triangles(spd_iso: &VerifyReport) -> Criterion {
    let (pass, detail) = judge(spd_iso, &["spd.gyrocosine_law", "spd.gyrosine_law"]);
    Criterion {
        id: 4,
        title: "laws of gyrocosines and gyrosines, 500 LE and LC triangles at 1e-8",
        pass,
        detail,
    }
}

fn planes() -> Criterion {
    let r = suite(SuiteId::SpdMlr, 25, 1e-9);
    let (pa, da) = judge(&r, &["mlr.lower_bound", "mlr.refined_minimum", "mlr.pseudo_equals_true"]);
    let (pb, db) = judge(&r, &["mlr.ai_pseudodistance"]);
    let (pc, dc) = judge(&r, &["mlr.block_diagonal"]);
    let ai_instances = r
        .checks
        .iter()
        .find(|c| property_of(&c.name) == "mlr.ai_pseudodistance")
        .map_or(0, |c| c.trials);
    Criterion {
        id: 5,
        title: "hypergyroplane distances against sampling and numeric oracles",
        pass: pa && pb && pc && ai_instances >= 50,
        detail: format!("flat: {da}; ai ({ai_instances} instances): {db}; blocks: {dc}"),
    }
}

fn kernels() -> Criterion {
    let r = suite(SuiteId::Kernels, 200, 1e-10);
    let (pass, detail) = judge(&r, &all_props(&r));
    Criterion {
        id: 6,
        title: "kernel roundtrips and second-order convergence of Dlog",
        pass,
        detail,
    }
}

fn grassmann_maps() -> Criterion {
    let r = suite(SuiteId::GrOnbConsistency, 500, 1e-9);
    let (pr, dr) = judge(&r, &["gr.exp_log_roundtrip"]);

    let at_cut = OnbFrame::from_row_slice(4, 2, &[0.0, 0.0, 0.0, 1.0, 1.0, 0.0, 0.0, 0.0]).unwrap();
    let angles = principal_angle_distance(&at_cut, &OnbFrame::identity(4, 2).unwrap()).unwrap();
    let cut_ok = (0..3).all(|_| {
        matches!(onb_log_identity(&at_cut).map_err(|e| e.name()), Err("CutLocus"))
            && matches!(gr_log_identity(&tau(&at_cut)).map_err(|e| e.name()), Err("CutLocus"))
    });

    let e1 = OnbFrame::identity(2, 1).unwrap();
    let worst_angle = (1..=15)
        .map(|k| {
            let theta = 0.1 * k as f64;
            let v = OnbFrame::from_row_slice(2, 1, &[theta.cos(), theta.sin()]).unwrap();
            (principal_angle_distance(&e1, &v).unwrap() - theta).abs()
        })
        .fold(0.0, f64::max);
    Criterion {
        id: 7,
        title: "Grassmann Exp/Log roundtrip, cut locus detection, principal angles",
        pass: pr && cut_ok && worst_angle < 1e-10,
        detail: format!(
            "roundtrip: {dr}; cut locus at angle {angles:.6} (π/2 = {FRAC_PI_2:.6}) detected: {cut_ok}; angle error {worst_angle:.1e}"
        ),
    }
}

fn mlr_demo() -> Criterion {
    let cfg = DemoConfig::default();
    let mut pass = true;
    let mut parts = Vec::new();
    for metric in [SpdMetric::Le, SpdMetric::Ai] {
        let start = Instant::now();
        let fit = demo_fit(&cfg, metric);
        let elapsed = start.elapsed();
        match fit {
            Ok(r) => {
                pass &= r.train_accuracy >= 0.95 && elapsed < Duration::from_secs(60);
                parts.push(format!("{metric} accuracy {:.3} in {:.1} s", r.train_accuracy, elapsed.as_secs_f64()));
            }
            Err(e) => {
                pass = false;
                parts.push(format!("{metric} failed: {e}"));
            }
        }
    }
    Criterion {
        id: 8,
        title: "MLR demo (n=3, K=3, 300 samples) reaches 95% train accuracy",
        pass,
        detail: parts.join("; "),
    }
}

/// Pessimistic rank by sorting: 1 + the last sorted position holding a score
/// at least the truth's.
fn sorted_rank(scores: &[f64], truth: usize) -> usize {
    let mut sorted = scores.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    sorted.iter().rposition(|&s| s >= scores[truth]).unwrap() + 1
}

fn brute_force_metrics(scores: &[Vec<f64>], truth: &[usize]) -> RankMetrics {
    let mut acc = [0.0; 4];
    for (s, &t) in scores.iter().zip(truth) {
        let rank = sorted_rank(s, t);
        acc[0] += 1.0 / rank as f64;
        for (slot, k) in [(1, 1), (2, 3), (3, 10)] {
            if rank <= k {
                acc[slot] += 1.0;
            }
        }
    }
    let q = scores.len() as f64;
    RankMetrics { mrr: acc[0] / q, hits1: acc[1] / q, hits3: acc[2] / q, hits10: acc[3] / q }
}

fn kgc() -> Criterion {
    let r = suite(SuiteId::Kgc, 200, 1e-10);
    let (ps, ds) = judge(&r, &["kgc.trivial_score", "kgc.object_rotation_invariance"]);

    let model = random_model(4, 2, 15, 3, 0.6, SEED).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut scores = Vec::new();
    let mut truth = Vec::new();
    for _ in 0..100 {
        let (s, rel, o) = (rng.random_range(0..15), rng.random_range(0..3), rng.random_range(0..15));
        let mut row = model.object_scores(s, rel).unwrap();
        if rng.random_bool(0.2) {
            row[(o + 1) % 15] = row[o];
        }
        scores.push(row);
        truth.push(o);
    }
    let lib = rank_metrics(&scores, &truth).unwrap();
    let oracle = brute_force_metrics(&scores, &truth);
    let exact = lib == oracle;
    Criterion {
        id: 9,
        title: "KGC trivial score, rotation invariance, ranking against a sorting oracle",
        pass: ps && exact,
        detail: format!("{ds}; 100 queries, mrr {:.4}, exact match: {exact}", lib.mrr),
    }
}

fn determinism() -> Criterion {
    let run = |id: SuiteId, threads: usize| {
        let mut cfg = SuiteConfig::new(id, 40, 7);
        if id == SuiteId::SpdMlr {
            cfg.dims = vec![Dim::spd(2)];
            cfg.trials = 3;
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| run_suite(&cfg).unwrap().to_json())
    };
    let mut mismatched = Vec::new();
    for id in SuiteId::ALL {
        let a = run(id, 1);
        if a != run(id, 1) || a != run(id, 4) {
            mismatched.push(id.to_string());
        }
    }
    Criterion {
        id: 10,
        title: "verify reports are byte-identical across runs and thread counts",
        pass: mismatched.is_empty(),
        detail: if mismatched.is_empty() {
            format!("{} suites, 1 and 4 threads", SuiteId::ALL.len())
        } else {
            format!("differing: {}", mismatched.join(", "))
        },
    }
}

#[test]
fn acceptance() {
    let spd_iso = suite(SuiteId::SpdIsometries, 500, 1e-8);
    let steps: Vec<Box<dyn Fn() -> Criterion + '_>> = vec![
        Box::new(axioms),
        Box::new(|| isometries(&spd_iso)),
        Box::new(diffeomorphisms),
        Box::new(|| triangles(&spd_iso)),
        Box::new(planes),
        Box::new(kernels),
        Box::new(grassmann_maps),
        Box::new(mlr_demo),
        Box::new(kgc),
        Box::new(determinism),
    ];
    let mut failed = Vec::new();
    for step in steps {
        let c = step();
        // Written past the test harness capture so every line shows.
        let _ = writeln!(
            std::io::stderr(),
            "criterion {:>2} {}: {} ({})",
            c.id,
            if c.pass { "PASS" } else { "FAIL" },
            c.title,
            c.detail
        );
        if !c.pass {
            failed.push(c.id);
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
