//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
//! failure or time-limit overrun.

mod common;

use std::time::{Duration, Instant};

use infopomdp::domains::{self, tracking_model_costed_default, tracking_model_small};
use infopomdp::filter::{self, Belief};
use infopomdp::mlr::{self, BoundMode, CertificateMode, Direction};
use infopomdp::planner::{self, full_tree_size};
use infopomdp::rewards;
use infopomdp::structure;
use infopomdp::{BoundCertificate, Matrix, PomdpModel, RewardSpec, UncertaintyKind};
use rand::Rng;

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn structural_suite() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let path = dir.path().join("small.json");
    infopomdp::model::save_model(&tracking_model_small::<f64>(), &path).map_err(|e| e.to_string())?;
    let (code, out, err) = common::cli(&["check", path.to_str().unwrap(), "--samples", "500"]);
    ensure(code == 0, || format!("check exited {code}: {out}{err}"))?;
    let m = tracking_model_small::<f64>();
    let report = structure::check_structure(&m, &Default::default());
    ensure(report.sufficient_conditions_hold(), || format!("{report:?}"))?;
    let ordering = structure::validate_update_ordering(&m, 500, 0);
    ensure(ordering.clean(), || format!("{ordering:?}"))?;
    Ok(format!(
        "A1, A2', A3 pass; 0 ordering violations in {} checks over 500 beliefs",
        ordering.posterior_checks
    ))
}

fn tp2_family() -> Outcome {
    let mut rng = common::rng(2);
    let mut matrices = 0;
    for _ in 0..50 {
        let s = rng.random_range(2..=16);
        let a = rng.random_range(1..=8);
        let ts = domains::tracking_transitions::<f64>(s, a, &domains::default_x_seq(s), &domains::default_y_seq(s, a))
            .map_err(|e| e.to_string())?;
        for (k, t) in ts.iter().enumerate() {
            let verdict = structure::is_tp2(t).map_err(|e| e.to_string())?;
            ensure(verdict.holds, || format!("S={s} A={a} action {k}: {:?}", verdict.first_violation))?;
            matrices += 1;
        }
    }
    Ok(format!("{matrices} transition matrices from 50 models are TP2"))
}

fn certificate_existence() -> Outcome {
    let m = tracking_model_small::<f64>();
    let cert = mlr::compute_certificate(&m, BoundMode::Nominal).map_err(|e| e.to_string())?;
    ensure(cert.g.is_some() && cert.h.is_some(), || format!("{cert:?}"))?;
    let (rows, _) = infopomdp::cli::policy_map(&m, &cert, 50, None)?;
    ensure(rows.len() == 51 * 52 / 2, || format!("{} grid rows", rows.len()))?;
    ensure(rows.iter().all(|r| r.lower <= r.upper), || "lower > upper on the grid".into())?;
    let agree = rows.iter().filter(|r| r.agree).count();
    ensure(agree > 0, || "empty agreement region".into())?;
    Ok(format!("g and h feasible; {agree}/{} grid points agree", rows.len()))
}

fn increasing_linear_model(rng: &mut rand_chacha::ChaCha8Rng) -> PomdpModel<f64> {
    let s = rng.random_range(2..=6);
    let a = rng.random_range(1..=4);
    let z = rng.random_range(2..=4);
    let ts = (0..a).map(|_| common::stochastic(rng, s, s)).collect();
    let os = (0..a).map(|_| common::stochastic(rng, z, s)).collect();
    let r = Matrix::from_rows(
        (0..a)
            .map(|_| {
                let mut level = rng.random_range(-3.0..3.0);
                (0..s)
                    .map(|_| {
                        level += rng.random_range(0.0..1.0);
                        level
                    })
                    .collect()
            })
            .collect(),
    )
    .unwrap();
    PomdpModel::new(ts, os, rng.random_range(0.0..0.99), RewardSpec::linear(r)).unwrap()
}

fn theorem_anchor() -> Outcome {
    let mut rng = common::rng(4);
    let mut worst = f64::INFINITY;
    for i in 0..20 {
        let m = increasing_linear_model(&mut rng);
        let sys = mlr::assemble_constraints_global(&m, Direction::Increasing, BoundMode::Nominal)
            .map_err(|e| e.to_string())?;
        ensure(sys.rhs.len() == (m.num_states() - 1) * m.num_actions(), || "row count".into())?;
        let slack = sys.min_slack(&vec![0.0; m.num_states()]);
        ensure(slack >= -1e-9, || format!("model {i}: min slack {slack} at g = 0"))?;
        let res = mlr::solve_feasibility(&sys, mlr::DEFAULT_G_MAX).map_err(|e| e.to_string())?;
        ensure(res.feasible, || format!("model {i}: LP reports infeasible"))?;
        worst = worst.min(slack);
    }
    Ok(format!("20 models admit g = 0 (smallest slack {worst:.3e})"))
}

fn mlr_monotonicity() -> Outcome {
    let m = tracking_model_small::<f64>();
    let cert = mlr::compute_certificate(&m, BoundMode::Nominal).map_err(|e| e.to_string())?;
    let mut rng = common::rng(5);
    let mut violations = 0;
    for _ in 0..10_000 {
        let (b1, b2) = filter::sample_mlr_pair_with::<f64, _>(3, &mut rng);
        for a in 0..3 {
            let lo = |b| mlr::transformed_reward(&m, &cert, b, a, Direction::Increasing).unwrap();
            let hi = |b| mlr::transformed_reward(&m, &cert, b, a, Direction::Decreasing).unwrap();
            if lo(&b1) < lo(&b2) - 1e-9 || hi(&b1) > hi(&b2) + 1e-9 {
                violations += 1;
            }
        }
    }
    ensure(violations == 0, || format!("{violations} violations"))?;
    Ok("0 violations over 10^4 MLR pairs".into())
}

fn argmax_set(vals: &[(usize, f64)], tol: f64) -> Vec<usize> {
    let best = vals.iter().map(|v| v.1).fold(f64::NEG_INFINITY, f64::max);
    vals.iter().filter(|v| v.1 >= best - tol).map(|v| v.0).collect()
}

fn value_shift() -> Outcome {
    let mut rng = common::rng(6);
    let mut worst = 0.0f64;
    for i in 0..50 {
        let m = common::random_small_model(&mut rng, 4);
        let s = m.num_states();
        let g: Vec<f64> = (0..s).map(|_| rng.random_range(-2.0..2.0)).collect();
        let depth = rng.random_range(1..=4);
        let b = filter::sample_belief_with::<f64, _>(s, &mut rng);
        let shifts: Vec<Vec<f64>> = (0..m.num_actions()).map(|a| mlr::shift_vector(&m, a, &g)).collect();
        let plain = planner::expectimax(&m, &b, depth, None);
        let shifted = planner::expectimax_with_reward(&m, &b, depth, Some(&g), |x: &[f64], a| {
            let base = rewards::expected_reward(&m, &Belief::with_tolerance(x.to_vec(), 1e-6).unwrap(), a).unwrap();
            base + x.iter().zip(&shifts[a]).map(|(p, v)| p * v).sum::<f64>()
        });
        let offset: f64 = g.iter().zip(b.probs()).map(|(x, p)| x * p).sum();
        let err = (shifted.value - plain.value - offset).abs();
        worst = worst.max(err);
        ensure(err <= 1e-7, || format!("model {i} depth {depth}: value error {err:e}"))?;
        let lifted: Vec<(usize, f64)> = plain.root_values.iter().map(|&(a, q)| (a, q + offset)).collect();
        ensure(argmax_set(&lifted, 1e-9) == argmax_set(&shifted.root_values, 1e-9), || {
            format!("model {i}: argmax sets differ")
        })?;
    }
    Ok(format!("50 models, max value error {worst:.2e}, argmax sets identical"))
}

fn pruning_trend() -> Outcome {
    let m = tracking_model_costed_default::<f64>(8, 3).map_err(|e| e.to_string())?;
    let cert = mlr::compute_certificate(&m, BoundMode::Nominal).map_err(|e| e.to_string())?;
    let stats = planner::pruning_experiment(&m, &cert, &[2, 3, 4], 100, 7);
    let means: Vec<f64> = stats.rows.iter().map(|r| r.mean_pruned_frac).collect();
    ensure(means.windows(2).all(|w| w[1] > w[0]), || format!("means not increasing: {means:?}"))?;
    ensure(means[0] >= 0.15, || format!("depth-2 mean {} < 15%", means[0]))?;
    Ok(format!(
        "mean pruned {:.1}% / {:.1}% / {:.1}% at depths 2/3/4",
        100.0 * means[0],
        100.0 * means[1],
        100.0 * means[2]
    ))
}

fn action_sweep() -> Outcome {
    let mut cells = Vec::new();
    for s in [4, 8, 16] {
        for a in [4, 8] {
            let m = tracking_model_costed_default::<f64>(s, a).map_err(|e| e.to_string())?;
            let cert = mlr::compute_certificate(&m, BoundMode::Nominal).map_err(|e| e.to_string())?;
            let feasible = cert.g.is_some() && cert.h.is_some();
            let st = planner::action_pruning_experiment(&m, &cert, 500, 10, 8);
            if feasible {
                ensure(st.min_frac > 0.0 && st.mean_frac > 0.25, || format!("{s}x{a}: {st:?}"))?;
                cells.push(format!("{s}x{a} min {:.0}% mean {:.0}%", 100.0 * st.min_frac, 100.0 * st.mean_frac));
            } else {
                cells.push(format!("{s}x{a} infeasible"));
            }
        }
    }
    Ok(cells.join(", "))
}

fn planner_exactness() -> Outcome {
    let mut rng = common::rng(9);
    let trivial = BoundCertificate::trivial(CertificateMode::Global(BoundMode::Nominal));
    for i in 0..100 {
        let m = common::random_small_model(&mut rng, 4);
        let b = filter::sample_belief_with::<f64, _>(m.num_states(), &mut rng);
        let full = planner::expectimax(&m, &b, 3, None);
        let bb = planner::branch_and_bound(&m, &trivial, &b, 3);
        ensure(bb.value.to_bits() == full.value.to_bits(), || format!("instance {i}: values differ"))?;
        ensure(bb == full, || format!("instance {i}: results differ"))?;
        let expected = full_tree_size(m.num_actions(), m.num_observations(), 3);
        ensure(full.expanded == expected && bb.pruned == 0, || {
            format!("instance {i}: expanded {} expected {expected}", full.expanded)
        })?;
    }
    Ok("100 instances bitwise equal, node counts match".into())
}

fn relative(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1.0)
}

fn filter_suite() -> Outcome {
    let mut rng = common::rng(10);
    let mut worst_norm = 0.0f64;
    let mut worst_total = 0.0f64;
    for _ in 0..1000 {
        let m = common::random_small_model(&mut rng, 5);
        let b = filter::sample_belief_with::<f64, _>(m.num_states(), &mut rng);
        let a = rng.random_range(0..m.num_actions());
        let step = filter::branch(&m, &b, a).map_err(|e| e.to_string())?;
        worst_norm = worst_norm.max((step.predicted.probs().iter().sum::<f64>() - 1.0).abs());
        let mut total = vec![0.0; m.num_states()];
        for (eta, post) in step.likelihood.iter().zip(&step.posteriors) {
            if let Some(p) = post {
                worst_norm = worst_norm.max((p.probs().iter().sum::<f64>() - 1.0).abs());
                for (t, x) in total.iter_mut().zip(p.probs()) {
                    *t += eta * x;
                }
            }
        }
        for (t, x) in total.iter().zip(step.predicted.probs()) {
            worst_total = worst_total.max((t - x).abs());
        }
    }
    ensure(worst_norm <= 1e-9, || format!("normalization error {worst_norm:e}"))?;
    ensure(worst_total <= 1e-9, || format!("total probability error {worst_total:e}"))?;

    for _ in 0..10_000 {
        let s = rng.random_range(2..=8);
        let (b1, b2) = filter::sample_mlr_pair_with::<f64, _>(s, &mut rng);
        let mlr = filter::mlr_geq(b1.probs(), b2.probs()).unwrap();
        ensure(mlr, || "constructed pair is not MLR ordered".into())?;
        ensure(filter::fosd_geq(b1.probs(), b2.probs()).unwrap(), || "MLR without FOSD".into())?;
    }

    let mut worst_gain = f64::INFINITY;
    for _ in 0..10_000 {
        let m = common::random_small_model(&mut rng, 5);
        let b = filter::sample_belief_with::<f64, _>(m.num_states(), &mut rng);
        let a = rng.random_range(0..m.num_actions());
        let gain = rewards::information_gain(&m, &b, a, UncertaintyKind::Shannon).map_err(|e| e.to_string())?;
        worst_gain = worst_gain.min(gain);
    }
    ensure(worst_gain >= -1e-9, || format!("negative information gain {worst_gain:e}"))?;

    let mut worst_grad = 0.0f64;
    for kind in [UncertaintyKind::Shannon, UncertaintyKind::RenyiQuadratic] {
        for _ in 0..500 {
            let m = common::random_model(&mut rng, 4, 2, 3, kind);
            let b = loop {
                let b = filter::sample_belief_with::<f64, _>(4, &mut rng);
                if b.in_inner_simplex(0.02) {
                    break b;
                }
            };
            let a = rng.random_range(0..2);
            let grad = rewards::reward_gradient(&m, &b, a).map_err(|e| e.to_string())?;
            let h = 1e-6;
            for i in 0..4 {
                let mut up = b.probs().to_vec();
                let mut down = b.probs().to_vec();
                up[i] += h;
                down[i] -= h;
                let eval = |x: Vec<f64>| rewards::expected_reward(&m, &Belief::with_tolerance(x, 1e-3).unwrap(), a).unwrap();
                let fd = (eval(up) - eval(down)) / (2.0 * h);
                worst_grad = worst_grad.max(relative(fd, grad[i]));
            }
        }
    }
    ensure(worst_grad <= 1e-5, || format!("gradient relative error {worst_grad:e}"))?;
    Ok(format!(
        "normalization {worst_norm:.1e}, total probability {worst_total:.1e}, min gain {worst_gain:.1e}, gradient {worst_grad:.1e}"
    ))
}

fn main() {
    let criteria: [(u32, &str, u64, fn() -> Outcome); 10] = [
        (1, "structural suite", 5, structural_suite),
        (2, "TP2 family", 10, tp2_family),
        (3, "certificate existence", 10, certificate_existence),
        (4, "increasing-reward anchor", 5, theorem_anchor),
        (5, "MLR monotonicity", 10, mlr_monotonicity),
        (6, "value shift", 60, value_shift),
        (7, "pruning trend", 300, pruning_trend),
        (8, "action pruning sweep", 600, action_sweep),
        (9, "planner exactness", 60, planner_exactness),
        (10, "filter and order invariants", 60, filter_suite),
    ];
    let mut failures = 0;
    for (id, name, limit, check) in criteria {
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(check).unwrap_or_else(|_| Err("panicked".into()));
        let elapsed = start.elapsed();
        let over = elapsed > Duration::from_secs(limit);
        let (verdict, detail) = match (&outcome, over) {
            (Ok(d), false) => ("PASS", d.clone()),
            (Ok(d), true) => ("FAIL", format!("{d}; exceeded {limit} s")),
            (Err(e), _) => ("FAIL", e.clone()),
        };
        if verdict == "FAIL" {
            failures += 1;
        }
        println!(
            "criterion {id:>2} {verdict} {name} ({:.2} s, limit {limit} s): {detail}",
            elapsed.as_secs_f64()
        );
    }
    println!("acceptance: {} passed, {failures} failed", 10 - failures);
    if failures > 0 {
        std::process::exit(1);
    }
}
