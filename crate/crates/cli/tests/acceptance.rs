//! End-to-end acceptance checks, one PASS/FAIL line per criterion.
//! Run alone with `cargo test -p groundcal-cli --test acceptance`.

mod common;

use std::collections::HashSet;
use std::time::{Duration, Instant};

use common::*;
use groundcal_core::baselines::{numsets_confidence, predent_confidence, sement_confidence};
use groundcal_core::calibration::{
    fit_fused, fused_confidence, temp_scale, CalibrationParams, Grid,
};
use groundcal_core::entailment::{cluster, exact_match_oracle};
use groundcal_core::grounding::{offline_provider, remote_provider, RemoteMode};
use groundcal_core::metrics::{
    aggregate_runs, ece, ece_value, evaluate, EvalConfig, MethodResult, RunSummary,
};
use groundcal_core::mock::{score_reply, verdict_reply, MockReply, MockServer};
use groundcal_core::rng::SplitMix64;
use groundcal_core::similarity::{lcs_length, rouge_l_f, TokenSeq};
use groundcal_core::synth::{generate, SynthConfig};
use groundcal_core::{BaselineKind, Ensemble, Error, ProviderError, ResponseSample};
use serde_json::Value;
use tempfile::tempdir;

type Outcome = Result<String, String>;
type Check = fn() -> Outcome;

fn unit(r: &mut SplitMix64) -> f64 {
    (r.next_u64() >> 11) as f64 / (1u64 << 53) as f64
}

fn uniform(r: &mut SplitMix64, lo: f64, hi: f64) -> f64 {
    lo + (hi - lo) * unit(r)
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(limit: Duration, start: Instant, what: &str) -> Result<Duration, String> {
    let took = start.elapsed();
    ensure(took < limit, || {
        format!("{what} took {took:?}, limit {limit:?}")
    })?;
    Ok(took)
}

/// Per-definition ECE: every bin scans every pair.
fn ece_by_definition(pairs: &[(f64, f64)], m: usize) -> f64 {
    let n = pairs.len() as f64;
    (1..=m)
        .map(|bin| {
            let lo = (bin - 1) as f64 / m as f64;
            let hi = bin as f64 / m as f64;
            let inside: Vec<&(f64, f64)> = pairs
                .iter()
                .filter(|(c, _)| (*c > lo && *c <= hi) || (bin == 1 && *c == 0.0))
                .collect();
            if inside.is_empty() {
                return 0.0;
            }
            let k = inside.len() as f64;
            let acc: f64 = inside.iter().map(|p| p.1).sum::<f64>() / k;
            let conf: f64 = inside.iter().map(|p| p.0).sum::<f64>() / k;
            k / n * (acc - conf).abs()
        })
        .sum()
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let mut r = SplitMix64::new(1);
    let pairs: Vec<(f64, f64)> = (0..1000)
        .map(|i| {
            let conf = match i % 5 {
                0 => (r.below(11)) as f64 / 10.0,
                _ => unit(&mut r),
            };
            let acc = if i % 3 == 0 {
                r.below(2) as f64
            } else {
                unit(&mut r)
            };
            (conf, acc)
        })
        .collect();
    let expected = ece_by_definition(&pairs, 10);
    let report = ece(&pairs, 10).map_err(|e| e.to_string())?;
    let scalar = ece_value(&pairs, 10).map_err(|e| e.to_string())?;
    let diff = (report.ece - expected).abs().max((scalar - expected).abs());
    ensure(diff <= 1e-12, || {
        format!("ECE {} vs oracle {expected}", report.ece)
    })?;
    let n: usize = report.bins.iter().map(|b| b.count).sum();
    ensure(n == 1000, || format!("bins hold {n} pairs"))?;
    let took = within(Duration::from_secs(1), start, "ECE check")?;
    Ok(format!("max |diff| {diff:.1e}, {took:?}"))
}

fn is_subsequence(needle: &[u8], hay: &[u8]) -> bool {
    let mut it = hay.iter();
    needle.iter().all(|x| it.any(|y| y == x))
}

fn lcs_by_enumeration(a: &[u8], b: &[u8]) -> usize {
    let mut best = 0;
    let mut sub = Vec::with_capacity(a.len());
    for mask in 0u32..(1 << a.len()) {
        let size = mask.count_ones() as usize;
        if size <= best {
            continue;
        }
        sub.clear();
        sub.extend((0..a.len()).filter(|i| mask >> i & 1 == 1).map(|i| a[i]));
        if is_subsequence(&sub, b) {
            best = size;
        }
    }
    best
}

fn criterion_2() -> Outcome {
    let start = Instant::now();
    let mut r = SplitMix64::new(2);
    let words = ["lung", "left", "the", "heart"];
    let mut max_diff = 0.0f64;
    for _ in 0..500 {
        let draw = |r: &mut SplitMix64| -> Vec<u8> {
            let len = r.below(13) as usize;
            let vocab = 2 + r.below(3);
            (0..len).map(|_| r.below(vocab) as u8).collect()
        };
        let a = draw(&mut r);
        let b = draw(&mut r);
        let seq = |v: &[u8]| -> TokenSeq { v.iter().map(|&i| words[i as usize]).collect() };
        let (sa, sb) = (seq(&a), seq(&b));
        let l = lcs_length(&sa, &sb);
        let expected = lcs_by_enumeration(&a, &b);
        ensure(l == expected, || {
            format!("LCS {l} vs {expected} for {a:?} / {b:?}")
        })?;
        let f = rouge_l_f(&sa, &sb);
        let hand = if expected == 0 {
            0.0
        } else {
            let p = expected as f64 / a.len() as f64;
            let rc = expected as f64 / b.len() as f64;
            let beta2 = 1.0;
            (1.0 + beta2) * p * rc / (rc + beta2 * p)
        };
        max_diff = max_diff.max((f - hand).abs());
    }
    ensure(max_diff <= 1e-12, || {
        format!("ROUGE-L differs by {max_diff}")
    })?;
    let took = within(Duration::from_secs(30), start, "ROUGE-L check")?;
    Ok(format!(
        "500 pairs exact, max F diff {max_diff:.1e}, {took:?}"
    ))
}

fn normalized(s: &str) -> String {
    s.split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(|t| t.to_lowercase())
        .collect::<Vec<_>>()
        .join(" ")
}

fn criterion_3() -> Outcome {
    let mut r = SplitMix64::new(3);
    let bases = [
        "left lung",
        "right lung",
        "heart",
        "lung",
        "the heart",
        "no",
        "yes",
    ];
    let oracle = exact_match_oracle();
    let mut total_clusters = 0;
    for e in 0..1000 {
        let n = 2 + r.below(19) as usize;
        let responses: Vec<String> = (0..n)
            .map(|_| {
                let base = bases[r.below(bases.len() as u64) as usize];
                let mut s: String = base
                    .chars()
                    .map(|c| {
                        if r.below(4) == 0 {
                            c.to_ascii_uppercase()
                        } else {
                            c
                        }
                    })
                    .collect();
                match r.below(4) {
                    0 => s.push('.'),
                    1 => s = format!("  {}!", s.replace(' ', "  ")),
                    2 => s = s.replace(' ', ", "),
                    _ => {}
                }
                s
            })
            .collect();
        let distinct: HashSet<String> = responses.iter().map(|s| normalized(s)).collect();
        let c = cluster(&responses, &oracle).map_err(|e| e.to_string())?;
        ensure(c.is_partition_of(n), || {
            format!("ensemble {e}: not a partition")
        })?;
        ensure(c.len() == distinct.len(), || {
            format!(
                "ensemble {e}: {} clusters, {} distinct",
                c.len(),
                distinct.len()
            )
        })?;
        total_clusters += c.len();
    }
    Ok(format!(
        "1000 ensembles, {total_clusters} clusters in total"
    ))
}

fn criterion_4() -> Outcome {
    let mut r = SplitMix64::new(4);
    let mut violations = Vec::new();
    for _ in 0..10_000 {
        let t = loop {
            let t = uniform(&mut r, 0.05, 10.0);
            if (t - 1.0).abs() > 1e-3 {
                break t;
            }
        };
        let c1 = uniform(&mut r, 1e-6, 1.0 - 1e-6);
        let c2 = uniform(&mut r, 1e-6, 1.0 - 1e-6);
        let (lo, hi) = if c1 <= c2 { (c1, c2) } else { (c2, c1) };
        let s_lo = temp_scale(lo, t).map_err(|e| e.to_string())?;
        let s_hi = temp_scale(hi, t).map_err(|e| e.to_string())?;
        if s_lo > s_hi {
            violations.push(format!(
                "monotonicity at T={t}: {lo} -> {s_lo}, {hi} -> {s_hi}"
            ));
        }
        let ok = if t > 1.0 { s_lo > lo } else { s_lo < lo };
        if !ok {
            violations.push(format!("direction at T={t}: {lo} -> {s_lo}"));
        }
    }
    ensure(violations.is_empty(), || {
        format!("{} violations, first: {}", violations.len(), violations[0])
    })?;
    Ok("10000 samples, 0 violations".into())
}

fn criterion_5() -> Outcome {
    let mut r = SplitMix64::new(5);
    let mut worst_identity = 0.0f64;
    for i in 0..100_000 {
        let b = unit(&mut r);
        let g = unit(&mut r);
        let t = uniform(&mut r, 0.05, 10.0);
        let c = unit(&mut r);
        let identity = fused_confidence(b, 1.0, &CalibrationParams { t, c: 0.0 });
        worst_identity = worst_identity.max((identity - b).abs());
        let floor = fused_confidence(b, 0.0, &CalibrationParams { t, c });
        ensure(floor == c, || {
            format!("sample {i}: conf_gm=0 gives {floor}, C={c}")
        })?;
        let v = fused_confidence(b, g, &CalibrationParams { t, c });
        ensure((0.0..=1.0).contains(&v), || {
            format!("sample {i}: fused {v} outside [0,1]")
        })?;
    }
    ensure(worst_identity <= 1e-15, || {
        format!("identity off by {worst_identity}")
    })?;
    Ok(format!(
        "100000 samples, max identity error {worst_identity:.1e}"
    ))
}

/// Enumerates every grid cell, then picks the lexicographically smallest
/// (T, C) among those attaining the minimum.
fn fit_by_enumeration(val: &[(f64, f64, f64)], grid: &Grid) -> (f64, f64, f64) {
    let mut cells = Vec::new();
    for &t in &grid.t_values {
        for &c in &grid.c_values {
            let pairs: Vec<(f64, f64)> = val
                .iter()
                .map(|&(b, g, a)| {
                    let scaled = if g == 0.0 { 0.0 } else { g.powf(1.0 / t) };
                    ((b * scaled + c).clamp(0.0, 1.0), a)
                })
                .collect();
            cells.push((t, c, ece_value(&pairs, 10).unwrap()));
        }
    }
    let min = cells.iter().map(|x| x.2).fold(f64::INFINITY, f64::min);
    cells
        .into_iter()
        .filter(|x| x.2 == min)
        .min_by(|x, y| x.0.total_cmp(&y.0).then(x.1.total_cmp(&y.1)))
        .unwrap()
}

fn criterion_6() -> Outcome {
    let mut r = SplitMix64::new(6);
    let grid = Grid::default();
    let mut ties = 0;
    for set in 0..50 {
        let n = 5 + r.below(80) as usize;
        let val: Vec<(f64, f64, f64)> = (0..n)
            .map(|_| {
                let (b, g) = match set % 5 {
                    // Fused = C regardless of T.
                    0 => (0.0, unit(&mut r)),
                    // g in {0, 1} makes every temperature equivalent.
                    1 => (unit(&mut r), r.below(2) as f64),
                    _ => (unit(&mut r), unit(&mut r)),
                };
                (
                    b,
                    g,
                    if set % 2 == 0 {
                        r.below(2) as f64
                    } else {
                        unit(&mut r)
                    },
                )
            })
            .collect();
        let fit = fit_fused(&val, &grid, 10).map_err(|e| e.to_string())?;
        let (t, c, e) = fit_by_enumeration(&val, &grid);
        ensure(
            fit.params.t == t && fit.params.c == c && fit.validation_ece == e,
            || {
                format!(
                    "set {set}: fit (T={}, C={}, ECE={}) vs enumeration (T={t}, C={c}, ECE={e})",
                    fit.params.t, fit.params.c, fit.validation_ece
                )
            },
        )?;
        if set % 5 < 2 {
            ties += 1;
        }
    }
    Ok(format!(
        "50 sets matched exactly, {ties} with tied temperatures"
    ))
}

const SYNTH_ARGS: [&str; 12] = [
    "--n",
    "300",
    "--samples",
    "20",
    "--frac-wrong",
    "0.3333333333333333",
    "--fidelity",
    "0.9",
    "--seed",
    "0",
    "--vocab",
    "64",
];

fn eval_args<'a>(input: &'a str, prefix: &'a str, jobs: &'a str) -> Vec<&'a str> {
    vec![
        "evaluate",
        "--input",
        input,
        "--baseline",
        "all",
        "--runs",
        "5",
        "--split",
        "0.2",
        "--seed",
        "0",
        "--out",
        prefix,
        "--jobs",
        jobs,
    ]
}

fn run_ok(args: &[&str]) -> Result<(), String> {
    let out = groundcal(args);
    ensure(out.status.success(), || {
        format!("{args:?} failed: {}", String::from_utf8_lossy(&out.stderr))
    })
}

fn mean_ece(doc: &Value, method: &str) -> Result<f64, String> {
    doc["rows"]
        .as_array()
        .and_then(|rows| rows.iter().find(|r| r["method"] == method))
        .and_then(|r| r["mean_ece"].as_f64())
        .ok_or_else(|| format!("no mean_ece for {method}"))
}

fn criterion_7() -> Outcome {
    let dir = tempdir().map_err(|e| e.to_string())?;
    let input = dir.path().join("synth.jsonl");
    let prefix = dir.path().join("c7");
    let start = Instant::now();
    let mut args = vec!["synth", "--out", path_str(&input)];
    args.extend_from_slice(&SYNTH_ARGS);
    run_ok(&args)?;
    run_ok(&eval_args(path_str(&input), path_str(&prefix), "1"))?;
    let took = within(Duration::from_secs(10), start, "synth + evaluate")?;
    let mut detail = Vec::new();
    for kind in ["lexsim", "sement"] {
        let bytes = std::fs::read(dir.path().join(format!("c7.{kind}.summary.json")))
            .map_err(|e| e.to_string())?;
        let doc: Value = serde_json::from_slice(&bytes).map_err(|e| e.to_string())?;
        let raw = mean_ece(&doc, "baseline")?;
        let scaled = mean_ece(&doc, "scaled_baseline")?;
        let fused = mean_ece(&doc, "fused")?;
        let gain = (scaled - fused) / scaled;
        ensure(fused < scaled && scaled < raw, || {
            format!("{kind}: fused {fused:.4}, scaled {scaled:.4}, raw {raw:.4}")
        })?;
        ensure(gain >= 0.25, || {
            format!("{kind}: improvement {:.1}% < 25%", gain * 100.0)
        })?;
        detail.push(format!(
            "{kind} raw {raw:.4} > scaled {scaled:.4} > fused {fused:.4} ({:.1}%)",
            gain * 100.0
        ));
    }
    Ok(format!("{}; {took:?}", detail.join("; ")))
}

fn criterion_8() -> Outcome {
    let dir = tempdir().map_err(|e| e.to_string())?;
    let input = dir.path().join("synth.jsonl");
    let mut args = vec!["synth", "--out", path_str(&input)];
    args.extend_from_slice(&SYNTH_ARGS);
    run_ok(&args)?;
    let variants = [("a", "1"), ("b", "1"), ("c", "8")];
    for (name, jobs) in variants {
        let prefix = dir.path().join(name);
        run_ok(&eval_args(path_str(&input), path_str(&prefix), jobs))?;
    }
    let mut files = 0;
    for kind in ["lexsim", "predent", "sement", "numsets"] {
        let reference = read_outputs(&dir.path().join(format!("a.{kind}")));
        for (name, jobs) in &variants[1..] {
            let other = read_outputs(&dir.path().join(format!("{name}.{kind}")));
            for (label, x, y) in [
                ("json", &reference.json, &other.json),
                ("csv", &reference.csv, &other.csv),
                ("svg", &reference.svg, &other.svg),
            ] {
                ensure(x == y, || {
                    format!("{kind} {label} differs with --jobs {jobs}")
                })?;
                files += 1;
            }
        }
    }
    Ok(format!(
        "{files} file comparisons byte-identical (jobs 1, 1, 8)"
    ))
}

fn method(name: &str, ece_v: f64, t: Option<f64>, c: Option<f64>) -> MethodResult {
    MethodResult {
        method: name.into(),
        ece: ece_v,
        t,
        c,
        validation_ece: None,
        report: ece(&[(0.5, 0.5)], 10).unwrap(),
    }
}

fn two_pass(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, var)
}

fn criterion_9() -> Outcome {
    let mut r = SplitMix64::new(9);
    let mut worst = 0.0f64;
    for _ in 0..200 {
        let runs: Vec<RunSummary> = (0..5)
            .map(|run| RunSummary {
                run,
                seed: 0,
                n_validation: 1,
                n_test: 1,
                methods: vec![
                    method("baseline", unit(&mut r) * 0.3, None, None),
                    method(
                        "scaled_baseline",
                        unit(&mut r) * 0.3,
                        Some(uniform(&mut r, 0.1, 9.9)),
                        None,
                    ),
                    method(
                        "fused",
                        unit(&mut r) * 0.3,
                        Some(uniform(&mut r, 0.1, 9.9)),
                        Some(unit(&mut r) * 0.5),
                    ),
                ],
            })
            .collect();
        let agg = aggregate_runs(&runs).map_err(|e| e.to_string())?;
        for (i, m) in agg.methods.iter().enumerate() {
            let eces: Vec<f64> = runs.iter().map(|run| run.methods[i].ece).collect();
            let (mu, var) = two_pass(&eces);
            worst = worst
                .max((m.mean_ece - mu).abs())
                .max((m.var_ece - var).abs());
            if let Some(mt) = m.mean_t {
                let ts: Vec<f64> = runs.iter().map(|run| run.methods[i].t.unwrap()).collect();
                worst = worst.max((mt - two_pass(&ts).0).abs());
            }
        }
    }
    ensure(worst <= 1e-12, || {
        format!("aggregate differs from oracle by {worst}")
    })?;
    for _ in 0..200 {
        let x = unit(&mut r);
        let runs: Vec<RunSummary> = (0..5)
            .map(|run| RunSummary {
                run,
                seed: 0,
                n_validation: 1,
                n_test: 1,
                methods: vec![method("baseline", x, None, None)],
            })
            .collect();
        let agg = aggregate_runs(&runs).map_err(|e| e.to_string())?;
        ensure(agg.methods[0].var_ece == 0.0, || {
            format!(
                "identical runs at {x} give variance {}",
                agg.methods[0].var_ece
            )
        })?;
    }
    Ok(format!(
        "max diff {worst:.1e}; identical runs give variance 0"
    ))
}

fn replay(data: &[Ensemble], conf: impl Fn(&str, &str) -> f64) -> Vec<Ensemble> {
    let mut out = data.to_vec();
    for e in &mut out {
        let img = e.image_ref.clone();
        for s in &mut e.samples {
            s.grounding_conf = Some(conf(&img, &s.text));
        }
    }
    out
}

fn criterion_10() -> Outcome {
    let data = generate(&SynthConfig {
        n_ensembles: 60,
        n_samples: 6,
        seed: 10,
        ..SynthConfig::default()
    })
    .map_err(|e| e.to_string())?;
    let oracle = exact_match_oracle();
    let cfg = EvalConfig::new(BaselineKind::LexSim);
    let timeout = Duration::from_secs(10);

    let score_server =
        MockServer::grounding(|i, s| score_reply(mock_score(i, s))).map_err(|e| e.to_string())?;
    let verdict_server = MockServer::grounding(|i, s| verdict_reply(mock_verdict(i, s).0))
        .map_err(|e| e.to_string())?;
    let cases = [
        (RemoteMode::Score, &score_server, replay(&data, mock_score)),
        (
            RemoteMode::Verdict,
            &verdict_server,
            replay(&data, |i, s| mock_verdict(i, s).1),
        ),
    ];
    for (mode, server, replayed) in &cases {
        let remote = remote_provider(server.url(), *mode, timeout);
        let offline = offline_provider(replayed);
        let a = evaluate(&data, &oracle, Some(&remote), &cfg).map_err(|e| e.to_string())?;
        let b = evaluate(replayed, &oracle, Some(&offline), &cfg).map_err(|e| e.to_string())?;
        ensure(a.0 == b.0 && a.1 == b.1, || {
            format!("{mode:?}: remote and offline RunSummaries differ")
        })?;
    }

    let broken = MockServer::grounding(|_, _| MockReply::Json(serde_json::json!({ "verdict": 3 })))
        .map_err(|e| e.to_string())?;
    let err = evaluate(
        &data,
        &oracle,
        Some(&remote_provider(broken.url(), RemoteMode::Verdict, timeout)),
        &cfg,
    )
    .err()
    .ok_or("malformed reply accepted")?;
    ensure(
        matches!(err.root(), Error::Provider(ProviderError::Malformed { .. })),
        || format!("library error was {err}"),
    )?;

    let dir = tempdir().map_err(|e| e.to_string())?;
    let input = dir.path().join("d.jsonl");
    write_dataset(&input, &data);
    let grounding = format!("remote:{}:verdict", broken.url());
    let out = groundcal(&[
        "evaluate",
        "--input",
        path_str(&input),
        "--grounding",
        &grounding,
        "--out",
        path_str(&dir.path().join("o")),
    ]);
    ensure(out.status.code() == Some(4), || {
        format!("exit code {:?}", out.status.code())
    })?;
    let err = stderr_json(&out);
    ensure(err["error"] == "provider", || format!("stderr {err}"))?;
    Ok("score and verdict modes identical to replay; malformed reply exits 4".into())
}

fn criterion_11() -> Outcome {
    let ln2 = std::f64::consts::LN_2;
    let predent_ens = Ensemble::new(
        "p",
        (0..5)
            .map(|i| ResponseSample::new(format!("r{i}"), vec![-ln2]).with_correct(true))
            .collect(),
    );
    let predent = predent_confidence(&predent_ens)
        .map_err(|e| e.to_string())?
        .value;

    let oracle = exact_match_oracle();
    let sement_ens = Ensemble::new(
        "s",
        ["a", "a", "b", "b"]
            .iter()
            .map(|t| ResponseSample::new(*t, vec![-0.3]).with_correct(true))
            .collect(),
    );
    let sement = sement_confidence(&sement_ens, &oracle)
        .map_err(|e| e.to_string())?
        .value;

    let numsets_ens = Ensemble::new(
        "n",
        (0..20)
            .map(|i| {
                ResponseSample::new(format!("answer {}", i % 5), vec![-0.1]).with_correct(true)
            })
            .collect(),
    );
    let numsets = numsets_confidence(&numsets_ens, &oracle)
        .map_err(|e| e.to_string())?
        .value;

    for (name, got, want) in [
        ("PredEnt", predent, 0.5),
        ("SemEnt", sement, 0.5),
        ("NumSets", numsets, 1.0 - 4.0 / 19.0),
    ] {
        ensure((got - want).abs() <= 1e-12, || {
            format!("{name}: {got} vs {want}")
        })?;
    }
    Ok(format!(
        "PredEnt {predent}, SemEnt {sement}, NumSets {numsets:.15}"
    ))
}

fn main() {
    let criteria: [(&str, Check); 11] = [
        ("ECE oracle equivalence", criterion_1),
        ("ROUGE-L oracle equivalence", criterion_2),
        ("clustering oracle", criterion_3),
        ("temperature-scaling law", criterion_4),
        ("fusion fixed points", criterion_5),
        ("grid-fit optimality", criterion_6),
        ("directional synthetic reproduction", criterion_7),
        ("determinism", criterion_8),
        ("aggregation correctness", criterion_9),
        ("transport equivalence", criterion_10),
        ("analytic spot values", criterion_11),
    ];
    let mut failed = Vec::new();
    for (i, (name, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(detail) => println!("criterion {:>2} PASS {name}: {detail}", i + 1),
            Err(why) => {
                println!("criterion {:>2} FAIL {name}: {why}", i + 1);
                failed.push(i + 1);
            }
        }
    }
    if !failed.is_empty() {
        eprintln!("failed criteria: {failed:?}");
        std::process::exit(1);
    }
}
