//! Acceptance suite: one test per release criterion, each printing a
//! PASS line with its measured runtime. Run with
//! `cargo test -p shapegraph-cli --test acceptance -- --nocapture`.

use std::fs;
use std::path::PathBuf;
use std::process::Command;
use std::time::{Duration, Instant};

use shapegraph::graph::{edge_length, is_connected, resample_edge};
use shapegraph::metrics::{effective_resistance, DistanceMatrix};
use shapegraph::reduce::{multires, ReductionParams};
use shapegraph::srvf::{apply_reparam, karcher_mean_detailed, shape_distance, to_srvf};
use shapegraph::svm::solve_binary;
use shapegraph::synth::{random_network_graph, random_reparam, random_smooth_curve, random_tree_graph};
use shapegraph::{linkage, write_graph, DocMetadata, Linkage, Merge};

fn assert_runtime(name: &str, elapsed: Duration, budget_secs: u64) {
    assert!(
        elapsed < Duration::from_secs(budget_secs),
        "{name}: runtime {elapsed:?} exceeded {budget_secs}s budget"
    );
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir()
        .join("shapegraph-acceptance")
        .join(format!("{name}-{}", std::process::id()));
    let _ = fs::remove_dir_all(&dir);
    fs::create_dir_all(&dir).unwrap();
    dir
}

fn cli() -> Command {
    Command::new(env!("CARGO_BIN_EXE_shapegraph"))
}

#[test]
fn criterion_1_srvf_laws() {
    let start = Instant::now();
    let t = 200;
    for seed in 0..200u64 {
        let curve = resample_edge(&random_smooth_curve(seed, 300), t);
        let len = edge_length(&curve);
        let q = to_srvf(&curve);
        let gamma = random_reparam(seed.wrapping_add(9000), t);
        let warped = apply_reparam(&q, &gamma);
        let rel = (warped.norm() - len.sqrt()).abs() / len.sqrt();
        assert!(rel < 0.02, "seed {seed}: norm invariance violated ({rel})");
        let d = shape_distance(&q, &warped);
        assert!(
            d < 0.05 * q.norm(),
            "seed {seed}: aligned distance {d} vs norm {}",
            q.norm()
        );
    }
    let elapsed = start.elapsed();
    assert_runtime("criterion 1", elapsed, 30);
    println!("criterion 1 (srvf law suite, 200 curves at T=200): PASS in {elapsed:?}");
}

#[test]
fn criterion_2_karcher_mean() {
    let start = Instant::now();
    let t = 30;
    for seed in 0..50u64 {
        if seed % 5 == 0 {
            // Duplicated inputs return the input exactly.
            let q = to_srvf(&resample_edge(&random_smooth_curve(seed, 120), t));
            let bundle = vec![q.clone(), q.clone(), q.clone(), q.clone()];
            let result = karcher_mean_detailed(&bundle).unwrap();
            assert_eq!(result.mean, q, "seed {seed}: duplicated mean not exact");
        }
        let size = 3 + (seed % 4) as usize;
        let bundle: Vec<_> = (0..size)
            .map(|i| to_srvf(&resample_edge(&random_smooth_curve(seed * 31 + i as u64, 120), t)))
            .collect();
        let result = karcher_mean_detailed(&bundle).unwrap();
        for (i, w) in result.costs.windows(2).enumerate() {
            assert!(
                w[1] <= w[0] + 1e-12,
                "seed {seed}: cost rose at round {i}: {} -> {}",
                w[0],
                w[1]
            );
        }
    }
    let elapsed = start.elapsed();
    assert_runtime("criterion 2", elapsed, 60);
    println!("criterion 2 (karcher mean monotonicity, 50 bundles): PASS in {elapsed:?}");
}

#[test]
fn criterion_3_effective_resistance() {
    use shapegraph::graph::{EdgeCurve, ShapeGraphBuilder};
    use shapegraph::Point;
    let start = Instant::now();

    // Closed forms: single resistor, parallel pair, series path.
    {
        let mut b = ShapeGraphBuilder::with_samples(2, 8);
        let u = b.add_node(Point::new2(0.0, 0.0));
        let v = b.add_node(Point::new2(2.0, 0.0));
        b.add_edge(u, v, EdgeCurve::segment(Point::new2(0.0, 0.0), Point::new2(2.0, 0.0), 8))
            .unwrap();
        let d = effective_resistance(&b.build()).unwrap();
        assert!((d.get(0, 1) - 2.0).abs() < 1e-9);
    }
    {
        let mut b = ShapeGraphBuilder::with_samples(2, 16);
        let u = b.add_node(Point::new2(0.0, 0.0));
        let v = b.add_node(Point::new2(1.0, 0.0));
        b.add_edge(u, v, EdgeCurve::segment(Point::new2(0.0, 0.0), Point::new2(1.0, 0.0), 16))
            .unwrap();
        let h = (1.0f64 - 0.25).sqrt();
        let bow = EdgeCurve::new(vec![
            Point::new2(0.0, 0.0),
            Point::new2(0.5, h),
            Point::new2(1.0, 0.0),
        ])
        .unwrap();
        b.add_edge(u, v, bow).unwrap();
        let d = effective_resistance(&b.build()).unwrap();
        assert!((d.get(0, 1) - 2.0 / 3.0).abs() < 1e-9, "parallel: {}", d.get(0, 1));
    }
    {
        let mut b = ShapeGraphBuilder::with_samples(2, 8);
        let a = b.add_node(Point::new2(0.0, 0.0));
        let m = b.add_node(Point::new2(1.0, 0.0));
        let c = b.add_node(Point::new2(3.0, 0.0));
        b.add_edge(a, m, EdgeCurve::segment(Point::new2(0.0, 0.0), Point::new2(1.0, 0.0), 8))
            .unwrap();
        b.add_edge(m, c, EdgeCurve::segment(Point::new2(1.0, 0.0), Point::new2(3.0, 0.0), 8))
            .unwrap();
        let d = effective_resistance(&b.build()).unwrap();
        assert!((d.get(0, 2) - 3.0).abs() < 1e-9, "series: {}", d.get(0, 2));
    }

    // Metric axioms and Rayleigh monotonicity on 100 random graphs.
    for seed in 0..100u64 {
        let n = 4 + (seed % 5) as usize;
        let g = random_network_graph(seed, n, 2, 1);
        let d = effective_resistance(&g).unwrap();
        let k = d.size();
        for i in 0..k {
            assert_eq!(d.get(i, i), 0.0);
            for j in 0..k {
                assert!((d.get(i, j) - d.get(j, i)).abs() < 1e-9);
                assert!(d.get(i, j) >= 0.0);
                for l in 0..k {
                    assert!(
                        d.get(i, j) + d.get(j, l) + 1e-9 >= d.get(i, l),
                        "seed {seed}: triangle inequality failed"
                    );
                }
            }
        }
        let denser = random_network_graph(seed, n, 2, 3);
        if denser.edge_count() > g.edge_count() {
            let d2 = effective_resistance(&denser).unwrap();
            for i in 0..k {
                for j in 0..k {
                    assert!(
                        d2.get(i, j) <= d.get(i, j) + 1e-9,
                        "seed {seed}: Rayleigh monotonicity failed"
                    );
                }
            }
        }
    }
    let elapsed = start.elapsed();
    assert_runtime("criterion 3", elapsed, 10);
    println!("criterion 3 (effective resistance closed forms + metric axioms): PASS in {elapsed:?}");
}

/// Naive agglomeration recomputing cluster distances from the definition.
fn naive_linkage(d: &DistanceMatrix, method: Linkage) -> Vec<Merge> {
    let k = d.size();
    let mut clusters: Vec<(usize, Vec<usize>)> = (0..k).map(|i| (i, vec![i])).collect();
    let mut merges = Vec::new();
    for step in 0..k - 1 {
        let mut best = f64::INFINITY;
        let mut best_pair = (0usize, 0usize);
        let mut best_slots = (0usize, 0usize);
        for a in 0..clusters.len() {
            for b in (a + 1)..clusters.len() {
                let mut agg: f64 = match method {
                    Linkage::Single => f64::INFINITY,
                    Linkage::Complete => 0.0,
                    Linkage::Average => 0.0,
                };
                let mut count = 0usize;
                for &i in &clusters[a].1 {
                    for &j in &clusters[b].1 {
                        let v = d.get(i, j);
                        match method {
                            Linkage::Single => agg = agg.min(v),
                            Linkage::Complete => agg = agg.max(v),
                            Linkage::Average => agg += v,
                        }
                        count += 1;
                    }
                }
                if method == Linkage::Average {
                    agg /= count as f64;
                }
                if agg < best {
                    best = agg;
                    best_pair = (clusters[a].0, clusters[b].0);
                    best_slots = (a, b);
                }
            }
        }
        merges.push(Merge {
            left: best_pair.0,
            right: best_pair.1,
            height: best,
        });
        let second = clusters.remove(best_slots.1);
        let first = clusters.remove(best_slots.0);
        let mut members = first.1;
        members.extend(second.1);
        clusters.push((k + step, members));
    }
    merges
}

#[test]
fn criterion_4_clustering_oracle() {
    let start = Instant::now();
    let mut state = 0xD1B54A32D192ED03u64;
    let mut next = move || {
        state ^= state << 13;
        state ^= state >> 7;
        state ^= state << 17;
        (state >> 11) as f64 / (1u64 << 53) as f64
    };
    for case in 0..100 {
        let k = 12;
        let mut d = DistanceMatrix::zeros(k);
        for i in 0..k {
            for j in (i + 1)..k {
                d.set(i, j, next() * 100.0);
            }
        }
        for method in [Linkage::Single, Linkage::Complete, Linkage::Average] {
            let fast = linkage(&d, method);
            let slow = naive_linkage(&d, method);
            assert_eq!(fast.merges().len(), slow.len());
            for (got, want) in fast.merges().iter().zip(&slow) {
                assert_eq!(
                    (got.left, got.right),
                    (want.left, want.right),
                    "case {case} {method:?}: merge pair differs"
                );
                assert!(
                    (got.height - want.height).abs() < 1e-9,
                    "case {case} {method:?}: height differs"
                );
            }
        }
    }
    let elapsed = start.elapsed();
    assert_runtime("criterion 4", elapsed, 10);
    println!("criterion 4 (linkage vs naive oracle, 100 matrices x 3 linkages): PASS in {elapsed:?}");
}

#[test]
fn criterion_5_reduction_ladder() {
    let total = Instant::now();
    let params = ReductionParams {
        resolutions: vec![0.8, 0.6, 0.4],
        ..ReductionParams::default()
    };
    let mut slowest = Duration::ZERO;
    for case in 0..20u64 {
        let n = 200 + ((case * 97) % 301) as usize; // 200..=500
        let extras = n / 12;
        let g = random_network_graph(case * 7 + 1, n, 2, extras);
        let start = Instant::now();
        let result = multires(&g, &params).unwrap();
        let elapsed = start.elapsed();
        slowest = slowest.max(elapsed);
        assert!(
            elapsed < Duration::from_secs(60),
            "case {case} (n={n}): took {elapsed:?}"
        );
        let mut prev = result.base.graph.node_count();
        for level in &result.levels {
            let bound = (level.resolution * result.base_nodes as f64).ceil() as usize;
            let nodes = level.graph().node_count();
            assert!(is_connected(level.graph()), "case {case}: disconnected level");
            assert!(nodes <= bound, "case {case}: {nodes} > ceil bound {bound}");
            assert!(nodes <= prev, "case {case}: node counts not nonincreasing");
            prev = nodes;
        }
    }
    println!(
        "criterion 5 (reduction ladder on 20 graphs, 200-500 nodes; slowest {slowest:?}): PASS in {:?}",
        total.elapsed()
    );
}

/// Exhaustive cyclic two-variable ascent on the dual, run to stagnation.
/// Independent of the SMO working-set path.
fn qp_oracle(kernel: &[f64], y: &[f64], c: f64) -> f64 {
    let n = y.len();
    let k = |i: usize, j: usize| kernel[i * n + j];
    let mut alpha = vec![0.0f64; n];
    let objective = |alpha: &[f64]| {
        let mut obj = alpha.iter().sum::<f64>();
        for i in 0..n {
            for j in 0..n {
                obj -= 0.5 * alpha[i] * alpha[j] * y[i] * y[j] * k(i, j);
            }
        }
        obj
    };
    loop {
        let before = objective(&alpha);
        for i in 0..n {
            for j in 0..n {
                if i == j {
                    continue;
                }
                let s = y[i] * y[j];
                let f_i: f64 = (0..n).map(|t| alpha[t] * y[t] * k(t, i)).sum();
                let f_j: f64 = (0..n).map(|t| alpha[t] * y[t] * k(t, j)).sum();
                let quad = k(i, i) + k(j, j) - 2.0 * k(i, j);
                if quad <= 1e-14 {
                    continue;
                }
                let deriv = y[j] * (f_i - f_j) + 1.0 - s;
                let (lo, hi) = if s > 0.0 {
                    let sum = alpha[i] + alpha[j];
                    ((sum - c).max(0.0), sum.min(c))
                } else {
                    let diff = alpha[j] - alpha[i];
                    (diff.max(0.0), (c + diff).min(c))
                };
                if lo > hi {
                    continue;
                }
                let new_j = (alpha[j] + deriv / quad).clamp(lo, hi);
                alpha[i] += s * (alpha[j] - new_j);
                alpha[j] = new_j;
            }
        }
        let after = objective(&alpha);
        if after - before < 1e-12 {
            return after;
        }
    }
}

#[test]
fn criterion_6_smo_correctness() {
    use rand::Rng;
    use rand_chacha::rand_core::SeedableRng;
    let start = Instant::now();
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2024);
    for case in 0..50 {
        let n = 4 + (case % 9);
        let x: Vec<Vec<f64>> = (0..n)
            .map(|_| vec![rng.random::<f64>() * 5.0, rng.random::<f64>() * 5.0])
            .collect();
        let mut y: Vec<f64> = (0..n)
            .map(|_| if rng.random::<f64>() < 0.5 { 1.0 } else { -1.0 })
            .collect();
        if y.iter().all(|&v| v == y[0]) {
            // Keep every one of the 50 problems genuinely binary.
            y[0] = -y[0];
        }
        let eta = 0.2 + rng.random::<f64>() * 0.5;
        let c = 0.5 + rng.random::<f64>() * 4.0;
        let mut kernel = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                let d: f64 = x[i]
                    .iter()
                    .zip(&x[j])
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum();
                kernel[i * n + j] = f64::exp(-eta * d);
            }
        }
        let fast = solve_binary(&kernel, &y, c, 1e-6, 1_000_000);
        let slow = qp_oracle(&kernel, &y, c);
        assert!(
            (fast.objective - slow).abs() < 1e-4,
            "case {case}: smo objective {} vs oracle {slow}",
            fast.objective
        );
    }

    // XOR reaches perfect training accuracy at a suitable kernel width.
    let mut x = Vec::new();
    let mut y = Vec::new();
    for (cx, cy, label) in [(0.0, 0.0, "a"), (1.0, 1.0, "a"), (0.0, 1.0, "b"), (1.0, 0.0, "b")] {
        for i in 0..8 {
            let angle = i as f64;
            x.push(vec![cx + 0.1 * angle.cos(), cy + 0.1 * angle.sin()]);
            y.push(label.to_string());
        }
    }
    let model = shapegraph::train(&x, &y, 10.0, 3.0).unwrap();
    let correct = x
        .iter()
        .zip(&y)
        .filter(|(xi, yi)| shapegraph::predict(&model, xi).unwrap() == **yi)
        .count();
    assert_eq!(correct, x.len(), "XOR training accuracy below 100%");

    let elapsed = start.elapsed();
    println!("criterion 6 (smo vs brute-force dual, 50 problems + xor): PASS in {elapsed:?}");
}

#[test]
fn criterion_7_end_to_end_classification() {
    let start = Instant::now();
    let dir = scratch("endtoend");

    // Two synthetic classes: dense random trees vs sparse random trees.
    let mut labels = String::new();
    for i in 0..40u64 {
        let dense = random_tree_graph(1000 + i, 120 + (i as usize * 7) % 41, 2);
        fs::write(
            dir.join(format!("dense{i:02}.json")),
            write_graph(&dense, DocMetadata::default()),
        )
        .unwrap();
        labels.push_str(&format!("dense{i:02},dense\n"));
        let sparse = random_tree_graph(2000 + i, 40 + (i as usize * 5) % 41, 2);
        fs::write(
            dir.join(format!("sparse{i:02}.json")),
            write_graph(&sparse, DocMetadata::default()),
        )
        .unwrap();
        labels.push_str(&format!("sparse{i:02},sparse\n"));
    }
    let labels_path = dir.join("labels.csv");
    fs::write(&labels_path, labels).unwrap();

    let csv = dir.join("features.csv");
    let status = cli()
        .args([
            "features",
            dir.join("*.json").to_str().unwrap(),
            csv.to_str().unwrap(),
            "--mode",
            "37",
            "--labels",
            labels_path.to_str().unwrap(),
        ])
        .status()
        .unwrap();
    assert!(status.success());

    let summary_path = dir.join("summary.json");
    let out = cli()
        .args([
            "classify",
            csv.to_str().unwrap(),
            "--scheme",
            "loo",
            "--grid",
            "default",
            "--seed",
            "1",
            "--out",
            summary_path.to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));

    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(&summary_path).unwrap()).unwrap();
    let max = summary["max"].as_f64().unwrap();
    assert!(max >= 0.95, "grid-max LOO accuracy {max} below 0.95");

    let elapsed = start.elapsed();
    assert_runtime("criterion 7", elapsed, 600);
    println!(
        "criterion 7 (end-to-end classification, grid-max accuracy {max:.3}): PASS in {elapsed:?}"
    );
}

#[test]
fn criterion_8_published_accuracy_reproduction() {
    println!(
        "criterion 8: published retinal-vessel accuracy tables are NOT reproducible here; the \
         binary-segmentation preprocessing that produced those vessel graphs is unavailable, \
         so no comparison is attempted."
    );
    let Ok(dir) = std::env::var("SHAPEGRAPH_ALTHAMMER_DIR") else {
        println!(
            "criterion 8 (neuron archive subsample): SKIP (network-gated; set \
             SHAPEGRAPH_ALTHAMMER_DIR to a directory with one subdirectory of .swc files per \
             class to enable)"
        );
        return;
    };

    // Label = subdirectory name; up to 100 files per class.
    let mut x = Vec::new();
    let mut y = Vec::new();
    let mut classes: Vec<PathBuf> = fs::read_dir(&dir)
        .expect("archive directory readable")
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_dir())
        .collect();
    classes.sort();
    for class_dir in &classes {
        let label = class_dir.file_name().unwrap().to_string_lossy().into_owned();
        let mut files: Vec<PathBuf> = fs::read_dir(class_dir)
            .unwrap()
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|e| e == "swc"))
            .collect();
        files.sort();
        for file in files.into_iter().take(100) {
            let text = fs::read_to_string(&file).unwrap();
            let Ok(graph) = shapegraph::parse_swc(&text, 30) else {
                continue;
            };
            let f = shapegraph::features(&graph, shapegraph::FeatureMode::Full37);
            x.push(f.full().to_vec());
            y.push(label.clone());
        }
    }
    assert!(
        x.len() >= 40,
        "too few parsable archive files ({})",
        x.len()
    );
    let cv = shapegraph::cross_validate(
        &x,
        &y,
        shapegraph::CvScheme::KFold(10),
        &shapegraph::GridSpec::default(),
        0,
    )
    .unwrap();
    assert!(
        cv.summary.max >= 0.90,
        "archive grid-max accuracy {} below 0.90",
        cv.summary.max
    );
    println!(
        "criterion 8 (neuron archive subsample, grid-max accuracy {:.3}): PASS",
        cv.summary.max
    );
}

#[test]
fn criterion_9_cli_determinism() {
    let start = Instant::now();
    let dir = scratch("determinism");
    let swc = dir.join("n.swc");
    fs::write(
        &swc,
        "1 1 0 0 0 1 -1\n2 3 1 0 0 1 1\n3 3 2 0.5 0 1 2\n4 3 3 0.5 0 1 3\n5 3 2 -1 0 1 2\n6 1 9 9 0 1 -1\n7 3 10 9 0 1 6\n",
    )
    .unwrap();
    let graph_json = dir.join("g.json");
    fs::write(
        &graph_json,
        write_graph(&random_network_graph(77, 70, 2, 5), DocMetadata::default()),
    )
    .unwrap();
    let labels = dir.join("labels.csv");
    let mut label_text = String::new();
    for i in 0..4 {
        fs::write(
            dir.join(format!("cls_a{i}.json")),
            write_graph(&random_tree_graph(300 + i, 30, 2), DocMetadata::default()),
        )
        .unwrap();
        fs::write(
            dir.join(format!("cls_b{i}.json")),
            write_graph(&random_tree_graph(400 + i, 90, 2), DocMetadata::default()),
        )
        .unwrap();
        label_text.push_str(&format!("cls_a{i},a\ncls_b{i},b\n"));
    }
    fs::write(&labels, label_text).unwrap();

    let run_all = |tag: &str| -> Vec<(String, Vec<u8>)> {
        let out = dir.join(tag);
        fs::create_dir_all(&out).unwrap();
        let connect_out = out.join("connected.json");
        assert!(cli()
            .args(["connect", swc.to_str().unwrap(), connect_out.to_str().unwrap()])
            .status()
            .unwrap()
            .success());
        let ladder = out.join("ladder");
        assert!(cli()
            .args([
                "reduce",
                graph_json.to_str().unwrap(),
                ladder.to_str().unwrap(),
                "--resolutions",
                "0.8,0.5",
                "--emit-intermediates",
            ])
            .status()
            .unwrap()
            .success());
        let csv = out.join("features.csv");
        assert!(cli()
            .args([
                "features",
                dir.join("cls_*.json").to_str().unwrap(),
                csv.to_str().unwrap(),
                "--mode",
                "37",
                "--labels",
                labels.to_str().unwrap(),
            ])
            .status()
            .unwrap()
            .success());
        let summary = out.join("summary.json");
        let table = out.join("table.csv");
        assert!(cli()
            .args([
                "classify",
                csv.to_str().unwrap(),
                "--scheme",
                "kfold:4",
                "--grid",
                "coarse",
                "--seed",
                "11",
                "--out",
                summary.to_str().unwrap(),
                "--table",
                table.to_str().unwrap(),
            ])
            .status()
            .unwrap()
            .success());
        let svg = out.join("render.svg");
        assert!(cli()
            .args([
                "render",
                ladder.join("g_0.500.json").to_str().unwrap(),
                svg.to_str().unwrap(),
                "--color-clusters",
            ])
            .status()
            .unwrap()
            .success());

        // Collect every produced file keyed by its path relative to the run.
        let mut all = Vec::new();
        let mut stack = vec![out.clone()];
        while let Some(d) = stack.pop() {
            let mut entries: Vec<_> = fs::read_dir(&d).unwrap().filter_map(|e| e.ok()).collect();
            entries.sort_by_key(|e| e.path());
            for entry in entries {
                let path = entry.path();
                if path.is_dir() {
                    stack.push(path);
                } else {
                    let rel = path.strip_prefix(&out).unwrap().to_string_lossy().into_owned();
                    all.push((rel, fs::read(&path).unwrap()));
                }
            }
        }
        all.sort_by(|a, b| a.0.cmp(&b.0));
        all
    };

    let first = run_all("run1");
    let second = run_all("run2");
    assert_eq!(first.len(), second.len());
    for ((name_a, bytes_a), (name_b, bytes_b)) in first.iter().zip(&second) {
        assert_eq!(name_a, name_b);
        assert_eq!(
            bytes_a, bytes_b,
            "{name_a}: outputs differ between identical runs"
        );
    }
    let elapsed = start.elapsed();
    println!(
        "criterion 9 (cli determinism across {} files per run): PASS in {elapsed:?}",
        first.len()
    );
}
