use std::collections::BTreeMap;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use anyhow::{bail, Context, Result};

use agp_core::eval::{self, EvalReport};
use agp_core::graph::{load_edge_list, Graph, Layout};
use agp_core::{
    basic_propagate, normalize_scores, propagate_features, randomized_propagate, sweep_cut, Exponents,
    FeatureMatrix, Measure, PropagationResult, RandomStreams, RandomizedConfig, SparseSignal, WeightScheme,
};

use crate::args::*;
use crate::context::*;

const GROUNDTRUTH_LEVELS: usize = 50;

fn open_output(out: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match out {
        Some(p) => Box::new(BufWriter::new(File::create(p).with_context(|| format!("creating {}", p.display()))?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

/// Nonzero entries keyed by original id.
fn write_values(out: Option<&Path>, header: &[String], g: &Graph, values: &[f64], scale: f64) -> Result<()> {
    let entries = values
        .iter()
        .enumerate()
        .filter(|(_, v)| **v != 0.0)
        .map(|(u, v)| (g.label(u as u32) as u64, v * scale));
    agp_core::io::write_vector(open_output(out)?, header, entries)?;
    Ok(())
}

fn record(prov: &mut RunProvenance, res: &PropagationResult, scale: f64) {
    let p = &res.provenance;
    prov.engine = Some(p.engine.name());
    prov.epsilon = Some(p.epsilon);
    prov.delta = p.delta;
    prov.levels = Some(p.levels);
    prov.seed = p.seed;
    prov.push_count = Some(p.push_count);
    prov.dropped_mass = Some(p.dropped_mass * scale);
    if scale != 1.0 {
        prov.signal_scale = Some(scale);
    }
}

/// Exact engine when the effective epsilon is zero, randomized otherwise.
fn run_engine(
    g: &Graph,
    scheme: &WeightScheme,
    exps: Exponents,
    x: &SparseSignal,
    cfg: &RandomizedConfig,
) -> Result<PropagationResult> {
    if cfg.epsilon_for(scheme.levels()) == 0.0 {
        let mut res = basic_propagate(g, scheme, exps, x)?;
        res.provenance.delta = Some(cfg.delta);
        Ok(res)
    } else {
        Ok(randomized_propagate(g, scheme, exps, x, cfg)?)
    }
}

fn config(acc: &AccuracyArgs) -> RandomizedConfig {
    RandomizedConfig { delta: acc.delta, epsilon: acc.epsilon, seed: acc.seed }
}

pub fn propagate(a: &PropagateArgs) -> Result<()> {
    let (prov, t0) = RunProvenance::start();
    let measure = build_measure(&a.measure)?;
    let g = load_graph(&a.graph, layout_for(a.graph.directed, Some(a.measure.measure)))?;
    let exps = exponents(&a.measure, measure.default_exponents())?;
    let levels = levels(&a.measure, &measure, || levels_for_delta(&measure, a.accuracy.delta))?;
    let scheme = WeightScheme::new(measure.clone(), levels)?;
    let cfg = config(&a.accuracy);
    let signal = build_signal(&g, &a.signal, cfg.epsilon_for(levels) > 0.0)?;
    let res = run_engine(&g, &scheme, exps, &signal.x, &cfg)?;

    let mut prov = prov.with_graph(&g).with_measure(&measure, exps);
    record(&mut prov, &res, signal.scale);
    prov.wall_time = t0.elapsed().as_secs_f64();
    write_values(a.out.as_deref(), &prov.header(), &g, &res.values, signal.scale)
}

pub fn groundtruth(a: &GroundtruthArgs) -> Result<()> {
    let (prov, t0) = RunProvenance::start();
    let measure = build_measure(&a.measure)?;
    let g = load_graph(&a.graph, layout_for(a.graph.directed, Some(a.measure.measure)))?;
    let exps = exponents(&a.measure, measure.default_exponents())?;
    let levels = levels(&a.measure, &measure, || {
        Ok(match measure {
            Measure::Transition { hops } => hops,
            _ => GROUNDTRUTH_LEVELS,
        })
    })?;
    let scheme = WeightScheme::new(measure.clone(), levels)?;
    let signal = build_signal(&g, &a.signal, false)?;
    let res = basic_propagate(&g, &scheme, exps, &signal.x)?;

    let mut prov = prov.with_graph(&g).with_measure(&measure, exps);
    record(&mut prov, &res, signal.scale);
    prov.wall_time = t0.elapsed().as_secs_f64();
    write_values(a.out.as_deref(), &prov.header(), &g, &res.values, signal.scale)
}

pub fn cluster(a: &ClusterArgs) -> Result<()> {
    let (prov, t0) = RunProvenance::start();
    if a.graph.directed {
        return Err(usage("cluster needs an undirected graph"));
    }
    let measure = build_measure(&a.measure)?;
    let g = load_graph(&a.graph, Layout::Undirected)?;
    let exps = exponents(&a.measure, measure.default_exponents())?;
    let levels = levels(&a.measure, &measure, || levels_for_delta(&measure, a.accuracy.delta))?;
    let scheme = WeightScheme::new(measure.clone(), levels)?;
    let x = SparseSignal::one_hot(node(&g, a.source)?);
    let res = run_engine(&g, &scheme, exps, &x, &config(&a.accuracy))?;
    let scores = normalize_scores(&g, &res.values)?;
    let sweep = sweep_cut(&g, &scores, a.max_prefix)?;

    let mut prov = prov.with_graph(&g).with_measure(&measure, exps);
    record(&mut prov, &res, 1.0);
    prov.wall_time = t0.elapsed().as_secs_f64();
    let mut w = open_output(a.out.as_deref())?;
    for line in prov.header() {
        writeln!(w, "# {line}")?;
    }
    writeln!(w, "# conductance: {}", agp_core::io::format_value(sweep.best_conductance))?;
    writeln!(w, "# size: {}", sweep.best_prefix_len)?;
    for &u in sweep.best_set() {
        writeln!(w, "{}", g.label(u))?;
    }
    w.flush()?;

    if let Some(path) = &a.curve {
        let mut c = open_output(Some(path))?;
        writeln!(c, "prefix_len,node,conductance")?;
        for (i, phi) in sweep.curve.iter().enumerate() {
            writeln!(c, "{},{},{}", i + 1, g.label(sweep.order[i]), agp_core::io::format_value(*phi))?;
        }
        c.flush()?;
    }
    Ok(())
}

pub fn features(a: &FeaturesArgs) -> Result<()> {
    let (prov, t0) = RunProvenance::start();
    let measure = build_measure(&a.measure)?;
    let g = load_graph(&a.graph, layout_for(a.graph.directed, Some(a.measure.measure)))?;
    let exps = exponents(&a.measure, Exponents::GNN)?;
    let levels = levels(&a.measure, &measure, || levels_for_delta(&measure, a.accuracy.delta))?;
    let scheme = WeightScheme::new(measure.clone(), levels)?;
    let x = FeatureMatrix::load(&a.input).with_context(|| format!("reading {}", a.input.display()))?;
    let cfg = config(&a.accuracy);
    let res = propagate_features(&g, &scheme, exps, &x, &cfg, a.workers)?;
    res.matrix.save(&a.out).with_context(|| format!("writing {}", a.out.display()))?;

    let mut prov = prov.with_graph(&g).with_measure(&measure, exps);
    prov.engine = Some(if res.epsilon > 0.0 { "randomized" } else { "basic" });
    prov.epsilon = Some(res.epsilon);
    prov.delta = Some(cfg.delta);
    prov.levels = Some(levels);
    prov.seed = Some(cfg.seed);
    prov.push_count = Some(res.push_count);
    prov.wall_time = t0.elapsed().as_secs_f64();
    let side = a.out.with_file_name(format!(
        "{}.prov",
        a.out.file_name().context("output path has no file name")?.to_string_lossy()
    ));
    let mut w = open_output(Some(&side))?;
    for line in prov.header() {
        writeln!(w, "# {line}")?;
    }
    w.flush()?;
    Ok(())
}

pub fn eval(a: &EvalArgs) -> Result<()> {
    let (_, truth) = agp_core::io::read_vector_file_with_header(&a.truth)
        .with_context(|| format!("reading {}", a.truth.display()))?;
    let (est_header, est) = agp_core::io::read_vector_file_with_header(&a.est)
        .with_context(|| format!("reading {}", a.est.display()))?;

    let (t, e, degrees) = match &a.graph {
        Some(path) => {
            let g = load_graph_path(path, layout_for(a.directed, None), a.self_loops)?;
            let dense = |entries: &[(u64, f64)]| -> Result<Vec<f64>> {
                let mut v = vec![0.0; g.n()];
                for &(label, x) in entries {
                    let label = u32::try_from(label).with_context(|| format!("node id {label} out of range"))?;
                    v[node(&g, label)? as usize] += x;
                }
                Ok(v)
            };
            (dense(&truth)?, dense(&est)?, Some(g.degrees().to_vec()))
        }
        None => {
            // Index the union of ids seen in either file.
            let mut index = BTreeMap::new();
            for &(label, _) in truth.iter().chain(&est) {
                let next = index.len();
                index.entry(label).or_insert(next);
            }
            let dense = |entries: &[(u64, f64)]| {
                let mut v = vec![0.0; index.len()];
                for &(label, x) in entries {
                    v[index[&label]] += x;
                }
                v
            };
            (dense(&truth), dense(&est), None)
        }
    };
    let degrees = if a.normalized { degrees.as_deref() } else { None };
    let report = EvalReport {
        max_error: eval::max_error_with(&t, &e, degrees)?,
        precision_at_k: eval::precision_at_k(&t, &e, a.k)?,
        k: a.k,
        wall_time: header_value(&est_header, "wall_time").and_then(|v| v.parse().ok()).unwrap_or(0.0),
        push_count: header_value(&est_header, "push_count").and_then(|v| v.parse().ok()).unwrap_or(0),
    };
    println!("{}", serde_json::to_string(&report)?);
    Ok(())
}

pub fn mc(a: &McArgs) -> Result<()> {
    let (prov, t0) = RunProvenance::start();
    let g = load_graph(&a.graph, layout_for(a.graph.directed, None))?;
    let measure = Measure::Hkpr { t: a.t };
    measure.validate()?;
    let s = node(&g, a.source)?;
    let mut rng = RandomStreams::new(a.seed).stream(0, 0);
    let values = eval::mc_hkpr(&g, s, a.t, a.walks, a.fixed_len, &mut rng)?;

    let mut prov = prov.with_graph(&g).with_measure(&measure, measure.default_exponents());
    prov.engine = Some("monte_carlo");
    prov.levels = a.fixed_len;
    prov.seed = Some(a.seed);
    prov.push_count = Some(a.walks as u64);
    prov.wall_time = t0.elapsed().as_secs_f64();
    write_values(a.out.as_deref(), &prov.header(), &g, &values, 1.0)
}

pub fn convert(a: &ConvertArgs) -> Result<()> {
    let layout = match (a.directed, a.reverse) {
        (false, _) => Layout::Undirected,
        (true, false) => Layout::DirectedForward,
        (true, true) => Layout::DirectedReverse,
    };
    if is_csr(&a.input)? {
        let g = load_graph_path(&a.input, layout, false)?;
        let mut w = open_output(Some(&a.out))?;
        for u in 0..g.n() as u32 {
            for &v in g.neighbors(u) {
                let (src, dst) = match layout {
                    Layout::Undirected if v < u => continue,
                    Layout::DirectedReverse => (v, u),
                    _ => (u, v),
                };
                writeln!(w, "{} {}", g.label(src), g.label(dst))?;
            }
        }
        w.flush()?;
    } else {
        let g = load_edge_list(&a.input, layout, a.self_loops)
            .with_context(|| format!("reading {}", a.input.display()))?;
        g.write_csr(&a.out).with_context(|| format!("writing {}", a.out.display()))?;
        let map = a.out.with_extension("map");
        if g.labels().is_some() {
            g.write_mapping(&map).with_context(|| format!("writing {}", map.display()))?;
        } else if map.exists() {
            // A stale mapping would relabel the new graph.
            std::fs::remove_file(&map)?;
        }
    }
    Ok(())
}

pub fn tradeoff(a: &TradeoffArgs) -> Result<()> {
    let (prov, t0) = RunProvenance::start();
    let measure = build_measure(&a.measure)?;
    let g = load_graph(&a.graph, layout_for(a.graph.directed, Some(a.measure.measure)))?;
    let exps = exponents(&a.measure, measure.default_exponents())?;
    let truth_levels = levels(&a.measure, &measure, || {
        Ok(levels_for_delta(&measure, 1e-9)?.max(GROUNDTRUTH_LEVELS))
    })?;
    let x = SparseSignal::one_hot(node(&g, a.source)?);
    let truth = basic_propagate(&g, &WeightScheme::new(measure.clone(), truth_levels)?, exps, &x)?;
    let points = eval::tradeoff_curve(&g, &measure, exps, &x, &truth.values, &a.deltas, a.runs, a.seed, a.normalized)?;
    if points.is_empty() {
        bail!("no delta values given");
    }

    let mut prov = prov.with_graph(&g).with_measure(&measure, exps);
    prov.engine = Some("randomized");
    prov.levels = Some(truth_levels);
    prov.seed = Some(a.seed);
    prov.wall_time = t0.elapsed().as_secs_f64();
    let mut w = open_output(a.out.as_deref())?;
    for line in prov.header() {
        writeln!(w, "# {line}")?;
    }
    writeln!(w, "delta,levels,epsilon,max_error,push_count")?;
    for p in points {
        writeln!(w, "{},{},{},{},{}", p.delta, p.levels, p.epsilon, p.max_error, p.push_count)?;
    }
    w.flush()?;
    Ok(())
}
