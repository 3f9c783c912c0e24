use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use rayon::prelude::*;

use causalnet::data::{read_csv, write_csv};
use causalnet::discovery::{hill_climb, sem, SemConfig};
use causalnet::effects::{effect, find_backdoor, AdjustmentQuery};
use causalnet::evalsim::{
    auc, benchmark, default_prior, render_key_values, render_table, sim_preset, simulate_cohorts, BenchmarkConfig,
    SimConfig,
};
use causalnet::graph::{parse_graph, write_graph, GraphFile, GraphOptions};
use causalnet::missingness::{check_recoverable, classify, recover_joint};
use causalnet::model::{fit_parameters, parse_network, predict, write_network};
use causalnet::{Dataset, MGraph, Network, NodeRole, PriorKnowledge, Schema};

use crate::manifest::{sha256_hex, Manifest, MANIFEST_FILE};
use crate::{split_list, usage, Command, DataArgs, EmArgs, SearchArgs};

const SUMMARY_FILE: &str = "summary.txt";

/// Collects inputs, output files and the printed summary of one run.
struct Run {
    manifest: Manifest,
    out: Option<PathBuf>,
    files: Vec<(String, Vec<u8>)>,
    summary: String,
}

impl Run {
    fn new(manifest: Manifest, out: Option<&Path>) -> Run {
        Run {
            manifest,
            out: out.map(Path::to_path_buf),
            files: Vec::new(),
            summary: String::new(),
        }
    }

    /// Reads an input file and records its digest under the option name.
    fn input(&mut self, option: &str, path: &Path) -> anyhow::Result<String> {
        let bytes = fs::read(path).with_context(|| format!("cannot read {}", path.display()))?;
        self.manifest.inputs.insert(option.to_string(), sha256_hex(&bytes));
        String::from_utf8(bytes).with_context(|| format!("{} is not UTF-8", path.display()))
    }

    fn file(&mut self, name: impl Into<String>, bytes: impl Into<Vec<u8>>) {
        self.files.push((name.into(), bytes.into()));
    }

    fn say(&mut self, line: impl AsRef<str>) {
        self.summary.push_str(line.as_ref());
        self.summary.push('\n');
    }

    fn finish(mut self) -> anyhow::Result<Manifest> {
        print!("{}", self.summary);
        let Some(out) = self.out.take() else {
            return Ok(self.manifest);
        };
        let summary = std::mem::take(&mut self.summary);
        self.file(SUMMARY_FILE, summary);
        for (name, bytes) in &self.files {
            let path = out.join(name);
            if let Some(dir) = path.parent() {
                fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
            }
            fs::write(&path, bytes).with_context(|| format!("cannot write {}", path.display()))?;
            self.manifest.outputs.insert(name.clone(), sha256_hex(bytes));
        }
        fs::create_dir_all(&out)?;
        fs::write(out.join(MANIFEST_FILE), self.manifest.render())?;
        Ok(self.manifest)
    }

    fn graph(&mut self, path: &Path) -> anyhow::Result<GraphFile> {
        let text = self.input("graph", path)?;
        parse_graph(&text, GraphOptions::default()).with_context(|| format!("in {}", path.display()))
    }

    fn prior(&mut self, path: &Path) -> anyhow::Result<PriorKnowledge> {
        let file = self.graph(path)?;
        Ok(PriorKnowledge::from_names(file.graph, &file.forbidden)?)
    }

    fn network(&mut self, path: &Path) -> anyhow::Result<Network> {
        let text = self.input("network", path)?;
        parse_network(&text, GraphOptions::default()).with_context(|| format!("in {}", path.display()))
    }

    fn dataset(&mut self, data: &Path, schema: &Path) -> anyhow::Result<Dataset> {
        let schema_text = self.input("schema", schema)?;
        let schema = Schema::parse(&schema_text).with_context(|| format!("in {}", schema.display()))?;
        let csv = self.input("data", data)?;
        read_csv(csv.as_bytes(), &schema).with_context(|| format!("in {}", data.display()))
    }

    fn data_args(&mut self, a: &DataArgs) -> anyhow::Result<Dataset> {
        self.dataset(&a.data, &a.schema)
    }
}

/// Runs a parsed subcommand and returns its completed manifest.
pub fn execute(command: &Command, manifest: Manifest) -> anyhow::Result<Manifest> {
    match command {
        Command::Dsep(a) => {
            let mut run = Run::new(manifest, a.out.as_deref());
            let g = run.graph(&a.graph)?.graph;
            let sep = g.d_separated(&split_list(&a.x), &split_list(&a.y), &split_list(&a.z))?;
            run.say(format!("d-separated: {sep}"));
            run.finish()
        }
        Command::Classify(a) => {
            let mut run = Run::new(manifest, a.out.as_deref());
            let g = run.graph(&a.graph)?.graph;
            run.say(format!("class: {}", classify(&g)));
            let diagnosis = check_recoverable(&g);
            run.say(format!("recoverable: {}", diagnosis.recoverable()));
            for v in &diagnosis.violations {
                run.say(format!("violation: {:?} {} -> {}", v.reason, v.parent, v.indicator));
            }
            run.finish()
        }
        Command::Recover(a) => {
            let mut run = Run::new(manifest, Some(&a.out));
            let g = run.graph(&a.graph)?.graph;
            let d = run.data_args(&a.input)?;
            let vars = g.ids(&split_list(&a.vars))?;
            if vars.is_empty() {
                return Err(usage("--vars names no variable"));
            }
            let rec = recover_joint::<f64>(&g, &d, &vars)?;
            let mut csv = String::new();
            for &v in &vars {
                let _ = write!(csv, "{},", g.name(v));
            }
            csv.push_str("probability\n");
            for (k, p) in rec.joint.values().iter().enumerate() {
                let levels = rec.joint.assignment_of(k);
                for (&v, &l) in vars.iter().zip(&levels) {
                    let col = d.schema().column(g.name(v))?;
                    let _ = write!(csv, "{},", d.schema().var(col).levels[l]);
                }
                let _ = writeln!(csv, "{p:.17e}");
            }
            let mut weighted = Vec::new();
            write_csv(&rec.weighted, &mut weighted)?;
            run.say(format!("rows used: {} of {}", rec.weighted.n_rows(), d.n_rows()));
            run.say(format!("total weight: {}", rec.weighted.total_weight()));
            run.say(csv.trim_end());
            run.file("joint.csv", csv);
            run.file("weighted.csv", weighted);
            run.finish()
        }
        Command::Effect(a) => {
            let mut run = Run::new(manifest, a.out.as_deref());
            let c = run.network(&a.network)?;
            let g = c.graph();
            let q = AdjustmentQuery::from_names(&c, &a.treatment, &a.level, &a.outcome)?;
            let (z, how) = match &a.adjust {
                Some(list) => (g.ids(&split_list(list))?, "given"),
                None => (find_backdoor(g, q.treatment, q.outcome)?, "smallest back-door set"),
            };
            let report = effect(&c, &q, &z)?;
            let (x, y) = (q.treatment, q.outcome);
            let ylevels = c.levels(y);
            let dist = |p: &[f64]| {
                ylevels
                    .iter()
                    .zip(p)
                    .map(|(l, v)| format!("{l}={v}"))
                    .collect::<Vec<_>>()
                    .join(" ")
            };
            run.say(format!("treatment: {}={}", g.name(x), a.level));
            run.say(format!("outcome: {}", g.name(y)));
            let zs = if z.is_empty() { "(empty)".to_string() } else { g.names_of(&z).join(", ") };
            run.say(format!("adjustment: {zs} ({how})"));
            for s in &report.strata {
                let label = if z.is_empty() {
                    "(all)".to_string()
                } else {
                    z.iter()
                        .zip(&s.levels)
                        .map(|(&v, &l)| format!("{}={}", g.name(v), c.levels(v)[l]))
                        .collect::<Vec<_>>()
                        .join(",")
                };
                let contribution: Vec<f64> = s.conditional.iter().map(|p| p * s.weight).collect();
                run.say(format!(
                    "stratum {label}: P(z)={} P(y|x,z): {} contribution: {}",
                    s.weight,
                    dist(&s.conditional),
                    dist(&contribution)
                ));
            }
            run.say(format!(
                "P({} | do({}={})): {}",
                g.name(y),
                g.name(x),
                a.level,
                dist(&report.distribution)
            ));
            run.finish()
        }
        Command::Learn(a) => {
            let mut run = Run::new(manifest, Some(&a.out));
            let pk = run.prior(&a.graph)?;
            let forbidden = forbidden_names(&pk);
            let d = run.data_args(&a.input)?.derive_indicators(pk.graph())?;
            let cols = d.columns_for(pk.graph())?;
            let complete = d.complete_cases(&cols);
            if complete.n_rows() == 0 {
                bail!("no row is complete on the graph's variables; use `sem` for incomplete data");
            }
            let cfg = sem_config(&a.search, None, a.seed, false);
            let found = hill_climb::<f64>(&complete, &pk, &cfg)?;
            let net: Network = fit_parameters(&found.graph, &complete, cfg.alpha)?;
            run.say(format!("complete cases: {} of {}", complete.n_rows(), d.n_rows()));
            run.say(format!("moves: {}", found.moves));
            run.say(format!("bic: {}", found.score.total));
            run.say(format!("edges: {}", found.graph.edges().len()));
            run.file("learned.graph", write_graph(&found.graph, &forbidden));
            run.file("learned.network", write_network(&net));
            run.finish()
        }
        Command::Sem(a) => {
            let mut run = Run::new(manifest, Some(&a.out));
            let pk = run.prior(&a.graph)?;
            let forbidden = forbidden_names(&pk);
            let d = run.data_args(&a.input)?;
            let cfg = sem_config(&a.search, Some(&a.em), a.seed, a.fixed_structure);
            let (net, trace) = sem::<f64>(&d, &pk, &cfg)?;
            let best = &trace.iterations[trace.best];
            run.say(format!("iterations: {}", trace.iterations.len()));
            run.say(format!("converged: {}", trace.converged));
            run.say(format!("best iteration: {}", best.iteration));
            run.say(format!("bic: {}", best.score));
            run.say(format!("edges: {}", net.graph().edges().len()));
            for it in &trace.iterations {
                run.file(format!("trace/iter_{:03}.graph", it.iteration), write_graph(&it.graph, &forbidden));
            }
            run.file("trace.txt", trace.to_string());
            run.file("sem.graph", write_graph(net.graph(), &forbidden));
            run.file("sem.network", write_network(&net));
            run.finish()
        }
        Command::Predict(a) => {
            let mut run = Run::new(manifest, Some(&a.out));
            let c = run.network(&a.network)?;
            let mut d = run.data_args(&a.input)?;
            if c.graph().node_ids().any(|v| c.graph().role(v).is_indicator()) {
                d = d.derive_indicators(c.graph())?;
            }
            let preds = predict(&c, &d, &a.target, &a.level)?;
            let t_col = d.schema().column(&a.target)?;
            let positive = d
                .schema()
                .var(t_col)
                .level_index(&a.level)
                .ok_or_else(|| usage(format!("`{}` has no level `{}`", a.target, a.level)))?;
            let mut csv = String::from("row,score,flagged,label\n");
            let mut labels = Vec::new();
            let mut scores = Vec::new();
            for (r, p) in preds.iter().enumerate() {
                let label = d.get(r, t_col).map(|l| l == positive);
                let shown = label.map_or(String::new(), |l| u8::from(l).to_string());
                let _ = writeln!(csv, "{},{:.17e},{},{}", r + 1, p.score, p.flagged, shown);
                if let Some(l) = label {
                    labels.push(l);
                    scores.push(p.score);
                }
            }
            run.say(format!("rows: {}", preds.len()));
            run.say(format!("flagged: {}", preds.iter().filter(|p| p.flagged).count()));
            match auc(&labels, &scores) {
                Ok(v) => run.say(format!("auc: {v} over {} labelled rows", labels.len())),
                Err(_) => run.say("auc: undefined (labelled rows lack one class)"),
            }
            run.file("predictions.csv", csv);
            run.finish()
        }
        Command::Simulate(a) => {
            let mut run = Run::new(manifest, Some(&a.out));
            let cfg: SimConfig<f64> = match (&a.preset, &a.network) {
                (Some(p), None) => sim_preset(p, a.seed)?,
                (None, Some(path)) => {
                    let truth = run.network(path)?;
                    let sizes = a.sizes.as_deref().ok_or_else(|| usage("--network needs --sizes"))?;
                    SimConfig {
                        truth,
                        cohort: a.cohort.clone(),
                        sizes: parse_pairs(sizes, "--sizes")?,
                        observed_overrides: BTreeMap::new(),
                        seed: a.seed,
                    }
                }
                _ => return Err(usage("give exactly one of --preset or --network")),
            };
            let (d, truth) = simulate_cohorts(&cfg)?;
            let mut csv = Vec::new();
            write_csv(&d, &mut csv)?;
            run.say(format!("rows: {}", d.n_rows()));
            for (level, n) in &cfg.sizes {
                run.say(format!("cohort {level}: {n}"));
            }
            for col in 0..d.n_cols() {
                let missing = d.missing_count(col);
                if missing > 0 {
                    run.say(format!("missing {}: {missing}", d.schema().var(col).name));
                }
            }
            run.file("data.csv", csv);
            run.file("data.schema", d.schema().to_text());
            run.file("truth.graph", write_graph(&truth, &[]));
            run.finish()
        }
        Command::Benchmark(a) => {
            let mut run = Run::new(manifest, Some(&a.out));
            if a.seeds == 0 {
                return Err(usage("--seeds must be positive"));
            }
            let pk = match &a.graph {
                Some(p) => run.prior(p)?,
                None => default_prior(),
            };
            let fixed = match (&a.simulate, &a.data, &a.schema) {
                (Some(_), None, None) => None,
                (None, Some(data), Some(schema)) => {
                    let cohort = selection_node(pk.graph())?;
                    Some(run.dataset(data, schema)?.with_cohort(&cohort)?)
                }
                _ => return Err(usage("give either --simulate or --data with --schema")),
            };
            let base = BenchmarkConfig {
                target: a.target.clone(),
                positive_level: a.positive.clone(),
                train_fractions: parse_pairs(&a.train_fractions, "--train-fractions")?,
                seed: 0,
                sem: sem_config(&a.search, Some(&a.em), 0, false),
            };
            let seeds: Vec<u64> = (a.first_seed..a.first_seed + a.seeds).collect();
            let reports = seeds
                .par_iter()
                .map(|&seed| {
                    let d = match (&fixed, &a.simulate) {
                        (Some(d), _) => d.clone(),
                        (None, Some(preset)) => simulate_cohorts(&sim_preset::<f64>(preset, seed)?)?.0,
                        (None, None) => unreachable!("checked above"),
                    };
                    let cfg = BenchmarkConfig { seed, ..base.clone() };
                    benchmark::<f64>(&d, &pk, &cfg).with_context(|| format!("seed {seed}"))
                })
                .collect::<anyhow::Result<Vec<_>>>()?;
            let table = render_table(&reports);
            run.say(table.trim_end());
            run.file("report.txt", table);
            run.file("report.kv", render_key_values(&reports));
            run.finish()
        }
        Command::Replay(_) => unreachable!("replay is dispatched before execute"),
    }
}

fn sem_config(s: &SearchArgs, em: Option<&EmArgs>, seed: u64, fixed_structure: bool) -> SemConfig {
    let defaults = SemConfig::default();
    SemConfig {
        max_iterations: em.map_or(defaults.max_iterations, |e| e.max_iterations),
        tolerance: em.map_or(defaults.tolerance, |e| e.tolerance),
        max_parents: s.max_parents,
        alpha: s.alpha,
        seed,
        restarts: s.restarts,
        fixed_structure,
    }
}

fn forbidden_names(pk: &PriorKnowledge) -> Vec<(String, String)> {
    let g = pk.graph();
    pk.blacklist()
        .iter()
        .map(|&(p, c)| (g.name(p).to_string(), g.name(c).to_string()))
        .collect()
}

fn selection_node(g: &MGraph) -> anyhow::Result<String> {
    match g.nodes_with(|r| *r == NodeRole::Selection).as_slice() {
        [s] => Ok(g.name(*s).to_string()),
        [] => bail!("the prior graph has no selection node to split cohorts by"),
        _ => bail!("the prior graph has more than one selection node"),
    }
}

/// Parses `KEY=VALUE,...`.
fn parse_pairs<V: std::str::FromStr>(s: &str, flag: &str) -> anyhow::Result<BTreeMap<String, V>> {
    let mut out = BTreeMap::new();
    for item in split_list(s) {
        let (k, v) = item
            .split_once('=')
            .ok_or_else(|| usage(format!("{flag}: expected KEY=VALUE, got `{item}`")))?;
        let v = v
            .trim()
            .parse()
            .map_err(|_| usage(format!("{flag}: cannot parse the value in `{item}`")))?;
        out.insert(k.trim().to_string(), v);
    }
    Ok(out)
}
