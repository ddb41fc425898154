//! The `triblock` command line.
//!
//! Exit codes: 0 witness found (or command succeeded), 10 no witness,
//! 20 method inapplicable (infeasible arrangement), 2 input error.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use crate::candidates::{build_search_tree, CandidateCache};
use crate::fuzz::{run_fuzz, FuzzConfig, FuzzMode};
use crate::graph::{parse_edge_list, Graph};
use crate::oracle;
use crate::permgroup::{closure, GenSet};
use crate::pipeline::{
    automorphism_generators, decide, Mode, Options, PipelineError, Verdict, VerdictKind, DEFAULT_CAP,
    DEFAULT_RETRY_BUDGET,
};
use crate::rearrange::{rearrange, Arrangement, RearrangeError, TieBreak};

pub const EXIT_WITNESS: i32 = 0;
pub const EXIT_NO_WITNESS: i32 = 10;
pub const EXIT_INFEASIBLE: i32 = 20;
pub const EXIT_INPUT: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "triblock", version, about = "Isomorphism testing for triangle-tiled graphs")]
pub struct Cli {
    /// Print machine-readable JSON instead of text.
    #[arg(long, global = true)]
    pub json: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Exact,
    Compressed,
    Both,
}

impl ModeArg {
    fn modes(self) -> Vec<Mode> {
        match self {
            ModeArg::Exact => vec![Mode::Exact],
            ModeArg::Compressed => vec![Mode::Compressed],
            ModeArg::Both => vec![Mode::Exact, Mode::Compressed],
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct SearchArgs {
    #[arg(long, value_enum, default_value = "exact")]
    pub mode: ModeArg,
    /// Ceiling on direct products per step.
    #[arg(long, default_value_t = DEFAULT_CAP)]
    pub cap: usize,
    /// Number of arrangements to try before giving up.
    #[arg(long, default_value_t = DEFAULT_RETRY_BUDGET)]
    pub retry_budget: usize,
    #[arg(long)]
    pub timeout_ms: Option<u64>,
    #[arg(long, env = "TRIBLOCK_SEED", default_value_t = 0)]
    pub seed: u64,
    /// Vertex of G that anchors the first block.
    #[arg(long, default_value_t = 0)]
    pub seed_vertex: usize,
}

impl SearchArgs {
    fn options(&self, mode: Mode) -> Options {
        Options {
            mode,
            cap: self.cap,
            retry_budget: self.retry_budget,
            seed: self.seed,
            seed_vertex: self.seed_vertex,
            timeout_ms: self.timeout_ms,
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Decide whether G and H are isomorphic.
    Check {
        g: PathBuf,
        h: PathBuf,
        #[command(flatten)]
        search: SearchArgs,
    },
    /// Generators of the automorphism group of G.
    Aut {
        g: PathBuf,
        /// Also report the order of the generated group (capped closure).
        #[arg(long)]
        order: bool,
        #[arg(long, default_value_t = 1_000_000)]
        order_cap: usize,
        #[arg(long, value_enum, default_value = "exact")]
        mode: ModeArg,
        #[arg(long, default_value_t = DEFAULT_CAP)]
        cap: usize,
    },
    /// Dump the triangle-block arrangement of G.
    Rearrange {
        g: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed_vertex: usize,
        /// Use a shuffled tie-break order with this seed.
        #[arg(long)]
        shuffle_seed: Option<u64>,
    },
    /// Summarize the candidate set for one block of G's arrangement over H.
    Beta {
        g: PathBuf,
        h: PathBuf,
        #[arg(long, default_value_t = 1)]
        k: usize,
        /// List every candidate map.
        #[arg(long)]
        full: bool,
    },
    /// Brute-force isomorphism (two graphs) or automorphism count (one graph).
    Oracle {
        g: PathBuf,
        h: Option<PathBuf>,
        /// Count every isomorphism instead of stopping at the first.
        #[arg(long)]
        all: bool,
    },
    /// Random differential campaign against the oracle.
    Fuzz {
        #[arg(long, default_value_t = 9)]
        n: usize,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[arg(long, env = "TRIBLOCK_SEED", default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value = "exact")]
        mode: ModeArg,
        /// Fixed cross-edge density; omitted means a mix of densities.
        #[arg(long)]
        edge_prob: Option<f64>,
        #[arg(long, default_value_t = 0.5)]
        iso_fraction: f64,
        /// Skip the oracle (needed above 12 vertices).
        #[arg(long)]
        no_oracle: bool,
        #[arg(long, default_value_t = DEFAULT_CAP)]
        cap: usize,
        #[arg(long, default_value_t = DEFAULT_RETRY_BUDGET)]
        retry_budget: usize,
    },
}

#[derive(Debug, Default, Clone, PartialEq, Eq)]
pub struct CmdOutput {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

impl CmdOutput {
    fn ok(code: i32, stdout: String) -> Self {
        CmdOutput {
            code,
            stdout,
            stderr: String::new(),
        }
    }

    fn input_error(message: impl Into<String>) -> Self {
        CmdOutput {
            code: EXIT_INPUT,
            stdout: String::new(),
            stderr: message.into() + "\n",
        }
    }
}

pub fn read_graph(path: &Path) -> Result<Graph, String> {
    let bytes = std::fs::read(path).map_err(|e| format!("{}: {e}", path.display()))?;
    parse_edge_list(&bytes).map_err(|e| format!("{}: {e}", path.display()))
}

fn to_json<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("serializable") + "\n"
}

fn verdict_code(v: &Verdict) -> i32 {
    match v.kind {
        VerdictKind::IsomorphicWitness { .. } => EXIT_WITNESS,
        VerdictKind::NoWitnessFound => EXIT_NO_WITNESS,
        VerdictKind::Infeasible { .. } => EXIT_INFEASIBLE,
    }
}

fn verdict_text(v: &Verdict) -> String {
    let mut out = format!("mode: {}\nverdict: {}\n", v.diagnostics.mode, v.kind_name());
    match &v.kind {
        VerdictKind::IsomorphicWitness { witness } => {
            out += &format!("witness (H -> G): {:?}\n", witness.images());
        }
        VerdictKind::Infeasible { infeasible } => out += &format!("infeasible: {infeasible}\n"),
        VerdictKind::NoWitnessFound => {}
    }
    if !v.reasons.is_empty() {
        let names: Vec<String> = v
            .reasons
            .iter()
            .map(|r| serde_json::to_value(r).unwrap().as_str().unwrap().to_string())
            .collect();
        out += &format!("reasons: {}\n", names.join(", "));
    }
    let d = &v.diagnostics;
    out += &format!(
        "beta sizes: {:?}\ngamma sizes: {:?}\nalpha sizes: {:?}\n",
        d.beta_sizes, d.gamma_sizes, d.alpha_sizes
    );
    if !d.gen_sizes.is_empty() {
        out += &format!("generator sizes: {:?}\n", d.gen_sizes);
    }
    out += &format!("arrangements tried: {}\n", d.budget_used);
    out
}

pub fn run(cli: Cli) -> CmdOutput {
    let json = cli.json;
    let result = match cli.command {
        Command::Check { g, h, search } => cmd_check(&g, &h, &search, json),
        Command::Aut {
            g,
            order,
            order_cap,
            mode,
            cap,
        } => cmd_aut(&g, order, order_cap, mode, cap, json),
        Command::Rearrange {
            g,
            seed_vertex,
            shuffle_seed,
        } => cmd_rearrange(&g, seed_vertex, shuffle_seed, json),
        Command::Beta { g, h, k, full } => cmd_beta(&g, &h, k, full, json),
        Command::Oracle { g, h, all } => cmd_oracle(&g, h.as_deref(), all, json),
        Command::Fuzz {
            n,
            trials,
            seed,
            mode,
            edge_prob,
            iso_fraction,
            no_oracle,
            cap,
            retry_budget,
        } => {
            let config = FuzzConfig {
                mode: match mode {
                    ModeArg::Exact => FuzzMode::Exact,
                    ModeArg::Compressed => FuzzMode::Compressed,
                    ModeArg::Both => FuzzMode::Both,
                },
                edge_prob,
                iso_fraction,
                oracle: !no_oracle,
                cap,
                retry_budget,
                ..FuzzConfig::new(n, trials, seed)
            };
            cmd_fuzz(&config, json)
        }
    };
    result.unwrap_or_else(CmdOutput::input_error)
}

pub fn cmd_check(g: &Path, h: &Path, search: &SearchArgs, json: bool) -> Result<CmdOutput, String> {
    let g = read_graph(g)?;
    let h = read_graph(h)?;
    let verdicts: Vec<Verdict> = search
        .mode
        .modes()
        .into_iter()
        .map(|m| decide(&g, &h, &search.options(m)))
        .collect();
    let code = verdict_code(&verdicts[0]);
    let stdout = match (json, verdicts.as_slice()) {
        (true, [single]) => to_json(single),
        (true, many) => to_json(&json!({ "schema": 1, "verdicts": many })),
        (false, many) => many.iter().map(verdict_text).collect::<Vec<_>>().join("\n"),
    };
    Ok(CmdOutput::ok(code, stdout))
}

fn arrangement_or_exit(g: &Graph, seed_vertex: usize, policy: TieBreak) -> Result<Result<Arrangement, CmdOutput>, String> {
    match rearrange(g, seed_vertex, policy) {
        Ok(a) => Ok(Ok(a)),
        Err(RearrangeError::Infeasible(inf)) => Ok(Err(CmdOutput {
            code: EXIT_INFEASIBLE,
            stdout: String::new(),
            stderr: format!("infeasible: {inf}\n"),
        })),
        Err(e) => Err(e.to_string()),
    }
}

#[derive(Serialize)]
struct AutReport<'a> {
    schema: u32,
    n: usize,
    mode: Mode,
    generators: &'a [crate::permgroup::Permutation],
    representative: &'a Option<crate::permgroup::Permutation>,
    #[serde(skip_serializing_if = "Option::is_none")]
    order: Option<serde_json::Value>,
}

pub fn cmd_aut(
    g: &Path,
    order: bool,
    order_cap: usize,
    mode: ModeArg,
    cap: usize,
    json: bool,
) -> Result<CmdOutput, String> {
    let g = read_graph(g)?;
    let arrangement = match arrangement_or_exit(&g, 0, TieBreak::LowestId)? {
        Ok(a) => a,
        Err(out) => return Ok(out),
    };
    let mut stdout = String::new();
    for m in mode.modes() {
        let gens: GenSet = match automorphism_generators(&g, &arrangement, m, cap) {
            Ok(s) => s,
            Err(PipelineError::CapExceeded { step, cap, .. }) => {
                return Ok(CmdOutput {
                    code: EXIT_NO_WITNESS,
                    stdout,
                    stderr: format!("candidate cap {cap} exceeded at step {step}\n"),
                })
            }
            Err(e) => return Err(e.to_string()),
        };
        let order_value = order.then(|| match closure(&gens, order_cap).order() {
            Some(o) => json!(o),
            None => json!({ "exceeds": order_cap }),
        });
        if json {
            stdout += &to_json(&AutReport {
                schema: 1,
                n: g.n(),
                mode: m,
                generators: &gens.generators,
                representative: &gens.representative,
                order: order_value,
            });
        } else {
            stdout += &format!("mode: {m}\ngenerators: {}\n", gens.len());
            for p in &gens.generators {
                stdout += &format!("  {}\n", p.to_cycles());
            }
            if let Some(o) = order_value {
                stdout += &format!("order: {o}\n");
            }
        }
    }
    Ok(CmdOutput::ok(EXIT_WITNESS, stdout))
}

pub fn cmd_rearrange(
    g: &Path,
    seed_vertex: usize,
    shuffle_seed: Option<u64>,
    json: bool,
) -> Result<CmdOutput, String> {
    let g = read_graph(g)?;
    let policy = shuffle_seed.map_or(TieBreak::LowestId, TieBreak::Shuffled);
    let a = match arrangement_or_exit(&g, seed_vertex, policy)? {
        Ok(a) => a,
        Err(out) => return Ok(out),
    };
    let stdout = if json {
        to_json(&json!({ "schema": 1, "n": a.n, "x": a.x(), "w": a.w, "blocks": a.blocks }))
    } else {
        let mut s = format!("n = {}, x = {}\nw = {:?}\n", a.n, a.x(), a.w);
        for b in &a.blocks {
            s += &format!("block {}: positions [{}, {}], vertices {:?}\n", b.k, b.i, b.j, b.vertices);
        }
        s
    };
    Ok(CmdOutput::ok(EXIT_WITNESS, stdout))
}

pub fn cmd_beta(g: &Path, h: &Path, k: usize, full: bool, json: bool) -> Result<CmdOutput, String> {
    let g = read_graph(g)?;
    let h = read_graph(h)?;
    if g.n() != h.n() {
        return Err(format!("G has {} vertices but H has {}", g.n(), h.n()));
    }
    let a = match arrangement_or_exit(&g, 0, TieBreak::LowestId)? {
        Ok(a) => a,
        Err(out) => return Ok(out),
    };
    let block = a.block(k).map_err(|e| e.to_string())?;
    let levels = build_search_tree(&h, block).level_sizes();
    let beta = CandidateCache::new(&h).beta(block);
    let stdout = if json {
        let mut v = json!({
            "schema": 1,
            "k": k,
            "i": block.i,
            "j": block.j,
            "tree_levels": levels,
            "count": beta.len(),
        });
        if full {
            v["maps"] = json!(beta.image_triples(block));
        }
        to_json(&v)
    } else {
        let mut s = format!(
            "block {k}: positions [{}, {}]\ntree levels: {levels:?}\ncandidates: {}\n",
            block.i,
            block.j,
            beta.len()
        );
        if full {
            for t in beta.image_triples(block) {
                s += &format!("  {t:?}\n");
            }
        }
        s
    };
    Ok(CmdOutput::ok(EXIT_WITNESS, stdout))
}

pub fn cmd_oracle(g: &Path, h: Option<&Path>, all: bool, json: bool) -> Result<CmdOutput, String> {
    let g = read_graph(g)?;
    let (result, code) = match h {
        Some(h) => {
            let h = read_graph(h)?;
            let r = oracle::brute_force_isomorphism(&g, &h, all).map_err(|e| e.to_string())?;
            let code = if r.is_isomorphic() { EXIT_WITNESS } else { EXIT_NO_WITNESS };
            (r, code)
        }
        None => (
            oracle::brute_force_automorphisms(&g).map_err(|e| e.to_string())?,
            EXIT_WITNESS,
        ),
    };
    let stdout = if json {
        let mut v = serde_json::to_value(&result).expect("serializable");
        v["schema"] = json!(1);
        to_json(&v)
    } else {
        let mut s = match &result.witness {
            Some(p) => format!("isomorphic: witness (H -> G) {:?}\n", p.images()),
            None => "no isomorphism\n".to_string(),
        };
        if let Some(c) = result.count {
            s += &format!("count: {c}\n");
        }
        s += &format!("nodes explored: {}\n", result.nodes_explored);
        s
    };
    let stderr = result.warning.map(|w| w + "\n").unwrap_or_default();
    Ok(CmdOutput { code, stdout, stderr })
}

pub fn cmd_fuzz(config: &FuzzConfig, json: bool) -> Result<CmdOutput, String> {
    let report = run_fuzz(config).map_err(|e| e.to_string())?;
    let stdout = if json {
        to_json(&report)
    } else {
        let mut s = format!(
            "n = {}, trials = {}, seed = {}\n",
            config.n, report.trials, config.seed
        );
        for m in &report.modes {
            s += &format!(
                "[{}] agreements {}, no witness on isomorphic {}, witness on non-isomorphic {}, \
                 infeasible {}, pre-check rejections {}, unverified {}\n",
                m.mode,
                m.agreements,
                m.no_witness_on_isomorphic_count,
                m.witness_on_non_isomorphic,
                m.infeasible_count,
                m.precheck_rejections,
                m.unverified
            );
            s += &format!(
                "[{}] sound witnesses {}, unsound {}, budget-limited {}, completeness {}/{}\n",
                m.mode,
                m.sound_witnesses,
                m.unsound_witnesses,
                m.budget_limited,
                m.isomorphic_found,
                m.isomorphic_searched
            );
        }
        if let Some(f) = &report.compressed_fidelity {
            s += &format!(
                "compressed vs exact: {} of {} verdict kinds agree, {} disagreements archived\n",
                f.same_kind, f.compared, f.disagreements
            );
        }
        s
    };
    Ok(CmdOutput::ok(0, stdout))
}
