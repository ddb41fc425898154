//! Randomized differential testing of [`decide`] against the oracle.
//!
//! Each trial plants `⌊n/3⌋` disjoint triangles on a shuffled vertex order,
//! adds every other pair as an edge with probability `edge_prob`, and
//! derives `H` by a random relabelling (planted isomorphic) or by moving one
//! edge and then relabelling (usually non-isomorphic). Per-trial seeds come
//! from the master seed, so trials are independent and a report is a pure
//! function of its configuration.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{Graph, GraphError};
use crate::oracle::{self, OracleError};
use crate::permgroup::Permutation;
use crate::pipeline::{decide, verify_witness, Mode, Options, Verdict, DEFAULT_CAP, DEFAULT_RETRY_BUDGET};

/// Edge densities cycled through when no fixed density is given.
pub const MIXED_DENSITIES: [f64; 6] = [0.0, 0.1, 0.2, 0.35, 0.5, 0.7];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FuzzMode {
    Exact,
    Compressed,
    Both,
}

impl FuzzMode {
    fn modes(self) -> Vec<Mode> {
        match self {
            FuzzMode::Exact => vec![Mode::Exact],
            FuzzMode::Compressed => vec![Mode::Compressed],
            FuzzMode::Both => vec![Mode::Exact, Mode::Compressed],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FuzzConfig {
    pub n: usize,
    pub trials: usize,
    pub seed: u64,
    pub mode: FuzzMode,
    /// Fixed cross-edge density; `None` cycles through [`MIXED_DENSITIES`].
    pub edge_prob: Option<f64>,
    /// Probability that a trial's `H` is a pure relabelling of `G`.
    pub iso_fraction: f64,
    pub oracle: bool,
    pub cap: usize,
    pub retry_budget: usize,
}

impl FuzzConfig {
    pub fn new(n: usize, trials: usize, seed: u64) -> Self {
        FuzzConfig {
            n,
            trials,
            seed,
            mode: FuzzMode::Exact,
            edge_prob: None,
            iso_fraction: 0.5,
            oracle: n <= oracle::RECOMMENDED_LIMIT,
            cap: DEFAULT_CAP,
            retry_budget: DEFAULT_RETRY_BUDGET,
        }
    }
}

#[derive(Debug, Error)]
pub enum FuzzError {
    #[error("oracle comparison needs n <= {limit}, got {n}", limit = oracle::RECOMMENDED_LIMIT)]
    OracleTooLarge { n: usize },
    #[error("edge probability {0} outside [0, 1]")]
    BadProbability(f64),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// SplitMix64 finalizer.
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of trial `index` under `master`.
pub fn trial_seed(master: u64, index: usize) -> u64 {
    splitmix64(master ^ splitmix64(index as u64))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trial {
    pub index: usize,
    pub seed: u64,
    pub edge_prob: f64,
    pub planted_isomorphic: bool,
    pub g: Graph,
    pub h: Graph,
}

/// A graph on `n` vertices containing `⌊n/3⌋` disjoint planted triangles,
/// every other pair joined with probability `edge_prob`.
pub fn planted_triangle_graph<R: Rng>(n: usize, edge_prob: f64, rng: &mut R) -> Graph {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let mut group = vec![usize::MAX; n];
    for (i, &v) in order.iter().enumerate().take(n / 3 * 3) {
        group[v] = i / 3;
    }
    Graph::from_fn(n, |u, v| {
        let planted = group[u] != usize::MAX && group[u] == group[v];
        planted || rng.gen_bool(edge_prob)
    })
}

fn random_permutation<R: Rng>(n: usize, rng: &mut R) -> Permutation {
    let mut images: Vec<usize> = (0..n).collect();
    images.shuffle(rng);
    Permutation::from_images(images).expect("shuffle is a bijection")
}

/// Moves one edge to a random non-edge (or adds/removes one edge when the
/// graph is empty/complete).
fn perturb<R: Rng>(g: &Graph, rng: &mut R) -> Graph {
    let n = g.n();
    let mut edges = g.edges();
    let non_edges: Vec<(usize, usize)> = (0..n)
        .flat_map(|u| (u + 1..n).map(move |v| (u, v)))
        .filter(|&(u, v)| !g.has_edge(u, v))
        .collect();
    if !edges.is_empty() {
        let i = rng.gen_range(0..edges.len());
        edges.swap_remove(i);
    }
    if !non_edges.is_empty() {
        edges.push(non_edges[rng.gen_range(0..non_edges.len())]);
    }
    Graph::from_edges(n, &edges).expect("edges stay simple")
}

pub fn generate_trial(config: &FuzzConfig, index: usize) -> Trial {
    let seed = trial_seed(config.seed, index);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let edge_prob = config
        .edge_prob
        .unwrap_or(MIXED_DENSITIES[index % MIXED_DENSITIES.len()]);
    let g = planted_triangle_graph(config.n, edge_prob, &mut rng);
    let planted_isomorphic = rng.gen_bool(config.iso_fraction);
    let base = if planted_isomorphic {
        g.clone()
    } else {
        perturb(&g, &mut rng)
    };
    let h = base
        .apply_permutation(&random_permutation(config.n, &mut rng))
        .expect("sizes match");
    Trial {
        index,
        seed,
        edge_prob,
        planted_isomorphic,
        g,
        h,
    }
}

/// Everything needed to rerun one trial and compare against what was seen.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial: usize,
    pub trial_seed: u64,
    pub n: usize,
    pub edge_prob: f64,
    pub planted_isomorphic: bool,
    pub oracle_isomorphic: Option<bool>,
    pub g: Vec<(usize, usize)>,
    pub h: Vec<(usize, usize)>,
    pub runs: Vec<RecordedRun>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecordedRun {
    pub options: Options,
    pub verdict: Verdict,
}

impl TrialRecord {
    /// Reruns every recorded verdict and checks the graphs are reproduced by
    /// the trial seed. True when everything matches.
    pub fn replay(&self, config: &FuzzConfig) -> Result<bool, FuzzError> {
        let g = Graph::from_edges(self.n, &self.g)?;
        let h = Graph::from_edges(self.n, &self.h)?;
        let regenerated = generate_trial(config, self.trial);
        if regenerated.g != g || regenerated.h != h || regenerated.seed != self.trial_seed {
            return Ok(false);
        }
        Ok(self
            .runs
            .iter()
            .all(|run| decide(&g, &h, &run.options) == run.verdict))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Category {
    Agreement,
    NoWitnessOnIsomorphic,
    WitnessOnNonIsomorphic,
    Infeasible,
    PrecheckRejection,
    /// No witness, and the truth is unknown (oracle disabled).
    Unverified,
}

/// Per-mode tallies. The six category counters partition the trials.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeSummary {
    pub mode: Mode,
    pub agreements: usize,
    pub no_witness_on_isomorphic_count: usize,
    pub witness_on_non_isomorphic: usize,
    pub infeasible_count: usize,
    pub precheck_rejections: usize,
    pub unverified: usize,
    /// Witnesses that passed the harness's own `H^P = G` check.
    pub sound_witnesses: usize,
    pub unsound_witnesses: usize,
    /// Pre-check rejections the oracle contradicts (must stay zero).
    pub precheck_oracle_disagreements: usize,
    pub budget_limited: usize,
    /// Known-isomorphic pairs that reached the search.
    pub isomorphic_searched: usize,
    pub isomorphic_found: usize,
    pub completeness_rate: Option<f64>,
    pub no_witness_on_isomorphic: Vec<TrialRecord>,
}

impl ModeSummary {
    fn new(mode: Mode) -> Self {
        ModeSummary {
            mode,
            agreements: 0,
            no_witness_on_isomorphic_count: 0,
            witness_on_non_isomorphic: 0,
            infeasible_count: 0,
            precheck_rejections: 0,
            unverified: 0,
            sound_witnesses: 0,
            unsound_witnesses: 0,
            precheck_oracle_disagreements: 0,
            budget_limited: 0,
            isomorphic_searched: 0,
            isomorphic_found: 0,
            completeness_rate: None,
            no_witness_on_isomorphic: Vec::new(),
        }
    }

    pub fn category_total(&self) -> usize {
        self.agreements
            + self.no_witness_on_isomorphic_count
            + self.witness_on_non_isomorphic
            + self.infeasible_count
            + self.precheck_rejections
            + self.unverified
    }
}

/// How often compressed mode reaches the same verdict kind as exact mode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Fidelity {
    pub compared: usize,
    pub same_kind: usize,
    pub disagreements: usize,
    pub rate: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FuzzReport {
    pub schema: u32,
    pub config: FuzzConfig,
    pub trials: usize,
    /// First and last per-trial seed.
    pub seeds: Option<(u64, u64)>,
    pub modes: Vec<ModeSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub compressed_fidelity: Option<Fidelity>,
    pub mode_disagreements: Vec<TrialRecord>,
}

impl FuzzReport {
    pub fn mode(&self, mode: Mode) -> Option<&ModeSummary> {
        self.modes.iter().find(|m| m.mode == mode)
    }
}

/// Everything observed for one trial.
#[derive(Debug, Clone)]
pub struct TrialOutcome {
    pub trial: Trial,
    pub oracle_isomorphic: Option<bool>,
    pub runs: Vec<(Options, Verdict, Category, bool)>,
}

impl TrialOutcome {
    fn record(&self, runs: impl Iterator<Item = (Options, Verdict)>) -> TrialRecord {
        let t = &self.trial;
        TrialRecord {
            trial: t.index,
            trial_seed: t.seed,
            n: t.g.n(),
            edge_prob: t.edge_prob,
            planted_isomorphic: t.planted_isomorphic,
            oracle_isomorphic: self.oracle_isomorphic,
            g: t.g.edges(),
            h: t.h.edges(),
            runs: runs
                .map(|(options, verdict)| RecordedRun { options, verdict })
                .collect(),
        }
    }
}

fn categorize(verdict: &Verdict, truth: Option<bool>) -> Category {
    if verdict.is_infeasible() {
        Category::Infeasible
    } else if verdict.is_precheck_rejection() {
        Category::PrecheckRejection
    } else {
        match (verdict.is_witness(), truth) {
            (true, Some(false)) => Category::WitnessOnNonIsomorphic,
            (true, _) => Category::Agreement,
            (false, Some(true)) => Category::NoWitnessOnIsomorphic,
            (false, Some(false)) => Category::Agreement,
            (false, None) => Category::Unverified,
        }
    }
}

pub fn options_for(config: &FuzzConfig, mode: Mode, trial_seed: u64) -> Options {
    Options {
        mode,
        cap: config.cap,
        retry_budget: config.retry_budget,
        seed: trial_seed,
        seed_vertex: 0,
        timeout_ms: None,
    }
}

pub fn run_trial(config: &FuzzConfig, index: usize) -> Result<TrialOutcome, FuzzError> {
    let trial = generate_trial(config, index);
    let oracle_isomorphic = if config.oracle {
        Some(oracle::brute_force_isomorphism(&trial.g, &trial.h, false)?.is_isomorphic())
    } else if trial.planted_isomorphic {
        Some(true)
    } else {
        None
    };
    let runs = config
        .mode
        .modes()
        .into_iter()
        .map(|mode| {
            let options = options_for(config, mode, trial.seed);
            let verdict = decide(&trial.g, &trial.h, &options);
            let category = categorize(&verdict, oracle_isomorphic);
            let sound = verdict
                .witness()
                .is_none_or(|p| trial.h.apply_permutation(p).is_ok_and(|hp| hp == trial.g));
            (options, verdict, category, sound)
        })
        .collect();
    Ok(TrialOutcome {
        trial,
        oracle_isomorphic,
        runs,
    })
}

/// Runs all trials (in parallel) and folds them into a report in trial order.
pub fn run_fuzz(config: &FuzzConfig) -> Result<FuzzReport, FuzzError> {
    if config.oracle && config.n > oracle::RECOMMENDED_LIMIT {
        return Err(FuzzError::OracleTooLarge { n: config.n });
    }
    if let Some(p) = config.edge_prob {
        if !(0.0..=1.0).contains(&p) {
            return Err(FuzzError::BadProbability(p));
        }
    }
    if !(0.0..=1.0).contains(&config.iso_fraction) {
        return Err(FuzzError::BadProbability(config.iso_fraction));
    }
    let outcomes: Vec<TrialOutcome> = (0..config.trials)
        .into_par_iter()
        .map(|i| run_trial(config, i))
        .collect::<Result<_, _>>()?;
    Ok(summarize(config, &outcomes))
}

pub fn summarize(config: &FuzzConfig, outcomes: &[TrialOutcome]) -> FuzzReport {
    let modes = config.mode.modes();
    let mut summaries: Vec<ModeSummary> = modes.iter().map(|&m| ModeSummary::new(m)).collect();
    let mut disagreements = Vec::new();
    let mut fidelity = Fidelity {
        compared: 0,
        same_kind: 0,
        disagreements: 0,
        rate: None,
    };

    for outcome in outcomes {
        for (summary, (options, verdict, category, sound)) in summaries.iter_mut().zip(&outcome.runs) {
            match category {
                Category::Agreement => summary.agreements += 1,
                Category::NoWitnessOnIsomorphic => {
                    summary.no_witness_on_isomorphic_count += 1;
                    summary
                        .no_witness_on_isomorphic
                        .push(outcome.record(std::iter::once((options.clone(), verdict.clone()))));
                }
                Category::WitnessOnNonIsomorphic => summary.witness_on_non_isomorphic += 1,
                Category::Infeasible => summary.infeasible_count += 1,
                Category::PrecheckRejection => {
                    summary.precheck_rejections += 1;
                    if outcome.oracle_isomorphic == Some(true) {
                        summary.precheck_oracle_disagreements += 1;
                    }
                }
                Category::Unverified => summary.unverified += 1,
            }
            if verdict.is_witness() {
                if *sound && verify_witness(&outcome.trial.g, &outcome.trial.h, verdict.witness().unwrap()) {
                    summary.sound_witnesses += 1;
                } else {
                    summary.unsound_witnesses += 1;
                }
            }
            if verdict.diagnostics.budget_limited {
                summary.budget_limited += 1;
            }
            let searched = !verdict.is_infeasible() && !verdict.is_precheck_rejection();
            if searched && outcome.oracle_isomorphic == Some(true) {
                summary.isomorphic_searched += 1;
                if verdict.is_witness() {
                    summary.isomorphic_found += 1;
                }
            }
        }
        if let [(_, exact, ..), (_, compressed, ..)] = outcome.runs.as_slice() {
            fidelity.compared += 1;
            if exact.kind_name() == compressed.kind_name() {
                fidelity.same_kind += 1;
            } else {
                fidelity.disagreements += 1;
                disagreements.push(
                    outcome.record(outcome.runs.iter().map(|(o, v, ..)| (o.clone(), v.clone()))),
                );
            }
        }
    }
    for s in &mut summaries {
        s.completeness_rate = ratio(s.isomorphic_found, s.isomorphic_searched);
    }
    fidelity.rate = ratio(fidelity.same_kind, fidelity.compared);

    FuzzReport {
        schema: 1,
        config: config.clone(),
        trials: outcomes.len(),
        seeds: (!outcomes.is_empty()).then(|| {
            (
                outcomes[0].trial.seed,
                outcomes[outcomes.len() - 1].trial.seed,
            )
        }),
        modes: summaries,
        compressed_fidelity: (config.mode == FuzzMode::Both).then_some(fidelity),
        mode_disagreements: disagreements,
    }
}

fn ratio(num: usize, den: usize) -> Option<f64> {
    (den > 0).then(|| num as f64 / den as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::triangle_partition_exists;

    #[test]
    fn generated_graphs_are_tiled() {
        let config = FuzzConfig::new(9, 20, 3);
        for i in 0..20 {
            let t = generate_trial(&config, i);
            assert!(triangle_partition_exists(&t.g));
            if t.planted_isomorphic {
                assert!(oracle::brute_force_isomorphism(&t.g, &t.h, false).unwrap().is_isomorphic());
            }
        }
    }

    #[test]
    fn generation_is_deterministic() {
        let config = FuzzConfig::new(12, 5, 99);
        for i in 0..5 {
            assert_eq!(generate_trial(&config, i), generate_trial(&config, i));
        }
        assert_ne!(trial_seed(1, 0), trial_seed(1, 1));
        assert_ne!(trial_seed(1, 0), trial_seed(2, 0));
    }

    #[test]
    fn zero_trials() {
        let report = run_fuzz(&FuzzConfig::new(6, 0, 1)).unwrap();
        assert_eq!(report.trials, 0);
        assert_eq!(report.seeds, None);
        let m = &report.modes[0];
        assert_eq!(m.category_total(), 0);
        assert_eq!(m.sound_witnesses, 0);
        assert!(m.no_witness_on_isomorphic.is_empty());
    }

    #[test]
    fn small_campaign_partitions_trials() {
        let mut config = FuzzConfig::new(6, 100, 1);
        config.mode = FuzzMode::Both;
        let report = run_fuzz(&config).unwrap();
        for m in &report.modes {
            assert_eq!(m.category_total(), 100);
            assert_eq!(m.unsound_witnesses, 0);
            assert_eq!(m.witness_on_non_isomorphic, 0);
            assert_eq!(m.precheck_oracle_disagreements, 0);
        }
        let exact = report.mode(Mode::Exact).unwrap();
        assert_eq!(exact.completeness_rate, Some(1.0));
        let f = report.compressed_fidelity.as_ref().unwrap();
        assert_eq!(f.compared, 100);
        assert_eq!(f.disagreements, report.mode_disagreements.len());
    }

    #[test]
    fn oracle_size_guard() {
        let config = FuzzConfig {
            oracle: true,
            ..FuzzConfig::new(15, 1, 0)
        };
        assert!(matches!(run_fuzz(&config), Err(FuzzError::OracleTooLarge { n: 15 })));
        let config = FuzzConfig {
            edge_prob: Some(0.3),
            ..FuzzConfig::new(15, 2, 0)
        };
        assert!(!config.oracle);
        let report = run_fuzz(&config).unwrap();
        assert_eq!(report.modes[0].category_total(), 2);
    }
}
