//! Acyclic subgraph problems built on the ball relaxation.
//!
//! * max-MAS: the smallest uniform budget `r*` such that some subgraph cutting
//!   at most `r*` incoming edges per vertex is acyclic, found by integer
//!   bisection over `r` with one relaxation per probe.
//! * Per-vertex budgets: a single relaxation answers feasibility.
//! * Weighted edges: real bisection over a per-vertex weight cap.
//! * Protected edges: max-MAS over the edges not marked untouchable.
//! * Approximate MAS: orders the vertices topologically along an acyclic
//!   witness and keeps every edge of `A` that points forward.

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use crate::error::{GreedyError, SolverError};
use crate::graphmat::{BoolMatrix, IndexSet, WeightedMatrix};
use crate::greedy::{min_rho_from, min_rho_over_ball, BudgetSpec, GreedyConfig, WeightKey};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolveConfig {
    pub greedy: GreedyConfig,
    /// Start each bisection probe from the last feasible witness (rows that
    /// exceed the probed budget fall back to `A`) instead of from `A`.
    pub warm_start: bool,
    /// Weighted bisection stops once the bracket is narrower than this
    /// fraction of the largest row weight.
    pub weighted_gap: f64,
    pub weight_key: WeightKey,
}

impl Default for SolveConfig {
    fn default() -> Self {
        SolveConfig {
            greedy: GreedyConfig::default(),
            warm_start: true,
            weighted_gap: 1e-6,
            weight_key: WeightKey::Product,
        }
    }
}

/// One bisection probe.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Probe {
    pub budget: f64,
    pub rho: f64,
    pub feasible: bool,
    pub eig_count: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MaxMasSolution {
    pub r_star: usize,
    /// Acyclic subgraph of `A` cutting at most `r_star` edges per vertex.
    pub witness: BoolMatrix,
    pub per_vertex_cuts: Vec<usize>,
    pub eig_count: usize,
    pub probes: Vec<Probe>,
}

impl MaxMasSolution {
    /// Smallest `rho` reached at an infeasible probe, i.e. at a budget below
    /// `r_star`.
    pub fn best_infeasible_rho(&self) -> Option<f64> {
        self.probes
            .iter()
            .filter(|p| !p.feasible)
            .map(|p| p.rho)
            .min_by(f64::total_cmp)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BudgetOutcome {
    pub feasible: bool,
    pub rho: f64,
    /// Minimizer of `rho` over the ball; acyclic exactly when `feasible`.
    pub x_hat: BoolMatrix,
    pub per_vertex_cuts: Vec<usize>,
    pub eig_count: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct WeightedSolution {
    /// Certified-feasible weight cap: the largest per-vertex cut weight of
    /// `witness`.
    pub budget: f64,
    pub witness: BoolMatrix,
    pub per_vertex_cut_weight: Vec<f64>,
    pub eig_count: usize,
    pub probes: Vec<Probe>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum ProtectedOutcome {
    Solved(MaxMasSolution),
    /// The protected edges alone contain a cycle.
    ProtectedCycle,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MasApproximation {
    /// Vertices sources first; every kept edge points forward in it.
    pub ordering: Vec<usize>,
    pub g_bar: BoolMatrix,
    /// `|E(g_bar)| / |E(A)|`, or 1 for an edgeless `A`.
    pub gamma: f64,
}

/// Smallest uniform budget admitting an acyclic subgraph.
pub fn solve_max_mas(a: &BoolMatrix, cfg: &SolveConfig) -> Result<MaxMasSolution, SolverError> {
    bisect_counts(a, None, cfg)
}

/// Per-vertex budgets: decides whether some subgraph with at most
/// `budgets[i]` cuts at vertex `i` is acyclic.
pub fn solve_with_budgets(
    a: &BoolMatrix,
    budgets: &[usize],
    cfg: &SolveConfig,
) -> Result<BudgetOutcome, SolverError> {
    solve_with_spec(a, &BudgetSpec::per_vertex(budgets.to_vec()), cfg)
}

/// [`solve_with_budgets`] for any budget specification, including weights
/// and protected edges.
pub fn solve_with_spec(
    a: &BoolMatrix,
    spec: &BudgetSpec,
    cfg: &SolveConfig,
) -> Result<BudgetOutcome, SolverError> {
    let res = min_rho_over_ball(a, spec, &cfg.greedy)?;
    Ok(BudgetOutcome {
        feasible: res.x_hat.is_acyclic(),
        rho: res.rho,
        per_vertex_cuts: cuts(a, &res.x_hat),
        x_hat: res.x_hat,
        eig_count: res.eig_count,
    })
}

/// Smallest per-vertex weight cap admitting an acyclic subgraph, up to
/// `cfg.weighted_gap`. Minimal rows are chosen greedily, so the returned
/// cap is feasible but not guaranteed minimal.
pub fn solve_weighted(w: &WeightedMatrix, cfg: &SolveConfig) -> Result<WeightedSolution, SolverError> {
    let a = w.pattern();
    let n = a.n();
    let total = w.max_row_total();
    let mut probes = Vec::new();
    let mut eig_count = 0;
    let mut probe = |cap: f64| -> Result<Option<BoolMatrix>, GreedyError> {
        let spec = BudgetSpec::weighted(w.clone(), vec![cap; n], cfg.weight_key);
        let res = min_rho_over_ball(&a, &spec, &cfg.greedy)?;
        let feasible = res.x_hat.is_acyclic();
        eig_count += res.eig_count;
        probes.push(Probe {
            budget: cap,
            rho: res.rho,
            feasible,
            eig_count: res.eig_count,
        });
        Ok(feasible.then_some(res.x_hat))
    };

    let mut witness = probe(0.0)?;
    if witness.is_none() {
        let gap = cfg.weighted_gap * total;
        let (mut lo, mut hi) = (0.0_f64, total);
        while hi - lo > gap {
            let mid = 0.5 * (lo + hi);
            match probe(mid)? {
                Some(x) => {
                    hi = max_cut_weight(w, &x);
                    witness = Some(x);
                }
                None => lo = mid,
            }
        }
        if witness.is_none() {
            witness = probe(total)?;
        }
    }
    let witness =
        witness.ok_or(SolverError::Precondition("cutting every edge must be feasible"))?;
    let per_vertex_cut_weight = cut_weights(w, &witness);
    Ok(WeightedSolution {
        budget: per_vertex_cut_weight.iter().copied().fold(0.0, f64::max),
        witness,
        per_vertex_cut_weight,
        eig_count,
        probes,
    })
}

/// max-MAS where the edges in `protected[i]` (sources of protected edges into
/// `i`) may never be cut.
pub fn solve_protected(
    a: &BoolMatrix,
    protected: &[IndexSet],
    cfg: &SolveConfig,
) -> Result<ProtectedOutcome, SolverError> {
    BudgetSpec::uniform(a.n(), 0)
        .with_untouchable(protected.to_vec())
        .validate(a)?;
    let kept = BoolMatrix::from_rows(protected.iter().map(|s| s.as_slice().to_vec()).collect())?;
    if !kept.is_acyclic() {
        return Ok(ProtectedOutcome::ProtectedCycle);
    }
    bisect_counts(a, Some(protected), cfg).map(ProtectedOutcome::Solved)
}

fn bisect_counts(
    a: &BoolMatrix,
    protected: Option<&[IndexSet]>,
    cfg: &SolveConfig,
) -> Result<MaxMasSolution, SolverError> {
    let n = a.n();
    let spec = |r: usize| {
        let s = BudgetSpec::uniform(n, r);
        match protected {
            Some(p) => s.with_untouchable(p.to_vec()),
            None => s,
        }
    };
    let cuttable =
        |i: usize| a.in_degree(i) - protected.map_or(0, |p| p[i].len());
    let mut lo = 0;
    let mut hi = (0..n).map(cuttable).max().unwrap_or(0);
    let mut witness: Option<BoolMatrix> = None;
    let mut probes = Vec::new();
    let mut eig_count = 0;

    let mut probe = |r: usize, witness: &Option<BoolMatrix>| -> Result<_, SolverError> {
        let start = match witness {
            Some(w) if cfg.warm_start => warm_start(a, w, r),
            _ => a.clone(),
        };
        let res = min_rho_from(a, &spec(r), start, &cfg.greedy)?;
        let feasible = res.x_hat.is_acyclic();
        eig_count += res.eig_count;
        probes.push(Probe {
            budget: r as f64,
            rho: res.rho,
            feasible,
            eig_count: res.eig_count,
        });
        Ok(feasible.then_some(res.x_hat))
    };

    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        match probe(mid, &witness)? {
            Some(x) => {
                hi = mid;
                witness = Some(x);
            }
            None => lo = mid + 1,
        }
    }
    if witness.is_none() {
        witness = probe(hi, &None)?;
    }
    let witness = witness.ok_or(SolverError::Greedy(GreedyError::InvariantBreach(
        "cutting every unprotected edge left a cycle",
    )))?;
    Ok(MaxMasSolution {
        r_star: hi,
        per_vertex_cuts: cuts(a, &witness),
        witness,
        eig_count,
        probes,
    })
}

/// Keeps the rows of `witness` that cut at most `r` entries and resets the
/// others to `A`.
fn warm_start(a: &BoolMatrix, witness: &BoolMatrix, r: usize) -> BoolMatrix {
    let rows = (0..a.n())
        .map(|i| {
            if a.in_degree(i) - witness.in_degree(i) <= r {
                witness.row(i).to_vec()
            } else {
                a.row(i).to_vec()
            }
        })
        .collect();
    BoolMatrix::from_rows(rows).expect("rows of valid matrices")
}

fn cuts(a: &BoolMatrix, x: &BoolMatrix) -> Vec<usize> {
    (0..a.n()).map(|i| a.in_degree(i) - x.in_degree(i)).collect()
}

fn cut_weights(w: &WeightedMatrix, x: &BoolMatrix) -> Vec<f64> {
    (0..w.n())
        .map(|i| {
            w.row(i)
                .iter()
                .filter(|(j, _)| !x.get(i, *j))
                .map(|&(_, wt)| wt)
                .sum()
        })
        .collect()
}

fn max_cut_weight(w: &WeightedMatrix, x: &BoolMatrix) -> f64 {
    cut_weights(w, x).into_iter().fold(0.0, f64::max)
}

/// Extends an acyclic `g0 ⊆ A` to a larger acyclic subgraph: every edge of
/// `A` that goes forward in a topological order of `g0` is kept. Self-loops
/// are dropped.
pub fn approx_mas(a: &BoolMatrix, g0: &BoolMatrix) -> Result<MasApproximation, SolverError> {
    if g0.n() != a.n() {
        return Err(SolverError::Precondition("witness and graph differ in size"));
    }
    if !g0.is_subgraph_of(a) {
        return Err(SolverError::Precondition("witness is not a subgraph of A"));
    }
    if !g0.is_acyclic() {
        return Err(SolverError::Precondition("witness is not acyclic"));
    }
    // sinks-first order of an acyclic graph is a reversed topological order
    let mut ordering = g0.frobenius_factorize().order().to_vec();
    ordering.reverse();
    Ok(split_by_order(a, &ordering))
}

/// [`approx_mas`] that additionally checks the result against per-vertex
/// budgets and protected edges.
pub fn approx_mas_constrained(
    a: &BoolMatrix,
    g0: &BoolMatrix,
    budgets: &BudgetSpec,
) -> Result<MasApproximation, SolverError> {
    budgets.validate(a)?;
    if !budgets.contains(a, g0) {
        return Err(SolverError::Precondition("witness violates the budgets"));
    }
    let approx = approx_mas(a, g0)?;
    if !budgets.contains(a, &approx.g_bar) {
        return Err(SolverError::Precondition("extension violates the budgets"));
    }
    Ok(approx)
}

/// Keeps the edges of `A` that go forward in `ordering` (sources first).
pub fn split_by_order(a: &BoolMatrix, ordering: &[usize]) -> MasApproximation {
    let n = a.n();
    let mut position = vec![0; n];
    for (p, &v) in ordering.iter().enumerate() {
        position[v] = p;
    }
    let rows = (0..n)
        .map(|i| {
            a.row(i)
                .iter()
                .copied()
                .filter(|&j| position[j] < position[i])
                .collect()
        })
        .collect();
    let g_bar = BoolMatrix::from_rows(rows).expect("subset of valid rows");
    MasApproximation {
        gamma: gamma(a, &g_bar),
        ordering: ordering.to_vec(),
        g_bar,
    }
}

/// Random vertex permutation; keeps whichever of the forward or backward
/// edge sets is larger. Self-loops never count.
pub fn baseline_random_permutation<R: Rng + ?Sized>(a: &BoolMatrix, rng: &mut R) -> MasApproximation {
    let n = a.n();
    let mut ordering: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        let j = rng.random_range(0..=i);
        ordering.swap(i, j);
    }
    let forward = split_by_order(a, &ordering);
    ordering.reverse();
    let backward = split_by_order(a, &ordering);
    if backward.g_bar.edge_count() > forward.g_bar.edge_count() {
        backward
    } else {
        forward
    }
}

pub fn gamma(a: &BoolMatrix, g: &BoolMatrix) -> f64 {
    match a.edge_count() {
        0 => 1.0,
        m => g.edge_count() as f64 / m as f64,
    }
}
