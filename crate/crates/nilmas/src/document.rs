//! Result documents: the JSON record every solving subcommand writes, a
//! one-row CSV summary of it, and the checks run when one is loaded back.

use std::io::Write;

use nilmas_core::solver::{
    BudgetOutcome, MasApproximation, MaxMasSolution, WeightedSolution,
};
use nilmas_core::BoolMatrix;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProblemKind {
    MaxMas,
    WeightedMaxMas,
    ProtectedMaxMas,
    MinRho,
    ApproxMas,
    OracleMas,
    OracleMaxMas,
    OracleMinRho,
}

impl ProblemKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ProblemKind::MaxMas => "max-mas",
            ProblemKind::WeightedMaxMas => "weighted-max-mas",
            ProblemKind::ProtectedMaxMas => "protected-max-mas",
            ProblemKind::MinRho => "min-rho",
            ProblemKind::ApproxMas => "approx-mas",
            ProblemKind::OracleMas => "oracle-mas",
            ProblemKind::OracleMaxMas => "oracle-max-mas",
            ProblemKind::OracleMinRho => "oracle-min-rho",
        }
    }

    /// Whether the output graph must be acyclic regardless of feasibility.
    fn always_acyclic(self) -> bool {
        !matches!(self, ProblemKind::MinRho | ProblemKind::OracleMinRho)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultDocument {
    pub schema_version: u32,
    pub problem: ProblemKind,
    pub n: usize,
    /// Edge count of the input graph.
    pub edges: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r_star: Option<usize>,
    /// Weight cap for weighted problems.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub budget: Option<f64>,
    /// Per-vertex budgets the output was solved under.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub budgets: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub feasible: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho: Option<f64>,
    pub per_vertex_cuts: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eig_count: Option<usize>,
    pub wall_time_ms: f64,
    /// Edges `[u, v]` (meaning `u -> v`) of the output graph.
    pub output_edges: Vec<(usize, usize)>,
    /// Vertex order, sources first, when the output comes with one.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ordering: Option<Vec<usize>>,
    /// Edges that had to be kept.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub protected_edges: Vec<(usize, usize)>,
}

impl ResultDocument {
    fn base(problem: ProblemKind, a: &BoolMatrix, output: &BoolMatrix, wall_time_ms: f64) -> Self {
        ResultDocument {
            schema_version: SCHEMA_VERSION,
            problem,
            n: a.n(),
            edges: a.edge_count(),
            r_star: None,
            budget: None,
            budgets: None,
            feasible: None,
            rho: None,
            per_vertex_cuts: cuts(a, output),
            gamma: None,
            eig_count: None,
            wall_time_ms,
            output_edges: sorted_edges(output),
            ordering: None,
            protected_edges: Vec::new(),
        }
    }

    pub fn max_mas(a: &BoolMatrix, sol: &MaxMasSolution, wall_time_ms: f64) -> Self {
        ResultDocument {
            r_star: Some(sol.r_star),
            feasible: Some(true),
            rho: Some(0.0),
            eig_count: Some(sol.eig_count),
            ..Self::base(ProblemKind::MaxMas, a, &sol.witness, wall_time_ms)
        }
    }

    pub fn weighted(a: &BoolMatrix, sol: &WeightedSolution, wall_time_ms: f64) -> Self {
        ResultDocument {
            budget: Some(sol.budget),
            feasible: Some(true),
            rho: Some(0.0),
            eig_count: Some(sol.eig_count),
            ..Self::base(ProblemKind::WeightedMaxMas, a, &sol.witness, wall_time_ms)
        }
    }

    pub fn min_rho(a: &BoolMatrix, budgets: &[usize], out: &BudgetOutcome, wall_time_ms: f64) -> Self {
        ResultDocument {
            budgets: Some(budgets.to_vec()),
            feasible: Some(out.feasible),
            rho: Some(out.rho),
            eig_count: Some(out.eig_count),
            ..Self::base(ProblemKind::MinRho, a, &out.x_hat, wall_time_ms)
        }
    }

    /// Approximate MAS built from a max-MAS witness.
    pub fn approx(
        a: &BoolMatrix,
        sol: &MaxMasSolution,
        approx: &MasApproximation,
        wall_time_ms: f64,
    ) -> Self {
        ResultDocument {
            r_star: Some(sol.r_star),
            feasible: Some(true),
            rho: Some(0.0),
            gamma: Some(approx.gamma),
            eig_count: Some(sol.eig_count),
            ordering: Some(approx.ordering.clone()),
            ..Self::base(ProblemKind::ApproxMas, a, &approx.g_bar, wall_time_ms)
        }
    }

    pub fn oracle_ordering(
        problem: ProblemKind,
        a: &BoolMatrix,
        ordering: &[usize],
        wall_time_ms: f64,
    ) -> Self {
        let kept = nilmas_core::solver::split_by_order(a, ordering);
        let mut doc = Self::base(problem, a, &kept.g_bar, wall_time_ms);
        doc.feasible = Some(true);
        doc.rho = Some(0.0);
        doc.ordering = Some(ordering.to_vec());
        doc.gamma = Some(kept.gamma);
        if problem == ProblemKind::OracleMaxMas {
            doc.r_star = doc.per_vertex_cuts.iter().copied().max().or(Some(0));
        }
        doc
    }

    pub fn oracle_min_rho(
        a: &BoolMatrix,
        budgets: &[usize],
        rho: f64,
        witness: &BoolMatrix,
        wall_time_ms: f64,
    ) -> Self {
        ResultDocument {
            budgets: Some(budgets.to_vec()),
            feasible: Some(witness.is_acyclic()),
            rho: Some(rho),
            ..Self::base(ProblemKind::OracleMinRho, a, witness, wall_time_ms)
        }
    }

    pub fn with_protected(mut self, protected: &[nilmas_core::IndexSet]) -> Self {
        self.protected_edges = protected
            .iter()
            .enumerate()
            .flat_map(|(v, set)| set.iter().map(move |u| (u, v)))
            .collect();
        self.protected_edges.sort_unstable();
        if self.problem == ProblemKind::MaxMas {
            self.problem = ProblemKind::ProtectedMaxMas;
        }
        self
    }

    pub fn output_graph(&self) -> Result<BoolMatrix, ValidationError> {
        BoolMatrix::from_edges(self.n, self.output_edges.iter().copied())
            .map_err(|e| ValidationError::Graph(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("documents always serialize")
    }

    pub fn from_json(text: &str) -> Result<Self, ValidationError> {
        serde_json::from_str(text).map_err(|e| ValidationError::Json(e.to_string()))
    }

    /// Writes the fixed-column CSV summary (header plus one row).
    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), csv::Error> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(CSV_HEADER)?;
        let opt = |x: Option<String>| x.unwrap_or_default();
        w.write_record([
            self.schema_version.to_string(),
            self.problem.as_str().to_string(),
            self.n.to_string(),
            self.edges.to_string(),
            self.output_edges.len().to_string(),
            opt(self.r_star.map(|r| r.to_string())),
            opt(self.budget.map(|b| b.to_string())),
            opt(self.feasible.map(|f| f.to_string())),
            opt(self.rho.map(|r| r.to_string())),
            opt(self.gamma.map(|g| g.to_string())),
            opt(self.eig_count.map(|e| e.to_string())),
            self.wall_time_ms.to_string(),
            self.per_vertex_cuts.iter().max().copied().unwrap_or(0).to_string(),
        ])?;
        w.flush()?;
        Ok(())
    }
}

pub const CSV_HEADER: [&str; 13] = [
    "schema_version",
    "problem",
    "n",
    "edges",
    "output_edges",
    "r_star",
    "budget",
    "feasible",
    "rho",
    "gamma",
    "eig_count",
    "wall_time_ms",
    "max_cut",
];

fn sorted_edges(m: &BoolMatrix) -> Vec<(usize, usize)> {
    let mut edges: Vec<(usize, usize)> = m.edges().collect();
    edges.sort_unstable();
    edges
}

fn cuts(a: &BoolMatrix, x: &BoolMatrix) -> Vec<usize> {
    (0..a.n()).map(|i| a.in_degree(i) - x.in_degree(i)).collect()
}

#[derive(Debug, Error, PartialEq)]
pub enum ValidationError {
    #[error("malformed document: {0}")]
    Json(String),
    #[error("unsupported schema version {0}")]
    Schema(u32),
    #[error("output graph: {0}")]
    Graph(String),
    #[error("output graph has a cycle")]
    Cyclic,
    #[error("document says feasible but the output graph has a cycle")]
    FeasibleButCyclic,
    #[error("gamma {stored} does not match {recomputed} recomputed from edge counts")]
    Gamma { stored: f64, recomputed: f64 },
    #[error("vertex {vertex} cuts {cuts} edges, over its budget {budget}")]
    OverBudget { vertex: usize, cuts: usize, budget: usize },
    #[error("per-vertex cut vector has length {got}, expected {expected}")]
    CutsLength { expected: usize, got: usize },
    #[error("protected edge {0}->{1} is missing from the output")]
    ProtectedMissing(usize, usize),
    #[error("edge {0}->{1} points backward in the ordering")]
    Backward(usize, usize),
    #[error("ordering is not a permutation of the vertices")]
    Ordering,
    #[error("input graph does not match the document: {0}")]
    InputMismatch(&'static str),
}

/// Re-checks a loaded document. With the input graph at hand, also checks
/// that the output is a subgraph of it and that the cut counts are right.
pub fn validate(doc: &ResultDocument, input: Option<&BoolMatrix>) -> Result<(), ValidationError> {
    if doc.schema_version != SCHEMA_VERSION {
        return Err(ValidationError::Schema(doc.schema_version));
    }
    let out = doc.output_graph()?;
    let acyclic = out.is_acyclic();
    if doc.problem.always_acyclic() && !acyclic {
        return Err(ValidationError::Cyclic);
    }
    if doc.feasible == Some(true) && !acyclic {
        return Err(ValidationError::FeasibleButCyclic);
    }
    if let Some(stored) = doc.gamma {
        let recomputed = match doc.edges {
            0 => 1.0,
            m => doc.output_edges.len() as f64 / m as f64,
        };
        if (stored - recomputed).abs() > 1e-12 {
            return Err(ValidationError::Gamma { stored, recomputed });
        }
    }
    if doc.per_vertex_cuts.len() != doc.n {
        return Err(ValidationError::CutsLength {
            expected: doc.n,
            got: doc.per_vertex_cuts.len(),
        });
    }
    let budget_of = |v: usize| match (&doc.budgets, doc.r_star) {
        (Some(b), _) => b.get(v).copied(),
        (None, Some(r)) => Some(r),
        _ => None,
    };
    for (vertex, &c) in doc.per_vertex_cuts.iter().enumerate() {
        if let Some(budget) = budget_of(vertex) {
            if c > budget {
                return Err(ValidationError::OverBudget {
                    vertex,
                    cuts: c,
                    budget,
                });
            }
        }
    }
    if let Some(&(u, v)) = doc.protected_edges.iter().find(|&&(u, v)| !out.has_edge(u, v)) {
        return Err(ValidationError::ProtectedMissing(u, v));
    }
    if let Some(ordering) = &doc.ordering {
        let mut position = vec![usize::MAX; doc.n];
        for (p, &v) in ordering.iter().enumerate() {
            if v >= doc.n || position[v] != usize::MAX {
                return Err(ValidationError::Ordering);
            }
            position[v] = p;
        }
        if ordering.len() != doc.n {
            return Err(ValidationError::Ordering);
        }
        if let Some((u, v)) = out.edges().find(|&(u, v)| position[u] >= position[v]) {
            return Err(ValidationError::Backward(u, v));
        }
    }
    if let Some(a) = input {
        if a.n() != doc.n || a.edge_count() != doc.edges {
            return Err(ValidationError::InputMismatch("size"));
        }
        if !out.is_subgraph_of(a) {
            return Err(ValidationError::InputMismatch("output is not a subgraph of the input"));
        }
        if cuts(a, &out) != doc.per_vertex_cuts {
            return Err(ValidationError::InputMismatch("per-vertex cuts"));
        }
    }
    Ok(())
}
