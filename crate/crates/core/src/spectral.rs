//! Perron–Frobenius machinery for nonnegative matrices.
//!
//! The spectral radius of a nonnegative matrix is the largest spectral radius
//! of its irreducible Frobenius blocks. Each irreducible block is handled by
//! power iteration on `B + I`, which is primitive even when `B` is periodic
//! (a bare cycle). Convergence is monitored through the Collatz–Wielandt
//! bracket `min_i (Bx)_i / x_i <= rho(B) <= max_i (Bx)_i / x_i`, and slow
//! cases (small spectral gap, e.g. long thin cycles) fall back to shifted
//! inverse iteration with the upper bracket as shift.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::SpectralError;
use crate::graphmat::{BoolMatrix, FrobeniusForm, IndexSet, WeightedMatrix};

/// Power iterations spent before switching to inverse iteration.
const POWER_PHASE: usize = 500;
const INVERSE_PHASE: usize = 100;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EigenConfig {
    /// Residual tolerance, scaled by `max(1, rho)`.
    pub tol: f64,
    /// Relative tolerance for "block attains the spectral radius".
    pub rho_rel_tol: f64,
    /// Per-block iteration cap; `None` means `50 n + 1000`.
    pub max_iter: Option<usize>,
}

impl Default for EigenConfig {
    fn default() -> Self {
        EigenConfig {
            tol: 1e-10,
            rho_rel_tol: 1e-8,
            max_iter: None,
        }
    }
}

impl EigenConfig {
    fn cap(&self, n: usize) -> usize {
        self.max_iter.unwrap_or(50 * n + 1000)
    }

    /// Whether `value` equals `rho` up to the attainment tolerance.
    pub fn attains(&self, value: f64, rho: f64) -> bool {
        (value - rho).abs() <= self.rho_rel_tol * rho.max(1.0)
    }
}

/// Leading eigenvalue and a nonnegative eigenvector with unit max-norm.
#[derive(Clone, Debug, PartialEq)]
pub struct EigenPair {
    pub value: f64,
    pub vector: Vec<f64>,
}

/// A leading eigenvector whose support is minimal by inclusion.
#[derive(Clone, Debug, PartialEq)]
pub struct MinimalLeadingEigenvector {
    /// `rho(M)`.
    pub value: f64,
    /// Nonnegative, unit max-norm, zero off `support`.
    pub vector: Vec<f64>,
    /// Structural support: the chosen block plus everything it reaches.
    pub support: IndexSet,
    /// The irreducible block that carries the eigenvalue. Restricted to
    /// `support`, the matrix has exactly this block as its basic set.
    pub core_block: IndexSet,
}

/// Nonnegative square matrix accessible row by row.
pub trait NonnegativeMatrix {
    fn dim(&self) -> usize;
    /// Nonzero entries `(column, value)` of row `i`.
    fn for_each_in_row<F: FnMut(usize, f64)>(&self, i: usize, f: F);

    fn mul_vec(&self, x: &[f64], out: &mut [f64]) {
        for (i, o) in out.iter_mut().enumerate() {
            let mut acc = 0.0;
            self.for_each_in_row(i, |j, a| acc += a * x[j]);
            *o = acc;
        }
    }

    fn row_sum(&self, i: usize) -> f64 {
        let mut acc = 0.0;
        self.for_each_in_row(i, |_, a| acc += a);
        acc
    }
}

impl NonnegativeMatrix for BoolMatrix {
    fn dim(&self) -> usize {
        self.n()
    }

    fn for_each_in_row<F: FnMut(usize, f64)>(&self, i: usize, mut f: F) {
        for &j in self.row(i) {
            f(j, 1.0);
        }
    }

    fn mul_vec(&self, x: &[f64], out: &mut [f64]) {
        for (i, o) in out.iter_mut().enumerate() {
            *o = self.row(i).iter().map(|&j| x[j]).sum();
        }
    }

    fn row_sum(&self, i: usize) -> f64 {
        self.in_degree(i) as f64
    }
}

impl NonnegativeMatrix for WeightedMatrix {
    fn dim(&self) -> usize {
        self.n()
    }

    fn for_each_in_row<F: FnMut(usize, f64)>(&self, i: usize, mut f: F) {
        for &(j, w) in self.row(i) {
            f(j, w);
        }
    }
}

/// `max_i |(Mv)_i - lambda v_i|`.
pub fn residual<M: NonnegativeMatrix + ?Sized>(m: &M, value: f64, vector: &[f64]) -> f64 {
    let mut mv = vec![0.0; m.dim()];
    m.mul_vec(vector, &mut mv);
    mv.iter()
        .zip(vector)
        .map(|(a, b)| (a - value * b).abs())
        .fold(0.0, f64::max)
}

/// Collatz–Wielandt bracket over the positive components of `x`.
fn cw_bracket(x: &[f64], mx: &[f64]) -> (f64, f64) {
    let mut lo = f64::INFINITY;
    let mut hi = 0.0f64;
    for (&xi, &yi) in x.iter().zip(mx) {
        if xi > 0.0 {
            let r = yi / xi;
            lo = lo.min(r);
            hi = hi.max(r);
        }
    }
    if lo == f64::INFINITY {
        lo = 0.0;
    }
    (lo, hi)
}

/// Stopping test for a max-normalized iterate `x` with `mx = Mx`.
///
/// Accepts when the Collatz–Wielandt bracket is narrower than `tol`, or when
/// the residual `|Mx - lambda x|` is, with `lambda = sum(Mx) / sum(x)`. The
/// second test matters when the Perron vector has tiny components, whose
/// ratios stay noisy long after the vector itself has converged. Returns the
/// bracket's upper end, the bracket width and the accepted eigenvalue.
fn converged(x: &[f64], mx: &[f64], cfg: &EigenConfig) -> (f64, f64, Option<f64>) {
    let (lo, hi) = cw_bracket(x, mx);
    let gap = hi - lo;
    if gap <= cfg.tol * hi.max(1.0) {
        return (hi, gap, Some(0.5 * (lo + hi)));
    }
    let mean = mx.iter().sum::<f64>() / x.iter().sum::<f64>();
    let res = x
        .iter()
        .zip(mx)
        .map(|(a, b)| (b - mean * a).abs())
        .fold(0.0, f64::max);
    let value = (res <= cfg.tol * mean.max(1.0)).then_some(mean);
    (hi, gap, value)
}

fn normalize_max(x: &mut [f64]) {
    let m = x.iter().copied().fold(0.0, f64::max);
    if m > 0.0 {
        for xi in x.iter_mut() {
            *xi /= m;
        }
    }
}

/// Leading eigenpair of an irreducible (or 1x1) nonnegative matrix.
pub fn leading_pair_irreducible<M: NonnegativeMatrix + ?Sized>(
    m: &M,
    cfg: &EigenConfig,
) -> Result<EigenPair, SpectralError> {
    let n = m.dim();
    match n {
        0 => return Err(SpectralError::EmptyMatrix),
        1 => {
            let mut a = 0.0;
            m.for_each_in_row(0, |_, w| a += w);
            return Ok(EigenPair {
                value: a,
                vector: vec![1.0],
            });
        }
        _ => {}
    }

    let cap = cfg.cap(n);
    let mut x = vec![1.0; n];
    let mut mx = vec![0.0; n];
    let mut last_gap = f64::INFINITY;
    let mut hi = 0.0;
    let power_iters = cap.min(POWER_PHASE);

    for _ in 0..power_iters {
        m.mul_vec(&x, &mut mx);
        let (h, gap, value) = converged(&x, &mx, cfg);
        hi = h;
        last_gap = gap;
        if let Some(value) = value {
            return Ok(EigenPair { value, vector: x });
        }
        for (xi, yi) in x.iter_mut().zip(&mx) {
            *xi += yi;
        }
        normalize_max(&mut x);
    }

    if cap > power_iters {
        let budget = (cap - power_iters).min(INVERSE_PHASE);
        return inverse_iteration(m, x, hi, cfg, budget, power_iters);
    }
    Err(SpectralError::NonConvergence {
        iterations: power_iters,
        residual: last_gap,
    })
}

/// Shifted inverse iteration `x <- (sigma I - M)^{-1} x` with `sigma` the
/// current Collatz–Wielandt upper bound. For `sigma > rho` the inverse is a
/// nonnegative matrix, so the iterates stay nonnegative.
fn inverse_iteration<M: NonnegativeMatrix + ?Sized>(
    m: &M,
    mut x: Vec<f64>,
    mut sigma: f64,
    cfg: &EigenConfig,
    budget: usize,
    spent: usize,
) -> Result<EigenPair, SpectralError> {
    let n = m.dim();
    let mut dense = vec![0.0; n * n];
    for i in 0..n {
        m.for_each_in_row(i, |j, a| dense[i * n + j] = a);
    }
    let mut mx = vec![0.0; n];
    let mut last_gap = f64::INFINITY;
    for _ in 0..budget {
        let shift = sigma + 1e-12 * sigma.max(1.0);
        let mut shifted = vec![0.0; n * n];
        for (s, d) in shifted.iter_mut().zip(&dense) {
            *s = -d;
        }
        for i in 0..n {
            shifted[i * n + i] += shift;
        }
        let mut y = x.clone();
        if !dense::solve_in_place(&mut shifted, n, &mut y) {
            // shift hit the eigenvalue exactly: x is already the eigenvector
            return Ok(EigenPair { value: sigma, vector: x });
        }
        for yi in y.iter_mut() {
            *yi = yi.max(0.0);
        }
        normalize_max(&mut y);
        x = y;
        m.mul_vec(&x, &mut mx);
        let (hi, gap, value) = converged(&x, &mx, cfg);
        last_gap = gap;
        if let Some(value) = value {
            return Ok(EigenPair { value, vector: x });
        }
        sigma = hi;
    }
    Err(SpectralError::NonConvergence {
        iterations: spent + budget,
        residual: last_gap,
    })
}

/// Per-block spectral data of a Boolean matrix in Frobenius form.
pub(crate) struct BlockSpectrum {
    /// Exact value for every block that may attain the maximum, `None` for
    /// blocks excluded by their row-sum bound.
    pub pairs: Vec<Option<EigenPair>>,
    pub rho: f64,
    pub attaining: Vec<bool>,
}

pub(crate) fn block_spectrum(
    m: &BoolMatrix,
    form: &FrobeniusForm,
    cfg: &EigenConfig,
) -> Result<BlockSpectrum, SpectralError> {
    let q = form.block_count();
    // min/max internal row sums bracket each block's spectral radius
    let mut bounds = Vec::with_capacity(q);
    for block in form.blocks() {
        let b = form.block_of(block.as_slice()[0]);
        let mut lo = usize::MAX;
        let mut hi = 0usize;
        for i in block.iter() {
            let inside = m.row(i).iter().filter(|&&j| form.block_of(j) == b).count();
            lo = lo.min(inside);
            hi = hi.max(inside);
        }
        bounds.push((lo as f64, hi as f64));
    }
    let floor = bounds.iter().map(|b| b.0).fold(0.0, f64::max);

    let mut pairs: Vec<Option<EigenPair>> = Vec::with_capacity(q);
    let mut rho = 0.0f64;
    for (block, &(lo, hi)) in form.blocks().iter().zip(&bounds) {
        if hi < floor && !cfg.attains(hi, floor) {
            pairs.push(None);
            continue;
        }
        let pair = if lo == hi {
            // constant internal row sum: the all-ones vector is the Perron vector
            EigenPair {
                value: hi,
                vector: vec![1.0; block.len()],
            }
        } else {
            let sub = m.restrict(block).expect("block indices are in range");
            leading_pair_irreducible(&sub, cfg)?
        };
        rho = rho.max(pair.value);
        pairs.push(Some(pair));
    }
    let attaining = pairs
        .iter()
        .map(|p| p.as_ref().is_some_and(|p| cfg.attains(p.value, rho)))
        .collect();
    Ok(BlockSpectrum {
        pairs,
        rho,
        attaining,
    })
}

/// Minimal leading eigenvector of `m`, given its Frobenius form.
///
/// Picks an irreducible block attaining `rho(m)` from which no other
/// attaining block is reachable (the "highest" such block of some Frobenius
/// order), takes its Perron vector and propagates it to every block it
/// reaches by solving `(rho I - A_cc) v_c = sum of inflow`, which is well
/// posed because those blocks have strictly smaller spectral radius. Among
/// several admissible blocks the one with the smallest vertex index wins.
pub fn minimal_leading_eigenvector(
    m: &BoolMatrix,
    form: &FrobeniusForm,
    cfg: &EigenConfig,
) -> Result<MinimalLeadingEigenvector, SpectralError> {
    let n = m.n();
    if n == 0 {
        return Err(SpectralError::EmptyMatrix);
    }
    let spectrum = block_spectrum(m, form, cfg)?;
    let succ = form.condensation(m);
    let q = form.block_count();

    // successors always have smaller block indices
    let mut attaining_below = vec![false; q];
    for b in 0..q {
        attaining_below[b] = succ[b]
            .iter()
            .any(|&c| spectrum.attaining[c] || attaining_below[c]);
    }
    let chosen = (0..q)
        .filter(|&b| spectrum.attaining[b] && !attaining_below[b])
        .min_by_key(|&b| form.blocks()[b].as_slice()[0])
        .expect("some attaining block has no attaining successor");

    let mut reached = vec![false; q];
    reached[chosen] = true;
    for b in (0..=chosen).rev() {
        if reached[b] {
            for &c in &succ[b] {
                reached[c] = true;
            }
        }
    }

    let rho = spectrum.rho;
    let mut v = vec![0.0; n];
    let perron = spectrum.pairs[chosen]
        .as_ref()
        .expect("attaining blocks carry an eigenpair");
    for (i, &x) in form.blocks()[chosen].iter().zip(&perron.vector) {
        v[i] = x;
    }

    for c in (0..chosen).rev().filter(|&c| reached[c]) {
        let block = &form.blocks()[c];
        let inflow: Vec<f64> = block
            .iter()
            .map(|i| {
                m.row(i)
                    .iter()
                    .filter(|&&j| form.block_of(j) != c)
                    .map(|&j| v[j])
                    .sum()
            })
            .collect();
        if block.len() == 1 {
            let i = block.as_slice()[0];
            let a = if m.get(i, i) { 1.0 } else { 0.0 };
            v[i] = inflow[0] / (rho - a);
        } else {
            let b = block.len();
            let mut sys = vec![0.0; b * b];
            for (r, i) in block.iter().enumerate() {
                sys[r * b + r] = rho;
                for &j in m.row(i) {
                    if let Some(col) = block.position(j) {
                        sys[r * b + col] -= 1.0;
                    }
                }
            }
            let mut sol = inflow;
            if !dense::solve_in_place(&mut sys, b, &mut sol) {
                return Err(SpectralError::NonConvergence {
                    iterations: 0,
                    residual: f64::INFINITY,
                });
            }
            for (i, x) in block.iter().zip(sol) {
                v[i] = x.max(0.0);
            }
        }
    }
    normalize_max(&mut v);

    let support = IndexSet::from_sorted(
        (0..n).filter(|&i| reached[form.block_of(i)]).collect(),
    );
    Ok(MinimalLeadingEigenvector {
        value: rho,
        vector: v,
        support,
        core_block: form.blocks()[chosen].clone(),
    })
}

/// Basic set of a matrix whose minimal leading eigenvector is strictly
/// positive: the last Frobenius block, which must be the only block attaining
/// the spectral radius.
pub fn basic_set(
    m: &BoolMatrix,
    form: &FrobeniusForm,
    cfg: &EigenConfig,
) -> Result<IndexSet, SpectralError> {
    let spectrum = block_spectrum(m, form, cfg)?;
    let attaining = spectrum.attaining.iter().filter(|&&a| a).count();
    match spectrum.attaining.last() {
        Some(true) if attaining == 1 => Ok(form.last_block().cloned().unwrap_or_default()),
        _ => Err(SpectralError::BasicSetPrecondition { attaining }),
    }
}

/// `rho(M)` as the largest block spectral radius.
pub fn rho_of_boolean(m: &BoolMatrix, cfg: &EigenConfig) -> Result<f64, SpectralError> {
    if m.is_acyclic() {
        return Ok(0.0);
    }
    Ok(block_spectrum(m, &m.frobenius_factorize(), cfg)?.rho)
}

pub(crate) mod dense {
    /// Solves `a x = b` in place (row-major `n x n`), Gaussian elimination
    /// with partial pivoting. Returns `false` on a zero pivot.
    pub fn solve_in_place(a: &mut [f64], n: usize, b: &mut [f64]) -> bool {
        for col in 0..n {
            let mut piv = col;
            for r in col + 1..n {
                if a[r * n + col].abs() > a[piv * n + col].abs() {
                    piv = r;
                }
            }
            if a[piv * n + col] == 0.0 {
                return false;
            }
            if piv != col {
                for k in 0..n {
                    a.swap(col * n + k, piv * n + k);
                }
                b.swap(col, piv);
            }
            let d = a[col * n + col];
            for r in col + 1..n {
                let f = a[r * n + col] / d;
                if f != 0.0 {
                    for k in col..n {
                        a[r * n + k] -= f * a[col * n + k];
                    }
                    b[r] -= f * b[col];
                }
            }
        }
        for col in (0..n).rev() {
            let mut s = b[col];
            for k in col + 1..n {
                s -= a[col * n + k] * b[k];
            }
            b[col] = s / a[col * n + col];
        }
        true
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg() -> EigenConfig {
        EigenConfig::default()
    }

    #[test]
    fn irreducible_examples() {
        let p = leading_pair_irreducible(&BoolMatrix::cycle(3), &cfg()).unwrap();
        assert!((p.value - 1.0).abs() < 1e-10);
        assert!(p.vector.iter().all(|&x| (x - 1.0).abs() < 1e-9));

        let zero = BoolMatrix::empty(1);
        let p = leading_pair_irreducible(&zero, &cfg()).unwrap();
        assert_eq!(p, EigenPair { value: 0.0, vector: vec![1.0] });

        let ones = BoolMatrix::from_rows(vec![vec![0, 1], vec![0, 1]]).unwrap();
        let p = leading_pair_irreducible(&ones, &cfg()).unwrap();
        assert!((p.value - 2.0).abs() < 1e-10);
        assert!(p.vector.iter().all(|&x| (x - 1.0).abs() < 1e-9));

        assert_eq!(
            leading_pair_irreducible(&BoolMatrix::empty(0), &cfg()),
            Err(SpectralError::EmptyMatrix)
        );
    }

    #[test]
    fn long_cycle_with_chord_converges() {
        // spectral gap of a long cycle is tiny; forces the inverse-iteration path
        let n = 400;
        let mut edges: Vec<(usize, usize)> = (0..n).map(|i| (i, (i + 1) % n)).collect();
        edges.push((0, n / 2));
        let m = BoolMatrix::from_edges(n, edges).unwrap();
        let p = leading_pair_irreducible(&m, &cfg()).unwrap();
        assert!(p.value > 1.0);
        assert!(residual(&m, p.value, &p.vector) <= 1e-10 * p.value.max(1.0));
        assert!(p.vector.iter().all(|&x| x > 0.0));
    }

    #[test]
    fn iteration_cap_reports_nonconvergence() {
        let n = 200;
        let mut edges: Vec<(usize, usize)> = (0..n).map(|i| (i, (i + 1) % n)).collect();
        edges.push((0, 3));
        let m = BoolMatrix::from_edges(n, edges).unwrap();
        let tight = EigenConfig { max_iter: Some(3), ..cfg() };
        assert!(matches!(
            leading_pair_irreducible(&m, &tight),
            Err(SpectralError::NonConvergence { iterations: 3, .. })
        ));
    }

    #[test]
    fn weighted_block() {
        let w = WeightedMatrix::from_edges(2, [(0, 1, 4.0), (1, 0, 1.0)]).unwrap();
        let p = leading_pair_irreducible(&w, &cfg()).unwrap();
        assert!((p.value - 2.0).abs() < 1e-9);
    }

    #[test]
    fn minimal_vector_of_irreducible_has_full_support() {
        let m = BoolMatrix::complete(4);
        let mlev = minimal_leading_eigenvector(&m, &m.frobenius_factorize(), &cfg()).unwrap();
        assert_eq!(mlev.support, IndexSet::full(4));
        assert!((mlev.value - 3.0).abs() < 1e-10);
    }

    #[test]
    fn minimal_vector_of_disjoint_cycles_picks_one_block() {
        // 2-cycle {0,1} and 3-cycle {2,3,4}, uncoupled
        let m = BoolMatrix::from_edges(5, [(0, 1), (1, 0), (2, 3), (3, 4), (4, 2)]).unwrap();
        let form = m.frobenius_factorize();
        let mlev = minimal_leading_eigenvector(&m, &form, &cfg()).unwrap();
        assert!((mlev.value - 1.0).abs() < 1e-10);
        // tie-break: smallest vertex index
        assert_eq!(mlev.support, IndexSet::from_indices([0, 1]));
        let sub = m.restrict(&mlev.support).unwrap();
        let restricted: Vec<f64> = mlev.support.iter().map(|i| mlev.vector[i]).collect();
        assert!(restricted.iter().all(|&x| x > 1e-9));
        assert!(residual(&sub, 1.0, &restricted) < 1e-9);
    }

    #[test]
    fn minimal_vector_of_single_edge() {
        // M = [[0,0],[1,0]]: kernel is spanned by e_1
        let m = BoolMatrix::from_edges(2, [(0, 1)]).unwrap();
        let mlev = minimal_leading_eigenvector(&m, &m.frobenius_factorize(), &cfg()).unwrap();
        assert_eq!(mlev.value, 0.0);
        assert_eq!(mlev.support, IndexSet::from_indices([1]));
        assert_eq!(mlev.vector, vec![0.0, 1.0]);
    }

    #[test]
    fn minimal_vector_propagates_into_lower_blocks() {
        // source 2-cycle {0,1} feeds vertex 2 (no loop); support is {0,1,2}
        let m = BoolMatrix::from_edges(3, [(0, 1), (1, 0), (1, 2)]).unwrap();
        let mlev = minimal_leading_eigenvector(&m, &m.frobenius_factorize(), &cfg()).unwrap();
        assert_eq!(mlev.support, IndexSet::full(3));
        assert!(residual(&m, mlev.value, &mlev.vector) < 1e-9);
        assert!((mlev.vector[2] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn basic_set_examples() {
        let k4 = BoolMatrix::complete(4);
        assert_eq!(basic_set(&k4, &k4.frobenius_factorize(), &cfg()).unwrap(), IndexSet::full(4));

        let m = BoolMatrix::from_edges(3, [(0, 1), (1, 0), (1, 2)]).unwrap();
        let h = basic_set(&m, &m.frobenius_factorize(), &cfg()).unwrap();
        assert_eq!(h, IndexSet::from_indices([0, 1]));

        // last block is a looped singleton with rho 1; vertex 1 downstream has rho 0
        let m = BoolMatrix::from_edges(2, [(0, 0), (0, 1)]).unwrap();
        let h = basic_set(&m, &m.frobenius_factorize(), &cfg()).unwrap();
        assert_eq!(h, IndexSet::from_indices([0]));

        // two attaining blocks: precondition fails
        let m = BoolMatrix::from_edges(4, [(0, 1), (1, 0), (2, 3), (3, 2), (1, 2)]).unwrap();
        assert!(matches!(
            basic_set(&m, &m.frobenius_factorize(), &cfg()),
            Err(SpectralError::BasicSetPrecondition { attaining: 2 })
        ));
    }

    #[test]
    fn rho_examples() {
        let chain = BoolMatrix::from_edges(3, [(0, 1), (1, 2)]).unwrap();
        assert_eq!(rho_of_boolean(&chain, &cfg()).unwrap(), 0.0);
        assert!((rho_of_boolean(&BoolMatrix::cycle(3), &cfg()).unwrap() - 1.0).abs() < 1e-10);
        assert!((rho_of_boolean(&BoolMatrix::complete(4), &cfg()).unwrap() - 3.0).abs() < 1e-10);
    }

    #[test]
    fn dense_solve() {
        let mut a = vec![0.0, 2.0, 1.0, 1.0];
        let mut b = vec![4.0, 3.0];
        assert!(dense::solve_in_place(&mut a, 2, &mut b));
        assert!((b[0] - 1.0).abs() < 1e-12 && (b[1] - 2.0).abs() < 1e-12);
    }
}
