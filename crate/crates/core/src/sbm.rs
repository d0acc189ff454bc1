//! Stochastic block model: parameters, graphs, labellings and the block-count
//! sufficient statistics every modularity is a function of.
//!
//! Labels are 0-based in memory. Conversion to the 1-based labels used in
//! files and on the command line happens at the edges
//! ([`Labelling::from_one_based`], [`Labelling::to_one_based`]).

use nalgebra::DMatrix;
use rand::Rng;

use crate::error::{Error, Result};
use crate::rng::{rng_from_seed, BlockRng};

/// Tolerance on `Σ π_a = 1`.
const PI_SUM_TOL: f64 = 1e-12;
/// Largest asymmetry `|P_ab − P_ba|` accepted before symmetrizing.
const SYMMETRY_TOL: f64 = 1e-12;

/// Class proportions `π` and the symmetric edge-probability matrix `P`.
///
/// In the sparse parametrization `P = ρ·S`; the base matrix and the factor
/// are kept so that experiment output can report `ρ`.
#[derive(Debug, Clone, PartialEq)]
pub struct SbmParams {
    pi: Vec<f64>,
    p: DMatrix<f64>,
    rho: f64,
    base: DMatrix<f64>,
}

impl SbmParams {
    /// Dense parameters. `P` must be square, symmetric (up to `1e-12`) and
    /// have entries in `[0, 1]`; it is symmetrized from its upper triangle.
    pub fn new(pi: Vec<f64>, p: DMatrix<f64>) -> Result<Self> {
        let p = validate_matrix(&pi, p, true)?;
        Ok(Self {
            pi,
            base: p.clone(),
            p,
            rho: 1.0,
        })
    }

    /// Sparse parameters `P = ρ·S` with `ρ ∈ (0, 1]` and `S ≥ 0`.
    pub fn sparse(pi: Vec<f64>, base: DMatrix<f64>, rho: f64) -> Result<Self> {
        if !(rho > 0.0 && rho <= 1.0) {
            return Err(Error::InvalidParams(format!(
                "sparsity factor must lie in (0, 1], got {rho}"
            )));
        }
        let base = validate_matrix(&pi, base, false)?;
        let p = &base * rho;
        if p.iter().any(|&x| x > 1.0) {
            return Err(Error::InvalidParams(format!(
                "rho * S has entries above 1 (rho = {rho})"
            )));
        }
        Ok(Self { pi, p, rho, base })
    }

    pub fn k(&self) -> usize {
        self.pi.len()
    }

    pub fn pi(&self) -> &[f64] {
        &self.pi
    }

    pub fn p(&self) -> &DMatrix<f64> {
        &self.p
    }

    /// Sparsity factor; `1.0` for dense parameters.
    pub fn rho(&self) -> f64 {
        self.rho
    }

    /// Base matrix `S`; equal to `P` for dense parameters.
    pub fn base(&self) -> &DMatrix<f64> {
        &self.base
    }

    /// Probability of an edge between two uniformly chosen nodes, `πᵀPπ`.
    pub fn edge_density(&self) -> f64 {
        let k = self.k();
        let mut s = 0.0;
        for a in 0..k {
            for b in 0..k {
                s += self.pi[a] * self.pi[b] * self.p[(a, b)];
            }
        }
        s
    }

    /// Expected degree `(n − 1)·πᵀPπ`.
    pub fn expected_degree(&self, n: usize) -> f64 {
        (n.saturating_sub(1)) as f64 * self.edge_density()
    }

    /// Rows of `P` are pairwise distinct once the columns of classes with
    /// `π_a = 0` are dropped.
    pub fn is_identifiable(&self) -> bool {
        is_identifiable(&self.p, &self.pi)
    }
}

/// Identifiability of `(P, π)`: no two rows of `P` coincide on the columns
/// of classes with positive probability.
pub fn is_identifiable(p: &DMatrix<f64>, pi: &[f64]) -> bool {
    let k = pi.len();
    let live: Vec<usize> = (0..k).filter(|&a| pi[a] > 0.0).collect();
    for a in 0..k {
        for b in (a + 1)..k {
            if live.iter().all(|&c| p[(a, c)] == p[(b, c)]) {
                return false;
            }
        }
    }
    true
}

fn validate_matrix(pi: &[f64], mut p: DMatrix<f64>, unit: bool) -> Result<DMatrix<f64>> {
    let k = pi.len();
    if k == 0 {
        return Err(Error::InvalidParams(
            "at least one class is required".into(),
        ));
    }
    if pi.iter().any(|&x| !x.is_finite() || x < 0.0) {
        return Err(Error::InvalidParams(
            "class probabilities must be >= 0".into(),
        ));
    }
    let total: f64 = pi.iter().sum();
    if (total - 1.0).abs() > PI_SUM_TOL {
        return Err(Error::InvalidParams(format!(
            "class probabilities sum to {total}, not 1"
        )));
    }
    if p.nrows() != k || p.ncols() != k {
        return Err(Error::Dimension(format!(
            "edge matrix is {}x{}, expected {k}x{k}",
            p.nrows(),
            p.ncols()
        )));
    }
    for a in 0..k {
        for b in 0..k {
            let x = p[(a, b)];
            if !x.is_finite() || x < 0.0 || (unit && x > 1.0) {
                return Err(Error::InvalidParams(format!(
                    "edge matrix entry ({a},{b}) = {x} out of range"
                )));
            }
            if (x - p[(b, a)]).abs() > SYMMETRY_TOL {
                return Err(Error::InvalidParams(format!(
                    "edge matrix is not symmetric at ({a},{b})"
                )));
            }
        }
    }
    for a in 0..k {
        for b in 0..a {
            p[(a, b)] = p[(b, a)];
        }
    }
    Ok(p)
}

/// Simple undirected graph without self-loops.
///
/// Adjacency is held twice: as a dense bit matrix for `O(1)` edge queries
/// and as sorted neighbor lists so that a node relabelling touches only its
/// own neighborhood.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    words: usize,
    bits: Vec<u64>,
    neighbors: Vec<Vec<u32>>,
    edges: usize,
}

impl Graph {
    pub fn empty(n: usize) -> Self {
        let words = n.div_ceil(64);
        Self {
            n,
            words,
            bits: vec![0; words * n],
            neighbors: vec![Vec::new(); n],
            edges: 0,
        }
    }

    pub fn complete(n: usize) -> Self {
        let mut g = Self::empty(n);
        for i in 0..n {
            for j in (i + 1)..n {
                g.insert(i, j);
            }
        }
        g
    }

    /// Builds a graph from an edge iterator; duplicates collapse.
    pub fn from_edges<I>(n: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        let mut g = Self::empty(n);
        for (i, j) in edges {
            g.add_edge(i, j)?;
        }
        Ok(g)
    }

    /// Inserts `{i, j}`; returns `false` if the edge was already present.
    pub fn add_edge(&mut self, i: usize, j: usize) -> Result<bool> {
        for idx in [i, j] {
            if idx >= self.n {
                return Err(Error::OutOfRange {
                    index: idx,
                    bound: self.n,
                });
            }
        }
        if i == j {
            return Err(Error::InvalidParams(format!("self-loop at node {i}")));
        }
        if self.has_edge(i, j) {
            return Ok(false);
        }
        self.insert(i, j);
        Ok(true)
    }

    fn insert(&mut self, i: usize, j: usize) {
        self.set_bit(i, j);
        self.set_bit(j, i);
        for (u, v) in [(i, j), (j, i)] {
            let list = &mut self.neighbors[u];
            let pos = list.partition_point(|&x| (x as usize) < v);
            list.insert(pos, v as u32);
        }
        self.edges += 1;
    }

    #[inline]
    fn set_bit(&mut self, i: usize, j: usize) {
        self.bits[i * self.words + j / 64] |= 1u64 << (j % 64);
    }

    #[inline]
    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        i < self.n && j < self.n && (self.bits[i * self.words + j / 64] >> (j % 64)) & 1 == 1
    }

    /// Node count.
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edges
    }

    /// Sorted neighbor list of `i`.
    #[inline]
    pub fn neighbors(&self, i: usize) -> &[u32] {
        &self.neighbors[i]
    }

    pub fn degree(&self, i: usize) -> usize {
        self.neighbors[i].len()
    }

    /// Edges as `(i, j)` with `i < j`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.n).flat_map(move |i| {
            self.neighbors[i]
                .iter()
                .map(|&j| j as usize)
                .filter(move |&j| j > i)
                .map(move |j| (i, j))
        })
    }
}

/// Assignment of each node to one of `k` classes. Empty classes are allowed.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Labelling {
    labels: Vec<u32>,
    k: usize,
}

impl Labelling {
    /// 0-based labels.
    pub fn new(labels: Vec<u32>, k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidParams("class count must be >= 1".into()));
        }
        if let Some(&bad) = labels.iter().find(|&&l| l as usize >= k) {
            return Err(Error::OutOfRange {
                index: bad as usize,
                bound: k,
            });
        }
        Ok(Self { labels, k })
    }

    /// 1-based labels as used in files and in the notation `{1, …, K}`.
    pub fn from_one_based(labels: &[usize], k: usize) -> Result<Self> {
        let mut out = Vec::with_capacity(labels.len());
        for &l in labels {
            if l == 0 || l > k {
                return Err(Error::OutOfRange { index: l, bound: k });
            }
            out.push((l - 1) as u32);
        }
        Self::new(out, k)
    }

    /// Every node in class 0.
    pub fn uniform(n: usize, k: usize) -> Result<Self> {
        Self::new(vec![0; n], k)
    }

    /// Labels drawn uniformly from `{0, …, k−1}`.
    pub fn random<R: Rng + ?Sized>(n: usize, k: usize, rng: &mut R) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidParams("class count must be >= 1".into()));
        }
        let labels = (0..n).map(|_| rng.random_range(0..k as u32)).collect();
        Ok(Self { labels, k })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn n(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[u32] {
        &self.labels
    }

    #[inline]
    pub fn get(&self, i: usize) -> usize {
        self.labels[i] as usize
    }

    pub(crate) fn set(&mut self, i: usize, label: usize) {
        debug_assert!(label < self.k);
        self.labels[i] = label as u32;
    }

    pub fn to_one_based(&self) -> Vec<usize> {
        self.labels.iter().map(|&l| l as usize + 1).collect()
    }

    /// Class sizes `n_a(e)`.
    pub fn sizes(&self) -> Vec<u64> {
        let mut s = vec![0u64; self.k];
        for &l in &self.labels {
            s[l as usize] += 1;
        }
        s
    }

    /// Renames class `a` to `sigma[a]`.
    pub fn relabelled(&self, sigma: &[usize]) -> Result<Self> {
        if sigma.len() != self.k {
            return Err(Error::Dimension(format!(
                "permutation has length {}, expected {}",
                sigma.len(),
                self.k
            )));
        }
        let mut seen = vec![false; self.k];
        for &s in sigma {
            if s >= self.k || std::mem::replace(&mut seen[s], true) {
                return Err(Error::InvalidParams("not a permutation".into()));
            }
        }
        let labels = self
            .labels
            .iter()
            .map(|&l| sigma[l as usize] as u32)
            .collect();
        Ok(Self { labels, k: self.k })
    }
}

/// Block edge counts `O_ab(e)` and class sizes `n_a(e)` for a labelling.
///
/// `O` is stored as a full symmetric `K×K` matrix. Diagonal entries count
/// edges inside a class once; off-diagonal entries count edges between the
/// two classes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockCounts {
    k: usize,
    n: u64,
    o: Vec<u64>,
    sizes: Vec<u64>,
}

/// Recomputes the block counts of `e` on `graph` from scratch.
pub fn block_counts(graph: &Graph, e: &Labelling) -> Result<BlockCounts> {
    if e.n() != graph.n() {
        return Err(Error::Dimension(format!(
            "labelling has {} nodes, graph has {}",
            e.n(),
            graph.n()
        )));
    }
    let k = e.k();
    let mut o = vec![0u64; k * k];
    for (i, j) in graph.edges() {
        let (a, b) = (e.get(i), e.get(j));
        if a == b {
            o[a * k + a] += 1;
        } else {
            o[a * k + b] += 1;
            o[b * k + a] += 1;
        }
    }
    Ok(BlockCounts {
        k,
        n: graph.n() as u64,
        o,
        sizes: e.sizes(),
    })
}

impl BlockCounts {
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    /// `O_ab(e)`.
    #[inline]
    pub fn o(&self, a: usize, b: usize) -> u64 {
        self.o[a * self.k + b]
    }

    /// `Õ_ab(e)`: `O_ab` off the diagonal, `2·O_aa` on it.
    #[inline]
    pub fn o_tilde(&self, a: usize, b: usize) -> u64 {
        if a == b {
            2 * self.o(a, a)
        } else {
            self.o(a, b)
        }
    }

    /// `n_a(e)`.
    #[inline]
    pub fn size(&self, a: usize) -> u64 {
        self.sizes[a]
    }

    pub fn sizes(&self) -> &[u64] {
        &self.sizes
    }

    /// `n_ab(e)`: number of node pairs available to the block.
    #[inline]
    pub fn pairs(&self, a: usize, b: usize) -> u64 {
        pair_count(self.sizes[a], self.sizes[b], a == b)
    }

    /// `Σ_{a≤b} O_ab`.
    pub fn total_edges(&self) -> u64 {
        (0..self.k)
            .flat_map(|a| (a..self.k).map(move |b| (a, b)))
            .map(|(a, b)| self.o(a, b))
            .sum()
    }

    /// Moves `node` to `new_label`, updating both `e` and the counts in
    /// `O(degree + K)` time.
    pub fn apply_move(
        &mut self,
        graph: &Graph,
        e: &mut Labelling,
        node: usize,
        new_label: usize,
    ) -> Result<()> {
        if node >= e.n() {
            return Err(Error::OutOfRange {
                index: node,
                bound: e.n(),
            });
        }
        if new_label >= self.k {
            return Err(Error::OutOfRange {
                index: new_label,
                bound: self.k,
            });
        }
        if e.k() != self.k || e.n() != graph.n() || e.n() as u64 != self.n {
            return Err(Error::Dimension(
                "counts, labelling and graph disagree".into(),
            ));
        }
        let old = e.get(node);
        if old == new_label {
            return Ok(());
        }
        let mut links = vec![0u64; self.k];
        for &j in graph.neighbors(node) {
            links[e.get(j as usize)] += 1;
        }
        self.shift_node(old, new_label, &links);
        e.set(node, new_label);
        Ok(())
    }

    /// Moves one node from class `from` to class `to`, given the number of
    /// its neighbors in each class (`links[c]`).
    pub(crate) fn shift_node(&mut self, from: usize, to: usize, links: &[u64]) {
        let k = self.k;
        self.sizes[from] -= 1;
        self.sizes[to] += 1;
        for (x, &d) in links.iter().enumerate() {
            if d == 0 {
                continue;
            }
            if from == x {
                self.o[from * k + from] -= d;
            } else {
                self.o[from * k + x] -= d;
                self.o[x * k + from] -= d;
            }
            if to == x {
                self.o[to * k + to] += d;
            } else {
                self.o[to * k + x] += d;
                self.o[x * k + to] += d;
            }
        }
    }
}

#[inline]
pub(crate) fn pair_count(na: u64, nb: u64, diag: bool) -> u64 {
    if diag {
        na * na.saturating_sub(1) / 2
    } else {
        na * nb
    }
}

/// Samples labels i.i.d. from `π`, then each edge `i < j` independently with
/// probability `P_{Z_i Z_j}`. Deterministic given `seed`.
pub fn generate_sbm(params: &SbmParams, n: usize, seed: u64) -> Result<(Graph, Labelling)> {
    if n == 0 {
        return Err(Error::InvalidParams("node count must be >= 1".into()));
    }
    let mut rng = rng_from_seed(seed);
    let z = sample_labels(params.pi(), n, &mut rng)?;
    let p = params.p();
    let mut g = Graph::empty(n);
    for i in 0..n {
        let zi = z.get(i);
        for j in (i + 1)..n {
            let q = p[(zi, z.get(j))];
            // Always draw so the stream layout does not depend on P.
            let u: f64 = rng.random();
            if u < q {
                g.insert(i, j);
            }
        }
    }
    Ok((g, z))
}

fn sample_labels(pi: &[f64], n: usize, rng: &mut BlockRng) -> Result<Labelling> {
    let k = pi.len();
    let last_live = (0..k)
        .rev()
        .find(|&a| pi[a] > 0.0)
        .ok_or_else(|| Error::InvalidParams("all class probabilities are zero".into()))?;
    let labels = (0..n)
        .map(|_| {
            let u: f64 = rng.random();
            let mut acc = 0.0;
            for (a, &p) in pi.iter().enumerate() {
                acc += p;
                if p > 0.0 && u < acc {
                    return a as u32;
                }
            }
            last_live as u32
        })
        .collect();
    Labelling::new(labels, k)
}

/// `E(Õ(e) | Z = z)` via `n²·R P Rᵀ − n·Diag(R·diag(P))` with `R = R(e, z)`.
///
/// The result is `K_e × K_e`; `P` must be `K_z × K_z`.
pub fn expected_counts(params: &SbmParams, e: &Labelling, z: &Labelling) -> Result<DMatrix<f64>> {
    if e.n() != z.n() {
        return Err(Error::Dimension(format!(
            "labellings have {} and {} nodes",
            e.n(),
            z.n()
        )));
    }
    if z.k() != params.k() {
        return Err(Error::Dimension(format!(
            "true labelling has {} classes, parameters have {}",
            z.k(),
            params.k()
        )));
    }
    let n = e.n() as f64;
    let mut r = DMatrix::<f64>::zeros(e.k(), z.k());
    for i in 0..e.n() {
        r[(e.get(i), z.get(i))] += 1.0;
    }
    r /= n;
    let p = params.p();
    let mut out = (&r * p * r.transpose()) * (n * n);
    let diag_p = p.diagonal();
    let correction = &r * diag_p;
    for a in 0..e.k() {
        out[(a, a)] -= n * correction[a];
    }
    Ok(out)
}
