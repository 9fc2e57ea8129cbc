//! Bipartite center/customer cost graphs and the reductions applied before
//! the main solver runs.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One center/customer pair with its assignment cost.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub center: usize,
    pub customer: usize,
    pub cost: f64,
}

/// Compressed adjacency: row `v` spans `targets[offsets[v]..offsets[v + 1]]`.
#[derive(Debug, Clone, PartialEq)]
struct Adjacency {
    offsets: Vec<usize>,
    targets: Vec<usize>,
    costs: Vec<f64>,
}

impl Adjacency {
    fn build(rows: usize, mut entries: Vec<(usize, usize, f64)>) -> Self {
        entries.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.cmp(&b.1)));
        let mut offsets = vec![0usize; rows + 1];
        for &(row, _, _) in &entries {
            offsets[row + 1] += 1;
        }
        for v in 0..rows {
            offsets[v + 1] += offsets[v];
        }
        let targets = entries.iter().map(|e| e.1).collect();
        let costs = entries.iter().map(|e| e.2).collect();
        Adjacency {
            offsets,
            targets,
            costs,
        }
    }

    #[inline]
    fn row(&self, v: usize) -> impl ExactSizeIterator<Item = (usize, f64)> + '_ {
        let span = self.offsets[v]..self.offsets[v + 1];
        self.targets[span.clone()]
            .iter()
            .copied()
            .zip(self.costs[span].iter().copied())
    }

    #[inline]
    fn degree(&self, v: usize) -> usize {
        self.offsets[v + 1] - self.offsets[v]
    }
}

/// A k-median instance: a sparse bipartite graph between centers and
/// customers with nonnegative finite edge costs. Absent pairs have
/// infinite cost.
///
/// Construction rejects out-of-range ids and negative or non-finite costs,
/// and collapses duplicate pairs to their minimum cost. Customers without
/// any edge are allowed to exist; [`Instance::validate`] reports them.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    num_centers: usize,
    num_customers: usize,
    k: usize,
    by_center: Adjacency,
    by_customer: Adjacency,
}

impl Instance {
    pub fn new<I>(num_centers: usize, num_customers: usize, k: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize, f64)>,
    {
        if num_centers == 0 || num_customers == 0 {
            return Err(Error::BadParameters(
                "an instance needs at least one center and one customer".into(),
            ));
        }
        if k == 0 {
            return Err(Error::BadParameters("k must be at least 1".into()));
        }
        let mut raw = Vec::new();
        for (center, customer, cost) in edges {
            if center >= num_centers {
                return Err(Error::BadIndex {
                    what: "center",
                    id: center,
                    limit: num_centers,
                });
            }
            if customer >= num_customers {
                return Err(Error::BadIndex {
                    what: "customer",
                    id: customer,
                    limit: num_customers,
                });
            }
            if cost.is_nan() || cost.is_infinite() {
                return Err(Error::NonFiniteCost { center, customer });
            }
            if cost < 0.0 {
                return Err(Error::NegativeCost { center, customer });
            }
            raw.push((center, customer, cost));
        }
        raw.sort_by(|a, b| {
            a.0.cmp(&b.0)
                .then(a.1.cmp(&b.1))
                .then(a.2.total_cmp(&b.2))
        });
        raw.dedup_by(|later, kept| later.0 == kept.0 && later.1 == kept.1);

        let by_customer = Adjacency::build(
            num_customers,
            raw.iter().map(|&(i, j, c)| (j, i, c)).collect(),
        );
        let by_center = Adjacency::build(num_centers, raw);
        Ok(Instance {
            num_centers,
            num_customers,
            k,
            by_center,
            by_customer,
        })
    }

    pub fn num_centers(&self) -> usize {
        self.num_centers
    }

    /// `n`, the number of customers.
    pub fn num_customers(&self) -> usize {
        self.num_customers
    }

    /// `m`, the number of distinct edges.
    pub fn num_edges(&self) -> usize {
        self.by_center.targets.len()
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Same graph with a different target size.
    pub fn with_k(&self, k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::BadParameters("k must be at least 1".into()));
        }
        Ok(Instance { k, ..self.clone() })
    }

    /// `(customer, cost)` pairs of center `i`, ascending by customer.
    pub fn center_edges(&self, i: usize) -> impl ExactSizeIterator<Item = (usize, f64)> + '_ {
        self.by_center.row(i)
    }

    /// `(center, cost)` pairs of customer `j`, ascending by center.
    pub fn customer_edges(&self, j: usize) -> impl ExactSizeIterator<Item = (usize, f64)> + '_ {
        self.by_customer.row(j)
    }

    pub fn center_degree(&self, i: usize) -> usize {
        self.by_center.degree(i)
    }

    pub fn customer_degree(&self, j: usize) -> usize {
        self.by_customer.degree(j)
    }

    /// All edges in center-major order.
    pub fn edges(&self) -> impl Iterator<Item = Edge> + '_ {
        (0..self.num_centers).flat_map(move |i| {
            self.center_edges(i).map(move |(j, cost)| Edge {
                center: i,
                customer: j,
                cost,
            })
        })
    }

    /// Cost of edge `(i, j)`, infinite when absent.
    pub fn cost(&self, i: usize, j: usize) -> f64 {
        let span = self.by_center.offsets[i]..self.by_center.offsets[i + 1];
        match self.by_center.targets[span.clone()].binary_search(&j) {
            Ok(pos) => self.by_center.costs[span.start + pos],
            Err(_) => f64::INFINITY,
        }
    }

    /// Checks that every customer can be served by some center.
    pub fn validate(&self) -> Result<()> {
        match (0..self.num_customers).find(|&j| self.customer_degree(j) == 0) {
            Some(j) => Err(Error::IsolatedCustomer(j)),
            None => Ok(()),
        }
    }

    /// `c(C) = Σ_j min_{i∈C} c_ij`, infinite if some customer has no edge
    /// into `centers`.
    pub fn cost_of(&self, centers: &[usize]) -> f64 {
        let mut best = vec![f64::INFINITY; self.num_customers];
        for &i in centers {
            for (j, c) in self.center_edges(i) {
                if c < best[j] {
                    best[j] = c;
                }
            }
        }
        best.iter().sum()
    }

    /// Nearest chosen center for each customer (lowest id on ties), `None`
    /// when the customer has no edge into `centers`.
    pub fn assign(&self, centers: &[usize]) -> Vec<Option<usize>> {
        let mut open = vec![false; self.num_centers];
        for &i in centers {
            open[i] = true;
        }
        (0..self.num_customers)
            .map(|j| {
                let mut best: Option<(usize, f64)> = None;
                for (i, c) in self.customer_edges(j) {
                    if open[i] && best.is_none_or(|(_, b)| c < b) {
                        best = Some((i, c));
                    }
                }
                best.map(|(i, _)| i)
            })
            .collect()
    }

    /// Cheapest center of customer `j` (lowest id on ties).
    pub fn cheapest_center(&self, j: usize) -> Option<(usize, f64)> {
        let mut best: Option<(usize, f64)> = None;
        for (i, c) in self.customer_edges(j) {
            if best.is_none_or(|(_, b)| c < b) {
                best = Some((i, c));
            }
        }
        best
    }
}

/// An instance whose costs were shifted per customer so that every
/// customer has a zero-cost edge. Any center set's cost on the shifted
/// instance is its original cost minus `offset_total`.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalizedInstance {
    base: Instance,
    offsets: Vec<f64>,
    offset_total: f64,
}

impl NormalizedInstance {
    pub fn instance(&self) -> &Instance {
        &self.base
    }

    pub fn customer_offsets(&self) -> &[f64] {
        &self.offsets
    }

    pub fn offset_total(&self) -> f64 {
        self.offset_total
    }
}

/// Subtracts each customer's cheapest cost from all of its edges.
pub fn normalize(instance: &Instance) -> Result<NormalizedInstance> {
    instance.validate()?;
    let offsets: Vec<f64> = (0..instance.num_customers())
        .map(|j| {
            instance
                .customer_edges(j)
                .map(|(_, c)| c)
                .fold(f64::INFINITY, f64::min)
        })
        .collect();
    let shifted = instance
        .edges()
        .map(|e| (e.center, e.customer, e.cost - offsets[e.customer]));
    let base = Instance::new(
        instance.num_centers(),
        instance.num_customers(),
        instance.k(),
        shifted,
    )?;
    let offset_total = offsets.iter().sum();
    Ok(NormalizedInstance {
        base,
        offsets,
        offset_total,
    })
}

/// `⌈k·ln(n²/(2k(2k+1)))⌉`, the iteration budget of the first phase.
pub fn phase_one_budget(k: usize, n: usize) -> Result<usize> {
    check_regular_range(k, n)?;
    let (kf, nf) = (k as f64, n as f64);
    let t = (kf * (nf * nf / (2.0 * kf * (2.0 * kf + 1.0))).ln()).ceil();
    Ok(t as usize)
}

/// `α_kn = T/k + 2`, the size-approximation ratio.
pub fn size_ratio(k: usize, n: usize) -> Result<f64> {
    Ok(phase_one_budget(k, n)? as f64 / k as f64 + 2.0)
}

/// `2 ≤ k ≤ n/3`, the range where the two-phase algorithm applies.
pub fn check_regular_range(k: usize, n: usize) -> Result<()> {
    if k < 2 || 3 * k > n {
        Err(Error::ParameterOutOfRange { k, n })
    } else {
        Ok(())
    }
}

pub fn harmonic(h: usize) -> f64 {
    (1..=h).map(|x| 1.0 / x as f64).sum()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InstanceStats {
    pub n: usize,
    pub m: usize,
    pub k: usize,
    /// Maximum number of customers any single center can serve.
    pub max_degree: usize,
    pub harmonic_max_degree: f64,
    /// Phase-one budget `T`; `None` when k lies outside `[2, n/3]`.
    pub budget: Option<usize>,
    pub alpha: Option<f64>,
}

impl InstanceStats {
    pub fn budget(&self) -> Result<usize> {
        self.budget.ok_or(Error::ParameterOutOfRange {
            k: self.k,
            n: self.n,
        })
    }

    pub fn alpha(&self) -> Result<f64> {
        self.alpha.ok_or(Error::ParameterOutOfRange {
            k: self.k,
            n: self.n,
        })
    }
}

pub fn stats(instance: &Instance) -> InstanceStats {
    let (n, k) = (instance.num_customers(), instance.k());
    let max_degree = (0..instance.num_centers())
        .map(|i| instance.center_degree(i))
        .max()
        .unwrap_or(0);
    InstanceStats {
        n,
        m: instance.num_edges(),
        k,
        max_degree,
        harmonic_max_degree: harmonic(max_degree),
        budget: phase_one_budget(k, n).ok(),
        alpha: size_ratio(k, n).ok(),
    }
}

/// Best single center: minimum column sum over centers that serve every
/// customer, lowest id on ties. Exact for k = 1.
pub fn solve_k1(instance: &Instance) -> Result<usize> {
    let n = instance.num_customers();
    let mut best: Option<(usize, f64)> = None;
    for i in 0..instance.num_centers() {
        if instance.center_degree(i) != n {
            continue;
        }
        let total: f64 = instance.center_edges(i).map(|(_, c)| c).sum();
        if best.is_none_or(|(_, b)| total < b) {
            best = Some((i, total));
        }
    }
    best.map(|(i, _)| i)
        .ok_or_else(|| Error::Infeasible("no single center serves every customer".into()))
}

/// Each customer's cheapest center, deduplicated and sorted. Attains the
/// minimum possible cost `Σ_j min_i c_ij` over all center sets.
pub fn solve_large_k(instance: &Instance) -> Result<Vec<usize>> {
    instance.validate()?;
    let mut centers: Vec<usize> = (0..instance.num_customers())
        .filter_map(|j| instance.cheapest_center(j).map(|(i, _)| i))
        .collect();
    centers.sort_unstable();
    centers.dedup();
    Ok(centers)
}

/// A set system with a target cover size. Sets and elements are 0-based.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SetCoverInstance {
    pub num_elements: usize,
    pub k: usize,
    pub sets: Vec<Vec<usize>>,
}

/// One center per set, one customer per element, a zero-cost edge per
/// membership. A k-cover exists iff the instance has a zero-cost size-k
/// solution.
pub fn from_setcover(system: &SetCoverInstance) -> Result<Instance> {
    let mut covered = vec![false; system.num_elements];
    let mut edges = Vec::new();
    for (s, members) in system.sets.iter().enumerate() {
        for &e in members {
            if e >= system.num_elements {
                return Err(Error::BadIndex {
                    what: "element",
                    id: e,
                    limit: system.num_elements,
                });
            }
            covered[e] = true;
            edges.push((s, e, 0.0));
        }
    }
    if let Some(e) = covered.iter().position(|&c| !c) {
        return Err(Error::UncoverableElement(e));
    }
    Instance::new(system.sets.len(), system.num_elements, system.k, edges)
}

/// Inverse of [`from_setcover`] for zero-cost instances.
pub fn to_setcover(instance: &Instance) -> Result<SetCoverInstance> {
    let mut sets = vec![Vec::new(); instance.num_centers()];
    for e in instance.edges() {
        if e.cost != 0.0 {
            return Err(Error::BadParameters(format!(
                "edge ({}, {}) has nonzero cost {}; only zero-cost instances convert to set cover",
                e.center + 1,
                e.customer + 1,
                e.cost
            )));
        }
        sets[e.center].push(e.customer);
    }
    Ok(SetCoverInstance {
        num_elements: instance.num_customers(),
        k: instance.k(),
        sets,
    })
}
