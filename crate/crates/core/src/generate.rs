//! Seeded random instance generators.

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};

use crate::error::{Error, Result};
use crate::instance::Instance;

/// Probability that a non-planted center is linked to a customer.
const PLANTED_NOISE_DENSITY: f64 = 0.4;

/// Each customer is linked to `Binomial(num_centers, density)` distinct
/// centers (at least one) with i.i.d. costs uniform in `[0, 1)`.
pub fn gen_uniform(
    num_centers: usize,
    num_customers: usize,
    density: f64,
    k: usize,
    seed: u64,
) -> Result<Instance> {
    if num_centers == 0 || num_customers == 0 {
        return Err(Error::BadParameters("empty side".into()));
    }
    if !(density > 0.0 && density <= 1.0) {
        return Err(Error::BadParameters(format!(
            "density {density} outside (0, 1]"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let degree = Binomial::new(num_centers as u64, density)
        .map_err(|e| Error::BadParameters(e.to_string()))?;
    let mut edges = Vec::new();
    for j in 0..num_customers {
        let d = (degree.sample(&mut rng) as usize).max(1);
        for i in index::sample(&mut rng, num_centers, d) {
            edges.push((i, j, rng.random::<f64>()));
        }
    }
    Instance::new(num_centers, num_customers, k, edges)
}

/// [`gen_uniform`] noise plus a hidden backbone: `k` random centers, each
/// customer linked to one of them at a uniform `[0, 1)` cost. The backbone
/// keeps a finite size-k solution at any density, which scaling sweeps need
/// at sparse settings.
pub fn gen_backbone(
    num_centers: usize,
    num_customers: usize,
    density: f64,
    k: usize,
    seed: u64,
) -> Result<Instance> {
    if k == 0 || k > num_centers {
        return Err(Error::BadParameters(format!(
            "need 1 <= k <= num_centers, got k = {k}, num_centers = {num_centers}"
        )));
    }
    let noise = gen_uniform(num_centers, num_customers, density, k, seed)?;
    // a stream the noise generator never touches
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(1);
    let backbone = index::sample(&mut rng, num_centers, k).into_vec();
    let mut edges: Vec<(usize, usize, f64)> = noise
        .edges()
        .map(|e| (e.center, e.customer, e.cost))
        .collect();
    for j in 0..num_customers {
        let i = backbone[rng.random_range(0..k)];
        edges.push((i, j, rng.random::<f64>()));
    }
    Instance::new(num_centers, num_customers, k, edges)
}

/// An instance with a known optimal center set.
#[derive(Debug, Clone)]
pub struct PlantedInstance {
    pub instance: Instance,
    /// Sorted planted center ids.
    pub planted: Vec<usize>,
    /// Cost of the planted set, `num_customers · planted_cost`.
    pub planted_cost: f64,
}

/// Every customer gets an edge of cost `planted_cost` to one of `k`
/// planted centers; all other edges cost strictly more, so the planted set
/// attains `Σ_j min_i c_ij` and is optimal.
pub fn gen_planted(
    num_centers: usize,
    num_customers: usize,
    k: usize,
    planted_cost: f64,
    seed: u64,
) -> Result<PlantedInstance> {
    if k == 0 || k > num_centers || num_customers == 0 {
        return Err(Error::BadParameters(format!(
            "need 1 <= k <= num_centers, got k = {k}, num_centers = {num_centers}"
        )));
    }
    if !(planted_cost.is_finite() && planted_cost >= 0.0) {
        return Err(Error::BadParameters(format!(
            "planted cost {planted_cost} must be finite and nonnegative"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut planted = index::sample(&mut rng, num_centers, k).into_vec();
    planted.sort_unstable();

    let mut edges = Vec::new();
    for j in 0..num_customers {
        // the first k customers pin one planted center each
        let home = if j < k {
            planted[j]
        } else {
            planted[rng.random_range(0..k)]
        };
        edges.push((home, j, planted_cost));
        for i in (0..num_centers).filter(|&i| i != home) {
            if rng.random_bool(PLANTED_NOISE_DENSITY) {
                let extra = 0.05 + 0.95 * rng.random::<f64>();
                edges.push((i, j, planted_cost + extra));
            }
        }
    }
    let instance = Instance::new(num_centers, num_customers, k, edges)?;
    let planted_cost = instance.cost_of(&planted);
    Ok(PlantedInstance {
        instance,
        planted,
        planted_cost,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_density_one_is_complete() {
        let inst = gen_uniform(5, 12, 1.0, 2, 1).unwrap();
        assert_eq!(inst.num_edges(), 60);
        assert!(inst.edges().all(|e| (0.0..1.0).contains(&e.cost)));
    }

    #[test]
    fn uniform_is_deterministic_and_feasible() {
        let a = gen_uniform(20, 50, 0.05, 3, 9).unwrap();
        let b = gen_uniform(20, 50, 0.05, 3, 9).unwrap();
        assert_eq!(a, b);
        a.validate().unwrap();
        assert_ne!(a, gen_uniform(20, 50, 0.05, 3, 10).unwrap());
    }

    #[test]
    fn uniform_rejects_bad_density() {
        assert!(gen_uniform(5, 5, 0.0, 1, 0).is_err());
        assert!(gen_uniform(5, 5, 1.5, 1, 0).is_err());
        assert!(gen_uniform(0, 5, 0.5, 1, 0).is_err());
    }

    #[test]
    fn backbone_is_feasible_when_sparse() {
        let inst = gen_backbone(200, 400, 0.001, 4, 5).unwrap();
        assert_eq!(inst, gen_backbone(200, 400, 0.001, 4, 5).unwrap());
        let opt = crate::solver::solve(&inst, crate::solver::Mode::Fast).unwrap();
        assert!(opt.cost.is_finite());
        assert!(gen_backbone(3, 4, 0.5, 4, 0).is_err());
    }

    #[test]
    fn planted_zero_cost() {
        let p = gen_planted(8, 15, 3, 0.0, 7).unwrap();
        assert_eq!(p.planted.len(), 3);
        assert_eq!(p.planted_cost, 0.0);
        assert_eq!(p.instance.cost_of(&p.planted), 0.0);
        assert!(p
            .instance
            .edges()
            .filter(|e| !p.planted.contains(&e.center))
            .all(|e| e.cost > 0.0));
    }

    #[test]
    fn planted_cost_matches_and_other_edges_costlier() {
        let p = gen_planted(6, 10, 2, 0.25, 3).unwrap();
        assert!((p.planted_cost - 2.5).abs() < 1e-12);
        for j in 0..10 {
            let (_, best) = p.instance.cheapest_center(j).unwrap();
            assert_eq!(best, 0.25);
            let at_best = p.instance.customer_edges(j).filter(|&(_, c)| c == 0.25).count();
            assert_eq!(at_best, 1);
        }
        let q = gen_planted(6, 10, 2, 0.25, 3).unwrap();
        assert_eq!(p.instance, q.instance);
        assert!(gen_planted(3, 5, 4, 0.0, 0).is_err());
    }
}
