//! Stationary visit rates of the teleporting random surfer.

use thiserror::Error;

use crate::netcore::Network;
use crate::scalar::Scalar;

pub const DEFAULT_TOLERANCE: f64 = 1e-12;
pub const DEFAULT_MAX_ITERATIONS: usize = 10_000;

#[derive(Debug, Error, PartialEq)]
pub enum FlowError {
    #[error("teleportation probability {0} is outside [0, 1]")]
    InvalidTau(f64),
    #[error("undirected network has {0} connected components; with tau = 0 the visit rates are not unique")]
    Disconnected(usize),
    #[error("node {0} has no out-edges; dangling nodes need tau > 0")]
    Dangling(String),
    #[error("power iteration did not converge after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },
}

/// Visit rate per node together with the teleportation probability that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowDistribution<F = f64> {
    rates: Vec<F>,
    tau: F,
}

impl<F: Scalar> FlowDistribution<F> {
    pub fn rates(&self) -> &[F] {
        &self.rates
    }

    pub fn rate(&self, node: usize) -> F {
        self.rates[node]
    }

    pub fn tau(&self) -> F {
        self.tau
    }

    pub fn len(&self) -> usize {
        self.rates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rates.is_empty()
    }
}

/// Visit rates with the default tolerance and iteration cap.
pub fn stationary<F: Scalar>(network: &Network<F>, tau: F) -> Result<FlowDistribution<F>, FlowError> {
    stationary_distribution(network, tau, F::lit(DEFAULT_TOLERANCE), DEFAULT_MAX_ITERATIONS)
}

/// Fixed point of `p <- tau/n + (1 - tau) p W`.
///
/// Undirected networks at `tau = 0` use the exact strength-proportional
/// solution. Everything else runs power iteration from the uniform vector
/// until the L1 change drops below `tol`; dangling nodes teleport.
pub fn stationary_distribution<F: Scalar>(
    network: &Network<F>,
    tau: F,
    tol: F,
    max_iters: usize,
) -> Result<FlowDistribution<F>, FlowError> {
    if !(tau >= F::zero() && tau <= F::one()) {
        return Err(FlowError::InvalidTau(tau.as_f64()));
    }
    let n = network.node_count();
    if tau == F::zero() {
        if let Some(&v) = network.dangling_nodes().first() {
            return Err(FlowError::Dangling(network.ids()[v].clone()));
        }
        if !network.is_directed() {
            let (components, _) = network.components();
            if components > 1 {
                return Err(FlowError::Disconnected(components));
            }
            return Ok(FlowDistribution {
                rates: strength_proportional(network),
                tau,
            });
        }
    }
    let uniform = F::one() / F::from_count(n);
    if tau == F::one() {
        return Ok(FlowDistribution {
            rates: vec![uniform; n],
            tau,
        });
    }
    let rates = power_iteration(network, tau, tol, max_iters)?;
    Ok(FlowDistribution { rates, tau })
}

fn strength_proportional<F: Scalar>(network: &Network<F>) -> Vec<F> {
    let strengths: Vec<F> = (0..network.node_count()).map(|v| network.strength(v)).collect();
    let total: F = strengths.iter().copied().sum();
    strengths.into_iter().map(|s| s / total).collect()
}

fn power_iteration<F: Scalar>(
    network: &Network<F>,
    tau: F,
    tol: F,
    max_iters: usize,
) -> Result<Vec<F>, FlowError> {
    let n = network.node_count();
    let n_f = F::from_count(n);
    let dangling = network.dangling_nodes();
    let mut rates = vec![F::one() / n_f; n];
    let mut next = vec![F::zero(); n];
    let mut residual = F::infinity();
    for _ in 0..max_iters {
        let dangling_mass: F = dangling.iter().map(|&v| rates[v]).sum();
        let base = (tau + (F::one() - tau) * dangling_mass) / n_f;
        next.iter_mut().for_each(|x| *x = base);
        for (v, &rate) in rates.iter().enumerate() {
            let carried = (F::one() - tau) * rate;
            for (t, w) in network.out_edges(v) {
                next[t] = next[t] + carried * w;
            }
        }
        let total: F = next.iter().copied().sum();
        next.iter_mut().for_each(|x| *x = *x / total);
        residual = rates
            .iter()
            .zip(&next)
            .map(|(&a, &b)| (a - b).abs())
            .sum();
        std::mem::swap(&mut rates, &mut next);
        if residual < tol {
            return Ok(rates);
        }
    }
    Err(FlowError::NoConvergence {
        iterations: max_iters,
        residual: residual.as_f64(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netcore::parse_edge_list;

    fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() < tol)
    }

    #[test]
    fn two_node_edge_is_symmetric() {
        let net: Network = parse_edge_list("0 1\n", false).unwrap();
        let flow = stationary(&net, 0.0).unwrap();
        assert_eq!(flow.rates(), &[0.5, 0.5]);
    }

    #[test]
    fn star_is_strength_proportional() {
        let net: Network = parse_edge_list("0 1\n0 2\n0 3\n", false).unwrap();
        let flow = stationary(&net, 0.0).unwrap();
        let sixth = 1.0 / 6.0;
        assert!(close(flow.rates(), &[0.5, sixth, sixth, sixth], 1e-15));
    }

    #[test]
    fn directed_cycle_with_teleportation_is_uniform() {
        let net: Network = parse_edge_list("0 1\n1 2\n2 0\n", true).unwrap();
        let flow = stationary(&net, 0.15).unwrap();
        let third = 1.0 / 3.0;
        assert!(close(flow.rates(), &[third; 3], 1e-12));
    }

    #[test]
    fn full_teleportation_is_uniform() {
        let net: Network = parse_edge_list("0 1 5\n1 2\n2 3\n", true).unwrap();
        let flow = stationary(&net, 1.0).unwrap();
        assert_eq!(flow.rates(), &[0.25; 4]);
    }

    #[test]
    fn power_iteration_matches_closed_form() {
        let net: Network = parse_edge_list("0 1 2\n1 2 1\n2 0 1\n2 3 3\n3 4 1\n4 2 0.5\n", false).unwrap();
        let exact = stationary(&net, 0.0).unwrap();
        // tiny teleportation keeps the iteration aperiodic while staying within tolerance
        let iterated = power_iteration(&net, 1e-14, 1e-14, 100_000).unwrap();
        assert!(close(exact.rates(), &iterated, 1e-9));
    }

    #[test]
    fn topology_errors() {
        let split: Network = parse_edge_list("0 1\n2 3\n", false).unwrap();
        assert_eq!(stationary(&split, 0.0).unwrap_err(), FlowError::Disconnected(2));
        assert!(stationary(&split, 0.1).is_ok());

        let dangling: Network = parse_edge_list("0 1\n1 2\n", true).unwrap();
        assert!(matches!(stationary(&dangling, 0.0), Err(FlowError::Dangling(_))));
        let flow = stationary(&dangling, 0.15).unwrap();
        assert!((flow.rates().iter().sum::<f64>() - 1.0).abs() < 1e-10);

        assert!(matches!(stationary(&split, 1.5), Err(FlowError::InvalidTau(_))));
    }

    #[test]
    fn reports_non_convergence() {
        let net: Network = parse_edge_list("0 1\n1 2\n2 0\n0 2\n", true).unwrap();
        let err = stationary_distribution(&net, 0.0, 1e-300, 3).unwrap_err();
        assert!(matches!(err, FlowError::NoConvergence { iterations: 3, .. }));
    }

    #[test]
    fn works_in_single_precision() {
        let net: Network<f32> = parse_edge_list("0 1\n1 2\n2 0\n", true).unwrap();
        let flow = stationary_distribution(&net, 0.15_f32, 1e-6, 1000).unwrap();
        assert!(flow.rates().iter().all(|&p| (p - 1.0 / 3.0).abs() < 1e-5));
    }
}
