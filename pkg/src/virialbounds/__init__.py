"""Certified convergence-radius bounds for cluster and virial expansions of repulsive gases."""
