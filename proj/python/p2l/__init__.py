"""Pick-to-Learn risk certificates and benchmark experiments."""

from ._core import (
    ChristoffelModel,
    SingularMomentMatrix,
    __version__,
    basis_size,
    binomial_tail_inversion,
    conformal_eps,
    duffing_terminal,
    eps_bar,
    fit_christoffel,
    incomplete_beta,
    oc_p2l,
    psi,
    reach_p2l,
    rollout_cost,
    run_experiment,
    run_p2l,
    terminal_states,
)

__all__ = [
    "ChristoffelModel",
    "SingularMomentMatrix",
    "__version__",
    "basis_size",
    "binomial_tail_inversion",
    "conformal_eps",
    "duffing_terminal",
    "eps_bar",
    "fit_christoffel",
    "incomplete_beta",
    "oc_p2l",
    "psi",
    "reach_p2l",
    "rollout_cost",
    "run_experiment",
    "run_p2l",
    "terminal_states",
]
