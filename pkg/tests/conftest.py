"""Shared fixtures: small reference models and kernel warm-up."""

import numpy as np
import pytest

from bn2pscm import _kernels
from bn2pscm.bn import BnModel, Cpt, Variable
from bn2pscm.pscm import PscmModel


@pytest.fixture(scope="session", autouse=True)
def _warm_kernels():
    # compile (or load from disk cache) the jitted kernels once, so
    # per-test timing bounds never include compilation
    _kernels.warm_up()


@pytest.fixture
def sec2_bn():
    """Two-variable model: B follows T almost surely."""
    return BnModel(
        variables=(Variable("T", ("y", "n")), Variable("B", ("n", "y"))),
        parents={"T": (), "B": ("T",)},
        cpts={
            "T": Cpt.build("T", (), (), np.array([[0.5, 0.5]])),
            "B": Cpt.build("B", ("T",), (("y", "n"),),
                           np.array([[0.99, 0.01], [0.01, 0.99]])),
        },
    )


@pytest.fixture
def ex1_bn():
    """Like sec2_bn but with non-complementary conditionals (0.99, 0.1)."""
    return BnModel(
        variables=(Variable("T", ("y", "n")), Variable("B", ("n", "y"))),
        parents={"T": (), "B": ("T",)},
        cpts={
            "T": Cpt.build("T", (), (), np.array([[0.5, 0.5]])),
            "B": Cpt.build("B", ("T",), (("y", "n"),),
                           np.array([[0.99, 0.01], [0.1, 0.9]])),
        },
    )


def _pscm_for(dist, t_rows, b_rows, exo_domain):
    t = Variable("T", ("y", "n"))
    b = Variable("B", ("n", "y"))
    u_t = Variable("U_T", ("y", "n"))
    r = Variable("R", exo_domain)
    return PscmModel(
        endogenous=(t, b),
        exogenous=(u_t, r),
        exo_dists={"U_T": np.array([0.5, 0.5]), "R": np.array(dist)},
        det_cpts={
            "T": Cpt.build("T", ("U_T",), (("y", "n"),), np.array(t_rows)),
            "B": Cpt.build("B", ("T", "R"), (("y", "n"), exo_domain),
                           np.array(b_rows)),
        },
        exo_attach={"T": "U_T", "B": "R"},
    )


@pytest.fixture
def sec2_pscm():
    """Hand-built equivalent of sec2_bn: B = n iff T agrees with R."""
    return _pscm_for(
        (0.99, 0.01),
        [[1, 0], [0, 1]],
        [
            [1, 0],  # T=y, R=y
            [0, 1],  # T=y, R=n
            [0, 1],  # T=n, R=y
            [1, 0],  # T=n, R=n
        ],
        ("y", "n"),
    )


@pytest.fixture
def ex1_pscm():
    """Hand-built equivalent of ex1_bn with a three-valued exogenous R."""
    return _pscm_for(
        (0.9, 0.09, 0.01),
        [[1, 0], [0, 1]],
        [
            [1, 0],  # T=y, R=one
            [1, 0],  # T=y, R=two
            [0, 1],  # T=y, R=three
            [0, 1],  # T=n, R=one
            [1, 0],  # T=n, R=two
            [1, 0],  # T=n, R=three
        ],
        ("one", "two", "three"),
    )


@pytest.fixture
def ex2_pscm():
    """Alternative equivalent of ex1_bn: dist (0.89, 0.1, 0.01)."""
    return _pscm_for(
        (0.89, 0.1, 0.01),
        [[1, 0], [0, 1]],
        [
            [1, 0],  # T=y, R=one
            [1, 0],  # T=y, R=two
            [0, 1],  # T=y, R=three
            [0, 1],  # T=n, R=one
            [1, 0],  # T=n, R=two
            [0, 1],  # T=n, R=three
        ],
        ("one", "two", "three"),
    )
