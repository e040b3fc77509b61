import numpy as np
import pytest

from src.services.experiment_service import identity_suite
from src.services.mcp_service import McpService


@pytest.fixture(scope="module")
def report():
    return identity_suite(np.random.default_rng(7), trials=30)


@pytest.mark.parametrize("name", [
    "multi_affinity", "symmetry", "unitary_invariance", "shift", "orthogonal_product", "maxroot_equals_trace",
])
def test_identities_hold(report, name):
    row = report[name]
    assert row["trials"] > 0
    assert row["violations"] == 0, row


@pytest.mark.parametrize("name", [
    "norm_bound", "root_bound", "monotonicity", "block_estimate", "perturbation",
])
def test_inequalities_hold(report, name):
    assert report[name]["violations"] == 0, report[name]


def test_suite_is_seeded():
    a = identity_suite(np.random.default_rng(3), trials=3)
    b = identity_suite(np.random.default_rng(3), trials=3)
    assert a == b


def test_shift_identity_by_hand():
    a = [np.diag([0.5, 0.25]), np.diag([0.25, 0.5])]
    delta = 0.3
    augmented = []
    for i, m in enumerate(a):
        e = np.zeros((2, 2))
        e[i, i] = delta
        augmented.append(np.block([[e, np.zeros((2, 2))], [np.zeros((2, 2)), m]]))
    lhs = McpService.reduced_mcp(augmented, 4)
    rhs = McpService.reduced_mcp(a, 2).shifted(delta)
    assert lhs.allclose(rhs, 1e-9)
