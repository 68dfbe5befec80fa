import itertools

import numpy as np
import pytest

from ccce.game import Game
from ccce.vertiport import VertiportScenario, build_game, sample_sigmas, weights_from_sigmas


@pytest.fixture(scope="session")
def vertiport_game():
    return build_game(VertiportScenario(n=4, m=2, gamma=1.5))


def vertiport_instance(seed, gamma=1.5):
    """Sigmas and weights for a seeded 4-agent, 2-vertiport draw."""
    scen = VertiportScenario(n=4, m=2, gamma=gamma, seed=seed)
    sig = sample_sigmas(scen, np.random.default_rng(seed))
    return sig, weights_from_sigmas(sig)


def random_game(rng, counts, scale=10.0):
    return Game(tuple(counts), rng.uniform(-scale, scale, (len(counts), int(np.prod(counts)))))


def vertex_oracle(c, A_ub, b_ub, A_eq, b_eq):
    """Minimum of c @ z over {A_ub z <= b_ub, A_eq z = b_eq, z >= 0} by enumerating every basic point."""
    n = c.size
    rows = np.vstack([A_ub, -np.eye(n)])
    rhs = np.concatenate([b_ub, np.zeros(n)])
    need = n - A_eq.shape[0]
    best = np.inf
    best_z = None
    for tight in itertools.combinations(range(rows.shape[0]), need):
        M = np.vstack([A_eq, rows[list(tight)]])
        if abs(np.linalg.det(M)) < 1e-12:
            continue
        z = np.linalg.solve(M, np.concatenate([b_eq, rhs[list(tight)]]))
        if np.all(rows @ z <= rhs + 1e-10) and np.allclose(A_eq @ z, b_eq, atol=1e-10):
            v = float(c @ z)
            if v < best:
                best, best_z = v, z
    return best, best_z


ACCEPTANCE: dict[int, tuple[bool, str]] = {}


def record_acceptance(number: int, ok: bool, detail: str) -> bool:
    ACCEPTANCE[number] = (bool(ok), detail)
    return bool(ok)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[k]
        terminalreporter.write_line(f"criterion {k:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
