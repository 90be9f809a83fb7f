"""Shared helpers for the test suite."""

import sys

import numpy as np
import pytest

from dipolebands import build_lattice, reciprocal


def pytest_terminal_summary(terminalreporter):
    """Replay the acceptance verdict lines after capture has ended."""
    for name in ("tests.test_acceptance", "test_acceptance"):
        mod = sys.modules.get(name)
        if mod is not None and getattr(mod, "VERDICTS", None):
            terminalreporter.section("acceptance criteria")
            for line in mod.VERDICTS:
                terminalreporter.write_line(line)
            break


@pytest.fixture
def iso_lattice():
    """Isotropic reference lattice, d0 = 0.1, beta = 1."""
    return build_lattice(0.1, 1.0)


def dist_mod_g(recip, k, target, shells: int = 2) -> float:
    """Distance from k to target modulo reciprocal vectors."""
    k = np.asarray(k, dtype=float)
    target = np.asarray(target, dtype=float)
    best = np.inf
    for i in range(-shells, shells + 1):
        for j in range(-shells, shells + 1):
            g = i * recip.b1 + j * recip.b2
            best = min(best, float(np.linalg.norm(k + g - target)))
    return best


def spectrum(spec, k, mode="retarded"):
    """Sorted detunings of the full 6x6 problem at one k."""
    from dipolebands import assemble, eigensolve

    bs = eigensolve(assemble(spec, k, mode=mode))
    return np.sort(bs.detuning)
