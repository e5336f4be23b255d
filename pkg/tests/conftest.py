"""Shared test helpers."""

import numpy as np


def assert_spectra_match(a, b, tol=1e-8):
    """Assert two eigenvalue multisets agree within tol (greedy matching)."""
    a = list(map(complex, a))
    b = list(map(complex, b))
    assert len(a) == len(b)
    remaining = list(b)
    for z in a:
        dists = [abs(z - w) for w in remaining]
        k = int(np.argmin(dists))
        assert dists[k] < tol, f"no partner for {z} within {tol}: {remaining}"
        remaining.pop(k)
