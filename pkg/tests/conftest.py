from __future__ import annotations

import math

import numpy as np
import pytest

from halfmaps.spectral import Field, PeriodicGrid


@pytest.fixture
def grid64() -> PeriodicGrid:
    return PeriodicGrid(64)


@pytest.fixture
def grid256() -> PeriodicGrid:
    return PeriodicGrid(256)


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240611)


def mode(grid: PeriodicGrid, n: int, amplitude: complex = 1.0) -> Field:
    """Single complex Fourier mode ``amplitude * e^{i n theta}``."""
    return Field(grid, amplitude * np.exp(1j * n * grid.nodes))


def smooth_real(grid: PeriodicGrid, rng: np.random.Generator, n_max: int = 12, m: int = 1) -> Field:
    """Real trigonometric polynomial of degree ``n_max`` with random coefficients."""
    spec = np.zeros((m, grid.n_points), dtype=complex)
    ks = np.arange(1, n_max + 1)
    c = rng.standard_normal((m, n_max)) + 1j * rng.standard_normal((m, n_max))
    spec[:, ks] = c
    spec[:, -ks] = np.conj(c)
    spec[:, 0] = rng.standard_normal(m)
    return Field(grid, np.fft.ifft(spec, axis=-1).real * grid.n_points)


def layer_cake(values: np.ndarray, weight: float) -> tuple[float, float]:
    """Independent Lorentz oracle: integrate the distribution function level by level."""
    mag = np.abs(values)
    levels = np.unique(np.concatenate([[0.0], mag]))
    l21 = 0.0
    l2inf = 0.0
    for lo, hi in zip(levels[:-1], levels[1:]):
        # On (lo, hi] the set {|f| >= lambda} is {|f| >= hi}.
        mu = weight * np.count_nonzero(mag >= hi)
        l21 += (hi - lo) * np.sqrt(mu)
        l2inf = max(l2inf, hi * np.sqrt(mu))
    return l21, l2inf


def sgn(x: int) -> int:
    return (x > 0) - (x < 0)


def single_mode_oracle(p: int, q: int) -> dict[str, complex]:
    """Coefficient of e^{i(p+q)theta} in each operator, from scalar symbol arithmetic.

    Symbols: D = |n|^{1/2}, D^2 = |n|, R = -i sign(n), d/dtheta = i n.
    """
    n = p + q
    d = lambda k: math.sqrt(abs(k))
    r = lambda k: -1j * sgn(k)
    first = d(n) * d(q)
    naive = first
    t_tilde = first - abs(q)
    t = t_tilde + d(p) * d(q)
    s_tilde = first - r(n) * (1j * q)
    s = s_tilde + r(n) * d(p) * r(q) * d(q)
    return {"naive": naive, "T_tilde": t_tilde, "T": t, "S_tilde": s_tilde, "S": s}


_VERDICTS: dict[int, str] = {}


@pytest.fixture
def verdict():
    """Record and print the one-line outcome of an acceptance criterion."""

    def record(number: int, passed: bool, detail: str) -> bool:
        line = f"criterion {number:2d}: {'PASS' if passed else 'FAIL'}  {detail}"
        _VERDICTS[number] = line
        print(line)
        return passed

    return record


def pytest_terminal_summary(terminalreporter) -> None:
    if _VERDICTS:
        terminalreporter.write_sep("=", "acceptance criteria")
        for k in sorted(_VERDICTS):
            terminalreporter.write_line(_VERDICTS[k])
