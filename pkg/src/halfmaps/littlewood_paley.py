"""Dyadic frequency decomposition and Bony-type paraproducts on the circle."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError
from .spectral import (
    Field,
    PeriodicGrid,
    _check_same_grid,
    _from_padded,
    _pad_spectrum,
    fourier_multiplier,
)


def phi(x: np.ndarray) -> np.ndarray:
    """Raised-cosine cutoff: 1 on ``|x| <= 1``, 0 on ``|x| >= 2``, ``cos^2`` taper between."""
    ax = np.abs(np.asarray(x, dtype=float))
    out = np.cos(0.5 * np.pi * np.clip(ax - 1.0, 0.0, 1.0)) ** 2
    out[ax >= 2.0] = 0.0
    out[ax <= 1.0] = 1.0
    return out


@dataclass(frozen=True)
class DyadicFamily:
    """Littlewood-Paley cutoffs adapted to a grid.

    Block ``j_min`` is the low-frequency part ``phi_{j_min}``; blocks
    ``j_min+1 .. j_max`` are the bands ``psi_j = phi_j - phi_{j-1}`` with
    ``phi_j(n) = phi(n / 2^j)``.  The default ``j_max = log2(N) - 1`` makes
    ``phi_{j_max} = 1`` on every representable frequency, so the blocks sum to
    the identity exactly.

    ``offset`` is the separation ``s`` in the paraproducts: high-low pairs have
    ``k <= j - s``, and the diagonal part keeps ``|k - j| <= s - 1``.
    """

    grid: PeriodicGrid
    j_min: int = 0
    j_max: int | None = None
    offset: int = 4

    def __post_init__(self) -> None:
        full = int(np.log2(self.grid.n_points)) - 1
        j_max = full if self.j_max is None else int(self.j_max)
        if j_max < full:
            raise InvalidInputError(
                f"j_max={j_max} does not cover frequencies up to N/2 (need >= {full})"
            )
        if self.j_min < 0 or self.j_min >= j_max:
            raise InvalidInputError(f"need 0 <= j_min < j_max, got {self.j_min}, {j_max}")
        if self.offset < 1:
            raise InvalidInputError(f"paraproduct offset must be >= 1, got {self.offset}")
        object.__setattr__(self, "j_max", j_max)

    @property
    def indices(self) -> range:
        return range(self.j_min, self.j_max + 1)

    def low_symbol(self, j: int) -> np.ndarray:
        """``phi_j`` on the grid frequencies (zero below ``j_min``)."""
        n = self.grid.freqs.astype(float)
        if j < self.j_min:
            return np.zeros_like(n)
        return phi(n / 2.0**j)

    def band_symbol(self, j: int) -> np.ndarray:
        """``psi_j`` for ``j > j_min``; the low cutoff for ``j == j_min``."""
        self._check(j)
        if j == self.j_min:
            return self.low_symbol(j)
        return self.low_symbol(j) - self.low_symbol(j - 1)

    def _check(self, j: int) -> None:
        if j not in self.indices:
            raise InvalidInputError(f"block index {j} outside [{self.j_min}, {self.j_max}]")

    def band_support(self, j: int) -> tuple[float, float]:
        """Closed frequency interval ``[lo, hi]`` containing the support of block ``j``."""
        self._check(j)
        lo = 0.0 if j == self.j_min else 2.0 ** (j - 1)
        return lo, 2.0 ** (j + 1)


def project(field: Field, family: DyadicFamily, j: int) -> Field:
    """``P_j f``: the ``j``-th dyadic block (the low block when ``j == j_min``)."""
    _check_family(field, family)
    return fourier_multiplier(field, family.band_symbol(j))


def project_low(field: Field, family: DyadicFamily, j: int) -> Field:
    """``P_{<=j} f`` with symbol ``phi_j``; zero for ``j < j_min``."""
    _check_family(field, family)
    if j > family.j_max:
        raise InvalidInputError(f"block index {j} above j_max={family.j_max}")
    return fourier_multiplier(field, family.low_symbol(j))


def decompose(field: Field, family: DyadicFamily) -> dict[int, Field]:
    """All blocks ``{j: P_j f}``, summing to ``f``."""
    return {j: project(field, family, j) for j in family.indices}


def _check_family(field: Field, family: DyadicFamily) -> None:
    if field.grid != family.grid:
        raise InvalidInputError("dyadic family was built for a different grid")


# --------------------------------------------------------------------------- paraproducts


def _padded_blocks(field: Field, family: DyadicFamily) -> dict[int, np.ndarray]:
    """Blocks of ``field`` resampled on the 2x grid (components first)."""
    n = field.grid.n_points
    out = {}
    for j in family.indices:
        spec = field.spectrum * family.band_symbol(j)
        vals = np.fft.ifft(_pad_spectrum(spec, n), axis=-1) * (2 * n)
        out[j] = vals.real if field.is_real else vals
    return out


def _pairs(family: DyadicFamily, which: int) -> list[tuple[int, list[int]]]:
    """For each high block ``j``, the blocks ``k`` of the other factor paired with it."""
    s = family.offset
    idx = list(family.indices)
    if which in (1, 2):
        return [(j, [k for k in idx if k <= j - s]) for j in idx]
    if which == 3:
        return [(j, [k for k in idx if abs(k - j) <= s - 1]) for j in idx]
    raise InvalidInputError(f"paraproduct index must be 1, 2 or 3, got {which}")


def _check_pair(f: Field, g: Field, family: DyadicFamily) -> None:
    _check_same_grid(f, g)
    _check_family(f, family)
    if f.m != g.m and 1 not in (f.m, g.m):
        raise InvalidInputError(f"component mismatch: {f.m} vs {g.m}")


def paraproduct_terms(f: Field, g: Field, family: DyadicFamily, which: int) -> dict[int, Field]:
    """Individual summands of ``Pi_which(f, g)`` keyed by the block index of the
    high-frequency factor.

    * ``Pi_1``: ``f_j g^{j-s}``
    * ``Pi_2``: ``g_j f^{j-s}``
    * ``Pi_3``: ``f_j sum_{|k-j| <= s-1} g_k``

    Each summand is formed on the 2x grid and truncated, so no aliasing enters.
    Empty summands are omitted.
    """
    _check_pair(f, g, family)
    fb = _padded_blocks(f, family)
    gb = _padded_blocks(g, family)
    real = f.is_real and g.is_real
    terms: dict[int, Field] = {}
    for j, ks in _pairs(family, which):
        if not ks:
            continue
        terms[j] = _from_padded(_summand(fb, gb, j, ks, which), f.grid, real)
    return terms


def _summand(fb: dict, gb: dict, j: int, ks: list[int], which: int) -> np.ndarray:
    if which == 2:
        return gb[j] * sum(fb[k] for k in ks)
    return fb[j] * sum(gb[k] for k in ks)


def paraproduct(f: Field, g: Field, family: DyadicFamily, which: int) -> Field:
    """``Pi_1``, ``Pi_2`` or ``Pi_3``; the three sum to the dealiased product ``f g``."""
    _check_pair(f, g, family)
    fb = _padded_blocks(f, family)
    gb = _padded_blocks(g, family)
    total = 0.0
    for j, ks in _pairs(family, which):
        if not ks:
            continue
        total = total + _summand(fb, gb, j, ks, which)
    if np.isscalar(total):
        m = max(f.m, g.m)
        dtype = float if (f.is_real and g.is_real) else complex
        return Field(f.grid, np.zeros((m, f.grid.n_points), dtype=dtype))
    return _from_padded(total, f.grid, f.is_real and g.is_real)
