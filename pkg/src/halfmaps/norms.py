"""Scalar functionals on fields: Sobolev, Lebesgue, Lorentz, Hardy and Besov norms.

Every norm of a vector-valued field is taken of its pointwise Euclidean
magnitude, except the Sobolev forms, which sum their squares over components.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from enum import Enum
from typing import Iterable, Sequence

import numpy as np

from .errors import InvalidInputError
from .littlewood_paley import DyadicFamily, project, project_low
from .spectral import Field, _check_zero_mode, frac_laplacian, frac_symbol


class NormKind(str, Enum):
    LEBESGUE = "lebesgue"
    SOBOLEV = "sobolev"
    GAGLIARDO_HALF = "gagliardo_half"
    LORENTZ_2INF = "lorentz_2inf"
    LORENTZ_21 = "lorentz_21"
    HARDY_PROXY = "hardy_proxy"
    BESOV_0_INF_INF = "besov_0_inf_inf"


@dataclass(frozen=True)
class NormSpec:
    """A norm choice with its exponent, e.g. ``NormSpec("sobolev", s=-0.5)``."""

    kind: NormKind
    p: float | None = None
    s: float | None = None
    scales: tuple[float, ...] | None = dc_field(default=None, compare=False)

    def __post_init__(self) -> None:
        kind = NormKind(self.kind)
        object.__setattr__(self, "kind", kind)
        if kind is NormKind.LEBESGUE:
            if self.p is None or not (self.p >= 1):
                raise InvalidInputError(f"lebesgue norm needs p >= 1, got {self.p}")
        if kind is NormKind.SOBOLEV:
            if self.s is None or not (-1.0 <= self.s <= 1.0):
                raise InvalidInputError(f"sobolev norm needs s in [-1, 1], got {self.s}")

    @property
    def label(self) -> str:
        if self.kind is NormKind.LEBESGUE:
            return f"L^{self.p:g}"
        if self.kind is NormKind.SOBOLEV:
            return f"H^{self.s:g}"
        return self.kind.value

    def evaluate(self, field: Field) -> float:
        k = self.kind
        if k is NormKind.LEBESGUE:
            return lebesgue(field, self.p)
        if k is NormKind.SOBOLEV:
            return sobolev_seminorm(field, self.s)
        if k is NormKind.GAGLIARDO_HALF:
            return gagliardo_half(field)
        if k is NormKind.LORENTZ_2INF:
            return lorentz(field, "2inf")
        if k is NormKind.LORENTZ_21:
            return lorentz(field, "21")
        if k is NormKind.HARDY_PROXY:
            return hardy_proxy(field, self.scales)
        return besov_0_inf_inf(field, DyadicFamily(field.grid))


# --------------------------------------------------------------------------- Sobolev


def sobolev_seminorm_squared(field: Field, s: float) -> float:
    """``2 pi sum_n |n|^{2s} |u_hat[n]|^2`` summed over components."""
    s = float(s)
    if not -1.0 <= s <= 1.0:
        raise InvalidInputError(f"s must lie in [-1, 1], got {s}")
    if s < 0:
        _check_zero_mode(field)
    weights = frac_symbol(field.grid, s)
    return float(2.0 * np.pi * np.sum(weights * np.sum(np.abs(field.spectrum) ** 2, axis=0)))


def sobolev_seminorm(field: Field, s: float) -> float:
    """Homogeneous Sobolev seminorm; the zero mode is ignored (and must vanish if ``s < 0``)."""
    return float(np.sqrt(sobolev_seminorm_squared(field, s)))


def gagliardo_half(field: Field, diagonal: str = "limit") -> float:
    """Square root of the double integral of ``|u(x)-u(y)|^2 / d(x,y)^2``.

    ``d`` is the chordal distance ``2|sin((x-y)/2)|``.  The off-diagonal part
    is a product-trapezoid sum computed shift by shift through the FFT
    autocorrelation of each component.  On the diagonal the integrand has the
    removable value ``|u'(x)|^2``:

    ``diagonal="limit"``
        fill it with the spectral ``|u'|^2``, which makes the quadrature exact
        for band-limited fields (the trapezoid rule is exact on trigonometric
        polynomials of the resulting degree);
    ``diagonal="exclude"``
        drop the diagonal cells, which under-counts by roughly
        ``mean frequency / N`` in relative terms.
    """
    if diagonal not in ("limit", "exclude"):
        raise InvalidInputError(f"diagonal must be 'limit' or 'exclude', got {diagonal!r}")
    grid = field.grid
    n = grid.n_points
    w = grid.measure_weight
    vals = field.values
    # sum_k |u(k+l) - u(k)|^2 = 2 sum|u|^2 - 2 Re autocorr(l)
    energy = np.sum(np.abs(vals) ** 2)
    auto = np.fft.ifft(np.abs(np.fft.fft(vals, axis=-1)) ** 2, axis=-1).real.sum(axis=0)
    diff_sq = np.maximum(2.0 * energy - 2.0 * auto, 0.0)
    shifts = np.arange(1, n)
    kernel = 1.0 / (4.0 * np.sin(np.pi * shifts / n) ** 2)
    total = w * w * float(np.sum(diff_sq[1:] * kernel))
    if diagonal == "limit":
        n_sq = grid.freqs.astype(float) ** 2
        n_sq[grid.nyquist] = 0.0
        total += w * w * n * float(np.sum(n_sq * np.sum(np.abs(field.spectrum) ** 2, axis=0)))
    return float(np.sqrt(total))


# --------------------------------------------------------------------------- Lebesgue


def lebesgue(field: Field, p: float) -> float:
    """``L^p`` norm of the pointwise magnitude (``p = inf`` allowed)."""
    if not p >= 1:
        raise InvalidInputError(f"p must be >= 1, got {p}")
    mag = field.pointwise_norm()
    if np.isinf(p):
        return float(np.max(mag))
    return float((field.grid.measure_weight * np.sum(mag**p)) ** (1.0 / p))


# --------------------------------------------------------------------------- Lorentz


def lorentz_from_samples(values: np.ndarray, weight: float, kind: str) -> float:
    """Lorentz norm of a step function with magnitudes ``|values|`` on cells of measure ``weight``.

    With ``f*`` the decreasing rearrangement and ``mu_k = k * weight`` the
    cumulative measure,

    * ``L^{2,inf} = max_k f*_k mu_k^{1/2}``
    * ``L^{2,1} = sum_k (f*_k - f*_{k+1}) mu_k^{1/2}``  (layer-cake sum, ``f*_{M+1} = 0``)
    """
    mag = np.sort(np.abs(np.asarray(values, dtype=complex if np.iscomplexobj(values) else float)).ravel())[::-1]
    if mag.size == 0:
        return 0.0
    mu_sqrt = np.sqrt(weight * np.arange(1, mag.size + 1))
    if kind == "2inf":
        return float(np.max(mag * mu_sqrt))
    if kind == "21":
        drops = mag - np.append(mag[1:], 0.0)
        return float(np.sum(drops * mu_sqrt))
    raise InvalidInputError(f"lorentz kind must be '2inf' or '21', got {kind!r}")


def lorentz(field: Field, kind: str, mask: np.ndarray | None = None) -> float:
    """Lorentz ``L^{2,inf}`` or ``L^{2,1}`` norm of ``field``'s magnitude.

    ``mask`` restricts the function to a subset of nodes (zero elsewhere).
    """
    mag = field.pointwise_norm()
    if mask is not None:
        mag = mag[np.asarray(mask, dtype=bool)]
    return lorentz_from_samples(mag, field.grid.measure_weight, kind)


# --------------------------------------------------------------------------- Hardy / Besov / maximal


def default_hardy_scales(n_points: int) -> tuple[float, ...]:
    """``{2^-j pi : j = 0 .. log2(N) - 2}``."""
    top = int(np.log2(n_points)) - 2
    return tuple(np.pi * 2.0**-j for j in range(top + 1))


def hardy_proxy(field: Field, scales: Iterable[float] | None = None) -> float:
    """Truncated maximal-function proxy for the Hardy ``H^1`` norm.

    ``phi_t`` is the periodized Gaussian of standard deviation ``t`` (unit
    mass), applied through its multiplier ``exp(-n^2 t^2 / 2)``; the result
    is the integral of ``max_t |phi_t * f|`` over the finite scale set.  How
    far this sits from the true ``H^1`` norm is not known and is not assumed.
    """
    scales = default_hardy_scales(field.grid.n_points) if scales is None else tuple(scales)
    if not scales:
        raise InvalidInputError("hardy_proxy needs at least one scale")
    if any(not (0.0 < t <= np.pi) for t in scales):
        raise InvalidInputError("every scale must lie in (0, pi]")
    n = field.grid.freqs.astype(float)
    spec = field.spectrum
    best = np.zeros(field.grid.n_points)
    for t in scales:
        smoothed = np.fft.ifft(spec * np.exp(-0.5 * (n * t) ** 2), axis=-1) * field.grid.n_points
        best = np.maximum(best, np.sqrt(np.sum(np.abs(smoothed) ** 2, axis=0)))
    return float(field.grid.measure_weight * np.sum(best))


def besov_0_inf_inf(field: Field, family: DyadicFamily | None = None) -> float:
    """``max_j || P_j f ||_inf`` over all blocks, the low block included."""
    family = DyadicFamily(field.grid) if family is None else family
    return max(lebesgue(project(field, family, j), np.inf) for j in family.indices)


def maximal_radii(n_points: int) -> np.ndarray:
    """Dyadic arc radii ``2 pi 2^-j``, capped at ``pi``, down to the node spacing's half."""
    top = int(np.log2(n_points)) + 1
    radii = 2.0 * np.pi * 2.0 ** -np.arange(1, top + 1)
    return radii


def maximal_function(field: Field) -> Field:
    """Dyadic centered maximal function of ``|f|``.

    The average over the arc ``B(x, r)`` uses the node sum over offsets
    ``|k| <= r / h`` (``h`` the node spacing); the smallest radius reduces to
    the node itself, which gives ``M f >= |f|`` pointwise.
    """
    grid = field.grid
    n = grid.n_points
    h = grid.measure_weight
    mag = field.pointwise_norm()
    csum = np.concatenate([[0.0], np.cumsum(np.concatenate([mag, mag, mag]))])
    idx = np.arange(n) + n
    best = mag.copy()
    for r in maximal_radii(n):
        k = int(np.floor(r / h + 1e-9))
        k = min(k, n // 2)
        if k == n // 2:
            avg = np.full(n, mag.mean())
        else:
            avg = (csum[idx + k + 1] - csum[idx - k]) / (2 * k + 1)
        best = np.maximum(best, avg)
    return Field(grid, best)


def littlewood_paley_sup(field: Field, family: DyadicFamily | None = None) -> np.ndarray:
    """Pointwise ``sup_j |P_{<=j} f|`` over the family's low cutoffs."""
    family = DyadicFamily(field.grid) if family is None else family
    out = np.zeros(field.grid.n_points)
    for j in family.indices:
        out = np.maximum(out, project_low(field, family, j).pointwise_norm())
    return out


# --------------------------------------------------------------------------- interpolation


@dataclass(frozen=True)
class InterpolationParams:
    """Exponents for the fractional interpolation inequality.

    ``1/r = theta/s_exp + (1-theta)/p``.  The defaults give ``r = 2`` with a
    ``theta = 1/2`` split between ``L^{4/3}`` and ``L^4``.
    """

    alpha: float = 0.5
    theta: float = 0.5
    p: float = 4.0
    s_exp: float = 4.0 / 3.0

    def __post_init__(self) -> None:
        if not 0 < self.alpha < 1 or not 0 < self.theta < 1:
            raise InvalidInputError("alpha and theta must lie in (0, 1)")
        if not self.p > 1 or not self.s_exp >= 1:
            raise InvalidInputError("need p > 1 and s_exp >= 1")

    @property
    def r(self) -> float:
        inv = self.theta / self.s_exp + (1.0 - self.theta) / self.p
        return 1.0 / inv


def interpolation_check(
    field: Field,
    alpha: float = 0.5,
    theta: float = 0.5,
    p: float = 4.0,
    s_exp: float = 4.0 / 3.0,
) -> float:
    """Ratio ``||D^{-a t} f||_r / (||D^{-a} f||_{s}^t ||f||_p^{1-t})`` with ``D^x = (-Delta)^{x/2}``."""
    prm = InterpolationParams(alpha, theta, p, s_exp)
    _check_zero_mode(field)
    num = lebesgue(frac_laplacian(field, -alpha * theta / 2.0), prm.r)
    low = lebesgue(frac_laplacian(field, -alpha / 2.0), s_exp)
    high = lebesgue(field, p)
    den = low**theta * high ** (1.0 - theta)
    if den == 0.0:
        return 0.0
    return float(num / den)


# --------------------------------------------------------------------------- ensembles


def band_limited_ensemble(
    grid: "object",
    n_peak: int,
    size: int,
    seed: int,
    components: int = 1,
    damping: float = 0.5,
) -> list[Field]:
    """Seeded real mean-zero fields with Gaussian coefficients on ``1 <= |n| <= n_peak``.

    Coefficients are damped by ``|n|^{-damping}``; member ``i`` draws from
    ``default_rng([seed, n_peak, i])`` so any member can be regenerated alone.
    """
    return [
        random_band_limited(grid, n_peak, np.random.default_rng([seed, n_peak, i]), components, damping)
        for i in range(size)
    ]


def random_band_limited(grid, n_peak: int, rng: np.random.Generator, components: int = 1, damping: float = 0.5) -> Field:
    n = grid.n_points
    if not 1 <= n_peak < n // 2:
        raise InvalidInputError(f"n_peak must lie in [1, N/2), got {n_peak}")
    ks = np.arange(1, n_peak + 1)
    coeff = (rng.standard_normal((components, n_peak)) + 1j * rng.standard_normal((components, n_peak))) / np.sqrt(2.0)
    coeff *= ks ** (-float(damping))
    spec = np.zeros((components, n), dtype=complex)
    spec[:, ks] = coeff
    spec[:, n - ks] = np.conj(coeff)
    vals = np.fft.ifft(spec, axis=-1).real * n
    return Field(grid, vals)


def sample_arc_mask(n_points: int, start: int, length: int) -> np.ndarray:
    """Boolean mask of ``length`` consecutive nodes starting at ``start`` (wrapping)."""
    mask = np.zeros(n_points, dtype=bool)
    mask[(start + np.arange(length)) % n_points] = True
    return mask


__all__: Sequence[str] = [
    "NormKind",
    "NormSpec",
    "InterpolationParams",
    "sobolev_seminorm",
    "sobolev_seminorm_squared",
    "gagliardo_half",
    "lebesgue",
    "lorentz",
    "lorentz_from_samples",
    "hardy_proxy",
    "default_hardy_scales",
    "besov_0_inf_inf",
    "maximal_function",
    "maximal_radii",
    "littlewood_paley_sup",
    "interpolation_check",
    "band_limited_ensemble",
    "random_band_limited",
    "sample_arc_mask",
]
