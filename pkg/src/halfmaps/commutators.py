"""Three-term commutators ``T`` and ``S``, their two-term variants, and an
empirical harness for their ``H^{-1/2}`` (and Hardy-proxy) bounds.

Throughout, ``D = (-Delta)^{1/4}``.  The multiplying factor ``Q`` is either a
one-component :class:`Field` (acting as a scalar) or a :class:`MatrixField`
of shape ``(l, m, N)`` acting on ``m``-vector fields.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence, Union

import numpy as np

from .errors import InvalidInputError, NotOnSphereError
from .norms import NormKind, NormSpec, random_band_limited, sobolev_seminorm
from .spectral import (
    Field,
    PeriodicGrid,
    _check_same_grid,
    dealiased_matvec,
    dealiased_product,
    derivative,
    half_laplacian,
    quarter_laplacian,
    riesz,
)

SPHERE_TOL = 1e-6


@dataclass(frozen=True, eq=False)
class MatrixField:
    """Matrix-valued samples, ``values`` of shape ``(l, m, N)``."""

    grid: PeriodicGrid
    values: np.ndarray

    def __post_init__(self) -> None:
        vals = np.asarray(self.values)
        if vals.ndim != 3 or vals.shape[2] != self.grid.n_points:
            raise InvalidInputError(f"matrix field needs shape (l, m, {self.grid.n_points}), got {vals.shape}")
        vals = np.array(vals, dtype=complex if np.iscomplexobj(vals) else float)
        vals.flags.writeable = False
        object.__setattr__(self, "values", vals)

    @property
    def shape(self) -> tuple[int, int]:
        return self.values.shape[0], self.values.shape[1]

    @property
    def is_real(self) -> bool:
        return not np.iscomplexobj(self.values)

    def entrywise(self, op: Callable[[Field], Field]) -> "MatrixField":
        """Apply a linear field operator to every entry."""
        l, m = self.shape
        flat = Field(self.grid, self.values.reshape(l * m, -1))
        return MatrixField(self.grid, op(flat).values.reshape(l, m, -1))

    def as_field(self) -> Field:
        l, m = self.shape
        return Field(self.grid, self.values.reshape(l * m, -1))


Multiplier = Union[Field, MatrixField]


def wedge_matrix(u: Field) -> MatrixField:
    """Matrix of ``v -> u ^ v``: the row ``[-u2, u1]`` for ``m = 2``, the cross-product matrix for ``m = 3``."""
    v = u.values
    z = np.zeros_like(v[0])
    if u.m == 2:
        return MatrixField(u.grid, np.stack([np.stack([-v[1], v[0]])]))
    if u.m == 3:
        mat = np.stack(
            [
                np.stack([z, -v[2], v[1]]),
                np.stack([v[2], z, -v[0]]),
                np.stack([-v[1], v[0], z]),
            ]
        )
        return MatrixField(u.grid, mat)
    raise InvalidInputError(f"wedge is defined for 2 or 3 components, got {u.m}")


def dot_matrix(u: Field) -> MatrixField:
    """Row matrix of ``v -> u . v``."""
    return MatrixField(u.grid, u.values[None, :, :])


def _apply(Q: Multiplier, v: Field) -> Field:
    _check_same_grid(Q, v)  # type: ignore[arg-type]
    if isinstance(Q, MatrixField):
        return dealiased_matvec(Q.values, Q.is_real, v)
    if Q.m != 1:
        raise InvalidInputError(
            f"a vector field with {Q.m} components cannot act on a field; use MatrixField"
        )
    return dealiased_product(Q, v)


def _D(Q: Multiplier) -> Multiplier:
    if isinstance(Q, MatrixField):
        return Q.entrywise(quarter_laplacian)
    return quarter_laplacian(Q)


def _conformable(Q: Multiplier, u: Field) -> None:
    if Q.grid != u.grid:
        raise InvalidInputError("Q and u live on different grids")
    if isinstance(Q, MatrixField) and Q.shape[1] != u.m:
        raise InvalidInputError(f"matrix with {Q.shape[1]} columns cannot act on {u.m} components")
    if isinstance(Q, Field) and Q.m != 1:
        raise InvalidInputError("vector-valued Q must be given as a MatrixField")


def naive_term(Q: Multiplier, u: Field) -> Field:
    """``D[Q D u]``, the first term of ``T`` and ``S`` on its own."""
    _conformable(Q, u)
    return quarter_laplacian(_apply(Q, quarter_laplacian(u)))


def op_T(Q: Multiplier, u: Field) -> Field:
    """``T(Q,u) = D[Q Du] - Q D^2 u + DQ Du``."""
    _conformable(Q, u)
    du = quarter_laplacian(u)
    return naive_term(Q, u) - _apply(Q, half_laplacian(u)) + _apply(_D(Q), du)


def op_T_tilde(Q: Multiplier, u: Field) -> Field:
    """``T`` without its last term: ``D[Q Du] - Q D^2 u``."""
    _conformable(Q, u)
    return naive_term(Q, u) - _apply(Q, half_laplacian(u))


def op_S(Q: Multiplier, u: Field) -> Field:
    """``S(Q,u) = D[Q Du] - R(Q u') + R[DQ R Du]``."""
    _conformable(Q, u)
    du = quarter_laplacian(u)
    return op_S_tilde(Q, u) + riesz(_apply(_D(Q), riesz(du)))


def op_S_tilde(Q: Multiplier, u: Field) -> Field:
    """``S`` without its last term: ``D[Q Du] - R(Q u')``."""
    _conformable(Q, u)
    return naive_term(Q, u) - riesz(_apply(Q, derivative(u)))


def anticommutator(u: Field) -> Field:
    """``R(Du . R Du)``, the remainder on the right of the structure equation."""
    du = quarter_laplacian(u)
    return riesz(_apply(dot_matrix(du), riesz(du)))


def _check_sphere(u: Field, tol: float = SPHERE_TOL) -> None:
    dev = float(np.max(np.abs(u.pointwise_norm() - 1.0)))
    if dev > tol:
        raise NotOnSphereError(f"max ||u| - 1| = {dev:.3e} exceeds {tol:.1e}")


@dataclass(frozen=True)
class StructureResidual:
    residual: float
    tangency: float


def structure_identity_residual(u, tol: float = SPHERE_TOL) -> StructureResidual:
    """Sup-norm defect of ``D(u . Du) = S(u., u) - R(Du . R Du)`` for a sphere map.

    ``tangency`` is ``sup |u . u'|``, which the identity encodes: both sides
    differ exactly by ``R(u . u')``.
    """
    u = getattr(u, "field", u)
    _check_sphere(u, tol)
    Q = dot_matrix(u)
    lhs = quarter_laplacian(_apply(Q, quarter_laplacian(u)))
    rhs = op_S(Q, u) - anticommutator(u)
    res = float(np.max(np.abs((lhs - rhs).values)))
    tang = float(np.max(np.abs(np.sum(u.values * derivative(u).values, axis=0))))
    return StructureResidual(res, tang)


def euler_lagrange_defect(u, tol: float = SPHERE_TOL) -> tuple[float, float]:
    """Return ``(sup|D(u^Du) - T(u^, u)|, sup|u ^ D^2 u|)``; the two agree since ``a ^ a = 0``."""
    u = getattr(u, "field", u)
    _check_sphere(u, tol)
    W = wedge_matrix(u)
    lhs = quarter_laplacian(_apply(W, quarter_laplacian(u))) - op_T(W, u)
    el = _apply(W, half_laplacian(u))
    return float(np.max(np.abs(lhs.values))), float(np.max(np.abs(el.values)))


# --------------------------------------------------------------------------- estimate study

OPERATORS: dict[str, Callable] = {
    "T": op_T,
    "S": op_S,
    "T_tilde": op_T_tilde,
    "S_tilde": op_S_tilde,
    "naive": naive_term,
}
ALL_OPERATORS = ("T", "S", "T_tilde", "S_tilde", "anticommutator", "naive")


@dataclass(frozen=True)
class CommutatorReport:
    """One ensemble member's ratio ``||op(Q,u)|| / (||Q|| ||u||)``."""

    operator: str
    numerator_norm: str
    numerator_value: float
    denominator: float
    ratio: float | None
    peak_frequency: int
    seed: int
    index: int
    skipped: bool = False
    note: str = ""


def draw_pair(grid: PeriodicGrid, n_peak: int, seed: int, index: int, phases: str = "random") -> tuple[Field, Field]:
    """Seeded ``(Q, u)`` pair, each normalized to unit ``H^{1/2}`` seminorm.

    ``phases="random"`` is the standard law: independent complex unit normals
    on ``1 <= n <= n_peak`` damped by ``n^{-1/2}``.  ``phases="aligned"``
    keeps the moduli and sets every phase to zero, which produces coherent
    spikes instead of Gaussian-like noise.
    """
    rng = np.random.default_rng([seed, n_peak, index])
    Q = random_band_limited(grid, n_peak, rng)
    u = random_band_limited(grid, n_peak, rng)
    if phases == "aligned":
        Q, u = _align(Q), _align(u)
    elif phases != "random":
        raise InvalidInputError(f"phases must be 'random' or 'aligned', got {phases!r}")
    return _normalize(Q), _normalize(u)


def _align(f: Field) -> Field:
    n = f.grid.n_points
    spec = np.abs(f.spectrum)
    return Field(f.grid, np.fft.ifft(spec, axis=-1).real * n)


def _normalize(f: Field) -> Field:
    s = sobolev_seminorm(f, 0.5)
    return f if s == 0.0 else f * (1.0 / s)


def _ratio_for(op: str, Q: Field, u: Field, numerator: NormSpec) -> tuple[float, float, float]:
    """``(numerator value, denominator, removed mean)``.

    ``T_tilde`` and ``anticommutator`` outputs need not be mean-zero; a
    negative-order Sobolev numerator is then taken of the mean-free part and
    the size of the removed mean is returned so the report can disclose it.
    """
    if op == "anticommutator":
        out = anticommutator(u)
        den = sobolev_seminorm(u, 0.5) ** 2
    else:
        out = OPERATORS[op](Q, u)
        den = sobolev_seminorm(Q, 0.5) * sobolev_seminorm(u, 0.5)
    removed = 0.0
    if numerator.kind is NormKind.SOBOLEV and numerator.s < 0:
        mean = out.spectrum[:, 0]
        removed = float(np.max(np.abs(mean)))
        if removed > 1e-12:
            out = out - Field.constant(out.grid, mean if not out.is_real else mean.real)
    return numerator.evaluate(out), den, removed


def estimate_study(
    operator: str,
    peaks: Sequence[int],
    size: int,
    seed: int = 7,
    n_points: int = 1024,
    numerator: NormSpec | None = None,
    phases: str = "random",
    pairs: Callable[[PeriodicGrid, int, int], tuple[Field, Field]] | None = None,
) -> list[CommutatorReport]:
    """Ratios of ``operator`` over a seeded ensemble for each peak frequency.

    ``pairs(grid, n_peak, index)`` may replace the standard law; members
    whose ``Q`` or ``u`` is constant are reported with ``skipped=True`` and no
    ratio.  Reports come back in (peak, index) order.
    """
    if operator not in ALL_OPERATORS:
        raise InvalidInputError(f"unknown operator {operator!r}; choose from {ALL_OPERATORS}")
    if size < 1:
        raise InvalidInputError("ensemble size must be >= 1")
    numerator = NormSpec(NormKind.SOBOLEV, s=-0.5) if numerator is None else numerator
    grid = PeriodicGrid(n_points)
    out: list[CommutatorReport] = []
    for peak in peaks:
        for i in range(size):
            Q, u = pairs(grid, peak, i) if pairs is not None else draw_pair(grid, peak, seed, i, phases)
            degenerate = [name for name, f in (("Q", Q), ("u", u)) if sobolev_seminorm(f, 0.5) == 0.0]
            if operator == "anticommutator":
                degenerate = [d for d in degenerate if d == "u"]
            if degenerate:
                out.append(
                    CommutatorReport(operator, numerator.label, 0.0, 0.0, None, int(peak), seed, i,
                                     skipped=True, note=f"constant {'/'.join(degenerate)}")
                )
                continue
            val, den, removed = _ratio_for(operator, Q, u, numerator)
            notes = []
            if numerator.kind is NormKind.HARDY_PROXY:
                notes.append("hardy proxy truncated to dyadic scales")
            if removed > 1e-12:
                notes.append(f"mean {removed:.3e} removed before the negative-order norm")
            note = "; ".join(notes)
            out.append(
                CommutatorReport(operator, numerator.label, val, den, val / den, int(peak), seed, i, note=note)
            )
    return out


@dataclass(frozen=True)
class PeakSummary:
    peak_frequency: int
    count: int
    skipped: int
    max_ratio: float
    median_ratio: float


def summarize(reports: Sequence[CommutatorReport]) -> list[PeakSummary]:
    """Per-peak max and median of the non-skipped ratios."""
    peaks = sorted({r.peak_frequency for r in reports})
    out = []
    for p in peaks:
        rs = [r for r in reports if r.peak_frequency == p]
        vals = np.array([r.ratio for r in rs if not r.skipped], dtype=float)
        out.append(
            PeakSummary(
                p,
                int(vals.size),
                sum(r.skipped for r in rs),
                float(vals.max()) if vals.size else float("nan"),
                float(np.median(vals)) if vals.size else float("nan"),
            )
        )
    return out


def spread(summary: Sequence[PeakSummary]) -> float:
    """``max / min`` of the per-peak maxima."""
    m = np.array([s.max_ratio for s in summary])
    return float(m.max() / m.min())
