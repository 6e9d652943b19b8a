"""Half-harmonic maps from the circle into S^1 and S^2.

Explicit critical points are traces of finite Blaschke products, optionally
composed with an isometric embedding of S^1 as a great circle of S^2.  The
module also provides the energy, the Euler-Lagrange residual, the winding
degree and a projected-gradient descent for the energy.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from functools import cached_property
from typing import Sequence

import numpy as np

from .errors import (
    DegenerateParameterError,
    DegreeUndeterminedError,
    InvalidInputError,
    NotOnSphereError,
    StagnationError,
)
from .norms import sobolev_seminorm_squared
from .spectral import Field, PeriodicGrid, derivative, half_laplacian, quarter_laplacian

MAX_SPHERE_TOL = 1e-6


@dataclass(frozen=True, eq=False)
class SphereMap:
    """A :class:`Field` with 2 or 3 components taking values on the unit sphere."""

    field: Field
    sphere_tol: float = MAX_SPHERE_TOL

    def __post_init__(self) -> None:
        f = self.field
        if f.m not in (2, 3):
            raise InvalidInputError(f"sphere maps need 2 or 3 components, got {f.m}")
        if not f.is_real:
            raise InvalidInputError("sphere maps must be real-valued")
        if not 0 < self.sphere_tol <= MAX_SPHERE_TOL:
            raise InvalidInputError(f"sphere_tol must lie in (0, {MAX_SPHERE_TOL}]")
        dev = self.sphere_deviation
        if dev > self.sphere_tol:
            raise NotOnSphereError(f"max ||u| - 1| = {dev:.3e} exceeds {self.sphere_tol:.1e}")

    @classmethod
    def from_values(cls, grid: PeriodicGrid, values: np.ndarray, normalize: bool = False) -> "SphereMap":
        vals = np.asarray(values, dtype=float)
        if normalize:
            vals = project_to_sphere(vals)
        return cls(Field(grid, vals))

    @property
    def grid(self) -> PeriodicGrid:
        return self.field.grid

    @property
    def m(self) -> int:
        return self.field.m

    @property
    def values(self) -> np.ndarray:
        return self.field.values

    @cached_property
    def sphere_deviation(self) -> float:
        return float(np.max(np.abs(self.field.pointwise_norm() - 1.0)))

    @cached_property
    def energy_density(self) -> np.ndarray:
        """``|(-Delta)^{1/4} u|^2`` at the nodes."""
        du = quarter_laplacian(self.field).values
        return np.sum(du * du, axis=0)


def project_to_sphere(values: np.ndarray) -> np.ndarray:
    """Pointwise radial normalization ``u / |u|``."""
    norm = np.sqrt(np.sum(values * values, axis=0))
    if np.any(norm == 0.0):
        raise InvalidInputError("cannot project the zero vector onto the sphere")
    return values / norm


def constant_map(grid: PeriodicGrid, point: Sequence[float] = (1.0, 0.0)) -> SphereMap:
    p = np.asarray(point, dtype=float)
    p = p / np.linalg.norm(p)
    return SphereMap(Field.constant(grid, p))


def identity_map(grid: PeriodicGrid) -> SphereMap:
    return SphereMap(Field(grid, np.vstack([np.cos(grid.nodes), np.sin(grid.nodes)])))


def _as_field(u) -> Field:
    return u.field if isinstance(u, SphereMap) else u


def _check_on_sphere(u) -> None:
    if isinstance(u, SphereMap):
        return
    dev = float(np.max(np.abs(u.pointwise_norm() - 1.0)))
    if dev > MAX_SPHERE_TOL:
        raise NotOnSphereError(f"max ||u| - 1| = {dev:.3e} exceeds {MAX_SPHERE_TOL:.1e}")


# --------------------------------------------------------------------------- Blaschke


@dataclass(frozen=True)
class BlaschkeSpec:
    """Finite Blaschke product ``rotation * prod (z - a) / (1 - conj(a) z)``.

    ``s2_isometry`` is an orthogonal 3x3 matrix applied after embedding the
    circle as the equator ``(x, y, 0)`` of S^2.
    """

    zeros: tuple[complex, ...] = ()
    rotation: complex = 1.0
    s2_isometry: np.ndarray | None = dc_field(default=None, compare=False)

    def __post_init__(self) -> None:
        zeros = tuple(complex(a) for a in self.zeros)
        for a in zeros:
            if not abs(a) < 1.0:
                raise DegenerateParameterError(f"Blaschke zero {a} has modulus {abs(a)} >= 1")
        object.__setattr__(self, "zeros", zeros)
        rot = complex(self.rotation)
        if abs(abs(rot) - 1.0) > 1e-12:
            raise InvalidInputError(f"rotation must be unimodular, got |{rot}| = {abs(rot)}")
        object.__setattr__(self, "rotation", rot)
        if self.s2_isometry is not None:
            R = np.asarray(self.s2_isometry, dtype=float)
            if R.shape != (3, 3) or np.max(np.abs(R.T @ R - np.eye(3))) > 1e-12:
                raise InvalidInputError("s2_isometry must be an orthogonal 3x3 matrix")
            object.__setattr__(self, "s2_isometry", R)

    @property
    def degree(self) -> int:
        return len(self.zeros)


def blaschke_values(spec: BlaschkeSpec, thetas: np.ndarray) -> np.ndarray:
    """Complex Blaschke values at arbitrary angles."""
    z = np.exp(1j * np.asarray(thetas, dtype=float))
    w = np.full(z.shape, spec.rotation, dtype=complex)
    for a in spec.zeros:
        w *= (z - a) / (1.0 - np.conj(a) * z)
    return w


def blaschke_trace(spec: BlaschkeSpec, grid: PeriodicGrid) -> SphereMap:
    """Boundary trace of the Blaschke product as a map into S^1 (or S^2)."""
    w = blaschke_values(spec, grid.nodes)
    w = w / np.abs(w)
    vals = np.vstack([w.real, w.imag])
    if spec.s2_isometry is not None:
        vals = spec.s2_isometry @ np.vstack([vals, np.zeros_like(vals[0])])
    return SphereMap(Field(grid, vals))


# --------------------------------------------------------------------------- energy / residuals


def energy(u) -> float:
    """``2 pi sum |n| |u_hat[n]|^2``, the same formula as the squared ``H^{1/2}`` seminorm."""
    return sobolev_seminorm_squared(_as_field(u), 0.5)


def el_residual(u) -> tuple[Field, float]:
    """Euler-Lagrange residual ``u ^ (-Delta)^{1/2} u`` and its sup-norm.

    For two components this is the scalar ``u1 v2 - u2 v1``; for three it is
    the cross product.  Products are pointwise, matching the equation's
    nonlinearity at the nodes.
    """
    _check_on_sphere(u)
    f = _as_field(u)
    v = half_laplacian(f).values
    w = f.values
    if f.m == 2:
        res = (w[0] * v[1] - w[1] * v[0])[None, :]
    elif f.m == 3:
        res = np.cross(w.T, v.T).T
    else:
        raise InvalidInputError(f"residual needs 2 or 3 components, got {f.m}")
    out = Field(f.grid, res)
    return out, float(np.max(np.abs(res)))


@dataclass(frozen=True)
class DegreeResult:
    degree: int
    raw: float
    exact: bool


def degree(u, exact_tol: float = 1e-6, ambiguity: float = 0.1) -> DegreeResult:
    """Winding number ``(1/2pi) int (u1 u2' - u2 u1') / |u|^2``."""
    f = _as_field(u)
    if f.m != 2:
        raise InvalidInputError("degree is defined for maps into S^1 (2 components)")
    d = derivative(f).values
    w = f.values
    integrand = (w[0] * d[1] - w[1] * d[0]) / np.sum(w * w, axis=0)
    raw = float(f.grid.measure_weight * np.sum(integrand) / (2.0 * np.pi))
    k = int(np.rint(raw))
    if abs(raw - k) > ambiguity:
        raise DegreeUndeterminedError(f"winding integral {raw:.4f} is not close to an integer")
    return DegreeResult(k, raw, abs(raw - k) <= exact_tol)


def tangential_gradient(u) -> Field:
    """``g = (-Delta)^{1/2} u - <(-Delta)^{1/2} u, u> u``; half the L^2 gradient of the energy on the sphere."""
    _check_on_sphere(u)
    f = _as_field(u)
    v = half_laplacian(f).values
    w = f.values
    return Field(f.grid, v - np.sum(v * w, axis=0) * w)


def gradient_check(u, phi: Field, h: float = 1e-5, tangency_tol: float = 1e-10) -> tuple[float, float, float]:
    """Compare ``2 <g, phi>_{L^2}`` with a central difference of ``L(pi(u + t phi))``.

    Returns ``(relative_error, analytic, finite_difference)``; the relative
    error is ``|a - b| / max(|a|, |b|)`` and 0 when both vanish.
    """
    _check_on_sphere(u)
    f = _as_field(u)
    if phi.grid != f.grid or phi.m != f.m:
        raise InvalidInputError("phi must be a field on the same grid with the same components")
    if np.max(np.abs(np.sum(phi.values * f.values, axis=0)), initial=0.0) > tangency_tol:
        raise InvalidInputError("phi is not tangential to u")
    g = tangential_gradient(f)
    analytic = 2.0 * f.grid.measure_weight * float(np.sum(g.values * phi.values))
    plus = energy(Field(f.grid, project_to_sphere(f.values + h * phi.values)))
    minus = energy(Field(f.grid, project_to_sphere(f.values - h * phi.values)))
    fd = (plus - minus) / (2.0 * h)
    scale = max(abs(analytic), abs(fd))
    rel = 0.0 if scale == 0.0 else abs(analytic - fd) / scale
    return rel, analytic, fd


def tangential_part(u, phi: np.ndarray) -> np.ndarray:
    """Remove the component of ``phi`` along ``u`` at each node."""
    w = _as_field(u).values
    return phi - np.sum(phi * w, axis=0) * w


# --------------------------------------------------------------------------- descent


@dataclass
class FlowTrace:
    energies: list[float]
    residuals: list[float]
    steps: list[float]
    terminal: SphereMap | None = None
    converged: bool = False

    @property
    def iterations(self) -> int:
        return len(self.steps)


@dataclass(frozen=True)
class FlowParams:
    max_iters: int = 5000
    residual_target: float = 1e-6
    initial_step: float | None = None
    min_step: float = 1e-14
    growth: float = 1.5

    def __post_init__(self) -> None:
        if self.max_iters < 0 or self.residual_target <= 0 or self.min_step <= 0:
            raise InvalidInputError("flow parameters must be positive")


def flow_descent(u0: SphereMap, params: FlowParams | None = None) -> FlowTrace:
    """Projected gradient descent ``u <- pi(u - tau g)`` with energy backtracking.

    The first trial step is ``1 / (1 + N/2)``, the inverse of the largest
    multiplier weight; a rejected step halves ``tau`` and an accepted one lets
    it grow by ``growth`` (capped at the initial value).  Residuals are
    ``sup |g|``.
    """
    params = FlowParams() if params is None else params
    grid = u0.grid
    tau0 = params.initial_step if params.initial_step is not None else 1.0 / (1.0 + grid.n_points / 2)
    u = u0.field
    e = energy(u)
    g = tangential_gradient(u)
    res = float(np.max(np.abs(g.values)))
    trace = FlowTrace([e], [res], [])
    tau = tau0
    while res > params.residual_target and trace.iterations < params.max_iters:
        while True:
            cand = Field(grid, project_to_sphere(u.values - tau * g.values))
            e_new = energy(cand)
            if e_new <= e:
                break
            tau *= 0.5
            if tau < params.min_step:
                trace.terminal = SphereMap(u)
                raise StagnationError(f"step size fell below {params.min_step:g}", trace)
        u, e = cand, e_new
        g = tangential_gradient(u)
        res = float(np.max(np.abs(g.values)))
        trace.energies.append(e)
        trace.residuals.append(res)
        trace.steps.append(tau)
        tau = min(tau * params.growth, tau0)
    trace.terminal = SphereMap(u)
    trace.converged = res <= params.residual_target
    return trace
