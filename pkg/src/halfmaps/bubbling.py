"""Energy concentration, neck analysis and bubble extraction for sphere maps.

"Balls" on the circle are arcs ``B(c, rho) = {theta : d(theta, c) < rho}``
with ``d`` the arc distance, and annuli are differences of concentric arcs.
Energies are integrals of the density ``|(-Delta)^{1/4} u|^2``, treated as
piecewise constant on the grid cells ``[theta_k - h/2, theta_k + h/2)`` so
that arcs of any real radius have a well-defined, continuous energy.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from typing import Sequence, Union

import numpy as np

from .errors import (
    ExtractionUnreliableError,
    InconsistentProfileError,
    InsufficientFamilyError,
    InvalidInputError,
)
from .halfharmonic import SphereMap, energy, project_to_sphere
from .norms import lorentz_from_samples
from .spectral import Field, PeriodicGrid, evaluate

DEFAULT_GAMMA = np.pi / 4
DEFAULT_C0 = np.pi
TWO_PI = 2.0 * np.pi


def arc_distance(theta: np.ndarray, center: float) -> np.ndarray:
    """Distance along the circle, in ``[0, pi]``."""
    return np.abs(np.mod(np.asarray(theta) - center + np.pi, TWO_PI) - np.pi)


@dataclass(frozen=True, eq=False)
class EnergyDensity:
    """A non-negative density on a grid with exact arc integrals."""

    grid: PeriodicGrid
    values: np.ndarray

    def __post_init__(self) -> None:
        vals = np.asarray(self.values, dtype=float)
        if vals.shape != (self.grid.n_points,):
            raise InvalidInputError(f"density must have shape ({self.grid.n_points},)")
        if np.any(vals < 0) or not np.all(np.isfinite(vals)):
            raise InvalidInputError("density must be finite and non-negative")
        vals = vals.copy()
        vals.flags.writeable = False
        object.__setattr__(self, "values", vals)
        h = self.grid.measure_weight
        object.__setattr__(self, "_cum", np.concatenate([[0.0], np.cumsum(vals) * h]))

    @classmethod
    def of(cls, u: "MapLike") -> "EnergyDensity":
        if isinstance(u, EnergyDensity):
            return u
        if isinstance(u, SphereMap):
            return cls(u.grid, u.energy_density)
        raise InvalidInputError(f"expected a SphereMap or EnergyDensity, got {type(u).__name__}")

    @property
    def total(self) -> float:
        return float(self._cum[-1])

    def masked(self, keep: np.ndarray) -> "EnergyDensity":
        return EnergyDensity(self.grid, np.where(keep, self.values, 0.0))

    def _primitive(self, s: np.ndarray) -> np.ndarray:
        """Integral of the density from ``-h/2`` to ``s - h/2``."""
        n = self.grid.n_points
        h = self.grid.measure_weight
        q = np.floor(s / TWO_PI)
        r = s - q * TWO_PI
        k = np.minimum(np.floor(r / h).astype(np.int64), n - 1)
        return q * self.total + self._cum[k] + self.values[k] * (r - k * h)

    def arc_energy(self, center, rho) -> np.ndarray:
        """Energy of ``B(center, rho)``; broadcasts over arrays of centers and radii."""
        center = np.asarray(center, dtype=float)
        rho = np.asarray(rho, dtype=float)
        h2 = 0.5 * self.grid.measure_weight
        inner = self._primitive(center + np.minimum(rho, np.pi) + h2) - self._primitive(
            center - np.minimum(rho, np.pi) + h2
        )
        return np.where(rho >= np.pi, self.total, np.maximum(inner, 0.0))


MapLike = Union[SphereMap, EnergyDensity]


def local_energy(u: MapLike, center: float, rho: float) -> float:
    """Energy of ``u`` on the arc ``B(center, rho)``, ``0 < rho <= pi``."""
    if not 0.0 < rho <= np.pi:
        raise InvalidInputError(f"rho must lie in (0, pi], got {rho}")
    return float(EnergyDensity.of(u).arc_energy(center, rho))


def annulus_energy(u: MapLike, center: float, inner: float, outer: float) -> float:
    dens = EnergyDensity.of(u)
    return float(dens.arc_energy(center, outer) - dens.arc_energy(center, inner))


# --------------------------------------------------------------------------- concentration


@dataclass(frozen=True)
class Concentration:
    center: float
    rho: float
    node: int


def concentration_radius(
    u: MapLike,
    gamma: float = DEFAULT_GAMMA,
    region: tuple[float, float] | None = None,
    iterations: int = 64,
) -> Concentration | None:
    """Smallest radius at which some arc centered in ``region`` holds energy ``gamma``.

    ``region`` is ``(center, radius)``; ``None`` means every node.  Centers
    are grid nodes and, for each, the radius is found by bisection on the
    continuous, non-decreasing arc energy.  Radii equal to the minimum within
    1e-12 count as ties and the smallest node index wins.  Returns ``None``
    when no admissible arc reaches ``gamma``.
    """
    if not gamma > 0:
        raise InvalidInputError(f"gamma must be positive, got {gamma}")
    dens = EnergyDensity.of(u)
    nodes = dens.grid.nodes
    idx = np.arange(dens.grid.n_points)
    if region is not None:
        c0, r0 = region
        idx = idx[arc_distance(nodes, c0) <= r0]
    if idx.size == 0 or dens.total < gamma:
        return None
    centers = nodes[idx]
    reach = dens.arc_energy(centers, np.pi) >= gamma
    if not np.any(reach):
        return None
    idx, centers = idx[reach], centers[reach]
    lo = np.zeros(centers.shape)
    hi = np.full(centers.shape, np.pi)
    for _ in range(iterations):
        mid = 0.5 * (lo + hi)
        ok = dens.arc_energy(centers, mid) >= gamma
        hi = np.where(ok, mid, hi)
        lo = np.where(ok, lo, mid)
    best = hi.min()
    pick = int(np.flatnonzero(hi <= best + 1e-12)[0])
    return Concentration(float(centers[pick]), float(hi[pick]), int(idx[pick]))


# --------------------------------------------------------------------------- annuli


@dataclass(frozen=True)
class EnergyProfile:
    """Dyadic annulus energies ``E(B(c, 2 rho_i) \\ B(c, rho_i))`` with ``rho_i = lambda 2^i``.

    ``arc_energies[i]`` is ``E(B(c, rho_i))``; the list carries one extra
    entry for the outer radius ``2 rho_last``.
    """

    center: float
    radii: tuple[float, ...]
    annulus_energies: tuple[float, ...]
    arc_energies: tuple[float, ...]
    total_energy: float


def annulus_profile(u: MapLike, center: float, lam: float, Lam: float) -> EnergyProfile:
    """Dyadic profile on ``[lam, 1/Lam]``: radii ``lam 2^i`` while ``2 rho <= 1/Lam``."""
    outer = 1.0 / Lam
    if not (0.0 < lam < 0.5 * outer <= np.pi):
        raise InvalidInputError(f"need 0 < lambda < 1/(2 Lambda) <= pi, got {lam}, {Lam}")
    dens = EnergyDensity.of(u)
    count = int(np.floor(np.log2(outer / lam) + 1e-12))
    radii = lam * 2.0 ** np.arange(count)
    edges = np.append(radii, 2.0 * radii[-1])
    arcs = dens.arc_energy(center, edges)
    ann = np.diff(arcs)
    return EnergyProfile(
        float(center), tuple(map(float, radii)), tuple(map(float, ann)), tuple(map(float, arcs)), dens.total
    )


@dataclass(frozen=True)
class AnnulusClassification:
    """Maximal runs of dyadic annuli, outermost first.

    ``boundaries`` has one more entry than ``labels``: gap ``i`` spans radii
    ``boundaries[i+1] .. boundaries[i]``.  ``I1`` gaps have every dyadic
    annulus at most ``2 gamma``; ``I0`` gaps consist of annuli above it.
    """

    boundaries: tuple[float, ...]
    labels: tuple[str, ...]
    gamma: float
    gap_energies: tuple[float, ...]

    def verify(self, profile: EnergyProfile) -> bool:
        """Re-check the ``2 gamma`` bound on every ``I1`` gap."""
        for lab, (hi, lo) in zip(self.labels, zip(self.boundaries[:-1], self.boundaries[1:])):
            if lab != "I1":
                continue
            for rho, e in zip(profile.radii, profile.annulus_energies):
                if lo <= rho and 2 * rho <= hi and e > 2 * self.gamma:
                    return False
        return True


def classify_annuli(profile: EnergyProfile, gamma: float) -> AnnulusClassification:
    """Split the profile outside-in into small-energy (``I1``) and large-energy (``I0``) gaps."""
    if not gamma > 0:
        raise InvalidInputError(f"gamma must be positive, got {gamma}")
    order = np.argsort(profile.radii)[::-1]
    boundaries = [2.0 * profile.radii[order[0]]]
    labels: list[str] = []
    energies: list[float] = []
    for i in order:
        lab = "I1" if profile.annulus_energies[i] <= 2.0 * gamma else "I0"
        if labels and labels[-1] == lab:
            boundaries[-1] = profile.radii[i]
            energies[-1] += profile.annulus_energies[i]
        else:
            labels.append(lab)
            boundaries.append(profile.radii[i])
            energies.append(profile.annulus_energies[i])
    return AnnulusClassification(tuple(boundaries), tuple(labels), float(gamma), tuple(energies))


# --------------------------------------------------------------------------- neck


@dataclass(frozen=True)
class NeckReport:
    """Both sides of the neck-energy estimate on ``B(1/Lam) \\ B(lam)``.

    ``ratio`` is ``total_L2 / sup_dyadic_sqrt``; ``energy_ratio`` uses the
    squared left side.  The duality fields compare ``int_A |Du|^2`` with
    ``L^{2,1}(|Du|) * L^{2,inf}(|Du| on A)`` for the node set ``A`` of the annulus.
    """

    center: float
    lam: float
    Lam: float
    sup_dyadic_sqrt: float
    total_L2: float
    lorentz_2inf_on_annulus: float
    ratio: float
    energy_ratio: float
    duality_lhs: float
    duality_rhs: float

    @property
    def duality_holds(self) -> bool:
        return self.duality_lhs <= self.duality_rhs + 1e-10


def neck_check(u: MapLike, center: float, lam: float, Lam: float, per_octave: int = 8) -> NeckReport:
    """Sup of dyadic annulus energies against the total neck energy and its Lorentz norm.

    The supremum over ``rho in [lam, 1/(2 Lam)]`` is sampled on a geometric
    grid with ``per_octave`` points per doubling (endpoints included).
    """
    outer = 1.0 / Lam
    if not (0.0 < lam < 0.5 * outer <= np.pi):
        raise InvalidInputError(f"need 0 < lambda < 1/(2 Lambda) <= pi, got {lam}, {Lam}")
    dens = EnergyDensity.of(u)
    octaves = np.log2(0.5 * outer / lam)
    rhos = lam * 2.0 ** np.linspace(0.0, octaves, max(2, int(np.ceil(octaves * per_octave)) + 1))
    dyadic = dens.arc_energy(center, 2 * rhos) - dens.arc_energy(center, rhos)
    sup_sqrt = float(np.sqrt(max(dyadic.max(), 0.0)))
    total = float(dens.arc_energy(center, outer) - dens.arc_energy(center, lam))
    total_l2 = float(np.sqrt(max(total, 0.0)))

    h = dens.grid.measure_weight
    d = arc_distance(dens.grid.nodes, center)
    mag = np.sqrt(dens.values)
    neck2 = (d >= lam) & (d < 0.5 * outer)
    l2inf = lorentz_from_samples(mag[neck2], h, "2inf")
    ann = (d >= lam) & (d < outer)
    lhs = float(h * np.sum(dens.values[ann]))
    rhs = lorentz_from_samples(mag, h, "21") * lorentz_from_samples(mag[ann], h, "2inf")

    if sup_sqrt == 0.0:
        if total > 0.0:
            raise InconsistentProfileError("neck energy is positive while every dyadic annulus is empty")
        ratio = energy_ratio = 0.0
    else:
        ratio = total_l2 / sup_sqrt
        energy_ratio = total / sup_sqrt
    return NeckReport(float(center), float(lam), float(Lam), sup_sqrt, total_l2, l2inf, ratio, energy_ratio, lhs, rhs)


# --------------------------------------------------------------------------- extraction


@dataclass(frozen=True, eq=False)
class Extraction:
    """A blown-up map together with the chart that produced it.

    ``span`` is the half-width of the window in rescaled units ``y``: the
    target grid covers ``|y| <= span`` for the linear chart.
    """

    bubble: SphereMap
    center: float
    rho: float
    span: float
    chart: str
    renormalization_shift: float

    def window_angle(self, window: float) -> float:
        """Angle on the target grid bounding ``|y| <= window``."""
        if self.chart == "linear":
            return min(np.pi * window / self.span, np.pi)
        return min(2.0 * np.arctan(window), np.pi)


DEFAULT_SPAN = 64.0


def chart_angles(phi: np.ndarray, center: float, rho: float, span: float | None = None, chart: str = "linear") -> np.ndarray:
    """Source angles for target angles ``phi`` (taken in ``[-pi, pi)``).

    ``linear``
        ``theta = c + rho * span * phi / pi``: the arc ``B(c, rho span)`` read
        in the rescaled variable ``y = (theta - c) / rho`` and stretched over
        the whole target circle.
    ``conformal``
        ``theta = c + 2 arctan(tan(rho/2) tan(phi/2))``, the dilation
        ``y -> tan(rho/2) y`` in stereographic coordinates.  It covers the
        whole source circle and preserves the total energy exactly, but the
        density ``|(-Delta)^{1/4} u|^2`` is not conformally covariant, so arc
        energies are not carried over.
    """
    phi = np.mod(np.asarray(phi) + np.pi, TWO_PI) - np.pi
    if chart == "linear":
        if span is None or not 0 < rho * span <= np.pi + 1e-12:
            raise InvalidInputError("linear chart needs 0 < rho * span <= pi")
        return center + rho * span * phi / np.pi
    if chart == "conformal":
        return center + 2.0 * np.arctan(np.tan(0.5 * rho) * np.tan(0.5 * phi))
    raise InvalidInputError(f"chart must be 'linear' or 'conformal', got {chart!r}")


def rescale_extract(
    u: SphereMap,
    center: float,
    rho: float,
    target_grid: PeriodicGrid | None = None,
    span: float | None = None,
    chart: str = "linear",
    max_shift: float = 1e-3,
) -> Extraction:
    """Blow ``u`` up around ``center`` at scale ``rho``: ``v(y) = u(center + rho y)``.

    With the default linear chart the target grid samples ``|y| <= span``
    (default ``min(64, pi/rho)``), so the unit window ``|y| <= 1`` is the arc
    ``B(center, rho)``.  Values come from trigonometric interpolation of
    ``u`` and are renormalized onto the sphere; the largest correction is
    reported as the renormalization shift.  The two ends of the window meet
    on the target circle, which leaves a seam unless ``u`` takes the same
    value there.
    """
    if not 0.0 < rho <= np.pi / 4:
        raise InvalidInputError(f"rho must lie in (0, pi/4], got {rho}")
    target_grid = PeriodicGrid(1024) if target_grid is None else target_grid
    if span is None:
        span = min(DEFAULT_SPAN, np.pi / rho)
    thetas = chart_angles(target_grid.nodes, center, rho, span, chart)
    vals = evaluate(u.field, thetas)
    norms = np.sqrt(np.sum(vals * vals, axis=0))
    shift = float(np.max(np.abs(norms - 1.0)))
    if shift > max_shift:
        raise ExtractionUnreliableError(
            f"renormalization shift {shift:.3e} exceeds {max_shift:.1e}; refine the source grid"
        )
    bubble = SphereMap(Field(target_grid, project_to_sphere(vals)))
    return Extraction(bubble, float(center), float(rho), float(span), chart, shift)


def window_energy(ex: Extraction, window: float) -> float:
    """Energy of an extracted map on the rescaled window ``|y| <= window``."""
    if not window > 0:
        raise InvalidInputError("window must be positive")
    return local_energy(ex.bubble, 0.0, ex.window_angle(window))


# --------------------------------------------------------------------------- quantization


@dataclass(frozen=True)
class MemberTrack:
    """One family member's view of a concentration point."""

    member: int
    center: float
    rho: float
    mass: float
    raw_mass: float
    neck: NeckReport | None
    bubble_energy: float | None
    bubble_window_energy: float | None
    extraction_shift: float | None


@dataclass(frozen=True)
class PointReport:
    center: float
    rho_last: float
    rho_first: float
    tracks: tuple[MemberTrack, ...]
    nearest_multiple: int
    deviation: float
    mass_monotone: bool

    @property
    def masses(self) -> list[float]:
        return [t.mass for t in self.tracks]


@dataclass(frozen=True)
class ConcentrationReport:
    gamma: float
    alpha: float
    c0: float
    far_radius: float
    member_energies: tuple[float, ...]
    points: tuple[PointReport, ...]
    rejected: tuple[tuple[float, float], ...]
    far_mask: np.ndarray = dc_field(repr=False, compare=False)
    far_values: np.ndarray = dc_field(repr=False, compare=False)

    def far_sup_distance(self, target: Sequence[float]) -> float:
        """``sup |u_last - target|`` over the far region (the weak-limit proxy)."""
        if self.far_values.size == 0:
            return 0.0
        t = np.asarray(target, dtype=float)[:, None]
        return float(np.max(np.sqrt(np.sum((self.far_values - t) ** 2, axis=0))))

    def to_dict(self) -> dict:
        """JSON-ready summary (arrays omitted)."""
        def neck(n: NeckReport | None):
            if n is None:
                return None
            return {
                "lambda": n.lam, "Lambda": n.Lam, "sup_dyadic_sqrt": n.sup_dyadic_sqrt,
                "total_L2": n.total_L2, "lorentz_2inf_on_annulus": n.lorentz_2inf_on_annulus,
                "ratio": n.ratio, "energy_ratio": n.energy_ratio,
                "duality_lhs": n.duality_lhs, "duality_rhs": n.duality_rhs,
                "duality_holds": n.duality_holds,
            }

        return {
            "gamma": self.gamma,
            "alpha": self.alpha,
            "c0": self.c0,
            "far_radius": self.far_radius,
            "member_energies": list(self.member_energies),
            "points": [
                {
                    "center": p.center,
                    "rho_first": p.rho_first,
                    "rho_last": p.rho_last,
                    "nearest_multiple_of_2pi": p.nearest_multiple,
                    "deviation": p.deviation,
                    "mass_monotone": p.mass_monotone,
                    "tracks": [
                        {
                            "member": t.member, "center": t.center, "rho": t.rho, "mass": t.mass,
                            "raw_mass": t.raw_mass, "neck": neck(t.neck),
                            "bubble_energy": t.bubble_energy,
                            "bubble_window_energy": t.bubble_window_energy,
                            "extraction_shift": t.extraction_shift,
                        }
                        for t in p.tracks
                    ],
                }
                for p in self.points
            ],
            "rejected_candidates": [list(r) for r in self.rejected],
        }


def point_mass(dens: EnergyDensity, center: float, alpha: float) -> tuple[float, float]:
    """``(corrected, raw)`` mass at ``center``.

    ``raw`` is ``E(B(c, alpha))``.  A smooth body contributes only odd powers
    to a centered arc energy, ``E_body(r) = 2 D r + D'' r^3 / 3 + ...``, so the
    combination ``(16 E(r) - 10 E(2r) + E(4r)) / 7`` with ``r = alpha / 4``
    cancels its first two terms while keeping a point mass intact.  The
    result is clipped at zero.
    """
    r = 0.25 * alpha
    e1, e2, e4 = (float(dens.arc_energy(center, k * r)) for k in (1, 2, 4))
    corrected = (16.0 * e1 - 10.0 * e2 + e4) / 7.0
    return max(corrected, 0.0), e4


def _is_monotone(seq: Sequence[float], tol: float = 1e-9) -> bool:
    d = np.diff(np.asarray(seq))
    return bool(np.all(d >= -tol) or np.all(d <= tol))


def quantization_report(
    family: Sequence[SphereMap],
    gamma: float = DEFAULT_GAMMA,
    alpha: float = 0.5,
    far_radius: float = 1.0,
    rho_max: float = 0.1,
    shrink: float = 4.0,
    neck_factor: float = 4.0,
    c0: float = DEFAULT_C0,
    target_points: int = 1024,
    max_points: int = 8,
) -> ConcentrationReport:
    """Concentration points, masses, necks and bubbles along a map sequence.

    Candidates come from the last member: the smallest ``gamma``-radius is
    located, its ``alpha``-neighbourhood masked, and the search repeated.  A
    candidate is a concentration point when its radius is at most
    ``rho_max`` and has shrunk by at least ``shrink`` since the first member.
    For each point and member the report records the tracked center and
    radius, the corrected mass (see :func:`point_mass`), the neck check on
    ``B(x, alpha) \\ B(x, neck_factor * rho)`` and the bubble extracted at
    scale ``rho``.  The far region is everything at distance ``>= far_radius``
    from every point; the last member's values there stand in for the weak limit.
    """
    if len(family) < 2:
        raise InsufficientFamilyError(f"need at least 2 family members, got {len(family)}")
    grid = family[0].grid
    if any(u.grid != grid for u in family):
        raise InvalidInputError("family members must share a grid")
    if not gamma > 0:
        raise InvalidInputError("gamma must be positive")
    dens = [EnergyDensity.of(u) for u in family]
    energies = tuple(energy(u) for u in family)
    nodes = grid.nodes
    last, first = dens[-1], dens[0]

    keep = np.ones(grid.n_points, dtype=bool)
    accepted: list[Concentration] = []
    rejected: list[tuple[float, float]] = []
    for _ in range(max_points):
        cand = concentration_radius(last.masked(keep), gamma)
        if cand is None:
            break
        keep &= arc_distance(nodes, cand.center) > alpha
        start = concentration_radius(first, gamma, region=(cand.center, alpha))
        rho_first = start.rho if start is not None else np.pi
        if cand.rho <= rho_max and rho_first / cand.rho >= shrink:
            accepted.append(cand)
        else:
            rejected.append((cand.center, cand.rho))

    target = PeriodicGrid(target_points)
    points = []
    for cand in accepted:
        tracks = []
        for k, (u, dk) in enumerate(zip(family, dens)):
            c = concentration_radius(dk, gamma, region=(cand.center, alpha))
            if c is None:
                continue
            mass, raw = point_mass(dk, c.center, alpha)
            lam = neck_factor * c.rho
            neck = neck_check(dk, c.center, lam, 1.0 / alpha) if lam < 0.5 * alpha else None
            b_energy = b_window = shift = None
            if c.rho <= np.pi / 4:
                try:
                    ex = rescale_extract(u, c.center, c.rho, target, span=min(DEFAULT_SPAN, alpha / c.rho))
                except ExtractionUnreliableError:
                    ex = None
                if ex is not None:
                    b_energy = energy(ex.bubble)
                    b_window = window_energy(ex, 1.0)
                    shift = ex.renormalization_shift
            tracks.append(MemberTrack(k, c.center, c.rho, mass, raw, neck, b_energy, b_window, shift))
        final_mass = tracks[-1].mass
        mult = int(max(1, np.rint(final_mass / TWO_PI)))
        dev = abs(final_mass - TWO_PI * mult) / (TWO_PI * mult)
        points.append(
            PointReport(
                cand.center, cand.rho, tracks[0].rho, tuple(tracks), mult, float(dev),
                _is_monotone([t.mass for t in tracks]),
            )
        )

    far = np.ones(grid.n_points, dtype=bool)
    for p in accepted:
        far &= arc_distance(nodes, p.center) >= far_radius
    return ConcentrationReport(
        float(gamma), float(alpha), float(c0), float(far_radius), energies, tuple(points), tuple(rejected),
        far, family[-1].values[:, far],
    )


def mobius_family(
    grid: PeriodicGrid, exponents: Sequence[int] = tuple(range(2, 9)), extra_zeros: Sequence[complex] = ()
) -> list[SphereMap]:
    """Blaschke traces with zeros ``a_n = 1 - 2^{-n}`` (plus any fixed ``extra_zeros``)."""
    from .halfharmonic import BlaschkeSpec, blaschke_trace

    return [blaschke_trace(BlaschkeSpec((1.0 - 2.0**-n, *extra_zeros)), grid) for n in exponents]
