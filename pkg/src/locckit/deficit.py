"""Ray grouping, the ray deficit, and the finite-round necessary condition.

For a canonical separable measurement, each party's local POVM elements
generate rays in the PSD cone.  The deficit counts repeated rays:
``delta = sum over parties and rays of (multiplicity - 1)``, equivalently
``P*N - sum_a R_a`` for N outcomes and R_a distinct rays per party.  Any
finite-round LOCC measurement with at least two distinct outcomes must
have ``delta >= P - 1``, so ``delta < P - 1`` certifies that no
finite-round protocol exists.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from . import ops
from .measurement import Measurement

#: pairs closer than the threshold but within this factor of it are unsafe
AMBIGUITY_FACTOR = 10.0


class Verdict(enum.Enum):
    TRIVIAL_ISOMETRY = "trivial-isometry"
    NOT_FINITE_ROUND_LOCC = "not-finite-round-locc"
    INCONCLUSIVE = "inconclusive"


@dataclass(frozen=True)
class RayGroup:
    """Outcomes whose local POVM parts share one ray for one party."""

    party: int
    representative: np.ndarray  # unit trace
    multiplicity: int
    members: tuple[int, ...]


@dataclass(frozen=True)
class DeficitReport:
    delta: int
    ray_counts: tuple[int, ...]
    groups: tuple[RayGroup, ...]
    n_outcomes: int
    party_count: int
    margin: float | None


def group_rays(m: Measurement, party: int, tol_ray: float = ops.TOL_RAY) -> list[RayGroup]:
    """Partition outcomes by proportionality of their local POVM parts.

    Clusters are keyed by lowest member index.  Raises
    :class:`~locckit.ops.RayAmbiguityError` when any pairwise distance
    falls in the unsafe band ``(tol_ray, 10 tol_ray]``, since the deficit
    is a discrete certificate and must not rest on a coin-flip cluster.
    """
    if not m.canonical:
        raise ValueError("ray grouping requires a canonical measurement")
    locals_ = []
    for idx, out in enumerate(m.outcomes):
        loc = out.local_povm(party)
        if not np.any(loc):
            raise ValueError(f"outcome {idx} has a zero local element for party {party}")
        locals_.append(loc / np.trace(loc).real)

    n = len(locals_)
    dist = np.zeros((n, n))
    for i in range(n):
        for j in range(i + 1, n):
            d = float(np.linalg.norm(locals_[i] - locals_[j]))
            dist[i, j] = dist[j, i] = d
            if tol_ray < d <= AMBIGUITY_FACTOR * tol_ray:
                raise ops.RayAmbiguityError(
                    f"party {party}: outcomes {i},{j} sit at normalized distance {d:.3e}, "
                    f"inside the unsafe band ({tol_ray:.1e}, {AMBIGUITY_FACTOR * tol_ray:.1e}]"
                )

    groups: list[RayGroup] = []
    assigned = [False] * n
    for i in range(n):
        if assigned[i]:
            continue
        members = [i]
        assigned[i] = True
        for j in range(i + 1, n):
            if not assigned[j] and dist[i, j] <= tol_ray:
                members.append(j)
                assigned[j] = True
        groups.append(RayGroup(party, locals_[i], len(members), tuple(members)))
    return groups


def _cross_group_margin(groups: list[RayGroup]) -> float | None:
    if len(groups) < 2:
        return None
    reps = [g.representative for g in groups]
    return min(
        float(np.linalg.norm(reps[i] - reps[j]))
        for i in range(len(reps))
        for j in range(i + 1, len(reps))
    )


def delta(m: Measurement, tol_ray: float = ops.TOL_RAY) -> DeficitReport:
    """Ray deficit with both counting formulas cross-checked.

    The multiplicity sum and the ``P*N - sum R_a`` form are computed
    independently and must agree exactly.
    """
    if not m.canonical:
        raise ValueError("deficit requires a canonical measurement")
    if not m.outcomes:
        raise ValueError("deficit requires at least one outcome")
    all_groups: list[RayGroup] = []
    ray_counts: list[int] = []
    margins: list[float] = []
    for party in range(m.party_count):
        groups = group_rays(m, party, tol_ray)
        all_groups.extend(groups)
        ray_counts.append(len(groups))
        margin = _cross_group_margin(groups)
        if margin is not None:
            margins.append(margin)

    by_multiplicity = sum(g.multiplicity - 1 for g in all_groups)
    n = len(m.outcomes)
    by_counts = m.party_count * n - sum(ray_counts)
    if by_multiplicity != by_counts:
        raise AssertionError(
            f"deficit formulas disagree: {by_multiplicity} != {by_counts}"
        )
    return DeficitReport(
        delta=by_multiplicity,
        ray_counts=tuple(ray_counts),
        groups=tuple(all_groups),
        n_outcomes=n,
        party_count=m.party_count,
        margin=min(margins) if margins else None,
    )


def classify(m: Measurement, tol_ray: float = ops.TOL_RAY) -> tuple[Verdict, DeficitReport]:
    """Apply the finite-round necessary condition.

    A single distinct outcome is a trivial isometry; ``delta < P - 1``
    with two or more outcomes rules out every finite-round protocol; a
    larger deficit is inconclusive (the condition is necessary only).
    """
    report = delta(m, tol_ray)
    if report.n_outcomes == 1:
        return Verdict.TRIVIAL_ISOMETRY, report
    if report.delta < report.party_count - 1:
        return Verdict.NOT_FINITE_ROUND_LOCC, report
    return Verdict.INCONCLUSIVE, report
