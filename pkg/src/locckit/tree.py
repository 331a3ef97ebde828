"""LOCC protocol trees and repeating-cycle descriptors.

Nodes carry the acting party's cumulative local POVM element; a tree is
valid when every sibling set sums to its closest same-party ancestor
element (the identity at the top).  Infinite tails are represented by a
:class:`CycleDescriptor`, a repeating block of two-outcome measurements
whose continuing elements return to a scalar multiple of the entry pair.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import ops
from .measurement import Measurement, ProductKraus, canonicalize

Path = tuple[int, ...]


class InvalidTreeError(ValueError):
    """Tree fails structural or sibling-sum validation."""


@dataclass(frozen=True)
class LoccNode:
    """One measurement outcome.  ``party`` is None only at the root."""

    party: int | None
    cumulative_local: np.ndarray | None
    children: tuple["LoccNode", ...] = ()
    leaf_isometries: tuple[np.ndarray, ...] | None = None

    def __post_init__(self):
        if self.cumulative_local is not None:
            object.__setattr__(self, "cumulative_local", ops.as_matrix(self.cumulative_local))
        object.__setattr__(self, "children", tuple(self.children))
        if self.leaf_isometries is not None:
            if self.children:
                raise InvalidTreeError("leaf isometries are only allowed on childless nodes")
            object.__setattr__(
                self, "leaf_isometries", tuple(ops.as_matrix(u) for u in self.leaf_isometries)
            )

    @property
    def is_leaf(self) -> bool:
        return not self.children


@dataclass(frozen=True)
class LoccTree:
    """Finite protocol tree; the implicit root cumulative is the identity."""

    party_dims: tuple[int, ...]
    root: LoccNode

    def __post_init__(self):
        object.__setattr__(self, "party_dims", tuple(int(d) for d in self.party_dims))
        if self.root.party is not None or self.root.cumulative_local is not None:
            raise InvalidTreeError("root node must not carry a party or cumulative element")

    def node_at(self, path: Path) -> LoccNode:
        node = self.root
        for i in path:
            node = node.children[i]
        return node

    def leaves(self) -> list[Path]:
        out: list[Path] = []

        def walk(node: LoccNode, path: Path):
            if node.is_leaf:
                out.append(path)
            for i, c in enumerate(node.children):
                walk(c, path + (i,))

        walk(self.root, ())
        return out

    def cumulatives_at(self, path: Path) -> list[np.ndarray]:
        """Per-party cumulative elements in effect at ``path``."""
        cums = [np.eye(d, dtype=complex) for d in self.party_dims]
        node = self.root
        for i in path:
            node = node.children[i]
            if node.party is not None and node.cumulative_local is not None:
                cums[node.party] = node.cumulative_local
        return cums


@dataclass
class ValidationReport:
    valid: bool
    violations: list[str] = field(default_factory=list)


def _format_path(path: Path) -> str:
    return "root" + "".join(f"/{i}" for i in path)


def validate(t: LoccTree, tol: float = 1e-9) -> ValidationReport:
    """Check sibling sums and PSD-ness at every node; violations are
    collected, not raised."""
    violations: list[str] = []

    def walk(node: LoccNode, path: Path, cums: list[np.ndarray]):
        if node.party is not None:
            if not (0 <= node.party < len(t.party_dims)):
                violations.append(f"{_format_path(path)}: party index {node.party} out of range")
                return
            label = node.cumulative_local
            if label is None or label.shape != (t.party_dims[node.party],) * 2:
                violations.append(f"{_format_path(path)}: bad or missing cumulative element")
                return
            if not ops.is_psd(label, tol_herm=tol, tol_psd=tol):
                violations.append(f"{_format_path(path)}: cumulative element is not PSD")
        if node.children:
            parties = {c.party for c in node.children}
            if len(parties) != 1 or None in parties:
                violations.append(f"{_format_path(path)}: children do not share one acting party")
                return
            (party,) = parties
            parent = cums[party]
            total = sum(c.cumulative_local for c in node.children if c.cumulative_local is not None)
            if not isinstance(total, np.ndarray) or np.max(np.abs(total - parent)) > tol:
                violations.append(
                    f"{_format_path(path)}: children of party {party} sum off by "
                    f"{np.max(np.abs(total - parent)):.3e}"
                )
        for i, c in enumerate(node.children):
            sub = list(cums)
            if c.party is not None and c.cumulative_local is not None:
                sub[c.party] = c.cumulative_local
            walk(c, path + (i,), sub)

    identities = [np.eye(d, dtype=complex) for d in t.party_dims]
    walk(t.root, (), identities)
    return ValidationReport(valid=not violations, violations=violations)


def leaf_measurement(t: LoccTree, tol: float = 1e-9) -> Measurement:
    """Measurement implemented by the tree.

    Each leaf contributes the product Kraus operator built from per-party
    PSD roots of cumulative elements, composed with optional leaf
    isometries, and the collection is canonicalized.
    """
    report = validate(t, tol)
    if not report.valid:
        raise InvalidTreeError("; ".join(report.violations))
    raw = []
    for path in t.leaves():
        node = t.node_at(path)
        cums = t.cumulatives_at(path)
        factors = []
        for party, cum in enumerate(cums):
            k = ops.psd_sqrt(cum, tol_herm=1e-8, tol_psd=1e-8)
            if node.leaf_isometries is not None:
                factors.append(node.leaf_isometries[party] @ k)
            else:
                factors.append(k)
        raw.append(ProductKraus(1.0, tuple(factors)))
    return canonicalize(raw, t.party_dims)


@dataclass
class LocalStep:
    """Recovered individual measurement at one internal node."""

    path: Path
    party: int
    operators: list[np.ndarray]
    completeness_residual: float
    support_shrinks: list[bool]

    @property
    def complete_on_support(self) -> bool:
        return self.completeness_residual <= 1e-8


def local_steps(t: LoccTree, tol: float = 1e-9) -> list[LocalStep]:
    """Right-divide cumulative elements to recover per-node measurements.

    For each internal node the children's individual Kraus operators are
    ``sqrt(child) pinv(sqrt(parent))``; their squared sum must be the
    projector onto the parent's support.  Children that continue the
    protocol on a strictly smaller support are flagged.
    """
    report = validate(t, tol)
    if not report.valid:
        raise InvalidTreeError("; ".join(report.violations))
    steps: list[LocalStep] = []

    def walk(node: LoccNode, path: Path, cums: list[np.ndarray]):
        if node.children:
            party = node.children[0].party
            parent = cums[party]
            root_parent = ops.psd_sqrt(parent, tol_herm=1e-8, tol_psd=1e-8)
            inv = ops.pseudo_inverse(root_parent)
            operators = []
            shrink = []
            parent_rank = int(np.linalg.matrix_rank(parent, tol=1e-9, hermitian=True))
            for c in node.children:
                a = ops.psd_sqrt(c.cumulative_local, tol_herm=1e-8, tol_psd=1e-8) @ inv
                operators.append(a)
                child_rank = int(
                    np.linalg.matrix_rank(c.cumulative_local, tol=1e-9, hermitian=True)
                )
                shrink.append(bool(c.children) and child_rank < parent_rank)
            gram = sum(ops.dagger(a) @ a for a in operators)
            residual = float(np.max(np.abs(gram - ops.support_projector(parent))))
            steps.append(LocalStep(path, party, operators, residual, shrink))
        for i, c in enumerate(node.children):
            sub = list(cums)
            if c.party is not None and c.cumulative_local is not None:
                sub[c.party] = c.cumulative_local
            walk(c, path + (i,), sub)

    identities = [np.eye(d, dtype=complex) for d in t.party_dims]
    walk(t.root, (), identities)
    return steps


def random_finite_tree(party_dims, depth: int, branching: int, seed: int = 0) -> LoccTree:
    """Random valid tree with alternating parties and strict PSD splits.

    Each level splits the acting party's cumulative element through random
    PSD operators renormalized by symmetric conjugation, so sibling sums
    hold exactly and every cumulative stays full rank almost surely.
    """
    if depth < 1:
        raise ValueError("depth must be at least 1")
    if branching < 2:
        raise ValueError("branching must be at least 2")
    party_dims = tuple(int(d) for d in party_dims)
    rng = ops.rng_from_seed(seed)

    def build(level: int, cums: list[np.ndarray]) -> tuple[LoccNode, ...]:
        party = level % len(party_dims)
        parent = cums[party]
        dim = party_dims[party]
        raw = [ops.random_psd(rng, dim) for _ in range(branching)]
        total = sum(raw)
        norm = ops.pseudo_inverse(ops.psd_sqrt(total, tol_herm=1e-8, tol_psd=1e-8))
        root_parent = ops.psd_sqrt(parent, tol_herm=1e-8, tol_psd=1e-8)
        children = []
        for g in raw:
            t_i = norm @ g @ norm
            cum = root_parent @ t_i @ root_parent
            cum = (cum + ops.dagger(cum)) / 2.0
            if level + 1 < depth:
                sub = list(cums)
                sub[party] = cum
                children.append(LoccNode(party, cum, build(level + 1, sub)))
            else:
                children.append(LoccNode(party, cum))
        return tuple(children)

    identities = [np.eye(d, dtype=complex) for d in party_dims]
    return LoccTree(party_dims, LoccNode(None, None, build(0, identities)))


# ---------------------------------------------------------------------------
# repeating cycles


@dataclass(frozen=True)
class CycleStep:
    """One two-outcome measurement inside a cycle."""

    party: int
    terminal: np.ndarray
    continuing: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "terminal", ops.as_matrix(self.terminal))
        object.__setattr__(self, "continuing", ops.as_matrix(self.continuing))


class InconsistentCycleError(ValueError):
    """Cycle descriptor violates its internal sum or contraction relations."""


@dataclass(frozen=True)
class CycleDescriptor:
    """Repeating block of two-outcome measurements with geometric contraction.

    ``entry_povm`` holds each party's cumulative element at the cycle root;
    after one pass every party's continuing element is a scalar multiple of
    its entry, and those scalars multiply to ``contraction``.
    """

    entry_povm: tuple[np.ndarray, ...]
    steps: tuple[CycleStep, ...]
    contraction: float

    def __post_init__(self):
        object.__setattr__(self, "entry_povm", tuple(ops.as_matrix(e) for e in self.entry_povm))
        object.__setattr__(self, "steps", tuple(self.steps))

    @property
    def party_dims(self) -> tuple[int, ...]:
        return tuple(e.shape[0] for e in self.entry_povm)

    def party_factors(self) -> list[float]:
        """Per-party contraction factors carried by one pass of the cycle."""
        factors = []
        for party, entry in enumerate(self.entry_povm):
            last = None
            for s in self.steps:
                if s.party == party:
                    last = s.continuing
            if last is None:
                factors.append(1.0)
                continue
            te = np.trace(entry).real
            if te <= 0:
                raise InconsistentCycleError(f"party {party} entry element has nonpositive trace")
            factors.append(float(np.trace(last).real / te))
        return factors

    def check(self, tol: float = 1e-9) -> None:
        """Raise unless sums, tail proportionality, and contraction hold."""
        if not 0.0 < self.contraction < 1.0:
            raise InconsistentCycleError("contraction must lie in (0, 1)")
        current = list(self.entry_povm)
        for k, s in enumerate(self.steps):
            parent = current[s.party]
            gap = np.max(np.abs(s.terminal + s.continuing - parent))
            if gap > tol:
                raise InconsistentCycleError(f"step {k}: outcomes sum off by {gap:.3e}")
            for name, m in (("terminal", s.terminal), ("continuing", s.continuing)):
                if not ops.is_psd(m, tol_herm=1e-8, tol_psd=1e-8):
                    raise InconsistentCycleError(f"step {k}: {name} element is not PSD")
            current[s.party] = s.continuing
        factors = self.party_factors()
        for party, entry in enumerate(self.entry_povm):
            gap = np.max(np.abs(current[party] - factors[party] * entry))
            if gap > tol:
                raise InconsistentCycleError(
                    f"party {party}: cycle tail is not proportional to its entry (gap {gap:.3e})"
                )
        prod = float(np.prod(factors))
        if abs(prod - self.contraction) > tol:
            raise InconsistentCycleError(
                f"party factors multiply to {prod!r}, expected contraction {self.contraction!r}"
            )


def unroll(c: CycleDescriptor, repeats: int, tol: float = 1e-9) -> LoccTree:
    """Materialize ``repeats`` passes of the cycle as a finite tree.

    Pass ``r`` carries each party's labels scaled by that party's factor to
    the power ``r - 1``; the final continuing node is kept as an explicit
    residual leaf with cumulative ``factor^repeats * entry`` per party.
    """
    if repeats < 1:
        raise ValueError("repeats must be at least 1")
    c.check(tol)
    factors = c.party_factors()
    total_steps = repeats * len(c.steps)
    children: tuple[LoccNode, ...] = ()
    for g in range(total_steps - 1, -1, -1):
        r, k = divmod(g, len(c.steps))
        s = c.steps[k]
        sc = factors[s.party] ** r
        terminal = LoccNode(s.party, sc * s.terminal)
        continuing = LoccNode(s.party, sc * s.continuing, children)
        children = (terminal, continuing)
    return LoccTree(c.party_dims, LoccNode(None, None, children))
