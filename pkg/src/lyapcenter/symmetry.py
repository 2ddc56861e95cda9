"""Group actions, orbit geometry, and admissibility of subgroup pairs.

Two kinds of symmetry show up.  Continuous: SO(2) acting on R^n by rotating
designated coordinate pairs simultaneously (coordinates outside every pair are
fixed); this is the symmetry the bifurcation machinery certifies against.
Finite: an abstract group given by its multiplication table, used to test
whether a pair (G, H) is admissible, i.e. whether distinct H-conjugacy classes
of subgroups of H stay distinct inside G.  Admissibility is what licenses
transporting Euler-ring computations from a subgroup to the full group
without collapsing basis elements.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Optional, Sequence, Union

import numpy as np

__all__ = [
    "BlockRotation",
    "OrbitGeometry",
    "orbit_geometry",
    "orbit_distance",
    "rotate",
    "FinitePermGroup",
    "AdmissibilityVerdict",
    "check_admissible_finite",
    "admissible_gamma_cross_s1",
    "permutation_group",
    "cyclic_group",
    "dihedral_group",
    "direct_product",
    "tetrahedral_rotation_group",
    "standard_blocks",
]


def standard_blocks(m: int) -> tuple:
    """Coordinate pairs (0,1), (2,3), ... for m consecutive planes."""
    return tuple((2 * i, 2 * i + 1) for i in range(m))


@dataclass(frozen=True)
class BlockRotation:
    """SO(2) acting diagonally on chosen coordinate pairs of R^n."""

    n: int
    blocks: tuple  # ((i, j), ...) disjoint index pairs

    def __post_init__(self):
        seen = set()
        for i, j in self.blocks:
            if not (0 <= i < self.n and 0 <= j < self.n) or i == j:
                raise ValueError(f"bad block ({i}, {j}) for dimension {self.n}")
            if i in seen or j in seen:
                raise ValueError("blocks must use disjoint coordinates")
            seen.update((i, j))

    @property
    def fixed_indices(self) -> tuple:
        used = {k for b in self.blocks for k in b}
        return tuple(k for k in range(self.n) if k not in used)

    def generator_matrix(self) -> np.ndarray:
        J = np.zeros((self.n, self.n))
        for i, j in self.blocks:
            J[j, i] = 1.0
            J[i, j] = -1.0
        return J


def rotate(action: BlockRotation, q: np.ndarray, theta: float) -> np.ndarray:
    """Apply the group element with angle theta to a point."""
    q = np.asarray(q, dtype=float)
    out = q.copy()
    c, s = np.cos(theta), np.sin(theta)
    for i, j in action.blocks:
        out[i] = c * q[i] - s * q[j]
        out[j] = s * q[i] + c * q[j]
    return out


@dataclass(frozen=True)
class OrbitGeometry:
    """Local data of the group orbit through a point."""

    point: np.ndarray
    orbit_dim: int
    tangent_basis: np.ndarray  # rows span the orbit tangent at point
    normal_basis: np.ndarray   # rows complete tangent to an orthonormal basis
    isotropy_trivial: bool
    isotropy_label: str


def orbit_geometry(action: BlockRotation, q0: np.ndarray, tol: float = 1e-10) -> OrbitGeometry:
    """Tangent/normal splitting and isotropy of the orbit through q0.

    The tangent directions are the per-block generator images J_b q0 with the
    near-zero ones dropped; the isotropy of the rotation action is trivial
    exactly when some block component of q0 is nonzero.
    """
    if not isinstance(action, BlockRotation):
        raise TypeError("orbit geometry is defined for block-rotation actions")
    q0 = np.asarray(q0, dtype=float)
    if q0.shape != (action.n,):
        raise ValueError(f"expected a point in R^{action.n}")
    scale = tol * (1.0 + float(np.linalg.norm(q0)))

    tangent = []
    normal = []
    for i, j in action.blocks:
        v = np.zeros(action.n)
        v[i], v[j] = -q0[j], q0[i]
        r = float(np.hypot(q0[i], q0[j]))
        if float(np.linalg.norm(v)) > scale:
            tangent.append(v / np.linalg.norm(v))
            radial = np.zeros(action.n)
            radial[i], radial[j] = q0[i] / r, q0[j] / r
            normal.append(radial)
        else:
            for k in (i, j):
                e = np.zeros(action.n)
                e[k] = 1.0
                normal.append(e)
    for k in action.fixed_indices:
        e = np.zeros(action.n)
        e[k] = 1.0
        normal.append(e)

    trivial = len(tangent) > 0
    tangent_basis = np.array(tangent) if tangent else np.zeros((0, action.n))
    return OrbitGeometry(
        point=q0,
        orbit_dim=len(tangent),
        tangent_basis=tangent_basis,
        normal_basis=np.array(normal),
        isotropy_trivial=trivial,
        isotropy_label="{e}" if trivial else "SO(2)",
    )


def orbit_distance(action: BlockRotation, q0: np.ndarray, x: np.ndarray) -> float:
    """Euclidean distance from x to the rotation orbit through q0 (closed form)."""
    q0 = np.asarray(q0, dtype=float)
    x = np.asarray(x, dtype=float)
    d2 = 0.0
    for k in action.fixed_indices:
        d2 += (x[k] - q0[k]) ** 2
    a = b = 0.0
    for i, j in action.blocks:
        d2 += x[i] ** 2 + x[j] ** 2 + q0[i] ** 2 + q0[j] ** 2
        a += x[i] * q0[i] + x[j] * q0[j]
        b += -x[i] * q0[j] + x[j] * q0[i]
    d2 -= 2.0 * float(np.hypot(a, b))
    return float(np.sqrt(max(d2, 0.0)))


# ---------------------------------------------------------------------------
# finite groups given by multiplication tables


@dataclass(frozen=True)
class FinitePermGroup:
    """Finite group as a multiplication table with element names."""

    order: int
    table: tuple   # table[a][b] = index of product a*b
    names: tuple

    def __post_init__(self):
        n = self.order
        if len(self.table) != n or any(len(row) != n for row in self.table):
            raise ValueError("table must be order x order")
        if len(self.names) != n or len(set(self.names)) != n:
            raise ValueError("need one distinct name per element")
        flat = np.array(self.table, dtype=np.int64)
        if flat.min() < 0 or flat.max() >= n:
            raise ValueError("table entries must be element indices")
        # associativity, identity and inverses checked up front so later code
        # can assume an honest group
        if self.identity is None:
            raise ValueError("table has no identity element")
        e = self.identity
        for a in range(n):
            if e not in flat[a]:
                raise ValueError(f"element {self.names[a]!r} has no inverse")
        for a in range(n):
            left = flat[flat[a]]     # left[b,c] = (a*b)*c
            right = flat[a][flat]    # right[b,c] = a*(b*c)
            if not np.array_equal(left, right):
                raise ValueError("table is not associative")

    @property
    def identity(self) -> Optional[int]:
        for e in range(self.order):
            if all(self.table[e][j] == j and self.table[j][e] == j
                   for j in range(self.order)):
                return e
        return None

    def inverse(self, a: int) -> int:
        e = self.identity
        for b in range(self.order):
            if self.table[a][b] == e:
                return b
        raise ValueError("no inverse")  # unreachable after validation

    def conjugate(self, g: int, a: int) -> int:
        return self.table[self.table[g][a]][self.inverse(g)]

    def conjugate_set(self, g: int, subset: frozenset) -> frozenset:
        ginv = self.inverse(g)
        return frozenset(self.table[self.table[g][a]][ginv] for a in subset)

    def closure(self, gens: Sequence[int]) -> frozenset:
        e = self.identity
        elems = {e}
        frontier = [e]
        gens = list(gens)
        while frontier:
            a = frontier.pop()
            for g in gens:
                b = self.table[a][g]
                if b not in elems:
                    elems.add(b)
                    frontier.append(b)
        return frozenset(elems)

    def is_subgroup(self, subset: frozenset) -> bool:
        if self.identity not in subset:
            return False
        return all(self.table[a][b] in subset for a in subset for b in subset)

    def subgroups_within(self, ambient: frozenset) -> list:
        """All subgroups contained in a given subgroup, by cyclic extension."""
        cyclic = {self.closure([a]) for a in ambient}
        cyclic.add(frozenset({self.identity}))
        subs = set(cyclic)
        frontier = list(cyclic)
        while frontier:
            s = frontier.pop()
            for a in ambient:
                if a in s:
                    continue
                t = self.closure(list(s) + [a])
                if t not in subs and t <= ambient:
                    subs.add(t)
                    frontier.append(t)
        return sorted(subs, key=lambda s: (len(s), sorted(s)))

    def to_json(self) -> dict:
        return {"order": self.order,
                "table": [list(row) for row in self.table],
                "names": list(self.names)}

    @staticmethod
    def from_json(data: Union[str, dict]) -> "FinitePermGroup":
        if isinstance(data, str):
            with open(data, "r", encoding="utf-8") as fh:
                data = json.load(fh)
        try:
            order = int(data["order"])
            table = tuple(tuple(int(v) for v in row) for row in data["table"])
            names = tuple(str(s) for s in data["names"])
        except (KeyError, TypeError, ValueError) as exc:
            raise ValueError(f"malformed group table: {exc}") from exc
        return FinitePermGroup(order, table, names)


@dataclass(frozen=True)
class AdmissibilityVerdict:
    """Outcome of an admissibility check; a witness pair accompanies failure."""

    admissible: bool
    witness: Optional[tuple] = None        # (subgroup K1, subgroup K2) as frozensets
    witness_conjugator: Optional[int] = None
    reason: str = ""

    def __post_init__(self):
        if self.admissible and self.witness is not None:
            raise ValueError("admissible verdicts carry no witness")
        if not self.admissible and self.witness is None:
            raise ValueError("failure verdicts must carry a witness pair")


def _canonical_under(group: FinitePermGroup, subgroup: frozenset, by: Sequence[int]):
    best = None
    best_g = None
    for g in by:
        c = tuple(sorted(group.conjugate_set(g, subgroup)))
        if best is None or c < best:
            best, best_g = c, g
    return best, best_g


def check_admissible_finite(group: FinitePermGroup, subgroup: frozenset) -> AdmissibilityVerdict:
    """Do distinct H-conjugacy classes of subgroups of H stay distinct in G?

    Enumerates every subgroup of H, partitions them by H-conjugacy and by
    G-conjugacy, and reports a fusing pair (with the conjugating element) when
    two H-classes fall into one G-class.
    """
    subgroup = frozenset(subgroup)
    if not group.is_subgroup(subgroup):
        raise ValueError("the given subset is not a subgroup")
    subs = group.subgroups_within(subgroup)
    h_elems = sorted(subgroup)
    g_elems = list(range(group.order))

    h_reps = {}
    for s in subs:
        key, _ = _canonical_under(group, s, h_elems)
        h_reps.setdefault(key, s)

    g_classes = {}
    for key, rep in sorted(h_reps.items()):
        gkey, _ = _canonical_under(group, rep, g_elems)
        if gkey in g_classes:
            other = g_classes[gkey]
            conj = None
            for g in g_elems:
                if group.conjugate_set(g, other) == rep:
                    conj = g
                    break
            return AdmissibilityVerdict(
                admissible=False,
                witness=(other, rep),
                witness_conjugator=conj,
                reason=("distinct H-conjugacy classes of subgroups fuse under "
                        f"conjugation by {group.names[conj]!r}"),
            )
        g_classes[gkey] = rep
    return AdmissibilityVerdict(
        admissible=True,
        reason="every pair of distinct H-conjugacy classes stays distinct in G",
    )


def admissible_gamma_cross_s1() -> AdmissibilityVerdict:
    """Admissibility of ({e} x S^1) inside (Gamma x S^1), which always holds.

    Subgroups of the circle factor are the full circle and the finite cyclic
    groups, which have pairwise different cardinalities; conjugation preserves
    cardinality, so distinct classes can never merge in the larger group.
    """
    return AdmissibilityVerdict(
        admissible=True,
        reason=("subgroups of the circle factor are determined by their "
                "cardinality, which conjugation preserves"),
    )


# ---------------------------------------------------------------------------
# constructors for concrete finite groups


def _compose(p: tuple, q: tuple) -> tuple:
    return tuple(p[q[i]] for i in range(len(p)))


def _cycle_name(p: tuple) -> str:
    seen = [False] * len(p)
    parts = []
    for i in range(len(p)):
        if seen[i] or p[i] == i:
            seen[i] = True
            continue
        cyc = [i]
        seen[i] = True
        j = p[i]
        while j != i:
            cyc.append(j)
            seen[j] = True
            j = p[j]
        parts.append("(" + " ".join(str(k + 1) for k in cyc) + ")")
    return "".join(parts) if parts else "e"


def permutation_group(generators: Sequence[tuple]) -> FinitePermGroup:
    """Group generated by permutations (tuples mapping i to p[i])."""
    degree = len(generators[0])
    identity = tuple(range(degree))
    elems = {identity}
    frontier = [identity]
    while frontier:
        a = frontier.pop()
        for g in generators:
            b = _compose(a, g)
            if b not in elems:
                elems.add(b)
                frontier.append(b)
    ordered = sorted(elems)
    index = {p: i for i, p in enumerate(ordered)}
    table = tuple(tuple(index[_compose(a, b)] for b in ordered) for a in ordered)
    names = tuple(_cycle_name(p) for p in ordered)
    return FinitePermGroup(len(ordered), table, names)


def cyclic_group(k: int) -> FinitePermGroup:
    table = tuple(tuple((a + b) % k for b in range(k)) for a in range(k))
    names = tuple(f"r{a}" if a else "e" for a in range(k))
    return FinitePermGroup(k, table, names)


def dihedral_group(k: int) -> FinitePermGroup:
    rot = tuple((i + 1) % k for i in range(k))
    flip = tuple((k - i) % k for i in range(k))
    return permutation_group([rot, flip])


def direct_product(a: FinitePermGroup, b: FinitePermGroup) -> FinitePermGroup:
    order = a.order * b.order
    idx = lambda i, j: i * b.order + j
    table = tuple(
        tuple(idx(a.table[i1][i2], b.table[j1][j2]) for i2 in range(a.order)
              for j2 in range(b.order))
        for i1 in range(a.order) for j1 in range(b.order)
    )
    names = tuple(f"{na}|{nb}" for na in a.names for nb in b.names)
    return FinitePermGroup(order, table, names)


def tetrahedral_rotation_group() -> FinitePermGroup:
    """Even permutations of four points: rotations of the tetrahedron."""
    return permutation_group([(1, 2, 0, 3), (1, 0, 3, 2)])
