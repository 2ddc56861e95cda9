"""Locate critical orbits of an invariant potential and check the hypotheses.

The center theorem needs, at a critical point q0 with nontrivial frequency:

  (1) trivial isotropy of q0,
  (2) a non-degenerate orbit: dim ker Hess U(q0) equals the orbit dimension,
  (3) at least one positive eigenvalue mu = beta^2 of Hess U(q0),

plus non-resonance of the chosen frequency beta_j0 against the larger ones.
This module finds the critical orbits (exactly where the radii are rational,
numerically otherwise), packages the spectral data, evaluates the checklist,
and provides the Morse-block decomposition used to tell special orbits apart.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

import numpy as np

from lyapcenter.potentials import (
    BlockRadialPolynomial,
    Expression,
    PotentialSpec,
    RadialPolynomial,
)
from lyapcenter.symmetry import BlockRotation, OrbitGeometry, orbit_geometry
from lyapcenter.euler_ring import UGElement

__all__ = [
    "SearchConfig",
    "SpectralData",
    "HypothesisChecklist",
    "ResonanceCheck",
    "HessianBlocks",
    "CriticalOrbitRecord",
    "SpecialOrbitComparison",
    "DegenerateOrbitError",
    "UnsupportedCaseError",
    "find_critical_orbits",
    "hypothesis_check",
    "hessian_blocks",
    "compare_special_orbits",
]


class DegenerateOrbitError(ValueError):
    """Raised when an operation requires a non-degenerate critical orbit."""


class UnsupportedCaseError(ValueError):
    """Raised when a comparison falls outside the special-orbit case."""


@dataclass(frozen=True)
class SearchConfig:
    """Knobs for the critical-point search."""

    seeds: tuple = ()
    newton_max_iter: int = 50
    tol_grad: float = 1e-10
    bounds: Optional[float] = None  # max norm accepted for critical points


@dataclass(frozen=True)
class SpectralData:
    """Clustered spectrum of a Hessian plus the raw eigendecomposition."""

    eigenvalues: tuple        # ((value, multiplicity), ...) ascending
    betas: tuple              # sqrt of positive eigenvalues, descending
    beta_mults: tuple
    kernel_dim: int
    negative_dim: int
    tol: float
    raw_eigenvalues: np.ndarray = field(repr=False)
    raw_eigenvectors: np.ndarray = field(repr=False)  # columns match raw order

    @staticmethod
    def from_hessian(hessian: np.ndarray, tol_factor: float = 1e-8) -> "SpectralData":
        hessian = np.asarray(hessian, dtype=float)
        w, v = np.linalg.eigh(hessian)
        scale = max(1.0, float(np.abs(w).max()) if len(w) else 1.0)
        tol = tol_factor * scale

        clusters = []
        for val in w:
            if clusters and val - clusters[-1][-1] <= tol:
                clusters[-1].append(val)
            else:
                clusters.append([val])
        eigenvalues = tuple((float(np.mean(c)), len(c)) for c in clusters)

        positive = [(val, mult) for val, mult in eigenvalues if val > tol]
        betas = tuple(math.sqrt(val) for val, _ in reversed(positive))
        beta_mults = tuple(mult for _, mult in reversed(positive))
        kernel_dim = int(np.sum(np.abs(w) <= tol))
        negative_dim = int(np.sum(w < -tol))
        return SpectralData(eigenvalues, betas, beta_mults, kernel_dim,
                            negative_dim, tol, w, v)

    def positive_eigenvector(self, j0: int) -> np.ndarray:
        """A unit eigenvector for beta_{j0}^2 with a deterministic sign."""
        target = self.betas[j0 - 1] ** 2
        idx = int(np.argmin(np.abs(self.raw_eigenvalues - target)))
        vec = self.raw_eigenvectors[:, idx].copy()
        lead = int(np.argmax(np.abs(vec)))
        if vec[lead] < 0:
            vec = -vec
        return vec


@dataclass(frozen=True)
class HypothesisChecklist:
    """Pass/fail of the three center-theorem hypotheses with evidence."""

    isotropy_trivial: bool
    nondegenerate: bool
    has_positive_eigenvalue: bool
    kernel_dim: int
    orbit_dim: int
    positive_squares: tuple

    @property
    def passed(self) -> bool:
        return (self.isotropy_trivial and self.nondegenerate
                and self.has_positive_eigenvalue)

    @property
    def failures(self) -> tuple:
        out = []
        if not self.isotropy_trivial:
            out.append("nontrivial isotropy")
        if not self.nondegenerate:
            out.append("degenerate orbit")
        if not self.has_positive_eigenvalue:
            out.append("no positive eigenvalue")
        return tuple(out)


@dataclass(frozen=True)
class ResonanceCheck:
    """Evidence that beta_j / beta_j0 stays away from the integers."""

    j0: int
    ok: bool
    ratios: tuple
    integer_distances: tuple
    predicted_period: float


@dataclass(frozen=True)
class HessianBlocks:
    """Hessian restricted to the normal space, split into fixed part B and rest C."""

    b_matrix: np.ndarray
    c_matrix: np.ndarray
    morse_b: int
    morse_c: int
    b_eigenvalues: tuple
    c_eigenvalues: tuple


@dataclass(frozen=True)
class CriticalOrbitRecord:
    """Everything downstream stages need to know about one critical orbit."""

    geometry: OrbitGeometry
    hessian: np.ndarray
    spectral: SpectralData
    checklist: HypothesisChecklist
    blocks: Optional[HessianBlocks]
    orbit_key: tuple
    exact_radii_sq: Optional[tuple] = None  # Fractions when known exactly

    @property
    def point(self) -> np.ndarray:
        return self.geometry.point

    @property
    def is_classical_candidate(self) -> bool:
        # fixed point with an invertible Hessian and some positive curvature:
        # the non-symmetric center theorem applies instead
        return (self.geometry.orbit_dim == 0
                and not self.geometry.isotropy_trivial
                and self.spectral.kernel_dim == 0
                and self.checklist.has_positive_eigenvalue)


@dataclass(frozen=True)
class SpecialOrbitComparison:
    """Which invariants separate two special (morse_C = 0) critical orbits."""

    distinct_conley_index: bool
    distinct_euler_characteristic: bool
    same_isotropy_class: bool
    morse_a: int
    morse_b: int
    chi_a: UGElement
    chi_b: UGElement
    reasons: tuple


# ---------------------------------------------------------------------------
# exact univariate root extraction


def _divisors(n: int) -> list:
    n = abs(n)
    out = []
    d = 1
    while d * d <= n:
        if n % d == 0:
            out.append(d)
            if d * d != n:
                out.append(n // d)
        d += 1
    return sorted(out)


def _horner_frac(poly: dict, x: Fraction) -> Fraction:
    deg = max(poly)
    acc = Fraction(0)
    for d in range(deg, -1, -1):
        acc = acc * x + poly.get(d, Fraction(0))
    return acc


def _deflate_frac(poly: dict, root: Fraction) -> dict:
    """Exact synthetic division of poly by (x - root)."""
    deg = max(poly)
    out: dict = {}
    carry = Fraction(0)
    for d in range(deg, 0, -1):
        carry = poly.get(d, Fraction(0)) + carry * root
        if carry != 0:
            out[d - 1] = carry
    return out


def rational_roots(poly: dict, limit: int = 10**12):
    """All rational roots (with multiplicity) plus the exactly deflated rest."""
    poly = {d: Fraction(c) for d, c in poly.items() if c != 0}
    roots = []
    if not poly:
        return roots, poly
    while poly and 0 not in poly:
        # x = 0 divides every term
        roots.append(Fraction(0))
        poly = {d - 1: c for d, c in poly.items()}
    if not poly or max(poly) == 0:
        return roots, poly

    denom_lcm = 1
    for c in poly.values():
        denom_lcm = denom_lcm * c.denominator // math.gcd(denom_lcm, c.denominator)
    ints = {d: int(c * denom_lcm) for d, c in poly.items()}
    lead = ints[max(ints)]
    const = ints.get(0, 0)
    if const == 0:
        return roots, poly  # unreachable after the zero-root loop
    if abs(const) > limit or abs(lead) > limit:
        return roots, poly

    candidates = sorted(
        {Fraction(sign * p, q) for p in _divisors(const) for q in _divisors(lead)
         for sign in (1, -1)},
        key=lambda f: (abs(f), f < 0))
    for cand in candidates:
        while poly and max(poly) > 0 and _horner_frac(poly, cand) == 0:
            roots.append(cand)
            poly = _deflate_frac(poly, cand)
    return roots, poly


def _numeric_real_roots(poly: dict, polish_poly: dict, tol: float = 1e-9):
    """Real roots of the (already deflated) polynomial via companion eigenvalues."""
    if not poly or max(poly) == 0:
        return []
    deg = max(poly)
    desc = np.array([float(poly.get(d, 0)) for d in range(deg, -1, -1)])
    raw = np.roots(desc)
    p_f = np.array([float(polish_poly.get(d, 0))
                    for d in range(max(polish_poly), -1, -1)])
    dp_f = np.polyder(p_f)
    out = []
    for z in raw:
        if abs(z.imag) > tol * (1.0 + abs(z.real)):
            continue
        r = float(z.real)
        for _ in range(3):
            denom = np.polyval(dp_f, r)
            if denom == 0:
                break
            r -= np.polyval(p_f, r) / denom
        out.append(r)
    return out


def solve_univariate(poly: dict):
    """Real roots as (float value, exact Fraction or None) pairs."""
    exact, rest = rational_roots(poly)
    out = [(float(r), r) for r in exact]
    for r in _numeric_real_roots(rest, poly):
        out.append((r, None))
    return out


# ---------------------------------------------------------------------------
# record assembly


def _orbit_key(action: BlockRotation, q0: np.ndarray) -> tuple:
    key = []
    for i, j in action.blocks:
        key.append(round(float(np.hypot(q0[i], q0[j])), 8))
    for k in action.fixed_indices:
        key.append(round(float(q0[k]), 8))
    return tuple(key)


def _checklist(geometry: OrbitGeometry, spectral: SpectralData) -> HypothesisChecklist:
    return HypothesisChecklist(
        isotropy_trivial=geometry.isotropy_trivial,
        nondegenerate=spectral.kernel_dim == geometry.orbit_dim,
        has_positive_eigenvalue=len(spectral.betas) > 0,
        kernel_dim=spectral.kernel_dim,
        orbit_dim=geometry.orbit_dim,
        positive_squares=tuple(b * b for b in spectral.betas),
    )


def hessian_blocks(hessian: np.ndarray, geometry: OrbitGeometry,
                   action: BlockRotation) -> HessianBlocks:
    """Restrict the Hessian to the normal space and split off the isotropy-fixed part.

    With trivial isotropy the whole normal restriction is the B block.  At a
    fully symmetric point the B block lives on the coordinates fixed by the
    action and C collects the rotating directions.  Requires a non-degenerate
    orbit; a (near-)singular block raises DegenerateOrbitError.
    """
    hessian = np.asarray(hessian, dtype=float)
    normal = geometry.normal_basis
    restricted = normal @ hessian @ normal.T

    if geometry.isotropy_trivial:
        b = restricted
        c = np.zeros((0, 0))
    else:
        fixed = set(action.fixed_indices)
        b_rows = []
        c_rows = []
        for idx, row in enumerate(normal):
            support = np.nonzero(np.abs(row) > 1e-14)[0]
            (b_rows if all(int(k) in fixed for k in support) else c_rows).append(idx)
        b = restricted[np.ix_(b_rows, b_rows)]
        c = restricted[np.ix_(c_rows, c_rows)]

    def _morse(mat: np.ndarray):
        if mat.size == 0:
            return 0, ()
        eigs = np.linalg.eigvalsh(mat)
        tol = 1e-8 * max(1.0, float(np.abs(eigs).max()))
        if np.any(np.abs(eigs) <= tol):
            raise DegenerateOrbitError(
                "Hessian block is singular; the orbit is degenerate")
        return int(np.sum(eigs < 0)), tuple(float(e) for e in eigs)

    morse_b, b_eigs = _morse(b)
    morse_c, c_eigs = _morse(c)
    return HessianBlocks(b, c, morse_b, morse_c, b_eigs, c_eigs)


def _make_record(spec: PotentialSpec, action: BlockRotation, q0: np.ndarray,
                 exact_radii_sq: Optional[tuple] = None) -> CriticalOrbitRecord:
    jet = spec.jet2(np.asarray(q0, dtype=float))
    geometry = orbit_geometry(action, q0)
    spectral = SpectralData.from_hessian(jet.hessian)
    checklist = _checklist(geometry, spectral)
    blocks = None
    if checklist.nondegenerate:
        try:
            blocks = hessian_blocks(jet.hessian, geometry, action)
        except DegenerateOrbitError:
            blocks = None
    return CriticalOrbitRecord(
        geometry=geometry,
        hessian=jet.hessian,
        spectral=spectral,
        checklist=checklist,
        blocks=blocks,
        orbit_key=_orbit_key(action, q0),
        exact_radii_sq=exact_radii_sq,
    )


def _gradient_ok(spec: PotentialSpec, q0: np.ndarray, tol_grad: float) -> bool:
    jet = spec.jet2(q0)
    scale = 1.0 + float(np.linalg.norm(jet.hessian)) * float(np.linalg.norm(q0))
    return float(np.linalg.norm(jet.gradient)) <= tol_grad * scale


# ---------------------------------------------------------------------------
# finders per potential kind


def _radial_candidates(spec: RadialPolynomial, action: BlockRotation):
    roots = solve_univariate(spec.dphi_coeffs) if spec.dphi_coeffs else []
    # the origin is critical for every radial potential
    cands = {0.0: Fraction(0)}
    for value, exact in roots:
        if value < -1e-12:
            continue
        value = max(value, 0.0)
        known = next((v for v in cands if abs(v - value) <= 1e-8 * (1 + abs(v))), None)
        if known is None:
            cands[value] = exact
    out = []
    for t_star, exact in sorted(cands.items()):
        r = math.sqrt(t_star)
        q0 = np.zeros(action.n)
        first = action.blocks[0][0] if action.blocks else 0
        q0[first] = r
        out.append((q0, (exact,) if exact is not None else None))
    return out


def _blockradial_pattern_roots(spec: BlockRadialPolynomial, pattern: tuple,
                               tol: float = 1e-10):
    """Positive solutions t_S of w^2 + eps dW/dt_i = 0 on a zero/nonzero pattern."""
    m = spec.m
    w2 = spec.omega * spec.omega
    if len(pattern) == 1:
        i = pattern[0]
        restricted: dict = {}
        for exps, c in spec.partials[i]:
            if any(exps[j] and j != i for j in range(m)):
                continue
            restricted[exps[i]] = restricted.get(exps[i], Fraction(0)) + c
        poly = {d: spec.eps * c for d, c in restricted.items()}
        poly[0] = poly.get(0, Fraction(0)) + w2
        poly = {d: c for d, c in poly.items() if c != 0}
        sols = []
        for value, exact in solve_univariate(poly):
            if value > tol:
                sols.append(({i: value}, {i: exact} if exact is not None else None))
        return sols

    # two or more active blocks: damped Newton from a small positive grid
    grid = [0.25, 0.5, 1.0, 2.0, 4.0] if len(pattern) == 2 else [0.5, 1.0, 2.0]
    w2f = float(w2)
    epsf = float(spec.eps)
    sols = []
    seen = []
    for start in itertools.product(grid, repeat=len(pattern)):
        t = np.zeros(m)
        for idx, i in enumerate(pattern):
            t[i] = start[idx]
        ok = False
        for _ in range(60):
            f = np.array([w2f + epsf * spec.partial_value(i, t) for i in pattern])
            if not np.all(np.isfinite(f)):
                break
            if np.max(np.abs(f)) < 1e-12 * (1.0 + w2f):
                ok = True
                break
            jac = np.array([[epsf * spec.second_partial_value(i, j, t)
                             for j in pattern] for i in pattern])
            try:
                step = np.linalg.solve(jac, -f)
            except np.linalg.LinAlgError:
                break
            for idx, i in enumerate(pattern):
                t[i] += step[idx]
            if np.max(t) > 1e8:
                break
        if not ok or any(t[i] <= tol for i in pattern):
            continue
        key = tuple(round(float(t[i]), 8) for i in pattern)
        if key in seen:
            continue
        seen.append(key)
        sols.append(({i: float(t[i]) for i in pattern}, None))
    return sols


def _blockradial_candidates(spec: BlockRadialPolynomial, action: BlockRotation):
    m = spec.m
    cands = [(np.zeros(action.n), tuple(Fraction(0) for _ in range(m)))]
    for size in range(1, m + 1):
        for pattern in itertools.combinations(range(m), size):
            for tvals, texact in _blockradial_pattern_roots(spec, pattern):
                q0 = np.zeros(action.n)
                exact = [Fraction(0)] * m
                exact_ok = texact is not None
                for i in range(m):
                    if i in tvals:
                        q0[action.blocks[i][0]] = math.sqrt(tvals[i])
                        if exact_ok:
                            exact[i] = texact[i]
                cands.append((q0, tuple(exact) if exact_ok else None))
    return cands


def _newton_from_seed(spec: PotentialSpec, action: BlockRotation, seed: np.ndarray,
                      search: SearchConfig) -> Optional[np.ndarray]:
    x = np.asarray(seed, dtype=float).copy()
    bound = search.bounds if search.bounds is not None else 1e6
    for _ in range(search.newton_max_iter):
        jet = spec.jet2(x)
        if not np.all(np.isfinite(jet.gradient)):
            return None
        if not np.any(jet.gradient):
            break
        try:
            step = np.linalg.solve(jet.hessian, -jet.gradient)
        except np.linalg.LinAlgError:
            step, *_ = np.linalg.lstsq(jet.hessian, -jet.gradient, rcond=None)
        if not np.all(np.isfinite(step)):
            return None
        x = x + step
        if float(np.linalg.norm(x)) > bound:
            return None
        # run until the iteration itself stalls; gradient thresholds alone let
        # quartically flat directions (degenerate points) stop far from the root
        if float(np.linalg.norm(step)) <= 1e-14 * (1.0 + float(np.linalg.norm(x))):
            break
    if not _gradient_ok(spec, x, search.tol_grad):
        return None
    return x


def find_critical_orbits(spec: PotentialSpec, action: BlockRotation,
                         search: SearchConfig = SearchConfig()):
    """All critical orbits the kind-specific strategy can find, deduplicated.

    Radial potentials reduce to roots of phi'; blockradial ones to positive
    roots of per-pattern polynomial systems; general expressions run damped
    Newton from the user-provided seeds.  Rational roots are extracted exactly
    so Hessians at rational radii stay integer-exact.
    """
    if isinstance(spec, (BlockRadialPolynomial, Expression)):
        want = spec.n
        if want is not None and want != action.n:
            raise ValueError(f"potential lives on R^{want}, action on R^{action.n}")
    if isinstance(spec, BlockRadialPolynomial):
        expected = tuple((2 * i, 2 * i + 1) for i in range(spec.m))
        if tuple(sorted(action.blocks)) != expected:
            raise ValueError("blockradial potentials pair coordinates as "
                             "(0,1),(2,3),...; the action must use the same blocks")

    candidates = []
    if isinstance(spec, RadialPolynomial):
        candidates.extend(_radial_candidates(spec, action))
    elif isinstance(spec, BlockRadialPolynomial):
        candidates.extend(_blockradial_candidates(spec, action))

    for seed in search.seeds:
        x = _newton_from_seed(spec, action, np.asarray(seed, dtype=float), search)
        if x is not None:
            candidates.append((x, None))

    if isinstance(spec, Expression) and not search.seeds:
        raise ValueError("expression potentials need at least one search seed")

    records = {}
    for q0, exact in candidates:
        if search.bounds is not None and float(np.linalg.norm(q0)) > search.bounds:
            continue
        if not _gradient_ok(spec, q0, search.tol_grad):
            continue
        key = _orbit_key(action, q0)
        if key not in records:
            records[key] = _make_record(spec, action, q0, exact)
    return [records[k] for k in sorted(records)]


# ---------------------------------------------------------------------------
# hypothesis and resonance reporting


def resonance_check(spectral: SpectralData, j0: int, tol_res: float = 1e-6) -> ResonanceCheck:
    """Non-resonance of beta_j0 against the larger frequencies beta_1..beta_{j0-1}."""
    if not 1 <= j0 <= len(spectral.betas):
        raise ValueError(f"j0 must be in 1..{len(spectral.betas)}")
    base = spectral.betas[j0 - 1]
    ratios = tuple(spectral.betas[j] / base for j in range(j0 - 1))
    dists = tuple(abs(r - round(r)) for r in ratios)
    ok = all(d > tol_res for d in dists)
    return ResonanceCheck(j0, ok, ratios, dists, 2.0 * math.pi / base)


@dataclass(frozen=True)
class HypothesisReport:
    checklist: HypothesisChecklist
    resonance: Optional[ResonanceCheck]
    eligible: bool


def hypothesis_check(record: CriticalOrbitRecord, j0: int = 1,
                     tol_res: float = 1e-6) -> HypothesisReport:
    """Full verdict for one critical orbit and one chosen frequency index."""
    checklist = record.checklist
    if not checklist.passed:
        return HypothesisReport(checklist, None, False)
    res = resonance_check(record.spectral, j0, tol_res)
    return HypothesisReport(checklist, res, res.ok)


def compare_special_orbits(a: CriticalOrbitRecord,
                           b: CriticalOrbitRecord) -> SpecialOrbitComparison:
    """Conley-index comparison of two special critical orbits (morse_C = 0).

    For special orbits the orbit index is determined by the isotropy class and
    the Morse index of the B block: different classes or different Morse
    indices give different indices, and sign (-1)^morse distinguishes the
    equivariant Euler characteristics.
    """
    for rec in (a, b):
        if rec.blocks is None:
            raise UnsupportedCaseError("comparison needs non-degenerate orbits "
                                       "with Hessian blocks")
        if rec.blocks.morse_c != 0:
            raise UnsupportedCaseError("comparison is only defined for special "
                                       "orbits (morse_C = 0)")
    same_class = a.geometry.isotropy_label == b.geometry.isotropy_label
    ma, mb = a.blocks.morse_b, b.blocks.morse_b
    chi_a = UGElement.build({f"[{a.geometry.isotropy_label}]": (-1) ** ma})
    chi_b = UGElement.build({f"[{b.geometry.isotropy_label}]": (-1) ** mb})

    reasons = []
    if not same_class:
        reasons.append("different isotropy classes separate both the orbit "
                       "indices and the Euler characteristics")
    if same_class and ma != mb:
        reasons.append(f"Morse indices {ma} and {mb} differ, so the orbit "
                       "indices differ")
    if same_class and (ma - mb) % 2 == 1:
        reasons.append("Morse index parity differs, so the Euler "
                       "characteristics differ")
    if not reasons:
        reasons.append("not distinguished by isotropy class or Morse data")

    return SpecialOrbitComparison(
        distinct_conley_index=(not same_class) or ma != mb,
        distinct_euler_characteristic=chi_a != chi_b,
        same_isotropy_class=same_class,
        morse_a=ma,
        morse_b=mb,
        chi_a=chi_a,
        chi_b=chi_b,
        reasons=tuple(reasons),
    )
