"""Certify the bifurcation by a Conley-index jump across the resonance window.

On the loop space, the second variation at parameter lambda acts mode by mode:
the k-th Fourier block is Lambda(k; lambda) = (k^2 Id - lambda^2 Hess U(q0))
/ (k^2 + 1), whose eigenvalues are (k^2 - lambda^2 mu_i)/(k^2 + 1) over the
Hessian eigenvalues mu_i.  The critical parameters Lambda = {k / beta_j} are
where some block goes singular.  The certificate brackets lambda* = 1/beta_j0
with a window [lambda-, lambda+] containing no other critical parameter,
truncates at a mode n0 beyond which no block can ever go negative inside the
window, and compares the negative eigenspaces at the two ends: their sphere
classes in the Euler ring of S^1 differ exactly when crossing lambda* forces
a local bifurcation of periodic orbits.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from lyapcenter.critical_orbits import (
    CriticalOrbitRecord,
    SpectralData,
    hypothesis_check,
    resonance_check,
)
from lyapcenter.euler_ring import (
    EulerRingElement,
    S1Representation,
    UGElement,
    chi_sphere,
    induce_to_G,
)
from lyapcenter.symmetry import AdmissibilityVerdict, admissible_gamma_cross_s1

__all__ = [
    "NonResonanceError",
    "OnResonanceError",
    "HypothesisError",
    "ModeOperator",
    "ResonancePoint",
    "TruncationPlan",
    "ConleyReport",
    "build_mode_operator",
    "resonance_set",
    "plan_truncation",
    "negative_eigenspace_rep",
    "negative_rep_by_modes",
    "stabilization_check",
    "certify_bifurcation",
]


class NonResonanceError(ValueError):
    """A frequency ratio beta_j/beta_j0 sits (numerically) on an integer."""

    def __init__(self, message: str, ratios=(), distances=()):
        super().__init__(message)
        self.ratios = tuple(ratios)
        self.distances = tuple(distances)


class OnResonanceError(ArithmeticError):
    """The spectral parameter lambda sits on a critical value k/beta_j."""


class HypothesisError(ValueError):
    """Certification requested for an orbit that fails the hypotheses."""


@dataclass(frozen=True)
class ModeOperator:
    """The k-th Fourier block of the second variation at parameter lambda."""

    k: int
    lam: float
    matrix: np.ndarray
    eigenvalues: np.ndarray
    negative: int
    zero: int
    positive: int


def build_mode_operator(hessian: np.ndarray, k: int, lam: float,
                        tol_factor: float = 1e-9) -> ModeOperator:
    hessian = np.asarray(hessian, dtype=float)
    matrix = (k * k * np.eye(hessian.shape[0]) - lam * lam * hessian) / (k * k + 1.0)
    eigs = np.linalg.eigvalsh(matrix)
    tol = tol_factor * max(1.0, float(np.abs(eigs).max()) if eigs.size else 1.0)
    return ModeOperator(
        k=k, lam=lam, matrix=matrix, eigenvalues=eigs,
        negative=int(np.sum(eigs < -tol)),
        zero=int(np.sum(np.abs(eigs) <= tol)),
        positive=int(np.sum(eigs > tol)),
    )


@dataclass(frozen=True)
class ResonancePoint:
    """A critical parameter k/beta_j with every (k, j) pair that lands on it."""

    lam: float
    sources: tuple  # ((k, j), ...) with j 1-based matching beta ordering


def resonance_set(spectral: SpectralData, k_max: int) -> tuple:
    """The critical parameters {k/beta_j : 0 <= k <= k_max}, merged and sorted."""
    raw = []
    for j, beta in enumerate(spectral.betas, start=1):
        for k in range(k_max + 1):
            raw.append((k / beta, (k, j)))
    raw.sort()
    merged = []
    for lam, source in raw:
        if merged and abs(lam - merged[-1][0]) <= 1e-12 * (1.0 + abs(lam)):
            merged[-1][1].append(source)
        else:
            merged.append([lam, [source]])
    return tuple(ResonancePoint(lam, tuple(sources)) for lam, sources in merged)


@dataclass(frozen=True)
class TruncationPlan:
    """Window and truncation order for one certification run."""

    j0: int
    requested_epsilon: float
    epsilon: float
    lambda_star: float
    lambda_minus: float
    lambda_plus: float
    n0: int
    mode_floors: tuple        # floor(beta_j / beta_j0) for j < j0
    stability_margin: float   # n0^2 - (lambda_plus * beta_1)^2 > 0


def plan_truncation(spectral: SpectralData, j0: int, epsilon: float,
                    tol_res: float = 1e-6) -> TruncationPlan:
    """Choose the window around 1/beta_j0 and the truncation order n0.

    Refuses resonant data.  The window half-width is halved until it is less
    than half the distance to the nearest other critical parameter, so the
    window isolates lambda*; n0 starts at max(floor ratios, 1) + 1 and grows
    until the stability margin n0^2 - (lambda_plus beta_1)^2 is positive,
    which freezes the negative eigenspace against further truncation growth.
    """
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    res = resonance_check(spectral, j0, tol_res)
    if not res.ok:
        raise NonResonanceError(
            f"beta ratio(s) {res.ratios} within {tol_res} of an integer",
            res.ratios, res.integer_distances)

    betas = spectral.betas
    beta_star = betas[j0 - 1]
    lam_star = 1.0 / beta_star

    floors = []
    for ratio in res.ratios:
        k_j = math.floor(ratio)
        if not k_j * k_j < ratio * ratio < (k_j + 1) * (k_j + 1):
            raise NonResonanceError(
                f"ratio {ratio} does not sit strictly between consecutive "
                "integers", (ratio,), (abs(ratio - round(ratio)),))
        floors.append(k_j)

    # nearest other critical parameter k/beta_j != lambda*
    gap = math.inf
    for j, beta in enumerate(betas, start=1):
        k_near = round(lam_star * beta)
        for k in {max(k_near - 1, 0), k_near, k_near + 1}:
            lam = k / beta
            dist = abs(lam - lam_star)
            if dist > 1e-12 * (1.0 + lam_star):
                gap = min(gap, dist)

    eps = float(epsilon)
    while eps * lam_star >= gap / 2.0:
        eps /= 2.0
    lam_minus = (1.0 - eps) * lam_star
    lam_plus = (1.0 + eps) * lam_star

    n0 = max(floors + [1]) + 1
    while n0 * n0 - (lam_plus * betas[0]) ** 2 <= 0.0:
        n0 += 1
    margin = n0 * n0 - (lam_plus * betas[0]) ** 2

    inside = [p for p in resonance_set(spectral, n0 + 1)
              if lam_minus <= p.lam <= lam_plus]
    if len(inside) != 1 or abs(inside[0].lam - lam_star) > 1e-12 * (1.0 + lam_star):
        raise OnResonanceError(
            f"window [{lam_minus}, {lam_plus}] fails to isolate {lam_star}")

    return TruncationPlan(
        j0=j0, requested_epsilon=float(epsilon), epsilon=eps,
        lambda_star=lam_star, lambda_minus=lam_minus, lambda_plus=lam_plus,
        n0=n0, mode_floors=tuple(floors), stability_margin=margin,
    )


def negative_eigenspace_rep(spectral: SpectralData, lam: float, n0: int,
                            tol_factor: float = 1e-9) -> S1Representation:
    """S^1-representation carried by the negative eigenspace, truncated at n0.

    Mode 0 contributes one trivial direction per positive Hessian eigenvalue;
    mode k >= 1 contributes one rotation plane per eigenvalue mu with
    k^2 < lam^2 mu.  A count within tolerance of zero means lam sits on a
    critical parameter and the representation is not defined there.
    """
    mus = spectral.raw_eigenvalues
    scale = max(1.0, lam * lam * float(np.abs(mus).max()) if mus.size else 1.0)
    tol = tol_factor * scale
    trivial = int(np.sum(mus > spectral.tol))
    modes = {}
    for k in range(1, n0 + 1):
        vals = k * k - lam * lam * mus
        if np.any(np.abs(vals) <= tol):
            raise OnResonanceError(
                f"mode {k} is singular at lambda = {lam}; pick the window ends "
                "off the critical set")
        mult = int(np.sum(vals < 0))
        if mult:
            modes[k] = mult
    return S1Representation.build(trivial, modes)


def negative_rep_by_modes(hessian: np.ndarray, lam: float, n0: int) -> S1Representation:
    """Same representation, assembled by eigensolving each mode operator."""
    h0 = build_mode_operator(hessian, 0, lam)
    modes = {}
    for k in range(1, n0 + 1):
        op = build_mode_operator(hessian, k, lam)
        if op.zero:
            raise OnResonanceError(f"mode {k} is singular at lambda = {lam}")
        if op.negative:
            modes[k] = op.negative
    return S1Representation.build(h0.negative, modes)


def stabilization_check(spectral: SpectralData, plan: TruncationPlan,
                        offsets=(0, 1, 5)) -> bool:
    """The representation must be identical at truncation orders n0 + offsets."""
    for lam in (plan.lambda_minus, plan.lambda_plus):
        reps = [negative_eigenspace_rep(spectral, lam, plan.n0 + off)
                for off in offsets]
        if any(rep != reps[0] for rep in reps[1:]):
            return False
    return True


@dataclass(frozen=True)
class ConleyReport:
    """Everything the certificate rests on, for one orbit and one frequency."""

    plan: TruncationPlan
    rep_minus: S1Representation
    rep_plus: S1Representation
    r_minus: int
    r_plus: int
    chi_minus: EulerRingElement
    chi_plus: EulerRingElement
    chi_g_minus: UGElement
    chi_g_plus: UGElement
    admissibility: AdmissibilityVerdict
    certified: bool
    stabilized: bool
    resonances: tuple

    def to_dict(self) -> dict:
        plan = self.plan
        return {
            "j0": plan.j0,
            "epsilon_requested": plan.requested_epsilon,
            "epsilon_used": plan.epsilon,
            "lambda_star": plan.lambda_star,
            "window": [plan.lambda_minus, plan.lambda_plus],
            "n0": plan.n0,
            "mode_floors": list(plan.mode_floors),
            "stability_margin": plan.stability_margin,
            "rep_minus": self.rep_minus.text(),
            "rep_plus": self.rep_plus.text(),
            "r_minus": self.r_minus,
            "r_plus": self.r_plus,
            "chi_minus": self.chi_minus.text(),
            "chi_plus": self.chi_plus.text(),
            "chi_G_minus": self.chi_g_minus.text(),
            "chi_G_plus": self.chi_g_plus.text(),
            "admissible": self.admissibility.admissible,
            "admissibility_reason": self.admissibility.reason,
            "certified": self.certified,
            "stabilized": self.stabilized,
            "resonances": [
                {"lambda": p.lam, "sources": [list(s) for s in p.sources]}
                for p in self.resonances
            ],
        }


def certify_bifurcation(record: CriticalOrbitRecord, j0: int = 1,
                        epsilon: float = 1e-3, tol_res: float = 1e-6,
                        cross_check: bool = True) -> ConleyReport:
    """Run the full certificate at one critical orbit.

    Refuses orbits failing the hypotheses.  The certificate holds when the
    sphere classes at the window ends differ; by isolation this difference is
    forced to live in mode 1 with multiplicity equal to that of beta_j0^2,
    and that structural fact is verified rather than assumed.
    """
    report = hypothesis_check(record, j0, tol_res)
    if not report.checklist.passed:
        raise HypothesisError("hypotheses fail: "
                              + "; ".join(report.checklist.failures))
    if not report.eligible:
        raise NonResonanceError(
            f"resonant ratios {report.resonance.ratios}",
            report.resonance.ratios, report.resonance.integer_distances)

    spectral = record.spectral
    plan = plan_truncation(spectral, j0, epsilon, tol_res)
    rep_minus = negative_eigenspace_rep(spectral, plan.lambda_minus, plan.n0)
    rep_plus = negative_eigenspace_rep(spectral, plan.lambda_plus, plan.n0)

    if cross_check:
        alt_minus = negative_rep_by_modes(record.hessian, plan.lambda_minus, plan.n0)
        alt_plus = negative_rep_by_modes(record.hessian, plan.lambda_plus, plan.n0)
        if alt_minus != rep_minus or alt_plus != rep_plus:
            raise AssertionError("mode-operator eigensolve disagrees with the "
                                 "closed-form count; refusing to certify")

    expected_jump = spectral.beta_mults[j0 - 1]
    jump = rep_plus.mode_multiplicity(1) - rep_minus.mode_multiplicity(1)
    same_elsewhere = (rep_plus.trivial_dim == rep_minus.trivial_dim and
                      {k: m for m, k in rep_plus.modes if k != 1}
                      == {k: m for m, k in rep_minus.modes if k != 1})
    if jump != expected_jump or not same_elsewhere:
        raise AssertionError(
            f"negative eigenspace changed by {jump} mode-1 planes (expected "
            f"{expected_jump}) or outside mode 1; window isolation is broken")

    chi_minus = chi_sphere(rep_minus)
    chi_plus = chi_sphere(rep_plus)
    admissibility = admissible_gamma_cross_s1()
    chi_g_minus = induce_to_G(chi_minus)
    chi_g_plus = induce_to_G(chi_plus)
    stabilized = stabilization_check(spectral, plan)

    return ConleyReport(
        plan=plan,
        rep_minus=rep_minus,
        rep_plus=rep_plus,
        r_minus=rep_minus.mode_multiplicity(1),
        r_plus=rep_plus.mode_multiplicity(1),
        chi_minus=chi_minus,
        chi_plus=chi_plus,
        chi_g_minus=chi_g_minus,
        chi_g_plus=chi_g_plus,
        admissibility=admissibility,
        certified=(chi_minus != chi_plus) and stabilized,
        stabilized=stabilized,
        resonances=resonance_set(spectral, plan.n0),
    )
