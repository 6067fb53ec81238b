"""Error probabilities and bounds for detecting a known pure state.

The central computation is the exact worst case of a fixed accept effect T
over all states with bounded overlap against the target:

    sup { Tr T sigma : sigma >= 0, Tr sigma = 1, Tr rho sigma <= theta }.

By Lagrangian duality this equals min_{mu >= 0} lambda_max(T - mu rho)
+ mu theta, a convex scalar problem solved by golden-section search; the
primal maximizer is rebuilt from the top eigenvector at the optimum and the
duality gap is checked.  Around that sit the closed-form upper and lower
bounds for the constructed measurements and the report assembling them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ContractError, NumericalFailureError, ValidationError
from .measurements import NamedMeasurement, build_t_tilde
from .operators import (
    BipartiteOperator,
    partial_transpose,
    require_density_matrix,
    validate_povm_element,
)
from .states import SchmidtSpectrum, reduced_spectrum, schmidt_state
from .twirl import twirl_defect

_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0


def golden_section_min(f, lo: float, hi: float, tol: float):
    """Golden-section minimization of a unimodal f on [lo, hi].

    Shrinks the bracket to width ``tol`` and returns (argmin, f(argmin)) at
    the final midpoint.  Boundary minima are handled since the bracket never
    leaves [lo, hi].
    """
    a, b = float(lo), float(hi)
    x1 = b - _INVPHI * (b - a)
    x2 = a + _INVPHI * (b - a)
    f1, f2 = f(x1), f(x2)
    while b - a > tol:
        if f1 <= f2:
            b, x2, f2 = x2, x1, f1
            x1 = b - _INVPHI * (b - a)
            f1 = f(x1)
        else:
            a, x1, f1 = x1, x2, f2
            x2 = a + _INVPHI * (b - a)
            f2 = f(x2)
    mid = 0.5 * (a + b)
    return mid, f(mid)


# ---------------------------------------------------------------------------
# Helstrom baseline
# ---------------------------------------------------------------------------


def helstrom_error(rho: BipartiteOperator, sigma: BipartiteOperator) -> float:
    """Optimal unrestricted error (1 - ||rho - sigma||_1 / 2) / 2."""
    require_density_matrix(rho, what="rho")
    require_density_matrix(sigma, what="sigma")
    values = np.linalg.eigvalsh(rho.matrix - sigma.matrix)
    return 0.5 * (1.0 - 0.5 * float(np.abs(values).sum()))


# ---------------------------------------------------------------------------
# Worst-case adversary for a fixed effect
# ---------------------------------------------------------------------------


@dataclass
class AdversaryResult:
    """Worst-case acceptance of an effect under an overlap constraint.

    ``value`` is the dual optimum (an upper bound tight to the reported
    gap), ``sigma_star`` a feasible state achieving it within 1e-6, and
    ``dual_mu`` the optimal multiplier (+inf on the theta = 0 subspace
    path, where the constraint is enforced exactly).
    """

    value: float
    sigma_star: BipartiteOperator
    dual_mu: float


def _pure_ket(rho: BipartiteOperator) -> np.ndarray:
    values, vectors = np.linalg.eigh(rho.matrix)
    if abs(values[-1] - 1.0) > 1e-8 or abs(float(values.sum()) - 1.0) > 1e-8:
        raise ContractError("reference state must be a rank-one density matrix")
    return vectors[:, -1]


def _complement_basis(ket: np.ndarray) -> np.ndarray:
    # QR of [ket | I] puts ket (normalized) in the first column and an
    # orthonormal basis of its complement in the remaining D - 1 columns.
    dim = ket.shape[0]
    q, _ = np.linalg.qr(np.concatenate([ket[:, None], np.eye(dim, dtype=complex)], axis=1))
    return q[:, 1:dim]


def _retune_overlap(v: np.ndarray, ket: np.ndarray, theta: float) -> np.ndarray | None:
    """Re-weight v's components along/orthogonal to ket to overlap theta."""
    along = complex(np.vdot(ket, v))
    ortho = v - along * ket
    ortho_norm = float(np.linalg.norm(ortho))
    if ortho_norm <= 1e-12:
        return None
    phase = along / abs(along) if abs(along) > 1e-14 else 1.0
    return math.sqrt(theta) * phase * ket + math.sqrt(1.0 - theta) * ortho / ortho_norm


def _eigenspace_candidates(values, vectors, ket: np.ndarray, theta: float) -> list[np.ndarray]:
    """Feasible states built inside the (near-)degenerate top eigenspace.

    At the dual optimum the constraint is met by a mixture of top
    eigenvectors; when the top eigenvalue is degenerate no single
    eigenvector does it, so we diagonalize the target overlap on the top
    eigenspace and mix its extremal vectors to hit theta exactly.
    """
    top = values[-1]
    mask = values >= top - 1e-7 * max(1.0, abs(top))
    span = vectors[:, mask]
    coeffs = span.conj().T @ ket
    overlaps, rot = np.linalg.eigh(np.outer(coeffs, coeffs.conj()))
    o_lo, o_hi = float(overlaps[0]), float(overlaps[-1])
    w_lo = span @ rot[:, 0]
    w_hi = span @ rot[:, -1]
    out = []
    if o_lo - 1e-12 <= theta <= o_hi + 1e-12:
        t = 0.0 if o_hi <= o_lo else min(1.0, max(0.0, (theta - o_lo) / (o_hi - o_lo)))
        out.append(t * np.outer(w_hi, w_hi.conj()) + (1.0 - t) * np.outer(w_lo, w_lo.conj()))
    elif theta > o_hi:
        out.append(np.outer(w_hi, w_hi.conj()))
    else:
        tuned = _retune_overlap(w_lo, ket, theta)
        if tuned is not None:
            out.append(np.outer(tuned, tuned.conj()))
    return out


def worst_case_value(t: BipartiteOperator, rho: BipartiteOperator, theta: float) -> AdversaryResult:
    """Exact sup of Tr T sigma over states with Tr rho sigma <= theta.

    theta = 0 restricts the adversary to the orthogonal complement of the
    target, where the answer is the top eigenvalue of the compressed effect.
    For theta > 0 the convex dual g(mu) = lambda_max(T - mu rho) + mu theta
    is minimized by golden-section search on [0, 2 ||T|| / max(theta, 1e-6)]
    to bracket width 1e-10.  The primal state is taken as the best of the
    top eigenvector at the optimal mu (mixed with the target only as needed
    to meet the constraint with equality) and the always-feasible mixture
    theta * rho + (1 - theta) |chi><chi| with chi the top complement
    eigenvector; a duality gap above 1e-6 raises NumericalFailureError.
    """
    if not 0.0 <= theta <= 1.0:
        raise ValidationError(f"theta must lie in [0, 1], got {theta!r}")
    verdict = validate_povm_element(t, check_ppt=False)
    if not verdict.passed:
        raise ContractError(
            f"effect is not a POVM element: eigenvalues in "
            f"[{verdict.min_eigenvalue:.3e}, {verdict.max_eigenvalue:.6f}]"
        )
    tm = t.matrix
    rm = rho.matrix
    ket = _pure_ket(rho)
    basis = _complement_basis(ket)
    compressed = basis.conj().T @ tm @ basis
    cw, cv = np.linalg.eigh(compressed)
    chi = basis @ cv[:, -1]
    restricted_top = float(cw[-1])

    if theta == 0.0:
        sigma = np.outer(chi, chi.conj())
        return AdversaryResult(
            value=restricted_top,
            sigma_star=BipartiteOperator(t.local_dim, sigma),
            dual_mu=math.inf,
        )

    def dual(mu: float) -> float:
        return float(np.linalg.eigvalsh(tm - mu * rm)[-1]) + mu * theta

    op_norm = float(np.abs(np.linalg.eigvalsh(tm)).max())
    mu_hi = 2.0 * op_norm / max(theta, 1e-6)
    mu_star, value = golden_section_min(dual, 0.0, mu_hi, tol=1e-10)

    # Primal candidates.  Degenerate top eigenvalues are resolved by the
    # deterministic eigensolver ordering (see operators.EigenSystem).
    candidates = [theta * rm + (1.0 - theta) * np.outer(chi, chi.conj())]
    values, vectors = np.linalg.eigh(tm - mu_star * rm)
    v = vectors[:, -1]
    overlap = float(np.real(np.vdot(v, rm @ v)))
    if overlap <= theta + 1e-9:
        pure = np.outer(v, v.conj())
        candidates.append(pure)
        if overlap < theta:
            mix = (theta - overlap) / (1.0 - overlap)
            candidates.append(mix * rm + (1.0 - mix) * pure)
    candidates.extend(_eigenspace_candidates(values, vectors, ket, theta))
    scores = [float(np.real(np.trace(tm @ c))) for c in candidates]
    best = int(np.argmax(scores))
    gap = value - scores[best]
    if gap > 1e-6:
        raise NumericalFailureError(
            f"primal-dual gap {gap:.3e} exceeds 1e-6 (dual {value!r}, primal {scores[best]!r})"
        )
    sigma = 0.5 * (candidates[best] + candidates[best].conj().T)
    return AdversaryResult(
        value=value,
        sigma_star=BipartiteOperator(t.local_dim, sigma),
        dual_mu=float(mu_star),
    )


# ---------------------------------------------------------------------------
# Bound report
# ---------------------------------------------------------------------------


@dataclass
class ErrorReport:
    """All error quantities for one (spectrum, theta, measurement) instance.

    ``worst_case_value`` is sup Tr T sigma, ``p_err`` the symmetric-prior
    error ((Tr (I-T) rho) + worst_case_value) / 2.  ``upper_1way`` and
    ``upper_2way`` are the mixture-measurement guarantees
    (theta + lam)/(2 (1 + lam)) and (theta + lam beta)/(2 (1 + lam beta));
    ``lower_thm2`` is the blind-spot floor theta/2 + (1 - theta)
    lam alpha^2/(2 + 7 alpha) and ``lower_simple`` the orthogonal-adversary
    floor (1/lam - 1)/(2 (d^2 - 1)), both valid for every PPT effect.
    ``max_entangled_value`` carries the closed form (d theta + 1)/(2 (d + 1))
    when the spectrum is uniform.  ``active_lower`` names the larger floor.
    """

    theta: float
    helstrom: float
    worst_case_value: float
    p_err: float
    upper_1way: float
    upper_2way: float
    lower_thm2: float
    lower_simple: float
    max_entangled_value: float | None
    active_lower: str

    _FIELDS = (
        "theta",
        "helstrom",
        "worst_case_value",
        "p_err",
        "upper_1way",
        "upper_2way",
        "lower_thm2",
        "lower_simple",
        "max_entangled_value",
        "active_lower",
    )

    def to_text(self) -> str:
        """Structured text, one ``name = value`` line, 12 significant digits."""
        lines = []
        for name in self._FIELDS:
            value = getattr(self, name)
            if value is None:
                lines.append(f"{name} = n/a")
            elif isinstance(value, str):
                lines.append(f"{name} = {value}")
            else:
                lines.append(f"{name} = {value:.12g}")
        return "\n".join(lines)


def bound_upper_1way(lam: float, theta: float) -> float:
    return (theta + lam) / (2.0 * (1.0 + lam))


def bound_upper_2way(lam: float, beta: float, theta: float) -> float:
    lb = lam * beta
    return (theta + lb) / (2.0 * (1.0 + lb))


def bound_lower_blindspot(lam: float, alpha: float, theta: float) -> float:
    return 0.5 * theta + (1.0 - theta) * lam * alpha**2 / (2.0 + 7.0 * alpha)


def bound_lower_simple(lam: float, d: int) -> float:
    return (1.0 / lam - 1.0) / (2.0 * (d * d - 1))


def error_report(
    s: SchmidtSpectrum, theta: float, measurement: NamedMeasurement | None = None
) -> ErrorReport:
    """Assemble every bound plus the exact worst case of one measurement.

    With the default measurement (the optimal one-way mixture) the computed
    worst-case error must meet its guarantee with equality; the same holds
    for the two-way mixture.  A disagreement beyond 1e-8 raises
    NumericalFailureError, since both sides are exact.
    """
    if measurement is None:
        measurement = build_t_tilde(s)
    rho = schmidt_state(s)
    accept = float(np.real(np.vdot(rho.ket, measurement.operator.matrix @ rho.ket)))
    adversary = worst_case_value(measurement.operator, rho.density, theta)
    p_err = 0.5 * ((1.0 - accept) + adversary.value)
    lower_thm2 = bound_lower_blindspot(s.lam, s.alpha, theta)
    lower_simple = bound_lower_simple(s.lam, s.d)
    report = ErrorReport(
        theta=float(theta),
        helstrom=0.5 * theta,
        worst_case_value=adversary.value,
        p_err=p_err,
        upper_1way=bound_upper_1way(s.lam, theta),
        upper_2way=bound_upper_2way(s.lam, s.beta, theta),
        lower_thm2=lower_thm2,
        lower_simple=lower_simple,
        max_entangled_value=(s.d * theta + 1.0) / (2.0 * (s.d + 1.0)) if s.is_uniform() else None,
        active_lower="lower_thm2" if lower_thm2 >= lower_simple else "lower_simple",
    )
    if measurement.name == "t-tilde" and abs(p_err - report.upper_1way) > 1e-8:
        raise NumericalFailureError(
            f"one-way mixture missed its guarantee: {p_err!r} vs {report.upper_1way!r}"
        )
    if measurement.name == "t-tilde2" and abs(p_err - report.upper_2way) > 1e-8:
        raise NumericalFailureError(
            f"two-way mixture missed its guarantee: {p_err!r} vs {report.upper_2way!r}"
        )
    return report


# ---------------------------------------------------------------------------
# Inequality verifiers
# ---------------------------------------------------------------------------


@dataclass
class VerdictWithMargin:
    """Pass/fail of a numerical inequality plus its slack."""

    passed: bool
    margin: float
    applicable: bool = True
    detail: str = ""


def verify_ppt_trace_bound(t: BipartiteOperator, rho: BipartiteOperator) -> VerdictWithMargin:
    """Check Tr T >= (Tr T rho) / lam for a PPT effect.

    lam is read off as the spectral norm of the partial transpose of the
    (pure) reference state, which equals its largest Schmidt coefficient.
    """
    verdict = validate_povm_element(t)
    if not (verdict.passed and verdict.ppt):
        raise ContractError("effect must be a PPT POVM element")
    require_density_matrix(rho, what="reference state")
    lam = float(np.abs(np.linalg.eigvalsh(partial_transpose(rho).matrix)).max())
    trace_t = float(np.real(np.trace(t.matrix)))
    accept = float(np.real(np.trace(t.matrix @ rho.matrix)))
    margin = trace_t - accept / lam
    return VerdictWithMargin(passed=margin >= -1e-9, margin=margin)


def verify_blind_spot_bound(t: BipartiteOperator, s: SchmidtSpectrum) -> VerdictWithMargin:
    """Check the off-state norm floors of a symmetric PPT effect.

    With p = Tr T rho, the compressed norm ||(I - rho) T (I - rho)|| must be
    at least 2 p lam alpha^2 / (2 + 7 alpha); when p = 1 it must also reach
    (2/3) lam alpha.  Returns applicable=False for product states
    (alpha = 0), where zero error is possible and the floor is void.
    """
    d = t.local_dim
    if twirl_defect(t) > 1e-10:
        raise ContractError("effect must be twirl-invariant")
    verdict = validate_povm_element(t)
    if not (verdict.passed and verdict.ppt):
        raise ContractError("effect must be a PPT POVM element")
    if s.alpha == 0.0:
        return VerdictWithMargin(passed=True, margin=0.0, applicable=False, detail="alpha = 0")
    rho = schmidt_state(s)
    proj = np.eye(d * d) - rho.density.matrix
    compressed = proj @ t.matrix @ proj
    norm = float(np.linalg.eigvalsh(0.5 * (compressed + compressed.conj().T))[-1])
    p = float(np.real(np.vdot(rho.ket, t.matrix @ rho.ket)))
    floor = 2.0 * p * s.lam * s.alpha**2 / (2.0 + 7.0 * s.alpha)
    margin = norm - floor
    passed = margin >= -1e-9
    detail = f"norm={norm:.12g} floor={floor:.12g}"
    if abs(p - 1.0) <= 1e-9:
        one_sided_floor = (2.0 / 3.0) * s.lam * s.alpha
        margin2 = norm - one_sided_floor
        passed = passed and margin2 >= -1e-9
        margin = min(margin, margin2)
        detail += f" one_sided_floor={one_sided_floor:.12g}"
    return VerdictWithMargin(passed=passed, margin=margin, detail=detail)


def prior_weighted_worst_case(
    t: BipartiteOperator, rho: BipartiteOperator, theta: float, pi0: float
) -> float:
    """Worst-case error under priors: pi0 Tr (I-T) rho + pi1 sup Tr T sigma.

    For theta = 0 and a symmetric PPT effect on a non-product state the
    result is floor-checked against min(pi0, pi1 * 2 lam alpha^2 /
    (2 + 7 alpha)); a violation would mean a numerical fault, not a
    property of the inputs.
    """
    if not 0.0 < pi0 < 1.0:
        raise ValidationError(f"pi0 must lie in (0, 1), got {pi0!r}")
    pi1 = 1.0 - pi0
    accept = float(np.real(np.trace(t.matrix @ rho.matrix)))
    adversary = worst_case_value(t, rho, theta)
    result = pi0 * (1.0 - accept) + pi1 * adversary.value
    if theta == 0.0:
        coeffs = reduced_spectrum(rho)
        lam = float(coeffs[0])
        alpha = math.sqrt(coeffs[1] / coeffs[0]) if coeffs[1] > 0 else 0.0
        if alpha > 0.0 and twirl_defect(t) <= 1e-10 and validate_povm_element(t).ppt:
            floor = min(pi0, pi1 * 2.0 * lam * alpha**2 / (2.0 + 7.0 * alpha))
            if result < floor - 1e-9:
                raise NumericalFailureError(
                    f"prior-weighted error {result!r} fell below its floor {floor!r}"
                )
    return result
