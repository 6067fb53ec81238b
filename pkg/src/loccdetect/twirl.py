"""Phase-averaging (twirl) map, A+B split, and random symmetric PPT effects.

The symmetrizing map keeps an operator entry (ij, kl) only when i = j and
k = l (the matched-diagonal block) or i = k and j = l (the product diagonal).
It can be realized exactly by averaging conjugations with p^2 diagonal phase
unitaries, p an odd prime >= d; both routes are implemented independently so
they can cross-check each other.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import ContractError, ValidationError
from .operators import BipartiteOperator


@lru_cache(maxsize=None)
def _keep_mask(d: int) -> np.ndarray:
    idx = np.arange(d * d)
    i, j = idx // d, idx % d
    ri, rj = i[:, None], j[:, None]
    ck, cl = i[None, :], j[None, :]
    mask = ((ri == rj) & (ck == cl)) | ((ri == ck) & (rj == cl))
    mask.flags.writeable = False
    return mask


def twirl_entrywise(t: BipartiteOperator) -> BipartiteOperator:
    """Apply the symmetrizing map by zeroing all non-kept entries.

    The map is linear, idempotent, trace preserving, and preserves
    hermiticity and positivity.
    """
    return BipartiteOperator(t.local_dim, t.matrix * _keep_mask(t.local_dim))


def twirl_defect(t: BipartiteOperator) -> float:
    """Largest entry the symmetrizing map would zero (0 for invariant input)."""
    return float(np.abs(t.matrix * ~_keep_mask(t.local_dim)).max())


def smallest_odd_prime_geq(d: int) -> int:
    """Smallest odd prime p >= d (p = 3 for d <= 3)."""
    n = max(3, d if d % 2 else d + 1)
    while True:
        for q in range(3, int(n**0.5) + 1, 2):
            if n % q == 0:
                break
        else:
            return n
        n += 2


def twirl_unitary_diagonals(d: int) -> tuple[int, np.ndarray, np.ndarray]:
    """Diagonals of the two d-dim phase unitaries and the prime p used.

    Returns (p, z, u) with z_j = w^j and u_j = w^(j^2), w = exp(2 pi i / p).
    """
    p = smallest_odd_prime_geq(d)
    omega = np.exp(2j * np.pi / p)
    j = np.arange(d)
    return p, omega**j, omega ** (j * j)


def twirl_discrete(t: BipartiteOperator) -> BipartiteOperator:
    """Average of p^2 unitary conjugations; equals twirl_entrywise to 1e-10.

    Each term conjugates by (U (x) conj(U))^k (Z (x) conj(Z))^l, applied as
    literal matrix products so this path stays independent of the entrywise
    implementation.
    """
    d = t.local_dim
    p, z, u = twirl_unitary_diagonals(d)
    acc = np.zeros_like(t.matrix)
    for k in range(p):
        for l in range(p):
            w = u**k * z**l
            v = np.diag(np.kron(w, w.conj()))
            acc = acc + v @ t.matrix @ v.conj().T
    return BipartiteOperator(d, acc / (p * p))


@dataclass
class ABDecomposition:
    """Split of a symmetric operator into matched-span and off-span parts.

    ``a[i, j]`` is the entry at (ii, jj) (the operator restricted to the
    span of the matched basis |k (x) k>), and ``b[i, j]``, i != j, is the
    diagonal entry at (ij, ij).  Valid effects have 0 <= a <= I as a d x d
    matrix and b entries in [0, 1].
    """

    a: np.ndarray
    b: np.ndarray

    @property
    def d(self) -> int:
        return self.a.shape[0]

    def ppt_form(self, tol: float = 1e-12) -> bool:
        """True iff |a_ij|^2 <= b_ij * b_ji for all i != j.

        For symmetric effects this is equivalent to positivity of the
        partial transpose (the off-diagonal 2x2 blocks of the transpose).
        """
        lhs = np.abs(self.a) ** 2
        rhs = self.b * self.b.T
        off = ~np.eye(self.d, dtype=bool)
        return bool(np.all(lhs[off] <= rhs[off] + tol))

    def reassemble(self) -> np.ndarray:
        """Dense matrix sum of the a-block and the b-diagonal."""
        d = self.d
        m = np.zeros((d * d, d * d), dtype=complex)
        matched = np.arange(d) * (d + 1)
        m[np.ix_(matched, matched)] = self.a
        idx = np.arange(d * d)
        m[idx, idx] += self.b.reshape(-1)
        return m


def ab_decompose(t: BipartiteOperator) -> ABDecomposition:
    """Extract the A and B parts of a twirl-invariant operator.

    Raises
    ------
    ContractError
        If the input is not fixed by the twirl (tolerance 1e-10); the
        message names the offending entry.
    """
    d = t.local_dim
    diff = np.abs(t.matrix * ~_keep_mask(d))
    if diff.max() > 1e-10:
        r, c = np.unravel_index(int(diff.argmax()), diff.shape)
        raise ContractError(
            f"operator is not twirl-invariant: entry ({r // d}{r % d}, {c // d}{c % d}) "
            f"has magnitude {diff.max():.3e}"
        )
    matched = np.arange(d) * (d + 1)
    a = t.matrix[np.ix_(matched, matched)].copy()
    b = np.real(np.diag(t.matrix)).reshape(d, d).copy()
    np.fill_diagonal(b, 0.0)
    return ABDecomposition(a=a, b=b)


def random_phi_symmetric_ppt(d: int, seed: int) -> BipartiteOperator:
    """Seeded random twirl-invariant PPT effect with 0 <= T <= I.

    The a-block is a scaled Wishart matrix G^dagger G normalized by its top
    eigenvalue and shrunk by a uniform factor in (0, 1], so 0 <= A <= I
    without rejection.  Each off-span diagonal pair is set to
    b_ij = b_ji = |a_ij| + u (1 - |a_ij|), u uniform in [0, 1], which pins
    b in [0, 1] and |a_ij|^2 <= b_ij b_ji, hence a PPT partial transpose.
    Identical seeds reproduce the operator bit for bit.
    """
    if d < 2:
        raise ValidationError(f"local dimension must be >= 2, got {d}")
    rng = np.random.default_rng(seed)
    g = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    wishart = g.conj().T @ g
    top = float(np.linalg.eigvalsh(wishart)[-1])
    scale = 1.0 - rng.uniform()  # uniform in (0, 1]
    a = scale * wishart / top
    u = rng.uniform(size=(d, d))
    absa = np.abs(a)
    b = np.zeros((d, d))
    for i in range(d):
        for j in range(i + 1, d):
            b[i, j] = b[j, i] = absa[i, j] + u[i, j] * (1.0 - absa[i, j])
    op = ABDecomposition(a=a, b=b).reassemble()
    meta = {"generator": "numpy.random.PCG64", "seed": int(seed)}
    return BipartiteOperator(d, op, meta=meta)
