"""Information functionals for a jointly Gaussian pair of time series.

Everything here works on a single joint covariance matrix laid out in blocks:
indices ``0 .. n-1`` hold ``X_1 .. X_n`` and ``n .. 2n-1`` hold ``Y_1 .. Y_n``.
All quantities are in nats and keep the 1/2 factor of the Gaussian entropy,
so the mutual information decomposes exactly into the two delayed directed
informations plus the instantaneous coupling.

Prefix sets ``X^0`` / ``Y^0`` are empty; an empty conditioning set means the
unconditional quantity.
"""

from __future__ import annotations

import enum
import warnings
from dataclasses import dataclass, field
from functools import lru_cache
from typing import NamedTuple

import numpy as np
from scipy import linalg

from .errors import ContractViolation, DomainError, SingularityError

SYMMETRY_TOL = 1e-12
PD_RATIO = 1e-10
JITTER_SCALE = 1e-8


@dataclass(frozen=True, eq=False)
class CovarianceModel:
    """Joint ``2n x 2n`` covariance of ``(X^n, Y^n)`` in block layout.

    Construction checks symmetry and positive definiteness. A matrix whose
    smallest eigenvalue falls below ``1e-10`` times its largest receives a
    ridge ``1e-8 * trace / 2n`` on the diagonal; ``repaired`` records this.
    """

    matrix: np.ndarray
    n: int = field(init=False)
    repaired: bool = field(init=False, default=False)

    def __post_init__(self):
        m = np.array(self.matrix, dtype=float)
        if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] % 2 or m.shape[0] == 0:
            raise ContractViolation(f"expected a square matrix of even size, got shape {m.shape}")
        if not np.all(np.isfinite(m)):
            raise ContractViolation("covariance matrix has non-finite entries")
        asym = np.max(np.abs(m - m.T))
        if asym > SYMMETRY_TOL:
            raise ContractViolation(f"covariance matrix is not symmetric (max asymmetry {asym:.3g})")
        m = 0.5 * (m + m.T)
        repaired = False
        eig = np.linalg.eigvalsh(m)
        if eig[0] < PD_RATIO * max(eig[-1], 0.0) or eig[-1] <= 0:
            lam = JITTER_SCALE * np.trace(m) / m.shape[0]
            m = m + lam * np.eye(m.shape[0])
            repaired = True
            warnings.warn(
                f"covariance matrix near-singular (min eigenvalue {eig[0]:.3g}); added ridge {lam:.3g}",
                RuntimeWarning,
                stacklevel=3,
            )
            eig = np.linalg.eigvalsh(m)
            if eig[0] <= PD_RATIO * eig[-1]:
                raise SingularityError(
                    f"covariance matrix is not positive definite after ridge repair "
                    f"(min eigenvalue {eig[0]:.3g})"
                )
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "n", m.shape[0] // 2)
        object.__setattr__(self, "repaired", repaired)

    @property
    def sigma_x(self) -> np.ndarray:
        return self.matrix[: self.n, : self.n]

    @property
    def sigma_y(self) -> np.ndarray:
        return self.matrix[self.n :, self.n :]

    @property
    def sigma_xy(self) -> np.ndarray:
        return self.matrix[: self.n, self.n :]

    def x(self, k: int) -> np.ndarray:
        """Indices of the prefix ``X^k`` (empty for ``k <= 0``)."""
        return np.arange(max(k, 0), dtype=np.intp)

    def y(self, m: int) -> np.ndarray:
        """Indices of the prefix ``Y^m`` (empty for ``m <= 0``)."""
        return self.n + np.arange(max(m, 0), dtype=np.intp)

    def swapped(self) -> "CovarianceModel":
        """The same model with the roles of X and Y exchanged."""
        n = self.n
        perm = np.r_[np.arange(n, 2 * n), np.arange(n)]
        return CovarianceModel(self.matrix[np.ix_(perm, perm)])


def _index_set(idx, dim: int, name: str) -> np.ndarray:
    a = np.asarray(idx, dtype=np.intp).reshape(-1)
    if a.size and (a.min() < 0 or a.max() >= dim):
        raise ContractViolation(f"index set {name} out of range [0, {dim})")
    if a.size > 1 and np.any(np.diff(a) <= 0):
        raise ContractViolation(f"index set {name} must be strictly increasing")
    return a


def _disjoint(*sets: np.ndarray) -> bool:
    allidx = np.concatenate(sets) if sets else np.empty(0, dtype=np.intp)
    return np.unique(allidx).size == allidx.size


def _cholesky(m: np.ndarray, what: str) -> np.ndarray:
    try:
        return linalg.cholesky(m, lower=True, check_finite=False)
    except linalg.LinAlgError as exc:
        raise SingularityError(f"{what} is numerically singular") from exc


def logdet_pd(m: np.ndarray) -> float:
    """Log-determinant of a symmetric positive definite matrix (0 for empty)."""
    if m.size == 0:
        return 0.0
    c = _cholesky(m, "matrix")
    return 2.0 * float(np.sum(np.log(np.diag(c))))


def conditional_covariance(cov: CovarianceModel, a, b) -> np.ndarray:
    """Schur complement ``S_A - S_AB S_B^-1 S_BA`` of the joint covariance."""
    dim = cov.matrix.shape[0]
    a = _index_set(a, dim, "a")
    b = _index_set(b, dim, "b")
    if a.size == 0:
        raise ContractViolation("conditioned set a must be nonempty")
    if not _disjoint(a, b):
        raise ContractViolation("index sets a and b overlap")
    s = cov.matrix
    s_aa = s[np.ix_(a, a)]
    if b.size == 0:
        return s_aa.copy()
    c = _cholesky(s[np.ix_(b, b)], f"conditioning block {b.tolist()}")
    w = linalg.solve_triangular(c, s[np.ix_(b, a)], lower=True, check_finite=False)
    out = s_aa - w.T @ w
    return 0.5 * (out + out.T)


def gaussian_mutual_information(cov: CovarianceModel, a, b, c=()) -> float:
    """Conditional mutual information ``I(A; B | C)`` in nats."""
    dim = cov.matrix.shape[0]
    a = _index_set(a, dim, "a")
    b = _index_set(b, dim, "b")
    c = _index_set(c, dim, "c")
    if a.size == 0 or b.size == 0:
        raise ContractViolation("a and b must be nonempty")
    if not _disjoint(a, b, c):
        raise ContractViolation("index sets a, b, c must be pairwise disjoint")
    bc = np.sort(np.concatenate([b, c]))
    return 0.5 * (
        logdet_pd(conditional_covariance(cov, a, c))
        - logdet_pd(conditional_covariance(cov, a, bc))
    )


class Direction(str, enum.Enum):
    X_TO_Y = "x_to_y"
    Y_TO_X = "y_to_x"


def delayed_directed_information(cov: CovarianceModel, direction=Direction.X_TO_Y) -> float:
    """Delayed directed information ``I(X^{n-1} -> Y^n)`` (or Y to X).

    Evaluated as ``1/2 sum_{i=1}^{n-1} (log|S_{X^i|Y^i}| - log|S_{X^i|Y^{i+1}}|)``.
    """
    direction = Direction(direction)
    if cov.n < 2:
        raise DomainError("delayed directed information needs at least two time points")
    if direction is Direction.Y_TO_X:
        cov = cov.swapped()
    total = 0.0
    for i in range(1, cov.n):
        src = cov.x(i)
        total += logdet_pd(conditional_covariance(cov, src, cov.y(i)))
        total -= logdet_pd(conditional_covariance(cov, src, cov.y(i + 1)))
    return 0.5 * total


def instantaneous_coupling(cov: CovarianceModel) -> float:
    """``sum_i I(X_i; Y_i | X^{i-1}, Y^{i-1})``."""
    n = cov.n
    total = 0.0
    for i in range(1, n + 1):
        past = np.concatenate([cov.x(i - 1), cov.y(i - 1)])
        total += gaussian_mutual_information(cov, [i - 1], [n + i - 1], past)
    return total


class MIDecomposition(NamedTuple):
    total_mi: float
    di_x_to_y: float
    di_y_to_x: float
    instantaneous: float


def mi_decomposition(cov: CovarianceModel) -> MIDecomposition:
    """Split ``I(X^n; Y^n)`` into delayed flows both ways and the coupling term."""
    n = cov.n
    total = 0.5 * (
        logdet_pd(cov.sigma_x) - logdet_pd(conditional_covariance(cov, cov.x(n), cov.y(n)))
    )
    if n < 2:
        return MIDecomposition(total, 0.0, 0.0, instantaneous_coupling(cov))
    return MIDecomposition(
        total,
        delayed_directed_information(cov, Direction.X_TO_Y),
        delayed_directed_information(cov, Direction.Y_TO_X),
        instantaneous_coupling(cov),
    )


# --------------------------------------------------------------------------
# compression objectives


class Kind(str, enum.Enum):
    OUTGOING_DELAYED = "outgoing"
    INCOMING_DELAYED = "incoming"
    INSTANTANEOUS = "instantaneous"
    PER_TARGET_OUTGOING = "per_target_outgoing"
    PER_TARGET_INCOMING = "per_target_incoming"


_PER_TARGET = (Kind.PER_TARGET_OUTGOING, Kind.PER_TARGET_INCOMING)


@dataclass(frozen=True)
class ObjectiveKind:
    """Which information quantity of the compressed pair ``(T, Y)`` to maximise.

    Per-target kinds carry a 1-based target time ``target`` in ``2 .. n``.
    ``PER_TARGET_INCOMING`` is the per-target problem with X and Y exchanged:
    it compresses Y and targets ``X_i``.
    """

    tag: Kind
    target: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "tag", Kind(self.tag))
        if self.tag in _PER_TARGET:
            if self.target is None or int(self.target) < 2:
                raise DomainError(f"{self.tag.value} needs a target time index >= 2")
            object.__setattr__(self, "target", int(self.target))
        elif self.target is not None:
            raise ContractViolation(f"{self.tag.value} takes no target index")

    @classmethod
    def per_target_outgoing(cls, i: int) -> "ObjectiveKind":
        return cls(Kind.PER_TARGET_OUTGOING, i)

    @classmethod
    def per_target_incoming(cls, i: int) -> "ObjectiveKind":
        return cls(Kind.PER_TARGET_INCOMING, i)

    @property
    def is_per_target(self) -> bool:
        return self.tag in _PER_TARGET

    def check(self, n: int) -> None:
        if self.is_per_target and not 2 <= self.target <= n:
            raise DomainError(f"target index {self.target} outside 2..{n}")
        if self.tag in (Kind.OUTGOING_DELAYED, Kind.INCOMING_DELAYED) and n < 2:
            raise DomainError("delayed objectives need at least two time points")

    def __str__(self):
        return self.tag.value if self.target is None else f"{self.tag.value}({self.target})"


OUTGOING = ObjectiveKind(Kind.OUTGOING_DELAYED)
INCOMING = ObjectiveKind(Kind.INCOMING_DELAYED)
INSTANTANEOUS = ObjectiveKind(Kind.INSTANTANEOUS)


def _weights(d, n: int) -> np.ndarray:
    d = np.asarray(getattr(d, "d", d), dtype=float).reshape(-1)
    if d.shape != (n,):
        raise ContractViolation(f"expected {n} sparsity weights, got {d.shape[0]}")
    if np.any(d < 0) or not np.all(np.isfinite(d)):
        raise ContractViolation("sparsity weights must be finite and nonnegative")
    return d


def compressed_covariance(cov: CovarianceModel, d) -> CovarianceModel:
    """Joint covariance of ``(T^n, Y^n)`` where ``T = diag(sqrt(d)) X + noise``."""
    n = cov.n
    a = np.sqrt(_weights(d, n))
    out = cov.matrix.copy()
    out[:n, :n] = a[:, None] * cov.sigma_x * a[None, :] + np.eye(n)
    out[:n, n:] = a[:, None] * cov.sigma_xy
    out[n:, :n] = out[:n, n:].T
    return CovarianceModel(out)


def objective_value(cov: CovarianceModel, d, kind: ObjectiveKind) -> float:
    """Evaluate an objective directly on the compressed covariance.

    This is the slow reference route (explicit Schur complements); the solver
    uses the sweep kernels in :mod:`causalcomp._kernels`.
    """
    n = cov.n
    kind.check(n)
    d = _weights(d, n)
    if kind.tag is Kind.PER_TARGET_INCOMING:
        return objective_value(cov.swapped(), d, ObjectiveKind.per_target_outgoing(kind.target))
    if kind.tag is Kind.PER_TARGET_OUTGOING:
        i = kind.target
        d = d.copy()
        d[i - 1 :] = 0.0
        tc = compressed_covariance(cov, d)
        if i == 1:
            return 0.0
        return gaussian_mutual_information(tc, tc.x(i - 1), [n + i - 1], tc.y(i - 1))
    tc = compressed_covariance(cov, d)
    if kind.tag is Kind.OUTGOING_DELAYED:
        return delayed_directed_information(tc, Direction.X_TO_Y)
    if kind.tag is Kind.INCOMING_DELAYED:
        return delayed_directed_information(tc, Direction.Y_TO_X)
    return instantaneous_coupling(tc)


@lru_cache(maxsize=4096)
def objective_terms(kind: ObjectiveKind, n: int) -> tuple[tuple[float, int, int], ...]:
    """Expand an X-side objective into log-determinant terms.

    Returns ``(coef, k, m)`` triples such that the objective equals
    ``sum coef * 1/2 log|S_{T^k|Y^m}|``. Every such term has derivative
    ``coef * 1/2 Var(X_j | T^k, Y^m)`` in ``d_j`` for ``j <= k``.
    """
    kind.check(n)
    if kind.tag is Kind.PER_TARGET_INCOMING:
        raise ContractViolation("per-target incoming objectives are expanded on the swapped model")
    terms: list[tuple[float, int, int]] = []
    if kind.tag is Kind.OUTGOING_DELAYED:
        for i in range(1, n):
            terms += [(1.0, i, i), (-1.0, i, i + 1)]
    elif kind.tag is Kind.INCOMING_DELAYED:
        # sum_i h(T_{i+1}|T^i) - h(T_{i+1}|T^i, Y^i)
        for i in range(1, n):
            terms += [(1.0, i + 1, 0), (-1.0, i, 0), (-1.0, i + 1, i), (1.0, i, i)]
    elif kind.tag is Kind.INSTANTANEOUS:
        for i in range(1, n + 1):
            terms += [(1.0, i, i - 1), (-1.0, i, i), (-1.0, i - 1, i - 1), (1.0, i - 1, i)]
    else:
        i = kind.target
        terms += [(1.0, i - 1, i - 1), (-1.0, i - 1, i)]
    merged: dict[tuple[int, int], float] = {}
    for coef, k, m in terms:
        if k == 0:
            continue
        merged[(k, m)] = merged.get((k, m), 0.0) + coef
    return tuple((c, k, m) for (k, m), c in sorted(merged.items()) if c != 0.0)


def as_model(cov) -> CovarianceModel:
    return cov if isinstance(cov, CovarianceModel) else CovarianceModel(np.asarray(cov))


__all__ = [
    "CovarianceModel",
    "Direction",
    "INCOMING",
    "INSTANTANEOUS",
    "Kind",
    "MIDecomposition",
    "OUTGOING",
    "ObjectiveKind",
    "as_model",
    "compressed_covariance",
    "conditional_covariance",
    "delayed_directed_information",
    "gaussian_mutual_information",
    "instantaneous_coupling",
    "logdet_pd",
    "mi_decomposition",
    "objective_terms",
    "objective_value",
]
