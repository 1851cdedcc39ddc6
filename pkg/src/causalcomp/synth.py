"""Synthetic paired time series from a linear structural model ``Z = BZ + xi``.

``B`` is strictly lower triangular in the time-major order
``X_1, Y_1, X_2, Y_2, ...``. Within-series entries give an autoregression of
order ``markov_order``; cross links add lagged ``X_j -> Y_i`` / ``Y_j -> X_i``
terms. A coupling ``(i, c)`` in the default ``coupling_mode="innovation"``
makes ``Y_i`` load on the innovation of ``X_i``: row ``Y_i`` of ``B`` gets
``c * (e_{X_i} - B[X_i, :])``, so the pair is dependent at time ``i`` and
nowhere else. ``coupling_mode="structural"`` writes only the same-time entry
``X_i -> Y_i``; the past of X then also predicts ``Y_i`` through ``X_i``.

Noise is drawn from NumPy's PCG64 bit generator (``Generator.random``
doubles) pushed through Box-Muller, so panels are reproducible byte for byte
given a seed.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field, replace

import numpy as np
from scipy import linalg

from .copula import SamplePanel
from .errors import ContractViolation
from .gaussian_info import CovarianceModel


def geometric_schedule(order: int, first: float = 0.5, ratio: float = 0.5) -> tuple[float, ...]:
    return tuple(first * ratio**k for k in range(order))


@dataclass(frozen=True)
class LinkSpec:
    """Structure of a synthetic pair of series. Time indices are 1-based."""

    n: int
    markov_order: int = 6
    links_x_to_y: tuple[tuple[int, int, float], ...] = ()
    links_y_to_x: tuple[tuple[int, int, float], ...] = ()
    couplings: tuple[tuple[int, float], ...] = ()
    auto_coefficients: tuple[float, ...] | None = None
    sigma: float = 1.0
    seed: int = 0
    coupling_mode: str = "innovation"

    def __post_init__(self):
        if int(self.n) < 1:
            raise ContractViolation("n must be positive")
        if int(self.markov_order) < 0:
            raise ContractViolation("markov_order must be nonnegative")
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "markov_order", int(self.markov_order))
        auto = self.auto_coefficients
        auto = geometric_schedule(self.markov_order) if auto is None else tuple(float(a) for a in auto)
        if len(auto) != self.markov_order:
            raise ContractViolation(
                f"auto_coefficients has {len(auto)} entries for markov_order {self.markov_order}"
            )
        object.__setattr__(self, "auto_coefficients", auto)
        for name in ("links_x_to_y", "links_y_to_x"):
            links = tuple((int(j), int(i), float(c)) for j, i, c in getattr(self, name))
            for j, i, _ in links:
                if not 1 <= j < i <= self.n:
                    raise ContractViolation(f"{name}: link ({j}, {i}) must satisfy 1 <= j < i <= n")
            if len({(j, i) for j, i, _ in links}) != len(links):
                raise ContractViolation(f"{name}: duplicate link")
            object.__setattr__(self, name, links)
        cpl = tuple((int(i), float(c)) for i, c in self.couplings)
        for i, _ in cpl:
            if not 1 <= i <= self.n:
                raise ContractViolation(f"coupling index {i} outside 1..{self.n}")
        if len({i for i, _ in cpl}) != len(cpl):
            raise ContractViolation("duplicate coupling index")
        object.__setattr__(self, "couplings", cpl)
        if not float(self.sigma) > 0:
            raise ContractViolation("sigma must be positive")
        object.__setattr__(self, "sigma", float(self.sigma))
        object.__setattr__(self, "seed", int(self.seed))
        if self.coupling_mode not in ("innovation", "structural"):
            raise ContractViolation(f"unknown coupling_mode {self.coupling_mode!r}")

    def without_cross_links(self) -> "LinkSpec":
        """Independent X and Y with the same within-series dynamics."""
        return replace(self, links_x_to_y=(), links_y_to_x=(), couplings=())

    def to_json(self) -> str:
        doc = asdict(self)
        for key in ("links_x_to_y", "links_y_to_x", "couplings", "auto_coefficients"):
            doc[key] = [list(x) if isinstance(x, tuple) else x for x in doc[key]]
        return json.dumps(doc, indent=2)

    @classmethod
    def from_json(cls, text: str) -> "LinkSpec":
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ContractViolation(f"link spec is not valid JSON: {exc}") from None
        if not isinstance(doc, dict) or "n" not in doc:
            raise ContractViolation("link spec must be an object with at least 'n'")
        known = set(cls.__dataclass_fields__)
        extra = set(doc) - known
        if extra:
            raise ContractViolation(f"unknown link spec keys: {sorted(extra)}")
        try:
            return cls(**doc)
        except (TypeError, ValueError) as exc:
            raise ContractViolation(f"invalid link spec: {exc}") from None


def _time_major(n: int) -> np.ndarray:
    """Block-layout index of each position in the order X1, Y1, X2, Y2, ..."""
    return np.ravel(np.column_stack([np.arange(n), n + np.arange(n)]))


def build_structural_matrix(spec: LinkSpec) -> np.ndarray:
    """``2n x 2n`` coefficient matrix ``B`` in block layout (row = child)."""
    n = spec.n
    b = np.zeros((2 * n, 2 * n))
    for i in range(n):
        for lag, a in enumerate(spec.auto_coefficients, start=1):
            if i - lag < 0:
                break
            b[i, i - lag] = a
            b[n + i, n + i - lag] = a
    for j, i, c in spec.links_x_to_y:
        b[n + i - 1, j - 1] = c
    for j, i, c in spec.links_y_to_x:
        b[i - 1, n + j - 1] = c
    for i, c in spec.couplings:
        if spec.coupling_mode == "innovation":
            b[n + i - 1] -= c * b[i - 1]
        b[n + i - 1, i - 1] += c
    return b


def _mixing(spec: LinkSpec) -> tuple[np.ndarray, np.ndarray]:
    """Unit lower-triangular ``I - B`` in time-major order, with its permutation."""
    perm = _time_major(spec.n)
    b = build_structural_matrix(spec)[np.ix_(perm, perm)]
    if np.any(np.triu(b) != 0):
        raise ContractViolation("structural matrix is not strictly lower triangular in time order")
    return np.eye(2 * spec.n) - b, perm


def population_covariance(spec: LinkSpec) -> CovarianceModel:
    """Exact ``sigma^2 (I-B)^-1 (I-B)^-T`` in block layout."""
    ib, perm = _mixing(spec)
    inv = linalg.solve_triangular(ib, np.eye(ib.shape[0]), lower=True, unit_diagonal=True)
    cov_tm = spec.sigma**2 * (inv @ inv.T)
    out = np.empty_like(cov_tm)
    out[np.ix_(perm, perm)] = cov_tm
    return CovarianceModel(0.5 * (out + out.T))


def standard_normals(seed, size: int) -> np.ndarray:
    """Box-Muller normals from PCG64 uniforms (pairs share one radius)."""
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed)))
    half = (size + 1) // 2
    u = rng.random((half, 2))
    r = np.sqrt(-2.0 * np.log1p(-u[:, 0]))
    theta = 2.0 * np.pi * u[:, 1]
    return np.column_stack([r * np.cos(theta), r * np.sin(theta)]).reshape(-1)[:size]


def sample(spec: LinkSpec, d_samples: int, seed=None) -> SamplePanel:
    """``d_samples`` i.i.d. draws of ``Z = (I-B)^-1 xi``; ``seed`` overrides ``spec.seed``."""
    if d_samples < 0:
        raise ContractViolation("d_samples must be nonnegative")
    ib, perm = _mixing(spec)
    dim = 2 * spec.n
    xi = spec.sigma * standard_normals(spec.seed if seed is None else seed, d_samples * dim)
    xi = xi.reshape(d_samples, dim)
    if d_samples == 0:
        return SamplePanel(np.empty((0, dim)))
    z_tm = linalg.solve_triangular(ib, xi.T, lower=True, unit_diagonal=True).T
    out = np.empty_like(z_tm)
    out[:, perm] = z_tm
    return SamplePanel(out)


def fixture_positions(n: int = 12, placement_seed: int = 0, max_lag: int = 3):
    """Pseudo-random link placement with 3 X->Y, 4 Y->X links and 2 couplings.

    X->Y links have distinct sources, Y->X links distinct targets, lags are
    drawn from ``1..max_lag`` and couplings sit at distinct times.
    """
    rng = np.random.default_rng(placement_seed)

    def draw(count, distinct):
        chosen, used = [], set()
        while len(chosen) < count:
            lag = int(rng.integers(1, max_lag + 1))
            j = int(rng.integers(1, n - lag + 1))
            key = j if distinct == "source" else j + lag
            if key in used:
                continue
            used.add(key)
            chosen.append((j, j + lag))
        return tuple(sorted(chosen))

    x_to_y = draw(3, "source")
    y_to_x = draw(4, "target")
    couplings = tuple(sorted(int(i) for i in rng.choice(np.arange(1, n + 1), size=2, replace=False)))
    return x_to_y, y_to_x, couplings


def default_fixture(
    seed: int = 0,
    cross: float = 0.8,
    coupling: float = 0.8,
    placement_seed: int = 0,
    coupling_mode: str = "innovation",
) -> LinkSpec:
    """Order-6 autoregressive pair, ``n = 12``, with 3/4/2 planted connections."""
    x_to_y, y_to_x, couplings = fixture_positions(12, placement_seed)
    return LinkSpec(
        n=12,
        markov_order=6,
        links_x_to_y=tuple((j, i, cross) for j, i in x_to_y),
        links_y_to_x=tuple((j, i, cross) for j, i in y_to_x),
        couplings=tuple((i, coupling) for i in couplings),
        auto_coefficients=geometric_schedule(6),
        sigma=1.0,
        seed=seed,
        coupling_mode=coupling_mode,
    )


def null_spec(n: int, markov_order: int = 6, auto_coefficients=None) -> LinkSpec:
    """Independent series with the fixture's within-series dynamics."""
    return LinkSpec(n=n, markov_order=markov_order, auto_coefficients=auto_coefficients)


@dataclass(frozen=True)
class GroundTruth:
    x_out: frozenset[int] = field(default_factory=frozenset)
    x_in: frozenset[int] = field(default_factory=frozenset)
    x_eq: frozenset[int] = field(default_factory=frozenset)
    arrows_x_to_y: frozenset[tuple[int, int]] = field(default_factory=frozenset)
    arrows_y_to_x: frozenset[tuple[int, int]] = field(default_factory=frozenset)


def ground_truth(spec: LinkSpec) -> GroundTruth:
    """Planted structure of ``spec`` expressed as segmentation sets and arrows."""
    return GroundTruth(
        x_out=frozenset(j for j, _, _ in spec.links_x_to_y),
        x_in=frozenset(i for _, i, _ in spec.links_y_to_x),
        x_eq=frozenset(i for i, _ in spec.couplings),
        arrows_x_to_y=frozenset((j, i) for j, i, _ in spec.links_x_to_y),
        arrows_y_to_x=frozenset((j, i) for j, i, _ in spec.links_y_to_x),
    )
