"""
Semiclassical sweeps over the tensor power k.

Three families of sequences are produced, each as an `AsymptoticRun`:

- probabilities `p_k = Tr(Pi (x) P_{nu, k})` of isotypes, whose growth in k reflects the
  dimension of the reduced space at the moment level;
- traces `Tr T_k[f]`, equal to `(k + 1)` times the mean of f for P1;
- the deviation `|Q_k[f]/i - T_k[f]|`, of order 1/k.

Growth exponents are fitted by least squares in log-log coordinates. Sweeps can run on a thread
pool; results keep the order of `k_values`.
"""

from __future__ import annotations

import csv
import io
import logging
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Callable, Literal, Optional, Sequence, TypeVar

import numpy as np

from toeplitz_lattice.exception import BaseToeplitzLatticeException
from toeplitz_lattice.gleason import trace
from toeplitz_lattice.quantization.decomposition import isotype
from toeplitz_lattice.quantization.geometry import (
    DEFAULT_VOLUME,
    GroupAction,
    InvalidQuantumNumber,
    QuantizedGeometry,
    as_points,
)
from toeplitz_lattice.quantization.sections import build_sections
from toeplitz_lattice.quantization.toeplitz import (
    Symbol,
    equivariant_toeplitz,
    laplace_beltrami,
    toeplitz,
    tuynman_deviation,
)
from toeplitz_lattice.subspace import Operator

logger = logging.getLogger(__name__)

T = TypeVar("T")

IDENTITY_TOL = 1e-8
ZERO_TRACE_TOL = 1e-9
MIN_FIT_SAMPLES = 3
FIT_CORRECTIONS = 1

RunKind = Literal["probability", "trace", "tuynman"]

CSV_HEADER = ("k", "dim", "trace", "prediction", "residual")


class FitError(BaseToeplitzLatticeException):
    pass


class DroppedSamplesWarning(UserWarning):
    """Non-positive samples were left out of a log-log fit."""


@dataclass(frozen=True)
class ExponentFit:
    """
    `y ~ constant * k^exponent`, fitted in log-log coordinates.

    With `corrections = n` the model is `log y = log C + a log k + sum_{j<=n} c_j / k^j`, which
    absorbs the finite-k offsets of sequences such as `k + 1` or `1 / (k + 2)`.
    """

    exponent: float
    constant: float
    residuals: tuple[float, ...]
    k_used: tuple[int, ...]
    corrections: tuple[float, ...] = ()

    def predict(self, k: Any) -> np.ndarray:
        k = np.asarray(k, dtype=float)
        log_y = np.log(self.constant) + self.exponent * np.log(k)
        for j, c in enumerate(self.corrections, start=1):
            log_y = log_y + c / k**j
        return np.exp(log_y)


def fit_exponent(k_values: Sequence[int], y_values: Sequence[float], corrections: int = 0) -> ExponentFit:
    """
    Least-squares growth exponent of `y` in `k`.

    Samples with `y <= 0` are dropped with a `DroppedSamplesWarning`; fewer than three usable
    samples (plus one per correction term) raise `FitError`.

    Example:
        ```python
        from toeplitz_lattice.semiclassics import fit_exponent

        fit = fit_exponent([10, 20, 40, 80], [100, 400, 1600, 6400])
        assert abs(fit.exponent - 2) < 1e-12 and abs(fit.constant - 1) < 1e-10
        ```
    """
    k = np.asarray(k_values, dtype=float)
    y = np.asarray(y_values, dtype=float)
    if k.shape != y.shape:
        raise FitError(f"k and y have different lengths: {k.size} and {y.size}")
    if np.any(k <= 0):
        raise FitError("A log-log fit needs positive k")
    keep = y > 0
    if not np.all(keep):
        warnings.warn(
            f"Dropped {int(np.sum(~keep))} non-positive samples from the fit",
            DroppedSamplesWarning,
            stacklevel=2,
        )
    k, y = k[keep], y[keep]
    if k.size < MIN_FIT_SAMPLES + corrections:
        raise FitError(
            f"Need at least {MIN_FIT_SAMPLES + corrections} positive samples, got {k.size}"
        )

    columns = [np.ones_like(k), np.log(k)] + [k ** (-j) for j in range(1, corrections + 1)]
    design = np.column_stack(columns)
    target = np.log(y)
    coefficients, *_ = np.linalg.lstsq(design, target, rcond=None)
    residuals = target - design @ coefficients
    return ExponentFit(
        exponent=float(coefficients[1]),
        constant=float(np.exp(coefficients[0])),
        residuals=tuple(float(r) for r in residuals),
        k_used=tuple(int(v) for v in k),
        corrections=tuple(float(c) for c in coefficients[2:]),
    )


@dataclass(frozen=True)
class AsymptoticRun:
    """
    One semiclassical sequence with its fit.

    params:
        kind:
            `"probability"`, `"trace"` or `"tuynman"`.
        label:
            Action and labels, or symbol id, that define the sequence.
        k_values:
            Strictly increasing tensor powers.
        values:
            The sequence (probabilities, traces or deviations), same length as `k_values`.
        dims:
            Dimension of the space (or isotype) at each k.
        references:
            Exact values where an identity predicts them (traces), or bounds (deviations).
        fit:
            The growth fit, None when the run is flagged.
        flagged:
            Reason no fit was made (e.g. all values vanish).
        max_identity_defect:
            Largest `|value - reference| / (k + 1)` for trace runs.
    """

    kind: RunKind
    label: str
    k_values: tuple[int, ...]
    values: tuple[float, ...]
    dims: tuple[int, ...]
    references: tuple[Optional[float], ...] = ()
    fit: Optional[ExponentFit] = None
    flagged: Optional[str] = None
    max_identity_defect: Optional[float] = None
    normalized: bool = False

    def __post_init__(self):
        if any(b <= a for a, b in zip(self.k_values, self.k_values[1:])):
            raise InvalidQuantumNumber(f"k values must be strictly increasing, got {self.k_values}")
        if len(self.values) != len(self.k_values) or len(self.dims) != len(self.k_values):
            raise FitError("A run needs one value and one dimension per k")

    @property
    def fitted_exponent(self) -> Optional[float]:
        return self.fit.exponent if self.fit else None

    @property
    def fitted_constant(self) -> Optional[float]:
        return self.fit.constant if self.fit else None

    def predictions(self) -> list[Optional[float]]:
        if self.fit is None:
            return [None] * len(self.k_values)
        return [float(v) for v in self.fit.predict(self.k_values)]

    def mean_values(self) -> list[float]:
        """Trace per dimension, i.e. the quantum average; tends to the classical mean for traces."""
        return [v / d if d else 0.0 for v, d in zip(self.values, self.dims)]

    def rows(self) -> list[tuple[Any, ...]]:
        residuals: dict[int, float] = {}
        if self.fit is not None:
            residuals = dict(zip(self.fit.k_used, self.fit.residuals))
        return [
            (k, dim, value, prediction, residuals.get(k))
            for k, dim, value, prediction in zip(self.k_values, self.dims, self.values, self.predictions())
        ]

    def to_csv(self) -> str:
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(CSV_HEADER)
        for row in self.rows():
            writer.writerow(["" if cell is None else cell for cell in row])
        return buffer.getvalue()

    def to_dict(self) -> dict[str, Any]:
        return {
            "kind": self.kind,
            "label": self.label,
            "k_values": list(self.k_values),
            "values": list(self.values),
            "dims": list(self.dims),
            "references": list(self.references),
            "fitted_exponent": self.fitted_exponent,
            "fitted_constant": self.fitted_constant,
            "flagged": self.flagged,
            "max_identity_defect": self.max_identity_defect,
            "normalized": self.normalized,
        }


def _map(func: Callable[[int], T], k_values: Sequence[int], workers: int) -> list[T]:
    if workers <= 1:
        return [func(k) for k in k_values]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(func, k_values))


def _fit_or_flag(
    k_values: Sequence[int], values: Sequence[float], dims: Sequence[int], zero_tol: float = ZERO_TRACE_TOL
) -> tuple[Optional[ExponentFit], Optional[str]]:
    positive = [
        (k, v) for k, v, d in zip(k_values, values, dims) if v > zero_tol * max(d, 1)
    ]
    if not positive:
        return None, "all values vanish"
    kept = {k for k, _ in positive}
    dropped = [k for k in k_values if k not in kept]
    if dropped:
        warnings.warn(
            f"Dropped {len(dropped)} vanishing samples from the fit, at k={dropped}",
            DroppedSamplesWarning,
            stacklevel=3,
        )
    if len(positive) < MIN_FIT_SAMPLES + FIT_CORRECTIONS:
        return None, f"only {len(positive)} positive values"
    ks, ys = zip(*positive)
    return fit_exponent(ks, ys, corrections=FIT_CORRECTIONS), None


def _check_k_values(k_values: Sequence[int]) -> tuple[int, ...]:
    ks = tuple(int(k) for k in k_values)
    if not ks:
        raise InvalidQuantumNumber("A sweep needs at least one k")
    if any(k < 0 for k in ks):
        raise InvalidQuantumNumber(f"Tensor powers must be nonnegative, got {ks}")
    if any(b <= a for a, b in zip(ks, ks[1:])):
        raise InvalidQuantumNumber(f"k values must be strictly increasing, got {ks}")
    return ks


@dataclass(frozen=True)
class KernelDiagonal:
    """Values `Pi_k(x, x)` of the Szego kernel on the diagonal at a set of points."""

    k: int
    points: np.ndarray = field(repr=False)
    values: np.ndarray = field(repr=False)
    volume: float

    @property
    def expected(self) -> float:
        """The constant `(k + 1) / volume` forced by homogeneity of P1."""
        return (self.k + 1) / self.volume

    @property
    def max_deviation(self) -> float:
        return float(np.max(np.abs(self.values - self.expected)))


def szego_diagonal(
    k: int, points: Any, geometry: Optional[QuantizedGeometry] = None
) -> KernelDiagonal:
    """
    The Szego kernel on the diagonal, `sum_a |s_a(x)|^2` over an orthonormal basis at unit lifts.

    Example:
        ```python
        import math
        from toeplitz_lattice.semiclassics import szego_diagonal

        kernel = szego_diagonal(5, [[1, 0], [1, 1j]])
        assert kernel.max_deviation < 1e-12
        assert math.isclose(kernel.expected, 6 / math.pi)
        ```
    """
    space = build_sections(k, geometry)
    pts = as_points(points)
    lift = pts / np.linalg.norm(pts, axis=1)[:, None]
    values = np.sum(np.abs(space.evaluate_orthonormal(lift)) ** 2, axis=1)
    return KernelDiagonal(k, pts, values, space.volume)


def szego_integral(k: int, geometry: Optional[QuantizedGeometry] = None) -> float:
    """Integral of the kernel diagonal over P1 by quadrature, equal to `k + 1`."""
    space = build_sections(k, geometry)
    nodes = space.geometry.rule.nodes(space.volume)
    values = np.sum(np.abs(space.evaluate_orthonormal(nodes.points)) ** 2, axis=1)
    return float(nodes.integrate(values).real)


def symbol_mean(symbol: Symbol, geometry: QuantizedGeometry) -> float:
    """Average of the symbol over P1 for the normalized measure."""
    nodes = geometry.rule.nodes(geometry.volume_normalization)
    return float(nodes.integrate(symbol(nodes.heights, nodes.phis)).real / geometry.volume_normalization)


def probability_sequence(
    action: GroupAction,
    nu_g: int,
    k_values: Sequence[int],
    *,
    normalized: bool = False,
    truncation: Optional[int] = None,
    volume: Optional[float] = None,
    workers: int = 1,
) -> AsymptoticRun:
    """
    `p_k = Tr(Pi (x) P_{nu_g, k})` for the isotypes with fixed G label.

    `Pi` is the identity of the truncated Hardy space (`normalized=False`, p_k is the isotype
    dimension) or the maximally mixed state on it (`normalized=True`, divided by the total
    truncated dimension). For su2 the G label is a weight of the atomic refinement; for the
    circle it is ignored.

    Example:
        ```python
        import numpy as np
        from toeplitz_lattice.quantization.geometry import GroupAction
        from toeplitz_lattice.semiclassics import probability_sequence

        run = probability_sequence(GroupAction.circle(), 0, [10, 20, 40, 80, 100])
        assert np.allclose(run.values, [11, 21, 41, 81, 101])
        assert abs(run.fitted_exponent - 1) < 0.02
        ```
    """
    ks = _check_k_values(k_values)
    truncation = ks[-1] if truncation is None else truncation
    if truncation < ks[-1]:
        raise InvalidQuantumNumber(f"Truncation {truncation} is below the largest k {ks[-1]}")
    volume = DEFAULT_VOLUME if volume is None else volume
    total = sum(k + 1 for k in range(truncation + 1))
    atomic = action.kind == "su2"

    def probability(k: int) -> tuple[float, int]:
        space = build_sections(k, QuantizedGeometry(k, volume))
        component = isotype(action, nu_g, k, space, atomic=atomic)
        # Tr(I_k P) on the block; the identity of the truncation restricts to I_k
        value = trace(Operator(space.ambient, component.subspace.projector)).real
        if normalized:
            value /= total
        return float(value), space.dim

    results = _map(probability, ks, workers)
    values = tuple(v for v, _ in results)
    dims = tuple(d for _, d in results)
    scale = 1.0 / total if normalized else 1.0
    fit, flagged = _fit_or_flag(ks, [v / scale for v in values], dims)
    if fit is not None and normalized:
        fit = ExponentFit(
            fit.exponent, fit.constant * scale, fit.residuals, fit.k_used, fit.corrections
        )
    label = f"{action.kind}:nu_g={nu_g}"
    if flagged:
        logger.info("probability sequence %s: %s", label, flagged)
    return AsymptoticRun(
        kind="probability",
        label=label,
        k_values=ks,
        values=values,
        dims=dims,
        fit=fit,
        flagged=flagged,
        normalized=normalized,
    )


def trace_sequence(
    symbol: Symbol,
    k_values: Sequence[int],
    *,
    geometry: Optional[QuantizedGeometry] = None,
    action: Optional[GroupAction] = None,
    nu_g: Optional[int] = None,
    workers: int = 1,
) -> AsymptoticRun:
    """
    `Tr T_k[f]` over k, or the trace of its compression to the isotypes (nu_g, k) of `action`.

    Without an action every trace is checked against `(k + 1) mean(f)`; the largest defect per
    dimension is stored in `max_identity_defect` and logged when it exceeds 1e-8.

    Example:
        ```python
        from toeplitz_lattice.quantization.toeplitz import constant
        from toeplitz_lattice.semiclassics import trace_sequence

        run = trace_sequence(constant(1.0), [10, 20, 30, 40, 50])
        assert run.max_identity_defect < 1e-8
        assert abs(run.fitted_exponent - 1) < 0.02
        ```
    """
    ks = _check_k_values(k_values)
    template = geometry or QuantizedGeometry(0)
    if action is not None and nu_g is None:
        raise InvalidQuantumNumber("A compressed trace needs the G label nu_g")
    atomic = action is not None and action.kind == "su2"

    def sample(k: int) -> tuple[float, int, Optional[float]]:
        geo = template.with_k(k)
        if action is None:
            value = trace(toeplitz(symbol, k, geo)).real
            return float(value), k + 1, (k + 1) * symbol_mean(symbol, geo)
        assert nu_g is not None
        component = isotype(action, nu_g, k, build_sections(k, geo), atomic=atomic)
        if component.dim == 0:
            return 0.0, 0, 0.0
        value = trace(equivariant_toeplitz(symbol, component, geo)).real
        return float(value), component.dim, None

    results = _map(sample, ks, workers)
    values = tuple(v for v, _, _ in results)
    dims = tuple(d for _, d, _ in results)
    references = tuple(r for _, _, r in results)

    defect: Optional[float] = None
    if action is None:
        defect = max(
            abs(v - r) / (k + 1) for k, v, r in zip(ks, values, references) if r is not None
        )
        if defect > IDENTITY_TOL:
            logger.warning("trace identity for %s misses by %.3e per dimension", symbol.name, defect)

    fit, flagged = _fit_or_flag(ks, values, [k + 1 for k in ks])
    label = symbol.name if action is None else f"{symbol.name}|{action.kind}:nu_g={nu_g}"
    return AsymptoticRun(
        kind="trace",
        label=label,
        k_values=ks,
        values=values,
        dims=dims,
        references=references,
        fit=fit,
        flagged=flagged,
        max_identity_defect=defect,
    )


def tuynman_sweep(
    symbol: Symbol,
    k_values: Sequence[int],
    *,
    geometry: Optional[QuantizedGeometry] = None,
    workers: int = 1,
) -> AsymptoticRun:
    """
    `|Q_k[f]/i - T_k[f]|` over k, with the bound `sup |Delta f| / (2k)` as reference.

    Example:
        ```python
        from toeplitz_lattice.quantization.toeplitz import height
        from toeplitz_lattice.semiclassics import tuynman_sweep

        run = tuynman_sweep(height(), [10, 20, 40, 80])
        assert abs(run.fitted_exponent + 1) < 0.05
        ```
    """
    ks = _check_k_values(k_values)
    if ks[0] == 0:
        raise InvalidQuantumNumber("The corrected quantization is undefined at k=0")
    template = geometry or QuantizedGeometry(1)

    lap = laplace_beltrami(symbol, template.sphere_radius)
    nodes = template.with_k(ks[-1]).rule.nodes(template.volume_normalization)
    sup_laplacian = float(np.max(np.abs(lap(nodes.heights, nodes.phis))))

    values = tuple(_map(lambda k: tuynman_deviation(symbol, k, template.with_k(k)), ks, workers))
    references = tuple(sup_laplacian / (2 * k) for k in ks)
    for k, value, bound in zip(ks, values, references):
        if value > bound * (1 + 1e-9) + 1e-12:
            logger.warning("deviation %.3e at k=%d exceeds the bound %.3e", value, k, bound)
    fit, flagged = _fit_or_flag(ks, values, [k + 1 for k in ks])
    return AsymptoticRun(
        kind="tuynman",
        label=symbol.name,
        k_values=ks,
        values=values,
        dims=tuple(k + 1 for k in ks),
        references=references,
        fit=fit,
        flagged=flagged,
    )
