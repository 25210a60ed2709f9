"""
The verification suites behind the CLI commands.

Each suite turns a `RunConfig` into a `SuiteReport`. Invariant failures are recorded as failed
checks, never raised; only invalid input raises.
"""

from __future__ import annotations

import logging
import math
import warnings
from typing import Callable, Sequence

import numpy as np
from typing_extensions import assert_never

from toeplitz_lattice.cli.config import RunConfig
from toeplitz_lattice.cli.reports import SuiteReport
from toeplitz_lattice.gleason import (
    PROBABILITY_CSV_HEADER,
    DensityOperator,
    GleasonDimensionWarning,
    check_additivity,
    probability_report,
    spectral_decompose,
)
from toeplitz_lattice.lattice import (
    check_distributive,
    find_diamond,
    orthomodular_trials,
    verify_orthoalgebra,
)
from toeplitz_lattice.quantization.decomposition import decompose, isotype
from toeplitz_lattice.quantization.geometry import (
    GroupAction,
    QuadratureSpec,
    QuadratureWarning,
    QuantizedGeometry,
    points_from_sphere,
)
from toeplitz_lattice.quantization.povm import (
    RegionPartition,
    describe_blocks,
    min_effect_eigenvalue,
    povm_blocks,
    povm_completeness,
    reconstruction_error,
    riemann_reconstruct,
)
from toeplitz_lattice.quantization.sections import HardySpace, berezin_symbol, build_sections
from toeplitz_lattice.quantization.toeplitz import (
    Symbol,
    constant,
    height,
    laplace_beltrami,
    real_spherical_harmonic,
    toeplitz,
    tuynman_deviation,
)
from toeplitz_lattice.sampling import (
    random_rescaling,
    random_resolution,
    random_sphere_samples,
)
from toeplitz_lattice.semiclassics import (
    IDENTITY_TOL,
    AsymptoticRun,
    probability_sequence,
    symbol_mean,
    szego_diagonal,
    szego_integral,
    trace_sequence,
    tuynman_sweep,
)
from toeplitz_lattice.subspace import EQUALITY_TOL, HilbertSpace, Subspace

logger = logging.getLogger(__name__)

GRAM_TOL = 1e-10
SPECTRUM_TOL = 1e-9
SZEGO_TOL = 1e-9
HERMITIAN_TOL = 1e-12
PSD_TOL = 1e-10
COMPLETENESS_TOL = 1e-9
ADDITIVITY_TOL = 1e-9
GROWTH_TOL = 0.02
TUYNMAN_EXPONENT_TOL = 0.05
REFINEMENTS = 4


def geometry_for(config: RunConfig, k: int) -> QuantizedGeometry:
    quadrature = (
        QuadratureSpec.for_degree(config.quadrature_degree)
        if config.quadrature_degree is not None
        else None
    )
    return QuantizedGeometry(k, config.volume, quadrature)


def symbol_for(config: RunConfig) -> Symbol:
    if config.symbol == "height":
        return height()
    elif config.symbol == "one":
        return constant(1.0)
    elif config.symbol == "raised-height":
        return raised_height()
    elif config.symbol == "harmonic":
        return real_spherical_harmonic(config.harmonic_l, config.harmonic_m)
    else:
        assert_never(config.symbol)


def raised_height() -> Symbol:
    """(1 + h) / 2, the probability density of the north pole side."""
    return Symbol.combine([(0.5, constant(1.0)), (0.5, height())], "raised-height")


def _is_zonal(config: RunConfig) -> bool:
    if config.symbol in ("height", "raised-height"):
        return True
    return config.symbol == "harmonic" and config.harmonic_m == 0 and config.harmonic_l > 0


def _new_report(config: RunConfig) -> SuiteReport:
    return SuiteReport(config.command, config.seed, config.to_dict())


# lattice-check


def distributive_witness(report: SuiteReport, dim: int):
    ambient = HilbertSpace(dim)
    if dim < 2:
        diamond = find_diamond([Subspace.zero(ambient), Subspace.full(ambient)])
        report.check(
            "lattice.diamond",
            diamond is None,
            detail="C^1 is a chain, no diamond exists",
        )
        return

    e1, e2 = np.eye(dim)[0], np.eye(dim)[1]
    x = Subspace.span([e1], ambient)
    y = Subspace.span([e2], ambient)
    z = Subspace.span([e1 + e2], ambient)
    law = check_distributive(x, y, z)
    report.check(
        "lattice.distributive_witness",
        not law.holds and law.lhs.dim == 1 and law.rhs.dim == 0,
        law.defect,
        detail=f"lhs dim {law.lhs.dim}, rhs dim {law.rhs.dim}",
    )
    diamond = find_diamond([x, y, z])
    report.check("lattice.diamond", diamond is not None, detail="span{e1}, span{e2}")
    report.data["distributive"] = law.to_dict()
    if diamond is not None:
        report.data["diamond"] = {name: part["dim"] for name, part in diamond.to_dict().items()}
    report.add_table(
        "laws",
        ("law", "holds", "lhs_dim", "rhs_dim", "defect"),
        [(law.law, law.holds, law.lhs.dim, law.rhs.dim, law.defect)],
    )


def orthomodular_suite(report: SuiteReport, dims: Sequence[int], trials: int, rng: np.random.Generator):
    rows = []
    for dim in dims:
        worst = orthomodular_trials(dim, trials, rng)
        rows.append((dim, trials, worst))
        report.check(
            f"lattice.orthomodular.dim{dim}",
            worst <= EQUALITY_TOL,
            worst,
            EQUALITY_TOL,
            f"{trials} Haar-random pairs",
        )
    report.add_table("orthomodular", ("dim", "trials", "worst_defect"), rows)


def additivity_suite(report: SuiteReport, dims: Sequence[int], draws: int, rng: np.random.Generator):
    worst = 0.0
    rows = []
    for _ in range(draws):
        dim = int(dims[int(rng.integers(len(dims)))])
        ambient = HilbertSpace(dim)
        state = DensityOperator.random(ambient, rng)
        parts = random_resolution(dim, rng)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", GleasonDimensionWarning)
            result = check_additivity(state, parts)
        defect = max(abs(result.total - 1), result.defect)
        worst = max(worst, defect)
        rows.append((dim, len(parts), result.total, defect))
    detail = f"{draws} density operators in dims {min(dims)}-{max(dims)}"
    if min(dims) < 3:
        detail += "; below dim 3 Tr(T P) is still additive but not every measure is of this form"
    report.check("gleason.additivity", worst <= ADDITIVITY_TOL, worst, ADDITIVITY_TOL, detail)
    report.add_table("additivity", ("dim", "parts", "total", "defect"), rows)


def lattice_check(config: RunConfig) -> SuiteReport:
    rng = np.random.default_rng(config.seed)
    report = _new_report(config)
    distributive_witness(report, config.dim)
    orthomodular_suite(report, [config.dim], config.trials, rng)
    additivity_suite(report, [config.dim], max(1, config.trials // 10), rng)
    return report


# quantize


def gram_oracle(report: SuiteReport, config: RunConfig, k_values: Sequence[int]):
    worst = 0.0
    rows = []
    for k in k_values:
        space = build_sections(k, geometry_for(config, k))
        closed = np.array(
            [
                config.volume * math.factorial(a) * math.factorial(k - a) / math.factorial(k + 1)
                for a in range(k + 1)
            ]
        )
        # diagonal entrywise, off-diagonal against the largest norm
        diagonal = np.abs(np.diag(space.gram).real - closed) / closed
        off = np.abs(space.gram - np.diag(np.diag(space.gram))) / np.max(closed)
        relative = float(max(np.max(diagonal), np.max(off)))
        worst = max(worst, relative)
        rows.append((k, space.dim, relative))
    report.check(
        "quantize.gram_oracle",
        worst <= GRAM_TOL,
        worst,
        GRAM_TOL,
        f"k <= {max(k_values)} against vol a! b! / (k+1)!",
    )
    report.add_table("gram", ("k", "dim", "relative_error"), rows)


def orthoalgebra_suite(report: SuiteReport, action: GroupAction, hardy: HardySpace, atomic: bool = False):
    components = decompose(action, hardy, atomic=atomic)
    result = verify_orthoalgebra([c.subspace for c in components])
    name = f"quantize.orthoalgebra.{action.kind}" + (".atomic" if atomic else "")
    report.check(
        name,
        result.passed and result.joined_dim == hardy.dim,
        result.worst("orthogonality"),
        EQUALITY_TOL,
        f"{result.components} components, dims sum to {result.total_dim} of {hardy.dim}",
    )
    report.data[name] = {
        "components": [c.to_dict() for c in components],
        "report": result.to_dict(),
    }
    return components


def selection_rule_suite(report: SuiteReport, k_max: int):
    torus = GroupAction.torus()
    mismatches = []
    for k in range(k_max + 1):
        space = build_sections(k)
        for nu in range(-k - 2, k + 3):
            # torus weight of z0^a z1^(k-a) is k - 2a
            expected = sum(1 for a in range(k + 1) if k - 2 * a == nu)
            if isotype(torus, nu, k, space).dim != expected:
                mismatches.append((nu, k))
    report.check(
        "quantize.selection_rule",
        not mismatches,
        float(len(mismatches)),
        0.0,
        f"all (nu, k) with k <= {k_max}",
    )


def szego_suite(report: SuiteReport, config: RunConfig, k_values: Sequence[int], rng: np.random.Generator):
    heights, phis = random_sphere_samples(20, rng)
    points = points_from_sphere(heights, phis) * random_rescaling(20, rng)[:, None]
    worst_diagonal = 0.0
    worst_integral = 0.0
    for k in k_values:
        geometry = geometry_for(config, k)
        kernel = szego_diagonal(k, points, geometry)
        worst_diagonal = max(worst_diagonal, kernel.max_deviation / kernel.expected)
        worst_integral = max(worst_integral, abs(szego_integral(k, geometry) - (k + 1)))
    report.check("quantize.szego_diagonal", worst_diagonal <= SZEGO_TOL, worst_diagonal, SZEGO_TOL)
    report.check("quantize.szego_integral", worst_integral <= SZEGO_TOL, worst_integral, SZEGO_TOL)


def probability_suite(report: SuiteReport, hardy: HardySpace, components):
    state = DensityOperator.maximally_mixed(hardy.ambient)
    reports = [
        probability_report(state, c.subspace, f"{c.action}:{c.nu_g}:{c.nu_t}") for c in components
    ]
    total = sum(r.value for r in reports)
    report.check(
        "gleason.normalized_isotypes",
        abs(total - 1) <= ADDITIVITY_TOL,
        abs(total - 1),
        ADDITIVITY_TOL,
        "maximally mixed state on the truncation",
    )
    report.add_table("probabilities", PROBABILITY_CSV_HEADER, [r.to_row() for r in reports])


def quantize(config: RunConfig) -> SuiteReport:
    rng = np.random.default_rng(config.seed)
    report = _new_report(config)
    action = GroupAction(config.action, config.radius)
    hardy = HardySpace(config.max_k, 0, config.volume)
    components = orthoalgebra_suite(report, action, hardy)
    if action.kind == "su2":
        components = orthoalgebra_suite(report, action, hardy, atomic=True)
    report.add_table(
        "components",
        ("action", "nu_g", "nu_t", "dim", "rep_dimension"),
        [(c.action, c.nu_g, c.nu_t, c.dim, c.rep_dimension) for c in components],
    )
    probability_suite(report, hardy, components)
    gram_oracle(report, config, range(config.max_k + 1))
    selection_rule_suite(report, config.max_k)
    szego_suite(report, config, range(min(config.max_k, 40) + 1), rng)
    return report


# toeplitz


def spectrum_oracle(report: SuiteReport, config: RunConfig, k_values: Sequence[int]):
    worst = 0.0
    for k in k_values:
        operator = toeplitz(height(), k, geometry_for(config, k))
        computed = np.linalg.eigvalsh(operator.matrix)
        expected = np.array([(2 * a - k) / (k + 2) for a in range(k + 1)])
        worst = max(worst, float(np.max(np.abs(computed - expected))))
    report.check(
        "toeplitz.height_spectrum",
        worst <= SPECTRUM_TOL,
        worst,
        SPECTRUM_TOL,
        f"(2a - k)/(k + 2) for k <= {max(k_values)}",
    )


def toeplitz_suite(config: RunConfig) -> SuiteReport:
    rng = np.random.default_rng(config.seed)
    report = _new_report(config)
    k = config.k
    geometry = geometry_for(config, k)
    symbol = symbol_for(config)

    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", QuadratureWarning)
        operator = toeplitz(symbol, k, geometry)
    report.check("toeplitz.exact_quadrature", not caught, detail=f"symbol {symbol.name}")

    defect = operator.hermitian_defect()
    report.check("toeplitz.hermitian", defect <= HERMITIAN_TOL, defect, HERMITIAN_TOL)

    trace = float(np.trace(operator.matrix).real)
    expected = (k + 1) * symbol_mean(symbol, geometry)
    identity = abs(trace - expected) / (k + 1)
    report.check("toeplitz.trace_identity", identity <= IDENTITY_TOL, identity, IDENTITY_TOL)

    if config.symbol == "height":
        spectrum_oracle(report, config, [k])

    space = build_sections(k, geometry)
    heights, phis = random_sphere_samples(5, rng)
    points = points_from_sphere(heights, phis)
    scales = random_rescaling(5, rng)
    worst_imag, worst_rescale = 0.0, 0.0
    for point, scale in zip(points, scales):
        value = berezin_symbol(operator, point, space)
        rescaled = berezin_symbol(operator, point * scale, space)
        worst_imag = max(worst_imag, abs(value.imag))
        worst_rescale = max(worst_rescale, abs(value - rescaled))
    report.check("toeplitz.berezin_real", worst_imag <= HERMITIAN_TOL, worst_imag, HERMITIAN_TOL)
    report.check(
        "toeplitz.berezin_representative", worst_rescale <= HERMITIAN_TOL, worst_rescale, HERMITIAN_TOL
    )

    if k >= 1:
        deviation = tuynman_deviation(symbol, k, geometry)
        lap = laplace_beltrami(symbol, geometry.sphere_radius)
        nodes = geometry.rule.nodes(geometry.volume_normalization)
        bound = float(np.max(np.abs(lap(nodes.heights, nodes.phis)))) / (2 * k)
        report.check(
            "toeplitz.tuynman_bound",
            deviation <= bound * (1 + 1e-9) + 1e-12,
            deviation,
            detail=f"bound sup|lap f|/2k = {bound:.6g}",
        )

    resolution = spectral_decompose(operator)
    report.data["operator"] = operator.to_dict()
    report.data["spectrum"] = resolution.to_dict()
    eigenvalues = np.linalg.eigvalsh(operator.matrix)
    report.add_table("spectrum", ("index", "eigenvalue"), list(enumerate(eigenvalues)))
    return report


# povm


def refinement_suite(report: SuiteReport, symbol: Symbol, partition: RegionPartition, k: int, geometry):
    target = toeplitz(symbol, k, geometry)
    rows = []
    for _ in range(REFINEMENTS + 1):
        blocks = povm_blocks(partition, k, geometry)
        distance = reconstruction_error(riemann_reconstruct(symbol, partition, k, geometry, blocks), target)
        rows.append((partition.size, distance))
        partition = partition.refine()
    distances = [d for _, d in rows]
    decreasing = all(b < a for a, b in zip(distances, distances[1:]))
    report.check(
        "povm.riemann_refinement",
        decreasing,
        distances[-1],
        detail=f"strictly decreasing over {REFINEMENTS} dyadic refinements",
    )
    report.add_table("riemann", ("bands", "distance"), rows)


def povm_suite(config: RunConfig) -> SuiteReport:
    report = _new_report(config)
    k = config.k
    geometry = geometry_for(config, k)
    partition = RegionPartition.uniform(config.bands)
    blocks = povm_blocks(partition, k, geometry)
    smallest = min_effect_eigenvalue(blocks)
    report.check("povm.positive", smallest >= -PSD_TOL, smallest, PSD_TOL)
    completeness = povm_completeness(blocks)
    report.check("povm.completeness", completeness <= COMPLETENESS_TOL, completeness, COMPLETENESS_TOL)

    rows = describe_blocks(blocks, partition)
    report.add_table(
        "effects",
        ("lower", "upper", "trace", "min_eigenvalue", "max_eigenvalue"),
        [tuple(row.values()) for row in rows],
    )
    report.data["effects"] = rows
    if _is_zonal(config):
        refinement_suite(report, symbol_for(config), partition, k, geometry)
    return report


# asymptotics


def _growth_check(report: SuiteReport, name: str, run: AsymptoticRun, expected: float, tol: float):
    if run.fitted_exponent is None:
        report.check(name, False, detail=f"no fit: {run.flagged}")
        return
    report.check(
        name,
        abs(run.fitted_exponent - expected) <= tol,
        run.fitted_exponent,
        tol,
        f"expected {expected:g}",
    )


def _add_run(report: SuiteReport, name: str, run: AsymptoticRun):
    report.data[name] = run.to_dict()
    report.add_table(name, ("k", "dim", "trace", "prediction", "residual"), run.rows())


def probability_growth(report: SuiteReport, config: RunConfig, action: GroupAction, nu_g: int, k_values):
    run = probability_sequence(
        action,
        nu_g,
        k_values,
        normalized=config.normalized,
        volume=config.volume,
        workers=config.workers,
    )
    _add_run(report, "probability", run)
    occurs = action.kind == "circle" or any(abs(nu_g) <= k and (k - nu_g) % 2 == 0 for k in k_values)
    if not occurs:
        report.check(
            "asymptotics.probability_vanishes",
            all(v == 0 for v in run.values),
            detail=f"nu_g={nu_g} never occurs",
        )
        return
    expected = 1.0 if action.kind == "circle" else 0.0
    _growth_check(report, "asymptotics.probability_exponent", run, expected, GROWTH_TOL)


def trace_growth(report: SuiteReport, name: str, symbol: Symbol, k_values, geometry, workers: int):
    run = trace_sequence(symbol, k_values, geometry=geometry, workers=workers)
    _add_run(report, name, run)
    defect = run.max_identity_defect or 0.0
    report.check(f"asymptotics.{name}_identity", defect <= IDENTITY_TOL, defect, IDENTITY_TOL)
    mean = symbol_mean(symbol, geometry)
    if mean > IDENTITY_TOL:
        _growth_check(report, f"asymptotics.{name}_exponent", run, 1.0, GROWTH_TOL)
    elif abs(mean) <= IDENTITY_TOL:
        largest = max(abs(v) / (k + 1) for k, v in zip(run.k_values, run.values))
        report.check(
            f"asymptotics.{name}_vanishes",
            largest <= IDENTITY_TOL,
            largest,
            IDENTITY_TOL,
            "f has mean zero",
        )
    else:
        logger.info("%s has negative mean %.3e, no growth exponent fitted", symbol.name, mean)


def tuynman_growth(report: SuiteReport, symbol: Symbol, k_values, geometry, workers: int):
    """The per-k bound is the invariant; the 1/k exponent is only asserted for the height function."""
    run = tuynman_sweep(symbol, k_values, geometry=geometry, workers=workers)
    _add_run(report, "tuynman", run)
    excess = max(v - r for v, r in zip(run.values, run.references))
    report.check(
        "asymptotics.tuynman_bound",
        all(v <= r * (1 + 1e-9) + 1e-12 for v, r in zip(run.values, run.references)),
        excess,
        detail="k |Q_k/i - T_k| <= sup |Laplacian f| / 2",
    )
    if symbol.name != height().name:
        return
    _growth_check(report, "asymptotics.tuynman_exponent", run, -1.0, TUYNMAN_EXPONENT_TOL)


def asymptotics(config: RunConfig) -> SuiteReport:
    report = _new_report(config)
    k_values = config.k_values()
    action = GroupAction(config.action, config.radius)
    symbol = symbol_for(config)
    geometry = geometry_for(config, k_values[0])
    probability_growth(report, config, action, config.nu_g, k_values)
    trace_growth(report, "trace", symbol, k_values, geometry, config.workers)
    tuynman_growth(report, symbol, k_values, geometry, config.workers)
    return report


# full-suite


def full_suite(config: RunConfig) -> SuiteReport:
    """Lattice laws in dims 2-16, quantization oracles up to k=50 and semiclassical sweeps over k=10..100."""
    rng = np.random.default_rng(config.seed)
    report = _new_report(config)

    distributive_witness(report, 2)
    orthomodular_suite(report, range(2, 9), config.trials, rng)
    additivity_suite(report, range(3, 17), 100, rng)

    hardy = HardySpace(config.max_k, 0, config.volume)
    for kind in ("circle", "torus", "su2"):
        orthoalgebra_suite(report, GroupAction(kind, config.radius), hardy)
    atomic = orthoalgebra_suite(report, GroupAction.su2(config.radius), hardy, atomic=True)
    probability_suite(report, hardy, atomic)
    gram_oracle(report, config, range(51))
    selection_rule_suite(report, 50)
    szego_suite(report, config, range(41), rng)

    spectrum_oracle(report, config, range(41))
    geometry = geometry_for(config, 10)
    blocks = povm_blocks(RegionPartition.uniform(10), 10, geometry)
    smallest = min_effect_eigenvalue(blocks)
    report.check("povm.positive", smallest >= -PSD_TOL, smallest, PSD_TOL)
    completeness = povm_completeness(blocks)
    report.check("povm.completeness", completeness <= COMPLETENESS_TOL, completeness, COMPLETENESS_TOL)
    refinement_suite(report, height(), RegionPartition.uniform(10), 10, geometry)

    k_values = list(range(10, 101, 10))
    template = geometry_for(config, 10)
    identity = 0.0
    for symbol in (constant(1.0), height(), raised_height()):
        for k in range(101):
            geometry_k = template.with_k(k)
            trace = float(np.trace(toeplitz(symbol, k, geometry_k).matrix).real)
            identity = max(identity, abs(trace - (k + 1) * symbol_mean(symbol, geometry_k)) / (k + 1))
    report.check(
        "asymptotics.trace_identity", identity <= IDENTITY_TOL, identity, IDENTITY_TOL, "f in {1, h, (1+h)/2}, k <= 100"
    )
    probability_growth(report, config, GroupAction.circle(), 0, k_values)
    trace_growth(report, "trace", raised_height(), k_values, template, config.workers)
    tuynman_growth(report, height(), k_values, template, config.workers)
    at_ten = tuynman_deviation(height(), 10, template.with_k(10))
    report.check("asymptotics.tuynman_k10", abs(at_ten - 1 / 12) <= 1e-9, abs(at_ten - 1 / 12), 1e-9)
    return report


SUITES: dict[str, Callable[[RunConfig], SuiteReport]] = {
    "lattice-check": lattice_check,
    "quantize": quantize,
    "toeplitz": toeplitz_suite,
    "povm": povm_suite,
    "asymptotics": asymptotics,
    "full-suite": full_suite,
}


def run_suite(config: RunConfig) -> SuiteReport:
    report = SUITES[config.command](config)
    logger.info("%s: %d checks, %d failed", config.command, len(report.checks), len(report.failures))
    return report
