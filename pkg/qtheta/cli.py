import argparse
import csv
import json
import logging
import math
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable

import numpy as np

from qtheta import codec
from qtheta.config import Settings, get_settings
from qtheta.errors import ConfigError, DimensionError, QThetaError, ScenarioError
from qtheta.finite_ext import (
    Cochain,
    ExtendedLattice,
    basis_rank_check,
    d0_multiplier,
    kernel_d0,
    solve_cochain,
    theta_ab,
    theta_ab_factorized,
    validate_cochain,
    verify_theta_ab_invariance,
)
from qtheta.gaussian_models import (
    FockSum,
    GaussianPacket,
    PacketSum,
    evaluate,
    model2_act,
    quadrature_inner,
)
from qtheta.heisenberg import (
    TorusHeisenbergElement,
    VectorHeisenbergElement,
    commutator_torus,
    commutator_vector,
    compose_vector,
    epsilon,
    epsilon_torus,
    gamma_basis,
    inverse_vector,
    symplectic_cocycle,
)
from qtheta.kaehler import KaehlerStructure, SiegelPoint, embed
from qtheta.lattices import LatticeEmbedding, covolume, dual_lattice, gram, morita_dual_form, pairing_defect
from qtheta.numerics import make_rng, sample_points
from qtheta.theta_engine import (
    CheckResult,
    ClassicalThetaParams,
    apply_to_vacuum,
    associativity_check,
    classical_equations_check,
    classical_modular_check,
    classical_theta,
    coordinate_norm,
    eta_closed_form,
    eta_identity_residual,
    eta_solve,
    model2_unitarity,
    poisson_check,
    positivity_check,
    quantum_theta,
    reconstruct_from_multiplier,
    rieffel_product_left,
    rieffel_tail_bound,
    self_fourier_check,
    theta_multiplier,
    vacuum_identity_check,
    verify_multiplier_invariance,
)
from qtheta.torus_algebra import (
    QuantizationForm,
    TorusCharacterAction,
    TorusElement,
    max_coefficient_difference,
    multiply,
    section_indices,
)

logger = logging.getLogger("qtheta.cli")

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_USAGE = 2


# ---------------------------------------------------------------------------
#  Scenarios
# ---------------------------------------------------------------------------

@dataclass
class CheckSpec:
    name: str
    tolerance: float
    params: dict[str, Any] = field(default_factory=dict)


@dataclass
class Scenario:
    name: str
    siegel: SiegelPoint
    checks: list[CheckSpec]
    seed: int | None = None
    lattice: LatticeEmbedding | None = None
    extended: ExtendedLattice | None = None
    cochain: Cochain | None = None


@dataclass
class RunContext:
    scenario: Scenario
    settings: Settings
    seed: int
    _kaehler: KaehlerStructure | None = None

    @property
    def kaehler(self) -> KaehlerStructure:
        if self._kaehler is None:
            self._kaehler = KaehlerStructure.from_siegel(self.scenario.siegel)
        return self._kaehler

    @property
    def lattice(self) -> LatticeEmbedding:
        if self.scenario.lattice is None:
            raise ScenarioError("this check needs a 'lattice'")
        return self.scenario.lattice

    @property
    def tolerance(self) -> float:
        return self.settings.tail_tolerance

    def rng(self, index: int) -> np.random.Generator:
        return make_rng(self.seed + 7919 * index)


def load_scenario(path: str | Path) -> Scenario:
    try:
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise ScenarioError(f"cannot read scenario {path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"malformed JSON in {path}: {exc}") from None
    return parse_scenario(raw, default_name=Path(path).stem)


def parse_scenario(raw: Any, default_name: str = "scenario") -> Scenario:
    if not isinstance(raw, dict):
        raise ScenarioError("scenario must be a JSON object")
    version = raw.get("schema_version", 1)
    if version != 1:
        raise ScenarioError(f"unsupported schema_version {version!r}")
    if "siegel" not in raw:
        raise ScenarioError("scenario needs a 'siegel' point")

    lattice = codec.load_lattice(raw["lattice"]) if "lattice" in raw else None
    extended = codec.load_extended_lattice(raw["extended_lattice"]) if "extended_lattice" in raw else None
    cochain = codec.load_cochain(raw["cochain"], extended) if "cochain" in raw else None
    seed = raw.get("seed")
    if seed is not None and (isinstance(seed, bool) or not isinstance(seed, int)):
        raise ScenarioError("seed must be an integer")

    checks = []
    for item in raw.get("checks", []):
        if isinstance(item, str):
            item = {"check": item}
        if not isinstance(item, dict) or "check" not in item:
            raise ScenarioError(f"check entries need a 'check' name, got {item!r}")
        name = item["check"]
        if name not in CHECKS:
            raise ScenarioError(f"unknown check {name!r}; known checks: {', '.join(sorted(CHECKS))}")
        entry = CHECKS[name]
        tolerance = item.get("tolerance", entry.tolerance)
        if isinstance(tolerance, bool) or not isinstance(tolerance, (int, float)) or tolerance <= 0:
            raise ScenarioError(f"tolerance of {name!r} must be a positive number")
        if entry.needs == "lattice" and lattice is None:
            raise ScenarioError(f"check {name!r} needs a 'lattice'")
        if entry.needs == "extended" and extended is None:
            raise ScenarioError(f"check {name!r} needs an 'extended_lattice'")
        params = {k: v for k, v in item.items() if k not in ("check", "tolerance")}
        checks.append(CheckSpec(name, float(tolerance), params))
    if not checks:
        raise ScenarioError("scenario lists no checks")

    return Scenario(
        name=str(raw.get("name", default_name)),
        siegel=codec.load_siegel(raw["siegel"]),
        checks=checks,
        seed=seed,
        lattice=lattice,
        extended=extended,
        cochain=cochain,
    )


# ---------------------------------------------------------------------------
#  Checks
# ---------------------------------------------------------------------------

def _points(params: dict, key: str, default) -> np.ndarray:
    value = params.get(key, default)
    try:
        return np.atleast_2d(np.asarray(value, dtype=float))
    except (TypeError, ValueError):
        raise ScenarioError(f"{key} must be a list of points") from None


def _count(ctx: RunContext, params: dict, key: str = "count", default: int | None = None) -> int:
    value = params.get(key, ctx.settings.sample_points if default is None else default)
    if isinstance(value, bool) or not isinstance(value, int) or value < 1:
        raise ScenarioError(f"{key} must be a positive integer")
    return value


def _radius(params: dict, key: str = "radius", default: float | None = None) -> float | None:
    value = params.get(key, default)
    if value is None and default is None:
        return None
    if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value) or value <= 0:
        raise ScenarioError(f"{key} must be a positive number")
    return float(value)


def _theta_vector(ctx: RunContext) -> PacketSum:
    return PacketSum.theta_vector(ctx.scenario.siegel)


def _check_rieffel_theta(ctx: RunContext, params: dict, index: int) -> CheckResult:
    """Coefficients of _D<f_T, f_T> against prefactor * Theta_D on |h| <= radius."""
    k, D = ctx.kaehler, ctx.lattice
    theta = quantum_theta(k, D, _radius(params, "truncation"), ctx.tolerance)
    f_t = _theta_vector(ctx)
    product = rieffel_product_left(f_t, f_t, D, theta.radius)
    keys = section_indices(D.rank, _radius(params, default=5.0))
    residual = max_coefficient_difference(product, theta.element.scale(theta.prefactor), keys)
    if params.get("quadrature") and k.N <= 2:
        oracle = quadrature_inner(f_t, f_t, ctx.settings.quad_half_width, ctx.settings.quad_points)
        residual = max(residual, abs(product.coefficient((0,) * D.rank) - oracle))
    tail = rieffel_tail_bound(f_t, f_t, D, theta.radius) + theta.prefactor * theta.tail_bound
    return CheckResult(residual, tail)


def _check_multiplier_invariance(ctx: RunContext, params: dict, index: int) -> CheckResult:
    theta = quantum_theta(ctx.kaehler, ctx.lattice, _radius(params), ctx.tolerance)
    rank = ctx.lattice.rank
    generators = _points(params, "g", np.eye(rank, dtype=int).tolist())
    if not np.array_equal(generators, np.round(generators)):
        raise ScenarioError("g must be a list of integer vectors")
    residual = 0.0
    for g in generators.astype(int):
        residual = max(residual, verify_multiplier_invariance(theta, g.tolist()).residual)
    return CheckResult(residual, theta.tail_bound)


def _check_poisson(ctx: RunContext, params: dict, index: int) -> CheckResult:
    dim = 2 * ctx.kaehler.N
    default = sample_points(ctx.rng(index), _count(ctx, params), dim).tolist()
    return poisson_check(ctx.kaehler, ctx.lattice, _points(params, "x", default), _radius(params), tolerance=ctx.tolerance)


def _check_vacuum_identity(ctx: RunContext, params: dict, index: int) -> CheckResult:
    dim = 2 * ctx.kaehler.N
    default = sample_points(ctx.rng(index), _count(ctx, params), dim).tolist()
    return vacuum_identity_check(ctx.kaehler, ctx.lattice, _points(params, "x", default), _radius(params), tolerance=ctx.tolerance)


def _check_associativity(ctx: RunContext, params: dict, index: int) -> CheckResult:
    f_t = _theta_vector(ctx)
    points = sample_points(ctx.rng(index), _count(ctx, params), ctx.kaehler.N)
    return associativity_check(f_t, f_t, f_t, ctx.lattice, points, _radius(params), tolerance=ctx.tolerance)


def _check_self_fourier(ctx: RunContext, params: dict, index: int) -> CheckResult:
    k = ctx.kaehler
    rng = ctx.rng(index)
    x = _points(params, "x", rng.uniform(-1.0, 1.0, size=2 * k.N).tolist())[0]
    g_samples = _points(params, "g", sample_points(rng, _count(ctx, params), 2 * k.N).tolist())
    return self_fourier_check(k, x, g_samples, ctx.settings.quad_half_width, ctx.settings.quad_points)


def _check_eta_identities(ctx: RunContext, params: dict, index: int) -> CheckResult:
    k = ctx.kaehler
    rng = ctx.rng(index)
    dim = 2 * k.N
    residual = 0.0
    for _ in range(_count(ctx, params, default=20)):
        x, g = rng.uniform(-1.0, 1.0, size=(2, dim))
        h_samples = rng.uniform(-1.0, 1.0, size=(3, dim))
        residual = max(residual, eta_identity_residual(k, x, g, h_samples).residual)
        residual = max(residual, float(np.max(np.abs(eta_solve(k, x, g) - eta_closed_form(k, x, g)))))
    return CheckResult(residual, 0.0)


def _check_classical_theta(ctx: RunContext, params: dict, index: int) -> CheckResult:
    omega = ctx.scenario.siegel
    rng = ctx.rng(index)
    residual = 0.0
    tail = 0.0
    for _ in range(_count(ctx, params)):
        z = rng.uniform(-1.0, 1.0, size=omega.N) + 1j * rng.uniform(-0.5, 0.5, size=omega.N)
        for m in np.eye(omega.N, dtype=int):
            result = classical_equations_check(omega, z, m)
            residual, tail = max(residual, result.residual), max(tail, result.tail_bound)
        result = classical_modular_check(omega, z)
        residual, tail = max(residual, result.residual), max(tail, result.tail_bound)
    return CheckResult(residual, tail)


def _random_torus_element(rng: np.random.Generator, form: QuantizationForm, terms: int = 3) -> TorusElement:
    values = {}
    for _ in range(terms):
        h = tuple(int(v) for v in rng.integers(-2, 3, size=form.rank))
        values[h] = complex(rng.normal(), rng.normal())
    return TorusElement(form, values)


def _random_torus_heisenberg(rng: np.random.Generator, form: QuantizationForm) -> TorusHeisenbergElement:
    c = complex(np.exp(1j * rng.uniform(0, 2 * math.pi)))
    w = rng.normal(size=form.rank) * 0.3 + 1j * rng.normal(size=form.rank)
    g = tuple(int(v) for v in rng.integers(-2, 3, size=form.rank))
    return TorusHeisenbergElement(form, c, TorusCharacterAction(w), g)


def _check_algebra_laws(ctx: RunContext, params: dict, index: int) -> CheckResult:
    """Cocycle identity, associativity of the torus product and commutator consistency."""
    D = ctx.lattice
    psi = symplectic_cocycle(D.space)
    form = QuantizationForm(gram(D).matrix)
    rng = ctx.rng(index)
    residual = 0.0
    for _ in range(_count(ctx, params, default=100)):
        x, y, z = rng.uniform(-2.0, 2.0, size=(3, D.space.dim))
        residual = max(residual, abs(psi(x, y) * psi(x + y, z) - psi(x, y + z) * psi(y, z)))

        a = VectorHeisenbergElement.of(np.exp(1j * rng.uniform(0, 2 * math.pi)), x)
        b = VectorHeisenbergElement.of(np.exp(1j * rng.uniform(0, 2 * math.pi)), y)
        residual = max(residual, abs(commutator_vector(a, b, psi).lam - epsilon(psi, x, y)))
        residual = max(residual, abs(compose_vector(a, inverse_vector(a, psi), psi).lam - 1.0))

        p, q, r = (_random_torus_element(rng, form) for _ in range(3))
        residual = max(residual, max_coefficient_difference(multiply(multiply(p, q), r), multiply(p, multiply(q, r))))

        s, t = _random_torus_heisenberg(rng, form), _random_torus_heisenberg(rng, form)
        comm = commutator_torus(s, t)
        residual = max(residual, abs(comm.c - epsilon_torus(s, t)), float(np.max(np.abs(comm.x.w))))
    return CheckResult(residual, 0.0)


def _random_packets(rng: np.random.Generator, siegel: SiegelPoint, count: int) -> PacketSum:
    packets = tuple(
        GaussianPacket(complex(rng.normal(), rng.normal()),
                       rng.uniform(-1.0, 1.0, size=siegel.N),
                       rng.uniform(-1.0, 1.0, size=siegel.N))
        for _ in range(count)
    )
    return PacketSum(siegel, packets)


def _check_positivity(ctx: RunContext, params: dict, index: int) -> CheckResult:
    rng = ctx.rng(index)
    section_radius = _radius(params, "section_radius", 1.5)
    residual = 0.0
    tail = 0.0
    for _ in range(_count(ctx, params)):
        phi = _random_packets(rng, ctx.scenario.siegel, _count(ctx, params, "packets", 2))
        result = positivity_check(phi, ctx.lattice, section_radius, _radius(params), tolerance=ctx.tolerance)
        residual, tail = max(residual, result.residual), max(tail, result.tail_bound)
    return CheckResult(residual, tail)


def _check_fock_unitarity(ctx: RunContext, params: dict, index: int) -> CheckResult:
    k = ctx.kaehler
    if k.N != 1:
        raise DimensionError("fock_unitarity runs for N = 1 only")
    rng = ctx.rng(index)
    vacuum = FockSum.vacuum(k)
    other = model2_act(VectorHeisenbergElement.translation(rng.uniform(-1.0, 1.0, size=2)), vacuum, k)
    residual = 0.0
    for _ in range(_count(ctx, params)):
        el = VectorHeisenbergElement.of(np.exp(1j * rng.uniform(0, 2 * math.pi)), rng.uniform(-1.0, 1.0, size=2))
        result = model2_unitarity(k, vacuum, other, el, ctx.settings.quad_half_width, ctx.settings.quad_points)
        residual = max(residual, result.residual)
    return CheckResult(residual, 0.0)


def _check_dual_gram(ctx: RunContext, params: dict, index: int) -> CheckResult:
    """Exact gram(D!) = -gram(D)^-1 when rational, plus the pairing and covolume identities."""
    D = ctx.lattice
    dual = dual_lattice(D)
    expected = morita_dual_form(gram(D))
    actual = gram(dual)
    if expected.exact is not None and actual.exact is not None:
        residual = 0.0 if expected.exact == actual.exact else float(np.max(np.abs(expected.matrix - actual.matrix)))
    else:
        residual = float(np.max(np.abs(expected.matrix - actual.matrix)))
    residual = max(residual, pairing_defect(D, dual), abs(covolume(D) * covolume(dual) - 1.0))
    return CheckResult(residual, 0.0)


def _check_finite_theta(ctx: RunContext, params: dict, index: int) -> CheckResult:
    """Cochain validity, D0-invariance of every Theta_{a,b}, the factorized path and dimension counts."""
    D = ctx.scenario.extended
    k = ctx.kaehler
    cochain = ctx.scenario.cochain or solve_cochain(D)
    kernel = kernel_d0(D)
    form = validate_cochain(D, cochain, kernel)
    radius = _radius(params)

    residual = 0.0
    for a in D.group.elements():
        for b in D.group.elements():
            theta = theta_ab(D, cochain, k, a, b, radius, form, ctx.tolerance)
            for j in range(kernel.basis.shape[1]):
                result = verify_theta_ab_invariance(theta, D, k, kernel.basis[:, j])
                residual = max(residual, result.residual)
            factored = theta_ab_factorized(D, cochain, k, a, b, radius, form, ctx.tolerance)
            residual = max(residual, max_coefficient_difference(theta.scale(k.prefactor), factored))

    rank = basis_rank_check(D, cochain, k, radius)
    gamma = gamma_basis(d0_multiplier(D, cochain, k, form), _radius(params, "gamma_radius", 3.0))
    residual = max(residual, float(abs(rank - kernel.index)), float(abs(len(gamma) - kernel.index)))
    return CheckResult(residual, 0.0)


def _check_reconstruct(ctx: RunContext, params: dict, index: int) -> CheckResult:
    k, D = ctx.kaehler, ctx.lattice
    theta = quantum_theta(k, D, _radius(params), ctx.tolerance)
    rebuilt = reconstruct_from_multiplier(theta_multiplier(theta), _radius(params), tolerance=ctx.tolerance)
    drift = float(np.max(np.abs(coordinate_norm(rebuilt.kaehler, rebuilt.lattice) - coordinate_norm(k, D))))
    return CheckResult(max(rebuilt.generator_residual, drift), theta.tail_bound + rebuilt.theta.tail_bound)


@dataclass(frozen=True)
class CheckEntry:
    run: Callable[[RunContext, dict, int], CheckResult]
    tolerance: float
    needs: str = "lattice"


CHECKS: dict[str, CheckEntry] = {
    "rieffel_theta": CheckEntry(_check_rieffel_theta, 1e-10),
    "multiplier_invariance": CheckEntry(_check_multiplier_invariance, 1e-10),
    "poisson": CheckEntry(_check_poisson, 1e-8),
    "associativity": CheckEntry(_check_associativity, 1e-6),
    "self_fourier": CheckEntry(_check_self_fourier, 1e-6, needs="siegel"),
    "eta_identities": CheckEntry(_check_eta_identities, 1e-10, needs="siegel"),
    "classical_theta": CheckEntry(_check_classical_theta, 1e-10, needs="siegel"),
    "algebra_laws": CheckEntry(_check_algebra_laws, 1e-12),
    "positivity": CheckEntry(_check_positivity, 1e-8),
    "fock_unitarity": CheckEntry(_check_fock_unitarity, 1e-6, needs="siegel"),
    "vacuum_identity": CheckEntry(_check_vacuum_identity, 1e-6),
    "dual_gram": CheckEntry(_check_dual_gram, 1e-12),
    "finite_theta": CheckEntry(_check_finite_theta, 1e-10, needs="extended"),
    "reconstruct": CheckEntry(_check_reconstruct, 1e-8),
}


# ---------------------------------------------------------------------------
#  Running and reporting
# ---------------------------------------------------------------------------

def run_scenario(scenario: Scenario, settings: Settings, seed: int | None = None,
                 timings: bool = False) -> dict:
    seed = seed if seed is not None else (scenario.seed if scenario.seed is not None else settings.seed)
    ctx = RunContext(scenario, settings, seed)
    rows = []
    for index, spec in enumerate(scenario.checks):
        started = time.perf_counter()
        row: dict[str, Any] = {"check": spec.name, "params": spec.params, "tolerance": spec.tolerance}
        try:
            result = CHECKS[spec.name].run(ctx, spec.params, index)
        except ScenarioError:
            raise
        except QThetaError as exc:
            logger.warning("check %s raised: %s", spec.name, exc)
            row.update({"residual": None, "tail_bound": None, "pass": False, "error": str(exc)})
        else:
            residual = float(result.residual)
            tail = float(result.tail_bound)
            passed = residual <= spec.tolerance + tail
            if not passed:
                logger.warning("check %s failed: residual %.3e > %.1e + %.3e", spec.name, residual, spec.tolerance, tail)
            row.update({"residual": residual, "tail_bound": tail, "pass": passed})
        elapsed = time.perf_counter() - started
        logger.info("check %s done in %.3f s", spec.name, elapsed)
        if timings:
            row["wall_time"] = elapsed
        rows.append(row)
    return {
        "schema_version": settings.schema_version,
        "scenario": scenario.name,
        "seed": seed,
        "checks": rows,
    }


def render_report(report: dict) -> str:
    return json.dumps(report, sort_keys=True, indent=2) + "\n"


def _cmd_verify(args: argparse.Namespace, settings: Settings) -> int:
    scenario = load_scenario(args.scenario)
    report = run_scenario(scenario, settings, seed=args.seed, timings=args.timings)
    text = render_report(report)
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return EXIT_OK if all(row["pass"] for row in report["checks"]) else EXIT_FAILED


# ---------------------------------------------------------------------------
#  Tables
# ---------------------------------------------------------------------------

def parse_matrix(text: str, what: str) -> list[list[float]]:
    """'a,b;c,d' -> [[a, b], [c, d]]."""
    try:
        return [[float(v) for v in row.split(",")] for row in text.split(";") if row.strip()]
    except ValueError:
        raise ScenarioError(f"{what} must look like 'a,b;c,d', got {text!r}") from None


def parse_points(text: str, what: str, complex_values: bool = False) -> list[list]:
    kind = complex if complex_values else float
    try:
        return [[kind(v.strip()) for v in row.split(",")] for row in text.split(";") if row.strip()]
    except ValueError:
        raise ScenarioError(f"{what} must be ';'-separated points, got {text!r}") from None


def _table_siegel(args: argparse.Namespace) -> SiegelPoint:
    imag = parse_matrix(args.t_im, "--t-im")
    real = parse_matrix(args.t_re, "--t-re") if args.t_re is not None else np.zeros((len(imag), len(imag))).tolist()
    return codec.load_siegel({"T_re": real, "T_im": imag})


def _table_lattice(args: argparse.Namespace, n: int) -> LatticeEmbedding:
    if args.generators is None:
        columns = np.eye(2 * n, dtype=int).tolist()
    else:
        columns = [[v.strip() for v in col.split(",")] for col in args.generators.split(";") if col.strip()]
    return codec.load_lattice({"N": n, "generators": columns})


def _split(z: complex) -> list[float]:
    return [z.real, z.imag]


def _table_theta_coeffs(args: argparse.Namespace) -> tuple[list[str], list[list]]:
    siegel = _table_siegel(args)
    D = _table_lattice(args, siegel.N)
    theta = quantum_theta(KaehlerStructure.from_siegel(siegel), D, args.radius)
    header = [f"h{i + 1}" for i in range(D.rank)] + ["re", "im"]
    rows = [list(h) + _split(theta.element.coefficient(h)) for h in theta.element.support]
    return header, rows


def _table_classical_theta(args: argparse.Namespace) -> tuple[list[str], list[list]]:
    siegel = _table_siegel(args)
    points = parse_points(args.z, "--z", complex_values=True)
    header = [f"z{i + 1}_{part}" for i in range(siegel.N) for part in ("re", "im")] + ["re", "im"]
    rows = []
    for z in points:
        value = classical_theta(ClassicalThetaParams(siegel, z), args.radius).value
        rows.append([part for v in z for part in _split(v)] + _split(value))
    return header, rows


def _table_vacuum_theta(args: argparse.Namespace) -> tuple[list[str], list[list]]:
    siegel = _table_siegel(args)
    k = KaehlerStructure.from_siegel(siegel)
    D = _table_lattice(args, siegel.N)
    points = parse_points(args.x, "--x") if args.x is not None else []
    header = [f"x{i + 1}" for i in range(2 * k.N)] + ["re", "im"]
    if not points:
        return header, []
    vacuum = apply_to_vacuum(quantum_theta(k, D, args.radius))
    values = evaluate(vacuum, embed(k, np.asarray(points, dtype=float)))
    return header, [list(x) + _split(complex(v)) for x, v in zip(points, values)]


TABLES = {
    "theta_coeffs": _table_theta_coeffs,
    "classical_theta": _table_classical_theta,
    "vacuum_theta": _table_vacuum_theta,
}


def _cmd_table(args: argparse.Namespace, settings: Settings) -> int:
    header, rows = TABLES[args.what](args)
    if args.json:
        sys.stdout.write(json.dumps([dict(zip(header, row)) for row in rows], indent=2) + "\n")
    else:
        writer = csv.writer(sys.stdout, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)
    return EXIT_OK


# ---------------------------------------------------------------------------
#  Entry point
# ---------------------------------------------------------------------------

TABLE_HELP = """columns:
  theta_coeffs     h1..hr, re, im   coefficients exp(-pi/2 H(h_, h_)) of Theta_D
  classical_theta  z1_re, z1_im, ..., re, im   theta(z, Omega) with Omega = T
  vacuum_theta     x1..x2N, re, im  (Theta_D . 1)(x_) in the Fock model
"""


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qtheta", description="Quantum theta function verification harness.")
    sub = parser.add_subparsers(dest="command", required=True)

    verify = sub.add_parser("verify", help="run the checks of a JSON scenario")
    verify.add_argument("scenario")
    verify.add_argument("--out", help="write the report here instead of stdout")
    verify.add_argument("--seed", type=int, help="override the scenario seed")
    verify.add_argument("--timings", action="store_true", help="include wall times in the report")

    table = sub.add_parser("table", help="print a table of values", epilog=TABLE_HELP,
                           formatter_class=argparse.RawDescriptionHelpFormatter)
    table.add_argument("what", choices=sorted(TABLES))
    fmt = table.add_mutually_exclusive_group()
    fmt.add_argument("--json", action="store_true")
    fmt.add_argument("--csv", action="store_true", help="default")
    table.add_argument("--t-re", help="Re T as 'a,b;c,d' (default 0)")
    table.add_argument("--t-im", default="1", help="Im T as 'a,b;c,d' (default 1)")
    table.add_argument("--generators", help="lattice generator columns as '1,0;0,1' (default Z^2N)")
    table.add_argument("--radius", type=float, help="truncation radius (default: certified tolerance)")
    table.add_argument("--z", default="", help="classical_theta grid, ';'-separated complex points")
    table.add_argument("--x", help="vacuum_theta points in R^2N, ';'-separated")
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK

    try:
        settings = get_settings()
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    logging.basicConfig(level=settings.log_level, format="%(asctime)s %(levelname)s %(message)s")

    try:
        if args.command == "verify":
            return _cmd_verify(args, settings)
        return _cmd_table(args, settings)
    except ScenarioError as exc:
        print(f"scenario error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except QThetaError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
