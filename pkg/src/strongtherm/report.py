"""Side-by-side comparison of every method at shared parameter points."""

from __future__ import annotations

import csv
import io
import itertools
import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

from . import oracle, strongcoupling, weakcoupling
from .errors import ConvergenceError, DomainError
from .models import OscillatorModel, ThermalPoint
from .strongcoupling import Mode
from .weakcoupling import Variant

SCHEMA_VERSION = 1
REL_EPS = 1e-300
METHODS = ("strong", "weak", "free", "oracle")
CSV_COLUMNS = ("beta", "omega", "lambda", "method", "mode", "lnZ", "Z", "F", "E", "flags")
PLOT_COLUMNS = ("beta", "omega", "lambda", "lnZ_strong", "lnZ_oracle")


@dataclass(frozen=True)
class CompareOptions:
    methods: Tuple[str, ...] = METHODS
    modes: Tuple[str, ...] = (Mode.PAPER.value, Mode.DERIVED.value)
    variants: Tuple[str, ...] = (Variant.AS_PRINTED.value, Variant.OMEGA_RESTORED.value)
    oracle_tol: float = 1e-10
    basis_size: Optional[int] = None
    basis_frequency: Optional[float] = None

    def __post_init__(self):
        if not self.methods:
            raise DomainError("at least one method is required")
        unknown = set(self.methods) - set(METHODS)
        if unknown:
            raise DomainError(f"unknown methods {sorted(unknown)}; choose from {METHODS}")
        # normalise aliases such as "paper" to the canonical names
        object.__setattr__(self, "modes", tuple(Mode.parse(m).value for m in self.modes))
        object.__setattr__(self, "variants", tuple(Variant.parse(v).value for v in self.variants))


@dataclass(frozen=True)
class MethodResult:
    method: str
    mode: str
    status: str  # "ok", "out_of_regime" or "failed"
    lnZ: Optional[float] = None
    Z: Optional[float] = None
    F: Optional[float] = None
    E: Optional[float] = None
    message: str = ""

    @property
    def key(self) -> str:
        return f"{self.method}:{self.mode}" if self.mode else self.method

    @property
    def ok(self) -> bool:
        return self.status == "ok"


@dataclass(frozen=True)
class PairMetric:
    a: str
    b: str
    quantity: str
    abs_diff: float
    rel_diff: float


@dataclass(frozen=True)
class ThermoReport:
    inputs: Dict[str, object]
    results: Tuple[MethodResult, ...]
    metrics: Tuple[PairMetric, ...]
    flags: Tuple[str, ...]
    mode_bridge: Optional[float] = None
    error: str = ""

    def result(self, key: str) -> Optional[MethodResult]:
        for r in self.results:
            if r.key == key:
                return r
        return None

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "ThermoReport":
        return cls(
            inputs=dict(d["inputs"]),
            results=tuple(MethodResult(**r) for r in d["results"]),
            metrics=tuple(PairMetric(**m) for m in d["metrics"]),
            flags=tuple(d["flags"]),
            mode_bridge=d.get("mode_bridge"),
            error=d.get("error", ""),
        )


def relative_difference(a: float, b: float) -> float:
    return abs(a - b) / max(abs(a), abs(b), REL_EPS)


def regime_label(model: OscillatorModel) -> str:
    ratio = model.lam / model.omega
    if ratio < 0.1:
        return "weak"
    if ratio > 10:
        return "strong"
    return "intermediate"


def _safe_exp(x):
    try:
        return math.exp(x)
    except OverflowError:
        return math.inf


def _ok(method, mode, lnz, energy, beta):
    lnz, energy = float(lnz), float(energy)
    return MethodResult(method, mode, "ok", lnz, _safe_exp(lnz), -lnz / beta, energy)


def _run_strong(model, point, opts):
    out = []
    for mode in opts.modes:
        try:
            r = strongcoupling.thermo(model, point, mode)
            out.append(_ok("strong", mode, r.lnZ, r.E, point.beta))
        except DomainError as exc:
            out.append(MethodResult("strong", mode, "out_of_regime", message=str(exc)))
    return out


def _run_weak(model, point, opts):
    out = []
    for variant in opts.variants:
        try:
            r = weakcoupling.first_order_partition(model, point, variant)
            out.append(_ok("weak", variant, r.lnZ, r.E, point.beta))
        except DomainError as exc:
            out.append(MethodResult("weak", variant, "out_of_regime", message=str(exc)))
    return out


def _run_free(model, point, opts):
    lnz = weakcoupling.free_ln_partition(model.omega, point.beta)
    return [_ok("free", "", lnz, weakcoupling.free_mean_energy(model.omega, point.beta), point.beta)]


def _run_oracle(model, point, opts):
    basis = None
    try:
        if opts.basis_size is not None:
            freq = opts.basis_frequency or oracle.variational_frequency(model)
            basis = oracle.BasisSpec(opts.basis_size, freq)
        elif opts.basis_frequency is not None:
            basis = oracle.choose_basis(model, point, opts.oracle_tol, frequency=opts.basis_frequency)
        r = oracle.oracle_thermo(model, point, basis, opts.oracle_tol)
        return [_ok("oracle", "", r.lnZ, r.E, point.beta)]
    except ConvergenceError as exc:
        return [MethodResult("oracle", "", "failed", message=str(exc))]
    except DomainError as exc:
        return [MethodResult("oracle", "", "out_of_regime", message=str(exc))]


_RUNNERS = {"strong": _run_strong, "weak": _run_weak, "free": _run_free, "oracle": _run_oracle}


def _metrics(results):
    ok = [r for r in results if r.ok]
    out = []
    for a, b in itertools.combinations(ok, 2):
        for q in ("lnZ", "F", "E"):
            x, y = getattr(a, q), getattr(b, q)
            out.append(PairMetric(a.key, b.key, q, abs(x - y), relative_difference(x, y)))
    return tuple(out)


def model_inputs(model: OscillatorModel, point: ThermalPoint) -> dict:
    return {
        "beta": point.beta, "omega": model.omega, "lambda": model.lam,
        "sigma": model.sigma, "p": model.p, "potential": model.potential,
    }


def compare(model: OscillatorModel, point: ThermalPoint,
            options: Optional[CompareOptions] = None) -> ThermoReport:
    """Run every requested method; method-level failures become flags."""
    opts = options or CompareOptions()
    results = []
    for method in METHODS:
        if method in opts.methods:
            results.extend(_RUNNERS[method](model, point, opts))
    if not any(r.ok for r in results):
        raise DomainError("every requested method failed: "
                          + "; ".join(f"{r.key}: {r.message}" for r in results))

    flags = [f"regime={regime_label(model)}"]
    flags += [f"{r.status}:{r.key}" for r in results if not r.ok]

    bridge = None
    quoted = next((r for r in results if r.key == f"strong:{Mode.PAPER.value}" and r.ok), None)
    derived = next((r for r in results if r.key == f"strong:{Mode.DERIVED.value}" and r.ok), None)
    if quoted and derived and quoted.lnZ != 0:
        bridge = derived.lnZ / quoted.lnZ

    return ThermoReport(model_inputs(model, point), tuple(results), _metrics(results),
                        tuple(flags), bridge)


# --------------------------------------------------------------------------
# sweeps


def _thread_count():
    raw = os.environ.get("STRONGTHERM_THREADS", "0").strip() or "0"
    try:
        n = int(raw)
    except ValueError:
        raise DomainError(f"STRONGTHERM_THREADS must be an integer, got {raw!r}") from None
    if n < 0:
        raise DomainError("STRONGTHERM_THREADS must be >= 0")
    return n or min(8, os.cpu_count() or 1)


def grid_points(betas: Sequence[float], omegas: Sequence[float], lams: Sequence[float]):
    """(beta, omega, lambda) triples in lexicographic order of the grid indices."""
    return list(itertools.product(betas, omegas, lams))


def sweep(betas: Sequence[float], omegas: Sequence[float], lams: Sequence[float],
          options: Optional[CompareOptions] = None, sigma: float = 0.0, p: int = 2,
          potential: str = "power", threads: Optional[int] = None) -> List[ThermoReport]:
    points = grid_points(betas, omegas, lams)
    if not points:
        raise DomainError("the sweep grid is empty")
    opts = options or CompareOptions()

    def one(triple):
        beta, omega, lam = triple
        try:
            model = OscillatorModel(omega, lam, sigma, p, potential)
            point = ThermalPoint(beta)
            return compare(model, point, opts)
        except (DomainError, ConvergenceError) as exc:
            inputs = {"beta": beta, "omega": omega, "lambda": lam,
                      "sigma": sigma, "p": p, "potential": potential}
            return ThermoReport(inputs, (), (), ("failed",), None, str(exc))

    workers = threads if threads is not None else _thread_count()
    if workers <= 1:
        return [one(t) for t in points]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        # map() yields in submission order, so the output order is fixed
        return list(pool.map(one, points))


# --------------------------------------------------------------------------
# serialisation


def _fmt(x) -> str:
    if x is None:
        return ""
    return repr(float(x))


def _row_flags(report: ThermoReport, r: Optional[MethodResult]) -> str:
    if r is None:
        tokens = list(report.flags)
    else:
        tokens = [t for t in report.flags if t.startswith("regime=")]
        tokens.append(f"status={r.status}")
    if report.error:
        tokens.append("error")
    return ";".join(tokens)


def to_csv(reports: Sequence[ThermoReport]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\r\n")
    writer.writerow(CSV_COLUMNS)
    for rep in reports:
        ins = rep.inputs
        lead = [_fmt(ins["beta"]), _fmt(ins["omega"]), _fmt(ins["lambda"])]
        if not rep.results:
            writer.writerow(lead + ["", "", "", "", "", "", _row_flags(rep, None)])
        for r in rep.results:
            writer.writerow(lead + [r.method, r.mode, _fmt(r.lnZ), _fmt(r.Z), _fmt(r.F),
                                    _fmt(r.E), _row_flags(rep, r)])
    return buf.getvalue()


def to_plotdata(reports: Sequence[ThermoReport], mode: str = Mode.PAPER.value) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\r\n")
    writer.writerow(PLOT_COLUMNS)
    for rep in reports:
        strong = rep.result(f"strong:{mode}")
        orc = rep.result("oracle")
        ins = rep.inputs
        writer.writerow([
            _fmt(ins["beta"]), _fmt(ins["omega"]), _fmt(ins["lambda"]),
            _fmt(strong.lnZ if strong is not None and strong.ok else None),
            _fmt(orc.lnZ if orc is not None and orc.ok else None),
        ])
    return buf.getvalue()


def to_json(reports: Sequence[ThermoReport], inputs: dict) -> str:
    doc = {
        "schema_version": SCHEMA_VERSION,
        "inputs": inputs,
        "results": [r.to_dict() for r in reports],
    }
    return json.dumps(doc, indent=2, allow_nan=True) + "\n"


def from_json(text: str) -> Tuple[dict, List[ThermoReport]]:
    doc = json.loads(text)
    version = doc.get("schema_version")
    if version != SCHEMA_VERSION:
        raise DomainError(f"unsupported schema_version {version!r}")
    return doc["inputs"], [ThermoReport.from_dict(r) for r in doc["results"]]
