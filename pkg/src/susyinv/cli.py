"""Command-line front end: fit, extract poles, build and verify potentials.

Each subcommand runs a prefix of the chain
ingest -> fit -> poles -> potential -> verify and writes a JSON report plus
numeric artifacts to the output directory. Exit codes: 0 success (possibly
with warnings), 2 bad input or configuration, 3 failure inside a stage.
"""
from __future__ import annotations

import argparse
import json
import math
import os
import sys
import time
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import io
from .erf import ErfModel, K_from_delta, delta_from_model
from .errors import ConfigError, InversionError, ParseError
from .fitting import FitConfig, fit_erf, fit_poles
from .kinematics import DEFAULT_CONSTANTS, PhysicalConstants, elab_from_k, k_from_elab, to_mev
from .poles import PoleSet, delta_from_poles, extract_poles, validate_pole_set
from .solver import SolverConfig, verify_inversion
from .susy import build_potential

MODES = ("fit-erf", "fit-poles", "poles", "potential", "verify", "pipeline")
CONFIG_ENV = "SUSYINV_CONFIG"


@dataclass
class PipelineConfig:
    """Everything a run needs; every CLI flag mirrors one of these keys."""

    mode: str
    input: str | None = None
    l: int | None = None
    order: tuple | None = None
    npoles: int | None = None
    numerator: tuple | None = None
    denominator: tuple | None = None
    model: str | None = None
    poles: str | None = None
    out: str = "out"
    emit_plots: bool = False
    constants: dict = field(default_factory=dict)
    fit: dict = field(default_factory=dict)
    solver: dict = field(default_factory=dict)
    potential_grid: dict = field(default_factory=lambda: {"r_min": 0.01, "r_max": 10.0, "n": 1000})
    verify_grid: dict = field(default_factory=lambda: {"e_min": 1.0, "e_max": 350.0, "n": 50})

    def __post_init__(self):
        if isinstance(self.order, str):
            self.order = parse_order(self.order)
        if self.order is not None:
            self.order = tuple(int(v) for v in self.order)
        for name in ("numerator", "denominator"):
            v = getattr(self, name)
            if v is not None:
                setattr(self, name, tuple(float(x) for x in v))

    def validate(self):
        m = self.mode
        if m not in MODES:
            raise ConfigError(f"mode must be one of {MODES}")
        need_data = m in ("fit-erf", "fit-poles", "pipeline")
        if need_data and not self.input:
            raise ConfigError(f"{m} needs --input")
        if need_data and self.l is None:
            raise ConfigError(f"{m} needs --l")
        if m == "fit-erf" and self.order is None:
            raise ConfigError("fit-erf needs --order M/N")
        if m == "fit-poles" and not self.npoles:
            raise ConfigError("fit-poles needs --npoles")
        if m == "pipeline" and self.order is None and not self.npoles:
            raise ConfigError("pipeline needs --order or --npoles")
        if m == "poles":
            if self.numerator is None and self.model is None and not (self.input and self.order):
                raise ConfigError("poles needs --numerator, --model or --input with --order")
            if self.numerator is not None and self.l is None:
                raise ConfigError("poles with --numerator needs --l")
        if m in ("potential", "verify") and not self.poles:
            raise ConfigError(f"{m} needs --poles")
        if self.l is not None and self.l < 0:
            raise ConfigError("l must be non-negative")
        # surface bad nested settings before any computation
        PhysicalConstants.from_dict(self.constants)
        FitConfig.from_dict(self._fit_dict())
        SolverConfig.from_dict(self.solver)

    def _fit_dict(self):
        d = dict(self.fit)
        if self.order is not None:
            d["order"] = self.order
        if self.npoles:
            d["n_poles"] = self.npoles
        return d

    def fit_config(self) -> FitConfig:
        return FitConfig.from_dict(self._fit_dict())

    def to_dict(self) -> dict:
        d = dict(self.__dict__)
        for k in ("order", "numerator", "denominator"):
            if d[k] is not None:
                d[k] = list(d[k])
        return d


def parse_order(s: str) -> tuple:
    try:
        m, n = s.split("/")
        return int(m), int(n)
    except ValueError:
        raise ConfigError(f"order must look like M/N, got {s!r}") from None


class StageError(Exception):
    def __init__(self, stage, err):
        super().__init__(f"{stage}: {err}")
        self.stage, self.err = stage, err


class _Run:
    def __init__(self, cfg: PipelineConfig):
        self.cfg = cfg
        self.out = Path(cfg.out)
        self.c = PhysicalConstants.from_dict(cfg.constants)
        self.stages, self.timing, self.artifacts = {}, {}, []

    def stage(self, name, fn, *args):
        t = time.perf_counter()
        try:
            return fn(*args)
        except ParseError:
            raise
        except (InversionError, ValueError, ArithmeticError, np.linalg.LinAlgError) as e:
            raise StageError(name, e) from e
        finally:
            self.timing[name] = time.perf_counter() - t

    def write(self, name, writer, *args):
        writer(self.out / name, *args)
        self.artifacts.append(name)

    # -- stages

    def ingest(self):
        return io.read_dataset(self.cfg.input, self.cfg.l)

    def do_fit_erf(self, data):
        model, rep = fit_erf(data, self.cfg.fit_config(), self.c)
        self.stages["fit"] = rep.to_dict() | {"model": model.to_dict()}
        self.write("model.json", io.write_model, model)
        if self.cfg.emit_plots:
            self._plot_fit(data, lambda k: delta_from_model(model, k), model)
        return model

    def do_fit_poles(self, data, cfg=None):
        poles, rep = fit_poles(data, self.cfg.npoles, cfg or self.cfg.fit_config(), self.c)
        self.stages["fit_poles"] = rep.to_dict()
        if self.cfg.emit_plots:
            self._plot_fit(data, lambda k: delta_from_poles(poles, k), None)
        return poles

    def do_extract(self, model):
        rep = extract_poles(model)
        self.stages["poles"] = rep.to_dict()
        return rep

    def do_validate(self, poles):
        val = validate_pole_set(poles)
        self.stages["validation"] = val.to_dict()
        if not val.valid:
            raise InversionError("; ".join(val.problems))
        self.write("poles.txt", io.write_poles, poles)
        return poles

    def do_potential(self, poles):
        pot = build_potential(poles)
        g = self.cfg.potential_grid
        r = np.linspace(float(g["r_min"]), float(g["r_max"]), int(g["n"]))
        v = to_mev(pot(r), self.c)
        meta = pot.metadata()
        meta["core_coefficient"] = pot.core_coefficient()
        self.stages["potential"] = meta
        self.write("potential.dat", io.write_table, {"r_fm": r, "V_MeV": v}, {"l": pot.l, "nu": pot.nu, "units": "fm, MeV"})
        return pot

    def do_verify(self, poles, pot=None):
        g = self.cfg.verify_grid
        e = np.linspace(float(g["e_min"]), float(g["e_max"]), int(g["n"]))
        k = k_from_elab(e, self.c)
        rep = verify_inversion(poles, k, SolverConfig.from_dict(self.cfg.solver), pot=pot)
        self.stages["verify"] = rep.to_dict() | {"e_lab_MeV": e.tolist()}
        if self.cfg.emit_plots:
            self.write(
                "verify_delta.dat",
                io.write_table,
                {"E_lab_MeV": e, "delta_forward_deg": np.degrees(rep.delta_forward), "delta_poles_deg": np.degrees(rep.delta_poles)},
                {"l": poles.l},
            )
        return rep

    def _plot_fit(self, data, delta_fn, model):
        k_data = data.k(self.c)
        k = np.linspace(k_data.min() * 0.5, k_data.max(), 400)
        d = delta_fn(k)
        # put the curve on the branch of the data at the first point
        d += math.pi * np.round((data.delta[0] - np.interp(k_data[0], k, d)) / math.pi)
        self.write("data_delta.dat", io.write_table, {"E_lab_MeV": data.e_lab, "delta_deg": np.degrees(data.delta)}, {"l": data.l})
        self.write("fit_delta.dat", io.write_table, {"E_lab_MeV": elab_from_k(k, self.c), "delta_deg": np.degrees(d)}, {"l": data.l})
        if model is not None:
            ok = np.abs(np.sin(data.delta)) > 1e-12
            self.write(
                "data_K.dat",
                io.write_table,
                {"k2_fm-2": k_data[ok] ** 2, "K": K_from_delta(k_data[ok], data.delta[ok], data.l)},
                {"l": data.l},
            )
            self.write("fit_K.dat", io.write_table, {"k2_fm-2": k * k, "K": model(k * k)}, {"l": data.l})

    # -- modes

    def run(self):
        m = self.cfg.mode
        if m == "fit-erf":
            data = self.stage("ingest", self.ingest)
            self.stage("fit", self.do_fit_erf, data)
        elif m == "fit-poles":
            data = self.stage("ingest", self.ingest)
            poles = self.stage("fit", self.do_fit_poles, data)
            self.stage("validate", self.do_validate, poles)
        elif m == "poles":
            model = self.stage("ingest", self._model_source)
            rep = self.stage("extract", self.do_extract, model)
            self.write("poles.txt", io.write_poles, rep.real_poles)
        elif m == "potential":
            poles = self.stage("ingest", io.read_poles, self.cfg.poles, self.cfg.l)
            self.stage("potential", self.do_potential, poles)
        elif m == "verify":
            poles = self.stage("ingest", io.read_poles, self.cfg.poles, self.cfg.l)
            self.stage("verify", self.do_verify, poles)
        else:
            self._pipeline()

    def _model_source(self):
        if self.cfg.numerator is not None:
            return ErfModel(self.cfg.l, self.cfg.numerator, self.cfg.denominator or (1.0,))
        if self.cfg.model is not None:
            return io.read_model(self.cfg.model)
        data = self.ingest()
        return self.do_fit_erf(data)

    def _pipeline(self):
        data = self.stage("ingest", self.ingest)
        if self.cfg.order is not None:
            model = self.stage("fit", self.do_fit_erf, data)
            rep = self.stage("extract", self.do_extract, model)
            poles = rep.real_poles
            if rep.has_complex:
                warnings.warn("complex poles replaced by a constrained direct pole fit seeded from the model", UserWarning)
                seeds = list(poles.kappas)
                for z in rep.complex_poles[rep.complex_poles.imag > 0]:
                    mod = abs(z) * (1.0 if z.real >= 0 else -1.0)
                    seeds += [0.9 * mod, 1.1 * mod]
                fc = FitConfig.from_dict(self.cfg._fit_dict() | {"init": "manual", "initial_poles": tuple(seeds)})
                self.cfg.npoles = len(seeds)
                poles = self.stage("fit-poles", self.do_fit_poles, data, fc)
        else:
            poles = self.stage("fit", self.do_fit_poles, data)
        self.stage("validate", self.do_validate, poles)
        pot = self.stage("potential", self.do_potential, poles)
        self.stage("verify", self.do_verify, poles, pot)


def run(cfg: PipelineConfig):
    """Execute a configured run; returns (report dict, exit code).

    The report's ``timing`` field is the only non-deterministic part.
    """
    report = {"config": cfg.to_dict(), "stages": {}, "warnings": [], "artifacts": [], "status": "ok"}
    code = 0
    try:
        cfg.validate()
    except (ConfigError, ValueError, TypeError) as e:
        report.update(status="error", error={"stage": "config", "message": str(e)})
        return report, 2
    r = _Run(cfg)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        try:
            r.run()
        except ParseError as e:
            report.update(status="error", error={"stage": "ingest", "message": str(e), "line": e.line})
            code = 2
        except FileNotFoundError as e:
            report.update(status="error", error={"stage": "ingest", "message": str(e)})
            code = 2
        except StageError as e:
            report.update(status="error", error={"stage": e.stage, "message": str(e.err), "type": type(e.err).__name__})
            code = 3
    seen = []
    for w in caught:
        msg = f"{w.category.__name__}: {w.message}"
        if msg not in seen:
            seen.append(msg)
    report["stages"] = r.stages
    report["warnings"] = seen
    report["artifacts"] = sorted(set(r.artifacts))
    report["timing"] = r.timing
    r.out.mkdir(parents=True, exist_ok=True)
    io.write_json(r.out / "report.json", _jsonable(report))
    return report, code


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else str(v)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def _floats(s):
    return [float(t) for t in s.replace(",", " ").split()]


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="susyinv", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="mode", required=True)
    for mode in MODES:
        s = sub.add_parser(mode)
        s.add_argument("--config", help=f"JSON config file (default: ${CONFIG_ENV})")
        s.add_argument("--input", help="dataset E_lab_MeV,delta_deg[,error_deg]")
        s.add_argument("--l", type=int)
        s.add_argument("--order", help="model degrees M/N")
        s.add_argument("--npoles", type=int)
        s.add_argument("--numerator", type=_floats, help="P coefficients, ascending in k^2")
        s.add_argument("--denominator", type=_floats, help="Q coefficients starting with 1")
        s.add_argument("--model", help="model JSON file")
        s.add_argument("--poles", help="pole list file")
        s.add_argument("--out")
        s.add_argument("--emit-plots", action="store_true", default=None)
    return p


def config_from_args(args) -> PipelineConfig:
    path = args.config or os.environ.get(CONFIG_ENV)
    base = {}
    if path:
        try:
            base = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as e:
            raise ConfigError(f"cannot read config {path}: {e}") from None
    base["mode"] = args.mode
    for key in ("input", "l", "order", "npoles", "numerator", "denominator", "model", "poles", "out", "emit_plots"):
        v = getattr(args, key)
        if v is not None:
            base[key] = v
    known = set(PipelineConfig.__dataclass_fields__)
    extra = set(base) - known
    if extra:
        raise ConfigError(f"unknown config keys: {sorted(extra)}")
    return PipelineConfig(**base)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = config_from_args(args)
    except (ConfigError, TypeError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    report, code = run(cfg)
    if code:
        err = report["error"]
        print(f"error in {err['stage']}: {err['message']}", file=sys.stderr)
    else:
        for w in report["warnings"]:
            print(f"warning: {w}", file=sys.stderr)
        print(f"wrote {cfg.out}/report.json")
    return code


if __name__ == "__main__":
    sys.exit(main())
