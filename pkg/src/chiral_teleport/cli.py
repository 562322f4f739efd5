"""Command-line driver.

    chiral-teleport run --config cfg.json [--experiment E] [--phi X] [--trials N]
                        [--seed S] [--out PATH] [--format json|csv] [...]

Every field of :class:`ProtocolConfig` can be given in the JSON file or as a
long flag (``a_re`` -> ``--a-re``); flags win.  Errors print a single line
``chiral-teleport: error[<kind>]: <message>`` on stderr and exit nonzero.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import io
import json
import math
import os
import sys
import tempfile
import warnings
from dataclasses import dataclass, fields
from pathlib import Path

import numpy as np

from . import __version__
from .molecule import VARIANTS, MoleculeAmplitudes
from .optics import OpticalParams
from .perfect import (
    PAIRS,
    ProtocolInfeasibleError,
    coincidence_probability,
    run_perfect_protocol,
)
from .sampler import TrialConfig, run_trials
from .statedep import (
    OUTCOMES,
    SingularTransformError,
    analysis_report,
    dense_branches,
    outcome_probabilities,
)

PROG = "chiral-teleport"
EXPERIMENTS = ("perfect", "statedep", "sweep-phi", "sweep-amplitude")
NORM_WARN_TOL = 1e-6

EXIT_CONFIG = 2
EXIT_PROTOCOL = 3
EXIT_IO = 4


class ConfigError(ValueError):
    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}")
        self.field = field


@dataclass(frozen=True)
class ProtocolConfig:
    experiment: str = "perfect"
    a_re: float = 1.0
    a_im: float = 0.0
    b_re: float = 0.0
    b_im: float = 0.0
    # 0.3 rad keeps clear of sin(phi) = 0 and sin(2 phi) = 0.  A realistic
    # single-molecule cavity phase would be nearer 0.1 degree (~1.7e-3 rad).
    phi: float = 0.3
    kz: float = 0.0
    excited_parity: str = "odd"
    polarizer: str = "x"
    pair: str = "psi"
    variant: str = "natural"
    trials: int = 0
    seed: int = 0
    reconstruct: bool = False
    sweep_start: float = 0.05
    sweep_stop: float = 1.5
    sweep_steps: int = 30
    sweep_protocol: str = "statedep"
    out: str | None = None
    format: str = "json"

    @property
    def amplitudes(self) -> MoleculeAmplitudes:
        return MoleculeAmplitudes(complex(self.a_re, self.a_im), complex(self.b_re, self.b_im))

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


_FIELD_TYPES = {f.name: f.type for f in fields(ProtocolConfig)}
_CHOICES = {
    "experiment": EXPERIMENTS,
    "excited_parity": ("odd", "even"),
    "polarizer": ("x", "y"),
    "pair": PAIRS,
    "variant": VARIANTS,
    "sweep_protocol": ("statedep", "perfect"),
    "format": ("json", "csv"),
}


def _coerce(name: str, value, from_flag: bool):
    kind = _FIELD_TYPES[name]
    if kind == "float":
        if from_flag:
            try:
                value = float(value)
            except ValueError:
                raise ConfigError(name, f"expected a number, got {value!r}") from None
        elif isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(name, f"expected a number, got {value!r}")
        value = float(value)
        if not math.isfinite(value):
            raise ConfigError(name, "must be finite")
        return value
    if kind == "int":
        if from_flag:
            try:
                value = int(value)
            except ValueError:
                raise ConfigError(name, f"expected an integer, got {value!r}") from None
        elif isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(name, f"expected an integer, got {value!r}")
        return value
    if kind == "bool":
        if from_flag:
            low = str(value).lower()
            if low not in ("true", "false", "1", "0", "yes", "no"):
                raise ConfigError(name, f"expected true/false, got {value!r}")
            return low in ("true", "1", "yes")
        if not isinstance(value, bool):
            raise ConfigError(name, f"expected true/false, got {value!r}")
        return value
    # str / str | None
    if value is None and name == "out":
        return None
    if not isinstance(value, str):
        raise ConfigError(name, f"expected a string, got {value!r}")
    if name in _CHOICES and value not in _CHOICES[name]:
        raise ConfigError(name, f"must be one of {list(_CHOICES[name])}, got {value!r}")
    return value


class _FlagError(Exception):
    pass


class _RaisingParser(argparse.ArgumentParser):
    def error(self, message):
        raise _FlagError(message)


def _parse_flags(flags: list[str]) -> dict:
    p = _RaisingParser(prog=PROG, add_help=False, argument_default=argparse.SUPPRESS)
    for name in _FIELD_TYPES:
        p.add_argument("--" + name.replace("_", "-"), dest=name)
    try:
        ns = p.parse_args(flags)
    except _FlagError as exc:
        raise ConfigError("flags", str(exc)) from None
    return vars(ns)


def parse_config(text: str | None, flags: list[str] | None = None) -> ProtocolConfig:
    """Build a validated config from JSON ``text`` and ``--flag`` overrides."""
    values: dict = {}
    if text:
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError("config", f"malformed JSON: {exc}") from None
        if not isinstance(data, dict):
            raise ConfigError("config", "top level must be a JSON object")
        for key, value in data.items():
            if key not in _FIELD_TYPES:
                raise ConfigError(key, "unknown field")
            values[key] = _coerce(key, value, from_flag=False)
    for key, value in _parse_flags(list(flags or [])).items():
        values[key] = _coerce(key, value, from_flag=True)

    cfg = ProtocolConfig(**values)
    if cfg.trials < 0:
        raise ConfigError("trials", "must be >= 0")
    if not 0 <= cfg.seed < 2**64:
        raise ConfigError("seed", "must be a 64-bit unsigned integer")
    if cfg.experiment.startswith("sweep"):
        if cfg.sweep_steps < 1:
            raise ConfigError("sweep_steps", "sweep grid must be non-empty")
        if cfg.sweep_steps > 1 and not cfg.sweep_stop > cfg.sweep_start:
            raise ConfigError("sweep_stop", "must exceed sweep_start (positive step)")

    norm = math.hypot(cfg.a_re, cfg.a_im, cfg.b_re, cfg.b_im)
    if norm == 0:
        raise ConfigError("a_re", "molecular amplitudes (a, b) must not both be zero")
    if abs(norm - 1) > NORM_WARN_TOL:
        warnings.warn(f"(a, b) had norm {norm:.6g}; normalised on ingest", stacklevel=2)
    if abs(norm - 1) > 1e-12:
        cfg = dataclasses.replace(
            cfg,
            a_re=cfg.a_re / norm,
            a_im=cfg.a_im / norm,
            b_re=cfg.b_re / norm,
            b_im=cfg.b_im / norm,
        )
    return cfg


# -- experiment drivers --------------------------------------------------------


def _perfect(cfg: ProtocolConfig, m: MoleculeAmplitudes, phi: float):
    return run_perfect_protocol(
        m,
        phi,
        kz=cfg.kz,
        pair=cfg.pair,
        parity=cfg.excited_parity,
        orientation=cfg.polarizer,
        variant=cfg.variant,
    )


def _trials(cfg: ProtocolConfig, experiment: str):
    return run_trials(
        TrialConfig(
            n_trials=cfg.trials,
            seed=cfg.seed,
            experiment=experiment,
            m=cfg.amplitudes,
            phi=cfg.phi,
            kz=cfg.kz,
            parity=cfg.excited_parity,
            orientation=cfg.polarizer,
            pair=cfg.pair,
            variant=cfg.variant,
        )
    )


def _sweep_rows(cfg: ProtocolConfig) -> tuple[list[str], list[list[float]]]:
    grid = np.linspace(cfg.sweep_start, cfg.sweep_stop, cfg.sweep_steps)
    m0 = cfg.amplitudes
    rel_phase = m0.theta_b - m0.theta_a
    axis = "phi" if cfg.experiment == "sweep-phi" else "theta"
    rows = []
    for g in grid.tolist():
        if axis == "phi":
            m, phi = m0, g
        else:
            m, phi = MoleculeAmplitudes(math.cos(g), math.sin(g) * complex(math.cos(rel_phase), math.sin(rel_phase))), cfg.phi
        if cfg.sweep_protocol == "statedep":
            rows.append([g, *outcome_probabilities(m, phi).probabilities])
        else:
            res = _perfect(cfg, m, phi)
            rows.append([g, res.success_probability, res.fidelity])
    if cfg.sweep_protocol == "statedep":
        header = [axis, "pr_1p", "pr_2p", "pr_3p", "pr_4p"]
    else:
        header = [axis, "success_prob", "fidelity"]
    return header, rows


def _csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([x if isinstance(x, str) else repr(float(x)) for x in row])
    return buf.getvalue()


def execute(cfg: ProtocolConfig) -> tuple[dict, str]:
    """Run the configured experiment; return (JSON results, CSV text)."""
    m = cfg.amplitudes
    if cfg.experiment == "perfect":
        res = _perfect(cfg, m, cfg.phi)
        results = res.to_dict()
        results["closed_form_success_probability"] = coincidence_probability(cfg.phi)
        header = ["outcome_label", "success_prob", "fidelity"]
        csv_text = _csv(header, [[res.outcome_label, res.success_probability, res.fidelity]])
        if cfg.trials:
            rep = _trials(cfg, "perfect")
            results["trials"] = rep.to_dict()
            csv_text = rep.to_csv()
        return results, csv_text
    if cfg.experiment == "statedep":
        results = analysis_report(m, cfg.phi, reconstruct=cfg.reconstruct)
        params = OpticalParams(phi=cfg.phi, kz=cfg.kz, variant=cfg.variant)
        results["dense_probabilities"] = [b.norm() ** 2 for b in dense_branches(m, params)]
        csv_text = _csv(["label", "probability"], zip(OUTCOMES, results["probabilities"]))
        if cfg.trials:
            rep = _trials(cfg, "statedep")
            results["trials"] = rep.to_dict()
            csv_text = rep.to_csv()
        return results, csv_text
    header, rows = _sweep_rows(cfg)
    return {"columns": header, "rows": rows}, _csv(header, rows)


def _versions() -> dict:
    return {"chiral_teleport": __version__, "numpy": np.__version__}


def render(cfg: ProtocolConfig) -> str:
    results, csv_text = execute(cfg)
    if cfg.format == "csv":
        return csv_text
    doc = {"config": cfg.to_dict(), "results": results, "versions": _versions()}
    return json.dumps(doc, indent=2) + "\n"


def _write_atomic(path: str, text: str) -> None:
    target = Path(path)
    fd, tmp = tempfile.mkstemp(dir=target.parent or ".", prefix=f".{target.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, target)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _fail(kind: str, message: str, code: int) -> int:
    print(f"{PROG}: error[{kind}]: {' '.join(str(message).split())}", file=sys.stderr)
    return code


def run(cfg: ProtocolConfig) -> int:
    try:
        text = render(cfg)
    except ProtocolInfeasibleError as exc:
        return _fail("infeasible", exc, EXIT_PROTOCOL)
    except SingularTransformError as exc:
        return _fail("singular", exc, EXIT_PROTOCOL)
    if cfg.out is None:
        sys.stdout.write(text)
        return 0
    try:
        _write_atomic(cfg.out, text)
    except OSError as exc:
        return _fail("io", f"cannot write {cfg.out}: {exc.strerror or exc}", EXIT_IO)
    return 0


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = argparse.ArgumentParser(prog=PROG, description="Chiral-amplitude teleportation simulator")
    sub = parser.add_subparsers(dest="command", required=True)
    run_p = sub.add_parser("run", help="run one experiment")
    run_p.add_argument("--config", help="JSON config file")
    for name in _FIELD_TYPES:
        run_p.add_argument("--" + name.replace("_", "-"), dest=name, default=argparse.SUPPRESS)
    args = parser.parse_args(argv)

    overrides = []
    for name, value in vars(args).items():
        if name in _FIELD_TYPES:
            overrides.append(f"--{name.replace('_', '-')}={value}")
    text = None
    if args.config:
        try:
            text = Path(args.config).read_text()
        except OSError as exc:
            return _fail("io", f"cannot read {args.config}: {exc.strerror or exc}", EXIT_IO)
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("always")
            warnings.showwarning = lambda msg, *a, **k: print(f"{PROG}: warning: {msg}", file=sys.stderr)
            cfg = parse_config(text, overrides)
    except ConfigError as exc:
        return _fail("config", exc, EXIT_CONFIG)
    return run(cfg)


if __name__ == "__main__":
    raise SystemExit(main())
