"""``tnsim simulate FILE ...``: run one task on one circuit and print JSON.

Exit codes: 0 success, 2 usage or input error, 3 numerical infeasibility.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from .circuit import parse
from .errors import (
    InfeasibleError,
    InternalConsistencyError,
    NoiseModelError,
    ParseError,
    ResourceError,
    SamplingError,
)
from .executor import default_workers
from .network import OPEN, format_bitstring, parse_bitstring
from .noise import load_noise_model
from .sampler import histogram
from .simulator import BACKENDS, PlanCache, Simulator, SimulatorConfig

SCHEMA_VERSION = 1
TASKS = ("amplitude", "slice", "expectation", "probability", "sample", "trace-expectation")
EXIT_USAGE = 2
EXIT_INFEASIBLE = 3


class UsageError(Exception):
    pass


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="tnsim", description="Tensor-network quantum circuit simulator.")
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("simulate", help="run one task on a circuit file")
    p.add_argument("circuit", help="circuit file ('qubits N' header, one gate per line)")
    p.add_argument("--backend", choices=BACKENDS, default="exact")
    p.add_argument("--task", choices=TASKS, default="amplitude")
    p.add_argument("--bitstring", help="e.g. 0110, or 00-0 / 0,0,-1,0 with '-'/-1 marking open qubits")
    p.add_argument("--bitstring-file", help="file with one bit-string per line (batch amplitudes)")
    p.add_argument("--observable", help="Pauli sum such as 'Z0 Z1' or '0.5 X0 + -1*Z2'")
    p.add_argument("--method", choices=("conjugate", "sliced"), default=None)
    p.add_argument("--rank-max", type=int, default=None, help="open qubits per slice for --method sliced")
    p.add_argument("--shots", type=int, default=None)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--max-bond", type=int, default=None)
    p.add_argument("--svd-cutoff", type=float, default=0.0)
    p.add_argument("--max-kraus", type=int, default=None)
    p.add_argument("--noise-model", help="noise-model JSON file")
    p.add_argument("--memory-gb", type=float, default=2.0)
    p.add_argument("--workers", type=int, default=None)
    p.add_argument("--plan-in", help="plan cache JSON to reuse")
    p.add_argument("--plan-out", help="write the plan cache JSON here")
    return parser


def _read(path: str) -> str:
    try:
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror or exc}") from None


def _check_flags(a: argparse.Namespace):
    task, backend = a.task, a.backend
    if a.bitstring is not None and a.bitstring_file is not None:
        raise UsageError("--bitstring and --bitstring-file are mutually exclusive")
    if a.bitstring_file is not None and task != "amplitude":
        raise UsageError("--bitstring-file is only used by the amplitude task")
    if task in ("amplitude", "slice", "probability") and a.bitstring is None and a.bitstring_file is None:
        raise UsageError(f"task {task} needs --bitstring")
    if task in ("expectation", "trace-expectation") and a.observable is None:
        raise UsageError(f"task {task} needs --observable")
    if task not in ("expectation", "trace-expectation") and a.observable is not None:
        raise UsageError(f"--observable is not used by task {task}")
    if task == "sample" and a.shots is None:
        raise UsageError("task sample needs --shots")
    if task != "sample" and a.shots is not None:
        raise UsageError(f"--shots is not used by task {task}")
    if a.method is not None and task != "expectation":
        raise UsageError("--method only applies to the expectation task")
    if a.method == "sliced" and backend != "exact":
        raise UsageError("--method sliced needs --backend exact")
    if a.rank_max is not None and a.method != "sliced":
        raise UsageError("--rank-max needs --method sliced")
    if task in ("amplitude", "slice") and backend not in ("exact", "mps"):
        raise UsageError(f"task {task} needs a pure-state backend (exact or mps)")
    if task == "trace-expectation" and backend not in ("dm", "pmps"):
        raise UsageError("task trace-expectation needs --backend dm or pmps")
    if a.noise_model is not None and backend not in ("dm", "pmps"):
        raise UsageError("--noise-model needs --backend dm or pmps")
    if a.max_bond is not None and backend not in ("mps", "pmps"):
        raise UsageError("--max-bond needs --backend mps or pmps")
    if a.max_kraus is not None and backend != "pmps":
        raise UsageError("--max-kraus needs --backend pmps")
    if a.svd_cutoff and backend not in ("mps", "pmps"):
        raise UsageError("--svd-cutoff needs --backend mps or pmps")
    if (a.plan_in or a.plan_out) and backend not in ("exact", "dm"):
        raise UsageError("plan caches apply to the exact and dm backends")
    for name in ("shots", "max_bond", "max_kraus", "workers", "rank_max"):
        v = getattr(a, name)
        if v is not None and v < 1:
            raise UsageError(f"--{name.replace('_', '-')} must be positive")
    if a.svd_cutoff < 0 or not a.memory_gb > 0:
        raise UsageError("--svd-cutoff must be >= 0 and --memory-gb > 0")


def _complex_fields(z: complex) -> dict:
    return {"amplitude-real": float(z.real), "amplitude-imag": float(z.imag)}


def run(argv=None) -> tuple[int, dict]:
    """Parse ``argv``, run the task and return ``(exit code, JSON document)``."""
    parser = build_parser()
    try:
        a = parser.parse_args(argv)
    except SystemExit as exc:
        code = exc.code if isinstance(exc.code, int) else EXIT_USAGE
        return code, {}
    try:
        _check_flags(a)
        circuit = parse(_read(a.circuit), name=a.circuit)
        noise = None
        if a.noise_model is not None:
            _read(a.noise_model)
            noise = load_noise_model(a.noise_model)
        cache = PlanCache.from_json(_read(a.plan_in)) if a.plan_in else PlanCache()
        config = SimulatorConfig(
            backend=a.backend,
            memory_budget_bytes=int(a.memory_gb * 1024**3),
            workers=a.workers or default_workers(),
            seed=a.seed,
            max_bond=a.max_bond,
            cutoff=a.svd_cutoff,
            max_kraus=a.max_kraus,
            noise=noise,
        )
        sim = Simulator(circuit, config, cache)
        doc = {
            "schema_version": SCHEMA_VERSION,
            "task": a.task,
            "backend": a.backend,
            "num_qubits": circuit.num_qubits,
        }
        doc.update(_dispatch(sim, a))
        if a.backend in ("mps", "pmps"):
            s = sim.state()
            doc["bond_dims"] = s.bond_dims()
            doc["discarded_weight"] = float(s.cumulative_discarded_weight)
        if a.plan_out:
            cache.dump(a.plan_out)
    except (UsageError, ParseError, NoiseModelError, ValueError) as exc:
        return EXIT_USAGE, {"schema_version": SCHEMA_VERSION, "error": str(exc), "exit_code": EXIT_USAGE}
    except (InfeasibleError, ResourceError, SamplingError, InternalConsistencyError) as exc:
        return EXIT_INFEASIBLE, {"schema_version": SCHEMA_VERSION, "error": str(exc), "exit_code": EXIT_INFEASIBLE}
    return 0, doc


def _dispatch(sim: Simulator, a: argparse.Namespace) -> dict:
    n = sim.num_qubits
    task = a.task
    if task == "amplitude":
        if a.bitstring_file is not None:
            lines = [ln.strip() for ln in _read(a.bitstring_file).splitlines()]
            batch = [ln for ln in lines if ln and not ln.startswith("#")]
            if not batch:
                raise UsageError("bit-string file is empty")
            out = []
            for text in batch:
                bits = parse_bitstring(text, n)
                out.append({"bitstring": format_bitstring(bits), **_complex_fields(sim.amplitude(bits))})
            return {"amplitudes": out}
        bits = parse_bitstring(a.bitstring, n)
        return {"bitstring": format_bitstring(bits), **_complex_fields(sim.amplitude(bits))}
    if task == "slice":
        bits = parse_bitstring(a.bitstring, n)
        vec, norm = sim.slice(bits)
        return {
            "bitstring": format_bitstring(bits),
            "open_qubits": [q for q, b in enumerate(bits) if b == OPEN],
            "slice": [float(x) for x in np.real(vec)],
            "slice-imag": [float(x) for x in np.imag(vec)],
            "slice-norm": norm,
        }
    if task == "probability":
        bits = parse_bitstring(a.bitstring, n)
        return {"bitstring": format_bitstring(bits), "probability": sim.probability(bits)}
    if task == "expectation":
        method = a.method or "conjugate"
        value = sim.expectation(a.observable, method, a.rank_max)
        return {"observable": a.observable, "method": method, "expectation": value}
    if task == "trace-expectation":
        return {"observable": a.observable, "expectation": sim.trace_expectation(a.observable)}
    samples = sim.sample(a.shots, a.seed)
    return {
        "shots": a.shots,
        "seed": a.seed,
        "qubits": sim.circuit.measured_qubits,
        "histogram": histogram(samples),
    }


def main(argv=None) -> int:
    code, doc = run(argv)
    if doc:
        stream = sys.stdout if code == 0 else sys.stderr
        stream.write(json.dumps(doc, sort_keys=True) + "\n")
    return code


if __name__ == "__main__":
    sys.exit(main())
