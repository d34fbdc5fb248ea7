"""Command-line front end: ``qlogismos {build,solve,oracle,verify,report}``.

Exit codes: 0 success, 2 input error, 3 resource error, 4 verification failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass
from pathlib import Path

from .costgraph import (
    ConstructionError,
    CostMatrix,
    LogismosGraph,
    build_graph,
    instance_from_dict,
)
from .ising import ResourceError
from .optimize import SpsaConfig, qaoa_solve
from .oracle import (
    BRUTE_FORCE_DEFAULT_CAP,
    brute_force_qubo,
    preflow_push_mincut,
    verify_cut,
    OracleReport,
    _equal,
)
from .qubo import QuboInputError, build_qubo

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_RESOURCE = 3
EXIT_VERIFY = 4


class InputError(ValueError):
    pass


@dataclass
class RunConfig:
    command: str
    input: str | None = None
    output: str | None = None
    result: str | None = None
    delta: int | None = None
    reps: int = 5
    maxiter: int = 250
    seed: int = 1234
    shots: int = 0
    restarts: int = 5
    no_mixer: bool = False
    oracle_method: str = "both"
    format: str = "json"
    record_time: bool = False

    def __post_init__(self):
        if not self.input:
            raise InputError(f"'{self.command}' needs --input")
        if self.command == "verify" and not self.result:
            raise InputError("'verify' needs --result")
        if self.reps < 1:
            raise InputError("--reps must be >= 1")
        if self.shots < 0:
            raise InputError("--shots must be >= 0")
        if self.restarts < 1:
            raise InputError("--restarts must be >= 1")
        if self.maxiter < 1:
            raise InputError("--maxiter must be >= 1")


def _read_json(path: str):
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from None
    if not text.strip():
        raise InputError(f"{path} is empty")
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"malformed JSON in {path}: {exc}") from None


def _write(text: str, path: str | None) -> None:
    if path:
        Path(path).write_text(text)
    else:
        sys.stdout.write(text)


def _dumps(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def load_graph(path: str, delta: int | None = None) -> LogismosGraph:
    """Read a graph file, or an instance file which is built on the fly."""
    data = _read_json(path)
    if not isinstance(data, dict):
        raise InputError(f"{path}: expected a JSON object")
    if "edges" in data or "weights" in data:
        if delta is not None:
            data = dict(data, delta=delta)
            data.pop("edges", None)
        return LogismosGraph.from_dict(data)
    if delta is not None:
        data = dict(data, delta=delta)
    return build_graph(instance_from_dict(data))


def cmd_build(cfg: RunConfig) -> int:
    data = _read_json(cfg.input)
    if isinstance(data, dict) and cfg.delta is not None:
        data = dict(data, delta=cfg.delta)
    graph = build_graph(instance_from_dict(data))
    _write(_dumps(graph.to_dict()), cfg.output)
    if cfg.output:
        print(
            f"graph: {graph.node_count} nodes, {len(graph.edges)} edges, "
            f"epsilon={graph.big_m} -> {cfg.output}"
        )
    return EXIT_OK


def cmd_solve(cfg: RunConfig) -> int:
    graph = load_graph(cfg.input, cfg.delta)
    qubo = build_qubo(graph)
    result = qaoa_solve(
        qubo,
        depth=cfg.reps,
        spsa_config=SpsaConfig(maxiter=cfg.maxiter, seed=cfg.seed),
        restarts=cfg.restarts,
        shots=cfg.shots,
        mixer=not cfg.no_mixer,
        graph=graph,
    )
    payload = result.to_dict(include_timing=cfg.record_time)
    if cfg.output:
        Path(cfg.output).write_text(_dumps(payload))
    else:
        sys.stdout.write(_dumps(payload))
    print("Solution is:", payload["bitstring"] + str(payload["q_s"]) + str(payload["q_t"]))
    print("Objective function value:", result.objective)
    print("Segmentation set:", result.source_set)
    print("Background set:", result.background_set)
    print(f"Time (sec): {result.wall_seconds:.3f}")
    if not result.valid_cut:
        print("warning: best bitstring is not a valid s-t cut", file=sys.stderr)
    return EXIT_OK


def _oracle_report(graph: LogismosGraph, method: str) -> OracleReport:
    qubo = build_qubo(graph)
    cert = preflow_push_mincut(graph)
    report = OracleReport(flow=cert.flow_value, source_side=cert.source_side, epsilon=qubo.epsilon)
    if method == "preflow":
        return report
    if qubo.size > BRUTE_FORCE_DEFAULT_CAP:
        report.notes.append(
            f"brute force skipped: {qubo.size} variables exceeds cap {BRUTE_FORCE_DEFAULT_CAP}"
        )
        return report
    report.E0, report.minimizers = brute_force_qubo(qubo)
    report.consistent = _equal(report.E0, cert.flow_value - qubo.epsilon)
    return report


def cmd_oracle(cfg: RunConfig) -> int:
    graph = load_graph(cfg.input, cfg.delta)
    report = _oracle_report(graph, cfg.oracle_method)
    for note in report.notes:
        print("notice:", note, file=sys.stderr)
    _write(_dumps(report.to_dict()), cfg.output)
    if report.consistent is False:
        print("FAIL: brute-force minimum disagrees with max-flow", file=sys.stderr)
        return EXIT_VERIFY
    return EXIT_OK


def _result_bits(result: dict) -> list:
    try:
        bits = [int(c) for c in result["bitstring"]] + [int(result["q_s"]), int(result["q_t"])]
    except (KeyError, TypeError, ValueError):
        raise InputError("result file lacks a readable bitstring/q_s/q_t") from None
    if any(b not in (0, 1) for b in bits):
        raise InputError("bitstring must contain only 0 and 1")
    return bits


def cmd_verify(cfg: RunConfig) -> int:
    graph = load_graph(cfg.input, cfg.delta)
    result = _read_json(cfg.result)
    if not isinstance(result, dict):
        raise InputError(f"{cfg.result}: expected a JSON object")
    bits = _result_bits(result)
    if len(bits) != graph.num_vertices:
        raise InputError(
            f"result has {len(bits)} variables, graph needs {graph.num_vertices}"
        )
    report = _oracle_report(graph, cfg.oracle_method)
    for note in report.notes:
        print("notice:", note)
    source = [i for i, b in enumerate(bits) if b]
    check = verify_cut(graph, source, flow_value=report.flow)
    qubo = build_qubo(graph)
    objective = qubo.evaluate(bits)
    lines = [
        ("separates source from sink", check["separates"]),
        (f"minimum capacity (cut={check['cut_capacity']}, flow={report.flow})", check["is_minimum"]),
    ]
    if "objective" in result:
        lines.append(("reported objective matches re-evaluation", _equal(objective, result["objective"])))
    if report.consistent is not None:
        lines.append((f"oracles agree (E0={report.E0}, flow-eps={report.flow - qubo.epsilon})", report.consistent))
    for label, ok in lines:
        print(f"{'PASS' if ok else 'FAIL'}: {label}")
    if report.consistent is False:
        return EXIT_VERIFY
    return EXIT_OK if all(ok for _, ok in lines) else EXIT_VERIFY


def render_ascii(result: dict) -> str:
    """Column stacks, top level first: ``S`` surface node, ``#`` source side, ``.`` sink side."""
    try:
        columns = result["columns"]
        heights = result["heights"]
    except KeyError:
        raise InputError("result file has no column layout") from None
    if columns is None or heights is None:
        raise InputError("result file has no column layout")
    bits = _result_bits(result)
    surface = {json.dumps(c): k for c, k in (result.get("surface") or [])}
    offsets = [0]
    for h in heights:
        offsets.append(offsets[-1] + h)
    labels = [str(c if not isinstance(c, list) else "".join(map(str, c))) for c in columns]
    width = max(3, *(len(s) + 1 for s in labels))
    rows = ["level" + "".join(s.rjust(width) for s in labels)]
    for k in range(max(heights), 0, -1):
        cells = []
        for r, c in enumerate(columns):
            if k > heights[r]:
                cells.append(" ")
            elif surface.get(json.dumps(c)) == k:
                cells.append("S")
            else:
                cells.append("#" if bits[offsets[r] + k - 1] else ".")
        rows.append(f"{k:>5}" + "".join(ch.rjust(width) for ch in cells))
    status = "valid cut" if result.get("valid_cut") else "INVALID cut"
    rows.append(f"objective {result.get('objective')}  ({status}, q_s={bits[-2]} q_t={bits[-1]})")
    return "\n".join(rows) + "\n"


def cmd_report(cfg: RunConfig) -> int:
    result = _read_json(cfg.input)
    if not isinstance(result, dict) or not result:
        raise InputError(f"{cfg.input}: empty or non-object result")
    if cfg.format == "json":
        _write(_dumps(result), cfg.output)
    else:
        _write(render_ascii(result), cfg.output)
    return EXIT_OK


COMMANDS = {
    "build": cmd_build,
    "solve": cmd_solve,
    "oracle": cmd_oracle,
    "verify": cmd_verify,
    "report": cmd_report,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qlogismos", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--input", "-i")
    common.add_argument("--output", "-o")
    common.add_argument("--delta", type=int, help="override the smoothness constraint")
    common.add_argument("--format", choices=("json", "ascii"), default="json")
    common.add_argument("--oracle-method", choices=("preflow", "brute", "both"), default="both")

    sub.add_parser("build", parents=[common], help="instance JSON -> graph JSON")
    sp = sub.add_parser("solve", parents=[common], help="QAOA + SPSA on a graph")
    sp.add_argument("--reps", type=int, default=5, help="QAOA depth p")
    sp.add_argument("--maxiter", type=int, default=250)
    sp.add_argument("--seed", type=int, default=1234)
    sp.add_argument("--shots", type=int, default=0, help="0 = exact expectation")
    sp.add_argument("--restarts", type=int, default=5)
    sp.add_argument("--no-mixer", action="store_true", help="drop the mixer layers (ablation)")
    sp.add_argument("--record-time", action="store_true", help="store wall_seconds in the result file")
    sub.add_parser("oracle", parents=[common], help="exact max-flow and brute-force references")
    vp = sub.add_parser("verify", parents=[common], help="check a solve result against the oracles")
    vp.add_argument("--result", "-r")
    sub.add_parser("report", parents=[common], help="render a solve result")
    return parser


def main(argv=None) -> int:
    args = vars(build_parser().parse_args(argv))
    try:
        cfg = RunConfig(**args)
        return COMMANDS[cfg.command](cfg)
    except (InputError, ConstructionError, QuboInputError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except ResourceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RESOURCE


if __name__ == "__main__":
    sys.exit(main())
