"""``rigidity-lab`` command line.

Exit status: 0 when every assertion in scope holds, 1 on an assertion failure (a structured JSON
failure report goes to stderr), 2 on usage or input errors.
"""

from __future__ import annotations

import argparse
import csv
import io as _io
import json
import math
import sys
from dataclasses import dataclass, field

import numpy as np

from rigidity_lab import __version__, io
from rigidity_lab.cone import arc, cone_from_normals, polar_cone, same_dihedral_angles
from rigidity_lab.errors import AssertionFailure, InvalidInput, ParseError, RigidityLabError
from rigidity_lab.hyperbolic import mass as hm
from rigidity_lab.hyperbolic.metric import PRESETS
from rigidity_lab.hyperbolic.polyhedron import expanding_box, half_space, polyhedron_from_half_spaces
from rigidity_lab.minimizer import MatrixProblem, problem_cones, solve_incremental, solve_matrix_case
from rigidity_lab.pyramid import build_pyramid, energy
from rigidity_lab.rhombus import audited_instance, dominating_xi_search, gamma_grid_csv, same_angles_not_isometric
from rigidity_lab.trapping import BaseFace, find_trapping_direction, is_trapped
from rigidity_lab.verify import TOLERANCES, SuiteConfig, run_suite

EXIT_OK, EXIT_ASSERTION, EXIT_USAGE = 0, 1, 2
CSV_GRID_RESOLUTION = 64


@dataclass
class RunConfig:
    seed: int = 42
    tolerance_overrides: dict = field(default_factory=dict)
    resolution: int | None = None
    threads: int | str | None = None
    output_format: str | None = None

    def tol(self, name: str) -> float:
        return float(self.tolerance_overrides.get(name, TOLERANCES[name]))

    def fmt(self, default: str = "json") -> str:
        return self.output_format or default


def _parse_tol(text: str) -> tuple[str, float]:
    name, sep, value = text.partition("=")
    if not sep:
        raise argparse.ArgumentTypeError(f"expected name=value, got {text!r}")
    if name not in TOLERANCES:
        raise argparse.ArgumentTypeError(f"unknown tolerance {name!r}; known: {', '.join(sorted(TOLERANCES))}")
    try:
        v = float(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f"tolerance {name} needs a number, got {value!r}") from None
    if not v > 0:
        raise argparse.ArgumentTypeError(f"tolerance {name} must be positive")
    return name, v


def _parse_threads(text: str):
    if text == "auto":
        return "auto"
    try:
        n = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError("threads must be a positive integer or 'auto'") from None
    if n < 1:
        raise argparse.ArgumentTypeError("threads must be a positive integer or 'auto'")
    return n


def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--resolution", type=int, default=None, help="grid resolution override")
    p.add_argument("--tol", type=_parse_tol, action="append", default=[], metavar="NAME=VALUE")
    p.add_argument("--threads", type=_parse_threads, default=None,
                   help="worker threads or 'auto' (falls back to RIGIDITY_LAB_THREADS)")
    p.add_argument("--format", dest="output_format", choices=("json", "csv"), default=None)
    return p


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    parser = argparse.ArgumentParser(prog="rigidity-lab", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("cone", parents=[common], help="edges, dihedral angles and polar of a cone").add_argument("input")
    sub.add_parser("energy", parents=[common], help="pyramid comparison energy").add_argument("input")
    sub.add_parser("minimize", parents=[common], help="energy-decreasing base direction").add_argument("input")
    q = sub.add_parser("quad-cx", parents=[common], help="audited rhombus counterexample")
    q.add_argument("--grid-csv", default=None, help="also write the base-angle grid CSV to this path")
    sub.add_parser("trapping", parents=[common], help="cylinder trapping certificate").add_argument("input")
    sub.add_parser("mass", parents=[common], help="mass flux against the curvature expression").add_argument("input")
    v = sub.add_parser("verify-all", parents=[common], help="run the acceptance suite")
    v.add_argument("--criteria", default=None, help="comma-separated subset, e.g. 1,2,7")
    return parser


# ---------------------------------------------------------------- commands


def _vec(x) -> np.ndarray:
    return np.asarray(x, dtype=float)


def _unit_rows(rows) -> np.ndarray:
    a = _vec(rows)
    return a / np.linalg.norm(a, axis=-1, keepdims=True)


def _cone(doc):
    return cone_from_normals(_vec(doc["normals"]), label=doc.get("label"))


def cmd_cone(args, cfg: RunConfig):
    doc = io.load(args.input, "cone.input")
    c = _cone(doc)
    p = polar_cone(c)
    return io.report("cone.report", {
        "label": c.label, "k": c.k, "normals": c.normals, "edges": c.edges,
        "dihedral_angles": c.dihedral_angles, "polar_normals": p.normals,
        "polar_dihedral_angles": p.dihedral_angles, "gram_b": c.gram().b if c.k == 3 else None,
    })


def cmd_energy(args, cfg: RunConfig):
    doc = io.load(args.input, "pyramid.input")
    c = _cone(doc)
    pyr = build_pyramid(c, _unit_rows(doc["xi"]))
    rep = energy(pyr, io.parse_angles(doc["gamma_ref"], "gamma_ref"))
    scale = pyr.base_area + np.abs(np.cos(rep.gamma_reference)) @ pyr.side_face_areas
    rel = abs(rep.difference) / scale
    if rel > cfg.tol("energy_rel"):
        raise AssertionFailure("energy_routes_agree", rel, f"relative route difference above {cfg.tol('energy_rel')}")
    return io.report("energy.report", {
        "value_direct": rep.value_direct, "value_angle_form": rep.value_angle_form,
        "difference": rep.difference, "gamma_reference": rep.gamma_reference, "gamma": pyr.gamma,
        "base_area": pyr.base_area, "side_face_areas": pyr.side_face_areas,
        "lateral_edge_lengths": pyr.lateral_edge_lengths, "base_edge_lengths": pyr.base_edge_lengths,
        "base_identity_residual": pyr.base_identity_residual(),
    })


def cmd_minimize(args, cfg: RunConfig):
    doc = io.load(args.input, "minimize.input")
    if "b" in doc:
        make = MatrixProblem.normalized if doc.get("normalize", True) else MatrixProblem
        problem = make(_vec(doc["b"]), _vec(doc["b_bar"]), _vec(doc["xi_bar"]))
        r = solve_matrix_case(problem)
        x = r.xi_coords
        norm = abs(x @ problem.G @ x - 1.0)
        if norm > cfg.tol("norm"):
            raise AssertionFailure("xi_G_xi_equals_one", norm)
        if not r.rigid and not r.certificate > 0:
            raise AssertionFailure("certificate_positive", r.certificate)
        if not r.rigid and not r.energy < 0:
            raise AssertionFailure("energy_negative", r.energy)
        body = {"method": "matrix", **r.to_dict(), "gamma": arc(problem_cones(problem)[0].normals, r.xi_vector),
                "gamma_reference": problem.reference_gamma()}
        return io.report("minimizer.result", body)
    c, ref = _cone(doc["cone"]), _cone(doc["reference"])
    xi_bar = _unit_rows(doc["xi_bar"])
    xi = solve_incremental(c, ref, xi_bar)
    g, g_ref = arc(c.normals, xi), arc(ref.normals, xi_bar)
    E = energy(build_pyramid(c, xi), g_ref).value
    rigid = same_dihedral_angles(c, ref)
    if not rigid and not (np.all(g > g_ref) and E < 0):
        raise AssertionFailure("gamma_exceeds_reference", float(np.min(g - g_ref)), f"energy {E:.3e}")
    return io.report("minimizer.result", {
        "method": "incremental", "xi_vector": xi, "case_taken": "Incremental", "certificate": None,
        "energy": E, "rigid": rigid, "gamma": g, "gamma_reference": g_ref,
    })


def cmd_quad_cx(args, cfg: RunConfig):
    inst = audited_instance()
    pair = same_angles_not_isometric((inst.reference, inst.candidate), tol=cfg.tol("angle"))
    resolution = cfg.resolution or 2048
    rep = dominating_xi_search(inst.candidate.cone, (inst.reference.cone, inst.reference_xi),
                               resolution=resolution, threads=cfg.threads)
    gamma_ref = arc(inst.reference.cone.normals, inst.reference_xi)
    grid = gamma_grid_csv(inst.candidate.cone, gamma_ref, CSV_GRID_RESOLUTION)
    if args.grid_csv:
        with open(args.grid_csv, "w", encoding="utf-8", newline="") as fh:
            fh.write(grid)
    if cfg.fmt() == "csv":
        return grid
    doc = io.report("quad_cx.report", {
        "reference": {"beta1": inst.reference.beta1, "beta2": inst.reference.beta2, "xi": inst.reference_xi},
        "candidate": {"beta1": inst.candidate.beta1, "beta2": inst.candidate.beta2},
        "dihedral_angles": inst.candidate.cone.dihedral_angles,
        "max_angle_difference": pair.max_angle_difference, "isometric": pair.isometric,
        "diagonals": pair.diagonals, "diagonal_gap": pair.diagonal_gap, "resolution": resolution,
        "evaluations": rep.evaluations, "witness": rep.witness, "best_point": rep.best_point,
        "worst_deficit": rep.worst_deficit, "slack": rep.slack, "margin_in_slacks": rep.margin_in_slacks,
    })
    if rep.witness is not None or rep.worst_deficit >= -cfg.tol("slack_factor") * rep.slack:
        raise AssertionFailure("deficit_margin", rep.margin_in_slacks, "no certified non-existence", report=doc)
    return doc


def cmd_trapping(args, cfg: RunConfig):
    doc = io.load(args.input, "base_face.input")
    base = BaseFace(_vec(doc["vertices"]), _unit_rows(doc["W"]), io.parse_angles(doc["gamma_ref"], "gamma_ref"))
    if "v" in doc:
        cert, searched, best = is_trapped(base, _vec(doc["v"])), False, None
    else:
        search = find_trapping_direction(base, cfg.resolution or 64)
        v = search.witness if search.witness is not None else search.best_v
        cert, searched, best = is_trapped(base, v), True, search.best_min_slack
    body = {
        "v": cert.v if cert.trapped or not searched else None, "searched": searched, "trapped": cert.trapped,
        "cot_sum": cert.cot_sum, "best_min_slack": best,
        "edges": [{"cos_cylinder": a, "cos_reference": b, "slack": c} for a, b, c in cert.per_edge],
    }
    doc_out = io.report("trapping.certificate", body)
    if cert.trapped and not cert.cot_sum > 0:
        raise AssertionFailure("trapped_implies_positive_cot_sum", cert.cot_sum, report=doc_out)
    return doc_out


def _polyhedra(doc):
    if "half_spaces" in doc:
        planes = []
        for h in doc["half_spaces"]:
            sign = -1.0 if h.get("side", "<=") == ">=" else 1.0
            planes.append(half_space(sign * _vec(h["a"]), sign * float(h["s"])))
        return [(None, polyhedron_from_half_spaces(planes))]
    return [(float(r), expanding_box(math.exp(float(r)))) for r in doc["scales"]]


def cmd_mass(args, cfg: RunConfig):
    doc = io.load(args.input, "polyhedron.input")
    preset = doc.get("preset", "decay")
    if preset not in PRESETS:
        raise ParseError(f"field preset: unknown preset {preset!r}; known: {', '.join(sorted(PRESETS))}")
    metric = PRESETS[preset](float(doc.get("amplitude", 0.1)), float(doc.get("tau", 2.0)))
    rows = []
    for scale, poly in _polyhedra(doc):
        rep = hm.mass_report(metric, poly, scale, atol=1e-7, rtol=1e-10)
        rows.append(rep.to_dict())
    if cfg.fmt("csv") == "csv":
        out = _io.StringIO()
        w = csv.DictWriter(out, fieldnames=list(rows[0]), lineterminator="\n")
        w.writeheader()
        for r in rows:
            w.writerow({k: ("" if v is None else repr(v)) for k, v in r.items()})
        return out.getvalue()
    return io.report("mass.report", {"metric": metric.name, "tau": metric.tau, "rows": rows})


def cmd_verify_all(args, cfg: RunConfig):
    numbers = None
    if args.criteria:
        try:
            numbers = [int(x) for x in args.criteria.split(",")]
        except ValueError:
            raise ParseError(f"--criteria: expected comma-separated integers, got {args.criteria!r}") from None
        if any(not 1 <= n <= 9 for n in numbers):
            raise ParseError("--criteria: criteria are numbered 1 to 9")
    suite = SuiteConfig(cfg.seed, dict(cfg.tolerance_overrides), cfg.resolution, cfg.threads or 1)
    results = run_suite(suite, numbers, echo=lambda line: print(line, file=sys.stderr, flush=True))
    modules = {}
    for r in results:
        m = modules.setdefault(r.module, [0, 0])
        m[0 if r.passed else 1] += 1
    for name, (ok, bad) in modules.items():
        print(f"module {name}: {ok} passed, {bad} failed", file=sys.stderr)
    passed = sum(r.passed for r in results)
    doc = io.report("verify.report", {"seed": cfg.seed, "passed": passed, "failed": len(results) - passed,
                                      "criteria": [r.to_dict() for r in results]})
    if cfg.fmt() == "csv":
        out = _io.StringIO()
        w = csv.writer(out, lineterminator="\n")
        w.writerow(["criterion", "check", "passed", "value", "threshold", "detail"])
        for r in doc["criteria"]:
            for c in r["checks"]:
                w.writerow([r["number"], c["name"], c["passed"], c["value"], c["threshold"], c["detail"]])
        text = out.getvalue()
    else:
        text = doc
    if passed != len(results):
        failed = [r.number for r in results if not r.passed]
        raise AssertionFailure("acceptance_suite", float(len(failed)), f"criteria {failed} failed", report=text)
    return text


COMMANDS = {
    "cone": cmd_cone, "energy": cmd_energy, "minimize": cmd_minimize, "quad-cx": cmd_quad_cx,
    "trapping": cmd_trapping, "mass": cmd_mass, "verify-all": cmd_verify_all,
}


def _emit(out, stream) -> None:
    stream.write(out if isinstance(out, str) else io.dumps(out))


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    cfg = RunConfig(args.seed, dict(args.tol), args.resolution, args.threads, args.output_format)
    try:
        _emit(COMMANDS[args.command](args, cfg), sys.stdout)
        return EXIT_OK
    except AssertionFailure as exc:
        if exc.report is not None:
            _emit(exc.report, sys.stdout)
        failure = {"error": "AssertionFailure", "invariant": exc.name,
                   "margin": exc.margin if math.isfinite(exc.margin) else None, "detail": exc.detail}
        sys.stderr.write(json.dumps(failure, sort_keys=True) + "\n")
        return EXIT_ASSERTION
    except (ParseError, InvalidInput) as exc:
        sys.stderr.write(json.dumps({"error": type(exc).__name__, "detail": str(exc)}, sort_keys=True) + "\n")
        return EXIT_USAGE
    except RigidityLabError as exc:
        sys.stderr.write(json.dumps({"error": type(exc).__name__, "detail": str(exc)}, sort_keys=True) + "\n")
        return EXIT_ASSERTION


if __name__ == "__main__":
    sys.exit(main())
