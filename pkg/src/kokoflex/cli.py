"""Command-line surface: certify, synthesize and animate mesh designs.

Three subcommands share the design-file format:

    kokoflex check DESIGN [--report FILE]
    kokoflex synthesize PARAMS [--out FILE] [--name NAME]
    kokoflex trace DESIGN [--frames N] [--obj DIR] [--csv FILE] [--triangulate]

Exit codes: 0 on success and full certification, 2 when a structurally
valid design fails certification (or synthesis/tracing fails), 64 for
malformed input files.
"""

from __future__ import annotations

import argparse
import concurrent.futures
import json
import math
import os
import sys

from . import designfile
from .errors import (
    CellFormulaInconsistency,
    KokoflexError,
    ParseError,
    TraceError,
)
from .kinematics import chain_candidates, closure_residual, embed, trace_motion
from .matching import (
    EllipticParams,
    cad_cell_sample,
    deltoid_minors_B1,
    deltoid_minors_B2,
    global_existence,
    linear_branch,
    minors,
)
from .projective import ProjectiveReal
from .synthesis import MeshDesign, assemble_design

EXIT_OK = 0
EXIT_UNCERTIFIED = 2
EXIT_PARSE = 64

MINOR_TOL = 1e-8
PROBE_TOL = 1e-6
PROBE_FRAMES = 32

_MINOR_NAMES = ("p12", "p13", "p14", "p23", "p24", "p34")

_CASE_NAMES = {
    1: "all-negative",
    2: "one-positive",
    3: "adjacent-positive-pair",
    4: "opposite-positive-pair",
    5: "mostly-positive",
}


def _num(value):
    value = float(value)
    if math.isfinite(value):
        return value
    return format(value, "g")  # "inf" / "-inf" as strings


# ---------------------------------------------------------------------------
# certification report


def _orthodiagonal_section(design) -> dict:
    residuals = []
    for quad in design.quads:
        residuals.append(abs(
            math.cos(quad.alpha) * math.cos(quad.gamma)
            - math.cos(quad.beta) * math.cos(quad.delta)))
    return {
        "residuals": [float(r) for r in residuals],
        "ok": max(residuals) <= 1e-9,
    }


def _involution_section(design) -> list:
    out = []
    for f in design.factors():
        out.append({
            "kind": f.kind,
            "lam": None if f.lam is None else float(f.lam),
            "mu": None if f.mu is None else float(f.mu),
            "nu": None if f.nu is None else float(f.nu),
            "xi": None if f.xi is None else float(f.xi),
            "n": None if f.n is None else int(f.n),
        })
    return out


def _minor_section(design, kinds, notes) -> dict | None:
    if all(k == "elliptic" for k in kinds):
        mv = minors(design.elliptic_params())
        values = [float(v) for v in mv.as_tuple()]
        system = "elliptic"
    elif (kinds[0] == "elliptic" and kinds[3] == "elliptic"
          and kinds[1] != "elliptic" and kinds[2] != "elliptic"):
        f = design.factors()
        cps = design.couplings
        args = (
            f[0].nu, f[1].n * f[1].xi, f[2].n * f[2].xi, f[3].nu,
            cps[0].t_value, cps[1].t_value, cps[2].F.value, cps[3].t_value,
        )
        if any(not math.isfinite(a) for a in args):
            notes.append("minor system needs finite offsets on hinges 1, 2, 4 "
                         "and a finite apex half-offset on hinge 3")
            return None
        if kinds[1] == "deltoid" and kinds[2] == "deltoid":
            values = list(deltoid_minors_B1(*args))
        elif kinds[1] == "antideltoid" and kinds[2] == "antideltoid":
            values = list(deltoid_minors_B1(*args, antideltoid=True))
        elif kinds[1] == "deltoid" and kinds[2] == "antideltoid":
            values = list(deltoid_minors_B2(*args))
        else:
            notes.append("no minor system for an antideltoid-deltoid middle pair")
            return None
        values = [float(v) for v in values]
        system = "deltoid"
    else:
        notes.append("no minor system for this arrangement of quad kinds")
        return None
    first_failing = None
    for name, value in zip(_MINOR_NAMES, values):
        if abs(value) > MINOR_TOL:
            first_failing = name
            break
    if first_failing is not None:
        index = _MINOR_NAMES.index(first_failing)
        notes.append(
            f"first failing minor {first_failing} = {values[index]:.6e}")
    return {
        "system": system,
        "values": values,
        "max_abs": max(abs(v) for v in values),
        "tol": MINOR_TOL,
        "ok": first_failing is None,
        "first_failing": first_failing,
    }


def _existence_section(design, kinds) -> dict | None:
    if not all(k == "elliptic" for k in kinds):
        return None
    report = global_existence(design.elliptic_params())
    return {
        "local_ok": [bool(v) for v in report.local_ok],
        "case": int(report.case),
        "case_name": _CASE_NAMES[report.case],
        "global_ok": bool(report.global_ok),
        "note": report.note,
    }


def _frame0_from_state(theta, state, corner) -> dict:
    return {
        "theta": float(theta),
        "x1": _num(state.x[0].value),
        "phi": [float(v) for v in state.phi],
        "psi": [float(v) for v in state.psi],
        "closure_residual": float(state.residual),
        "max_corner_deviation": corner,
    }


def _probe_section(design, notes) -> dict | None:
    if isinstance(design, MeshDesign):
        try:
            frames = trace_motion(design, frames=PROBE_FRAMES,
                                  probe_tol=PROBE_TOL)
        except (TraceError, KokoflexError) as exc:
            notes.append(f"probe trace failed: {exc}")
            return None
        worst_close = max(f.closure_residual for f in frames)
        worst_corner = max(f.max_corner_deviation for f in frames)
        head = frames[0]
        return {
            "frames": len(frames),
            "max_closure_residual": float(worst_close),
            "max_corner_deviation": float(worst_corner),
            "tol": PROBE_TOL,
            "ok": worst_close <= PROBE_TOL and worst_corner <= PROBE_TOL,
            "frame0": _frame0_from_state(
                head.theta, head.state, float(head.max_corner_deviation)),
        }
    # linkage: closure scan of the bare chain on a uniform angle grid
    step = math.pi / PROBE_FRAMES
    residuals = []
    for j in range(PROBE_FRAMES):
        theta = -0.5 * math.pi + (j + 0.5) * step
        residuals.append(closure_residual(
            design, ProjectiveReal.from_angle(2.0 * theta)))
    bad = sum(1 for r in residuals if not math.isfinite(r))
    if bad:
        notes.append(f"chain has no real solution at {bad} of "
                     f"{PROBE_FRAMES} probe values")
        return None
    theta0 = -0.5 * math.pi + 0.5 * step
    cands = chain_candidates(design, ProjectiveReal.from_angle(2.0 * theta0))
    state = min(cands, key=lambda c: c.residual)
    return {
        "frames": PROBE_FRAMES,
        "max_closure_residual": float(max(residuals)),
        "max_corner_deviation": None,
        "tol": PROBE_TOL,
        "ok": max(residuals) <= PROBE_TOL,
        "frame0": _frame0_from_state(theta0, state, None),
    }


def _summary(kinds, minor_sec, existence, probe) -> str:
    matched = minor_sec is not None and minor_sec["ok"]
    if all(k == "elliptic" for k in kinds):
        base = "elliptic OI" if matched else "elliptic, not OI-matched"
    elif minor_sec is not None:
        base = "deltoid-coupled OI" if matched \
            else "deltoid-coupled, not OI-matched"
    else:
        base = "unclassified chain"
    parts = [base]
    if existence is not None:
        parts.append(f"case: {existence['case_name']}")
    flexes = (probe is not None and probe["ok"]
              and (existence is None or existence["global_ok"]))
    parts.append("flexible" if flexes else "does not flex")
    return ", ".join(parts)


def certification_report(design, label: str = "") -> dict:
    """Full machine-readable certification of a parsed design."""
    kinds = list(design.classifications())
    notes: list = []
    orth = _orthodiagonal_section(design)
    minor_sec = _minor_section(design, kinds, notes)
    existence = _existence_section(design, kinds)
    probe = _probe_section(design, notes)
    certified = (
        orth["ok"]
        and minor_sec is not None and minor_sec["ok"]
        and (existence is None or existence["global_ok"])
        and probe is not None and probe["ok"]
    )
    return {
        "format": "kokoflex-report",
        "version": 1,
        "design": label,
        "kind": "mesh" if isinstance(design, MeshDesign) else "linkage",
        "summary": _summary(kinds, minor_sec, existence, probe),
        "orthodiagonal": orth,
        "classification": kinds,
        "involutions": _involution_section(design),
        "minors": minor_sec,
        "existence": existence,
        "probe": probe,
        "notes": notes,
        "certified": certified,
    }


def cmd_check(args) -> int:
    try:
        doc = designfile.parse_file(args.design)
        design = designfile.to_design(doc)
    except ParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    report = certification_report(design, label=os.fspath(args.design))
    text = json.dumps(report, indent=2) + "\n"
    if args.report:
        with open(args.report, "w", encoding="utf-8") as handle:
            handle.write(text)
    else:
        sys.stdout.write(text)
    if not report["certified"]:
        print(f"not certified: {report['summary']}", file=sys.stderr)
        for note in report["notes"]:
            print(f"note: {note}", file=sys.stderr)
        return EXIT_UNCERTIFIED
    return EXIT_OK


# ---------------------------------------------------------------------------
# synthesis

_PARAM_KEYS = {"nu", "t", "t1", "t3", "nu2", "nu4", "lam", "mu", "branch",
               "name", "lengths"}


def _scalar_list(params, key, count) -> tuple:
    seq = params[key]
    if not isinstance(seq, list) or len(seq) != count:
        raise ParseError(f'"{key}" must be a list of {count} values')
    return tuple(designfile.evaluate_scalar(v) for v in seq)


def _seed_params(params) -> EllipticParams:
    """Interpret a synthesis seed: full offsets, a linear-branch pair,
    or a cell completion from the two even squared factors."""
    for key in params:
        if key not in _PARAM_KEYS:
            raise ParseError(f"unknown parameter {key!r}")
    lam = _scalar_list(params, "lam", 4) if "lam" in params else (-1.0,) * 4
    mu = _scalar_list(params, "mu", 4) if "mu" in params else (-1.0,) * 4

    if "nu" in params and "t" in params:
        nu = _scalar_list(params, "nu", 4)
        t = _scalar_list(params, "t", 4)
    elif "nu" in params and "t1" in params and "t3" in params:
        branch = params.get("branch", "linear")
        if branch != "linear":
            raise ParseError(f"unknown branch {branch!r}")
        nu = _scalar_list(params, "nu", 4)
        t1 = designfile.evaluate_scalar(params["t1"])
        t3 = designfile.evaluate_scalar(params["t3"])
        t2, t4, _p23, _p24 = linear_branch(nu, t1, t3)
        t = (t1, t2, t3, t4)
    elif all(k in params for k in ("nu2", "nu4", "t1", "t3")):
        nu2 = designfile.evaluate_scalar(params["nu2"])
        nu4 = designfile.evaluate_scalar(params["nu4"])
        t1 = designfile.evaluate_scalar(params["t1"])
        t3 = designfile.evaluate_scalar(params["t3"])
        try:
            nu1, nu3 = cad_cell_sample(nu2, nu4, t1, t3)
        except CellFormulaInconsistency as exc:
            nu1, nu3 = exc.corrected
        nu = (nu1, nu2, nu3, nu4)
        t2, t4, _p23, _p24 = linear_branch(nu, t1, t3)
        t = (t1, t2, t3, t4)
    else:
        raise ParseError(
            "seed must give nu+t, nu+t1+t3, or nu2+nu4+t1+t3")
    return EllipticParams(nu=nu, t=t, lam=lam, mu=mu)


def cmd_synthesize(args) -> int:
    try:
        with open(args.params, "r", encoding="utf-8") as handle:
            params = json.load(handle)
    except OSError as exc:
        print(f"error: cannot read {args.params}: {exc.strerror}",
              file=sys.stderr)
        return EXIT_PARSE
    except json.JSONDecodeError as exc:
        print(f"error: invalid JSON: {exc}", file=sys.stderr)
        return EXIT_PARSE
    if not isinstance(params, dict):
        print("error: parameter file is not a JSON object", file=sys.stderr)
        return EXIT_PARSE
    try:
        seed = _seed_params(params)
    except ParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except KokoflexError as exc:
        print(f"synthesis failed: {exc}", file=sys.stderr)
        return EXIT_UNCERTIFIED
    try:
        design = assemble_design(seed)
    except KokoflexError as exc:
        print(f"synthesis failed: {exc}", file=sys.stderr)
        return EXIT_UNCERTIFIED
    name = args.name or params.get("name") or "synthesized"
    doc = designfile.from_design(design, metadata={"name": str(name)})
    text = designfile.emit_text(doc)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as handle:
            handle.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


# ---------------------------------------------------------------------------
# motion export


def _fmt(value: float) -> str:
    return format(float(value), ".17g")


def _csv_text(frames) -> str:
    lines = ["index,x1,phi1,phi2,phi3,phi4,psi1,psi2,psi3,psi4,"
             "closure_residual,max_corner_deviation"]
    for frame in frames:
        cells = [str(frame.index), _fmt(frame.x1)]
        cells += [_fmt(v) for v in frame.phi]
        cells += [_fmt(v) for v in frame.psi]
        cells += [_fmt(frame.closure_residual),
                  _fmt(frame.max_corner_deviation)]
        lines.append(",".join(cells))
    return "\n".join(lines) + "\n"


def _obj_text(design, frame, triangulate: bool) -> str:
    A, B, C = embed(design, frame.state)
    lines = [f"# kokoflex trace frame {frame.index} "
             f"theta {_fmt(frame.theta)}"]
    for group in (A, B, C):
        for point in group:
            lines.append("v " + " ".join(_fmt(v) for v in point))
    # vertex ids: A_i = 1..4, B_i = 5..8, C_i = 9..12
    if triangulate:
        lines.append("f 1 2 4")
        lines.append("f 2 3 4")
    else:
        lines.append("f 1 2 3 4")
    for h in range(4):
        h1 = (h + 1) % 4
        c, a, a1, b1 = 9 + h, 1 + h, 1 + h1, 5 + h1
        if triangulate:
            lines.append(f"f {c} {a} {a1}")
            lines.append(f"f {c} {a1} {b1}")
        else:
            lines.append(f"f {c} {a} {a1} {b1}")
    for h in range(4):
        lines.append(f"f {5 + h} {1 + h} {9 + h}")
    return "\n".join(lines) + "\n"


def cmd_trace(args) -> int:
    try:
        doc = designfile.parse_file(args.design)
        design = designfile.to_design(doc)
    except ParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    if not isinstance(design, MeshDesign):
        print("error: tracing needs a mesh design with tau/zeta data "
              "for the central embedding", file=sys.stderr)
        return EXIT_UNCERTIFIED
    try:
        frames = trace_motion(design, frames=args.frames, probe_tol=PROBE_TOL)
    except KokoflexError as exc:
        print(f"trace failed: {exc}", file=sys.stderr)
        kinds = design.classifications()
        if all(k == "elliptic" for k in kinds):
            report = global_existence(design.elliptic_params())
            verdict = "admits" if report.global_ok else "does not admit"
            line = (f"existence: case {report.case} "
                    f"({_CASE_NAMES[report.case]}), {verdict} a real motion")
            if report.note:
                line += f" ({report.note})"
            print(line, file=sys.stderr)
        return EXIT_UNCERTIFIED

    if args.csv:
        with open(args.csv, "w", encoding="utf-8", newline="") as handle:
            handle.write(_csv_text(frames))
    if args.obj:
        os.makedirs(args.obj, exist_ok=True)
        width = max(4, len(str(len(frames) - 1)))

        def write_frame(frame):
            name = f"frame_{frame.index:0{width}d}.obj"
            path = os.path.join(args.obj, name)
            with open(path, "w", encoding="utf-8") as handle:
                handle.write(_obj_text(design, frame, args.triangulate))

        with concurrent.futures.ThreadPoolExecutor(max_workers=8) as pool:
            list(pool.map(write_frame, frames))

    worst_close = max(f.closure_residual for f in frames)
    worst_corner = max(f.max_corner_deviation for f in frames)
    print(f"traced {len(frames)} frames; max closure residual "
          f"{worst_close:.3e}; max corner deviation {worst_corner:.3e}")
    return EXIT_OK


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="kokoflex",
        description="Certify, synthesize and animate flexible quad meshes "
                    "of the orthodiagonal involutive type.")
    sub = parser.add_subparsers(dest="command", required=True)

    p_check = sub.add_parser(
        "check", help="certify a design file and emit a JSON report")
    p_check.add_argument("design", help="design file to certify")
    p_check.add_argument("--report", help="write the JSON report here "
                         "instead of stdout")
    p_check.set_defaults(func=cmd_check)

    p_syn = sub.add_parser(
        "synthesize", help="build a design file from seed parameters")
    p_syn.add_argument("params", help="JSON seed parameter file")
    p_syn.add_argument("--out", help="write the design file here "
                       "instead of stdout")
    p_syn.add_argument("--name", help="metadata name for the design")
    p_syn.set_defaults(func=cmd_synthesize)

    p_trace = sub.add_parser(
        "trace", help="trace a design's motion and export frames")
    p_trace.add_argument("design", help="design file to trace")
    p_trace.add_argument("--frames", type=int, default=200,
                         help="number of motion samples (default 200)")
    p_trace.add_argument("--obj", metavar="DIR",
                         help="write one OBJ file per frame into DIR")
    p_trace.add_argument("--csv", metavar="FILE",
                         help="write the fold-angle table to FILE")
    p_trace.add_argument("--triangulate", action="store_true",
                         help="split quad faces along their diagonals")
    p_trace.set_defaults(func=cmd_trace)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except KokoflexError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_UNCERTIFIED


if __name__ == "__main__":
    sys.exit(main())
