"""Design documents: a JSON interchange format for quad meshes.

A document stores four corner quads, four hinge couplings and optional
length data. Angle-valued entries may be given either as decimal numbers
or as closed-form strings over a small expression whitelist ("pi/3",
"acos(1/4)", "sqrt(14)/14"). Parsing preserves the original spelling so
that emit -> parse -> emit is byte identical; emission is canonical
(fixed key order, one line per quad or coupling, 17 significant digits
for decimal floats).
"""

from __future__ import annotations

import ast
import json
import math

from .coupling import Coupling, make_coupling
from .errors import InconsistentInput, ParseError
from .projective import ProjectiveReal
from .spherical import SphericalQuad, involution_factors
from .synthesis import (
    LinkageDesign,
    MeshDesign,
    build_central_tetrahedron,
)

FORMAT_NAME = "kokoflex-design"
FORMAT_VERSION = 1

_ANGLE_KEYS = ("alpha", "beta", "gamma", "delta")

# ---------------------------------------------------------------------------
# closed-form expression evaluation


_FUNCTIONS = {
    "acos": math.acos,
    "asin": math.asin,
    "atan": math.atan,
    "cos": math.cos,
    "sin": math.sin,
    "tan": math.tan,
    "sqrt": math.sqrt,
}

_NAMES = {"pi": math.pi, "inf": math.inf}

_BINOPS = {
    ast.Add: lambda a, b: a + b,
    ast.Sub: lambda a, b: a - b,
    ast.Mult: lambda a, b: a * b,
    ast.Div: lambda a, b: a / b,
    ast.Pow: lambda a, b: a ** b,
}


def _eval_node(node):
    if isinstance(node, ast.Constant):
        if isinstance(node.value, bool) or not isinstance(node.value, (int, float)):
            raise ParseError(f"unsupported literal {node.value!r}")
        return float(node.value)
    if isinstance(node, ast.Name):
        try:
            return _NAMES[node.id]
        except KeyError:
            raise ParseError(f"unknown name {node.id!r}") from None
    if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.UAdd, ast.USub)):
        inner = _eval_node(node.operand)
        return -inner if isinstance(node.op, ast.USub) else inner
    if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
        left = _eval_node(node.left)
        right = _eval_node(node.right)
        if isinstance(node.op, ast.Pow) and abs(right) > 16:
            raise ParseError("exponent out of range")
        try:
            return _BINOPS[type(node.op)](left, right)
        except ZeroDivisionError:
            raise ParseError("division by zero in expression") from None
    if (
        isinstance(node, ast.Call)
        and isinstance(node.func, ast.Name)
        and node.func.id in _FUNCTIONS
        and not node.keywords
        and len(node.args) == 1
    ):
        arg = _eval_node(node.args[0])
        try:
            return _FUNCTIONS[node.func.id](arg)
        except ValueError:
            raise ParseError(
                f"{node.func.id}() argument {arg!r} out of domain") from None
    raise ParseError("unsupported expression element")


def evaluate_scalar(value) -> float:
    """Evaluate a numeric entry: a number, or a whitelisted expression string.

    Strings may use pi, the functions acos/asin/atan/cos/sin/tan/sqrt,
    and the arithmetic operators + - * / ** with unary minus.
    """
    if isinstance(value, bool):
        raise ParseError("boolean is not a number")
    if isinstance(value, (int, float)):
        return float(value)
    if not isinstance(value, str):
        raise ParseError(f"expected number or string, got {type(value).__name__}")
    text = value.strip()
    if not text:
        raise ParseError("empty expression")
    try:
        tree = ast.parse(text, mode="eval")
    except SyntaxError:
        raise ParseError(f"cannot parse expression {text!r}") from None
    result = _eval_node(tree.body)
    if not isinstance(result, float) or math.isnan(result):
        raise ParseError(f"expression {text!r} does not evaluate to a real number")
    return result


# ---------------------------------------------------------------------------
# closed-form recognition for emission

_FORM_TOL = 4e-16


def _build_forms():
    # priority order: pi fractions, inverse cosines, scaled radicals,
    # plain rationals; within each family smaller denominators first
    forms = []
    for q in range(1, 13):
        for p in range(1, 13):
            if math.gcd(p, q) != 1:
                continue
            val = p * math.pi / q
            if val > 4.0:
                continue
            num = "pi" if p == 1 else f"{p}*pi"
            forms.append((val, num if q == 1 else f"{num}/{q}"))
    for q in range(2, 17):
        for p in range(1, q):
            if math.gcd(p, q) != 1:
                continue
            forms.append((math.acos(p / q), f"acos({p}/{q})"))
            forms.append((math.acos(-p / q), f"acos(-{p}/{q})"))
    for q in range(2, 31):
        if math.isqrt(q) ** 2 == q:
            continue
        forms.append((math.acos(1 / math.sqrt(q)), f"acos(1/sqrt({q}))"))
    for p in range(2, 21):
        if math.isqrt(p) ** 2 == p:
            continue
        for q in range(2, 17):
            if math.sqrt(p) / q >= 1.0:
                continue
            forms.append((math.acos(math.sqrt(p) / q), f"acos(sqrt({p})/{q})"))
    for m in range(2, 31):
        if math.isqrt(m) ** 2 == m:
            continue
        root = math.sqrt(m)
        for k in range(1, 5):
            for n in range(1, 31):
                if math.gcd(k, n) != 1:
                    continue
                num = "sqrt" if k == 1 else f"{k}*sqrt"
                text = f"{num}({m})" if n == 1 else f"{num}({m})/{n}"
                forms.append((k * root / n, text))
    for q in range(2, 21):
        for p in range(1, 8 * q):
            if math.gcd(p, q) != 1:
                continue
            forms.append((p / q, f"{p}/{q}"))
    return tuple(forms)


_FORMS = _build_forms()


def closed_form(value: float) -> str | None:
    """Return a short exact spelling for value, or None.

    Scans a fixed table of pi fractions, inverse cosines, scaled square
    roots and small rationals; the first family that matches within
    4e-16 relative tolerance wins. Only nonzero finite values match.
    """
    if not math.isfinite(value) or value == 0.0:
        return None
    sign = "-" if value < 0 else ""
    mag = abs(value)
    for target, text in _FORMS:
        if abs(mag - target) <= _FORM_TOL * max(1.0, target):
            return sign + text
    return None


# ---------------------------------------------------------------------------
# document validation


def _require(cond: bool, message: str) -> None:
    if not cond:
        raise ParseError(message)


def _check_scalar_entry(value, where: str) -> None:
    _require(
        isinstance(value, (int, float, str)) and not isinstance(value, bool),
        f"{where}: expected number or expression string",
    )
    if isinstance(value, float):
        _require(math.isfinite(value), f"{where}: non-finite number")
    evaluate_scalar(value)  # reject bad expressions early


def validate_document(doc) -> dict:
    """Structurally validate a parsed design document and return it."""
    _require(isinstance(doc, dict), "document is not a JSON object")
    _require(doc.get("format") == FORMAT_NAME,
             f'missing or wrong "format" (expected "{FORMAT_NAME}")')
    _require(doc.get("version") == FORMAT_VERSION,
             f'missing or wrong "version" (expected {FORMAT_VERSION})')
    known = {"format", "version", "metadata", "quads", "couplings", "lengths"}
    for key in doc:
        _require(key in known, f"unknown top-level key {key!r}")

    quads = doc.get("quads")
    _require(isinstance(quads, list) and len(quads) == 4,
             '"quads" must be a list of four objects')
    for i, quad in enumerate(quads):
        _require(isinstance(quad, dict), f"quads[{i}] is not an object")
        _require(set(quad) == set(_ANGLE_KEYS),
                 f"quads[{i}] must have exactly the keys alpha, beta, gamma, delta")
        for key in _ANGLE_KEYS:
            _check_scalar_entry(quad[key], f"quads[{i}].{key}")

    couplings = doc.get("couplings")
    _require(isinstance(couplings, list) and len(couplings) == 4,
             '"couplings" must be a list of four objects')
    for i, cp in enumerate(couplings):
        _require(isinstance(cp, dict), f"couplings[{i}] is not an object")
        _require(set(cp) <= {"t", "F", "tau", "zeta"},
                 f"couplings[{i}]: allowed keys are t, F, tau, zeta")
        _require(("t" in cp) != ("F" in cp),
                 f"couplings[{i}] must carry exactly one of t, F")
        _require(("tau" in cp) == ("zeta" in cp),
                 f"couplings[{i}]: tau and zeta must be given together")
        for key in cp:
            _check_scalar_entry(cp[key], f"couplings[{i}].{key}")

    has_tau = ["tau" in cp for cp in couplings]
    _require(all(has_tau) or not any(has_tau),
             "tau/zeta must be present on all four couplings or on none")

    lengths = doc.get("lengths")
    if lengths is not None:
        _require(isinstance(lengths, dict), '"lengths" is not an object')
        _require(set(lengths) <= {"spokes_b", "spokes_c", "base"},
                 '"lengths": allowed keys are spokes_b, spokes_c, base')
        for key, count in (("spokes_b", 4), ("spokes_c", 4), ("base", 2)):
            if key in lengths:
                seq = lengths[key]
                _require(isinstance(seq, list) and len(seq) == count,
                         f"lengths.{key} must be a list of {count} numbers")
                for j, item in enumerate(seq):
                    _check_scalar_entry(item, f"lengths.{key}[{j}]")
                    _require(evaluate_scalar(item) > 0.0,
                             f"lengths.{key}[{j}] must be positive")

    metadata = doc.get("metadata")
    if metadata is not None:
        _require(isinstance(metadata, dict), '"metadata" is not an object')
        for key, value in metadata.items():
            _require(isinstance(key, str) and isinstance(value, str),
                     "metadata entries must map strings to strings")
    return doc


def parse_text(text: str) -> dict:
    """Parse design-file text into a validated document."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc}") from None
    return validate_document(doc)


def parse_file(path) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as handle:
            text = handle.read()
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc.strerror}") from None
    return parse_text(text)


# ---------------------------------------------------------------------------
# document -> design

_T_MATCH_TOL = 1e-9
_TAU_MATCH_TOL = 1e-8


def _coupling_from_entry(entry: dict, index: int, lam_next: float) -> Coupling:
    tau = zeta = None
    if "tau" in entry:
        tau = evaluate_scalar(entry["tau"])
        zeta = evaluate_scalar(entry["zeta"])
    if "F" in entry:
        raw = evaluate_scalar(entry["F"])
        F = ProjectiveReal.infinity() if math.isinf(raw) \
            else ProjectiveReal.from_value(raw)
        if tau is not None:
            stored = ProjectiveReal.from_angle(tau + zeta)
            if F.chordal(stored) > _T_MATCH_TOL:
                raise ParseError(
                    f"couplings[{index}]: F disagrees with tan((tau+zeta)/2)")
            F = stored
        return make_coupling(F, lambda_next=lam_next, tau=tau, zeta=zeta)
    raw_t = evaluate_scalar(entry["t"])
    principal = 0.5 * math.pi if math.isinf(raw_t) else math.atan(raw_t)
    if tau is not None:
        # the stored t carries the full precision; tau+zeta only picks
        # which branch of the half angle it means
        target = tau + zeta
        whole_turns = round((target - principal) / math.pi)
        angle = principal + whole_turns * math.pi
        if abs(angle - target) > _T_MATCH_TOL:
            raise ParseError(
                f"couplings[{index}]: t disagrees with tan(tau+zeta)")
        return make_coupling(ProjectiveReal.from_angle(angle),
                             lambda_next=lam_next, tau=tau, zeta=zeta)
    # no angle split stored: take the principal branch of the half angle
    return make_coupling(ProjectiveReal.from_angle(principal),
                         lambda_next=lam_next)


def to_design(doc: dict):
    """Build a MeshDesign (tau/zeta present) or LinkageDesign from a document.

    When the couplings carry tau/zeta, the central tetrahedron is rebuilt
    from the quads' central angles and the stored base lengths; the stored
    tau values must match the rebuilt embedding.
    """
    quads = []
    for i, entry in enumerate(doc["quads"]):
        angles = [evaluate_scalar(entry[key]) for key in _ANGLE_KEYS]
        try:
            quads.append(SphericalQuad(*angles))
        except InconsistentInput as exc:
            raise ParseError(f"quads[{i}]: {exc}") from None
    quads = tuple(quads)

    lams = []
    for i, quad in enumerate(quads):
        try:
            factors = involution_factors(quad)
        except InconsistentInput as exc:
            raise ParseError(f"quads[{i}]: {exc}") from None
        lams.append(factors.lam if factors.lam is not None else -1.0)

    try:
        couplings = tuple(
            _coupling_from_entry(entry, i, lams[i])
            for i, entry in enumerate(doc["couplings"])
        )
    except InconsistentInput as exc:
        raise ParseError(f"couplings: {exc}") from None

    lengths = doc.get("lengths") or {}
    spokes_b = tuple(evaluate_scalar(v) for v in lengths.get("spokes_b", (1.0,) * 4))
    spokes_c = tuple(evaluate_scalar(v) for v in lengths.get("spokes_c", (1.0,) * 4))
    base = tuple(evaluate_scalar(v) for v in lengths.get("base", (1.0, 1.0)))

    if couplings[0].tau is None:
        return LinkageDesign(quads, couplings)

    deltas = tuple(q.delta for q in quads)
    try:
        vertices, taus = build_central_tetrahedron(deltas, base_lengths=base)
    except InconsistentInput as exc:
        raise ParseError(f"no central embedding: {exc}") from None
    for i in range(4):
        if abs(taus[i] - couplings[i].tau) > _TAU_MATCH_TOL:
            raise ParseError(
                f"couplings[{i}].tau does not match the central embedding "
                f"(stored {couplings[i].tau!r}, rebuilt {taus[i]!r})")
    try:
        return MeshDesign(quads, couplings, vertices,
                          spokes_b=spokes_b, spokes_c=spokes_c)
    except InconsistentInput as exc:
        raise ParseError(str(exc)) from None


# ---------------------------------------------------------------------------
# design -> document


def _render_value(value: float):
    form = closed_form(value)
    if form is not None:
        return form
    if value == int(value) and abs(value) < 1e15:
        return int(value)
    return value


def _length_entry(value: float):
    if value == int(value) and abs(value) < 1e15:
        return int(value)
    return value


def from_design(design, metadata: dict | None = None) -> dict:
    """Serialize a MeshDesign or LinkageDesign into a document.

    Angle entries are rendered through the closed-form recognizer, so
    exact constructions round trip as expressions rather than decimals.
    """
    doc = {"format": FORMAT_NAME, "version": FORMAT_VERSION}
    if metadata:
        doc["metadata"] = {str(k): str(v) for k, v in metadata.items()}
    doc["quads"] = [
        {key: _render_value(getattr(quad, key)) for key in _ANGLE_KEYS}
        for quad in design.quads
    ]
    entries = []
    for cp in design.couplings:
        t = cp.t_value
        entry = {}
        # without tau/zeta a finite t cannot pin the half-angle branch,
        # so bare couplings always store F
        if cp.tau is not None and math.isfinite(t):
            entry["t"] = _render_value(t)
        else:
            entry["F"] = "inf" if cp.F.is_infinite else _render_value(cp.F.value)
        if cp.tau is not None:
            entry["tau"] = _render_value(cp.tau)
            entry["zeta"] = _render_value(cp.zeta)
        entries.append(entry)
    doc["couplings"] = entries
    if isinstance(design, MeshDesign):
        verts = design.vertices
        base = (
            math.dist(verts[1], verts[0]),
            math.dist(verts[3], verts[0]),
        )
        doc["lengths"] = {
            "spokes_b": [_length_entry(v) for v in design.spokes_b],
            "spokes_c": [_length_entry(v) for v in design.spokes_c],
            "base": [_length_entry(v) for v in base],
        }
    return validate_document(doc)


# ---------------------------------------------------------------------------
# canonical emission


def _json_scalar(value) -> str:
    if isinstance(value, str):
        return json.dumps(value)
    if isinstance(value, int):
        return str(value)
    text = format(value, ".17g")
    # keep the token a JSON number
    if "." not in text and "e" not in text and "E" not in text:
        text += ".0"
    return text


def _inline_object(entry: dict, key_order) -> str:
    parts = [f'"{key}": {_json_scalar(entry[key])}'
             for key in key_order if key in entry]
    return "{" + ", ".join(parts) + "}"


def emit_text(doc: dict) -> str:
    """Render a validated document in canonical form."""
    validate_document(doc)
    lines = ["{"]
    lines.append(f'  "format": {json.dumps(doc["format"])},')
    lines.append(f'  "version": {doc["version"]},')
    metadata = doc.get("metadata")
    if metadata:
        lines.append('  "metadata": {')
        items = sorted(metadata.items())
        for i, (key, value) in enumerate(items):
            comma = "," if i + 1 < len(items) else ""
            lines.append(f"    {json.dumps(key)}: {json.dumps(value)}{comma}")
        lines.append("  },")
    lines.append('  "quads": [')
    for i, quad in enumerate(doc["quads"]):
        comma = "," if i < 3 else ""
        lines.append(f"    {_inline_object(quad, _ANGLE_KEYS)}{comma}")
    lines.append("  ],")
    closing = "," if doc.get("lengths") else ""
    lines.append('  "couplings": [')
    for i, cp in enumerate(doc["couplings"]):
        comma = "," if i < 3 else ""
        lines.append(f'    {_inline_object(cp, ("t", "F", "tau", "zeta"))}{comma}')
    lines.append(f"  ]{closing}")
    lengths = doc.get("lengths")
    if lengths:
        lines.append('  "lengths": {')
        keys = [k for k in ("spokes_b", "spokes_c", "base") if k in lengths]
        for i, key in enumerate(keys):
            comma = "," if i + 1 < len(keys) else ""
            body = ", ".join(_json_scalar(v) for v in lengths[key])
            lines.append(f'    "{key}": [{body}]{comma}')
        lines.append("  }")
    lines.append("}")
    return "\n".join(lines) + "\n"


def emit_file(doc: dict, path) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        handle.write(emit_text(doc))
