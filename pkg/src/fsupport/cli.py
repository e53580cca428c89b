"""``fsupport`` command line: compute supports or run the degeneration oracle."""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Any, Sequence

import jsonschema

from . import __version__
from .cech import CechContext, oracle_total_vs_row
from .chains import ChainConfig
from .errors import BudgetExceeded, FSupportError, UnstabilizedChain, ValidationError
from .groebner import _current_budget, transcript_scope
from .ring import RingSpec
from .support import DegreeResult, ProblemSpec, supp_lc_ci

EXIT_OK = 0
EXIT_INTERNAL = 1
EXIT_VALIDATION = 2
EXIT_UNSTABILIZED = 3
EXIT_BUDGET = 4
EXIT_MISMATCH = 5

PROBLEM_SCHEMA: dict[str, Any] = {
    "type": "object",
    "additionalProperties": False,
    "required": ["p", "vars", "I", "f"],
    "properties": {
        "p": {"type": "integer", "minimum": 2},
        "vars": {
            "type": "array",
            "items": {"type": "string", "pattern": "^[A-Za-z][A-Za-z0-9_]*$"},
            "minItems": 1,
            "uniqueItems": True,
        },
        "I": {"type": "array", "items": {"type": "string"}, "minItems": 1},
        "f": {"type": "array", "items": {"type": "string"}, "minItems": 2, "maxItems": 2},
        "degrees": {
            "oneOf": [
                {"const": "all"},
                {"type": "array", "items": {"type": "integer"}, "uniqueItems": True},
            ]
        },
        "limits": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "e_max": {"type": "integer", "minimum": 1},
                "j_max": {"type": "integer", "minimum": 1},
                "stab_window": {"type": "integer", "minimum": 1},
            },
        },
        "order": {"enum": ["grevlex", "grlex", "lex"]},
    },
}


def load_problem(path: str) -> tuple[ProblemSpec, dict]:
    """Read, schema-check and build a problem; raises ValidationError."""
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ValidationError(f"cannot read {path}: {exc.strerror}") from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"invalid JSON: {exc.msg} at line {exc.lineno}") from None
    try:
        jsonschema.validate(data, PROBLEM_SCHEMA)
    except jsonschema.ValidationError as exc:
        where = "/".join(str(x) for x in exc.absolute_path) or "<root>"
        raise ValidationError(f"schema violation at {where}: {exc.message}") from None
    ring = RingSpec(data["p"], tuple(data["vars"]), data.get("order", "grevlex"))
    limits = data.get("limits", {})
    defaults = ChainConfig()
    cfg = ChainConfig(
        stab_window=limits.get("stab_window", defaults.stab_window),
        hard_cap=limits.get("e_max", defaults.hard_cap),
        j_cap=limits.get("j_max"),
    )
    g = tuple(ring.parse(s) for s in data["I"])
    f = tuple(ring.parse(s) for s in data["f"])
    degrees = data.get("degrees", "all")
    spec = ProblemSpec(ring, g, f, None if degrees == "all" else tuple(degrees), cfg)
    return spec, data


def _degree_json(d: DegreeResult) -> dict:
    pieces = {}
    for name, s in d.pieces.items():
        pieces[name] = {"generators": s.generators(), "empty": s.is_empty(), "certified": s.certified}
    out = {
        "k": d.k,
        "support_generators": d.support.generators(),
        "empty": d.empty,
        "pieces": pieces,
        "certified": d.certified,
        "violations": d.support.provenance.violations,
        "wall_ms": round(d.wall_ms, 3),
    }
    if d.note:
        out["note"] = d.note
    return out


def _environment(spec: ProblemSpec) -> dict:
    return {
        "version": __version__,
        "seed": None,
        "limits": {
            "e_max": spec.cfg.hard_cap,
            "j_max": spec.cfg.power_cap,
            "stab_window": spec.cfg.stab_window,
            "certify": spec.cfg.certify,
            "s_pair_budget": _current_budget(),
        },
    }


def _text_report(result: dict) -> str:
    lines = [f"fsupport {result['environment']['version']}  ring F_{result['input']['p']}[{', '.join(result['input']['vars'])}]"]
    lines.append(f"I = ({', '.join(result['input']['I'])})   f = ({', '.join(result['input']['f'])})")
    for d in result["degrees"]:
        sup = "empty" if d["empty"] else "V(" + ", ".join(d["support_generators"]) + ")"
        flag = "" if d["certified"] else "  [heuristic stop not fully probed]"
        lines.append(f"k={d['k']}: {sup}{flag}")
        for name, piece in d["pieces"].items():
            ps = "empty" if piece["empty"] else "V(" + ", ".join(piece["generators"]) + ")"
            lines.append(f"    {name}: {ps}")
        if "note" in d:
            lines.append(f"    note: {d['note']}")
    return "\n".join(lines) + "\n"


def _emit(text: str, output: str | None) -> None:
    if output:
        Path(output).write_text(text)
    else:
        sys.stdout.write(text)


def _fail(exc: FSupportError, code: int, output: str | None) -> int:
    payload = {"error": exc.to_dict()}
    print(f"fsupport: {exc.kind}: {exc}", file=sys.stderr)
    _emit(json.dumps(payload, indent=2, sort_keys=True) + "\n", output)
    return code


def _code_for(exc: FSupportError) -> int:
    if isinstance(exc, ValidationError):
        return EXIT_VALIDATION
    if isinstance(exc, UnstabilizedChain):
        return EXIT_UNSTABILIZED
    if isinstance(exc, BudgetExceeded):
        return EXIT_BUDGET
    return EXIT_INTERNAL


def run_compute(args: argparse.Namespace) -> int:
    try:
        spec, data = load_problem(args.input)
        ctx = CechContext(spec.g, spec.cfg)
        degrees = []
        for k in spec.requested_degrees():
            if args.dump_gb:
                with transcript_scope() as records:
                    d = supp_lc_ci(spec, k, ctx)
                dump = Path(args.dump_gb)
                dump.mkdir(parents=True, exist_ok=True)
                (dump / f"degree_{k}.txt").write_text("\n\n".join(records) + "\n")
            else:
                d = supp_lc_ci(spec, k, ctx)
            degrees.append(_degree_json(d))
    except FSupportError as exc:
        return _fail(exc, _code_for(exc), args.output)
    result = {
        "input": {
            "p": spec.ring.p,
            "vars": list(spec.ring.vars),
            "order": spec.ring.order,
            "I": [str(x) for x in spec.g],
            "f": [str(x) for x in spec.f],
        },
        "degrees": degrees,
        "environment": _environment(spec),
    }
    if args.format == "text":
        _emit(_text_report(result), args.output)
    else:
        _emit(json.dumps(result, indent=2, sort_keys=True) + "\n", args.output)
    return EXIT_OK


def run_oracle_check(args: argparse.Namespace) -> int:
    try:
        spec, _ = load_problem(args.input)
        if args.e not in (0, 1):
            raise ValidationError("oracle level --e must be 0 or 1")
        ctx = CechContext(spec.g, spec.cfg)
        rows = []
        failed = None
        for k in range(spec.t + 3):
            rep = oracle_total_vs_row(spec.g, spec.f[0], spec.f[1], args.e, k, ctx=ctx)
            gens_t = [str(c[0]) for c in rep.total.gens]
            gens_r = [str(c[0]) for c in rep.row.gens]
            rows.append({"k": k, "e": args.e, "match": rep.match, "total": gens_t, "row": gens_r})
            if not rep.match and failed is None:
                failed = (k, args.e)
    except FSupportError as exc:
        return _fail(exc, _code_for(exc), args.output)
    report = {"oracle": rows, "all_match": failed is None, "environment": _environment(spec)}
    if failed is not None:
        report["error"] = {"kind": "oracle_mismatch", "k": failed[0], "e": failed[1]}
        print(f"fsupport: oracle mismatch at k={failed[0]}, e={failed[1]}", file=sys.stderr)
    _emit(json.dumps(report, indent=2, sort_keys=True) + "\n", args.output)
    return EXIT_OK if failed is None else EXIT_MISMATCH


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="fsupport", description=__doc__)
    ap.add_argument("--version", action="version", version=f"fsupport {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    c = sub.add_parser("compute", help="supports of H^k_I(R/(f1,f2)) for the requested degrees")
    c.add_argument("--input", required=True)
    c.add_argument("--output")
    c.add_argument("--format", choices=("json", "text"), default="json")
    c.add_argument("--dump-gb", metavar="DIR", help="write Groebner transcripts per degree into DIR")
    c.set_defaults(func=run_compute)

    o = sub.add_parser("oracle", help="compare total-complex and row cohomology at one level")
    o.add_argument("--input", required=True)
    o.add_argument("--e", type=int, default=0)
    o.add_argument("--output")
    o.set_defaults(func=run_oracle_check)
    return ap


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
