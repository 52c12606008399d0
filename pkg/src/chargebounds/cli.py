"""``charge-bounds``: per-level sup/inf brackets for a set expression.

Exit codes: 0 success, 2 expression or argument error, 3 resource cap hit,
1 internal error.  Rationals print as ``num/den``; ``--approx`` adds
decimal columns that are for reading only.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import sys
from dataclasses import dataclass
from fractions import Fraction
from typing import List, Optional, Sequence, Tuple, Union

from . import bounds
from .errors import ChargeBoundsError, ParseError, ResourceError
from .numtheory import DEFAULT_LEVEL_CAP
from .rational_lp import rational_str

log = logging.getLogger("chargebounds")

COLUMNS = ("level", "primorial", "upper_sup", "lower_sup", "lower_inf", "upper_inf")
BOUND_COLUMNS = COLUMNS[2:]
EXIT_OK, EXIT_INTERNAL, EXIT_PARSE, EXIT_RESOURCE = 0, 1, 2, 3


@dataclass(frozen=True)
class RunConfig:
    expression: str
    max_level: int = 4
    family: Union[str, Tuple[int, ...]] = "pr"
    format: str = "text"
    emit_certificates: bool = False
    emit_witnesses: bool = False
    approx: bool = False
    level_cap: int = DEFAULT_LEVEL_CAP
    cap_rows: int = bounds.LP_ROW_CAP

    def __post_init__(self):
        if self.max_level < 1:
            raise ValueError("max_level must be >= 1")
        if self.format not in ("text", "json", "csv"):
            raise ValueError(f"unknown format {self.format!r}")


def _approx(q: Fraction) -> str:
    return f"{float(q):.6f}"


def _lp_vars(ub: bounds.UpperBound) -> List[Tuple[int, int]]:
    # LP columns are (m, j) in family order; |objective| is 1/m per column
    moduli = list(dict.fromkeys(abs(c).denominator for c in ub.problem.objective))
    return bounds.lp_variables(bounds.ConstraintFamily(tuple(moduli), "custom"))


def _upper_json(ub: bounds.UpperBound, certificates: bool) -> dict:
    out = {"value": rational_str(ub.value), "source": ub.source}
    if certificates and ub.solution is not None:
        out["certificate_ok"] = ub.solution.certificate_ok
        out["pivots"] = ub.solution.pivots
        out["alpha"] = [{"modulus": m, "residue": j, "value": rational_str(v)}
                        for (m, j), v in zip(_lp_vars(ub), ub.solution.primal) if v]
        out["dual"] = [{"shift": s, "value": rational_str(v)}
                       for s, v in enumerate(ub.solution.dual) if v]
    return out


def _lower_json(lo: bounds.LowerBound, witnesses: bool) -> dict:
    out = {"value": rational_str(lo.value), "method": lo.method, "count": lo.count}
    if witnesses and lo.witness is not None:
        out["witness"] = lo.witness.to_pairs()
    return out


def report_rows(report: bounds.BoundsReport) -> List[dict]:
    return [{"level": lb.n, "primorial": lb.primorial,
             **{c: getattr(lb, c) for c in BOUND_COLUMNS}} for lb in report.levels]


def render_json(report: bounds.BoundsReport, cfg: RunConfig) -> str:
    levels = []
    for lb, row in zip(report.levels, report_rows(report)):
        entry = {"level": row["level"], "primorial": row["primorial"]}
        for c in BOUND_COLUMNS:
            entry[c] = rational_str(row[c])
        if cfg.approx:
            entry["approx_non_authoritative"] = {c: _approx(row[c]) for c in BOUND_COLUMNS}
        if cfg.emit_certificates or cfg.emit_witnesses:
            entry["set"] = {"upper": _upper_json(lb.upper, cfg.emit_certificates),
                            "lower": _lower_json(lb.lower, cfg.emit_witnesses)}
            entry["complement"] = {
                "upper": _upper_json(lb.complement_upper, cfg.emit_certificates),
                "lower": _lower_json(lb.complement_lower, cfg.emit_witnesses)}
        levels.append(entry)
    doc = {"expression": report.expression, "family": report.family, "levels": levels}
    return json.dumps(doc, indent=2) + "\n"


def render_csv(report: bounds.BoundsReport, cfg: RunConfig) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    header = list(COLUMNS)
    if cfg.approx:
        header += [f"{c}_approx" for c in BOUND_COLUMNS]
    w.writerow(header)
    for row in report_rows(report):
        line = [row["level"], row["primorial"]] + [rational_str(row[c]) for c in BOUND_COLUMNS]
        if cfg.approx:
            line += [_approx(row[c]) for c in BOUND_COLUMNS]
        w.writerow(line)
    return buf.getvalue()


def render_text(report: bounds.BoundsReport, cfg: RunConfig) -> str:
    header = list(COLUMNS)
    rows = []
    for lb, row in zip(report.levels, report_rows(report)):
        line = [str(row["level"]), str(row["primorial"])] + [rational_str(row[c]) for c in BOUND_COLUMNS]
        if cfg.approx:
            line.append(" ".join(_approx(row[c]) for c in BOUND_COLUMNS))
        rows.append(line)
    if cfg.approx:
        header.append("approx (non-authoritative)")
    widths = [max(len(r[k]) for r in rows + [header]) for k in range(len(header))]
    out = [f"expression: {report.expression}", f"family: {report.family}", ""]
    out.append("  ".join(h.ljust(w) for h, w in zip(header, widths)).rstrip())
    for r in rows:
        out.append("  ".join(v.ljust(w) for v, w in zip(r, widths)).rstrip())
    if cfg.emit_certificates or cfg.emit_witnesses:
        out.append("")
        for lb in report.levels:
            for name, ub, lo in (("set", lb.upper, lb.lower),
                                 ("complement", lb.complement_upper, lb.complement_lower)):
                parts = [f"level {lb.n} {name}:"]
                if cfg.emit_certificates:
                    ok = ub.certificate_ok if ub.solution is not None else None
                    parts.append(f"upper {ub.source} certificate_ok={ok}")
                if cfg.emit_witnesses:
                    parts.append(f"lower {lo.method} count={lo.count}")
                out.append(" ".join(parts))
    return "\n".join(out) + "\n"


RENDERERS = {"text": render_text, "json": render_json, "csv": render_csv}


def run(cfg: RunConfig, stdout=None, stderr=None) -> int:
    stdout = sys.stdout if stdout is None else stdout
    stderr = sys.stderr if stderr is None else stderr
    try:
        report = bounds.bounds_report(
            cfg.expression, cfg.max_level, family=cfg.family, level_cap=cfg.level_cap,
            row_cap=cfg.cap_rows)
    except ParseError as e:
        print(f"charge-bounds: parse error: {e}", file=stderr)
        return EXIT_PARSE
    except ResourceError as e:
        print(f"charge-bounds: resource cap: {e}", file=stderr)
        return EXIT_RESOURCE
    except ValueError as e:
        print(f"charge-bounds: {e}", file=stderr)
        return EXIT_PARSE
    except ChargeBoundsError as e:
        print(f"charge-bounds: internal error: {e}", file=stderr)
        return EXIT_INTERNAL
    stdout.write(RENDERERS[cfg.format](report, cfg))
    return EXIT_OK


def _family(text: str):
    if text == "pr":
        return "pr"
    try:
        mods = tuple(int(v) for v in text.split(",") if v.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"family must be 'pr' or m1,m2,..., got {text!r}")
    if not mods or any(m < 1 for m in mods):
        raise argparse.ArgumentTypeError("moduli must be positive integers")
    return mods


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="charge-bounds",
        description="Certified bounds on the probability of an integer set under "
                    "charges uniform on prime residue classes.")
    p.add_argument("expression", help="set expression, e.g. 'primes & class(1,4)'")
    p.add_argument("--max-level", type=int, default=4, help="highest level (default 4)")
    p.add_argument("--family", type=_family, default="pr",
                   help="'pr' (default) or a comma list of moduli")
    p.add_argument("--format", choices=("text", "json", "csv"), default="text")
    p.add_argument("--certificates", action="store_true", help="include LP certificates")
    p.add_argument("--witnesses", action="store_true", help="include path-multiset witnesses")
    p.add_argument("--approx", action="store_true",
                   help="add decimal approximations (non-authoritative)")
    p.add_argument("--cap-rows", type=int, default=bounds.LP_ROW_CAP,
                   help="largest LP (rows) to solve; higher levels inherit the upper bound")
    p.add_argument("--level-cap", type=int, default=DEFAULT_LEVEL_CAP,
                   help=f"largest level accepted (default {DEFAULT_LEVEL_CAP})")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        stream=sys.stderr, format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = RunConfig(args.expression, args.max_level, args.family, args.format,
                        args.certificates, args.witnesses, args.approx,
                        args.level_cap, args.cap_rows)
    except ValueError as e:
        print(f"charge-bounds: {e}", file=sys.stderr)
        return EXIT_PARSE
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())
