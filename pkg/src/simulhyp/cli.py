"""Command-line front end.

    simulhyp ball --group "product(free(2),free(3))" --n 4
    simulhyp density --group "product(free(2),free(3))" --actions "cayley(factor=1); cayley(factor=2)" --n 3
    simulhyp find-sh --group ... --actions ... [--qms ...]
    simulhyp find-sc / extension-set / combine-qm / example-4-9

Exit codes: 0 success, 1 verification failure, 2 usage or parse error.
"""

from __future__ import annotations

import argparse
import re
import sys
from dataclasses import dataclass, field, fields
from fractions import Fraction

from . import census as C
from . import construct as K
from .actions import ActionError, action_type
from .grammar import ParseError, parse_action, parse_group, parse_qm, split_list
from .quasimorphisms import QmError, combine_nonvanishing, evaluate
from .reports import digest, to_kv

COMMANDS = ("ball", "density", "find-sh", "find-sc", "extension-set", "combine-qm", "example-4-9")


class VerificationFailure(RuntimeError):
    pass


@dataclass
class RunConfig:
    command: str = ""
    group: str = ""
    actions: list = field(default_factory=list)
    qms: list = field(default_factory=list)
    n: int | None = None
    verify_radius: int | None = None
    seed: int = 0
    budget: int | None = None
    method: str | None = None
    threads: int = 1
    format: str = "table"
    out: str | None = None

    def to_text(self) -> str:
        lines = []
        for f in fields(self):
            v = getattr(self, f.name)
            if v is None or v == [] or v == "":
                continue
            lines.append(f"{f.name.replace('_', '-')} = {'; '.join(v) if isinstance(v, list) else v}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "RunConfig":
        cfg = cls()
        kinds = {f.name: f for f in fields(cls)}
        for lineno, raw in enumerate(text.splitlines(), 1):
            # a comment is a whole line, or "#" after whitespace; busemann(#1) keeps its "#"
            line = re.split(r"(?:^|\s)#", raw, maxsplit=1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ParseError("expected key = value", raw, 0, line=lineno)
            key, val = (x.strip() for x in line.split("=", 1))
            name = key.replace("-", "_")
            if name not in kinds:
                raise ParseError(f"unknown config key {key!r}", raw, 0, line=lineno)
            if name in ("actions", "qms"):
                setattr(cfg, name, split_list(val))
            elif name in ("n", "verify_radius", "seed", "budget", "threads"):
                try:
                    setattr(cfg, name, int(val))
                except ValueError:
                    raise ParseError(f"{key} must be an integer", raw, raw.index("=") + 1, line=lineno) from None
            else:
                setattr(cfg, name, val)
        return cfg

    def hash(self) -> str:
        return digest(self.to_text())


# ---------------------------------------------------------------------------
# Config resolution


def _resolve(cfg: RunConfig):
    if not cfg.group:
        raise ParseError("--group is required", "", 0)
    group = parse_group(cfg.group)
    spaces = [parse_action(group, a) for a in cfg.actions]
    qms = [parse_qm(group, q, spaces) for q in cfg.qms]
    return group, spaces, qms


def _header(cfg: RunConfig) -> str:
    return to_kv("run", {"command": cfg.command, "config_hash": cfg.hash(), "seed": cfg.seed})


def _tsv_comment(cfg: RunConfig) -> str:
    return f"# command={cfg.command} config_hash={cfg.hash()} seed={cfg.seed}\n"


def _rows_table(rows: list[dict], cols: list[str]) -> str:
    cells = [[str(r.get(c, "")) for c in cols] for r in rows]
    width = [max(len(c), *(len(x[i]) for x in cells)) if cells else len(c) for i, c in enumerate(cols)]
    out = ["  ".join(c.rjust(w) for c, w in zip(cols, width))]
    out += ["  ".join(x.rjust(w) for x, w in zip(row, width)) for row in cells]
    return "\n".join(out) + "\n"


TSV_COLUMNS = ["n", "ball_series", "ball_bfs", "hits", "ratio_num", "ratio_den"]


def _emit_rows(cfg: RunConfig, rows: list[dict], table_cols: list[str]) -> str:
    if cfg.format == "tsv":
        body = "\t".join(TSV_COLUMNS) + "\n"
        body += "".join("\t".join(str(r.get(c, "")) for c in TSV_COLUMNS) + "\n" for r in rows)
        return _tsv_comment(cfg) + body
    return _header(cfg) + _rows_table(rows, table_cols)


# ---------------------------------------------------------------------------
# Commands


def cmd_ball(cfg: RunConfig) -> str:
    group = parse_group(cfg.group)
    n = 3 if cfg.n is None else cfg.n
    method = cfg.method or ("series" if C.has_series(group) else "bfs")
    rows = []
    for k in range(n + 1):
        row = {"n": k}
        if method in ("series", "both"):
            row["ball_series"] = C.ball_count(group, k)
        if method in ("bfs", "both"):
            row["ball_bfs"] = C.ball_count(group, k, "bfs", cfg.budget or C.DEFAULT_BUDGET)
        if method not in ("series", "bfs", "both"):
            raise ParseError(f"unknown method {method!r} (series, bfs, both)", method, 0)
        if method == "both" and row["ball_series"] != row["ball_bfs"]:
            raise VerificationFailure(f"series and BFS disagree at n={k}")
        rows.append(row)
    cols = ["n"] + [c for c in ("ball_series", "ball_bfs") if c in rows[0]]
    return _emit_rows(cfg, rows, cols)


def cmd_density(cfg: RunConfig) -> str:
    group, spaces, qms = _resolve(cfg)
    if not spaces and not qms:
        raise ParseError("density needs --actions or --qms", "", 0)
    pred = C.SimulHyperbolic(spaces, qms)
    n = 3 if cfg.n is None else cfg.n
    method = cfg.method or ("factorwise" if pred.factorwise(group) and C.has_series(group) else "enumerate")
    rows = []
    for k in range(n + 1):
        rep = C.density(group, pred, k, method, cfg.budget or C.DEFAULT_BUDGET)
        rows.append({"n": k, "ball_series": rep.ball if C.has_series(group) else "",
                     "ball_bfs": "" if C.has_series(group) else rep.ball, "hits": rep.hits,
                     "ratio_num": rep.ratio.numerator, "ratio_den": rep.ratio.denominator,
                     "ratio": f"{rep.ratio.numerator}/{rep.ratio.denominator}", "method": method})
    return _emit_rows(cfg, rows, ["n", "ball_series" if C.has_series(group) else "ball_bfs", "hits", "ratio",
                                  "method"])


def _check(cert) -> str:
    if not cert.recheck():
        raise VerificationFailure("certificate failed its recheck:\n" + cert.to_text())
    return cert.to_text()


def cmd_find_sh(cfg: RunConfig) -> str:
    group, spaces, qms = _resolve(cfg)
    cert = K.find_simul_hyperbolic(spaces, qms, budget=cfg.budget or 6, verify_radius=cfg.verify_radius or 2,
                                   seed=cfg.seed)
    return _header(cfg) + _check(cert)


def cmd_find_sc(cfg: RunConfig) -> str:
    group, spaces, qms = _resolve(cfg)
    if not spaces:
        raise ParseError("find-sc needs --actions", "", 0)
    cert = K.find_simul_contracting(spaces, seed=cfg.seed)
    return _header(cfg) + _check(cert)


def cmd_extension_set(cfg: RunConfig) -> str:
    group, spaces, qms = _resolve(cfg)
    radius = 4 if cfg.verify_radius is None else cfg.verify_radius
    general = [s for s in spaces if action_type(s).declared == "general"]
    if qms or len(general) != len(spaces):
        ext = K.sh_extension_set(spaces, qms, radius, seed=cfg.seed, threads=cfg.threads)
    else:
        ext = K.sc_extension_set(spaces, radius, seed=cfg.seed, threads=cfg.threads)
    if not ext.passed:
        raise VerificationFailure("extension set failed verification:\n" + ext.to_text())
    extra = {"summary": f"PASS: every g in the ball of radius {radius} ({ext.checked} elements) has f in F "
                        f"with g f in {ext.target}"}
    if C.has_series(group):
        bound = C.density_bound_from_extension_set(ext, group)
        extra["M"] = bound.M
        extra["c"] = f"1/#S^(<={2 * bound.M})"
        extra["c_float"] = f"{float(bound.c):.6e}"
    return _header(cfg) + ext.to_text() + to_kv("density-bound", extra)


def cmd_combine_qm(cfg: RunConfig) -> str:
    group, spaces, qms = _resolve(cfg)
    if not qms:
        raise ParseError("combine-qm needs --qms", "", 0)
    g = combine_nonvanishing(qms, cfg.budget or 4)
    vals = [evaluate(q, g) for q in qms]
    if any(v == 0 for v in vals):
        raise VerificationFailure(f"{g} vanishes on an evaluator")
    return _header(cfg) + to_kv("combine", {"element": g, "values": [f"{q}:{v}" for q, v in zip(qms, vals)],
                                            "verified": True})


def cmd_example_4_9(cfg: RunConfig) -> str:
    n = 20 if cfg.n is None else cfg.n
    bfs = 6 if cfg.verify_radius is None else cfg.verify_radius
    audit = C.example_4_9_report(n, bfs, bfs)
    for r in audit.rows:
        if r.bfs_ball is not None and r.bfs_ball != r.exact_ball:
            raise VerificationFailure(f"BFS and series disagree at n={r.n}")
        if r.nonsh_exhaustive is not None and r.nonsh_exhaustive != r.nonsh_exact:
            raise VerificationFailure(f"exhaustive non-SH count disagrees at n={r.n}")
    if cfg.format == "tsv":
        return _tsv_comment(cfg) + audit.tsv()
    return _header(cfg) + audit.table()


HANDLERS = {
    "ball": cmd_ball, "density": cmd_density, "find-sh": cmd_find_sh, "find-sc": cmd_find_sc,
    "extension-set": cmd_extension_set, "combine-qm": cmd_combine_qm, "example-4-9": cmd_example_4_9,
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"error: {message}", file=sys.stderr)
        raise SystemExit(2)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="simulhyp", description="simultaneously hyperbolic elements: searches and censuses")
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--group")
    p.add_argument("--actions", help="semicolon separated action list")
    p.add_argument("--qms", help="semicolon separated evaluator list")
    p.add_argument("--n", type=int)
    p.add_argument("--verify-radius", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--budget", type=int)
    p.add_argument("--method")
    p.add_argument("--threads", type=int)
    p.add_argument("--format", choices=("table", "tsv"))
    p.add_argument("--out")
    p.add_argument("--config", help="file of key = value lines with the same grammar")
    return p


def config_from_args(argv: list[str]) -> RunConfig:
    args = build_parser().parse_args(argv)
    cfg = RunConfig()
    if args.config:
        with open(args.config) as fh:
            cfg = RunConfig.from_text(fh.read())
    cfg.command = args.command
    for name in ("group", "n", "verify_radius", "seed", "budget", "method", "threads", "format", "out"):
        v = getattr(args, name)
        if v is not None:
            setattr(cfg, name, v)
    if args.actions is not None:
        cfg.actions = split_list(args.actions)
    if args.qms is not None:
        cfg.qms = split_list(args.qms)
    return cfg


def main(argv: list[str] | None = None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    try:
        cfg = config_from_args(argv)
        text = HANDLERS[cfg.command](cfg)
    except SystemExit as e:
        return int(e.code or 0)
    except (ParseError, QmError, ActionError, C.UnsupportedSeries, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except (VerificationFailure, K.ConstructionError, C.BudgetExceeded, AssertionError) as e:
        print(f"verification failure: {e}", file=sys.stderr)
        return 1
    if cfg.out:
        with open(cfg.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0
