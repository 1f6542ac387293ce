"""Command-line front end.

Every command builds a JSON-able report; ``--json`` prints it, otherwise a
plain rendering of the same values is printed. Exit status is 0 on success,
1 on a domain error and 2 on a usage error.
"""
from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, field
from fractions import Fraction

from . import alcove, betti, cerf, corrcalc
from . import ammform as amm
from . import holovar as hv
from . import tanglelang as tl
from .errors import EmptyModuli, NoConvergence, SymptangleError

COMMANDS = (
    "alcove", "parse", "cerf-normalize", "cerf-equiv", "solve", "dim", "classes",
    "braid", "goldman", "chamber", "betti", "amm-check", "invariant",
)


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    command: str
    input_paths: list = field(default_factory=list)
    rank: int | None = None
    mu: str | None = None
    n: int | None = None
    seed: int = 0
    restarts: int = 10
    tol: float = 1e-10
    truncate: int | None = None
    json: bool = False
    out: str | None = None
    formula: str = "kirwan"
    labels: str | None = None
    mult: str | None = None
    index: int = 1
    pair: str = "1,2"
    depth: int = cerf.DEFAULT_DEPTH
    points: int = 1

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise UsageError(f"unknown command {self.command!r}")
        if self.seed < 0 or self.seed >= 2**64:
            raise UsageError("--seed must be a 64-bit unsigned integer")
        if self.restarts < 1:
            raise UsageError("--restarts must be positive")
        if self.mu is not None and "." in self.mu:
            raise UsageError("--mu takes an exact p/q value, not a decimal")


def build_parser():
    p = argparse.ArgumentParser(prog="symptangle", description=__doc__.splitlines()[0])
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--input", dest="input_paths", action="append", default=[], help="tangle file (.tng); repeat for cerf-equiv")
    p.add_argument("--rank", type=int)
    p.add_argument("--mu", help="label as p/q (SU(2)) or wK/2")
    p.add_argument("--n", type=int, help="number of markings, or the n of a Betti formula")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--restarts", type=int, default=10)
    p.add_argument("--tol", type=float, default=1e-10)
    p.add_argument("--truncate", type=int)
    p.add_argument("--json", action="store_true")
    p.add_argument("--out", help="write the JSON report to this path")
    p.add_argument("--formula", choices=("kirwan", "ab", "flag", "unknot"), default="kirwan")
    p.add_argument("--labels", help="comma-separated labels for alcove admissibility")
    p.add_argument("--mult", help="comma-separated multiplicities for --formula flag")
    p.add_argument("--index", type=int, default=1, help="strand index for braid")
    p.add_argument("--pair", default="1,2", help="marking pair j,k for goldman")
    p.add_argument("--depth", type=int, default=cerf.DEFAULT_DEPTH)
    p.add_argument("--points", type=int, default=1, help="number of solved points for dim and amm-check")
    return p


# ---------------------------------------------------------------------------
# helpers


def _read_word(path):
    try:
        return tl.load(path)
    except OSError as exc:
        raise SymptangleError(f"{path}: {exc.strerror or exc}") from exc


def _one_input(cfg):
    if len(cfg.input_paths) != 1:
        raise UsageError(f"{cfg.command} needs exactly one --input")
    return _read_word(cfg.input_paths[0])


def _problem(cfg):
    if cfg.input_paths:
        w = _one_input(cfg)
        pr = hv.problem_from_markings(w.incoming, w.group_rank)
        return hv.ModuliProblem(pr.rank, pr.labels, w.genus)
    if cfg.mu is None or cfg.n is None:
        raise UsageError("give --input, or --mu and --n")
    r = cfg.rank or 2
    lab = alcove.parse_label(cfg.mu, r)
    return hv.problem(r, [lab] * cfg.n)


def _solver(cfg):
    return hv.SolverConfig(seed=cfg.seed, restarts=cfg.restarts, tol_residual=cfg.tol)


def _points(pr, cfg, k):
    pts = hv.converged_points(pr, _solver(cfg))
    if not pts:
        hv.solve(pr, _solver(cfg))
    return pts[:k]


def _label_list(pr):
    return [("+" if e > 0 else "-") + alcove.format_label(lab) for e, lab in pr.labels]


# ---------------------------------------------------------------------------
# commands; each returns (json document, human lines)


def cmd_alcove(cfg):
    r = cfg.rank
    if r is None:
        raise UsageError("alcove needs --rank")
    if cfg.labels:
        labs = [alcove.parse_label(t.strip(), r) for t in cfg.labels.split(",")]
        rep = alcove.is_admissible(labs, r)
        doc = {"admissible": rep.ok, "d": rep.d, "reason": rep.reason}
        return doc, [f"admissible: {str(rep.ok).lower()}", f"d: {rep.d}", f"reason: {rep.reason}"]
    labs = [alcove.format_label(x) for x in alcove.monotone_labels(r)]
    return {"rank": r, "monotone": labs}, labs


def cmd_parse(cfg):
    w = _one_input(cfg)
    inc, out = tl.boundary_profile(w)
    doc = {
        "word": tl.serialize(w).rstrip(),
        "incoming": [str(m) for m in inc],
        "outgoing": [str(m) for m in out],
        "length": len(w.generators),
    }
    return doc, [doc["word"], f"incoming: {' '.join(doc['incoming'])}", f"outgoing: {' '.join(doc['outgoing'])}"]


def cmd_cerf_normalize(cfg):
    w = _one_input(cfg)
    nf, trace = cerf.normalize_with_trace(w)
    doc = {"normal_form": tl.serialize(nf).rstrip(), "trace": [str(m) for m, _ in trace]}
    return doc, [doc["normal_form"], f"moves: {len(trace)}"] + [f"  {s}" for s in doc["trace"]]


def cmd_cerf_equiv(cfg):
    if len(cfg.input_paths) != 2:
        raise UsageError("cerf-equiv needs two --input files")
    w1, w2 = (_read_word(p) for p in cfg.input_paths)
    proof = cerf.equivalent(w1, w2, cfg.depth)
    doc = {"verdict": proof.verdict, "trace": [str(m) for m, _ in proof.trace]}
    return doc, [proof.verdict] + [f"  {s}" for s in doc["trace"]]


def cmd_solve(cfg):
    pr = _problem(cfg)
    cert = hv.certificate_for(pr)
    if cert is not None:
        raise EmptyModuli(cert)
    results = hv.run_restarts(pr, _solver(cfg))
    best = hv.best_result(results)
    if best.residual >= cfg.tol:
        raise NoConvergence(f"no restart reached residual {cfg.tol:g}", best.residual)
    p = best.point
    doc = hv.point_to_json(p, seed=cfg.seed)
    doc["restarts"] = len(results)
    doc["converged"] = sum(res.residual < cfg.tol for res in results)
    lines = [
        f"labels: {' '.join(_label_list(pr))}",
        f"residual: {doc['residual']!r}",
        f"converged: {doc['converged']}/{doc['restarts']}",
    ]
    return doc, lines


def cmd_dim(cfg):
    pr = _problem(cfg)
    rows = []
    for p in _points(pr, cfg, cfg.points):
        rows.append({
            "tangent_dimension": hv.tangent_dimension(p, pr),
            "commutant_dimension": hv.commutant_dimension(p),
            "level_set_dimension": hv.level_set_dimension(p, pr),
            "residual": hv.relator_residual(p),
        })
    lines = [" ".join(f"{k}={v!r}" for k, v in row.items()) for row in rows]
    return {"points": rows}, lines


def cmd_classes(cfg):
    pr = _problem(cfg)
    cert = hv.certificate_for(pr)
    count = hv.count_gauge_classes(pr, _solver(cfg))
    doc = {"classes": count, "certificate": str(cert) if cert else None}
    lines = [f"classes: {count}"] + ([f"empty: {cert}"] if cert else [])
    return doc, lines


def cmd_braid(cfg):
    pr = _problem(cfg)
    p = _points(pr, cfg, 1)[0]
    q = hv.braid_act(p, cfg.index)
    doc = {"index": cfg.index, "residual_before": hv.relator_residual(p), "residual_after": hv.relator_residual(q)}
    return doc, [f"{k}: {v!r}" for k, v in doc.items()]


def cmd_goldman(cfg):
    pr = _problem(cfg)
    try:
        j, k = (int(x) for x in cfg.pair.split(","))
    except ValueError as exc:
        raise UsageError("--pair takes j,k") from exc
    p = _points(pr, cfg, 1)[0]
    val = hv.goldman(p, j, k)
    return {"pair": [j, k], "value": val}, [f"goldman({j},{k}): {val!r}"]


def cmd_chamber(cfg):
    if cfg.mu is None:
        raise UsageError("chamber needs --mu")
    try:
        mu = Fraction(cfg.mu)
    except ValueError as exc:
        raise UsageError(f"--mu {cfg.mu!r} is not p/q") from exc
    ch = betti.chamber_report(mu)
    return {"mu": str(mu), "chamber": ch.value}, [ch.value]


def cmd_betti(cfg):
    if cfg.formula in ("kirwan", "ab"):
        if cfg.n is None:
            raise UsageError("betti needs --n")
        fn = betti.kirwan_poincare if cfg.formula == "kirwan" else betti.ab_poincare
        series = fn(cfg.n, cfg.truncate)
        coeffs = list(series.trimmed())
    elif cfg.formula == "flag":
        if not cfg.mult:
            raise UsageError("betti --formula flag needs --mult")
        coeffs = list(betti.flag_poincare([int(x) for x in cfg.mult.split(",")]).trimmed())
    else:
        if cfg.rank is None:
            raise UsageError("betti --formula unknot needs --rank")
        coeffs = list(betti.unknot_hf(cfg.rank).trimmed())
    return {"coeffs": coeffs}, [str(coeffs), betti.format_poly(coeffs)]


def cmd_amm_check(cfg):
    pr = _problem(cfg)
    rows = []
    for p in _points(pr, cfg, cfg.points):
        rep = amm.reduced_kernel_report(pr, p)
        tangents = amm.level_tangent_basis(p)
        g_left = amm.gram_matrix(p, tangents, "left")
        g_right = amm.gram_matrix(p, tangents, "right")
        asym = max(
            abs(amm.omega_total(pr, p, v, w) + amm.omega_total(pr, p, w, v))
            for v in tangents for w in tangents
        )
        rows.append({
            "level_tangent_dim": rep.level_tangent_dim,
            "gauge_dim": rep.gauge_dim,
            "form_rank": rep.form_rank,
            "max_gauge_pairing": rep.max_gauge_pairing,
            "antisymmetry": float(asym),
            "splitting_gap": float(abs(g_left - g_right).max()) if tangents else 0.0,
        })
    lines = [" ".join(f"{k}={v!r}" for k, v in row.items()) for row in rows]
    return {"points": rows}, lines


def cmd_invariant(cfg):
    w = _one_input(cfg)
    r = cfg.rank or w.group_rank
    rep = corrcalc.invariant_pipeline(w, r)
    doc = rep.to_json()
    lines = [f"disk_flag: {rep.disk_flag}"] + [f"  {s}" for s in rep.sequence]
    if rep.hf_poly is not None:
        lines.append(f"HF: {betti.format_poly(rep.hf_poly.trimmed())}")
    if rep.note:
        lines.append(rep.note)
    return doc, lines


DISPATCH = {
    "alcove": cmd_alcove,
    "parse": cmd_parse,
    "cerf-normalize": cmd_cerf_normalize,
    "cerf-equiv": cmd_cerf_equiv,
    "solve": cmd_solve,
    "dim": cmd_dim,
    "classes": cmd_classes,
    "braid": cmd_braid,
    "goldman": cmd_goldman,
    "chamber": cmd_chamber,
    "betti": cmd_betti,
    "amm-check": cmd_amm_check,
    "invariant": cmd_invariant,
}


def run_command(cfg, stdout=None, stderr=None):
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    try:
        doc, lines = DISPATCH[cfg.command](cfg)
    except UsageError as exc:
        print(f"usage error: {exc}", file=stderr)
        return 2
    except (SymptangleError, ValueError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=stderr)
        return 1
    text = json.dumps(doc, sort_keys=True, indent=2)
    if cfg.out:
        try:
            with open(cfg.out, "w") as fh:
                fh.write(text + "\n")
        except OSError as exc:
            print(f"error: {cfg.out}: {exc.strerror or exc}", file=stderr)
            return 1
    print(text if cfg.json else "\n".join(lines), file=stdout)
    return 0


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        cfg = RunConfig(**vars(args))
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 2
    return run_command(cfg)


if __name__ == "__main__":
    sys.exit(main())
