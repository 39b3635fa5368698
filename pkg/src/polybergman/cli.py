"""Command-line front end.

Exit codes: 0 success, 1 validation error, 2 numerical failure, 3 config
parse error. Data goes to files under ``--out`` (and, for ``symbolic`` and
``cache``, to stdout); logs go to stderr as JSON lines.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import config as cfgmod
from .bounds import PROPOSITIONS, run_harness
from .cache import GramCache
from .errors import ConfigError, NumericalError, PolyBergmanError, ValidationError
from .expansion import blowup_error_study, default_blowup_grid
from .gram import BasisSpec, gram_kernel_build
from .metrics import SourceMetrics, rescaled_metric_study
from .potential import DomainSpec, check_assumptions, local_length
from .sources import ApproxSource, GaussianSource, GramSourceFactory, KoshelevSource
from .svgplot import heatmap, line_plot

log = logging.getLogger("polybergman")

EXIT_OK, EXIT_VALIDATION, EXIT_NUMERICAL, EXIT_CONFIG = 0, 1, 2, 3


# -- output helpers ---------------------------------------------------------------------------


def fmt(v) -> str:
    """Fixed CSV formatting: 17 significant digits for floats."""
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".17g")
    return str(v)


class Outputs:
    def __init__(self, directory: str, fmt_: str = "both", svg: bool = True):
        if fmt_ not in ("csv", "json", "both"):
            raise ValidationError("--format must be csv, json or both")
        self.dir = Path(directory)
        self.format = fmt_
        self.svg = svg
        self.written: list[str] = []

    def _path(self, name: str) -> Path:
        self.dir.mkdir(parents=True, exist_ok=True)
        self.written.append(name)
        return self.dir / name

    def csv(self, name: str, header: list[str], rows: list[list]):
        if self.format == "json":
            return
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([fmt(v) for v in r])
        self._path(name).write_text(buf.getvalue())

    def json(self, name: str, obj: dict):
        if self.format == "csv":
            return
        data = {"schema_version": cfgmod.SCHEMA_VERSION, **obj}
        self._path(name).write_text(json.dumps(data, indent=2, sort_keys=True, default=_json_default) + "\n")

    def svg_file(self, name: str, text: str):
        if self.svg:
            self._path(name).write_text(text)

    def text(self, name: str, text: str):
        self._path(name).write_text(text)


def _json_default(o):
    if isinstance(o, complex):
        return [o.real, o.imag]
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    raise TypeError(f"not JSON serializable: {type(o).__name__}")


class JsonLogFormatter(logging.Formatter):
    def format(self, record):
        return json.dumps({"level": record.levelname, "logger": record.name, "message": record.getMessage()})


def _setup_logging(verbose: bool):
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(JsonLogFormatter())
    root = logging.getLogger()
    root.handlers[:] = [handler]
    root.setLevel(logging.INFO if verbose else logging.WARNING)
    logging.captureWarnings(True)


def _cplx(z) -> list[float]:
    z = complex(z)
    return [z.real, z.imag]


def _map(threads: int, fn, items):
    items = list(items)
    if threads <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def _cache(cfg: cfgmod.RunConfig):
    return GramCache(cfg.cache.dir) if cfg.cache.enabled else None


# -- kernel sources from the config -------------------------------------------------------------


def _constant_weight(cfg) -> bool:
    return cfg.potential.kind == "constant"


def _potential(cfg):
    return None if _constant_weight(cfg) else cfg.build_potential()


def _source(kind: str, cfg, m: float | None, *, center: complex = 0j, reach: float | None = None):
    q = cfg.q
    if kind == "koshelev":
        return KoshelevSource(q)
    if kind == "gaussian":
        _need_m(m, kind)
        return GaussianSource(q, m)
    if kind == "approx":
        _need_m(m, kind)
        return ApproxSource(cfg.build_potential(), m, q, cfg.k)
    if kind == "gram":
        if _constant_weight(cfg):
            return gram_kernel_build(DomainSpec(), None, BasisSpec(q, cfg.n or 40), cfg.quadrature, _cache(cfg))
        _need_m(m, kind)
        fac = GramSourceFactory(cfg.build_potential(), q, rho_max=reach, z0=center, quadrature=cfg.quadrature,
                                cache=_cache(cfg))
        return fac(m, cfg.n)
    raise ValidationError(f"unknown kernel source {kind!r}")


def _need_m(m, kind):
    if m is None:
        raise ValidationError(f"source {kind!r} needs m")


# -- verbs ---------------------------------------------------------------------------------------


def cmd_kernel_eval(cfg: cfgmod.RunConfig, out: Outputs) -> int:
    kc = cfg.kernel
    rng = np.random.default_rng(cfg.seed)
    if kc.pairs:
        pairs = [(complex(p[0]), complex(p[1])) for p in kc.pairs]
    else:
        pairs = []
        for _ in range(kc.random_pairs):
            z = kc.radius * math.sqrt(rng.uniform()) * np.exp(2j * math.pi * rng.uniform())
            if kc.near_diagonal is not None:
                w = z + kc.near_diagonal * math.sqrt(rng.uniform()) * np.exp(2j * math.pi * rng.uniform())
            else:
                w = kc.radius * math.sqrt(rng.uniform()) * np.exp(2j * math.pi * rng.uniform())
            pairs.append((complex(z), complex(w)))
    zs = np.array([p[0] for p in pairs])
    ws = np.array([p[1] for p in pairs])
    reach = float(np.max(np.abs(np.concatenate([zs, ws])))) if pairs else None
    m = None if _constant_weight(cfg) else cfg.m
    if reach is not None and m is not None:
        reach += 3 * local_length(cfg.build_potential(), m, 0j)
    values = {}
    for kind in kc.sources:
        src = _source(kind, cfg, m, reach=reach)
        values[kind] = np.asarray(src.normalized(zs, ws), dtype=complex)
    header = ["z_re", "z_im", "w_re", "w_im"]
    for kind in kc.sources:
        header += [f"{kind}_re", f"{kind}_im"]
    combos = [(a, b) for i, a in enumerate(kc.sources) for b in kc.sources[i + 1:]]
    header += [f"relerr_{a}_{b}" for a, b in combos]
    rows = []
    summary = {}
    for a, b in combos:
        rel = np.abs(values[a] - values[b]) / np.maximum(np.abs(values[b]), 1e-300)
        summary[f"{a}_vs_{b}"] = float(np.max(rel)) if rel.size else None
    for i, (z, w) in enumerate(pairs):
        row = [z.real, z.imag, w.real, w.imag]
        for kind in kc.sources:
            row += [values[kind][i].real, values[kind][i].imag]
        for a, b in combos:
            row.append(float(abs(values[a][i] - values[b][i]) / max(abs(values[b][i]), 1e-300)))
        rows.append(row)
    out.csv("kernel.csv", header, rows)
    out.json("kernel.json", {"command": "kernel", "normalization": "K(z,w) sqrt(omega(z) omega(w))",
                             "pairs": len(pairs), "max_relative_error": summary})
    for k, v in summary.items():
        log.info("kernel %s max relative error %.3e", k, v)
    return EXIT_OK


def _blowup_source(cfg, P, z0):
    bc = cfg.blowup
    if bc.source == "gram":
        fac = GramSourceFactory(P, cfg.q, z0=z0, quadrature=cfg.quadrature, cache=_cache(cfg))
        if bc.refine:
            return fac
        return lambda m: fac(m, cfg.n)
    if bc.source == "gaussian":
        return lambda m: GaussianSource(cfg.q, m)
    if bc.source == "approx":
        return lambda m: ApproxSource(P, m, cfg.q, cfg.k)
    raise ValidationError(f"blowup source must be gram, gaussian or approx, got {bc.source!r}")


def cmd_blowup(cfg: cfgmod.RunConfig, out: Outputs) -> int:
    bc = cfg.blowup
    P = cfg.build_potential() if bc.source != "gaussian" else cfgmod.gaussian()
    grid = [(complex(a), complex(b)) for a, b in bc.grid] if bc.grid else default_blowup_grid()
    if not bc.m_list:
        raise ValidationError("blowup.m_list is empty")

    def one(z0):
        return blowup_error_study(_blowup_source(cfg, P, z0), P, z0, grid, bc.m_list, bc.signed)

    studies = _map(cfg.threads, one, bc.z0)
    header = ["z0_re", "z0_im", "m", "sup_error", "slope_so_far", "n", "truncation_estimate"]
    rows = []
    for st in studies:
        for r in st.rows:
            rows.append([st.z0.real, st.z0.imag, r.m, r.sup_error, r.slope_so_far, r.n, r.truncation_estimate])
    out.csv("blowup.csv", header, rows)
    summary = []
    for st in studies:
        d = st.to_dict()
        d["slope_in_band"] = None if st.slope is None else bool(-1.1 <= st.slope <= -0.4)
        summary.append(d)
    out.json("blowup.json", {"command": "blowup", "source": bc.source, "potential": P.to_dict(), "studies": summary})
    out.svg_file("blowup.svg", line_plot(
        [(f"z0={st.z0:.3g}", [r.m for r in st.rows], [r.sup_error for r in st.rows]) for st in studies],
        title="blow-up sup error", xlabel="m", ylabel="sup error", logx=True, logy=True))
    return EXIT_OK


def _metrics_source(cfg, m):
    mc = cfg.metrics
    reach = max([abs(complex(p)) for p in mc.points] + [0.0]) + max([abs(complex(e)) for e in mc.eps] + [0.0])
    if mc.source == "gram" and not _constant_weight(cfg):
        reach += 3 * local_length(cfg.build_potential(), m, 0j)
    return _source(mc.source, cfg, m, reach=reach)


def cmd_metrics(cfg: cfgmod.RunConfig, out: Outputs) -> int:
    mc = cfg.metrics
    m = None if (mc.source == "koshelev" or _constant_weight(cfg)) else cfg.m
    src = _metrics_source(cfg, m)
    sm = SourceMetrics(src, step=mc.step, tag=mc.source)
    rows, mrows, points = [], [], []
    for z in mc.points:
        z = complex(z)
        m1 = sm.metric1(z)
        m2, m2_err = sm.metric2(z, with_error=True)
        M = sm.matrix(z)
        eig = np.linalg.eigvalsh(M)
        for k in range(M.shape[0]):
            for l in range(M.shape[1]):
                mrows.append([z.real, z.imag, k, l, M[k, l].real, M[k, l].imag])
        points.append({"z": _cplx(z), "metric1": m1, "metric2": m2, "metric2_error": m2_err,
                       "matrix_eigenvalues": eig.tolist(), "matrix_trace": float(np.real(np.trace(M)))})
        for e in mc.eps:
            e = complex(e)
            s = sm.metric2_poly(z, e)
            rows.append([z.real, z.imag, e.real, e.imag, m1, m2, m2_err, sm.density(z, e), s.isothermal,
                         s.provenance["isothermal_error"], s.dz2.real, s.dz2.imag])
    out.csv("metrics.csv", ["z_re", "z_im", "eps_re", "eps_im", "metric1", "metric2", "metric2_error", "density",
                            "isothermal", "isothermal_error", "dz2_re", "dz2_im"], rows)
    out.csv("metric_matrix.csv", ["z_re", "z_im", "k", "l", "re", "im"], mrows)
    summary = {"command": "metrics", "source": mc.source, "q": cfg.q, "m": m, "points": points,
               "weight_included": True}
    if mc.m_list:
        P = cfg.build_potential() if mc.source != "gaussian" else cfgmod.gaussian()
        if mc.source == "gram":
            factory = GramSourceFactory(P, cfg.q, z0=mc.z, quadrature=cfg.quadrature, cache=_cache(cfg))
        elif mc.source == "gaussian":
            factory = lambda mm: GaussianSource(cfg.q, mm)  # noqa: E731
        elif mc.source == "approx":
            factory = lambda mm: ApproxSource(P, mm, cfg.q, cfg.k)  # noqa: E731
        else:
            raise ValidationError("rescaled metric study needs a weighted source (gram, gaussian or approx)")
        st = rescaled_metric_study(factory, P, mc.z, mc.eps_prime, mc.m_list)
        header, body = st.csv_rows()
        out.csv("rescaled_metrics.csv", header, body)
        summary["rescaled"] = st.to_dict()
        out.svg_file("rescaled_metrics.svg", line_plot(
            [("first metric", [r.m for r in st.rows], [r.first_error for r in st.rows]),
             ("isothermal", [r.m for r in st.rows], [r.isothermal_error for r in st.rows])],
            title="rescaled metric errors", xlabel="m", ylabel="max error", logx=True, logy=True))
    if mc.heatmap > 1:
        r = max(abs(complex(p)) for p in mc.points) or 0.5
        xs = np.linspace(-r, r, mc.heatmap)
        grid = [[sm.metric1(complex(x, y)) for x in xs] for y in xs]
        out.svg_file("metric1_heatmap.svg", heatmap(grid, title="first metric density", extent=(-r, r, -r, r)))
    out.json("metrics.json", summary)
    return EXIT_OK


def cmd_bounds(cfg: cfgmod.RunConfig, out: Outputs) -> int:
    bc = cfg.bounds
    props = bc.propositions or list(PROPOSITIONS)
    rep = run_harness(bc.trials, cfg.seed, bc.rtol, propositions=props)
    d = rep.to_dict()
    rows = [[k, e["trials"], e["violations"], e["max_ratio"]] for k, e in d["propositions"].items()]
    out.csv("bounds.csv", ["proposition", "trials", "violations", "max_ratio"], rows)
    out.json("bounds.json", {"command": "bounds", **d})
    return EXIT_OK


MEMBERSHIP_ASSUMPTION = ("membership mod M^k_(z-w) R_q is decided by the monomial criterion; "
                         "its equivalence with the function-level condition is assumed, not proved")


def cmd_symbolic(cfg: cfgmod.RunConfig, out: Outputs, stdout=None) -> int:
    from .jetcas import coeff_to_json, coeff_to_text, series_to_json, series_to_text
    from .jetcas.identities import check_identities
    from .jetcas.solver import solve_expansion_q1, solve_expansion_q2, solve_expansion_q2_pair, verify_printed_q2

    stdout = stdout or sys.stdout
    sc = cfg.symbolic
    if sc.action == "solve":
        if sc.q == 1:
            L = solve_expansion_q1(sc.order, sc.truncation)
            lines = [f"L_{j} = {coeff_to_text(c)}" for j, c in enumerate(L)]
            payload = [coeff_to_json(c) for c in L]
        elif sc.q == 2:
            L = solve_expansion_q2(sc.order, sc.truncation or 6) if sc.order <= 1 else \
                solve_expansion_q2_pair(sc.order, sc.truncation)
            lines = [f"L^2_{j} = {series_to_text(s)}" for j, s in enumerate(L)]
            payload = [series_to_json(s) for s in L]
        else:
            raise ValidationError("symbolic solve supports q = 1 and q = 2")
        print("\n".join(lines), file=stdout)
        out.json("symbolic.json", {"command": "symbolic solve", "q": sc.q, "order": sc.order, "coefficients": payload,
                                   "assumptions": [MEMBERSHIP_ASSUMPTION]})
    elif sc.action == "verify":
        if sc.q != 2:
            raise ValidationError("symbolic verify is available for q = 2")
        rep = verify_printed_q2(sc.order, sc.truncation, sc.reading)
        print(f"L^2_{sc.order} (recorded) = {rep.printed_text}", file=stdout)
        for c in rep.conditions:
            status = "zero" if c.ok else f"nonzero: {c.residual_text}"
            print(f"  condition {c.name}: residual {status} (certified: {c.certified})", file=stdout)
        print(f"  solver minus recorded: {rep.difference_from_solver['text']}", file=stdout)
        out.json("symbolic.json", {"command": "symbolic verify", **rep.to_dict(),
                                   "assumptions": [MEMBERSHIP_ASSUMPTION]})
    elif sc.action == "identities":
        res = check_identities(sc.trials, cfg.seed, sc.truncation or 6, 3)
        for r in res.values():
            print(f"{r.name}: {'pass' if r.ok else 'FAIL'} ({r.trials} trials, {r.failures} failures)", file=stdout)
        out.json("symbolic.json", {"command": "symbolic identities", "results": [r.to_dict() for r in res.values()]})
    else:
        raise ValidationError(f"unknown symbolic action {sc.action!r}")
    return EXIT_OK


def cmd_assumptions(cfg: cfgmod.RunConfig, out: Outputs) -> int:
    ac = cfg.assumptions
    P = cfg.build_potential()
    rep = check_assumptions(P, DomainSpec("disk", ac.center, ac.radius), cfg.m, ac.n_radii, ac.n_angles)
    d = rep.to_dict()
    out.csv("assumptions.csv", list(d.keys()), [[v if not isinstance(v, list) else "x".join(map(str, v))
                                                 for v in d.values()]])
    out.json("assumptions.json", {"command": "assumptions", "potential": P.to_dict(), **d})
    return EXIT_OK


def cmd_cache(cfg: cfgmod.RunConfig, action: str, stdout=None) -> int:
    stdout = stdout or sys.stdout
    cache = GramCache(cfg.cache.dir)
    if action == "inspect":
        print(json.dumps({"directory": str(cache.directory), "entries": cache.entries()}, indent=2), file=stdout)
    else:
        print(json.dumps({"directory": str(cache.directory), "removed": cache.clear()}), file=stdout)
    return EXIT_OK


# -- argument parsing -------------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="YAML run configuration")
    common.add_argument("--out", help="output directory (overrides output.dir)")
    common.add_argument("--format", choices=["csv", "json", "both"], help="output formats")
    common.add_argument("--seed", type=int, help="random seed (overrides seed)")
    common.add_argument("--threads", type=int, help="worker threads for independent study units")
    common.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                        help="override a config field, e.g. blowup.m_list=[20,40]")
    common.add_argument("-v", "--verbose", action="store_true", help="info-level logs on stderr")

    p = argparse.ArgumentParser(prog="polybergman", description="Weighted polyanalytic Bergman kernels.")
    sub = p.add_subparsers(dest="verb", required=True)
    sub.add_parser("kernel", parents=[common], help="evaluate and compare kernel sources")
    sub.add_parser("blowup", parents=[common], help="blow-up convergence study")
    sub.add_parser("metrics", parents=[common], help="Bergman metrics and their polyanalytic versions")
    sub.add_parser("bounds", parents=[common], help="randomized point-evaluation bound harness")
    sub.add_parser("assumptions", parents=[common], help="check potential assumptions on a disk")
    sym = sub.add_parser("symbolic", parents=[common], help="symbolic solver and checks")
    sym.add_argument("action", choices=["solve", "verify", "identities"])
    sym.add_argument("--q", type=int)
    sym.add_argument("--order", type=int)
    sym.add_argument("--reading", choices=["dbeta", "dbarbeta", "beta"])
    sym.add_argument("--truncation", type=int)
    cache = sub.add_parser("cache", parents=[common], help="inspect or clear the Gram cache")
    cache.add_argument("action", choices=["inspect", "clear"])
    return p


def resolve_config(args) -> cfgmod.RunConfig:
    cfg = cfgmod.load(args.config) if args.config else cfgmod.RunConfig()
    overrides = list(args.set)
    if args.out:
        overrides.append(f"output.dir={json.dumps(args.out)}")
    if args.format:
        overrides.append(f"output.format={args.format}")
    if args.seed is not None:
        overrides.append(f"seed={args.seed}")
    if args.threads is not None:
        overrides.append(f"threads={args.threads}")
    if args.verb == "symbolic":
        overrides.append(f"symbolic.action={args.action}")
        for name in ("q", "order", "reading", "truncation"):
            v = getattr(args, name)
            if v is not None:
                overrides.append(f"symbolic.{name}={v}")
    return cfgmod.apply_overrides(cfg, overrides) if overrides else cfg


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    _setup_logging(args.verbose)
    try:
        cfg = resolve_config(args).validate()
        if args.verb == "cache":
            return cmd_cache(cfg, args.action)
        out = Outputs(cfg.output.dir, cfg.output.format, cfg.output.svg)
        out.text("resolved_config.yaml", cfgmod.dumps(cfg))
        t0 = time.perf_counter()
        verbs = {"kernel": cmd_kernel_eval, "blowup": cmd_blowup, "metrics": cmd_metrics, "bounds": cmd_bounds,
                 "symbolic": cmd_symbolic, "assumptions": cmd_assumptions}
        code = verbs[args.verb](cfg, out)
        log.info("%s finished in %.2f s; wrote %s", args.verb, time.perf_counter() - t0, ", ".join(out.written))
        return code
    except ConfigError as exc:
        log.error("config error: %s", exc)
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ValidationError as exc:
        log.error("validation error: %s", exc)
        print(f"validation error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except NumericalError as exc:
        log.error("numerical failure: %s", exc)
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except PolyBergmanError as exc:
        log.error("error: %s", exc)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
