"""Command-line front end.

Every subcommand writes one CSV table: a header row naming the columns,
preceded by ``#`` comment lines that record the package version, the
chain (as a SHA-256 of its canonical JSON form) and the tolerances used.
Identical configurations produce byte-identical files.

Exit codes are 0 on success, 1 when a computation fails and 2 for usage
errors.

Examples
--------
::

    fermichain classify --xydm 1,0,2
    fermichain entropy --xydm 1,0,4 --alpha 1,2 --X 50,100
    fermichain flow --xydm 0,1,0 --zeta 0:0.5:0.05 --alpha 2 --X 400
    fermichain multi --xydm 0,0,0 --alpha 2 --intervals 1:100,201:300
    fermichain theta-entropy --chain gapped_xy.json --alpha 2 --X 40 --check-direct
    fermichain figures --which 5 --alpha 1 --X 100 --out results/
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import os
import sys
import traceback
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from . import __version__
from .chain_model import CouplingSet, classify, coupling_from_json, xydm_couplings
from .errors import DomainError, FermiChainError, FlowSingularityError

COMMANDS = ("classify", "entropy", "asym", "flow", "theta-entropy", "multi", "figures")
FIGURE_IDS = (3, 4, 5)
FLOAT_FMT = "{:.12g}"


class UsageError(Exception):
    """Invalid command line or configuration file."""


@dataclass
class RunConfig:
    """Validated parameters of one CLI invocation.

    Attributes
    ----------
    command : str
        One of ``COMMANDS``.
    chain : dict or None
        Chain specification in the chain-file format, ``None`` when the
        command does not need one.
    alphas, sizes : list
        Rényi indices and interval lengths to sweep.
    zetas : list of float or None
        Rapidity grid.
    intervals : str or None
        Subsystem as ``a:b[,c:d...]``.
    mode : str
        ``"thermo"`` or ``"finite:<N>"``.
    out : Path or None
        Output directory; ``None`` writes to standard output.
    mobius : tuple of 4 complex or None
        Entries ``a, b, c, d`` of a single map for ``flow`` (normalized to
        unit determinant).
    """

    command: str
    chain: dict | None = None
    chain_label: str = ""
    alphas: list = field(default_factory=lambda: [2.0])
    sizes: list = field(default_factory=lambda: [100])
    zetas: list | None = None
    intervals: str | None = None
    mode: str = "thermo"
    out: Path | None = None
    jobs: int = 1
    tol: float | None = None
    check_direct: bool = False
    json_path: Path | None = None
    which: list = field(default_factory=lambda: list(FIGURE_IDS))
    mobius: tuple | None = None

    def couplings(self) -> CouplingSet:
        return coupling_from_json(self.chain)


# ---------------------------------------------------------------- parsing

def _float_list(text: str, name: str) -> list:
    try:
        vals = [float(x) for x in str(text).split(",") if x.strip()]
    except ValueError:
        raise UsageError(f"--{name} expects a comma separated list of numbers, got {text!r}") from None
    if not vals:
        raise UsageError(f"--{name} is empty")
    return vals


def _int_list(text: str, name: str) -> list:
    vals = _float_list(text, name)
    if any(v != int(v) or v < 1 for v in vals):
        raise UsageError(f"--{name} expects positive integers, got {text!r}")
    return [int(v) for v in vals]


def parse_zeta(text: str) -> list:
    """Parse ``start:stop:step`` into an inclusive grid.

    Examples
    --------
    >>> parse_zeta("0:0.5:0.25")
    [0.0, 0.25, 0.5]
    """
    parts = str(text).split(":")
    try:
        if len(parts) == 1:
            return [float(parts[0])]
        start, stop, step = (float(p) for p in parts)
    except ValueError:
        raise UsageError(f"--zeta expects start:stop:step, got {text!r}") from None
    if step <= 0 or stop < start:
        raise UsageError("--zeta needs step > 0 and stop >= start")
    n = int(np.floor((stop - start) / step + 1e-9))
    return [float(np.round(start + k * step, 12)) for k in range(n + 1)]


def _build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="fermichain",
        description="Entanglement entropy of free fermionic chains.",
    )
    p.add_argument("--version", action="version", version=f"fermichain {__version__}")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON file with default values for the flags below")
    common.add_argument("--chain", help="chain file (JSON)")
    common.add_argument("--xydm", help="XY chain with DM term: gamma,s,h")
    common.add_argument("--alpha", help="Rényi indices, comma separated")
    common.add_argument("--X", dest="X", help="interval lengths, comma separated")
    common.add_argument("--zeta", help="rapidity grid start:stop:step")
    common.add_argument("--intervals", help="subsystem a:b[,c:d...] (inclusive sites)")
    common.add_argument("--mode", help="finite:<N> or thermo")
    common.add_argument("--out", help="output directory (default: standard output)")
    common.add_argument("--jobs", type=int, help="worker processes for grid sweeps")
    common.add_argument("--tol", type=float, help="quadrature tolerance")
    sub = p.add_subparsers(dest="command", required=True, metavar="COMMAND")
    sub.add_parser("classify", parents=[common], help="ground-state class and insertion points")
    sub.add_parser("entropy", parents=[common], help="Rényi entropy from the correlation matrix")
    sub.add_parser("asym", parents=[common], help="asymptotic entropy from closed forms")
    fl = sub.add_parser("flow", parents=[common], help="entropy along a boost flow")
    fl.add_argument("--mobius", help="a single map a_re,a_im,b_re,b_im,c_re,c_im,d_re,d_im instead of --zeta")
    te = sub.add_parser("theta-entropy", parents=[common], help="entropy from theta functions")
    te.add_argument("--check-direct", action="store_true", default=None,
                    help="also compute the entropy from the correlation matrix")
    te.add_argument("--json", help="write curve data (roots, epsilons, period matrix, characteristics)")
    sub.add_parser("multi", parents=[common], help="multi-interval product formula vs direct")
    fg = sub.add_parser("figures", parents=[common], help="tables behind the flow and conic plots")
    fg.add_argument("--which", help="comma separated subset of 3,4,5")
    return p


def _chain_from_args(chain, xydm):
    if chain and xydm:
        raise UsageError("give either --chain or --xydm, not both")
    if chain:
        try:
            obj = json.loads(Path(chain).read_text(encoding="utf-8"))
        except OSError as exc:
            raise UsageError(f"cannot read chain file {chain!r}: {exc.strerror}") from None
        except json.JSONDecodeError as exc:
            raise UsageError(f"malformed JSON in {chain!r}: {exc}") from None
        label = Path(chain).name
    elif xydm:
        vals = _float_list(xydm, "xydm")
        if len(vals) != 3:
            raise UsageError("--xydm expects three values gamma,s,h")
        obj = {"xydm": {"gamma": vals[0], "s": vals[1], "h": vals[2]}}
        label = f"xydm={vals[0]:g},{vals[1]:g},{vals[2]:g}"
    else:
        return None, ""
    try:
        coupling_from_json(obj)
    except FermiChainError as exc:
        raise UsageError(f"invalid chain: {exc}") from None
    return obj, label


def parse_config(argv: Sequence[str] | None = None) -> RunConfig:
    """Parse and validate a command line.

    Values from a ``--config`` JSON file act as defaults; flags given on the
    command line override them.

    Raises
    ------
    UsageError
        For malformed values, domain violations or an unwritable output
        directory.  Unknown flags make argparse exit with status 2.
    """
    args = _build_parser().parse_args(argv)
    given = {k: v for k, v in vars(args).items() if v is not None}
    if args.config:
        try:
            file_vals = json.loads(Path(args.config).read_text(encoding="utf-8"))
        except OSError as exc:
            raise UsageError(f"cannot read config {args.config!r}: {exc.strerror}") from None
        except json.JSONDecodeError as exc:
            raise UsageError(f"malformed JSON in {args.config!r}: {exc}") from None
        if not isinstance(file_vals, dict):
            raise UsageError("config file must hold a JSON object")
        known = set(vars(args)) - {"command", "config"}
        unknown = set(file_vals) - known - {"check_direct"}
        if unknown:
            raise UsageError(f"unknown config keys: {', '.join(sorted(unknown))}")
        merged = {k: (str(v) if k not in ("jobs", "tol", "check_direct") else v)
                  for k, v in file_vals.items()}
        merged.update(given)
        given = merged

    cfg = RunConfig(command=args.command)
    cfg.chain, cfg.chain_label = _chain_from_args(given.get("chain"), given.get("xydm"))
    if "alpha" in given:
        cfg.alphas = _float_list(given["alpha"], "alpha")
    if any(not (a > 0) or not np.isfinite(a) for a in cfg.alphas):
        raise UsageError("--alpha values must be positive and finite")
    if "X" in given:
        cfg.sizes = _int_list(given["X"], "X")
    if "zeta" in given:
        cfg.zetas = parse_zeta(given["zeta"])
    if "intervals" in given:
        from .correlation import SubsystemSpec

        try:
            SubsystemSpec.parse(given["intervals"])
        except DomainError as exc:
            raise UsageError(f"--intervals: {exc}") from None
        cfg.intervals = given["intervals"]
    if "mode" in given:
        from .correlation import _parse_mode

        try:
            name, N = _parse_mode(given["mode"])
        except DomainError as exc:
            raise UsageError(f"--mode: {exc}") from None
        if name == "finite" and N < 2:
            raise UsageError("--mode finite:<N> needs N >= 2")
        cfg.mode = given["mode"]
    if "jobs" in given:
        cfg.jobs = int(given["jobs"])
        if cfg.jobs < 1:
            raise UsageError("--jobs must be at least 1")
    if "tol" in given:
        cfg.tol = float(given["tol"])
        if not (0 < cfg.tol < 1):
            raise UsageError("--tol must lie in (0, 1)")
    if "out" in given:
        out = Path(given["out"])
        if out.exists() and not out.is_dir():
            raise UsageError(f"--out {out} exists and is not a directory")
        probe = out if out.exists() else out.parent
        if not os.access(probe if str(probe) else ".", os.W_OK):
            raise UsageError(f"--out {out} is not writable")
        cfg.out = out
    cfg.check_direct = bool(given.get("check_direct", False))
    if given.get("json"):
        cfg.json_path = Path(given["json"])
    if "which" in given:
        w = _int_list(given["which"], "which")
        if any(x not in FIGURE_IDS for x in w):
            raise UsageError("--which accepts 3, 4 and 5")
        cfg.which = w

    needs_chain = cfg.command in ("classify", "entropy", "asym", "flow", "theta-entropy", "multi")
    if needs_chain and cfg.chain is None:
        raise UsageError(f"{cfg.command} needs --chain or --xydm")
    if given.get("mobius"):
        vals = _float_list(given["mobius"], "mobius")
        if len(vals) != 8:
            raise UsageError("--mobius expects 8 numbers a_re,a_im,b_re,b_im,c_re,c_im,d_re,d_im")
        entries = [complex(vals[i], vals[i + 1]) for i in range(0, 8, 2)]
        if abs(entries[0] * entries[3] - entries[1] * entries[2]) == 0:
            raise UsageError("--mobius map is singular")
        cfg.mobius = tuple(entries)
    if cfg.command == "flow" and cfg.zetas is None and cfg.mobius is None:
        raise UsageError("flow needs --zeta or --mobius")
    if cfg.command == "multi" and cfg.intervals is None:
        raise UsageError("multi needs --intervals")
    return cfg


# ---------------------------------------------------------------- output

def _fmt(v) -> str:
    if isinstance(v, (float, np.floating)):
        return FLOAT_FMT.format(float(v))
    if isinstance(v, (list, tuple, np.ndarray)):
        return ";".join(_fmt(x) for x in v)
    return str(v)


def chain_hash(chain: dict | None) -> str:
    """SHA-256 of the canonical JSON form of a chain specification."""
    if chain is None:
        return "none"
    canon = json.dumps(coupling_from_json(chain).to_json(), sort_keys=True)
    return hashlib.sha256(canon.encode()).hexdigest()


@dataclass
class Table:
    """A named CSV table with provenance comments."""

    name: str
    columns: list
    rows: list = field(default_factory=list)
    comments: list = field(default_factory=list)

    def render(self) -> str:
        buf = io.StringIO()
        for line in self.comments:
            buf.write(f"# {line}\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.columns)
        for r in self.rows:
            w.writerow([_fmt(v) for v in r])
        return buf.getvalue()


def _provenance(cfg: RunConfig, chain: dict | None, extra: Sequence[str] = ()) -> list:
    lines = [
        f"fermichain {__version__} command={cfg.command}",
        f"chain {cfg.chain_label or 'builtin'} sha256={chain_hash(chain)}",
        f"mode={cfg.mode} tol={'default' if cfg.tol is None else repr(cfg.tol)}",
    ]
    return lines + list(extra)


def _emit(cfg: RunConfig, tables: list, stdout) -> None:
    if cfg.out is None:
        for i, t in enumerate(tables):
            if i:
                stdout.write("\n")
            stdout.write(t.render())
        return
    cfg.out.mkdir(parents=True, exist_ok=True)
    for t in tables:
        (cfg.out / f"{t.name}.csv").write_text(t.render(), encoding="utf-8")


def _pmap(fn: Callable, items: list, jobs: int) -> list:
    """Map in grid order, optionally over a process pool."""
    if jobs <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=jobs) as ex:
        return list(ex.map(fn, items))


# ---------------------------------------------------------------- chains used by the figure protocols

def parity_chain(theta_F: float, a1: float = 1.0, a2: float = 0.4, b2: float = 0.8) -> CouplingSet:
    """Real range-2 chain whose only gapless points are pinchings at ``e^{+-i theta_F}``.

    With real couplings ``Theta = A_0 + 2 A_1 cos t + 2 A_2 cos 2t`` and
    ``Xi = 2i sin t (B_1 + 2 B_2 cos t)``; choosing
    ``B_1 = -2 B_2 cos theta_F`` and ``A_0 = -2 A_1 cos theta_F - 2 A_2 cos 2 theta_F``
    makes both vanish at ``theta_F``.
    """
    c = np.cos(theta_F)
    return CouplingSet.from_nonnegative(
        [-2 * a1 * c - 2 * a2 * np.cos(2 * theta_F), a1, a2], [0.0, -2 * b2 * c, b2]
    )


def dirac_sea_chain(t1: float = np.pi / 2, t2: float = 3 * np.pi / 4, a0: float = 0.3,
                    a1: float = 1.0, b1: float = 0.1, b2: float = 0.05) -> CouplingSet:
    """Range-2 chain with a Dirac sea on ``(t1, t2)`` and no pinchings.

    The imaginary parts of ``A_1, A_2`` are fixed by requiring the
    dispersion to vanish at ``t1`` and ``t2``, a linear condition.
    """

    def r(t):
        return np.hypot(a0 + 2 * a1 * np.cos(t), 2 * (b1 * np.sin(t) + b2 * np.sin(2 * t)))

    M = -2 * np.array([[np.sin(t1), np.sin(2 * t1)], [np.sin(t2), np.sin(2 * t2)]])
    s1, s2 = np.linalg.solve(M, [r(t1), r(t2)])
    return CouplingSet.from_nonnegative([a0, a1 + 1j * s1, 1j * s2], [0.0, b1, b2])


# ---------------------------------------------------------------- workers

def _entropy_task(task):
    from .correlation import SubsystemSpec, build_VX, entanglement_spectrum, renyi

    chain, sub_text, alphas, mode, tol = task
    c = coupling_from_json(chain) if isinstance(chain, dict) else chain
    sub = SubsystemSpec.parse(sub_text)
    kw = {} if tol is None else {"tol": tol}
    nu = entanglement_spectrum(build_VX(c, sub, mode, **kw))
    return nu, [renyi(nu, a) for a in alphas]


def _flow_task(task):
    from .mobius import boost, transform_couplings

    c, zeta, size, alphas, mode, tol = task
    cz = transform_couplings(boost(zeta), c) if zeta != 0 else c
    _, res = _entropy_task((cz, f"1:{size}", alphas, mode, tol))
    return cz, [r.S for r in res]


def _xy_entropy_task(task):
    gamma, h, size, alphas, mode, tol = task
    _, res = _entropy_task((xydm_couplings(gamma, 0.0, h), f"1:{size}", alphas, mode, tol))
    return [r.S for r in res]


# ---------------------------------------------------------------- commands

def _angles(points) -> list:
    return [float(x) for x in np.angle(points)]


def cmd_classify(cfg: RunConfig) -> list:
    c = cfg.couplings()
    rep = classify(c)
    t = Table("classify", ["kind", "R", "Q", "u_angles", "v_angles", "min_lambda"],
              comments=_provenance(cfg, cfg.chain))
    t.rows.append([rep.kind.value, rep.R, rep.Q, _angles(rep.u), _angles(rep.v), rep.min_lambda])
    return [t]


def cmd_entropy(cfg: RunConfig) -> list:
    tasks = []
    keys = []
    if cfg.intervals is not None:
        keys.append(cfg.intervals)
    else:
        keys.extend(f"1:{n}" for n in cfg.sizes)
    for k in keys:
        tasks.append((cfg.chain, k, cfg.alphas, cfg.mode, cfg.tol))
    results = _pmap(_entropy_task, tasks, cfg.jobs)
    t = Table("entropy", ["alpha", "X_size", "S", "Z", "spectrum_path"],
              comments=_provenance(cfg, cfg.chain, [f"intervals={';'.join(keys)}"]))
    for key, (nu, res) in zip(keys, results):
        path = ""
        if cfg.out is not None:
            name = "spectrum_" + key.replace(":", "-").replace(",", "_") + ".txt"
            cfg.out.mkdir(parents=True, exist_ok=True)
            np.savetxt(cfg.out / name, nu, fmt="%.17g")
            path = name
        for r in res:
            t.rows.append([r.alpha, r.size, r.S, r.Z, path])
    return [t]


def _asym_model(chain: dict):
    """Closed-form model matching an XY specification, if any."""
    p = chain.get("xydm")
    if p is None:
        return None, {}
    g, s, h = float(p["gamma"]), float(p.get("s", 0.0)), float(p["h"])
    if g == 0 and s == 0 and abs(h) < 2:
        return "critXX", {"h": h}
    if g == 0 and s != 0:
        return "xxdm", {"s": s, "h": h}
    if s == 0 and abs(h) == 2 and g != 0:
        return "ising_line", {"gamma": g}
    return None, {}


def cmd_asym(cfg: RunConfig) -> list:
    from .asymptotics import closed_form, entropy_aef, log_coefficient

    c = cfg.couplings()
    rep = classify(c)
    model, params = _asym_model(cfg.chain)
    t = Table("asym", ["model", "params", "alpha", "X", "S_asym", "log_coefficient"],
              comments=_provenance(cfg, cfg.chain, [f"kind={rep.kind.value} R={rep.R} Q={rep.Q}"]))
    for a in cfg.alphas:
        k = log_coefficient(a, rep.R, rep.Q)
        for n in cfg.sizes:
            if model is not None and (rep.R or rep.Q):
                S = closed_form(model, n, a, **params)
                name, par = model, ";".join(f"{key}={_fmt(v)}" for key, v in params.items())
            elif rep.R and not rep.Q:
                S = entropy_aef(rep.u, n, a)
                name, par = "pinchings", "u=" + _fmt(_angles(rep.u))
            else:
                S, name, par = "", "unknown-constant", ""
            t.rows.append([name, par, a, n, S, k])
    return [t]


def _flow_table(cfg: RunConfig, name: str, c: CouplingSet, chain: dict | None,
                zetas: Sequence[float], extra_comments=()) -> Table:
    from .mobius import boost, map_point, predicted_shift

    rep = classify(c)
    t = Table(name, ["zeta", "alpha", "X_size", "angles", "S", "S_predicted", "difference"],
              comments=_provenance(cfg, chain, [f"kind={rep.kind.value} R={rep.R} Q={rep.Q}",
                                                *extra_comments]))
    pts = np.concatenate([rep.u, rep.v])
    for n in cfg.sizes:
        tasks = [(c, float(z), n, cfg.alphas, cfg.mode, cfg.tol) for z in zetas]
        results = _pmap(_flow_task, tasks, cfg.jobs)
        if zetas[0] == 0:
            base = results[0][1]
        else:
            base = _flow_task((c, 0.0, n, cfg.alphas, cfg.mode, cfg.tol))[1]
        for z, (_, S) in zip(zetas, results):
            m = boost(z)
            ang = _angles(map_point(m, pts)[0]) if len(pts) else []
            for i, a in enumerate(cfg.alphas):
                pred = base[i] + predicted_shift(a, m, rep)[0]
                t.rows.append([z, a, n, ang, S[i], pred, S[i] - pred])
    return t


def _mobius_table(cfg: RunConfig, c: CouplingSet) -> Table:
    """Entropy change under one general map; the Jacobian factor is reported as is."""
    from .mobius import MobiusMap, map_point, predicted_shift, transform_couplings

    m = MobiusMap.normalized(*cfg.mobius)
    rep = classify(c)
    cm = transform_couplings(m, c)
    pts = np.concatenate([rep.u, rep.v])
    ang = _angles(map_point(m, pts)[0]) if len(pts) else []
    t = Table("mobius", ["alpha", "X_size", "angles", "S", "S_predicted", "difference",
                         "factor_re", "factor_im"],
              comments=_provenance(cfg, cfg.chain, [f"kind={rep.kind.value} R={rep.R} Q={rep.Q}",
                                                    "map=" + ",".join(_fmt(float(x)) for e in (m.a, m.b, m.c, m.d) for x in (e.real, e.imag)),
                                                    f"so11={m.is_so11()}"]))
    for n in cfg.sizes:
        base = _entropy_task((c, f"1:{n}", cfg.alphas, cfg.mode, cfg.tol))[1]
        new = _entropy_task((cm, f"1:{n}", cfg.alphas, cfg.mode, cfg.tol))[1]
        for i, a in enumerate(cfg.alphas):
            dS, factor = predicted_shift(a, m, rep)
            pred = base[i].S + dS
            t.rows.append([a, n, ang, new[i].S, pred, new[i].S - pred, factor.real, factor.imag])
    return t


def cmd_flow(cfg: RunConfig) -> list:
    tables = []
    if cfg.mobius is not None:
        tables.append(_mobius_table(cfg, cfg.couplings()))
    if cfg.zetas is not None:
        tables.append(_flow_table(cfg, "flow", cfg.couplings(), cfg.chain, cfg.zetas))
    return tables


def cmd_multi(cfg: RunConfig) -> list:
    from .asymptotics import multiinterval_entropy
    from .correlation import SubsystemSpec

    sub = SubsystemSpec.parse(cfg.intervals)
    x = list(sub.endpoints)
    lengths = sorted({int(round(b - a)) for i, a in enumerate(x) for b in x[i + 1:]})
    tasks = [(cfg.chain, f"1:{n}", cfg.alphas, cfg.mode, cfg.tol) for n in lengths]
    tasks.append((cfg.chain, cfg.intervals, cfg.alphas, cfg.mode, cfg.tol))
    results = _pmap(_entropy_task, tasks, cfg.jobs)
    single = {n: res for n, (_, res) in zip(lengths, results[:-1])}
    direct = results[-1][1]
    t = Table("multi", ["alpha", "intervals", "S_direct", "S_product", "difference"],
              comments=_provenance(cfg, cfg.chain, ["single-interval entropies use translation invariance"]))
    for i, a in enumerate(cfg.alphas):
        S_prod = multiinterval_entropy(lambda p, q: single[int(round(q - p))][i].S, x, a)
        t.rows.append([a, cfg.intervals, direct[i].S, S_prod, direct[i].S - S_prod])
    return [t]


def cmd_theta_entropy(cfg: RunConfig) -> list:
    from .riemann import build_curve, entropy_contour

    c = cfg.couplings()
    curve = build_curve(c)
    tol = 1e-10 if cfg.tol is None else cfg.tol
    cols = ["alpha", "X_size", "genus", "S_theta"]
    if cfg.check_direct:
        cols += ["S_direct", "difference"]
    t = Table("theta_entropy", cols, comments=_provenance(cfg, cfg.chain))
    direct = {}
    if cfg.check_direct:
        tasks = [(cfg.chain, f"1:{n}", cfg.alphas, cfg.mode, cfg.tol) for n in cfg.sizes]
        direct = dict(zip(cfg.sizes, _pmap(_entropy_task, tasks, cfg.jobs)))
    for n in cfg.sizes:
        for i, a in enumerate(cfg.alphas):
            S = entropy_contour(curve, a, X=n, tol=tol)
            row = [a, n, curve.g, S]
            if cfg.check_direct:
                Sd = direct[n][1][i].S
                row += [Sd, S - Sd]
            t.rows.append(row)
    if cfg.json_path is not None:
        cfg.json_path.parent.mkdir(parents=True, exist_ok=True)
        cfg.json_path.write_text(json.dumps(curve.to_json(), indent=1, sort_keys=True) + "\n",
                                 encoding="utf-8")
    return [t]


FIG3_ZETA = "0:0.88:0.04"
FIG4_ZETA = "0:0.44:0.04"
FIG5_GAMMA = np.linspace(0.25, 2.0, 8)
FIG5_H = np.linspace(0.0, 4.0, 9)
FIG5_STARTS = ((1.0, 4.0), (0.5, 3.0), (2.0, 5.0), (1.0, 1.0), (0.5, 0.5))


def cmd_figures(cfg: RunConfig) -> list:
    from .mobius import transform_xydm

    tables = []
    sizes_default = cfg.sizes
    if 3 in cfg.which:
        c = parity_chain(3 * np.pi / 4)
        z = cfg.zetas or parse_zeta(FIG3_ZETA)
        tables.append(_flow_table(cfg, "fig3", c, c.to_json(), z,
                                  ["parity-preserving chain, pinchings at exp(+-3i pi/4)"]))
    if 4 in cfg.which:
        c = dirac_sea_chain()
        z = cfg.zetas or parse_zeta(FIG4_ZETA)
        tables.append(_flow_table(cfg, "fig4", c, c.to_json(), z,
                                  ["Dirac-sea chain, Fermi points at pi/2 and 3pi/4"]))
    if 5 in cfg.which:
        t = Table("fig5", ["series", "zeta", "gamma", "h", "alpha", "X_size", "S"],
                  comments=_provenance(cfg, None, ["XY grid and boost trajectories (s = 0)"]))
        zs = cfg.zetas or parse_zeta("0:0.5:0.1")
        for n in sizes_default:
            grid = [(g, h) for g in FIG5_GAMMA for h in FIG5_H]
            res = _pmap(_xy_entropy_task, [(g, h, n, cfg.alphas, cfg.mode, cfg.tol) for g, h in grid],
                        cfg.jobs)
            for (g, h), S in zip(grid, res):
                for i, a in enumerate(cfg.alphas):
                    t.rows.append(["grid", "", g, h, a, n, S[i]])
            for j, (g0, h0) in enumerate(FIG5_STARTS):
                pts = []
                for z in zs:
                    try:
                        g, _, h = transform_xydm(z, g0, 0.0, h0)
                    except FlowSingularityError:
                        continue
                    pts.append((z, g, h))
                res = _pmap(_xy_entropy_task, [(g, h, n, cfg.alphas, cfg.mode, cfg.tol)
                                               for _, g, h in pts], cfg.jobs)
                for (z, g, h), S in zip(pts, res):
                    for i, a in enumerate(cfg.alphas):
                        t.rows.append([f"trajectory{j + 1}", z, g, h, a, n, S[i]])
        tables.append(t)
    return tables


DISPATCH = {
    "classify": cmd_classify,
    "entropy": cmd_entropy,
    "asym": cmd_asym,
    "flow": cmd_flow,
    "theta-entropy": cmd_theta_entropy,
    "multi": cmd_multi,
    "figures": cmd_figures,
}


def _origin(exc: BaseException) -> str:
    """``module.function`` of the innermost library frame that raised ``exc``."""
    where = "fermichain"
    for frame, _ in traceback.walk_tb(exc.__traceback__):
        mod = frame.f_globals.get("__name__", "")
        if mod.startswith("fermichain.") and mod != __name__:
            where = f"{mod.split('.', 1)[1]}.{frame.f_code.co_name}"
    return where


def run(cfg: RunConfig, stdout=None, stderr=None) -> int:
    """Execute a parsed configuration and write its tables.

    Returns the process exit code.
    """
    stdout = sys.stdout if stdout is None else stdout
    stderr = sys.stderr if stderr is None else stderr
    try:
        tables = DISPATCH[cfg.command](cfg)
        _emit(cfg, tables, stdout)
    except FermiChainError as exc:
        stderr.write(f"fermichain: {cfg.command} failed in {_origin(exc)}: "
                     f"{type(exc).__name__}: {exc}\n")
        return 1
    except OSError as exc:
        stderr.write(f"fermichain: {cfg.command} could not write output: {exc}\n")
        return 1
    return 0


def main(argv: Sequence[str] | None = None) -> int:
    """Console entry point."""
    try:
        cfg = parse_config(argv)
    except UsageError as exc:
        sys.stderr.write(f"fermichain: usage error: {exc}\n")
        return 2
    except SystemExit as exc:
        return int(exc.code or 0)
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())
