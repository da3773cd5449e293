"""Command-line front end: ``schurdyn {sample-spp,sample-gt,stats,verify}``.

Exit codes: 0 success, 1 invalid input, 2 a verification check failed.
Effective settings come from flags, then a JSON ``--config`` file, then
defaults, and are echoed into every output header.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import asdict, dataclass, field, fields
from typing import Sequence

import numpy as np

from . import __version__
from .combinatorics import PlanePartition, PlanePartitionShape, diagonal_slices, is_gt_pattern, volume
from .oracle import mean_volume_closed_form
from .samplers import grid_to_plane_partition, sample_gt_batch, sample_spp_batch
from .specializations import EdreiSpec
from .verification import CHECKS, CheckConfig, run_checks

SCHEMA_VERSION = 1
SHADES = " .:-=+*#%@"


class ValidationError(ValueError):
    """Bad user input; reported with exit code 1."""


@dataclass
class RunConfig:
    command: str = ""
    A: int = 2
    B: int = 2
    pi: list[int] = field(default_factory=list)
    q: float = 0.5
    q_weights: list[float] | None = None
    alpha_plus: list[float] = field(default_factory=list)
    alpha_minus: list[float] = field(default_factory=list)
    beta_plus: list[float] = field(default_factory=list)
    beta_minus: list[float] = field(default_factory=list)
    gamma_plus: float = 0.0
    gamma_minus: float = 0.0
    N: int = 4
    samples: int = 10
    seed: int = 0
    threads: int = 1
    format: str = "jsonl"
    out: str | None = None
    only: list[str] | None = None
    input: list[str] | None = None
    quick: bool = False

    def shape(self) -> PlanePartitionShape:
        try:
            return PlanePartitionShape(self.A, self.B, tuple(self.pi))
        except ValueError as exc:
            raise ValidationError(str(exc)) from exc

    def character(self) -> EdreiSpec:
        if self.gamma_plus or self.gamma_minus:
            raise ValidationError("gamma parameters are not supported: the path sampler needs "
                                  "finitely many alpha and beta parameters and gamma = 0")
        try:
            return EdreiSpec(tuple(self.alpha_plus), tuple(self.alpha_minus),
                             tuple(self.beta_plus), tuple(self.beta_minus))
        except ValueError as exc:
            raise ValidationError(str(exc)) from exc

    def validate(self) -> None:
        if self.samples < 0:
            raise ValidationError("--samples must be nonnegative")
        if self.threads < 1:
            raise ValidationError("--threads must be at least 1")
        if self.format not in ("jsonl", "ascii", "svg"):
            raise ValidationError(f"unknown format {self.format!r}")
        if self.command in ("sample-spp", "stats") and self.q_weights is None and not 0 < self.q < 1:
            raise ValidationError("--q must lie in (0, 1)")
        if self.command == "sample-gt" and self.N < 1:
            raise ValidationError("--N must be positive")
        if any(a < 0 for a in self.alpha_plus + self.alpha_minus):
            raise ValidationError("alpha parameters must be nonnegative")


# ---------------------------------------------------------------- argument handling


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _ints(text: str) -> list[int]:
    return [int(x) for x in text.split(",") if x.strip()] if text else []


def _floats(text: str) -> list[float]:
    return [float(x) for x in text.split(",") if x.strip()] if text else []


def _names(text: str) -> list[str]:
    return [x.strip() for x in text.split(",") if x.strip()]


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="schurdyn", description="Exact samplers and identity checks for Schur processes.")
    p.add_argument("--version", action="version", version=f"schurdyn {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp):
        sp.add_argument("--config", help="JSON file with default settings")
        sp.add_argument("--samples", type=int)
        sp.add_argument("--seed", type=int)
        sp.add_argument("--threads", type=int)
        sp.add_argument("--format", choices=("jsonl", "ascii", "svg"))
        sp.add_argument("--out", help="output path (default: stdout)")

    def spp(sp):
        sp.add_argument("--A", type=int)
        sp.add_argument("--B", type=int)
        sp.add_argument("--pi", type=_ints, help="back wall, e.g. 2,1,1,0")
        sp.add_argument("--q", type=float)
        sp.add_argument("--q-weights", type=_floats, dest="q_weights",
                        help="one weight per interior slice, comma separated")

    def gt(sp):
        for name in ("alpha-plus", "alpha-minus", "beta-plus", "beta-minus"):
            sp.add_argument(f"--{name}", type=_floats, dest=name.replace("-", "_"))
        sp.add_argument("--N", type=int)

    sp = sub.add_parser("sample-spp", help="sample q^volume plane partitions")
    common(sp)
    spp(sp)
    sg = sub.add_parser("sample-gt", help="sample Gelfand-Tsetlin paths of a character")
    common(sg)
    gt(sg)
    st = sub.add_parser("stats", help="aggregate sample files or fresh samples")
    common(st)
    spp(st)
    gt(st)
    st.add_argument("--input", nargs="+", help="JSONL files written by sample-spp or sample-gt")
    st.add_argument("--kind", choices=("spp", "gt"), default=None, help="what to sample when no input is given")
    ve = sub.add_parser("verify", help="run the acceptance checks")
    ve.add_argument("--config", help="JSON file with default settings")
    ve.add_argument("--only", type=_names, help=f"comma separated subset of {','.join(CHECKS)}")
    ve.add_argument("--threads", type=int)
    ve.add_argument("--out", help="write the JSON report here")
    ve.add_argument("--quick", action="store_true", help="smaller sample sizes")
    return p


def resolve_config(args: argparse.Namespace) -> RunConfig:
    """Flags override the config file, which overrides the defaults."""
    file_cfg = {}
    if getattr(args, "config", None):
        try:
            with open(args.config) as fh:
                file_cfg = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ValidationError(f"cannot read config {args.config}: {exc}") from exc
        if not isinstance(file_cfg, dict):
            raise ValidationError("config file must hold a JSON object")
    names = {f.name for f in fields(RunConfig)}
    unknown = set(file_cfg) - names
    if unknown:
        raise ValidationError(f"unknown config keys: {sorted(unknown)}")
    values = {**file_cfg}
    for name in names:
        v = getattr(args, name, None)
        if v is not None and v is not False:
            values[name] = v
    values["command"] = args.command
    cfg = RunConfig(**values)
    cfg.validate()
    return cfg


# ---------------------------------------------------------------- rendering


RECORD_FIELDS = {
    "header": {"schema": int, "records": str, "version": str, "config": dict},
    "plane_partition": {"schema": int, "index": int, "A": int, "B": int, "pi": list, "entries": list,
                        "volume": int, "draws": int, "slices": list},
    "gt_pattern": {"schema": int, "index": int, "levels": list},
    "summary": {"schema": int, "samples": int, "mean_levels": list},
}


def validate_record(obj: dict) -> None:
    """Raise ValidationError unless ``obj`` is a well-formed record of this schema version."""
    kind = obj.get("kind")
    if kind not in RECORD_FIELDS:
        raise ValidationError(f"unknown record kind {kind!r}")
    if obj.get("schema") != SCHEMA_VERSION:
        raise ValidationError(f"unsupported schema {obj.get('schema')!r}")
    for key, typ in RECORD_FIELDS[kind].items():
        if not isinstance(obj.get(key), typ):
            raise ValidationError(f"{kind} record: field {key!r} missing or not {typ.__name__}")
    if kind == "plane_partition":
        try:
            shape = PlanePartitionShape(obj["A"], obj["B"], tuple(obj["pi"]))
            pp = PlanePartition(shape, tuple(tuple(r) for r in obj["entries"]))
        except ValueError as exc:
            raise ValidationError(str(exc)) from exc
        if volume(pp) != obj["volume"] or [list(s) for s in diagonal_slices(pp)] != obj["slices"]:
            raise ValidationError("volume or slices disagree with entries")
    elif kind == "gt_pattern" and not is_gt_pattern([tuple(l) for l in obj["levels"]]):
        raise ValidationError("levels do not interlace")


def _header(cfg: RunConfig, kind: str) -> dict:
    return {"kind": "header", "schema": SCHEMA_VERSION, "records": kind, "version": __version__,
            "config": asdict(cfg)}


def _dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def ascii_heights(grid, shape: PlanePartitionShape, top: int | float | None = None) -> str:
    """Height and a shade character per cell; back-wall cells print as dots."""
    rows = []
    vals = [v for i in range(shape.A) for j in range(shape.row_start(i), shape.B) for v in [grid[i][j]]]
    top = top if top is not None else max(vals, default=0)
    for i in range(shape.A):
        cells = []
        for j in range(shape.B):
            if j < shape.row_start(i):
                cells.append("   .  ")
                continue
            v = grid[i][j]
            shade = SHADES[min(len(SHADES) - 1, int(round((len(SHADES) - 1) * v / top)))] if top else " "
            cells.append(f"{v:5.4g}{shade}" if isinstance(v, float) else f"{v:5d}{shade}")
        rows.append("".join(cells))
    return "\n".join(rows)


def svg_lozenges(grid, shape: PlanePartitionShape, unit: float = 20.0) -> str:
    """Isometric projection of the stacked cubes as a standalone SVG document."""
    c30, s30 = math.cos(math.pi / 6), 0.5
    # iso coordinates: x along columns, y along rows, z up
    def pt(x, y, z):
        return ((x - y) * c30 * unit, ((x + y) * s30 - z) * unit)

    faces = []
    cubes = []
    for i in range(shape.A):
        for j in range(shape.row_start(i), shape.B):
            for k in range(int(grid[i][j])):
                cubes.append((i, j, k))
    cubes.sort(key=lambda c: (c[0] + c[1] + c[2]))
    for i, j, k in cubes:
        x, y, z = j, i, k
        top = [pt(x, y, z + 1), pt(x + 1, y, z + 1), pt(x + 1, y + 1, z + 1), pt(x, y + 1, z + 1)]
        right = [pt(x + 1, y, z), pt(x + 1, y + 1, z), pt(x + 1, y + 1, z + 1), pt(x + 1, y, z + 1)]
        left = [pt(x, y + 1, z), pt(x + 1, y + 1, z), pt(x + 1, y + 1, z + 1), pt(x, y + 1, z + 1)]
        for poly, color in ((top, "#e8e8e8"), (right, "#9a9a9a"), (left, "#5a5a5a")):
            faces.append((poly, color))
    xs = [p[0] for poly, _ in faces for p in poly] or [0.0]
    ys = [p[1] for poly, _ in faces for p in poly] or [0.0]
    pad = unit
    x0, y0 = min(xs) - pad, min(ys) - pad
    w, h = max(xs) - x0 + pad, max(ys) - y0 + pad
    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{w:.1f}" height="{h:.1f}" '
           f'viewBox="{x0:.1f} {y0:.1f} {w:.1f} {h:.1f}">']
    for poly, color in faces:
        pts = " ".join(f"{px:.2f},{py:.2f}" for px, py in poly)
        out.append(f'<polygon points="{pts}" fill="{color}" stroke="black" stroke-width="0.5"/>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def _write(cfg: RunConfig, text: str) -> None:
    if cfg.out:
        with open(cfg.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------- commands


def _spp_records(cfg: RunConfig):
    shape = cfg.shape()
    try:
        grids, draws = sample_spp_batch(shape, cfg.q, cfg.samples, cfg.seed, cfg.threads, cfg.q_weights)
    except ValueError as exc:
        raise ValidationError(str(exc)) from exc
    recs = []
    for idx, (g, d) in enumerate(zip(grids, draws)):
        pp = grid_to_plane_partition(shape, g)
        recs.append({"kind": "plane_partition", "schema": SCHEMA_VERSION, "index": idx, "A": shape.A,
                     "B": shape.B, "pi": list(shape.pi), "entries": [list(r) for r in pp.entries],
                     "volume": int(g.sum()), "draws": int(d),
                     "slices": [list(s) for s in diagonal_slices(pp)]})
    return shape, grids, recs


def cmd_sample_spp(cfg: RunConfig) -> int:
    shape, grids, recs = _spp_records(cfg)
    if cfg.format == "jsonl":
        lines = [_dumps(_header(cfg, "plane_partition"))] + [_dumps(r) for r in recs]
        _write(cfg, "\n".join(lines) + "\n")
    elif cfg.format == "ascii":
        blocks = [f"# sample {r['index']} volume {r['volume']} draws {r['draws']}\n"
                  + ascii_heights(g.tolist(), shape) for r, g in zip(recs, grids)]
        _write(cfg, "\n\n".join(blocks) + ("\n" if blocks else ""))
    else:
        if not recs:
            raise ValidationError("svg output needs at least one sample")
        _write(cfg, svg_lozenges(grids[0].tolist(), shape))
    return 0


def _gt_records(cfg: RunConfig):
    char = cfg.character()
    try:
        paths = sample_gt_batch(char, cfg.N, cfg.samples, cfg.seed, cfg.threads)
    except ValueError as exc:
        raise ValidationError(str(exc)) from exc
    for p in paths:
        assert is_gt_pattern(p), p
    return [{"kind": "gt_pattern", "schema": SCHEMA_VERSION, "index": i, "levels": [list(l) for l in p]}
            for i, p in enumerate(paths)]


def _level_means(level_lists: list[list[list[int]]]) -> list[list[float]]:
    N = len(level_lists[0])
    return [np.mean([levels[k] for levels in level_lists], axis=0).tolist() for k in range(N)]


def cmd_sample_gt(cfg: RunConfig) -> int:
    recs = _gt_records(cfg)
    if cfg.format == "jsonl":
        lines = [_dumps(_header(cfg, "gt_pattern"))] + [_dumps(r) for r in recs]
        if recs:
            lines.append(_dumps({"kind": "summary", "schema": SCHEMA_VERSION, "samples": len(recs),
                                 "mean_levels": _level_means([r["levels"] for r in recs])}))
        _write(cfg, "\n".join(lines) + "\n")
    elif cfg.format == "ascii":
        blocks = []
        for r in recs:
            width = max(len(" ".join(map(str, lev))) for lev in r["levels"])
            rows = [" ".join(map(str, lev)).center(width) for lev in reversed(r["levels"])]
            blocks.append(f"# path {r['index']}\n" + "\n".join(rows))
        _write(cfg, "\n\n".join(blocks) + ("\n" if blocks else ""))
    else:
        raise ValidationError("svg output is available for plane partitions only")
    return 0


def _read_records(paths: Sequence[str]) -> tuple[list[dict], list[dict]]:
    headers, recs = [], []
    for path in paths:
        try:
            with open(path) as fh:
                for line in fh:
                    if not line.strip():
                        continue
                    obj = json.loads(line)
                    try:
                        validate_record(obj)
                    except ValidationError as exc:
                        raise ValidationError(f"{path}: {exc}") from exc
                    if obj["kind"] == "header":
                        headers.append(obj)
                    elif obj["kind"] in ("plane_partition", "gt_pattern"):
                        recs.append(obj)
        except (OSError, json.JSONDecodeError, AttributeError) as exc:
            raise ValidationError(f"cannot read {path}: {exc}") from exc
    return headers, recs


def cmd_stats(cfg: RunConfig, kind: str | None = None) -> int:
    if cfg.input:
        headers, recs = _read_records(cfg.input)
    else:
        if kind == "gt" or (kind is None and (cfg.alpha_plus or cfg.beta_plus or cfg.alpha_minus or cfg.beta_minus)):
            recs = _gt_records(cfg)
        else:
            recs = _spp_records(cfg)[2]
        headers = []
    if not recs:
        raise ValidationError("no samples to aggregate")
    kinds = {r["kind"] for r in recs}
    if len(kinds) != 1:
        raise ValidationError("cannot mix plane partitions and paths")
    report = {"kind": "stats", "schema": SCHEMA_VERSION, "samples": len(recs), "config": asdict(cfg)}
    if kinds == {"plane_partition"}:
        shapes = {(r["A"], r["B"], tuple(r["pi"])) for r in recs}
        if len(shapes) != 1:
            raise ValidationError("samples come from different shapes")
        A, B, pi = shapes.pop()
        shape = PlanePartitionShape(A, B, pi)
        grids = np.array([grid_to_plane_partition_grid(shape, r["entries"]) for r in recs], dtype=float)
        vols = grids.sum(axis=(1, 2))
        report["records"] = "plane_partition"
        report["mean_height"] = grids.mean(axis=0).tolist()
        report["mean_volume"] = float(vols.mean())
        report["stderr_volume"] = float(vols.std(ddof=1) / math.sqrt(len(vols))) if len(vols) > 1 else None
        qs = {h["config"]["q"] for h in headers if h["config"].get("q_weights") is None} if headers else (
            {cfg.q} if cfg.q_weights is None else set())
        if len(qs) == 1:
            q = qs.pop()
            report["q"] = q
            report["closed_form_mean_volume"] = mean_volume_closed_form(shape, q)
    else:
        levels = [r["levels"] for r in recs]
        if len({len(l) for l in levels}) != 1:
            raise ValidationError("paths have different depths")
        report["records"] = "gt_pattern"
        report["mean_levels"] = _level_means(levels)
    if cfg.format == "ascii" and report["records"] == "plane_partition":
        _write(cfg, ascii_heights(report["mean_height"], shape) + f"\nmean volume {report['mean_volume']:.6g}\n")
    else:
        _write(cfg, json.dumps(report, sort_keys=True, indent=2) + "\n")
    return 0


def grid_to_plane_partition_grid(shape: PlanePartitionShape, entries) -> list[list[int]]:
    grid = [[0] * shape.B for _ in range(shape.A)]
    for i, row in enumerate(entries):
        for off, v in enumerate(row):
            grid[i][shape.row_start(i) + off] = v
    return grid


def cmd_verify(cfg: RunConfig) -> int:
    check_cfg = CheckConfig(threads=cfg.threads)
    if cfg.quick:
        check_cfg = CheckConfig(samples_1x1=20_000, samples_2x2=50_000, samples_mean=20_000,
                                draw_runs=10_000, samples_gt=20_000, threads=cfg.threads)
    try:
        results = run_checks(cfg.only, check_cfg)
    except ValueError as exc:
        raise ValidationError(str(exc)) from exc
    ok = True
    doc = {"kind": "verify", "schema": SCHEMA_VERSION, "config": asdict(cfg), "checks": {}}
    for name, reports in results.items():
        good = all(r.passed for r in reports)
        ok &= good
        print(f"[{'PASS' if good else 'FAIL'}] {name}")
        for r in reports:
            print("    " + r.line())
        doc["checks"][name] = {"passed": good, "reports": [r.as_dict() for r in reports]}
    doc["passed"] = ok
    if cfg.out:
        with open(cfg.out, "w") as fh:
            json.dump(doc, fh, sort_keys=True, indent=2, default=str)
    return 0 if ok else 2


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = resolve_config(args)
        if args.command == "sample-spp":
            return cmd_sample_spp(cfg)
        if args.command == "sample-gt":
            return cmd_sample_gt(cfg)
        if args.command == "stats":
            return cmd_stats(cfg, args.kind)
        return cmd_verify(cfg)
    except ValidationError as exc:
        print(f"schurdyn: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
