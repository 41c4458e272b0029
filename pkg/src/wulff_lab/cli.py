"""Command-line front-end.

Commands: compute | flow | variation | cut | verify | search | paper-examples.
Common flags: --norm, --shape, --p, --grid, --seed, --out, --format, --config.
Norm/shape accept quick forms (``elliptic:1,2``, ``wulff:1:0.3,0``), inline
JSON records, or ``@file.json``; a TOML/JSON config file supplies defaults
that explicit flags override. Numeric output carries 15 significant digits.

Exit codes: 0 ok, 1 suite violation found, 2 config error, 3 numeric failure.
"""

import argparse
import csv
import io
import json
import sys
from pathlib import Path

import numpy as np

from .bodies import angle_grid
from .errors import ConfigError, WulffLabError
from .functionals import evaluate
from .iamcf import FlowConfig, run as run_flow
from .specs import norm_from_spec, shape_from_spec
from .variation import PerturbationField, cut_experiment, quotient_rate_iamcf, validate_rates
from .verify import SUITES, SearchConfig, minimize, paper_example_rows, run_suite
from . import verify as _verify

_FMT = "%.15g"


def main(argv=None):
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        config = _merge_config(args)
        return _COMMANDS[args.command](config)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except WulffLabError as exc:
        print(f"numeric failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 3


def _build_parser():
    parser = argparse.ArgumentParser(prog="wulff-lab", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--norm", default=None, help="euclidean | elliptic:a,b | lp:q | JSON | @file")
        sp.add_argument("--shape", action="append", default=None, help="shape quick form, JSON, or @file")
        sp.add_argument("--p", type=float, default=None, help="momentum exponent (> 1)")
        sp.add_argument("--grid", type=int, default=None, help="angle grid size (power of two >= 64)")
        sp.add_argument("--seed", type=int, default=None, help="64-bit unsigned seed")
        sp.add_argument("--out", default=None, help="output path (default: stdout)")
        sp.add_argument("--format", choices=("csv", "json"), default=None)
        sp.add_argument("--config", default=None, help="TOML or JSON config file")

    sp = sub.add_parser("compute", help="functional report rows for shapes")
    common(sp)

    sp = sub.add_parser("flow", help="integrate the inverse anisotropic mean curvature flow")
    common(sp)
    sp.add_argument("--T", dest="horizon", type=float, default=None)
    sp.add_argument("--output-times", default=None, help="comma list of output times")
    sp.add_argument("--dt-max", type=float, default=None)
    sp.add_argument("--svg", default=None, help="directory for boundary snapshots")

    sp = sub.add_parser("variation", help="shape-derivative finite-difference validation")
    common(sp)
    sp.add_argument("--fields", type=int, default=None, help="number of random speed fields")
    sp.add_argument("--t-values", default=None, help="comma list of FD step sizes")

    sp = sub.add_parser("cut", help="halfspace-cut experiments on polygons")
    common(sp)
    sp.add_argument("--eps-list", default=None, help="comma list of cut depths")

    sp = sub.add_parser("verify", help="run a verification suite")
    common(sp)
    sp.add_argument("--suite", default=None, choices=SUITES)
    sp.add_argument("--cases", type=int, default=None)

    sp = sub.add_parser("search", help="minimize the quotient by gradient descent")
    common(sp)
    sp.add_argument("--max-iter", type=int, default=None)
    sp.add_argument("--modes", type=int, default=None)
    sp.add_argument("--gtol", type=float, default=None)

    sp = sub.add_parser("paper-examples", help="thin-box and perturbed-ellipse tables")
    common(sp)
    sp.add_argument("--eps-list", default=None)
    sp.add_argument("--axes", default=None, help="comma pair a,b for the elliptic norm")
    return parser


def _merge_config(args):
    """File values under flag names; explicit flags win."""
    merged = {}
    if args.config:
        merged.update(_load_config_file(args.config))
    for key, value in vars(args).items():
        if key == "config":
            continue
        if value is not None:
            merged[key] = value
    merged["command"] = args.command
    return merged


def _load_config_file(path):
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config: file {path} not found")
    text = path.read_bytes()
    if path.suffix == ".json":
        return json.loads(text)
    if path.suffix == ".toml":
        try:
            import tomllib as toml
        except ModuleNotFoundError:
            try:
                import tomli as toml
            except ModuleNotFoundError:
                raise ConfigError("config: TOML support needs Python >= 3.11 or tomli") from None
        return toml.loads(text.decode())
    raise ConfigError(f"config: unsupported file type {path.suffix!r} (use .toml or .json)")


# -- argument materialization -------------------------------------------------


def _get_norm(config):
    return norm_from_spec(_parse_norm_spec(config.get("norm") or "euclidean"))


def _parse_norm_spec(text):
    if isinstance(text, dict):
        return text
    text = str(text)
    if text.startswith("@"):
        return json.loads(Path(text[1:]).read_text())
    if text.startswith("{"):
        return json.loads(text)
    head, _, rest = text.partition(":")
    if head == "euclidean":
        return {"kind": "euclidean", "dim": int(rest)} if rest else {"kind": "euclidean"}
    if head == "elliptic":
        if not rest:
            raise ConfigError("norm: elliptic quick form is elliptic:a,b")
        return {"kind": "elliptic", "axes": _floats(rest, "norm")}
    if head == "lp":
        parts = rest.split(":") if rest else []
        if not parts:
            raise ConfigError("norm: lp quick form is lp:q[:dim]")
        spec = {"kind": "lp", "q": float(parts[0])}
        if len(parts) > 1:
            spec["dim"] = int(parts[1])
        return spec
    raise ConfigError(f"norm: unknown specification {text!r}")


def _get_shapes(config, norm):
    specs = config.get("shape")
    if not specs:
        raise ConfigError("shape: at least one --shape is required")
    if isinstance(specs, (str, dict)):
        specs = [specs]
    grid = angle_grid(_get_grid_n(config))
    return [(spec, shape_from_spec(_parse_shape_spec(spec), grid=grid, norm=norm)) for spec in specs]


def _parse_shape_spec(text):
    if isinstance(text, dict):
        return text
    text = str(text)
    if text.startswith("@"):
        return json.loads(Path(text[1:]).read_text())
    if text.startswith("{"):
        return json.loads(text)
    head, _, rest = text.partition(":")
    if head == "wulff":
        parts = rest.split(":") if rest else ["1"]
        spec = {"kind": "wulff", "r": float(parts[0])}
        if len(parts) > 1:
            spec["center"] = _floats(parts[1], "shape")
        return spec
    if head == "box":
        return {"kind": "box", "halfwidths": _floats(rest, "shape")}
    if head == "polygon":
        return {"kind": "polygon", "vertices": [_floats(v, "shape") for v in rest.split(";")]}
    if head == "fourier":
        parts = rest.split(":")
        spec = {"kind": "support_fourier", "a0": float(parts[0]), "coeffs": []}
        if len(parts) > 1 and parts[1]:
            spec["coeffs"] = [_floats(pair, "shape") for pair in parts[1].split(";")]
        return spec
    if head == "ellipse":
        parts = rest.split(":")
        spec = {"kind": "ellipse_excess", "eps": float(parts[0])}
        spec["axes"] = _floats(parts[1], "shape") if len(parts) > 1 else [1.0, 2.0]
        return spec
    raise ConfigError(f"shape: unknown specification {text!r}")


def _floats(text, key):
    try:
        return [float(x) for x in str(text).split(",")]
    except ValueError:
        raise ConfigError(f"{key}: cannot parse number list {text!r}") from None


def _get_p(config):
    p = float(config.get("p", 2.0))
    if p <= 1.0:
        raise ConfigError("p must exceed 1")
    return p


def _get_grid_n(config):
    n = int(config.get("grid", 1024))
    if n < 64 or n & (n - 1) != 0:
        raise ConfigError("grid must be a power of two >= 64")
    return n


def _get_seed(config):
    seed = int(config.get("seed", 0))
    if not 0 <= seed < 2**64:
        raise ConfigError("seed must be a 64-bit unsigned integer")
    return seed


def _float_list(config, key, default):
    raw = config.get(key)
    if raw is None:
        return list(default)
    if isinstance(raw, (list, tuple)):
        return [float(x) for x in raw]
    return _floats(raw, key)


# -- output helpers -----------------------------------------------------------


def _fmt(value):
    if value is None:
        return ""
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, float):
        return _FMT % value
    return str(value)


def _write_rows(config, rows, default_name):
    fieldnames = list(rows[0].keys()) if rows else []
    fmt = config.get("format", "csv")
    if fmt == "json":
        payload = json.dumps(rows, indent=2, default=_json_default) + "\n"
    else:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(fieldnames)
        for row in rows:
            writer.writerow([_fmt(row.get(k)) for k in fieldnames])
        payload = buf.getvalue()
    out = config.get("out")
    if out is None:
        sys.stdout.write(payload)
        return None
    path = Path(out)
    if path.suffix == "" and default_name:
        path = path / default_name if path.is_dir() else path.with_suffix("." + fmt)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(payload)
    return path


def _json_default(obj):
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"not JSON serializable: {type(obj).__name__}")


def _derive_path(config, suffix):
    out = config.get("out")
    if out is None:
        return None
    path = Path(out)
    return path.with_name(path.stem + suffix)


def _write_svg(path, point_loops, size=480):
    """Minimal SVG: closed polylines for each loop of boundary points."""
    all_pts = np.concatenate(point_loops)
    lo, hi = all_pts.min(axis=0), all_pts.max(axis=0)
    span = float(max(hi[0] - lo[0], hi[1] - lo[1], 1e-9))
    pad = 0.05 * span
    scale = size / (span + 2 * pad)

    def to_px(pts):
        x = (pts[:, 0] - lo[0] + pad) * scale
        y = size - (pts[:, 1] - lo[1] + pad) * scale
        return x, y

    parts = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}">']
    colors = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd"]
    for i, loop in enumerate(point_loops):
        x, y = to_px(loop)
        pts = " ".join(f"{xi:.2f},{yi:.2f}" for xi, yi in zip(x, y))
        parts.append(
            f'<polygon points="{pts}" fill="none" stroke="{colors[i % len(colors)]}" stroke-width="1.5"/>'
        )
    parts.append("</svg>")
    Path(path).write_text("\n".join(parts))


# -- commands -------------------------------------------------------------------


def cmd_compute(config):
    norm = _get_norm(config)
    p = _get_p(config)
    rows = []
    for spec, body in _get_shapes(config, norm):
        report = evaluate(body, norm, p)
        rows.append(report.to_row())
    _write_rows(config, rows, "report")
    return 0


def cmd_flow(config):
    norm = _get_norm(config)
    p = _get_p(config)
    shapes = _get_shapes(config, norm)
    if len(shapes) != 1:
        raise ConfigError("shape: flow takes exactly one shape")
    _, body = shapes[0]
    horizon = float(config.get("horizon") or 3.0)
    times = _float_list(config, "output_times", np.linspace(0.0, horizon, 7))
    flow_config = FlowConfig(dt_max=float(config.get("dt_max") or 1e-3))
    trace = run_flow(body, norm, p, horizon, times, flow_config)
    _write_rows(config, trace.rows(), "flow")
    svg_dir = config.get("svg")
    if svg_dir:
        Path(svg_dir).mkdir(parents=True, exist_ok=True)
        for state in trace.states:
            _write_svg(Path(svg_dir) / f"t_{state.t:.4f}.svg", [state.curve.points()])
    return 0


def cmd_variation(config):
    norm = _get_norm(config)
    p = _get_p(config)
    shapes = _get_shapes(config, norm)
    if len(shapes) != 1:
        raise ConfigError("shape: variation takes exactly one shape")
    _, body = shapes[0]
    grid = body.grid
    seed = _get_seed(config)
    n_fields = int(config.get("fields") or 3)
    t_values = _float_list(config, "t_values", (1e-2, 5e-3, 2.5e-3))
    rng = np.random.default_rng(seed)
    fields = [PerturbationField.constant(grid, 1.0)]
    for i in range(n_fields):
        coeff = rng.uniform(-1.0, 1.0, size=4)
        values = (
            coeff[0]
            + coeff[1] * np.cos(2 * grid.theta)
            + coeff[2] * np.sin(3 * grid.theta)
            + coeff[3] * np.cos(5 * grid.theta)
        )
        fields.append(PerturbationField(values, f"random_{i}"))
    rows = []
    for phi in fields:
        for row in validate_rates(body, norm, p, phi, t_values):
            row = {"field": phi.label, **row}
            rows.append(row)
    rows.append(
        {
            "field": "1/H_F",
            "quantity": "dF_quotient_iamcf",
            "t": 0.0,
            "fd_value": None,
            "predicted": quotient_rate_iamcf(body, norm, p),
            "rel_error": None,
            "order_estimate": None,
        }
    )
    _write_rows(config, rows, "variation")
    return 0


def cmd_cut(config):
    norm = _get_norm(config)
    p = _get_p(config)
    eps_list = _float_list(config, "eps_list", [0.1 / 2**k for k in range(5)])
    rows = []
    for spec, body in _get_shapes(config, norm):
        if hasattr(body, "to_polygon"):
            body = body.to_polygon()
        for report in cut_experiment(body, norm, p, eps_list):
            rows.append({"shape": str(spec), **report.to_row()})
    _write_rows(config, rows, "cut")
    return 0


def cmd_verify(config):
    norm = _get_norm(config)
    p = _get_p(config)
    suite = config.get("suite")
    if not suite:
        raise ConfigError("suite: --suite is required for verify")
    report = run_suite(
        suite,
        norm,
        p,
        n_cases=int(config.get("cases") or 200),
        seed=_get_seed(config),
        grid_n=_get_grid_n(config),
    )
    _write_rows(config, report.rows, "suite")
    print(report.summary(), file=sys.stderr)
    for violation in report.violations:
        print(f"  violation: {violation}", file=sys.stderr)
    return 0 if report.passed else 1


def cmd_search(config):
    norm = _get_norm(config)
    p = _get_p(config)
    shapes = _get_shapes(config, norm)
    if len(shapes) != 1:
        raise ConfigError("shape: search takes exactly one shape")
    _, body = shapes[0]
    if not hasattr(body, "h"):
        raise ConfigError("shape: search requires a support-curve shape")
    search_config = SearchConfig(
        modes=int(config.get("modes") or 16),
        gtol=float(config.get("gtol") or 1e-8),
        max_iter=int(config.get("max_iter") or 1000),
    )
    result = minimize(norm, p, body, search_config)
    rows = [{"iteration": i, "F_quotient": v} for i, v in enumerate(result.trajectory)]
    _write_rows(config, rows, "search")
    shape_path = _derive_path(config, ".shape.json")
    payload = json.dumps(result.shape_spec(), indent=2) + "\n"
    if shape_path is None:
        sys.stdout.write(payload)
    else:
        shape_path.write_text(payload)
    print(
        f"search: F_quotient {result.final_quotient!r} after {result.iterations} iterations, "
        f"fit distance {result.fit.distance:.3e}, converged={result.converged}",
        file=sys.stderr,
    )
    return 0


def cmd_paper_examples(config):
    axes = _float_list(config, "axes", (1.0, 2.0))
    if len(axes) != 2:
        raise ConfigError("axes: expected a pair a,b")
    eps_list = _float_list(config, "eps_list", (0.2, 0.1, 0.05, 0.025, 0.0125))
    box_rows, ellipse_rows = paper_example_rows(tuple(axes), eps_list, grid_n=_get_grid_n(config))
    out = config.get("out")
    if out is None:
        _write_rows(config, box_rows, None)
        _write_rows(config, ellipse_rows, None)
        return 0
    fmt = config.get("format", "csv")
    base = Path(out)
    _write_rows({**config, "out": str(base.with_name(base.stem + ".box." + fmt))}, box_rows, None)
    _write_rows(
        {**config, "out": str(base.with_name(base.stem + ".ellipse." + fmt))}, ellipse_rows, None
    )
    return 0


_COMMANDS = {
    "compute": cmd_compute,
    "flow": cmd_flow,
    "variation": cmd_variation,
    "cut": cmd_cut,
    "verify": cmd_verify,
    "search": cmd_search,
    "paper-examples": cmd_paper_examples,
}


if __name__ == "__main__":
    sys.exit(main())
