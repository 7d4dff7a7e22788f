"""Command-line front end: a thin client of the HTTP service.

Requests are sent to the FastAPI app in-process by default (no server
needed) or to a running instance via ``--server``.  Reports are emitted as
canonical JSON; sweep experiments additionally produce a CSV of their data
points.  Exit status: 0 on success, 1 when a report carries invariant
failures (or any acceptance criterion fails), 2 on usage or validation
errors, 3 on transport errors.
"""

from __future__ import annotations

import argparse
import asyncio
import json
import sys
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Optional

import httpx

from . import __version__
from .reports import canonical_json, sweep_rows, write_csv_text

COMMANDS = ("constants", "eval", "appendix", "curvature", "calculus",
            "eigen", "alpha0", "s0", "all", "serve")

_ENDPOINTS = {
    "constants": "/constants",
    "eval": "/eval",
    "appendix": "/experiments/appendix",
    "curvature": "/experiments/curvature",
    "calculus": "/experiments/calculus",
    "eigen": "/experiments/eigen",
    "alpha0": "/experiments/alpha0",
    "s0": "/experiments/s0",
    "all": "/experiments/all",
}


@dataclass
class RunConfig:
    """Fully resolved invocation: defaults < config file < flags."""

    command: str
    N: int = 5
    q: str = "two_flat"
    a: float = 1.0
    R: float = 1.0
    alpha: float = 0.0
    c: float = 1.0
    eps: float = 0.1
    rho_P: Optional[float] = None
    d: float = 0.0
    eps_start: Optional[float] = None
    eps_count: Optional[int] = None
    eps_ratio: float = 2.0
    samples: int = 1_000_000
    x_max: float = 1e3
    grid_size: int = 512
    r_trunc: float = 50.0
    alpha_grid: Optional[str] = None
    eps_min_factor: float = 3e-4
    rng_seed: int = 42
    output_path: Optional[str] = None
    format: str = "json"
    server: Optional[str] = None
    field_json: Optional[str] = None
    allow_low_dimension: bool = False
    host: str = "127.0.0.1"
    port: int = 8000
    extra: dict = field(default_factory=dict)


_CONFIG_COERCERS = {
    "N": int, "samples": int, "grid_size": int, "eps_count": int,
    "rng_seed": int, "port": int,
    "a": float, "R": float, "alpha": float, "eps_start": float,
    "eps_ratio": float, "x_max": float, "r_trunc": float,
    "eps_min_factor": float, "c": float, "eps": float, "rho_P": float,
    "d": float,
    "allow_low_dimension": lambda v: v.strip().lower() in ("1", "true", "yes"),
}


def _load_config_file(path: str) -> dict:
    values = {}
    text = Path(path).read_text()
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{lineno}: expected key=value, got {line!r}")
        key, _, raw = line.partition("=")
        key = key.strip()
        raw = raw.strip()
        try:
            values[key] = _CONFIG_COERCERS.get(key, str)(raw)
        except ValueError as err:
            raise ValueError(f"{path}:{lineno}: bad value for {key}: {err}")
    return values


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sobolevlab",
        description="Numerical laboratory for a family of sharp Sobolev "
                    "inequalities on balls")
    parser.add_argument("--version", action="version", version=__version__)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="flat key=value config file")
    common.add_argument("--N", type=int, dest="N")
    common.add_argument("--q", dest="q",
                        help="exponent value or keyword "
                             "(two_sharp, two_flat, midpoint)")
    common.add_argument("--a", type=float, dest="a")
    common.add_argument("--R", type=float, dest="R")
    common.add_argument("--alpha", type=float, dest="alpha")
    common.add_argument("--seed", type=int, dest="rng_seed")
    common.add_argument("--output", dest="output_path",
                        help="write the report here instead of stdout")
    common.add_argument("--format", choices=("json", "csv"), dest="format")
    common.add_argument("--server", dest="server",
                        help="base URL of a running service "
                             "(default: in-process)")
    common.add_argument("--allow-low-dimension", action="store_true",
                        dest="allow_low_dimension", default=None)

    sub = parser.add_subparsers(dest="command", metavar="command")
    sub.required = True

    sub.add_parser("constants", parents=[common],
                   help="exponents, closed-form constants and oracle residuals")

    p_eval = sub.add_parser("eval", parents=[common],
                            help="functional report of one field")
    p_eval.add_argument("--field-json", dest="field_json",
                        help="JSON field description "
                             '{"type","N","R","a","q","c","eps","rho_P","d","alpha"}')
    p_eval.add_argument("--c", type=float, dest="c")
    p_eval.add_argument("--eps", type=float, dest="eps")
    p_eval.add_argument("--rho-P", type=float, dest="rho_P")
    p_eval.add_argument("--d", type=float, dest="d")

    for name in ("appendix", "curvature"):
        p = sub.add_parser(name, parents=[common],
                           help=f"{name} sweep over a geometric eps grid")
        p.add_argument("--eps-start", type=float, dest="eps_start")
        p.add_argument("--eps-count", type=int, dest="eps_count")
        p.add_argument("--eps-ratio", type=float, dest="eps_ratio")

    p_calc = sub.add_parser("calculus", parents=[common],
                            help="pointwise inequality sampling")
    p_calc.add_argument("--samples", type=int, dest="samples")
    p_calc.add_argument("--x-max", type=float, dest="x_max")

    p_eig = sub.add_parser("eigen", parents=[common],
                           help="radial eigenfunction residuals")
    p_eig.add_argument("--grid-size", type=int, dest="grid_size")
    p_eig.add_argument("--r-trunc", type=float, dest="r_trunc")

    for name in ("alpha0", "s0"):
        p = sub.add_parser(name, parents=[common],
                           help="sharp-coupling lower bounds" if name == "alpha0"
                                else "alpha = 0 gap below the threshold")
        p.add_argument("--alpha-grid", dest="alpha_grid",
                       help="comma-separated coupling grid")
        p.add_argument("--eps-min-factor", type=float, dest="eps_min_factor")

    sub.add_parser("all", parents=[common],
                   help="run the full acceptance suite")

    p_serve = sub.add_parser("serve", parents=[common],
                             help="run the HTTP service")
    p_serve.add_argument("--host", dest="host")
    p_serve.add_argument("--port", type=int, dest="port")
    return parser


def parse_config(argv, config_file: Optional[str] = None) -> RunConfig:
    """Resolve a RunConfig from argv and an optional config file.

    Flag values override file values, which override the defaults.  Raises
    ``SystemExit`` (status 2) on unknown flags or malformed values and
    ``ValueError`` on a malformed config file.
    """
    parser = _build_parser()
    namespace = parser.parse_args(argv)

    config = RunConfig(command=namespace.command)
    path = getattr(namespace, "config", None) or config_file
    if path:
        for key, value in _load_config_file(path).items():
            if hasattr(config, key):
                setattr(config, key, value)
            else:
                config.extra[key] = value

    for key, value in vars(namespace).items():
        if key in ("command", "config"):
            continue
        if value is not None and hasattr(config, key):
            setattr(config, key, value)
    return config


def _alpha_grid_list(config: RunConfig):
    if config.alpha_grid is None:
        return None
    try:
        return [float(tok) for tok in config.alpha_grid.split(",") if tok.strip()]
    except ValueError:
        raise ValueError(f"bad --alpha-grid value {config.alpha_grid!r}")


def _request_payload(config: RunConfig) -> dict:
    cmd = config.command
    if cmd == "constants":
        return {"N": config.N, "q": config.q,
                "allow_low_dimension": config.allow_low_dimension}
    if cmd == "eval":
        payload = {"N": config.N, "R": config.R, "a": config.a,
                   "q": config.q, "alpha": config.alpha, "c": config.c,
                   "eps": config.eps, "d": config.d,
                   "rho_P": config.rho_P if config.rho_P is not None
                   else config.R}
        if config.field_json:
            try:
                payload.update(json.loads(config.field_json))
            except json.JSONDecodeError as err:
                raise ValueError(f"bad --field-json: {err}")
        return payload
    if cmd == "appendix":
        return {"N": config.N, "q": config.q, "R": config.R,
                "eps_start": config.eps_start,
                "eps_count": config.eps_count or 7,
                "eps_ratio": config.eps_ratio}
    if cmd == "curvature":
        return {"N": config.N, "R": config.R, "eps_start": config.eps_start,
                "eps_count": config.eps_count or 6,
                "eps_ratio": config.eps_ratio}
    if cmd == "calculus":
        return {"N": config.N, "q": config.q, "samples": config.samples,
                "rng_seed": config.rng_seed, "x_max": config.x_max}
    if cmd == "eigen":
        return {"N": config.N, "grid_size": config.grid_size,
                "r_trunc": config.r_trunc}
    if cmd == "alpha0":
        return {"N": config.N, "q": config.q, "a": config.a, "R": config.R,
                "alpha_grid": _alpha_grid_list(config),
                "eps_min_factor": config.eps_min_factor,
                "rng_seed": config.rng_seed}
    if cmd == "s0":
        payload = {"N": config.N, "q": config.q, "a": config.a,
                   "R": config.R, "eps_min_factor": config.eps_min_factor,
                   "rng_seed": config.rng_seed}
        grid = _alpha_grid_list(config)
        if grid is not None:
            payload["alpha_grid"] = grid
        return payload
    if cmd == "all":
        return {}
    raise ValueError(f"unknown command {cmd!r}")


async def _post(config: RunConfig, payload: dict) -> httpx.Response:
    endpoint = _ENDPOINTS[config.command]
    if config.server:
        async with httpx.AsyncClient(base_url=config.server,
                                     timeout=3600.0) as client:
            return await client.post(endpoint, json=payload)
    from .service import app
    transport = httpx.ASGITransport(app=app)
    async with httpx.AsyncClient(transport=transport,
                                 base_url="http://sobolevlab.internal",
                                 timeout=None) as client:
        return await client.post(endpoint, json=payload)


def _emit(config: RunConfig, report: dict) -> int:
    results = report.get("results") or {}
    rows = sweep_rows(results) if isinstance(results, dict) else None

    if config.format == "csv":
        if rows is None:
            print("error: no sweep data to render as CSV for "
                  f"'{config.command}'", file=sys.stderr)
            return 2
        text = write_csv_text(rows)
    else:
        text = canonical_json(report)

    if config.output_path:
        Path(config.output_path).write_text(text)
        if config.format == "json" and rows is not None:
            sidecar = Path(config.output_path).with_suffix(".csv")
            sidecar.write_text(write_csv_text(rows))
    else:
        sys.stdout.write(text)
    return 0


def run(config: RunConfig) -> int:
    """Dispatch one resolved invocation; returns exit status."""
    if config.command == "serve":
        import uvicorn

        from .service import app
        uvicorn.run(app, host=config.host, port=config.port)
        return 0

    try:
        payload = _request_payload(config)
    except ValueError as err:
        print(f"error: {err}", file=sys.stderr)
        return 2

    try:
        response = asyncio.run(_post(config, payload))
    except httpx.HTTPError as err:
        print(f"transport error: {err}", file=sys.stderr)
        return 3

    if response.status_code != 200:
        try:
            detail = response.json().get("detail")
        except json.JSONDecodeError:
            detail = response.text
        print(f"error: {detail}", file=sys.stderr)
        return 2

    body = response.json()
    report = {
        "config": {k: v for k, v in asdict(config).items() if k != "extra"},
        "results": body.get("results"),
        "invariant_failures": body.get("invariant_failures", []),
        "version": body.get("version", __version__),
    }
    status = _emit(config, report)
    if status != 0:
        return status
    return 1 if report["invariant_failures"] else 0


def main(argv=None) -> int:
    config = parse_config(sys.argv[1:] if argv is None else argv)
    return run(config)


if __name__ == "__main__":
    sys.exit(main())
