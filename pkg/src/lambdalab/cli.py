"""Command-line client for the workbench service.

Every subcommand is a thin HTTP client.  By default requests are served
in-process (the FastAPI app is mounted on httpx's ASGI transport, no socket
involved); pass ``--server URL`` to talk to a running `lambdalab serve`
instance instead.  Either way the payloads, validation, and error shapes are
identical, so scripts can move between the two modes freely.

Exit codes: 0 success, 2 usage errors, 3 numeric/calibration failures,
4 term parse errors.

When ``--output FILE`` is given, a ``FILE.manifest.json`` sidecar records the
exact command, resolved configuration, seed, versions, and the SHA-256 of the
bytes written; rerunning the recorded command reproduces those bytes.
"""

from __future__ import annotations

import argparse
import asyncio
import csv
import hashlib
import io
import json
import platform
import secrets
import sys
import time
from typing import Optional

import httpx

from . import __version__
from .schemas import COUNT_FAMILIES, DIST_PARAMETERS, SAMPLE_FAMILIES, RunManifest

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_NUMERIC = 3
EXIT_PARSE = 4

_KIND_TO_EXIT = {"usage": EXIT_USAGE, "numeric": EXIT_NUMERIC, "parse": EXIT_PARSE}


class CliError(Exception):
    def __init__(self, message: str, exit_code: int):
        super().__init__(message)
        self.exit_code = exit_code


class _Client:
    """Uniform ``request(method, path, ...)`` over in-process or remote app.

    httpx's ASGI transport only exists in async flavour, so the in-process
    path spins an event loop per request; fine at CLI call rates.
    """

    def __init__(self, server: Optional[str]):
        self._server = server
        self._app = None
        if server is None:
            from .service import create_app

            self._app = create_app()

    def request(self, method: str, path: str, **kwargs) -> httpx.Response:
        if self._server is not None:
            with httpx.Client(base_url=self._server, timeout=600.0) as client:
                return client.request(method, path, **kwargs)

        async def go() -> httpx.Response:
            transport = httpx.ASGITransport(app=self._app)
            async with httpx.AsyncClient(
                transport=transport, base_url="http://workbench.internal", timeout=600.0
            ) as client:
                return await client.request(method, path, **kwargs)

        return asyncio.run(go())


def _check(resp: httpx.Response) -> dict:
    """Decode a response, translating service error kinds to exit codes."""
    if resp.status_code == 200:
        return resp.json()
    try:
        detail = resp.json()["detail"]
    except Exception:
        raise CliError(f"service error (HTTP {resp.status_code}): {resp.text}", 1)
    if isinstance(detail, dict) and "kind" in detail:
        message = detail.get("message", "")
        if "line" in detail:
            message = f"line {detail['line']}: {message}"
        raise CliError(message, _KIND_TO_EXIT.get(detail["kind"], 1))
    # FastAPI's own validation errors (bad query types etc.) are usage errors
    raise CliError(json.dumps(detail), EXIT_USAGE)


# --------------------------------------------------------------------------
# output plumbing


def _emit(args, data: bytes, config: dict, seed: Optional[int], t0: float) -> None:
    """Write `data` to --output or stdout; file outputs get a manifest."""
    if args.output is None:
        sys.stdout.write(data.decode("utf-8"))
        return
    try:
        with open(args.output, "wb") as fh:
            fh.write(data)
    except OSError as exc:
        raise CliError(f"cannot write {args.output}: {exc.strerror}", EXIT_USAGE)
    manifest = RunManifest(
        command=args.raw_argv,
        config=config,
        seed=seed,
        versions={"lambdalab": __version__, "python": platform.python_version()},
        wall_clock_seconds=round(time.time() - t0, 3),
        output_file=args.output,
        output_sha256=hashlib.sha256(data).hexdigest(),
    )
    with open(args.output + ".manifest.json", "w") as fh:
        fh.write(manifest.model_dump_json(indent=2) + "\n")


def _csv_bytes(header, rows) -> bytes:
    buf = io.StringIO(newline="")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue().encode("utf-8")


def _json_bytes(obj) -> bytes:
    return (json.dumps(obj, indent=2, sort_keys=True) + "\n").encode("utf-8")


def _jsonl_bytes(objs) -> bytes:
    return "".join(json.dumps(o, sort_keys=True) + "\n" for o in objs).encode("utf-8")


# --------------------------------------------------------------------------
# subcommands


def cmd_count(args, client: _Client, t0: float) -> None:
    params = {"family": args.family, "order": args.order, "m": args.m, "h": args.h}
    if args.depth is not None:
        params["depth"] = args.depth
    payload = _check(client.request("GET", "/v1/counts", params=params))
    if args.format == "csv":
        data = _csv_bytes(("n", "coefficient"), [(r["n"], r["coefficient"]) for r in payload["rows"]])
    else:
        data = _json_bytes(payload)
    _emit(args, data, params, None, t0)


def cmd_dist(args, client: _Client, t0: float) -> None:
    params = {"parameter": args.param, "family": args.family, "n": args.n, "m": args.m}
    if args.depth is not None:
        params["depth"] = args.depth
    payload = _check(client.request("GET", "/v1/distribution", params=params))
    if args.format == "csv":
        data = _csv_bytes(
            ("value", "count", "probability"),
            [(r["value"], r["count"], repr(r["probability"])) for r in payload["rows"]],
        )
    else:
        data = _json_bytes(payload)
    _emit(args, data, params, None, t0)


def cmd_constants(args, client: _Client, t0: float) -> None:
    params = {"depth": args.depth if args.depth is not None else 64}
    payload = _check(client.request("GET", "/v1/constants", params=params))
    if args.format == "csv":
        rows = []
        for key, value in sorted(payload.items()):
            if key == "gaussian":
                for name, law in sorted(value.items()):
                    rows.append((f"gaussian.{name}.mean_slope", repr(law["mean_slope"])))
                    rows.append((f"gaussian.{name}.variance_slope", repr(law["variance_slope"])))
            elif key in ("derived", "profile_amplitudes"):
                for name, v in sorted(value.items()):
                    rows.append((f"{key}.{name}", repr(v)))
            elif key in ("a", "b"):
                rows.extend((f"{key}.{level}", repr(v)) for level, v in enumerate(value))
            else:
                rows.append((key, repr(value) if isinstance(value, float) else str(value)))
        data = _csv_bytes(("constant", "value"), rows)
    else:
        data = _json_bytes(payload)
    _emit(args, data, params, None, t0)


def cmd_sample(args, client: _Client, t0: float) -> None:
    if args.format == "csv":
        raise CliError("sample emits JSON lines; --format csv is not available here", EXIT_USAGE)
    if (args.seed is None) == (not args.entropy):
        raise CliError("exactly one of --seed or --entropy is required", EXIT_USAGE)
    seed = args.seed if args.seed is not None else secrets.randbits(63)
    body = {
        "family": args.family,
        "m": args.m,
        "h": args.h,
        "window": list(args.window),
        "seed": seed,
        "count": args.count,
        "workers": args.workers,
        "emit_terms": args.emit_terms,
    }
    if args.z is not None:
        body["z"] = args.z
    if args.max_attempts is not None:
        body["max_attempts"] = args.max_attempts
    if args.ladder_depth is not None:
        body["ladder_depth"] = args.ladder_depth
    payload = _check(client.request("POST", "/v1/sample", json=body))
    lines = []
    for rec in payload["records"]:
        row = {"size": rec["size"], "seed": rec["seed"], "attempt": rec["attempt"]}
        if rec.get("term") is not None:
            row["term"] = rec["term"]
        row["report"] = rec["report"]
        lines.append(row)
    _emit(args, _jsonl_bytes(lines), body, seed, t0)


def cmd_measure(args, client: _Client, t0: float) -> None:
    if args.format == "csv":
        raise CliError("measure emits JSON lines; --format csv is not available here", EXIT_USAGE)
    if args.terms_file is None or args.terms_file == "-":
        raw = sys.stdin.read()
    else:
        try:
            with open(args.terms_file) as fh:
                raw = fh.read()
        except OSError as exc:
            raise CliError(f"cannot read {args.terms_file}: {exc.strerror}", EXIT_USAGE)
    terms = []
    for line in raw.splitlines():
        line = line.strip()
        if not line:
            continue
        # canonical JSON term objects start with '{'; anything else is text
        terms.append(json.loads(line) if line.startswith("{") else line)
    if not terms:
        raise CliError("no terms supplied", EXIT_USAGE)
    payload = _check(client.request("POST", "/v1/measure", json={"terms": terms}))
    _emit(args, _jsonl_bytes(payload["reports"]), {"terms": len(terms)}, None, t0)


def cmd_serve(args, _client, _t0) -> None:  # pragma: no cover - blocks forever
    from .service import serve

    serve(host=args.host, port=args.port)


# --------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lambdalab",
        description="Enumerate, sample, and measure λ-terms in de Bruijn form.",
    )
    parser.add_argument("--server", default=None, metavar="URL",
                        help="talk to a running service instead of in-process")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    def common_output(p):
        p.add_argument("--format", choices=("csv", "json"), default="json")
        p.add_argument("--output", default=None, metavar="FILE",
                       help="write here (plus FILE.manifest.json) instead of stdout")

    p = sub.add_parser("count", help="counting sequence of a term family")
    p.add_argument("--family", choices=COUNT_FAMILIES, default="plain")
    p.add_argument("--order", type=int, required=True, metavar="N",
                   help="largest size to report")
    p.add_argument("--m", type=int, default=0, help="openness bound for m_open")
    p.add_argument("--h", type=int, default=30, help="index bound for h_shallow")
    p.add_argument("--depth", type=int, default=None,
                   help="ladder truncation depth (default: the order)")
    common_output(p)
    p.set_defaults(func=cmd_count)

    p = sub.add_parser("dist", help="exact parameter distribution at one size")
    p.add_argument("--param", choices=DIST_PARAMETERS, required=True)
    p.add_argument("--family", choices=("plain", "closed", "m_open"), default="plain")
    p.add_argument("--n", type=int, required=True, help="term size")
    p.add_argument("--m", type=int, default=0)
    p.add_argument("--depth", type=int, default=None)
    common_output(p)
    p.set_defaults(func=cmd_dist)

    p = sub.add_parser("constants", help="limit-law constants table")
    p.add_argument("--depth", type=int, default=None, help="ladder depth (default 64)")
    common_output(p)
    p.set_defaults(func=cmd_constants)

    p = sub.add_parser("sample", help="draw random terms from a size window")
    p.add_argument("--family", choices=SAMPLE_FAMILIES, default="plain")
    p.add_argument("--m", type=int, default=0)
    p.add_argument("--h", type=int, default=30)
    p.add_argument("--z", type=float, default=None,
                   help="Boltzmann parameter (default: the family's singularity)")
    p.add_argument("--window", type=int, nargs=2, default=(20000, 50000),
                   metavar=("LO", "HI"))
    p.add_argument("--count", type=int, default=1)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--entropy", action="store_true",
                   help="draw the seed from the OS instead of --seed")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--max-attempts", type=int, default=None)
    p.add_argument("--ladder-depth", type=int, default=None)
    p.add_argument("--emit-terms", action="store_true",
                   help="include each term's text alongside its report")
    common_output(p)
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("measure", help="parameter reports for terms from a file or stdin")
    p.add_argument("terms_file", nargs="?", default=None,
                   help="one term per line, text or canonical JSON ('-' = stdin)")
    common_output(p)
    p.set_defaults(func=cmd_measure)

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    raw = list(sys.argv[1:]) if argv is None else list(argv)
    args = parser.parse_args(raw)
    args.raw_argv = raw
    t0 = time.time()
    try:
        client = None if args.subcommand == "serve" else _Client(args.server)
        args.func(args, client, t0)
    except CliError as exc:
        print(f"lambdalab: {exc}", file=sys.stderr)
        return exc.exit_code
    except httpx.HTTPError as exc:
        print(f"lambdalab: transport failure: {exc}", file=sys.stderr)
        return 1
    except BrokenPipeError:  # e.g. `lambdalab ... | head`
        return 0
    return EXIT_OK


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
