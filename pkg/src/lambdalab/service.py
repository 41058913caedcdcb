"""HTTP facade over the workbench core.

All computation lives in the library modules; endpoints validate input, call
through, and shape JSON.  Expensive solves are memoized per process.  Error
responses carry a machine-readable kind — "usage", "numeric" or "parse" — in
the detail object so clients can map them to exit codes.
"""

from __future__ import annotations

from fractions import Fraction
from functools import lru_cache
from typing import Optional, Tuple

from fastapi import FastAPI, HTTPException, Query

from . import __version__, asymptotics, series
from .measures import measure, report_to_json_obj
from .sampler import (
    CalibrationError,
    SamplerConfig,
    SamplingError,
    sample_batch,
    worker_seed,
)
from .schemas import (
    COUNT_FAMILIES,
    DIST_PARAMETERS,
    ConstantsResponse,
    CountRow,
    CountsResponse,
    DistributionResponse,
    DistributionRow,
    GaussianLaw,
    HealthResponse,
    MeasureRequest,
    MeasureResponse,
    ReportModel,
    SampleRecordModel,
    SampleRequest,
    SampleResponse,
)
from .terms import TermError, from_json_obj, parse, to_text


def _fail(kind: str, message: str, **extra) -> HTTPException:
    return HTTPException(status_code=422, detail={"kind": kind, "message": message, **extra})


@lru_cache(maxsize=64)
def _counts_rows(family: str, order: int, m: int, h: int,
                 depth: Optional[int]) -> Tuple[Tuple[int, str], ...]:
    if family == "plain":
        coeffs = series.solve_plain(order).coefficients
    elif family == "normal_forms":
        coeffs = series.solve_normal_forms(order)[0].coefficients
    elif family == "neutral":
        coeffs = series.solve_normal_forms(order)[1].coefficients
    elif family == "h_shallow":
        coeffs = series.solve_h_shallow(order, h).levels[0]
    else:  # closed or m_open
        level = m if family == "m_open" else 0
        # closure error at level `level` first shows beyond 2*depth - level,
        # so depth = order + level keeps every reported coefficient exact
        need = max(depth or 0, order + level)
        system = series.solve_closed_ladder(order, depth=need)
        coeffs = system.levels[level]
    return tuple((n, str(c)) for n, c in enumerate(coeffs) if n >= 1 and c)


@lru_cache(maxsize=64)
def _distribution_rows(parameter: str, family: str, n: int, m: int,
                       depth: Optional[int]) -> Tuple[Tuple[int, str, float], ...]:
    if family == "plain":
        marked = series.solve_marked_plain(parameter, n, jets="full")
    else:  # closed or m_open
        level = m if family == "m_open" else 0
        marked = series.solve_marked_closed(parameter, n, jets="full",
                                            m=level, depth=depth)
    hist = series.distribution_at_n(marked, n)
    total = sum(hist.values())
    if total == 0:
        return ()
    return tuple(
        (value, str(count), float(Fraction(count, total)))
        for value, count in sorted(hist.items())
    )


def create_app() -> FastAPI:
    app = FastAPI(title="lambdalab", version=__version__)

    @app.get("/v1/health", response_model=HealthResponse)
    def health() -> HealthResponse:
        return HealthResponse(status="ok", package="lambdalab", version=__version__)

    @app.get("/v1/counts", response_model=CountsResponse)
    def counts(
        family: str = Query(...),
        order: int = Query(..., ge=1),
        m: int = Query(default=0, ge=0),
        h: int = Query(default=30, ge=0),
        depth: Optional[int] = Query(default=None, ge=1),
    ) -> CountsResponse:
        if family not in COUNT_FAMILIES:
            raise _fail("usage", f"unknown family {family!r}; expected one of {COUNT_FAMILIES}")
        try:
            rows = _counts_rows(family, order, m, h, depth)
        except series.SeriesError as exc:
            raise _fail("numeric", str(exc))
        return CountsResponse(
            family=family,
            order=order,
            m=m if family == "m_open" else None,
            h=h if family == "h_shallow" else None,
            rows=[CountRow(n=n, coefficient=c) for n, c in rows],
        )

    @app.get("/v1/distribution", response_model=DistributionResponse)
    def distribution(
        parameter: str = Query(...),
        family: str = Query(default="plain"),
        n: int = Query(..., ge=1),
        m: int = Query(default=0, ge=0),
        depth: Optional[int] = Query(default=None, ge=1),
    ) -> DistributionResponse:
        if parameter not in DIST_PARAMETERS:
            raise _fail("usage", f"unknown parameter {parameter!r}; expected one of {DIST_PARAMETERS}")
        if family not in ("plain", "closed", "m_open"):
            raise _fail("usage", "exact distributions cover the plain, closed and m_open families")
        if n > series.FULL_DISTRIBUTION_CAP:
            raise _fail("usage", f"n={n} exceeds the exact-distribution cap {series.FULL_DISTRIBUTION_CAP}")
        try:
            rows = _distribution_rows(parameter, family, n, m, depth)
        except series.SeriesError as exc:
            raise _fail("numeric", str(exc))
        return DistributionResponse(
            parameter=parameter,
            family=family,
            n=n,
            m=m if family == "m_open" else None,
            rows=[DistributionRow(value=v, count=c, probability=p) for v, c, p in rows],
        )

    @app.get("/v1/constants", response_model=ConstantsResponse)
    def constants(depth: int = Query(default=64, ge=8)) -> ConstantsResponse:
        try:
            table = asymptotics.limit_constants(depth)
        except asymptotics.NumericsError as exc:
            raise _fail("numeric", str(exc))
        return ConstantsResponse(
            depth=depth,
            rho=table.rho,
            C_plain=table.C_plain,
            a=table.a,
            b=table.b,
            a_inf=table.a_inf,
            b_inf=table.b_inf,
            derived=table.derived,
            gaussian={
                name: GaussianLaw(mean_slope=mean, variance_slope=var)
                for name, (mean, var) in table.gaussian.items()
            },
            profile_amplitudes=table.profile_amplitudes,
        )

    @app.post("/v1/sample", response_model=SampleResponse)
    def sample(req: SampleRequest) -> SampleResponse:
        config = SamplerConfig(
            family=req.family,
            m=req.m,
            h=req.h,
            z=req.z,
            size_window=tuple(req.window),
            seed=req.seed,
            max_attempts=req.max_attempts,
            ladder_depth=req.ladder_depth,
        )
        records = []
        try:
            for rec in sample_batch(config, req.count, req.workers):
                records.append(
                    SampleRecordModel(
                        size=rec.size,
                        seed=worker_seed(req.seed, rec.worker),
                        attempt=rec.attempts,
                        term=to_text(rec.term) if req.emit_terms else None,
                        report=ReportModel(**report_to_json_obj(rec.report)),
                    )
                )
        except ValueError as exc:
            raise _fail("usage", str(exc))
        except (CalibrationError, SamplingError, asymptotics.NumericsError) as exc:
            raise _fail("numeric", str(exc))
        return SampleResponse(
            family=req.family,
            window=tuple(req.window),
            seed=req.seed,
            workers=req.workers,
            records=records,
        )

    @app.post("/v1/measure", response_model=MeasureResponse)
    def measure_terms(req: MeasureRequest) -> MeasureResponse:
        reports = []
        for i, entry in enumerate(req.terms):
            try:
                term = parse(entry) if isinstance(entry, str) else from_json_obj(entry)
            except (TermError, KeyError, TypeError) as exc:
                raise _fail("parse", str(exc), line=i + 1)
            reports.append(ReportModel(**report_to_json_obj(measure(term))))
        return MeasureResponse(reports=reports)

    return app


def serve(host: str = "127.0.0.1", port: int = 8000) -> None:  # pragma: no cover
    import uvicorn

    uvicorn.run(create_app(), host=host, port=port)
