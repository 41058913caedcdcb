"""Request/response models for the HTTP surface, and their published schemas.

Every JSON payload the service or CLI emits is described by a pydantic model
here; the JSON Schema files under schemas/ at the repository root are dumps
of these models (plus column descriptors for the two CSV layouts), and a test
keeps the published files in sync with the live definitions.

Counting coefficients are arbitrary-precision integers, so they travel as
decimal strings everywhere.
"""

from __future__ import annotations

from typing import Dict, List, Literal, Optional, Tuple, Union

from pydantic import BaseModel, Field

COUNT_FAMILIES = ("plain", "m_open", "closed", "h_shallow", "normal_forms", "neutral")
SAMPLE_FAMILIES = ("plain", "m_open", "closed", "h_shallow")
DIST_PARAMETERS = (
    "variables",
    "redexes",
    "successors",
    "abstractions",
    "head_abs",
    "lo_cost",
    "index_value_profile",
    "free_variables",
)


class HealthResponse(BaseModel):
    status: Literal["ok"]
    package: str
    version: str


class CountRow(BaseModel):
    n: int
    coefficient: str  # decimal string; values overflow any fixed-width integer


class CountsResponse(BaseModel):
    family: str
    order: int
    m: Optional[int] = None
    h: Optional[int] = None
    rows: List[CountRow]


class DistributionRow(BaseModel):
    value: int
    count: str
    probability: float


class DistributionResponse(BaseModel):
    parameter: str
    family: str
    n: int
    m: Optional[int] = None
    rows: List[DistributionRow]


class GaussianLaw(BaseModel):
    mean_slope: float
    variance_slope: float


class ConstantsResponse(BaseModel):
    depth: int
    rho: float
    C_plain: float
    a: List[float]  # Puiseux constant coefficients, ladder levels 0..depth
    b: List[float]  # Puiseux square-root coefficients
    a_inf: float
    b_inf: float
    derived: Dict[str, float]
    gaussian: Dict[str, GaussianLaw]
    profile_amplitudes: Dict[str, float]


class ReportModel(BaseModel):
    """JSON form of a per-term parameter report (measures.report_to_json_obj)."""

    size: int
    variables: int
    abstractions: int
    applications: int
    successors: int
    redexes: int
    head_abstractions: int
    openness: int
    generalized_openness: int
    lo_cost: int
    free_variable_occurrences: int
    open_subterm_fraction: float
    binding_abstraction_fraction: Optional[float]
    max_bound_per_abstraction: int
    index_value_histogram: Dict[str, int]
    unary_height_histograms: Dict[str, Dict[str, int]]
    natural_height_histograms: Dict[str, Dict[str, int]]


class SampleRequest(BaseModel):
    family: Literal["plain", "m_open", "closed", "h_shallow"] = "plain"
    m: int = Field(default=0, ge=0)
    h: int = Field(default=30, ge=0)
    z: Optional[float] = None  # None = the family's singularity
    window: Tuple[int, int] = (20000, 50000)
    seed: int
    count: int = Field(default=1, ge=1)
    workers: int = Field(default=1, ge=1)
    max_attempts: int = Field(default=1_000_000, ge=1)
    ladder_depth: int = Field(default=64, ge=1)
    emit_terms: bool = False


class SampleRecordModel(BaseModel):
    """One accepted draw; `seed` is the derived seed of the worker that drew it."""

    size: int
    seed: int
    attempt: int
    term: Optional[str] = None
    report: ReportModel


class SampleResponse(BaseModel):
    family: str
    window: Tuple[int, int]
    seed: int
    workers: int
    records: List[SampleRecordModel]


class MeasureRequest(BaseModel):
    # each entry is a term in canonical text or canonical JSON form
    terms: List[Union[str, dict]]


class MeasureResponse(BaseModel):
    reports: List[ReportModel]


class RunManifest(BaseModel):
    """Sidecar written next to every CLI output file.

    The config echo pins everything that determines the output bytes; rerunning
    the recorded command must reproduce the recorded checksum.
    """

    command: List[str]
    config: dict
    seed: Optional[int]
    versions: Dict[str, str]
    wall_clock_seconds: float
    output_file: str
    output_sha256: str


# Column descriptors for the two CSV layouts (published alongside the JSON
# Schemas; CSV has no native schema language, so these are ours).
CSV_COUNTS_SCHEMA = {
    "format": "csv",
    "description": "counting coefficients, one row per size",
    "columns": [
        {"name": "n", "type": "integer"},
        {"name": "coefficient", "type": "integer-string"},
    ],
}

CSV_DISTRIBUTION_SCHEMA = {
    "format": "csv",
    "description": "exact parameter distribution at one size",
    "columns": [
        {"name": "value", "type": "integer"},
        {"name": "count", "type": "integer-string"},
        {"name": "probability", "type": "float"},
    ],
}

PUBLISHED_MODELS = {
    "health_response": HealthResponse,
    "counts_response": CountsResponse,
    "distribution_response": DistributionResponse,
    "constants_response": ConstantsResponse,
    "report": ReportModel,
    "sample_request": SampleRequest,
    "sample_record": SampleRecordModel,
    "sample_response": SampleResponse,
    "measure_request": MeasureRequest,
    "measure_response": MeasureResponse,
    "run_manifest": RunManifest,
}


def published_schema_objects() -> Dict[str, dict]:
    """name → JSON Schema object for everything we publish."""
    out = {name: model.model_json_schema() for name, model in PUBLISHED_MODELS.items()}
    out["csv_counts"] = CSV_COUNTS_SCHEMA
    out["csv_distribution"] = CSV_DISTRIBUTION_SCHEMA
    return out


def publish_schemas(directory) -> None:
    """Write one <name>.schema.json per published schema into `directory`."""
    import json
    from pathlib import Path

    root = Path(directory)
    root.mkdir(parents=True, exist_ok=True)
    for name, obj in published_schema_objects().items():
        path = root / f"{name}.schema.json"
        path.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")


if __name__ == "__main__":  # pragma: no cover
    import sys

    publish_schemas(sys.argv[1] if len(sys.argv) > 1 else "schemas")
