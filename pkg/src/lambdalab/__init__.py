"""lambdalab — enumeration, statistics and random generation of λ-terms."""

__version__ = "0.1.0"

from .terms import (  # noqa: F401
    Abs,
    App,
    Index,
    Term,
    TermError,
    TermMetrics,
    count_terms,
    enumerate_terms,
    from_json_obj,
    generalized_openness,
    head_abstractions,
    max_index_value,
    metrics,
    openness,
    parse,
    size,
    to_json_obj,
    to_text,
)
from .measures import ParameterReport, measure, report_to_json_obj  # noqa: F401
from .asymptotics import AsymptoticTable, limit_constants  # noqa: F401
from .sampler import (  # noqa: F401
    CalibrationError,
    SampleRecord,
    SamplerConfig,
    SamplingError,
    sample,
    sample_batch,
)
