"""Published JSON schemas stay in lockstep with the live models."""

import json
from pathlib import Path

import jsonschema
import pytest

from lambdalab import schemas
from lambdalab.cli import main

SCHEMA_DIR = Path(__file__).resolve().parent.parent / "schemas"


def load(name):
    return json.loads((SCHEMA_DIR / f"{name}.schema.json").read_text())


def test_every_published_schema_is_on_disk_and_current():
    objs = schemas.published_schema_objects()
    on_disk = {p.name for p in SCHEMA_DIR.glob("*.schema.json")}
    assert on_disk == {f"{name}.schema.json" for name in objs}
    for name, obj in objs.items():
        assert load(name) == obj, f"schemas/{name}.schema.json is stale; re-run the publisher"


def test_csv_schemas_describe_the_emitted_columns():
    counts = load("csv_counts")
    assert [c["name"] for c in counts["columns"]] == ["n", "coefficient"]
    dist = load("csv_distribution")
    assert [c["name"] for c in dist["columns"]] == ["value", "count", "probability"]


def test_counts_response_validates(client):
    body = client.get("/v1/counts", params={"family": "plain", "order": 6}).json()
    jsonschema.validate(body, load("counts_response"))


def test_distribution_response_validates(client):
    body = client.get("/v1/distribution", params={"parameter": "lo_cost", "n": 7}).json()
    jsonschema.validate(body, load("distribution_response"))


def test_constants_response_validates(client):
    body = client.get("/v1/constants", params={"depth": 16}).json()
    jsonschema.validate(body, load("constants_response"))


def test_sample_response_and_records_validate(client):
    body = client.post(
        "/v1/sample",
        json={"family": "closed", "window": [10, 25], "count": 2, "seed": 12, "emit_terms": True},
    ).json()
    jsonschema.validate(body, load("sample_response"))
    for rec in body["records"]:
        jsonschema.validate(rec, load("sample_record"))
        jsonschema.validate(rec["report"], load("report"))


def test_measure_response_validates(client):
    body = client.post("/v1/measure", json={"terms": ["0", r"\0 0"]}).json()
    jsonschema.validate(body, load("measure_response"))


def test_cli_manifest_validates(tmp_path):
    out = tmp_path / "c.csv"
    assert main(["count", "--order", "4", "--format", "csv", "--output", str(out)]) == 0
    manifest = json.loads((tmp_path / "c.csv.manifest.json").read_text())
    jsonschema.validate(manifest, load("run_manifest"))


def test_cli_sample_lines_validate(tmp_path):
    out = tmp_path / "s.jsonl"
    code = main(["sample", "--window", "8", "12", "--count", "2", "--seed", "3",
                 "--emit-terms", "--output", str(out)])
    assert code == 0
    for line in out.read_text().splitlines():
        jsonschema.validate(json.loads(line), load("sample_record"))


def test_sample_request_schema_rejects_nonsense():
    schema = load("sample_request")
    with pytest.raises(jsonschema.ValidationError):
        jsonschema.validate({"family": "plain", "window": [5, 9], "count": 0, "seed": 1}, schema)
    with pytest.raises(jsonschema.ValidationError):
        jsonschema.validate({"family": "martian", "window": [5, 9], "seed": 1}, schema)
