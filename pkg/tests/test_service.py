"""HTTP surface: routes, payload shapes, and the error-kind contract."""

import pytest


def test_health(client):
    body = client.get("/v1/health").json()
    assert body["status"] == "ok"
    assert body["package"] == "lambdalab"
    assert body["version"]


def test_counts_plain(client):
    body = client.get("/v1/counts", params={"family": "plain", "order": 4}).json()
    assert body["family"] == "plain"
    assert [(r["n"], r["coefficient"]) for r in body["rows"]] == [
        (1, "1"),
        (2, "2"),
        (3, "4"),
        (4, "9"),
    ]


def test_counts_closed_and_neutral(client):
    # leading all-zero sizes are omitted: closed counts start at n = 2
    rows = client.get("/v1/counts", params={"family": "closed", "order": 4}).json()["rows"]
    assert [(r["n"], r["coefficient"]) for r in rows] == [(2, "1"), (3, "1"), (4, "3")]
    rows = client.get("/v1/counts", params={"family": "neutral", "order": 2}).json()["rows"]
    assert [(r["n"], r["coefficient"]) for r in rows] == [(1, "1"), (2, "1")]


def test_counts_coefficients_are_strings(client):
    # order 500 overflows doubles by hundreds of digits; strings survive
    rows = client.get("/v1/counts", params={"family": "plain", "order": 500}).json()["rows"]
    last = rows[-1]
    assert last["n"] == 500
    assert len(last["coefficient"]) > 200
    int(last["coefficient"])


def test_counts_m_open_family(client):
    rows = client.get("/v1/counts", params={"family": "m_open", "m": 1, "order": 5}).json()["rows"]
    assert [(r["n"], r["coefficient"]) for r in rows] == [
        (1, "1"),
        (2, "1"),
        (3, "3"),
        (4, "5"),
        (5, "15"),
    ]


def test_distribution_head_abs(client):
    body = client.get("/v1/distribution", params={"parameter": "head_abs", "n": 3}).json()
    assert [(r["value"], r["count"], r["probability"]) for r in body["rows"]] == [
        (0, "2", 0.5),
        (1, "1", 0.25),
        (2, "1", 0.25),
    ]


def test_distribution_probabilities_sum_to_one(client):
    for parameter in ("variables", "redexes", "lo_cost", "free_variables"):
        body = client.get("/v1/distribution", params={"parameter": parameter, "n": 9}).json()
        assert sum(r["probability"] for r in body["rows"]) == pytest.approx(1.0, abs=1e-12)


def test_distribution_closed_family(client):
    body = client.get(
        "/v1/distribution", params={"parameter": "variables", "family": "closed", "n": 4}
    ).json()
    # the three closed terms of size 4 are λλλ0, λλ1 wait—see the counts
    assert sum(int(r["count"]) for r in body["rows"]) == 3


def test_constants_payload(client):
    body = client.get("/v1/constants", params={"depth": 32}).json()
    assert body["depth"] == 32
    assert body["rho"] == pytest.approx(0.2955977425220848, abs=1e-14)
    assert body["C_plain"] == pytest.approx(0.6067673777880384, abs=1e-12)
    assert len(body["a"]) == len(body["b"]) == 33
    assert body["derived"]["free_var_mean"] == pytest.approx(5.7222625231204, abs=1e-9)
    assert set(body["gaussian"]) == {"variables", "redexes", "successors", "abstractions"}
    assert body["gaussian"]["variables"]["mean_slope"] == pytest.approx(0.30684916805, abs=1e-9)
    assert body["profile_amplitudes"]["unary_variable"] > 0


def test_sample_roundtrip_and_reproducibility(client):
    req = {"family": "closed", "window": [10, 30], "count": 3, "seed": 99, "emit_terms": True}
    a = client.post("/v1/sample", json=req).json()
    b = client.post("/v1/sample", json=req).json()
    assert a == b
    assert len(a["records"]) == 3
    for rec in a["records"]:
        assert 10 <= rec["size"] <= 30
        assert rec["report"]["openness"] == 0
        assert rec["term"]  # emit_terms was on


def test_sample_hides_terms_by_default(client):
    req = {"family": "plain", "window": [5, 9], "count": 1, "seed": 1}
    rec = client.post("/v1/sample", json=req).json()["records"][0]
    assert rec["term"] is None
    assert rec["report"]["size"] == rec["size"]


def test_sample_requires_a_seed(client):
    # request-model validation speaks FastAPI's native detail list
    resp = client.post("/v1/sample", json={"family": "plain", "window": [5, 9]})
    assert resp.status_code == 422
    detail = resp.json()["detail"]
    assert isinstance(detail, list)
    assert any("seed" in str(item.get("loc", ())) for item in detail)


def test_measure_text_and_json_terms(client):
    body = client.post(
        "/v1/measure",
        json={"terms": [r"\0", {"abs": {"idx": 0}}, "λ0̲"]},
    ).json()
    first, second, third = body["reports"]
    assert first == second == third
    assert first["openness"] == 0
    assert first["head_abstractions"] == 1


def test_error_kind_usage(client):
    resp = client.get("/v1/counts", params={"family": "nope", "order": 3})
    assert resp.status_code == 422
    assert resp.json()["detail"]["kind"] == "usage"
    resp = client.get("/v1/distribution", params={"parameter": "variables", "n": 45})
    assert resp.status_code == 422
    assert "cap" in resp.json()["detail"]["message"]


def test_error_kind_numeric(client):
    resp = client.post(
        "/v1/sample", json={"family": "plain", "window": [5, 9], "seed": 1, "z": 0.9}
    )
    assert resp.status_code == 422
    detail = resp.json()["detail"]
    assert detail["kind"] == "numeric"
    assert "z must lie in" in detail["message"]


def test_error_kind_parse_carries_the_line_number(client):
    resp = client.post("/v1/measure", json={"terms": [r"\0", "oops", "0"]})
    assert resp.status_code == 422
    detail = resp.json()["detail"]
    assert detail["kind"] == "parse"
    assert detail["line"] == 2
    assert "byte 0" in detail["message"]


def test_sampling_window_failure_is_numeric(client):
    resp = client.post(
        "/v1/sample",
        json={"family": "plain", "window": [1000000, 1000000], "seed": 1, "max_attempts": 2},
    )
    assert resp.status_code == 422
    assert resp.json()["detail"]["kind"] == "numeric"


def test_validation_errors_map_to_usage(client):
    resp = client.get("/v1/counts", params={"family": "plain", "order": 0})
    assert resp.status_code == 422
    resp = client.post("/v1/sample", json={"family": "plain", "window": [5], "seed": 1})
    assert resp.status_code == 422
