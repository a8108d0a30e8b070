import numpy as np
import pytest
from fastapi.testclient import TestClient

from anneal_law import LawParams
from anneal_law.analysis import constant_spec, cosine_spec, wsd_spec
from anneal_law.service import LoadedFit, create_app

FIG2 = {"L0": 2.628, "A": 0.429, "C": 0.411, "alpha": 0.550}


@pytest.fixture
def client():
    fits = {"fig2": LoadedFit(params=LawParams(**FIG2), lambda_=0.999)}
    return TestClient(create_app(fits), raise_server_exceptions=False)


def test_healthz(client):
    resp = client.get("/healthz")
    assert resp.status_code == 200
    body = resp.json()
    assert body["status"] == "ok"
    assert body["version"]


def test_list_fits(client):
    body = client.get("/v1/fits").json()
    assert body["fits"][0]["id"] == "fig2"
    assert body["fits"][0]["params"]["L0"] == 2.628


def test_predict_constant_s2_zero(client):
    resp = client.post(
        "/v1/predict",
        json={"fit_id": "fig2", "schedule_spec": constant_spec(100, warmup=10).to_dict()},
    )
    assert resp.status_code == 200
    body = resp.json()
    assert body["s2"] == [0.0] * 100
    assert len(body["loss"]) == len(body["lr"]) == len(body["steps"]) == 100


def test_predict_wsd_beats_constant(client):
    finals = {}
    for name, spec in (
        ("wsd", wsd_spec(20_000, 0.2)),
        ("const", constant_spec(20_000)),
    ):
        resp = client.post(
            "/v1/predict",
            json={"fit_id": "fig2", "schedule_spec": spec.to_dict()},
        )
        finals[name] = resp.json()["final_loss"]
    assert finals["wsd"] < finals["const"]


def test_predict_downsamples_long_curves(client):
    resp = client.post(
        "/v1/predict",
        json={"fit_id": "fig2", "schedule_spec": constant_spec(60_000).to_dict()},
    )
    body = resp.json()
    assert len(body["loss"]) <= 5001
    assert body["steps"][-1] == 60_000
    assert body["total_steps"] == 60_000
    full = client.post(
        "/v1/predict",
        json={
            "fit_id": "fig2",
            "schedule_spec": constant_spec(60_000).to_dict(),
            "downsample": False,
        },
    ).json()
    assert len(full["loss"]) == 60_000


def test_predict_with_inline_params(client):
    resp = client.post(
        "/v1/predict",
        json={
            "params": FIG2,
            "lambda": 0.99,
            "schedule_spec": constant_spec(50, warmup=0).to_dict(),
        },
    )
    assert resp.status_code == 200


def test_predict_unknown_fit_404(client):
    resp = client.post(
        "/v1/predict",
        json={"fit_id": "nope", "schedule_spec": constant_spec(50, warmup=0).to_dict()},
    )
    assert resp.status_code == 404


def test_malformed_spec_400_with_field(client):
    resp = client.post(
        "/v1/predict",
        json={"fit_id": "fig2", "schedule_spec": {"kind": "constant", "total_steps": 10}},
    )
    assert resp.status_code == 400
    assert resp.json()["detail"]
    resp = client.post(
        "/v1/predict",
        json={
            "fit_id": "fig2",
            "schedule_spec": {
                "kind": "constant",
                "total_steps": 10,
                "eta_max": 1e-4,
                "bogus": 3,
            },
        },
    )
    assert resp.status_code == 400


def test_malformed_body_400(client):
    resp = client.post("/v1/predict", json={"fit_id": "fig2"})
    assert resp.status_code == 400
    detail = resp.json()["detail"]
    assert any("schedule_spec" in d["field"] for d in detail)


def test_zeta_negative_s2_422(client):
    params = dict(FIG2, zeta=1.2)
    spec = {
        "kind": "piecewise_linear",
        "total_steps": 1000,
        "eta_max": 2e-4,
        "points": [[1, 1e-5], [500, 1e-5], [1000, 2e-4]],
    }
    resp = client.post("/v1/predict", json={"params": params, "schedule_spec": spec})
    assert resp.status_code == 422


def test_oversized_predict_413(client):
    resp = client.post(
        "/v1/predict",
        json={"fit_id": "fig2", "schedule_spec": constant_spec(3_000_000).to_dict()},
    )
    assert resp.status_code == 413


def test_fit_endpoint_round_trip(client, fig2_params):
    from anneal_law import predict_loss_curve

    curves = []
    for spec in (constant_spec(2000, warmup=100), cosine_spec(2000, 2000, 0.0, warmup=100)):
        loss = predict_loss_curve(fig2_params, spec)
        steps = np.arange(1, 2001, 10)
        curves.append(
            {
                "samples": [[int(s), float(loss[s - 1])] for s in steps],
                "schedule_spec": spec.to_dict(),
            }
        )
    resp = client.post("/v1/fit", json={"curves": curves, "config": {}})
    assert resp.status_code == 200
    body = resp.json()
    assert body["params"]["L0"] == pytest.approx(2.628, rel=0.01)
    assert body["r_squared"] > 0.9999


def test_fit_endpoint_413_on_large_input(client):
    samples = [[i + 1, 2.5] for i in range(30_000)]
    spec = constant_spec(40_000).to_dict()
    resp = client.post(
        "/v1/fit", json={"curves": [{"samples": samples, "schedule_spec": spec}]}
    )
    assert resp.status_code == 413


def test_sweep_wsd_endpoint(client):
    resp = client.post(
        "/v1/sweep/wsd",
        json={"fit_id": "fig2", "totals": [20_000], "ratios": [0.05, 0.1, 0.2, 0.4, 0.6]},
    )
    assert resp.status_code == 200
    body = resp.json()
    assert len(body["final_losses"]) == 5
    assert 0 < body["argmin_index"] < 4  # interior minimum


def test_sweep_cosine_endpoint(client):
    resp = client.post(
        "/v1/sweep/cosine",
        json={
            "fit_id": "fig2",
            "total": 60_000,
            "cycle_factors": [0.5, 1.0, 2.0],
            "min_lr_fracs": [0.0, 0.1],
        },
    )
    assert resp.status_code == 200
    body = resp.json()
    best = body["axis"][body["argmin_index"]]
    assert best["cycle_factor"] == 1.0 and best["min_lr_frac"] == 0.0


def test_sweep_grid_too_large_413(client):
    resp = client.post(
        "/v1/sweep/wsd",
        json={"fit_id": "fig2", "totals": [2000] * 40, "ratios": [0.1] * 20},
    )
    assert resp.status_code == 413


def test_sweep_cpt_endpoint(client):
    resp = client.post(
        "/v1/sweep/cpt",
        json={
            "fit_id": "fig2",
            "base_steps": 5000,
            "peaks": [1e-4, 4e-4],
            "rewarm_steps": [200],
            "continuation": cosine_spec(5000, 5000, 0.0, eta_max=4e-4, warmup=0).to_dict(),
        },
    )
    assert resp.status_code == 200
    body = resp.json()
    assert len(body["curves"]) == 2
    assert body["rewarm_start"] == 5000
