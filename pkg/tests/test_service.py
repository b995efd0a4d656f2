import math

import pytest
from fastapi.testclient import TestClient

from rendezkit.service import create_app


@pytest.fixture()
def client():
    return TestClient(create_app())


def make_two_point(client):
    resp = client.post(
        "/spaces", json={"label": "two", "kernel_matrix": [[0, 1], [1, 0]]}
    )
    assert resp.status_code == 200
    return resp.json()


class TestSpaces:
    def test_health(self, client):
        doc = client.get("/health").json()
        assert doc["status"] == "ok"

    def test_upload_matrix(self, client):
        info = make_two_point(client)
        assert info == {
            "label": "two",
            "n_points": 2,
            "has_coords": False,
            "max_finite_entry": 1.0,
            "has_infinite_entries": False,
        }

    def test_builder_space(self, client):
        resp = client.post(
            "/spaces",
            json={"builder": {"builder": "interval", "kernel": "neglog", "N": 17}},
        )
        assert resp.status_code == 200
        assert resp.json()["has_infinite_entries"] is True

    def test_list_get_delete(self, client):
        make_two_point(client)
        assert [s["label"] for s in client.get("/spaces").json()] == ["two"]
        assert client.get("/spaces/two").status_code == 200
        assert client.delete("/spaces/two").json() == {"deleted": "two"}
        assert client.get("/spaces/two").status_code == 404

    def test_both_sources_rejected(self, client):
        resp = client.post(
            "/spaces",
            json={
                "kernel_matrix": [[0, 1], [1, 0]],
                "builder": {"builder": "discrete2"},
            },
        )
        assert resp.status_code == 400
        assert resp.json()["error"] == "ArgumentError"

    def test_invalid_matrix_rejected(self, client):
        resp = client.post("/spaces", json={"kernel_matrix": [[0, 1], [2, 0]]})
        assert resp.status_code == 400

    def test_pydantic_validation_error(self, client):
        resp = client.post("/spaces", json={"kernel_matrix": [[0, 1]]})
        assert resp.status_code == 422


class TestCompute:
    def test_two_point_q(self, client):
        make_two_point(client)
        resp = client.post(
            "/compute", json={"space_label": "two", "quantity": "q"}
        )
        assert resp.status_code == 200
        doc = resp.json()
        assert doc["schema"] == 1
        assert doc["result"]["value"] == 0.5
        assert "q = 0.5" in doc["summary"]

    def test_infinite_travels_as_string(self, client):
        client.post(
            "/spaces",
            json={"label": "nl", "builder": {"builder": "interval", "kernel": "neglog", "N": 9}},
        )
        doc = client.post(
            "/compute", json={"space_label": "nl", "quantity": "qlower"}
        ).json()
        assert doc["result"]["value"] == "inf"

    def test_subset_selectors(self, client):
        make_two_point(client)
        doc = client.post(
            "/compute",
            json={"space_label": "two", "quantity": "u", "H": "0"},
        ).json()
        assert doc["result"]["value"] == 1.0
        assert doc["H"] == [0]

    def test_unknown_label_404(self, client):
        resp = client.post("/compute", json={"space_label": "nope", "quantity": "q"})
        assert resp.status_code == 404

    def test_unknown_quantity_400(self, client):
        make_two_point(client)
        resp = client.post("/compute", json={"space_label": "two", "quantity": "zz"})
        assert resp.status_code == 400

    def test_budget_maps_to_422(self, client):
        client.post(
            "/spaces",
            json={"label": "big", "builder": {"builder": "interval", "kernel": "neglog", "N": 257}},
        )
        resp = client.post(
            "/compute",
            json={"space_label": "big", "quantity": "Dn", "n": 4, "method": "exact"},
        )
        assert resp.status_code == 422
        assert resp.json()["error"] == "BudgetExceededError"

    def test_registry_reused_across_requests(self, client):
        client.post(
            "/spaces",
            json={"label": "c", "builder": {"builder": "circle", "N": 16}},
        )
        closed = (2 / 16) / math.tan(math.pi / 32)
        for quantity in ("q", "qlower", "A"):
            doc = client.post(
                "/compute", json={"space_label": "c", "quantity": quantity}
            ).json()
            value = doc["result"].get("value", doc["result"].get("lo"))
            assert value == pytest.approx(closed, abs=1e-8)


class TestSweepAndVerify:
    def test_sweep_circle(self, client):
        doc = client.post(
            "/sweep",
            json={
                "builder": {"builder": "circle"},
                "quantity": "A",
                "n_list": [8, 16, 32],
            },
        ).json()
        assert doc["trend"] == "non-decreasing"
        assert len(doc["rows"]) == 3

    def test_sweep_with_bracket(self, client):
        doc = client.post(
            "/sweep",
            json={
                "builder": {"builder": "interval", "kernel": "neglog"},
                "quantity": "Dn",
                "n": 3,
                "n_list": [17, 33],
                "limit_bound": math.log(4),
            },
        ).json()
        assert doc["bracket"]["hi"] == pytest.approx(math.log(4))

    def test_verify_endpoint(self, client):
        doc = client.post(
            "/verify",
            json={"sizes": [2, 3], "families": ["discrete"], "trials_per_cell": 1},
        ).json()
        assert doc["exit_code"] == 0
        assert all(rep["passed"] for rep in doc["reports"])
