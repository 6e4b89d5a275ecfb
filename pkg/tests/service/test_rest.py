"""This file contains tests for the functions in the rest.py module."""

import json

import pytest

from multilayer_planner.service.rest import create_app


@pytest.fixture
def client(service, tmp_path):
    """Test client with snapshots written under tmp_path."""
    app = create_app(service, snapshot_path=tmp_path / "snapshot.json")
    return app.test_client()


def _query(client, **body):
    return client.post("/paths/query", json=body)


def test_abstract_links(client):
    """Six candidates are advertised."""
    response = client.get("/topology/abstract-links")
    assert response.status_code == 200
    links = response.get_json()
    assert len(links) == 6
    assert links[0]["clp_id"] == "clp-A-B-1"
    assert links[0]["endpoints"] == ["A", "B"]


def test_query_provision_release(client):
    """The full life cycle of a service."""
    response = _query(client, src="A", dst="C", bitrate_gbps=60)
    assert response.status_code == 201
    offer = response.get_json()
    assert offer["clp_ids"] == ["clp-A-C-1"]

    response = client.post("/provisions", json={"offer_id": offer["offer_id"]})
    assert response.status_code == 201
    record = response.get_json()
    assert record["status"] == "active"

    listed = client.get("/provisions").get_json()
    assert [item["record_id"] for item in listed] == [record["record_id"]]
    fetched = client.get(f"/provisions/{record['record_id']}")
    assert fetched.get_json() == record

    released = client.delete(f"/provisions/{record['record_id']}")
    assert released.status_code == 200
    assert released.get_json()["status"] == "released"


def test_refused_query(client):
    """A refused query names its reason."""
    response = _query(client, src="A", dst="C", bitrate_gbps=250)
    assert response.status_code == 409
    body = response.get_json()
    assert body["reason_code"] == "refused"
    assert "single lightpath capacity" in body["reason"]


def test_invalid_query(client):
    """Malformed requests are rejected field by field."""
    response = _query(client, src="A", dst="C", bitrate_gbps=-1)
    assert response.status_code == 400
    body = response.get_json()
    assert body["reason_code"] == "invalid_request"
    assert "bitrate_gbps" in body["reason"]
    response = client.post("/provisions", json={})
    assert response.status_code == 400


def test_unknown_ids(client):
    """Unknown offers and records are not found."""
    response = client.post("/provisions", json={"offer_id": "offer-9"})
    assert response.status_code == 404
    assert response.get_json()["reason_code"] == "unknown_offer"
    response = client.get("/provisions/rec-9")
    assert response.status_code == 404
    assert response.get_json()["reason_code"] == "unknown_record"


def test_expired_offer(client, clock):
    """An expired offer is gone."""
    offer = _query(client, src="A", dst="C", bitrate_gbps=60).get_json()
    clock.advance(10.0)
    response = client.post("/provisions", json={"offer_id": offer["offer_id"]})
    assert response.status_code == 410
    assert response.get_json()["reason_code"] == "offer_expired"


def test_snapshot(client, tmp_path):
    """The snapshot endpoint writes the configured file."""
    _query(client, src="A", dst="C", bitrate_gbps=60)
    response = client.post("/snapshot")
    assert response.status_code == 200
    path = tmp_path / "snapshot.json"
    assert response.get_json() == {"path": str(path)}
    snapshot = json.loads(path.read_text())
    assert snapshot["next_offer"] == 1
    assert len(snapshot["offers"]) == 1


def test_snapshot_disabled(service):
    """Without a snapshot file the endpoint refuses."""
    client = create_app(service).test_client()
    response = client.post("/snapshot")
    assert response.status_code == 409
    assert response.get_json()["reason_code"] == "snapshot_disabled"
