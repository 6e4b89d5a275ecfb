"""This file contains the REST front-end of the provisioning
service."""

from pathlib import Path
from typing import Any

from flask import Flask, jsonify, request
from pydantic import BaseModel, ValidationError

from multilayer_planner.model.exceptions import (
    OfferExpiredError,
    RequestRefusedError,
    ServiceError,
    UnknownOfferError,
    UnknownRecordError,
)
from multilayer_planner.service.provisioning import (
    PathRequest,
    ProvisioningService,
)

HTTP_STATUS: dict[type[ServiceError], int] = {
    UnknownOfferError: 404,
    UnknownRecordError: 404,
    OfferExpiredError: 410,
    RequestRefusedError: 409,
}


def _document(model: BaseModel) -> dict[str, Any]:
    return model.model_dump(mode="json")


def _failure(reason_code: str, reason: str, status: int) -> Any:
    return jsonify({"reason_code": reason_code, "reason": reason}), status


def create_app(
    service: ProvisioningService, snapshot_path: str | Path | None = None
) -> Flask:
    """Builds the Flask application around a service.

    Args:
        service (ProvisioningService): The service.
        snapshot_path (str | Path | None): File written by
            POST /snapshot. Defaults to None (endpoint refuses).

    Returns:
        Flask: The application.
    """
    app = Flask(__name__)

    @app.errorhandler(ServiceError)
    def service_error(err: ServiceError) -> Any:
        return _failure(
            err.reason_code, str(err), HTTP_STATUS.get(type(err), 409)
        )

    @app.errorhandler(ValidationError)
    def invalid_request(err: ValidationError) -> Any:
        reason = "; ".join(
            f"{'.'.join(str(part) for part in error['loc'])}: {error['msg']}"
            for error in err.errors()
        )
        return _failure("invalid_request", reason, 400)

    @app.get("/topology/abstract-links")
    def abstract_links() -> Any:
        return jsonify(
            [_document(link) for link in service.get_abstract_topology()]
        )

    @app.post("/paths/query")
    def query_path() -> Any:
        path_request = PathRequest.model_validate(request.get_json(force=True))
        return jsonify(_document(service.query_path(path_request))), 201

    @app.post("/provisions")
    def provision() -> Any:
        body = request.get_json(force=True) or {}
        offer_id = body.get("offer_id")
        if not isinstance(offer_id, str):
            return _failure("invalid_request", "offer_id is required", 400)
        return jsonify(_document(service.provision(offer_id))), 201

    @app.get("/provisions")
    def provisions() -> Any:
        return jsonify([_document(record) for record in service.records()])

    @app.get("/provisions/<record_id>")
    def provision_record(record_id: str) -> Any:
        return jsonify(_document(service.record(record_id)))

    @app.delete("/provisions/<record_id>")
    def release(record_id: str) -> Any:
        return jsonify(_document(service.release(record_id)))

    @app.post("/snapshot")
    def snapshot() -> Any:
        if snapshot_path is None:
            return _failure(
                "snapshot_disabled", "no snapshot file configured", 409
            )
        path = service.save_snapshot(snapshot_path)
        return jsonify({"path": str(path)})

    return app
