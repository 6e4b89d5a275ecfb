"""This file contains the exception hierarchy shared by
all planner modules."""


class PlannerError(Exception):
    """Base class for every error raised by the planner."""


class IngestError(PlannerError, ValueError):
    """Raised when an input document cannot be parsed or
    fails validation.

    Attributes:
        diagnostics (list[str]): One line per violated rule.
        locus (str | None): Document and field path (and entity
            id, when known) where parsing failed.
    """

    def __init__(
        self,
        message: str,
        diagnostics: list[str] | None = None,
        locus: str | None = None,
    ):
        self.diagnostics = list(diagnostics or [])
        self.locus = locus
        details = "; ".join(self.diagnostics)
        if locus is not None:
            message = f"{message} at {locus}"
        if details:
            message = f"{message}: {details}"
        super().__init__(message)


class UnknownEntityError(PlannerError, KeyError):
    """Raised when an id does not resolve to an entity."""

    def __init__(self, kind: str, entity_id: str):
        self.kind = kind
        self.entity_id = entity_id
        super().__init__(f"unknown {kind} {entity_id}")

    def __str__(self) -> str:
        return str(self.args[0])


class SpectrumExhaustedError(PlannerError):
    """Raised when no channel or slot range can be assigned
    on a route."""


class OverbuildDisabledError(SpectrumExhaustedError):
    """Raised when a fiber overbuild is requested while the
    overbuild policy is switched off."""


class ServiceError(PlannerError):
    """Base class for provisioning service errors.

    Attributes:
        reason_code (str): Machine-readable reason.
    """

    reason_code = "service_error"

    def __init__(self, message: str, reason_code: str | None = None):
        if reason_code is not None:
            self.reason_code = reason_code
        super().__init__(message)


class RequestRefusedError(ServiceError):
    """A path query could not be answered with an offer."""

    reason_code = "refused"


class UnknownOfferError(ServiceError):
    """The offer id is not known to the service."""

    reason_code = "unknown_offer"


class OfferExpiredError(ServiceError):
    """The offer passed its time to live before provisioning."""

    reason_code = "offer_expired"


class UnknownRecordError(ServiceError):
    """The provision record id is not known to the service."""

    reason_code = "unknown_record"
