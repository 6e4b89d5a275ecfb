"""Dynamic provisioning service and its REST front-end."""

from .provisioning import (
    AbstractLink,
    AbstractMode,
    PathOffer,
    PathRequest,
    ProvisioningService,
    ProvisionRecord,
    RecordStatus,
    ServiceSnapshot,
)
from .rest import create_app
