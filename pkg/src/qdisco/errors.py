"""Exception hierarchy shared across the toolkit.

Every domain failure raises a :class:`QdiscoError` subclass so the CLI can
map them to exit code 1; configuration/usage mistakes raise
:class:`ConfigError` and map to exit code 2.
"""


class QdiscoError(Exception):
    """Base class for all toolkit domain errors."""


class DimensionError(QdiscoError):
    """Operands disagree on qubit/spin count."""


class CapacityError(QdiscoError):
    """Instance size violates a guard (too large or too small) or no
    hardware can host it."""


class SchemaError(QdiscoError):
    """A document violates its file schema; message names the field."""


class PlacementError(QdiscoError):
    """A placement does not fit its region or QPU."""


class NoRegionError(CapacityError):
    """No sampling region of the requested size exists."""


class PartitionError(QdiscoError):
    """Infeasible partition capacities or malformed partition."""


class ConfigError(QdiscoError):
    """Invalid run configuration or flag value (usage error, exit 2)."""
