"""Exception hierarchy shared by all sdmerge modules."""


class SdmergeError(Exception):
    """Base class for all library errors."""


class DomainError(SdmergeError, ValueError):
    """An input lies outside the physically meaningful range."""


class InfeasibleFlowError(DomainError):
    """A requested demand/supply level exceeds the link capacity."""


class MalformedStateError(SdmergeError, ValueError):
    """A supply-demand pair does not lie on the link's diagram."""


class UnsupportedModelError(SdmergeError):
    """The merge model has no closed-form solution for this operation."""


class UnsupportedDiagramError(SdmergeError):
    """Wave classification is limited to concave fundamental diagrams."""


class InadmissibleFluxError(SdmergeError, ValueError):
    """A flux violates the sending/receiving bound of its link."""


class IncompatibleTrajectoriesError(SdmergeError, ValueError):
    """Two trajectories do not share the same grid or cadence."""


class ConfigurationError(SdmergeError, ValueError):
    """A scenario file or simulation setup violates an invariant."""


class OracleFailureError(SdmergeError):
    """The brute-force junction solver found no consistent configuration."""
