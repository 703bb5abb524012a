"""Exception hierarchy shared by all contactflow modules."""


class ContactFlowError(Exception):
    """Base class for every error raised by the package."""


class DegenerateContactForm(ContactFlowError):
    """The contact condition fails (singular Reeb/contact linear system)."""


class WindowEscape(ContactFlowError):
    """A trajectory or finite-difference stencil left the chart window."""


class DomainEscape(ContactFlowError):
    """Conjugated samples left the window under a contact transform."""


class SupportOverflow(ContactFlowError):
    """A fattened support no longer fits inside the chart window."""


class GeometryError(ContactFlowError):
    """A cut-off construction does not fit inside the window."""


class SingularMetric(ContactFlowError):
    """A Riemannian metric is (numerically) singular."""


class StepResolutionError(ContactFlowError):
    """The integrator step cannot resolve the oscillation of a metric."""


class ThetaCapExceeded(ContactFlowError):
    """A symplectization trajectory exceeded the configured theta cap."""


class ConfigError(ContactFlowError):
    """Invalid experiment configuration."""
