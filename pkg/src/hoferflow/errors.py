"""Exception types shared across the toolkit."""


class HoferflowError(Exception):
    """Base class for all toolkit errors."""


class GeometryError(HoferflowError):
    """A geometric precondition failed (containment, overlap, degeneracy)."""


class UnsupportedRegionError(HoferflowError):
    """The requested operation is not defined for this region kind."""


class ToleranceError(HoferflowError):
    """A numerical procedure could not reach its configured tolerance."""


class IntegrationError(HoferflowError):
    """The flow integrator produced a non-finite state or failed to converge."""


class MassError(HoferflowError):
    """Densities or regions do not have the masses the construction requires."""


class DisjointnessError(GeometryError):
    """Regions required to be pairwise disjoint overlap (within margin)."""


class SupportViolationError(HoferflowError):
    """Observed displacement outside the declared support region."""


class CertificateRefusedError(HoferflowError):
    """A norm certificate could not be issued (sign or support breach)."""


class EnergyBudgetError(HoferflowError):
    """The constructed generator cannot fit inside the requested Hofer budget."""


class FeasibilityError(HoferflowError):
    """Construction hypotheses are not satisfiable for the given parameters."""


class HypothesisError(HoferflowError):
    """A verification's standing hypothesis fails, so the check does not apply."""


class ContractViolationError(HoferflowError):
    """An input object violates a contract it was declared to satisfy."""


class ScenarioError(HoferflowError):
    """A scenario file failed to parse or validate."""
