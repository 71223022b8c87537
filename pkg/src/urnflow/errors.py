"""Exception hierarchy. The CLI maps these onto process exit codes."""


class UrnflowError(Exception):
    """Base class for all errors raised by this package."""


# -- graph input --------------------------------------------------------------

class ParseError(UrnflowError):
    """Malformed graph document (bad line, bad JSON, non-integer ids)."""


class ValidationError(UrnflowError):
    """Structurally invalid graph (self-loop, duplicate edge, gap in ids,
    disconnected)."""


# -- simulation ---------------------------------------------------------------

class InvalidInitial(UrnflowError):
    """Initial ball counts must all be >= 1."""


class NotSuccessor(UrnflowError):
    """Two urn states are not one simulation step apart."""


class CountOverflow(UrnflowError):
    """Requested run would overflow 64-bit ball counts."""


# -- dynamics -----------------------------------------------------------------

class DegeneratePair(UrnflowError):
    """Some edge has both endpoint coordinates equal to zero."""


class DomainError(UrnflowError):
    """Point outside the domain required by the operation."""


class LeftDomain(UrnflowError):
    """ODE integration left the invariant domain despite step halving."""


class SparseTrajectory(UrnflowError):
    """Trajectory too coarsely sampled for the requested window."""


# -- equilibria ---------------------------------------------------------------

class TooLarge(UrnflowError):
    """Graph exceeds the exhaustive face-enumeration bound."""


class NoConvergence(UrnflowError):
    """Face solver hit its iteration limit without converging or exiting."""


class NotRegularBipartite(UrnflowError):
    """Operation requires a regular bipartite graph."""


class NotBalancedBipartite(UrnflowError):
    """Operation requires a balanced bipartite graph."""


class DegeneratePoint(UrnflowError):
    """Support coordinate too small for a well-conditioned spectrum."""


class InconsistentClassification(UrnflowError):
    """Sign test and spectral classification disagree (borderline point)."""


class UniquenessViolation(UrnflowError):
    """Equilibrium search contradicts the single-limit-point prediction."""
