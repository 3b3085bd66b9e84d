"""Exception taxonomy shared by all taukit modules."""


class TaukitError(Exception):
    """Base class for every error raised by taukit."""


class ConfigError(TaukitError):
    """A job configuration failed to parse or validate."""


# --- 1-form calculus ---------------------------------------------------------

class NonFiniteEvaluation(TaukitError):
    """A form evaluator returned NaN or infinity at a quadrature/difference node."""


class MissingShiftDatum(TaukitError):
    """shift_by_potential_change needed a named scalar that was not supplied."""


class QuadratureNonConvergence(TaukitError):
    """Bisection refinement did not reach the requested tolerance."""


# --- special functions -------------------------------------------------------

class PoleError(TaukitError):
    """Evaluation at (or too near) a pole of Gamma / Lambda."""


class BranchCutError(TaukitError):
    """Argument within the rejection margin of the negative-real branch cut,
    or a chamber/wall consistency violation along an evaluation path."""


# --- BPS structures ----------------------------------------------------------

class DegenerateCharge(TaukitError):
    """Some active central charge Z(k) vanished (or nearly so)."""


class PathThroughDegenerateLocus(TaukitError):
    """An integration path hit a degenerate locus of the structure."""


# --- elliptic periods --------------------------------------------------------

class DegenerateDiscriminant(TaukitError):
    """4a^3 + 27b^2 = 0: the cubic has a repeated root."""


class ContourCollision(TaukitError):
    """The apparent-singularity position q cannot be separated from an
    integration contour within the allowed deformation margin."""


# --- oscillator monodromy ----------------------------------------------------

class PoleEvaluation(TaukitError):
    """Potential evaluated at its pole x = q."""


class PoleProximity(TaukitError):
    """An ODE path passed within the safety margin of x = q."""


class StepUnderflow(TaukitError):
    """Adaptive step size fell below the minimum (or the step budget ran out)."""


class SectorDegeneracy(TaukitError):
    """Frame construction impossible: turning points or the pole inside the
    anchor annulus, anchor on a Stokes line, or epsilon outside the right
    half-plane."""


class DegenerateWronskian(TaukitError):
    """A Wronskian needed by the coordinate cross-ratios (numerically) vanished."""


# --- isomonodromic family ----------------------------------------------------

class ZeroP(TaukitError):
    """The fibre coordinate p vanished where 1/p is needed."""


class MovablePoleEncountered(TaukitError):
    """Leaf integration hit a movable pole of the flow."""

    def __init__(self, message: str, location=None):
        super().__init__(message)
        self.location = location
