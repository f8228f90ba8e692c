"""Exception hierarchy for domain errors.

Everything raised on purpose derives from VraError so the CLI can map it to
exit code 1 with a machine-readable payload.
"""


class VraError(Exception):
    """Base class for domain errors."""

    code = "error"

    def payload(self):
        return {"error": self.code, "message": str(self)}


class RelationViolation(VraError):
    code = "relation-violation"

    def __init__(self, relation, message=""):
        super().__init__(message or f"group relation {relation} fails")
        self.relation = relation


class DimensionMismatch(VraError):
    code = "dimension-mismatch"


class NotInSubgroup(VraError):
    code = "not-in-subgroup"


class GroupMismatch(VraError):
    code = "group-mismatch"


class SubgroupUnsupported(VraError):
    code = "subgroup-unsupported"


class UnsupportedTree(VraError):
    code = "unsupported-tree"


class WeightMismatch(VraError):
    code = "weight-mismatch"


class TypeMismatch(VraError):
    code = "type-mismatch"


class DegreeMismatch(VraError):
    code = "degree-mismatch"


class DepthExceeded(VraError):
    code = "depth-exceeded"


class DepthUnsupported(VraError):
    code = "depth-unsupported"


class PrecisionExhausted(VraError):
    code = "precision-exhausted"


class HypothesisViolated(VraError):
    code = "hypothesis-violated"


class NotFound(VraError):
    code = "not-found"


class SingularLeadingCoefficient(VraError):
    code = "singular-leading-coefficient"


class NotCuspidal(VraError):
    code = "not-cuspidal"


class IllConditioned(VraError):
    code = "ill-conditioned"


class CocycleFitFailed(VraError):
    code = "cocycle-fit-failed"


class BasisMismatch(VraError):
    code = "basis-mismatch"


class BelowConvergenceWeight(VraError):
    code = "below-convergence-weight"


class QuadratureNotConverged(VraError):
    code = "quadrature-not-converged"


class NonconvergentWarning(VraError):
    code = "nonconvergent"


class ParseError(VraError):
    code = "parse-error"

    def __init__(self, message, offset):
        super().__init__(f"{message} (at offset {offset})")
        self.offset = offset
