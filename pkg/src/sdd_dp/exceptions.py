"""Exception and warning types shared across the package."""


class SDDError(Exception):
    """Base class for errors raised by this package."""


class InvalidChainError(SDDError, ValueError):
    """A Markov chain violates one or more of its invariants.

    ``violations`` lists every problem found, not just the first.
    """

    def __init__(self, violations):
        self.violations = list(violations)
        msg = "; ".join(str(v) for v in self.violations)
        super().__init__(f"invalid Markov chain: {msg}")


class LengthMismatch(SDDError, ValueError):
    pass


class NegativeWeight(SDDError, ValueError):
    def __init__(self, index, value):
        self.index = index
        self.value = value
        super().__init__(f"weight {index} is negative ({value!r})")


class SingularSystem(SDDError, ArithmeticError):
    pass


class RadiusNotCertified(SDDError):
    """The spectral certificate does not establish r(L) < 1."""

    def __init__(self, report, msg=None):
        self.report = report
        if msg is None:
            msg = (
                f"spectral radius not certified below 1 "
                f"(lower={report.lower:.6g}, upper={report.upper:.6g})"
            )
        super().__init__(msg)


class NonFiniteAggregator(SDDError, ArithmeticError):
    def __init__(self, i_x, i_z, i_a):
        self.cell = (i_x, i_z, i_a)
        super().__init__(f"aggregator returned a non-finite value at (x={i_x}, z={i_z}, a={i_a})")


class InfeasiblePolicy(SDDError, ValueError):
    def __init__(self, i_x, i_z):
        self.cell = (i_x, i_z)
        super().__init__(f"policy action outside the feasible range at (x={i_x}, z={i_z})")


class NotSeparable(SDDError, TypeError):
    pass


class MaxIterExceeded(SDDError):
    """Iteration budget exhausted. ``result`` holds the best iterate."""

    def __init__(self, result, msg="maximum number of iterations exceeded"):
        self.result = result
        super().__init__(msg)


class TooManyPolicies(SDDError):
    def __init__(self, count, budget):
        self.count = count
        super().__init__(f"{count} stationary policies exceed the enumeration budget of {budget}")


class EmptyFeasible(SDDError, ValueError):
    def __init__(self, i_x, i_z):
        self.cell = (i_x, i_z)
        super().__init__(f"no grid point is feasible at (x={i_x}, z={i_z})")


class NegativeContinuation(SDDError, ArithmeticError):
    pass


class LadderNotInvariant(SDDError):
    def __init__(self, level, k, z, image):
        self.level, self.k, self.z, self.image = level, k, z, image
        super().__init__(
            f"truncation level {level} is not invariant: f(k={k:.6g}, z={z:.6g}) = {image:.6g} leaves the set"
        )


class NotStabilized(SDDError):
    def __init__(self, report):
        self.report = report
        super().__init__(
            f"solutions on the first truncation level did not stabilise within "
            f"{len(report.levels)} levels (last difference {report.differences[-1]:.3g})"
        )


class ConfigInvalid(SDDError, ValueError):
    def __init__(self, path, reason):
        self.path = path
        self.reason = reason
        super().__init__(f"{path}: {reason}")


class NotConvergedWarning(UserWarning):
    """Spectral bounds did not close to the requested tolerance."""
