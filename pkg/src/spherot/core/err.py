from typing import Any, Dict, Sequence


class SpherotException(Exception):
    pass


class DomainError(SpherotException):
    """Mathematical precondition failure of a toolkit operation."""

    def diagnostics(self) -> Dict[str, Any]:
        return {"error": type(self).__name__, "message": str(self)}


class InvalidMeasure(DomainError):
    pass


class InvalidParameter(DomainError):

    def __init__(self, name, value, reason):
        self.name = name
        self.value = value
        super().__init__(f"Invalid parameter `{name}`={value}: {reason}")


class DegenerateVector(DomainError):

    def __init__(self, norm, threshold):
        self.norm = norm
        self.threshold = threshold
        super().__init__(f"Cannot project vector of norm {norm:.3e} to the sphere (threshold {threshold:.1e})")


class NotTwoPoint(DomainError):

    def __init__(self, support_size, reason=None):
        self.support_size = support_size
        super().__init__(reason or f"Expected two atoms of weight 1/2, support size is {support_size}")


class NotOnSphere(DomainError):
    pass


class DimensionMismatch(DomainError):

    def __init__(self, expected, actual):
        self.expected = expected
        self.actual = actual
        super().__init__(f"Dimension mismatch: expected {expected}, got {actual}")


class SolverStall(DomainError):

    def __init__(self, iterations):
        self.iterations = iterations
        super().__init__(f"Transportation simplex hit the iteration cap ({iterations})")


class TruncationTooSmall(DomainError):

    def __init__(self, truncation, tail_bound, tolerance):
        self.truncation = truncation
        self.tail_bound = tail_bound
        self.tolerance = tolerance
        super().__init__(f"Series truncation K={truncation} leaves tail bound {tail_bound:.3e} > {tolerance:.1e}")


class SingularKernel(DomainError):

    def __init__(self, frequencies: Sequence[int], kernel_rank: int, grid_size: int):
        self.frequencies = list(frequencies)
        self.kernel_rank = kernel_rank  # dimension of the null space
        self.rank = grid_size - kernel_rank
        self.grid_size = grid_size
        super().__init__(f"Convolution kernel vanishes at {len(self.frequencies)} of {grid_size} frequencies")

    def diagnostics(self):
        return {**super().diagnostics(), "frequencies": self.frequencies, "kernel_rank": self.kernel_rank,
                "rank": self.rank, "grid_n": self.grid_size}


class ReconstructionFailure(DomainError):

    def __init__(self, min_weight):
        self.min_weight = min_weight
        super().__init__(f"Recovered weights are negative (min {min_weight:.3e})")

    def diagnostics(self):
        return {**super().diagnostics(), "min_weight": self.min_weight}


class AntipodalMass(DomainError):

    def __init__(self, mass):
        self.mass = mass
        super().__init__(f"Plan carries mass {mass} on antipodal pairs")

    def diagnostics(self):
        return {**super().diagnostics(), "mass": self.mass}


class NotInUpperHemisphere(DomainError):

    def __init__(self, height):
        self.height = height
        super().__init__(f"Point is not in the open upper hemisphere (<w, N> = {height})")


class SchemaViolation(SpherotException):
    pass


class InvalidConfiguration(SpherotException):
    pass


class MissingConfigurationField(SpherotException):

    def __init__(self, field):
        self.field = field
        super().__init__(f"Missing configuration field: {field}")
