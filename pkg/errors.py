"""Exceptions raised across stabverify.

Everything derives from StabVerifyError and ValueError. ValidationError
subclasses map to CLI exit code 1, FormatError to exit code 2.
"""


class StabVerifyError(ValueError):
    """Base class for all stabverify errors"""

    def to_dict(self):
        return {"error": type(self).__name__, "message": str(self)}


class ValidationError(StabVerifyError):
    """Input parsed fine but violates a mathematical precondition"""


class FormatError(StabVerifyError):
    """Input could not be parsed"""


class DimensionMismatch(ValidationError):
    pass


class DenseCapExceeded(ValidationError):
    def __init__(self, n, cap, kind="pure"):
        self.n = n
        self.cap = cap
        self.kind = kind
        super().__init__(f"{n} qubits exceeds the {kind}-state dense cap of {cap}")


class ImaginaryPhase(ValidationError):
    def __init__(self, index):
        self.index = index
        super().__init__(f"Generator {index} carries an imaginary phase (+-i)")

    def to_dict(self):
        return {**super().to_dict(), "index": self.index}


class NonCommuting(ValidationError):
    def __init__(self, i, j):
        self.i = i
        self.j = j
        super().__init__(f"Generators {i} and {j} do not commute")

    def to_dict(self):
        return {**super().to_dict(), "pair": [self.i, self.j]}


class Dependent(ValidationError):
    def __init__(self, subset, sign):
        self.subset = tuple(subset)
        self.sign = sign
        label = "-I" if sign < 0 else "+I"
        super().__init__(f"Generators {list(self.subset)} multiply to {label}")

    def to_dict(self):
        return {**super().to_dict(), "subset": list(self.subset), "sign": self.sign}


class InvalidGraph(ValidationError):
    pass


class InvalidState(ValidationError):
    pass


class NotUnitary(ValidationError):
    pass


class ZeroOverlap(ValidationError):
    def __init__(self, overlap):
        self.overlap = overlap
        super().__init__(f"Tr(Lambda rho) = {overlap:.3e} is numerically zero; state is orthogonal to the codespace")


class HypothesisViolated(ValidationError):
    def __init__(self, p_pass, epsilon):
        self.p_pass = p_pass
        self.epsilon = epsilon
        super().__init__(f"p_pass = {p_pass:.12g} is below 1 - epsilon = {1 - epsilon:.12g}")


class ParameterError(ValidationError):
    pass


class InstanceNotApplicable(ValidationError):
    pass


class PatternError(ValidationError):
    pass


class MissingPattern(ValidationError):
    def __init__(self, y):
        self.y = y
        super().__init__(f"No measurement pattern registered for challenge {y}")
