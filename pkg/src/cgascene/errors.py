"""Exception taxonomy shared across the engine.

Every error carries a stable ``code`` string so the service layer can map
failures to distinct user-facing error codes without string matching.
"""
from __future__ import annotations


class CgaSceneError(Exception):
    code = "internal_error"


# --- algebra ---------------------------------------------------------------

class ZeroWeight(CgaSceneError):
    """Round has (numerically) no conformal-origin component; cannot normalize."""
    code = "zero_weight"


class NotARound(CgaSceneError):
    """Multivector is not a sphere/point up to tolerance."""
    code = "not_a_round"


class NotUnit(CgaSceneError):
    """Quaternion (or rotor) norm deviates from 1 beyond tolerance."""
    code = "not_unit"


class NotAVersor(CgaSceneError):
    """M * reverse(M) has a non-scalar residue; sandwich application invalid."""
    code = "not_a_versor"


class NotAMotor(CgaSceneError):
    """Versor is not expressible as translation * rotation * dilation."""
    code = "not_a_motor"


# --- expression parsing ----------------------------------------------------

class ExprError(CgaSceneError):
    code = "expr_error"


class ExprSyntaxError(ExprError):
    """Malformed expression. ``offset`` is a byte offset into the UTF-8 source."""
    code = "expr_syntax"

    def __init__(self, message: str, offset: int, expected: tuple[str, ...] = ()):
        super().__init__(message)
        self.offset = offset
        self.expected = expected

    def __str__(self) -> str:  # pragma: no cover - cosmetic
        base = super().__str__()
        if self.expected:
            return f"{base} at byte {self.offset} (expected {', '.join(self.expected)})"
        return f"{base} at byte {self.offset}"


class UnknownSymbol(ExprError):
    code = "unknown_symbol"

    def __init__(self, name: str, offset: int):
        super().__init__(f"unknown symbol {name!r}")
        self.name = name
        self.offset = offset


# --- scene model -----------------------------------------------------------

class SchemaError(CgaSceneError):
    """Malformed scene/case/response document. ``pointer`` is a JSON pointer."""
    code = "schema_error"

    def __init__(self, message: str, pointer: str = ""):
        super().__init__(f"{message} (at {pointer or '/'})")
        self.pointer = pointer


# --- templating ------------------------------------------------------------

class UnknownObject(CgaSceneError):
    code = "unknown_object"

    def __init__(self, name: str):
        super().__init__(f"no scene object named {name!r}")
        self.name = name


class UnbalancedQuotes(CgaSceneError):
    code = "unbalanced_quotes"


class UnknownVariable(CgaSceneError):
    code = "unknown_variable"

    def __init__(self, variable: str):
        super().__init__(f"unbound variable {variable!r}")
        self.variable = variable


# --- LLM gateway -----------------------------------------------------------

class MissingContext(CgaSceneError):
    code = "missing_context"

    def __init__(self, variable: str):
        super().__init__(f"no object context for variable {variable!r}")
        self.variable = variable


class NonRigidMatrix(CgaSceneError):
    """4x4 payload is not a rigid transform with uniform positive scale."""
    code = "non_rigid_matrix"


class TransportError(CgaSceneError):
    """Network/auth failure, as opposed to an invalid-but-delivered response."""
    code = "transport_error"


class ExhaustedRetries(CgaSceneError):
    code = "exhausted_retries"

    def __init__(self, attempts: int, last_error: Exception | None = None,
                 latency: float = 0.0):
        super().__init__(
            f"no valid response within {attempts} attempts"
            + (f"; last error: {last_error}" if last_error else "")
        )
        self.attempts = attempts
        self.last_error = last_error
        self.latency = latency


# --- collision resolution --------------------------------------------------

class Unresolvable(CgaSceneError):
    """No collision-free placement found within the search space/time budget."""
    code = "unresolvable"


# --- benchmark harness -----------------------------------------------------

class FixtureError(CgaSceneError):
    code = "fixture_error"
