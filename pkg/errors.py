"""
Exception hierarchy for the Euler-quotient sequence toolkit
"""


class EulerSeqError(Exception):
    """Base class for every error raised by the toolkit."""


class ParameterError(EulerSeqError, ValueError):
    """Invalid input parameters (non-prime p, level < 1, index out of range, ...)."""


class InsufficientDataError(ParameterError):
    """Not enough bits to answer the question asked."""


class WieferichError(EulerSeqError):
    """
    Construction refused because p is a Wieferich prime (2^(p-1) = 1 mod p^2).

    Only detection and the order-of-2 profile are supported for such primes.
    """

    def __init__(self, p: int, lam: int, t0: int):
        self.p = p
        self.lam = lam
        self.t0 = t0
        super().__init__(
            f"p={p} is a Wieferich prime (lambda={lam}, t0={t0}): "
            "trace/defining construction unsupported, detection only"
        )


class FieldError(EulerSeqError, ArithmeticError):
    """Finite field misuse: context mismatch, inverse of zero, element outside a subfield."""


class VerificationError(EulerSeqError):
    """An identity that must hold by construction failed."""


class OutputError(EulerSeqError, OSError):
    """Reading or writing an output file failed."""
