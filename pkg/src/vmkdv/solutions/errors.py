"""Degeneracies raised by the closed-form solution builders."""


class DegenerateDenominator(ArithmeticError):
    """q^T Q q (or the dressing denominator) vanishes."""


class PoleEvaluation(ValueError):
    """The Darboux matrix was evaluated at one of its poles."""


class NonRealOutput(ValueError):
    """The dressed field has an imaginary part; q violates the reality reduction."""


class ConstraintViolation(ValueError):
    """|u~ - u| exceeds 2 mu, so the Backlund a_0 would be imaginary."""


class AxisPole(ValueError):
    """Breather pole mu lies on the real or imaginary axis."""


class SingularH(ArithmeticError):
    """The Hermitian matrix H is singular at this point."""


class SingularD(ArithmeticError):
    """The matrix defining D is singular at this point."""


class MaximalIsotropicRank(ValueError):
    """Rank s = (N+2)/2: the B, C, D ansatz cannot satisfy M M^T = 1."""
