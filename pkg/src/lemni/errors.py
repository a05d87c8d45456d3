"""Exception hierarchy.

Every numerical failure raised by the library derives from :class:`LemniError`
so the CLI can map the whole family onto exit code 3.
"""


class LemniError(Exception):
    """Base class for numerical and internal errors."""


class SolverNoConvergence(LemniError):
    def __init__(self, worst_residual: float, tolerance: float):
        self.worst_residual = worst_residual
        self.tolerance = tolerance
        super().__init__(
            f"critical point solver did not converge: worst |f'| residual "
            f"{worst_residual:.3e} > tolerance {tolerance:.3e}"
        )


class DegenerateLadder(LemniError):
    """Two distinct critical points share a critical log-modulus."""

    def __init__(self, ties):
        # ties: list of tuples of critical-point indices sharing one modulus
        self.ties = ties
        super().__init__(f"tied critical moduli at ladder indices {ties}")


class WindowOverflow(LemniError):
    pass


class SaddleAtLevel(LemniError):
    pass


class LevelTooCritical(LemniError):
    pass


class OrphanRoot(LemniError):
    def __init__(self, root_indices, level: float):
        self.root_indices = list(root_indices)
        self.level = level
        super().__init__(
            f"roots {self.root_indices} lie in no closed contour at level {level:.6g}"
        )


class OpenContour(LemniError):
    pass


class ZeroOnContour(LemniError):
    pass


class NonIntegerWinding(LemniError):
    def __init__(self, raw: float, residual: float):
        self.raw = raw
        self.residual = residual
        super().__init__(f"winding value {raw:.6f} is {residual:.3f} from an integer")


class EpsilonTooLarge(LemniError):
    pass
