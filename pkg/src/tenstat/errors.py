"""Exception hierarchy shared across the package."""


class TenstatError(Exception):
    """Base class for all tenstat errors."""


class InvalidStructureError(TenstatError):
    """Structure failed validation; carries the violation list."""

    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))


class ZeroLengthMember(TenstatError):
    def __init__(self, index):
        self.index = index
        super().__init__(f"member {index} has zero length in this pose")


class AllNodesAnchored(TenstatError):
    def __init__(self):
        super().__init__("every node is anchored; the equilibrium constraint vanishes")


class InconsistentSystem(TenstatError):
    """Pinned-reaction pre-solve has no solution within tolerance."""

    def __init__(self, residual, tolerance):
        self.residual = residual
        self.tolerance = tolerance
        super().__init__(
            f"reaction system inconsistent: relative residual {residual:.3e} "
            f"exceeds tolerance {tolerance:.3e}"
        )


class NonPositiveStiffness(TenstatError):
    pass


class NonPositiveLength(TenstatError):
    pass


class EmptyFeasibleBox(TenstatError):
    """Minimum-density and saturation bounds exclude each other for some cable."""

    def __init__(self, indices):
        self.indices = list(indices)
        super().__init__(
            "no feasible force density for cable(s) "
            + ", ".join(str(i) for i in self.indices)
            + ": minimum tension exceeds the saturation bound"
        )
