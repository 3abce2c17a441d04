"""Exception hierarchy shared by every module.

Each error carries a short machine-readable ``name`` so the CLI can report
it verbatim.
"""


class WallCrossError(Exception):
    """Base class for all library errors."""

    @property
    def name(self):
        return type(self).__name__


class InvalidCharge(WallCrossError):
    pass


class OutsideCone(WallCrossError):
    pass


class VanishingCentralCharge(WallCrossError):
    pass


class OnWall(WallCrossError):
    pass


class PhaseTie(OnWall):
    pass


class InvalidMonodromy(WallCrossError):
    pass


class InvalidTwistorParameter(WallCrossError):
    pass


class ContextMismatch(WallCrossError):
    pass


class NotInvertible(WallCrossError):
    pass


class NotSmall(WallCrossError):
    pass


class NotUnit(WallCrossError):
    pass


class NonIntegralBPS(WallCrossError):
    pass


class LoopThroughSingularity(WallCrossError):
    pass


class NonconvergentOrder(WallCrossError):
    pass


class RankMismatch(WallCrossError):
    pass


class FrozenIndex(WallCrossError):
    pass


class PairingMismatch(WallCrossError):
    pass


class ZeroDenominator(WallCrossError):
    pass


class InconsistentPairings(WallCrossError):
    pass


class OrderTooLow(WallCrossError):
    pass


class InconsistentStructure(WallCrossError):
    pass


class RenamingNotBijective(WallCrossError):
    pass


class SchemaError(WallCrossError):
    """Malformed input; ``pointer`` is a JSON pointer to the offending spot."""

    def __init__(self, pointer, message=""):
        self.pointer = pointer
        super().__init__(f"{pointer}: {message}" if message else pointer)


class InvariantError(WallCrossError):
    """Well-formed input that violates a structural invariant."""

    def __init__(self, invariant, message=""):
        self.invariant = invariant
        super().__init__(f"{invariant}: {message}" if message else invariant)
