"""Exception types shared across the package."""


class GameError(Exception):
    """Base class for all errors raised by nlgames."""


class NotNormalized(GameError):
    pass


class NonSquare(GameError):
    pass


class DimensionMismatch(GameError):
    pass


class LabelMismatch(GameError):
    pass


class IndexMismatch(GameError):
    pass


class ShapeMismatch(GameError):
    pass


class SearchSpaceTooLarge(GameError):
    def __init__(self, cardinality, limit):
        super().__init__(f"search space of {cardinality} strategy pairs exceeds limit {limit}")
        self.cardinality = cardinality
        self.limit = limit


class BudgetExceeded(GameError):
    def __init__(self, nodes):
        super().__init__(f"branch-and-bound exceeded its budget after {nodes} nodes")
        self.nodes = nodes


class SupportNotInvariant(GameError):
    def __init__(self, side, question, answer, residual):
        super().__init__(
            f"support of the state is not invariant under {side} operator "
            f"(question {question}, answer {answer}); residual {residual:.3e}"
        )
        self.side = side
        self.question = question
        self.answer = answer
        self.residual = residual


class NotIsometry(GameError):
    pass


class NonUniformDistribution(GameError):
    pass


class NotPerfect(GameError):
    def __init__(self, win_prob, what="strategy"):
        super().__init__(f"{what} is not perfect: winning probability {win_prob!r}")
        self.win_prob = win_prob


class NotFullSchmidtRank(GameError):
    pass


class QuestionDependent(GameError):
    def __init__(self, deviation):
        super().__init__(f"answer-block sums depend on the question (max deviation {deviation:.3e})")
        self.deviation = deviation


class NotProjection(GameError):
    def __init__(self, residual):
        super().__init__(f"component operator is not a projection (residual {residual:.3e})")
        self.residual = residual


class ZeroComponent(GameError):
    def __init__(self, mass):
        super().__init__(f"players never choose this component (mass {mass:.3e})")
        self.mass = mass


class ParentNotSynchronous(GameError):
    pass


class NotWeakKS(GameError):
    pass


class DimensionTooLarge(GameError):
    pass


class QISInvalid(GameError):
    pass


class StubGameError(GameError):
    """Raised when a shape-only game is used where a verification table is needed."""


class HypothesisFailed(GameError):
    def __init__(self, name, measured):
        super().__init__(f"hypothesis {name!r} failed (measured {measured!r})")
        self.name = name
        self.measured = measured
