"""Exception hierarchy shared by every coremarket module."""


class CoreMarketError(ValueError):
    """Base class for all input/precondition errors (CLI exit code 2)."""


# market validation / parsing
class CyclicPreference(CoreMarketError):
    pass


class UnknownAgent(CoreMarketError):
    pass


class DuplicateAgent(CoreMarketError):
    pass


class SelfDispreferred(CoreMarketError):
    """A house ranked below the owner's own house, or a relation naming an
    unacceptable house."""


class MarketSyntaxError(CoreMarketError):
    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line


class InvalidAllocation(CoreMarketError):
    pass


class InvalidMatching(CoreMarketError):
    pass


# improvements
class NotAnImprovement(CoreMarketError):
    pass


class AgentSetMismatch(CoreMarketError):
    pass


class NotInCore(CoreMarketError):
    pass


# roommates
class NotMutuallyAcceptable(CoreMarketError):
    pass


class NotStable(CoreMarketError):
    pass


class TiesPresent(CoreMarketError):
    pass


# oracle
class TooLarge(CoreMarketError):
    pass


class NoSuchArc(CoreMarketError):
    pass


class EmptyCore(RuntimeError):
    """Raised only if enumeration finds an empty core, which would be a bug."""


# reductions / generators
class LoopInDigraph(CoreMarketError):
    pass


class KTooLarge(CoreMarketError):
    pass


class BadParams(CoreMarketError):
    pass
