"""Exception types shared by the solvers and the CLI."""


class InfeasibleProblem(ValueError):
    """The requested data amount or horizon cannot be served by the available energy."""


class InvalidProfile(ValueError):
    """An EH profile violates its structural invariants."""
