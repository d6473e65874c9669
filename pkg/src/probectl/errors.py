"""Exception types shared across modules."""


class ProbeError(Exception):
    """Base class for all library errors."""


class EmptyVote(ProbeError):
    pass


class ParseError(ProbeError):
    def __init__(self, line: int, reason: str):
        self.line = line
        self.reason = reason
        super().__init__(f"line {line}: {reason}")


class ValidationError(ProbeError):
    def __init__(self, problem_id, branch_id, reason: str):
        self.problem_id = problem_id
        self.branch_id = branch_id
        self.reason = reason
        where = f"problem {problem_id!r}"
        if branch_id is not None:
            where += f", branch {branch_id}"
        super().__init__(f"{where}: {reason}")


class WidthExceedsPool(ProbeError):
    pass


class DepthBelowInterval(ProbeError):
    pass


class ConfigMismatch(ProbeError):
    pass


class ConfigError(ProbeError):
    """Invalid or incomplete configuration (detected before any work starts)."""
