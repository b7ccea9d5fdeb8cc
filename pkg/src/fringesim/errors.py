"""Exception types shared across the simulator."""


class ValidationError(ValueError):
    """A spec or config value violates one of its invariants."""


class OverlapError(ValidationError):
    """Pump and probe envelopes overlap beyond the allowed tolerance."""


class WindowError(ValidationError):
    """A time window is too short for the requested operation."""


class ConfigError(ValidationError):
    """Config file could not be parsed or validated."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line

    def __reduce__(self):
        return (_rebuild, (type(self), self.args, {"line": self.line}))


class NumericalBlowupError(RuntimeError):
    """Field values became non-finite during propagation."""

    def __init__(self, step, cell):
        super().__init__(
            f"non-finite field detected at step {step}, cell {cell}"
        )
        self.step = step
        self.cell = cell

    def __reduce__(self):
        return (NumericalBlowupError, (self.step, self.cell))


class PhysicsInvariantError(RuntimeError):
    """Occupation bounds or density-matrix positivity were violated."""

    def __init__(self, step, cell, detail=""):
        msg = f"density-matrix invariant violated at step {step}, cell {cell}"
        if detail:
            msg += f": {detail}"
        super().__init__(msg)
        self.step = step
        self.cell = cell
        self.detail = detail

    def __reduce__(self):
        return (PhysicsInvariantError, (self.step, self.cell, self.detail))


class DelayRunError(RuntimeError):
    """A scan delay failed; wraps the underlying error for exit-code mapping."""

    def __init__(self, delay_s, message, kind=""):
        super().__init__(f"delay {delay_s * 1e15:.1f} fs: {message}")
        self.delay_s = delay_s
        self.kind = kind

    def __reduce__(self):
        return (DelayRunError, (self.delay_s, self._bare_message(), self.kind))

    def _bare_message(self):
        prefix = f"delay {self.delay_s * 1e15:.1f} fs: "
        text = self.args[0]
        return text[len(prefix):] if text.startswith(prefix) else text


def _rebuild(cls, args, attrs):
    exc = cls.__new__(cls)
    Exception.__init__(exc, *args)
    for key, val in attrs.items():
        setattr(exc, key, val)
    return exc
