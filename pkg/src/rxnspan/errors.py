class RxnSpanError(Exception):
    """Base class for all errors raised by this package."""

    exit_code = 1


class ParseError(RxnSpanError):
    def __init__(self, message, line=None, source=None):
        self.line = line
        self.source = source
        where = ""
        if source is not None:
            where += f"{source}:"
        if line is not None:
            where += f"{line}:"
        super().__init__(f"{where} {message}" if where else message)


class RangeError(RxnSpanError):
    pass


class IntegrityError(RxnSpanError):
    pass


class InputError(RxnSpanError):
    pass


class TrainingError(RxnSpanError):
    pass


class ConfigError(RxnSpanError):
    exit_code = 2
