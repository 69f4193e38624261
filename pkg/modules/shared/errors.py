"""
Shared error hierarchy
Every error carries the process exit code the CLI reports for it
"""


class ReitsError(Exception):
    """Base error; unexpected internal failures map to exit code 4"""
    exit_code = 4


# --- configuration (exit 1) ---

class ConfigError(ReitsError):
    exit_code = 1

    def __init__(self, field, message):
        self.field = field
        self.detail = message
        super().__init__(f"config field '{field}': {message}")


# --- data (exit 2) ---

class DataError(ReitsError):
    exit_code = 2


class RowValidationError(DataError):
    def __init__(self, path, line, message):
        self.path = str(path)
        self.line = line
        super().__init__(f"{path}:{line}: {message}")


class DuplicateDateError(DataError):
    def __init__(self, path, day):
        self.path = str(path)
        self.date = day
        super().__init__(f"{path}: duplicate date {day.isoformat()}")


class InsufficientHistoryError(DataError):
    def __init__(self, message, missing=()):
        self.missing = list(missing)
        if self.missing:
            message = f"{message} (missing: {', '.join(self.missing)})"
        super().__init__(message)


class EmptyWindowError(DataError):
    pass


class UndefinedRatioError(DataError):
    pass


class DataGapError(DataError):
    pass


class CalendarMismatchError(DataError):
    pass


# --- gateway (exit 3) ---

class GatewayError(ReitsError):
    exit_code = 3


class CredentialError(GatewayError):
    def __init__(self, env_name):
        self.env_name = env_name
        super().__init__(f"credential environment variable {env_name} is not set")


class ReplayMissError(GatewayError):
    def __init__(self, digest, tag):
        self.digest = digest
        self.tag = tag
        super().__init__(f"no cassette entry for tag={tag} digest={digest}")


class RetriesExhaustedError(GatewayError):
    def __init__(self, tag, attempts, last_status):
        self.tag = tag
        self.attempts = attempts
        self.last_status = last_status
        super().__init__(f"request {tag} failed after {attempts} attempts (last status: {last_status})")


class GatewayResponseError(GatewayError):
    pass


# --- internal invariants (exit 4) ---

class InvariantError(ReitsError):
    exit_code = 4


class AccountInvariantError(InvariantError):
    pass


class WeightInvariantError(InvariantError):
    pass


# --- model output (exit 2) ---

class ModelOutputError(ReitsError):
    exit_code = 2


class PredictionFormatError(ModelOutputError):
    def __init__(self, code, message):
        self.code = code
        super().__init__(f"[{code.value}] {message}")


class DecisionParseError(ModelOutputError):
    pass
