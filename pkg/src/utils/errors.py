"""
Exception hierarchy for the incident desk

Library code raises these; only the command line maps them to exit codes.
"""


class DeskError(Exception):
    """Base class for every error raised by the incident desk"""


class ConfigError(DeskError):
    """Invalid configuration value or provider setup"""


class DatasetError(DeskError):
    """Telemetry or ground-truth data that cannot be used"""


class BackendUnavailableError(DeskError):
    """The chat-completion backend could not produce a response"""


class FixtureExhaustedError(DeskError):
    """A scripted backend ran out of queued responses for a role"""

    def __init__(self, role):
        super().__init__(f"No scripted responses left for role '{role}'")
        self.role = role


class ParseError(DeskError):
    """An agent reply did not contain a usable machine-readable block"""

    def __init__(self, message, raw_text=""):
        super().__init__(message)
        self.raw_text = raw_text


class UnanswerableQueryError(DeskError):
    """No analysis window could be recovered from a query"""


EXIT_OK = 0
EXIT_FATAL = 1
EXIT_BACKEND = 2


def exit_code_for(error):
    """
    Map an exception to the command-line exit code

    Args:
        error (Exception): The exception that ended the command

    Returns:
        int: 2 for backend outages, 1 for everything else
    """
    if isinstance(error, BackendUnavailableError):
        return EXIT_BACKEND
    return EXIT_FATAL
