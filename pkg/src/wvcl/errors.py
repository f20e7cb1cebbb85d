"""Exception hierarchy shared by the library and the CLI.

Each class carries a short ``category`` string; the CLI prints it as the
first token of its one-line error report.
"""


class WvclError(Exception):
    category = "error"


class InvalidInputError(WvclError, ValueError):
    category = "invalid-input"


class DegenerateInputError(WvclError, ValueError):
    category = "degenerate-input"


class IncompatibleModelError(WvclError):
    category = "incompatible-model"


class CorruptFileError(WvclError):
    category = "corrupt-file"


class ConfigError(WvclError):
    category = "config-error"
