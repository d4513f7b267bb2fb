"""Error hierarchy shared by the library and the CLI.

Every error carries the process exit code the CLI uses for it.
"""


class DsiError(Exception):
    """Base class for all data-space inversion errors."""

    exit_code: int = 1


class ConfigError(DsiError, ValueError):
    """Invalid or inconsistent run configuration."""

    exit_code = 2


class DataError(DsiError, ValueError):
    """Input data that cannot be parsed or does not fit together."""

    exit_code = 3


class NumericalError(DsiError, ValueError):
    """A numerical operation cannot be carried out on its inputs."""

    exit_code = 4
