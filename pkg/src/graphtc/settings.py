""" Process-wide settings, injected where they are needed.

    :class:`GtcSettings` is registered with the ``autoinject`` injector using a global cache, so every consumer that
    type-hints a parameter or attribute as ``GtcSettings`` receives the same instance. Values come from environment
    variables when the instance is first built::

        @injector.inject
        def report(loss: float, settings: GtcSettings = None):
            print("loss={:.{}f}".format(loss, settings.precision))

    Tests override the instance with ``@injector.test_case({GtcSettings: GtcSettings(precision=3)})``.

"""
import logging
import os
import typing as t

from autoinject import injector


class SettingsError(ValueError):
    """ Raised when an environment variable holds an invalid value.

        :param variable: Name of the environment variable
        :type variable: str
        :param value: The rejected value
        :type value: str
    """

    def __init__(self, variable: str, value: str, reason: str):
        """ Constructor """
        super().__init__("Invalid value {!r} for {}: {}".format(value, variable, reason))
        self.variable = variable


def _int_from_env(variable: str, default: int, minimum: int) -> int:
    value = os.environ.get(variable)
    if value is None or value.strip() == "":
        return default
    try:
        number = int(value)
    except ValueError:
        raise SettingsError(variable, value, "expected an integer") from None
    if number < minimum:
        raise SettingsError(variable, value, "must be at least {}".format(minimum))
    return number


@injector.injectable_global
class GtcSettings:
    """ Tunables shared by the command-line tools and the experiment runner.

        Any argument left as ``None`` is read from its environment variable, falling back to the default:

        * ``precision`` (``GRAPHTC_PRECISION``, 6): decimals printed for loss values
        * ``jobs`` (``GRAPHTC_JOBS``, 1): worker threads for per-utterance work
        * ``enumerate_limit`` (``GRAPHTC_ENUMERATE_LIMIT``, 1000): largest accepted-sequence count that gets reported
        * ``brute_force_limit`` (``GRAPHTC_BRUTE_FORCE_LIMIT``, 1000000): largest alignment count of the
          brute-force loss
        * ``log_level`` (``GRAPHTC_LOG_LEVEL``, ``WARNING``): level used by the command-line tools

        :raises graphtc.settings.SettingsError: If an environment variable is invalid
    """

    def __init__(self,
                 precision: t.Optional[int] = None,
                 jobs: t.Optional[int] = None,
                 enumerate_limit: t.Optional[int] = None,
                 brute_force_limit: t.Optional[int] = None,
                 log_level: t.Optional[str] = None):
        """ Constructor """
        self.precision = precision if precision is not None else _int_from_env("GRAPHTC_PRECISION", 6, 0)
        self.jobs = jobs if jobs is not None else _int_from_env("GRAPHTC_JOBS", 1, 1)
        self.enumerate_limit = enumerate_limit if enumerate_limit is not None else _int_from_env(
            "GRAPHTC_ENUMERATE_LIMIT", 1000, 1
        )
        self.brute_force_limit = brute_force_limit if brute_force_limit is not None else _int_from_env(
            "GRAPHTC_BRUTE_FORCE_LIMIT", 10 ** 6, 1
        )
        level = log_level if log_level is not None else os.environ.get("GRAPHTC_LOG_LEVEL", "WARNING")
        if not isinstance(logging.getLevelName(level.upper()), int):
            raise SettingsError("GRAPHTC_LOG_LEVEL", level, "unknown logging level")
        self.log_level = level.upper()

    def __repr__(self):
        return "GtcSettings(precision={}, jobs={}, enumerate_limit={}, brute_force_limit={}, log_level={!r})".format(
            self.precision, self.jobs, self.enumerate_limit, self.brute_force_limit, self.log_level
        )
