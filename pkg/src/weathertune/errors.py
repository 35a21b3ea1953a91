"""Exception types shared across the package."""


class WeathertuneError(Exception):
    """Base class for all package-specific errors."""


# --- data ingestion / preprocessing ---

class MissingColumn(WeathertuneError):
    pass


class TimestampDisorder(WeathertuneError):
    pass


class TimestampGap(WeathertuneError):
    pass


class EmptyFile(WeathertuneError):
    pass


class AllColumnsDropped(WeathertuneError):
    pass


class LeadingGapUnfillable(WeathertuneError):
    pass


class EmptySplit(WeathertuneError):
    pass


class ConstantColumn(WeathertuneError):
    pass


class SeriesTooShort(WeathertuneError):
    pass


class ShapeMismatch(WeathertuneError):
    pass


# --- optimizers ---

class DimensionMismatch(WeathertuneError):
    pass


class EmptyPopulation(WeathertuneError):
    pass


class InvalidConfig(WeathertuneError):
    pass


# --- ARIMA ---

class SeedMismatch(WeathertuneError):
    pass


class DegenerateFit(WeathertuneError):
    pass


# --- neural training ---

class NonFiniteLoss(WeathertuneError):
    pass


# --- metrics ---

class EmptyInput(WeathertuneError):
    pass


class AllExcluded(WeathertuneError):
    pass


# --- harness ---

class DataError(WeathertuneError):
    pass
