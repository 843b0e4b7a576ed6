class CatStateError(Exception):
    """Base error; `exit_code` is what the CLI returns for it."""
    exit_code = 1

# Not a ValueError: raised inside pydantic validators it must propagate unwrapped.
class ConfigurationError(CatStateError):
    exit_code = 2

class NumericalFault(CatStateError):
    exit_code = 3

class IntegrationError(NumericalFault):
    pass

class NoInteriorMinimum(NumericalFault):
    pass
