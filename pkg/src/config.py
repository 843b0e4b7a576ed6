from pydantic_settings import BaseSettings, SettingsConfigDict

class Settings(BaseSettings):
    LOG_LEVEL: str = "INFO"

    MAX_ATOMS: int = 8
    MAX_PERTURBATION_ATOMS: int = 10
    EXACT_VALIDATION_MAX_ATOMS: int = 6

    DEFAULT_TOLERANCE: float = 1e-10
    TARGET_TOLERANCE: float = 1e-12
    MAX_RHS_EVALUATIONS: int = 20_000_000

    SHIFT_RATIO: float = 1e-3
    NONRESONANT_DETUNING_RATIO: float = 20.0

    DEFAULT_SCENARIO_PATH: str = "data/default_scenario.json"

    model_config = SettingsConfigDict(env_file=".env", env_file_encoding="utf-8", env_prefix="CATSIM_")

settings = Settings()
