from pydantic_settings import BaseSettings, SettingsConfigDict

class Settings(BaseSettings):
    # Randomized law checks (overridable per command with --trials/--degree/--seed)
    trials: int = 500
    degree: int = 3
    seed: int = 0

    # Right-coefficient degree bound used by `spans` when --bound is not given
    span_bound: int = 1

    # Thread fan-out for trial batches
    workers: int = 4

    log_level: str = "WARNING"

    # NC_TRIALS=200 etc. in the environment or a .env file
    model_config = SettingsConfigDict(
        env_file=".env",
        env_prefix="NC_",
        extra="ignore",
        case_sensitive=False
    )

settings = Settings()
