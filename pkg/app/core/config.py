from typing import Any, Dict, Optional

from pydantic_settings import BaseSettings


class Settings(BaseSettings):
    PROJECT_NAME: str = "AutoPV Forecasting"
    VERSION: str = "1.0.0"

    # Run configuration file (YAML or JSON)
    CONFIG_FILE: str = "config/autopv.yaml"

    # Default on-disk layout, overridden by the run configuration
    DATA_DIR: str = "data"
    MODEL_DIR: str = "models"
    REPORT_DIR: str = "reports"

    # Logging
    LOG_LEVEL: str = "INFO"
    LOG_JSON: bool = False
    LOG_TO_FILE: bool = False
    LOG_FILE_PATH: Optional[str] = None

    model_config = {
        "case_sensitive": True,
        "env_file": ".env",
        "extra": "allow",
    }

    def run_defaults(self) -> Dict[str, Any]:
        """Run configuration values that the process settings provide."""
        return {
            "paths": {
                "data_dir": self.DATA_DIR,
                "model_dir": self.MODEL_DIR,
                "report_dir": self.REPORT_DIR,
            },
            "logging": {
                "log_level": self.LOG_LEVEL,
                "use_json": self.LOG_JSON,
                "log_to_file": self.LOG_TO_FILE,
                "log_file_path": self.LOG_FILE_PATH,
            },
        }


settings = Settings()
