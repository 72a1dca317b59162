from __future__ import annotations

from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict


class AppSettings(BaseSettings):
    model_config = SettingsConfigDict(env_file=".env", env_file_encoding="utf-8", extra="ignore")

    app_name: str = "Hypersphere Collapse Lab"
    app_env: str = Field(default="development", alias="APP_ENV")
    log_level: str = Field(default="INFO", alias="LOG_LEVEL")

    flow_r_stop: float = Field(default=1e-8, gt=0, alias="FLOW_R_STOP")
    flow_rel_tol: float = Field(default=1e-10, gt=0, alias="FLOW_REL_TOL")
    flow_abs_tol: float = Field(default=1e-12, gt=0, alias="FLOW_ABS_TOL")
    flow_max_steps: int = Field(default=10_000_000, gt=0, alias="FLOW_MAX_STEPS")
    flow_output_stride: float | None = Field(default=None, gt=0, alias="FLOW_OUTPUT_STRIDE")
    flow_tail_levels_per_decade: int = Field(default=8, gt=0, alias="FLOW_TAIL_LEVELS_PER_DECADE")
    flow_step_shrink_limit: float = Field(default=0.5, gt=0, lt=1, alias="FLOW_STEP_SHRINK_LIMIT")

    validity_s_max: float = Field(default=100.0, gt=0, alias="VALIDITY_S_MAX")
    validity_samples: int = Field(default=2048, ge=2, alias="VALIDITY_SAMPLES")

    monotone_probe_samples: int = Field(default=2048, ge=2, alias="MONOTONE_PROBE_SAMPLES")
    monotone_probe_r_max: float = Field(default=100.0, gt=0, alias="MONOTONE_PROBE_R_MAX")

    stall_threshold: float = Field(default=1e-14, gt=0, alias="STALL_THRESHOLD")
    type_i_spread: float = Field(default=0.05, gt=0, alias="TYPE_I_SPREAD")
    type_ii_factor: float = Field(default=10.0, gt=1, alias="TYPE_II_FACTOR")
    classify_tail_r_max: float = Field(default=1e-2, gt=0, alias="CLASSIFY_TAIL_R_MAX")
    classify_tail_r_min: float = Field(default=1e-5, gt=0, alias="CLASSIFY_TAIL_R_MIN")

    sweep_workers: int = Field(default=4, ge=1, alias="SWEEP_WORKERS")
    csv_significant_digits: int = Field(default=17, ge=1, le=17, alias="CSV_SIGNIFICANT_DIGITS")

    @property
    def csv_float_format(self) -> str:
        return f"%.{self.csv_significant_digits - 1}e"


settings = AppSettings()
