import os

from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    # Sweep execution
    workers: int = os.cpu_count() or 1

    # Lyapunov solver
    kronecker_max_dim: int = 64

    # Covariance ODE
    ode_dt: float = 1e-3
    ode_blowup_norm: float = 1e12

    # Physicality checks
    admissibility_tol: float = 1e-8

    # Adiabatic regime threshold, Gamma / max coupling
    adiabatic_ratio: float = 10.0

    # Output
    output_dir: str = "./results"
    csv_significant_digits: int = 12
    log_level: str = "INFO"

    model_config = SettingsConfigDict(env_prefix="OM_NET_", env_file=".env", extra="ignore")

    @property
    def effective_workers(self) -> int:
        """Worker count clamped to at least one process"""
        return max(1, int(self.workers))


settings = Settings()
