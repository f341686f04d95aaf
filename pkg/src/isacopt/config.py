"""Strict JSON run configuration. Unset fields take the default scenario and
algorithm defaults; dB / dBm values become linear exactly once, here."""
from __future__ import annotations

import json
from pathlib import Path
from typing import Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from .llm.backends import ConfigurationError, LlmConfig
from .model import Scenario, db_to_linear, dbm_to_mw, make_scenario
from .moead import AlgoParams
from .operators import DeParams, GaParams

ALGOS = ("ledma", "moead-ga", "moead-de", "random")


class ConfigError(ValueError):
    pass


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class LlmSection(_Strict):
    endpoint: str = "https://api.openai.com/v1/chat/completions"
    model: str = "gpt-3.5-turbo"
    temperature: float = Field(1.0, ge=0.0, le=2.0)
    max_retries: int = Field(3, ge=0)
    timeout_s: float = Field(30.0, gt=0.0)
    api_key_env: str = "LLM_API_KEY"
    max_in_flight: int = Field(4, ge=1)


class GaSection(_Strict):
    sbx_eta: float = Field(20.0, gt=0.0)
    mut_eta: float = Field(20.0, gt=0.0)
    mut_prob: Optional[float] = Field(None, ge=0.0, le=1.0)
    crossover_prob: float = Field(0.9, ge=0.0, le=1.0)


class DeSection(_Strict):
    F: float = Field(0.5, gt=0.0, le=2.0)
    CR: float = Field(0.9, ge=0.0, le=1.0)


class RunConfig(_Strict):
    # scenario
    num_uavs: int = Field(2, ge=1)
    num_users: int = Field(4, ge=1)
    area_min: float = 0.0
    area_max: float = 2000.0
    altitude_m: float = Field(100.0, ge=0.0)
    p_min_dbm: float = 0.0
    p_max_dbm: float = 20.0
    noise_dbm: float = -110.0
    rho0_db: float = -60.0
    bandwidth_hz: float = Field(51.2e6, gt=0.0)
    rcs_min: float = Field(0.8, gt=0.0)
    rcs_max: float = Field(1.0, gt=0.0)
    scenario_seed: int = 7
    user_positions: Optional[list[tuple[float, float]]] = None
    # algorithm
    algo: Literal["ledma", "moead-ga", "moead-de", "random"] = "ledma"
    seed: int = 1
    population: int = Field(50, ge=2)
    neighbors: int = Field(15, ge=1)
    parents: int = Field(10, ge=1)
    offspring: int = Field(2, ge=1)
    iterations: int = Field(260, ge=0)
    neighbor_prob: float = Field(0.9, ge=0.0, le=1.0)
    backend: Literal["mock", "http"] = "mock"
    mock_noise: float = Field(0.05, ge=0.0)
    keep_transcripts: bool = True
    output_dir: str = "runs"
    llm: LlmSection = LlmSection()
    ga: GaSection = GaSection()
    de: DeSection = DeSection()

    @model_validator(mode="after")
    def _check(self):
        if not self.area_max > self.area_min:
            raise ValueError("area_max must exceed area_min")
        if self.p_max_dbm < self.p_min_dbm:
            raise ValueError("p_max_dbm must be >= p_min_dbm")
        if self.rcs_max < self.rcs_min:
            raise ValueError("rcs_max must be >= rcs_min")
        if self.neighbors > self.population:
            raise ValueError("neighbors must not exceed population")
        if self.parents > self.population:
            raise ValueError("parents must not exceed population")
        if self.user_positions is not None:
            if len(self.user_positions) != self.num_users:
                raise ValueError("user_positions must list num_users points")
            for u in self.user_positions:
                if not all(self.area_min <= c <= self.area_max for c in u):
                    raise ValueError(f"user_positions entry {list(u)} lies outside the area")
        return self

    # linear values
    @property
    def noise_power_mw(self) -> float:
        return dbm_to_mw(self.noise_dbm)

    @property
    def p_min_mw(self) -> float:
        return dbm_to_mw(self.p_min_dbm)

    @property
    def p_max_mw(self) -> float:
        return dbm_to_mw(self.p_max_dbm)

    @property
    def ref_channel_gain(self) -> float:
        return db_to_linear(self.rho0_db)

    def scenario(self) -> Scenario:
        return make_scenario(
            num_uavs=self.num_uavs,
            num_users=self.num_users,
            area=(self.area_min, self.area_max),
            altitude_m=self.altitude_m,
            p_min_dbm=self.p_min_dbm,
            p_max_dbm=self.p_max_dbm,
            noise_dbm=self.noise_dbm,
            rho0_db=self.rho0_db,
            bandwidth_hz=self.bandwidth_hz,
            rcs_bounds=(self.rcs_min, self.rcs_max),
            seed=self.scenario_seed,
            user_positions=self.user_positions,
        )

    def algo_params(self) -> AlgoParams:
        return AlgoParams(
            population=self.population,
            neighbors=self.neighbors,
            parents=self.parents,
            offspring=self.offspring,
            iterations=self.iterations,
            neighbor_prob=self.neighbor_prob,
            seed=self.seed,
        )

    def llm_config(self) -> LlmConfig:
        return LlmConfig(**self.llm.model_dump())

    def ga_params(self) -> GaParams:
        return GaParams(**self.ga.model_dump())

    def de_params(self) -> DeParams:
        return DeParams(**self.de.model_dump())

    def uses_http(self) -> bool:
        return self.algo == "ledma" and self.backend == "http"

    def snapshot(self) -> dict:
        d = self.model_dump(mode="json")
        d["linear"] = {
            "noise_power_mw": self.noise_power_mw,
            "p_min_mw": self.p_min_mw,
            "p_max_mw": self.p_max_mw,
            "ref_channel_gain": self.ref_channel_gain,
        }
        return d


def parse_config(data: dict, **overrides) -> RunConfig:
    """Validate a config mapping; ``None`` overrides are ignored."""
    data = dict(data)
    data.update({k: v for k, v in overrides.items() if v is not None})
    try:
        cfg = RunConfig.model_validate(data)
    except ValidationError as exc:
        msgs = []
        for err in exc.errors():
            loc = ".".join(str(p) for p in err["loc"]) or "config"
            msgs.append(f"{loc}: {err['msg']}")
        raise ConfigError("; ".join(msgs)) from None
    if cfg.uses_http():
        cfg.llm_config().api_key()  # raises ConfigurationError when the key is missing
    return cfg


def load_config(path=None, **overrides) -> RunConfig:
    data = {}
    if path is not None:
        text = Path(path).read_text(encoding="utf-8")
        data = json.loads(text) if text.strip() else {}
        if not isinstance(data, dict):
            raise ConfigError("config must be a JSON object")
    return parse_config(data, **overrides)


__all__ = ["ALGOS", "ConfigError", "ConfigurationError", "RunConfig", "load_config", "parse_config"]
