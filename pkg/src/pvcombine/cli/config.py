"""JSON run configuration. Every field but the input paths has a default."""

from __future__ import annotations

import json
from pathlib import Path

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from ..errors import PvCombineError, SchemaError
from ..evalharness import DEFAULT_PAIRS, PipelineConfig, pair_label, parse_pair
from ..stat_forecast import SearchConfig
from ..swarm import PsoParams
from ..tuning import Continuous, SearchSpace, pso_space

DEFAULT_PAIR_LABELS = [pair_label(*p) for p in DEFAULT_PAIRS]


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid")


class CleaningSettings(_Strict):
    max_missing_fraction: float = Field(0.005, gt=0, le=1)
    max_gap_days: float = Field(3.0, gt=0)


class ArimaSettings(_Strict):
    max_p: int = Field(5, ge=0, le=5)
    max_q: int = Field(5, ge=0, le=5)
    max_P: int = Field(2, ge=0, le=2)
    max_Q: int = Field(2, ge=0, le=2)
    max_d: int = Field(2, ge=0, le=2)
    max_models: int = Field(94, ge=1)
    fourier_K: int = Field(3, ge=1)


class SvrSettings(_Strict):
    C: float = Field(1.0, gt=0)
    max_rows: int = Field(1000, ge=2)
    iterations: int = Field(30, ge=1)
    gamma: tuple[float, float] = (1e-4, 1e1)
    epsilon: tuple[float, float] = (1e-3, 0.5)


class PsoSettings(_Strict):
    swarm_size: int = Field(30, ge=1)
    max_iterations: int = Field(200, ge=1)
    iterations: int = Field(30, ge=1)  # random-search budget over c1, c2, inertia, neighbors
    c_range: tuple[float, float] = (0.5, 2.5)
    inertia_range: tuple[float, float] = (0.3, 0.95)


class ReSettings(_Strict):
    iterations: int = Field(30, ge=1)
    max_iterations: int = Field(50, ge=1)
    threshold: tuple[float, float] = (1e-5, 1e-1)


class RunConfig(_Strict):
    power_dir: Path
    weather: dict[str, Path]
    houses: dict[str, str]
    pairs: list[str] = Field(default_factory=lambda: list(DEFAULT_PAIR_LABELS))
    output_dir: Path = Path("out")
    seed: int = Field(0, ge=0, lt=2**64)
    jobs: int = Field(1, ge=1)
    groups: tuple[str, str] | None = None
    leakage_checks: int = Field(3, ge=0)
    cleaning: CleaningSettings = CleaningSettings()
    arima: ArimaSettings = ArimaSettings()
    svr: SvrSettings = SvrSettings()
    pso: PsoSettings = PsoSettings()
    re: ReSettings = ReSettings()

    @field_validator("pairs")
    @classmethod
    def _pairs_valid(cls, pairs):
        for p in pairs:
            try:
                parse_pair(p)
            except PvCombineError as exc:
                raise ValueError(str(exc)) from None
        if len(set(pairs)) != len(pairs):
            raise ValueError("duplicate pairs")
        return pairs

    @model_validator(mode="after")
    def _locations_known(self):
        unknown = sorted(set(self.houses.values()) - set(self.weather))
        if unknown:
            raise ValueError(f"houses reference locations without weather: {unknown}")
        return self

    def resolve(self, base: Path) -> "RunConfig":
        """Make relative paths absolute against `base` and check inputs exist."""
        def fix(p: Path) -> Path:
            return p if p.is_absolute() else (base / p)

        cfg = self.model_copy(
            update={
                "power_dir": fix(self.power_dir),
                "weather": {k: fix(v) for k, v in self.weather.items()},
                "output_dir": fix(self.output_dir),
            }
        )
        if not cfg.power_dir.is_dir():
            raise SchemaError(f"power directory {cfg.power_dir} does not exist")
        for loc, path in cfg.weather.items():
            if not path.is_file():
                raise SchemaError(f"weather file for {loc} ({path}) does not exist")
        for house in cfg.houses:
            if not cfg.power_path(house).is_file():
                raise SchemaError(f"power file for {house} ({cfg.power_path(house)}) does not exist")
        return cfg

    def power_path(self, house: str) -> Path:
        return self.power_dir / f"{house}.csv"

    def pipeline(self) -> PipelineConfig:
        pso_sp = pso_space(self.pso.swarm_size)
        pso_sp["c1"] = pso_sp["c2"] = Continuous(*self.pso.c_range)
        pso_sp["inertia"] = Continuous(*self.pso.inertia_range)
        return PipelineConfig(
            seed=self.seed,
            arima=SearchConfig(**self.arima.model_dump()),
            svr_C=self.svr.C,
            svr_max_rows=self.svr.max_rows,
            svr_iterations=self.svr.iterations,
            svr_space=SearchSpace(gamma=Continuous(*self.svr.gamma, log=True), epsilon=Continuous(*self.svr.epsilon)),
            pso=PsoParams(
                swarm_size=self.pso.swarm_size, neighbors=self.pso.swarm_size, max_iterations=self.pso.max_iterations
            ),
            pso_iterations=self.pso.iterations,
            pso_space=pso_sp,
            re_iterations=self.re.iterations,
            re_max_iterations=self.re.max_iterations,
            re_space=SearchSpace(threshold=Continuous(*self.re.threshold, log=True)),
            leakage_checks=self.leakage_checks,
        )


def load_config(path) -> RunConfig:
    path = Path(path)
    try:
        raw = json.loads(path.read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise SchemaError(f"cannot read config {path}: {exc}") from None
    return RunConfig.model_validate(raw)
