"""Run configuration shared by the grader, scorer, and harness."""

from __future__ import annotations

from dataclasses import dataclass, fields, replace

from .canon import EquivConfig


@dataclass(frozen=True)
class GradeConfig:
    # numeric answers
    rtol: float = 1e-2
    numeric_partial: bool = False
    # score mapping
    max_score: float = 100.0
    zero_cutoff: float = 1.0
    # edit costs
    insert_cost: int = 1
    delete_cost: int = 1
    rename_cost: int = 1
    kind_change_cost: int = 2
    # randomized equivalence
    trials: int = 8
    eval_rtol: float = 1e-9
    seed: int = 2718
    # intervals
    openness_penalty: float = 0.25
    # preprocessing
    max_bracket_inserts: int = 3

    def equiv(self) -> EquivConfig:
        return EquivConfig(trials=self.trials, eval_rtol=self.eval_rtol, seed=self.seed)

    def to_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            for name, value in self.to_dict().items():
                fh.write(f"{name} = {value}\n")

    @classmethod
    def load(cls, path) -> "GradeConfig":
        """Read the documented `key = value` config format."""
        cfg = cls()
        overrides = {}
        types = {f.name: f.type for f in fields(cls)}
        with open(path, encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, 1):
                line = line.strip()
                if not line or line.startswith("#"):
                    continue
                if "=" not in line:
                    raise ValueError(f"{path}:{lineno}: expected 'key = value'")
                key, _, value = line.partition("=")
                key = key.strip()
                value = value.strip()
                if key not in types:
                    raise ValueError(f"{path}:{lineno}: unknown key {key!r}")
                current = getattr(cfg, key)
                if isinstance(current, bool):
                    overrides[key] = value.lower() in ("1", "true", "yes", "on")
                elif isinstance(current, int):
                    overrides[key] = int(value)
                else:
                    overrides[key] = float(value)
        return replace(cfg, **overrides)
