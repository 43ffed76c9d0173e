# Copyright 2025 H2so4 Consulting LLC

import secrets
from typing import List, Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator

from core.models import MAX_RANK
from core.pirank import DEFAULT_MAX_STATES


def fresh_seed() -> int:
    return secrets.randbits(64)


class RunConfig(BaseModel):
    # RunConfig: the effective settings of one CLI run. Embedded in every JSON output
    # so the run can be repeated; `threads` is left out because results do not depend on it.
    model_config = ConfigDict(frozen=True, extra="forbid")

    subcommand: str
    rank: int = Field(2, ge=2, le=MAX_RANK)
    seed: Optional[int] = Field(None, ge=0, lt=2 ** 64)  # randomized subcommands only
    max_states: int = Field(DEFAULT_MAX_STATES, gt=0)
    output: Literal["human", "json", "dot"] = "human"
    threads: int = Field(1, ge=1, exclude=True)

    word: Optional[str] = None
    generators: Optional[List[str]] = None
    graph_file: Optional[str] = None
    length: Optional[int] = Field(None, ge=0)
    classes: bool = False
    samples: Optional[int] = Field(None, gt=0)
    exhaustive: bool = False
    lengths: Optional[List[int]] = None
    cyclic: bool = True
    lam: Optional[str] = None
    mu: Optional[str] = None
    L: Optional[int] = Field(None, ge=2)
    mode: Optional[str] = None
    cyclic_subwords: bool = False
    verify: bool = False
    N: Optional[int] = Field(None, ge=1)
    compare: Optional[List[int]] = None
    exact: bool = False
    pi: Optional[str] = None
    crit_size: Optional[int] = Field(None, ge=0)
    heuristic: bool = False

    @field_validator("lengths", "compare")
    @classmethod
    def _positive(cls, v: Optional[List[int]]) -> Optional[List[int]]:
        if v is not None and any(x < 1 for x in v):
            raise ValueError("values must be positive")
        return v

    def with_seed(self) -> "RunConfig":
        # a copy carrying an explicit seed, drawing one if none was given
        if self.seed is not None:
            return self
        return self.model_copy(update={"seed": fresh_seed()})

    def header(self) -> dict:
        # the reproducibility header: every field except threads, unset options dropped
        return self.model_dump(mode="json", exclude_none=True)
