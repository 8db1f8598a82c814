"""
Per-iteration run records.
"""

from enum import Enum
from typing import List, Optional

import pandas as pd
from pydantic import BaseModel, Field


class TerminationReason(str, Enum):
    """Why a solver run stopped."""

    TOL_REACHED = "tol_reached"
    MAX_ITERS = "max_iters"
    DEGENERATE = "degenerate"
    NUMERICAL_FAILURE = "numerical_failure"
    DIVERGED = "diverged"  # baselines only


class IterationRecord(BaseModel):
    """State after one iteration.

    Attributes:
        iter: Iteration index, 0 for the starting point.
        rel_rmse: ``||X - X*||_F / ||X*||_F`` when the truth is known.
        loss: ``0.5 * ||Y - A(X)||_F^2``.
        stepsize: Stepsize used to reach this iterate (0 for Gauss-Newton).
        elapsed_ns: Wall time since the run started.
        aborted: Set on the record where a baseline diverged.
    """

    iter: int
    rel_rmse: Optional[float] = None
    loss: float
    stepsize: float = 0.0
    elapsed_ns: int = 0
    aborted: bool = False

    class Config:
        frozen = True


class RunTrace(BaseModel):
    """Ordered iteration records of a solver run."""

    records: List[IterationRecord] = Field(default_factory=list)
    termination: Optional[TerminationReason] = None
    selected_stepsize: Optional[float] = None
    """Grid stepsize chosen for a baseline run."""

    def append(self, record: IterationRecord) -> None:
        if self.records and record.iter <= self.records[-1].iter:
            raise ValueError(
                f"iteration {record.iter} does not follow {self.records[-1].iter}"
            )
        self.records.append(record)

    @property
    def iterations(self) -> int:
        """Number of completed iterations."""
        return self.records[-1].iter if self.records else 0

    @property
    def final_rel_rmse(self) -> Optional[float]:
        return self.records[-1].rel_rmse if self.records else None

    @property
    def final_loss(self) -> Optional[float]:
        return self.records[-1].loss if self.records else None

    def iterations_to(self, level: float) -> Optional[int]:
        """First iteration whose relative error is at or below ``level``."""
        for record in self.records:
            if record.rel_rmse is not None and record.rel_rmse <= level:
                return record.iter
        return None

    def to_frame(self) -> pd.DataFrame:
        columns = ["iter", "rel_rmse", "loss", "stepsize", "elapsed_ns", "aborted"]
        return pd.DataFrame([r.model_dump() for r in self.records], columns=columns)
