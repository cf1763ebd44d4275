from typing import Any, Dict, List, Optional, TypedDict

import pandas as pd

from .config import RunConfig
from .eos import GasParams
from .profiles import InitialData
from .solver import RunHistory

STATUS_OK = "ok"
STATUS_NUMERICAL = "numerical-failure"
STATUS_OUTSIDE = "outside-theory"
STATUS_FAILED_SUITE = "failed-suite"


class RunState(TypedDict):
    """State object threaded through the run graph."""
    config: RunConfig
    config_hash: str
    params: Optional[GasParams]
    data: Optional[InitialData]
    calibration: Optional[Dict[str, Any]]
    history: Optional[RunHistory]
    refined: Optional[RunHistory]
    refine_count: int
    observation: Optional[Dict[str, Any]]
    result: Dict[str, Any]
    tables: Dict[str, pd.DataFrame]
    status: str
    artifacts: List[str]
    run_dir: Optional[str]
