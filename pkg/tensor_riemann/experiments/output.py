"""
CSV emission with a ``# key=value`` metadata header.
"""

import json
import logging
import sys
from pathlib import Path
from typing import List, Optional, TextIO, Union

import pandas as pd

from ..utils import flatten_dict
from .config import ExperimentConfig
from .exceptions import ExperimentIOError

logger = logging.getLogger(__name__)

FLOAT_FORMAT = "%.17g"


def _format_value(value) -> str:
    if isinstance(value, (list, dict)):
        return json.dumps(value)
    if value is None:
        return ""
    return str(value)


def csv_metadata(cfg: ExperimentConfig) -> List[str]:
    """Comment lines recording the full config, library version and experiment id."""
    from .. import __version__

    lines = [
        f"# {key}={_format_value(value)}"
        for key, value in flatten_dict(cfg.model_dump(mode="json")).items()
    ]
    lines.append(f"# library_version={__version__}")
    lines.append(f"# experiment_id={cfg.experiment_id}")
    return lines


def render_csv(frame: pd.DataFrame, cfg: ExperimentConfig) -> str:
    body = frame.to_csv(index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
    return "\n".join(csv_metadata(cfg)) + "\n" + body


def write_csv(
    frame: pd.DataFrame,
    cfg: ExperimentConfig,
    path: Optional[Union[str, Path]] = None,
    stream: Optional[TextIO] = None,
) -> Optional[Path]:
    """Write ``frame`` to ``path``, or to ``stream`` (stdout) when no path is given.

    Raises:
        ExperimentIOError: If the file cannot be written.
    """
    text = render_csv(frame, cfg)
    if path is None:
        (stream or sys.stdout).write(text)
        return None
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text)
    except OSError as e:
        raise ExperimentIOError(
            f"cannot write results: {e}", path=str(path), experiment=cfg.experiment.value
        ) from e
    logger.info(f"Wrote {len(frame)} rows to {path}")
    return path
