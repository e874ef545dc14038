import json
import logging
from pathlib import Path

from Domain.RiskDomain import FitResult
from Exceptions import InputDataError


def save_fit_result(fit_result: FitResult, path: Path | str) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(fit_result.json(indent=2) + '\n', encoding='utf-8')
    logging.info(f"💾 Fitted model for {fit_result.series_name} saved to: {path}")
    return path


def load_fit_result(path: Path | str) -> FitResult:
    path = Path(path)
    if not path.exists():
        raise InputDataError(f"model file not found: {path}")
    try:
        with path.open('r', encoding='utf-8') as file:
            fit_result = FitResult.from_dict(json.load(file))
    except (json.JSONDecodeError, TypeError, KeyError) as e:
        raise InputDataError(f"cannot read model file {path}: {e}") from e
    fit_result.params.validate(require_stationary=False)
    logging.info(f"Loaded fitted model for {fit_result.series_name} from: {path}")
    return fit_result
