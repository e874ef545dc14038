import dataclasses
import datetime as dt
import json
import math
from dataclasses import dataclass, field
from enum import Enum
from json import dumps

import numpy as np

from Enums import Convention, RiskKind, RiskMethod, StudyTarget, TailMethod, TailSide
from Exceptions import InputDataError, PreconditionError


def _to_plain(value):
    """Recursively turn dataclasses, enums and numpy values into JSON friendly objects."""
    if dataclasses.is_dataclass(value) and not isinstance(value, type):
        if hasattr(value, '__dict_factory_override__'):
            return value.__dict_factory_override__()
        return {f.name: _to_plain(getattr(value, f.name)) for f in dataclasses.fields(value)}
    if isinstance(value, Enum):
        return value.value
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, dict):
        return {str(k): _to_plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_to_plain(v) for v in value]
    return value


class BaseDataclass:
    def __dict_factory_override__(self):
        return {f.name: _to_plain(getattr(self, f.name)) for f in dataclasses.fields(self)}

    def asdict(self):
        return self.__dict_factory_override__()

    def json(self, indent: int | None = None):
        """
        get the json formatted string (keys sorted so reruns are byte-identical)
        """
        return dumps(self.asdict(), indent=indent, sort_keys=True)

    @classmethod
    def from_dict(cls, dict_: dict):
        names = {f.name for f in dataclasses.fields(cls)}
        return cls(**{k: v for k, v in dict_.items() if k in names})

    def _fix_enums(self, list_of_fields: set[tuple[str, type]]):
        for field_tuple in list_of_fields:
            attr = getattr(self, field_tuple[0])
            if attr is not None and not isinstance(attr, field_tuple[1]):
                object.__setattr__(self, field_tuple[0], field_tuple[1](attr))

    def _fix_nested_classes(self, list_of_fields: set[tuple[str, type]]):
        for field_tuple in list_of_fields:
            attr = getattr(self, field_tuple[0])
            if attr is not None and isinstance(attr, dict):
                object.__setattr__(self, field_tuple[0], field_tuple[1].from_dict(attr))

    def _fix_arrays(self, names: tuple[str, ...]):
        for name in names:
            object.__setattr__(self, name, np.asarray(getattr(self, name), dtype=float))

    def __str__(self):
        return json.dumps(self.asdict(), indent=4, sort_keys=True)


def _parse_date(label: str) -> dt.date | None:
    try:
        return dt.date.fromisoformat(label)
    except ValueError:
        return None


@dataclass(frozen=True, eq=False)
class ReturnSeries(BaseDataclass):
    """Ordered percent log returns with their date (or index) labels."""
    labels: tuple[str, ...]
    values: np.ndarray
    name: str = 'series'

    def __post_init__(self):
        object.__setattr__(self, 'labels', tuple(str(label) for label in self.labels))
        self._fix_arrays(('values',))
        if self.values.ndim != 1:
            raise InputDataError("returns must be a one-dimensional sequence")
        if len(self.labels) != self.values.size:
            raise InputDataError(f"{len(self.labels)} labels for {self.values.size} returns")
        if self.values.size == 0:
            raise InputDataError("empty return series")
        if not np.all(np.isfinite(self.values)):
            bad = int(np.flatnonzero(~np.isfinite(self.values))[0])
            raise InputDataError(f"non-finite return at row {bad} ({self.labels[bad]})")
        if len(set(self.labels)) != len(self.labels):
            raise InputDataError("duplicate date labels")
        dates = [_parse_date(label) for label in self.labels]
        if all(d is not None for d in dates):
            for previous, current in zip(dates, dates[1:]):
                if current <= previous:
                    raise InputDataError(f"dates must be strictly increasing ({previous} -> {current})")

    def __len__(self):
        return self.values.size

    @classmethod
    def from_values(cls, values, name: str = 'series') -> 'ReturnSeries':
        values = np.asarray(values, dtype=float)
        return cls(labels=tuple(str(i) for i in range(1, values.size + 1)), values=values, name=name)

    def scaled(self, factor: float) -> 'ReturnSeries':
        return ReturnSeries(labels=self.labels, values=self.values * factor, name=self.name)


@dataclass(frozen=True)
class SummaryStats(BaseDataclass):
    n: int
    mean: float
    sd: float
    skewness: float
    kurtosis: float


@dataclass(frozen=True)
class GarchParams(BaseDataclass):
    """AR(1)-GARCH(1,1) parameters; variance terms in percent² units."""
    phi: float = 0.0
    alpha0: float = 0.1
    alpha1: float = 0.15
    beta1: float = 0.8
    nu: float = 4.0

    @property
    def persistence(self) -> float:
        return self.alpha1 + self.beta1

    @property
    def unconditional_variance(self) -> float:
        if self.persistence >= 1.0:
            return math.inf
        return self.alpha0 / (1.0 - self.persistence)

    def validate(self, require_stationary: bool = True) -> 'GarchParams':
        values = (self.phi, self.alpha0, self.alpha1, self.beta1, self.nu)
        if not all(math.isfinite(v) for v in values):
            raise PreconditionError(f"non-finite parameter in {values}")
        if self.alpha0 <= 0.0:
            raise PreconditionError(f"alpha0 must be > 0, got {self.alpha0}")
        if self.alpha1 < 0.0 or self.beta1 < 0.0:
            raise PreconditionError(f"alpha1 and beta1 must be >= 0, got {self.alpha1}, {self.beta1}")
        if self.nu <= 2.0:
            raise PreconditionError(f"nu must be > 2 (finite innovation variance), got {self.nu}")
        if require_stationary and self.persistence >= 1.0:
            raise PreconditionError(f"alpha1 + beta1 must be < 1, got {self.persistence}")
        return self

    def as_vector(self) -> np.ndarray:
        return np.array([self.phi, self.alpha0, self.alpha1, self.beta1])

    @classmethod
    def from_vector(cls, vector, nu: float) -> 'GarchParams':
        phi, alpha0, alpha1, beta1 = (float(v) for v in vector)
        return cls(phi=phi, alpha0=alpha0, alpha1=alpha1, beta1=beta1, nu=float(nu))


PARAM_NAMES = ('phi', 'alpha0', 'alpha1', 'beta1')


@dataclass(frozen=True, eq=False)
class FilterOutput(BaseDataclass):
    mu: np.ndarray
    sigma: np.ndarray
    z: np.ndarray

    def __post_init__(self):
        self._fix_arrays(('mu', 'sigma', 'z'))
        if not (self.mu.size == self.sigma.size == self.z.size):
            raise PreconditionError("mu, sigma and z must share the input length")

    def __len__(self):
        return self.z.size


@dataclass(frozen=True)
class Forecast(BaseDataclass):
    mu_next: float
    sigma_next: float

    def __post_init__(self):
        if not self.sigma_next > 0.0:
            raise PreconditionError(f"sigma_next must be > 0, got {self.sigma_next}")


@dataclass(frozen=True)
class LjungBoxResult(BaseDataclass):
    statistic: float
    pvalue: float
    lags: int


@dataclass(frozen=True)
class FitResult(BaseDataclass):
    params: GarchParams
    loglik: float
    robust_se: dict[str, float]
    converged: bool
    iterations: int
    boundary: bool = False
    n_obs: int = 0
    series_name: str = ''
    start_logliks: tuple[float, ...] = ()
    diagnostics: dict[str, LjungBoxResult] = field(default_factory=dict)

    def __post_init__(self):
        self._fix_nested_classes({('params', GarchParams)})
        object.__setattr__(self, 'start_logliks', tuple(self.start_logliks))
        object.__setattr__(self, 'diagnostics', {
            k: LjungBoxResult.from_dict(v) if isinstance(v, dict) else v for k, v in self.diagnostics.items()
        })


@dataclass(frozen=True)
class TailSample(BaseDataclass):
    """Descending positive exceedance magnitudes plus the full residual count."""
    values: np.ndarray
    n_total: int
    side: TailSide = TailSide.LOWER

    def __post_init__(self):
        self._fix_arrays(('values',))
        self._fix_enums({('side', TailSide)})
        if self.values.size > self.n_total:
            raise PreconditionError("tail sample longer than the full sample")
        if np.any(self.values <= 0.0):
            raise PreconditionError("tail values must be strictly positive")
        if np.any(np.diff(self.values) > 0.0):
            raise PreconditionError("tail values must be sorted descending")

    def __len__(self):
        return self.values.size


@dataclass(frozen=True)
class TailEstimate(BaseDataclass):
    gamma: float
    alpha: float
    m: int
    stderr: float
    method: TailMethod
    threshold: float
    n_total: int
    slope: float | None = None
    kappa: int | None = None

    def __post_init__(self):
        self._fix_enums({('method', TailMethod)})


@dataclass(frozen=True)
class HillCurve(BaseDataclass):
    m: np.ndarray
    gamma: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, 'm', np.asarray(self.m, dtype=int))
        object.__setattr__(self, 'gamma', np.asarray(self.gamma, dtype=float))


@dataclass(frozen=True)
class TailRiskModel(BaseDataclass):
    """Inputs of the EVT tail estimators: γ, m, the threshold Z_(m+1) and T."""
    tail: TailEstimate
    z_threshold: float
    n_total: int

    def __post_init__(self):
        self._fix_nested_classes({('tail', TailEstimate)})
        if not self.z_threshold > 0.0:
            raise PreconditionError(f"z_threshold must be > 0, got {self.z_threshold}")
        fraction = self.tail.m / self.n_total
        if not 0.0 < fraction < 0.5:
            raise PreconditionError(f"m/T must lie in (0, 0.5), got {fraction}")

    @classmethod
    def from_estimate(cls, estimate: TailEstimate) -> 'TailRiskModel':
        return cls(tail=estimate, z_threshold=estimate.threshold, n_total=estimate.n_total)

    @property
    def tail_fraction(self) -> float:
        return self.tail.m / self.n_total


@dataclass(frozen=True)
class ScalingFactor(BaseDataclass):
    h: int
    alpha: float
    q: float


@dataclass(frozen=True)
class RiskEstimate(BaseDataclass):
    value: float
    kind: RiskKind
    horizon: int
    method: RiskMethod
    tail_side: TailSide
    level: float
    mu_next: float
    sigma_next: float
    scaling: float = 1.0
    capped: bool = False
    in_sample: bool = False

    def __post_init__(self):
        self._fix_enums({('kind', RiskKind), ('method', RiskMethod), ('tail_side', TailSide)})
        if self.horizon < 1:
            raise PreconditionError(f"horizon must be >= 1, got {self.horizon}")
        if self.kind == RiskKind.PROBABILITY and not 0.0 <= self.value <= 1.0:
            raise PreconditionError(f"probability outside [0, 1]: {self.value}")

    @property
    def label(self) -> str:
        """Row label in the style P5 / Q95 / Q99.5."""
        if self.kind == RiskKind.QUANTILE:
            return f"Q{_compact(100.0 * (1.0 - self.level))}"
        return f"P{_compact(self.level)}"


def _compact(number: float) -> str:
    return f"{round(number, 6):g}"


@dataclass(frozen=True)
class StudyConfig(BaseDataclass):
    n: int = 2000
    replications: int = 200
    params: GarchParams = field(default_factory=GarchParams)
    horizons: tuple[int, ...] = (1, 2, 4, 5)
    quantile_levels: tuple[float, ...] = (0.95, 0.99)
    probability_thresholds: tuple[float, ...] = (25.0, 50.0)
    seed: int = 12345
    convention: Convention = Convention.STANDARDIZED_T
    refit: bool = True
    target: StudyTarget = StudyTarget.RESIDUALS
    burn_in: int = 1000
    kappa: int | None = None
    max_workers: int = 4
    max_exclusion_rate: float = 0.05

    def __post_init__(self):
        self._fix_nested_classes({('params', GarchParams)})
        self._fix_enums({('convention', Convention), ('target', StudyTarget)})
        object.__setattr__(self, 'horizons', tuple(int(h) for h in self.horizons))
        object.__setattr__(self, 'quantile_levels', tuple(float(p) for p in self.quantile_levels))
        object.__setattr__(self, 'probability_thresholds', tuple(float(x) for x in self.probability_thresholds))
        if self.replications < 1:
            raise PreconditionError("replications must be >= 1")
        if self.n < 100:
            raise PreconditionError("n must be >= 100")
        if not self.horizons or any(h < 1 for h in self.horizons):
            raise PreconditionError(f"horizons must all be >= 1, got {self.horizons}")
        if any(not 0.0 < p < 1.0 for p in self.quantile_levels):
            raise PreconditionError(f"quantile levels must lie in (0, 1), got {self.quantile_levels}")


@dataclass(frozen=True)
class OracleTarget(BaseDataclass):
    kind: RiskKind
    level: float
    horizon: int
    value: float

    def __post_init__(self):
        self._fix_enums({('kind', RiskKind)})


@dataclass(frozen=True)
class OracleTargets(BaseDataclass):
    """Large-sample ground truth: loss quantiles and exceedance frequencies of h-block sums."""
    convention: Convention
    big_n: int
    seed: int | None
    targets: tuple[OracleTarget, ...]

    def __post_init__(self):
        self._fix_enums({('convention', Convention)})
        object.__setattr__(self, 'targets', tuple(
            OracleTarget.from_dict(t) if isinstance(t, dict) else t for t in self.targets
        ))

    def value(self, kind: RiskKind, level: float, horizon: int) -> float | None:
        for t in self.targets:
            if t.kind == kind and math.isclose(t.level, level) and t.horizon == horizon:
                return t.value
        return None


@dataclass(frozen=True)
class StudyCell(BaseDataclass):
    """One (measure, level, horizon) cell of the study table."""
    kind: RiskKind
    level: float
    horizon: int
    mean_estimate: float
    n_used: int
    mean_violations: float | None = None
    expected_violations: float | None = None
    oracle_target: float | None = None

    def __post_init__(self):
        self._fix_enums({('kind', RiskKind)})


@dataclass(frozen=True)
class StudyReport(BaseDataclass):
    config: StudyConfig
    cells: tuple[StudyCell, ...]
    n_used: int
    n_excluded: int
    scaling_refused: int = 0

    def __post_init__(self):
        self._fix_nested_classes({('config', StudyConfig)})
        object.__setattr__(self, 'cells', tuple(
            StudyCell.from_dict(c) if isinstance(c, dict) else c for c in self.cells
        ))

    def cell(self, kind: RiskKind, level: float, horizon: int) -> StudyCell:
        for c in self.cells:
            if c.kind == kind and math.isclose(c.level, level) and c.horizon == horizon:
                return c
        raise KeyError((kind, level, horizon))
