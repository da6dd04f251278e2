"""Score-based resilience metrics: weighted indicator aggregation and the
36-point water-provision checklist."""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Mapping

from .errors import ValidationError

WPR_CATEGORIES = (
    "supply",
    "finances",
    "infrastructure",
    "service_provision",
    "water_quality",
    "governance",
)

_CRITERION_TAGS = (
    "monitor",
    "react",
    "anticipate",
    "baseline_functionality",
    "redundancy",
    "recovery",
)


@dataclass(frozen=True)
class Indicator:
    """A raw observation scaled by its maximum observed value."""

    name: str
    raw: float
    max_observed: float
    weight: float = 1.0

    def __post_init__(self):
        if self.max_observed <= 0:
            raise ValidationError(f"indicator {self.name!r}: max_observed must be > 0")
        if self.weight < 0:
            raise ValidationError(f"indicator {self.name!r}: weight must be >= 0")
        if not 0 <= self.scaled <= 1:
            raise ValidationError(
                f"indicator {self.name!r}: raw/max_observed = {self.scaled!r} "
                "falls outside [0, 1]"
            )

    @property
    def scaled(self) -> float:
        return self.raw / self.max_observed


def balaei_aggregate(indicators: list[Indicator]) -> float:
    """Weighted mean of squared scaled indicators."""
    if not indicators:
        raise ValidationError("indicator list must not be empty")
    total_weight = sum(i.weight for i in indicators)
    if total_weight <= 0:
        raise ValidationError("indicator weights sum to zero")
    return sum(i.weight * i.scaled**2 for i in indicators) / total_weight


def load_indicators(path: str | Path) -> list[Indicator]:
    """Read an indicator set CSV: ``name, raw, max_observed, weight``."""
    path = Path(path)
    if not path.exists():
        raise ValidationError(f"indicator file not found: {path}")
    expected = ("name", "raw", "max_observed", "weight")
    indicators = []
    with path.open(newline="") as handle:
        reader = csv.DictReader(handle)
        if reader.fieldnames is None or tuple(reader.fieldnames) != expected:
            raise ValidationError(f"{path}: header must be {','.join(expected)}")
        for lineno, row in enumerate(reader, start=2):
            try:
                indicators.append(
                    Indicator(
                        name=row["name"],
                        raw=float(row["raw"]),
                        max_observed=float(row["max_observed"]),
                        weight=float(row["weight"]),
                    )
                )
            except (TypeError, ValueError) as exc:
                raise ValidationError(f"{path}:{lineno}: {exc}") from exc
    return indicators


@dataclass(frozen=True)
class Criterion:
    name: str
    category: str
    tags: tuple[str, ...]

    def __post_init__(self):
        if self.category not in WPR_CATEGORIES:
            raise ValidationError(
                f"criterion {self.name!r}: unknown category {self.category!r}"
            )
        object.__setattr__(self, "tags", tuple(self.tags))
        if not self.tags:
            raise ValidationError(f"criterion {self.name!r}: needs at least one tag")
        bad = set(self.tags) - set(_CRITERION_TAGS)
        if bad:
            raise ValidationError(f"criterion {self.name!r}: unknown tags {sorted(bad)}")


@dataclass(frozen=True)
class WprChecklist:
    """Named binary criteria grouped into the six provision categories."""

    criteria: tuple[Criterion, ...]

    def __post_init__(self):
        object.__setattr__(self, "criteria", tuple(self.criteria))
        if not self.criteria:
            raise ValidationError("checklist must contain criteria")
        names = [c.name for c in self.criteria]
        if len(set(names)) != len(names):
            raise ValidationError("criterion names must be unique")

    @property
    def total(self) -> int:
        return len(self.criteria)

    def names(self) -> tuple[str, ...]:
        return tuple(c.name for c in self.criteria)

    def by_category(self) -> dict[str, tuple[Criterion, ...]]:
        return {
            cat: tuple(c for c in self.criteria if c.category == cat)
            for cat in WPR_CATEGORIES
        }


def wpr_score(checklist: WprChecklist, answers: Mapping[str, bool]) -> int:
    """Count of fulfilled criteria; every criterion must be answered."""
    known = set(checklist.names())
    unknown = set(answers) - known
    if unknown:
        raise ValidationError(f"answers name unknown criteria: {sorted(unknown)}")
    missing = known - set(answers)
    if missing:
        raise ValidationError(f"criteria left unanswered: {sorted(missing)}")
    return sum(1 for name in known if bool(answers[name]))


def checklist_from_dict(data: Mapping) -> WprChecklist:
    categories = data.get("categories")
    if not isinstance(categories, Mapping):
        raise ValidationError("checklist document needs a 'categories' object")
    unknown = set(categories) - set(WPR_CATEGORIES)
    if unknown:
        raise ValidationError(f"unknown checklist categories: {sorted(unknown)}")
    criteria = []
    for cat in WPR_CATEGORIES:
        for row in categories.get(cat, []):
            if "name" not in row:
                raise ValidationError(f"criterion in {cat!r} is missing a name")
            criteria.append(Criterion(row["name"], cat, tuple(row.get("tags", ()))))
    return WprChecklist(tuple(criteria))


def load_checklist(path: str | Path | None = None) -> WprChecklist:
    """Load a checklist JSON; defaults to the bundled 36-criterion file."""
    if path is None:
        text = resources.files("wdsres.data").joinpath("wpr_checklist.json").read_text()
    else:
        path = Path(path)
        if not path.exists():
            raise ValidationError(f"checklist file not found: {path}")
        text = path.read_text()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"cannot parse checklist: {exc}") from exc
    return checklist_from_dict(data)


def load_answers(path: str | Path) -> dict[str, bool]:
    """Read a criterion -> boolean map from JSON."""
    path = Path(path)
    if not path.exists():
        raise ValidationError(f"answers file not found: {path}")
    try:
        data = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ValidationError(f"cannot parse answers: {exc}") from exc
    if not isinstance(data, dict) or not all(isinstance(v, bool) for v in data.values()):
        raise ValidationError("answers must be a JSON object of booleans")
    return data
