"""CSV parsing and the data-cleaning rules.

Input schemas (all CSV, header required, UTF-8, dot decimal separator):
  students:   student_id, school_id   (one row per school claim)
  edges:      student_id_a, student_id_b
  schools:    school_id, latitude, longitude, score  (empty score = missing)
  apartments: latitude, longitude, price, area  -- or a price_per_sqm column

Filtering order is fixed so reports are reproducible: excluded-id and
oversize schools, then missing-score schools, then multi-school students,
then students stranded in removed schools, then the no-same-school-friend
rule iterated to a fixed point.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

from .errors import (
    DuplicateSchoolId,
    EmptyResult,
    MalformedRow,
    NonPositiveArea,
)
from .model import Apartment, GeoPoint, School, StudentGraph

DEFAULT_MAX_COHORT = 1000


@dataclass(frozen=True)
class RawSchool:
    id: str
    location: GeoPoint
    score: float | None  # None = missing, removed by the filter stage


@dataclass
class RawInputs:
    claims: dict[str, set[str]]  # student -> claimed school ids
    edges: set[tuple[str, str]]  # sorted id pairs, duplicates collapsed
    schools: list[RawSchool]
    apartments: list[Apartment]


@dataclass
class FilterConfig:
    max_cohort: int = DEFAULT_MAX_COHORT
    excluded_school_ids: tuple[str, ...] = ()


@dataclass
class FilterReport:
    students_removed_no_same_school_friend: int = 0
    students_removed_multi_school: int = 0
    students_removed_school_filtered: int = 0
    schools_removed_oversize: int = 0
    schools_removed_missing_score: int = 0
    schools_removed_excluded_ids: int = 0
    edges_dropped_dangling: int = 0
    fixed_point_iterations: int = 0
    intra_school_edges: int = 0
    settings: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        d = {k: v for k, v in self.__dict__.items() if k != "settings"}
        d["settings"] = dict(self.settings)
        return d


def _float_field(row, key, path, line_no):
    try:
        value = float(row[key])
    except (KeyError, TypeError, ValueError):
        raise MalformedRow(path, line_no, f"bad {key}: {row.get(key)!r}")
    if not math.isfinite(value):
        raise MalformedRow(path, line_no, f"non-finite {key}")
    return value


def _reader(path, required_columns):
    with open(path, newline="", encoding="utf-8") as f:
        reader = csv.DictReader(f)
        header = reader.fieldnames or []
        missing = [c for c in required_columns if c not in header]
        if missing:
            raise MalformedRow(path, 1, f"missing columns {missing}")
        # line 1 is the header
        for line_no, row in enumerate(reader, start=2):
            yield line_no, row


def parse_students(path) -> dict[str, set[str]]:
    claims: dict[str, set[str]] = {}
    for line_no, row in _reader(path, ["student_id", "school_id"]):
        student, school = row["student_id"], row["school_id"]
        if not student or not school:
            raise MalformedRow(path, line_no, "empty student_id or school_id")
        claims.setdefault(student, set()).add(school)
    return claims


def parse_edges(path) -> set[tuple[str, str]]:
    edges: set[tuple[str, str]] = set()
    for line_no, row in _reader(path, ["student_id_a", "student_id_b"]):
        a, b = row["student_id_a"], row["student_id_b"]
        if not a or not b:
            raise MalformedRow(path, line_no, "empty student id")
        if a == b:
            continue  # self-friendship carries no information
        edges.add((a, b) if a < b else (b, a))
    return edges


def parse_schools(path) -> list[RawSchool]:
    schools: list[RawSchool] = []
    seen: set[str] = set()
    for line_no, row in _reader(path, ["school_id", "latitude", "longitude", "score"]):
        school_id = row["school_id"]
        if not school_id:
            raise MalformedRow(path, line_no, "empty school_id")
        if school_id in seen:
            raise DuplicateSchoolId(f"{path}:{line_no}: duplicate id {school_id!r}")
        seen.add(school_id)
        location = GeoPoint(
            _float_field(row, "latitude", path, line_no),
            _float_field(row, "longitude", path, line_no),
        )
        raw_score = (row.get("score") or "").strip()
        if raw_score:
            score = _float_field({"score": raw_score}, "score", path, line_no)
            if score < 0:
                raise MalformedRow(path, line_no, f"negative score {score}")
        else:
            score = None
        schools.append(RawSchool(id=school_id, location=location, score=score))
    return schools


def apartment_prices(path) -> list[Apartment]:
    """Apartments with price per square meter, computed from price/area
    when not given directly. Rows with area <= 0 are rejected."""
    apartments: list[Apartment] = []
    for line_no, row in _reader(path, ["latitude", "longitude"]):
        location = GeoPoint(
            _float_field(row, "latitude", path, line_no),
            _float_field(row, "longitude", path, line_no),
        )
        if row.get("price_per_sqm"):
            price_per_sqm = _float_field(row, "price_per_sqm", path, line_no)
        else:
            price = _float_field(row, "price", path, line_no)
            area = _float_field(row, "area", path, line_no)
            if area <= 0:
                raise NonPositiveArea(f"{path}:{line_no}: area {area}")
            price_per_sqm = price / area
        if price_per_sqm <= 0:
            raise MalformedRow(path, line_no, f"non-positive price {price_per_sqm}")
        apartments.append(Apartment(location=location, price_per_sqm=price_per_sqm))
    return apartments


def parse_inputs(students_file, edges_file, schools_file,
                 apartments_file) -> RawInputs:
    """Parse all four files without filtering. Duplicate edges collapse;
    a student listed with several school ids keeps all claims so the
    filter stage can drop it as multi-school."""
    return RawInputs(
        claims=parse_students(students_file),
        edges=parse_edges(edges_file),
        schools=parse_schools(schools_file),
        apartments=apartment_prices(apartments_file),
    )


def apply_filters(raw: RawInputs, config: FilterConfig | None = None):
    """Run the cleaning rules; returns (StudentGraph, roster, FilterReport).

    The no-same-school-friend rule runs to a fixed point: removing a
    student can strand a friend, so a single pass is not idempotent. The
    report records the iteration count.
    """
    config = config or FilterConfig()
    report = FilterReport(settings={
        "max_cohort": config.max_cohort,
        "excluded_school_ids": sorted(config.excluded_school_ids),
    })

    cohort: dict[str, int] = {}
    for schools in raw.claims.values():
        for school in schools:
            cohort[school] = cohort.get(school, 0) + 1

    excluded = set(config.excluded_school_ids)
    kept_schools: list[RawSchool] = []
    for school in raw.schools:
        if school.id in excluded:
            report.schools_removed_excluded_ids += 1
        elif cohort.get(school.id, 0) > config.max_cohort:
            report.schools_removed_oversize += 1
        elif school.score is None:
            report.schools_removed_missing_score += 1
        else:
            kept_schools.append(school)
    if not kept_schools:
        raise EmptyResult("no school survives filtering")
    roster = [School(s.id, s.location, s.score) for s in kept_schools]
    roster_ids = {s.id for s in roster}

    assignment: dict[str, str] = {}
    for student, schools in raw.claims.items():
        if len(schools) > 1:
            report.students_removed_multi_school += 1
        elif next(iter(schools)) not in roster_ids:
            report.students_removed_school_filtered += 1
        else:
            assignment[student] = next(iter(schools))

    listed = set(raw.claims)
    edges = set()
    for a, b in raw.edges:
        if a not in listed or b not in listed:
            report.edges_dropped_dangling += 1
        else:
            edges.add((a, b))

    # fixed point: drop students with no friend in their own school
    while True:
        report.fixed_point_iterations += 1
        same_school_friends = {s: 0 for s in assignment}
        for a, b in edges:
            if a in assignment and b in assignment and assignment[a] == assignment[b]:
                same_school_friends[a] += 1
                same_school_friends[b] += 1
        friendless = {s for s, n in same_school_friends.items() if n == 0}
        if not friendless:
            break
        report.students_removed_no_same_school_friend += len(friendless)
        for s in friendless:
            del assignment[s]

    edges = {(a, b) for a, b in edges if a in assignment and b in assignment}
    report.intra_school_edges = sum(
        1 for a, b in edges if assignment[a] == assignment[b]
    )
    graph = StudentGraph(assignment, edges)
    return graph, roster, report
