"""Aggregation of the student friendship graph into school-level networks.

Three variants: raw tie counts, the min-symmetrized student-count
alternative, and a binary projection. Degree centrality counts distinct
connected schools.
"""

from __future__ import annotations

import csv

import numpy as np

from .errors import UnknownSchoolId
from .model import School, SchoolNetwork, StudentGraph


def _school_index(g: StudentGraph, roster: list[School]) -> dict[str, int]:
    index = {s.id: i for i, s in enumerate(roster)}
    for student, school in g.assignment.items():
        if school not in index:
            raise UnknownSchoolId(
                f"student {student!r} assigned to unknown school {school!r}"
            )
    return index


def build_count_network(g: StudentGraph, roster: list[School]):
    """Raw-count network A: weight[k][l] = number of student edges between
    schools k and l. Returns (network, intra_school_edge_counts)."""
    index = _school_index(g, roster)
    n = len(roster)
    w = np.zeros((n, n), dtype=np.int64)
    intra: dict[str, int] = {}
    for a, b in g.edges:
        sa, sb = g.assignment[a], g.assignment[b]
        if sa == sb:
            intra[sa] = intra.get(sa, 0) + 1
            continue
        i, j = index[sa], index[sb]
        w[i, j] += 1
        w[j, i] += 1
    net = SchoolNetwork([s.id for s in roster], w, kind="raw-count")
    return net, intra


def build_min_symmetrized_network(g: StudentGraph, roster: list[School]) -> SchoolNetwork:
    """Min-symmetrized network: the directed count of students in school k
    with at least one friend in school l, symmetrized by element-wise min
    with its transpose."""
    index = _school_index(g, roster)
    n = len(roster)
    # friend-school sets per student, then one count per (student school, other school)
    friend_schools: dict[str, set[str]] = {}
    for a, b in g.edges:
        sa, sb = g.assignment[a], g.assignment[b]
        if sa == sb:
            continue
        friend_schools.setdefault(a, set()).add(sb)
        friend_schools.setdefault(b, set()).add(sa)
    directed = np.zeros((n, n), dtype=np.int64)
    for student, others in friend_schools.items():
        i = index[g.assignment[student]]
        for school in others:
            directed[i, index[school]] += 1
    w = np.minimum(directed, directed.T)
    return SchoolNetwork([s.id for s in roster], w, kind="min-symmetrized")


def binarize(net: SchoolNetwork) -> SchoolNetwork:
    """Map every positive weight to 1."""
    return SchoolNetwork(net.schools, (net.weights > 0).astype(np.int64), kind="binary")


def degree_centrality(net: SchoolNetwork) -> dict[str, int]:
    """Number of distinct other schools with a positive tie weight."""
    degrees = (net.weights > 0).sum(axis=1)
    return {s: int(d) for s, d in zip(net.schools, degrees)}


def write_edge_list_csv(net: SchoolNetwork, path) -> None:
    """Upper-triangle nonzero weights as school_a, school_b, weight."""
    with open(path, "w", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(["school_a", "school_b", "weight"])
        for a, b, w in net.nonzero_pairs():
            writer.writerow([a, b, w])
