"""Brute-force range search: the correctness oracle and the benchmark baseline."""

from typing import TYPE_CHECKING, Iterable, Set

from src.index.models import STObject

if TYPE_CHECKING:
    from src.search.range_search import RangeQuery


def scan_range(objects: Iterable[STObject], q: "RangeQuery") -> Set[STObject]:
    """Every object inside q's closed box, by checking each one in turn."""
    x_min, x_max = q.x_min, q.x_max
    y_min, y_max = q.y_min, q.y_max
    t_start, t_end = q.t_start, q.t_end
    result = set()
    for o in objects:
        if x_min <= o.x <= x_max and y_min <= o.y <= y_max and t_start <= o.t <= t_end:
            result.add(o)
    return result
