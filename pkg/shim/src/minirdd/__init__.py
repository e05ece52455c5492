"""minirdd: a tiny in-process stand-in for an RDD-style API.

Provides just enough of the distributed-collection surface that generated
programs can run on a single machine with no cluster runtime installed:
``get_or_create_context`` returns a live context, ``parallelize`` wraps a
list, and the transformation/action methods have plain sequential-list
semantics.  Transformations always return a new :class:`LocalRDD`; nothing
is lazy, partitioned, or fault tolerant.

Element order is deterministic: every operation preserves the order of its
input sequence (``distinct`` keeps first occurrences, ``join`` pairs in
left-then-right scan order), so programs verified against this module have
reproducible output.
"""

import functools

__all__ = ["LocalRDD", "LocalContext", "get_or_create_context"]


def _as_pair(element):
    try:
        key, value = element
    except (TypeError, ValueError):
        raise ValueError(
            f"expected a (key, value) pair, got {element!r}"
        ) from None
    return key, value


class LocalRDD:
    """An immutable, ordered sequence with RDD-flavored methods."""

    __slots__ = ("_elements",)

    def __init__(self, elements):
        self._elements = list(elements)

    # -- transformations (return a new LocalRDD) --

    def map(self, func):
        return LocalRDD(func(x) for x in self._elements)

    def filter(self, predicate):
        return LocalRDD(x for x in self._elements if predicate(x))

    def flatMap(self, func):
        return LocalRDD(y for x in self._elements for y in func(x))

    def distinct(self):
        seen = set()
        out = []
        for x in self._elements:
            try:
                new = x not in seen
                if new:
                    seen.add(x)
            except TypeError:  # unhashable elements: fall back to a scan
                new = x not in out
            if new:
                out.append(x)
        return LocalRDD(out)

    def sortBy(self, keyfunc, ascending=True):
        return LocalRDD(sorted(self._elements, key=keyfunc, reverse=not ascending))

    def groupByKey(self):
        groups = {}
        for element in self._elements:
            key, value = _as_pair(element)
            groups.setdefault(key, []).append(value)
        return LocalRDD(groups.items())

    def join(self, other):
        out = []
        for element in self._elements:
            key, value = _as_pair(element)
            for other_element in other._elements:
                other_key, other_value = _as_pair(other_element)
                if key == other_key:
                    out.append((key, (value, other_value)))
        return LocalRDD(out)

    def union(self, other):
        return LocalRDD(self._elements + other._elements)

    # -- actions --

    def reduce(self, func):
        if not self._elements:
            raise ValueError("cannot reduce() an empty RDD")
        return functools.reduce(func, self._elements)

    def sum(self):
        return sum(self._elements)

    def count(self):
        return len(self._elements)

    def collect(self):
        return list(self._elements)

    def take(self, num):
        return list(self._elements[:num])

    def __repr__(self):
        return f"LocalRDD({self._elements!r})"


class LocalContext:
    """Process-local execution context; one live instance at a time."""

    def __init__(self, app_name="minirdd"):
        self.app_name = app_name
        self.alive = True

    def parallelize(self, data):
        return LocalRDD(data)

    def stop(self):
        global _active
        self.alive = False
        if _active is self:
            _active = None


_active = None


def get_or_create_context(app_name="minirdd"):
    """Return the live context, creating a fresh one if none is alive."""
    global _active
    if _active is None or not _active.alive:
        _active = LocalContext(app_name)
    return _active
