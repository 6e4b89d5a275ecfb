"""This file contains the wavelength (fixed grid) and spectrum
(flex grid) ledger: first-fit and exact-fit assignment with
continuity over a whole route, release, fragmentation and
occupancy statistics, and automatic fiber overbuild.

Occupancy is kept as one boolean numpy array per
(fiber link, fiber instance); True marks a busy cell (channel
or slot).
"""

import threading
from collections.abc import Iterator, Sequence

import numpy
from numpy.lib.stride_tricks import sliding_window_view

from multilayer_planner.ingest.catalog import SpectrumPolicy
from multilayer_planner.model.exceptions import (
    OverbuildDisabledError,
    SpectrumExhaustedError,
    UnknownEntityError,
)
from multilayer_planner.model.types import (
    FiberGraph,
    GridKind,
    GridSpec,
    LinkInstance,
    SpectrumAssignment,
)


class SpectrumState:
    """Occupancy of every fiber instance of every link.

    Mutations are serialized through an internal lock; `copy`
    gives readers an independent snapshot.

    Attributes:
        grid (GridSpec): The channel plan.
        enable_overbuild (bool): Whether new fiber instances may
            be lit when a route is exhausted.
        policy (SpectrumPolicy): Assignment policy.
    """

    def __init__(
        self,
        grid: GridSpec,
        topology: FiberGraph,
        enable_overbuild: bool = True,
        policy: SpectrumPolicy = SpectrumPolicy.FIRST_FIT,
    ):
        self.grid = grid
        self.enable_overbuild = enable_overbuild
        self.policy = policy
        self.lock = threading.RLock()
        self._installed: dict[str, int] = {}
        self._occupancy: dict[str, list[numpy.ndarray]] = {}
        for link in topology.links:
            self._installed[link.id] = link.fiber_count
            self._occupancy[link.id] = [
                numpy.zeros(grid.size, dtype=bool)
                for _ in range(link.fiber_count)
            ]

    def copy(self) -> "SpectrumState":
        """Returns an independent snapshot of the ledger."""
        clone = SpectrumState.__new__(SpectrumState)
        clone.grid = self.grid
        clone.enable_overbuild = self.enable_overbuild
        clone.policy = self.policy
        clone.lock = threading.RLock()
        with self.lock:
            clone._installed = dict(self._installed)
            clone._occupancy = {
                link_id: [bitmap.copy() for bitmap in bitmaps]
                for link_id, bitmaps in self._occupancy.items()
            }
        return clone

    def bitmaps(self, link_id: str) -> list[numpy.ndarray]:
        """Occupancy arrays of a link, one per fiber instance.

        Raises:
            UnknownEntityError: If the link is unknown.
        """
        try:
            return self._occupancy[link_id]
        except KeyError as err:
            raise UnknownEntityError("link", link_id) from err

    def fiber_count(self, link_id: str) -> int:
        """Live fiber instances of a link."""
        return len(self.bitmaps(link_id))

    def overbuilt_count(self, link_id: str) -> int:
        """Fiber instances lit beyond the installed fiber count."""
        return self.fiber_count(link_id) - self._installed[link_id]

    def fiber_counts(self) -> dict[str, int]:
        """Live fiber instances per link, by link id."""
        return {
            link_id: len(self._occupancy[link_id])
            for link_id in sorted(self._occupancy)
        }

    def link_instances(self) -> Iterator[tuple[str, int, numpy.ndarray]]:
        """Yields (link id, instance, bitmap), links by id and
        instances ascending."""
        for link_id in sorted(self._occupancy):
            for instance, bitmap in enumerate(self._occupancy[link_id]):
                yield link_id, instance, bitmap

    def mark(self, assignment: SpectrumAssignment) -> None:
        """Occupies the cells of an assignment on every link.

        Raises:
            ValueError: If any cell is already busy; nothing is
                marked in that case.
        """
        cells = slice(assignment.start, assignment.start + assignment.width)
        with self.lock:
            targets = [
                self.bitmaps(item.link_id)[item.instance]
                for item in assignment.fiber_instances
            ]
            if any(bitmap[cells].any() for bitmap in targets):
                raise ValueError(f"overlapping assignment {assignment}")
            for bitmap in targets:
                bitmap[cells] = True

    def release(self, assignment: SpectrumAssignment) -> None:
        """Frees the cells of an assignment on every link.

        Raises:
            ValueError: If any cell is not busy; nothing is freed
                in that case.
        """
        cells = slice(assignment.start, assignment.start + assignment.width)
        with self.lock:
            targets = [
                self.bitmaps(item.link_id)[item.instance]
                for item in assignment.fiber_instances
            ]
            if not all(bitmap[cells].all() for bitmap in targets):
                raise ValueError(f"releasing free spectrum {assignment}")
            for bitmap in targets:
                bitmap[cells] = False

    def ensure_fiber_count(self, link_id: str, count: int) -> None:
        """Lights fiber instances until the link has count."""
        with self.lock:
            bitmaps = self.bitmaps(link_id)
            while len(bitmaps) < count:
                bitmaps.append(numpy.zeros(self.grid.size, dtype=bool))


def _window_free(bitmap: numpy.ndarray, width: int) -> numpy.ndarray:
    """Bool per start index: cells [start, start + width) free."""
    if width > bitmap.size:
        return numpy.zeros(0, dtype=bool)
    return ~sliding_window_view(bitmap, width).any(axis=1)


def link_feasible_starts(
    state: SpectrumState, link_id: str, width: int
) -> numpy.ndarray:
    """Start indexes at which some fiber instance of the link
    has `width` free cells."""
    starts = numpy.zeros(max(state.grid.size - width + 1, 0), dtype=bool)
    for bitmap in state.bitmaps(link_id):
        starts |= _window_free(bitmap, width)
    return starts


def route_feasible_starts(
    state: SpectrumState, route: Sequence[str], width: int
) -> numpy.ndarray:
    """Start indexes free on every link of the route."""
    starts = numpy.ones(max(state.grid.size - width + 1, 0), dtype=bool)
    for link_id in route:
        starts &= link_feasible_starts(state, link_id, width)
    return starts


def free_runs(free: numpy.ndarray) -> list[tuple[int, int]]:
    """Maximal runs of True cells.

    Args:
        free (numpy.ndarray): Bool array, True for free cells.

    Returns:
        list[tuple[int, int]]: (start, length) of every run, in
            ascending start order.
    """
    padded = numpy.concatenate(([False], free, [False])).astype(int)
    edges = numpy.flatnonzero(numpy.diff(padded))
    return [
        (int(start), int(stop - start))
        for start, stop in zip(edges[::2], edges[1::2])
    ]


def _build_assignment(
    state: SpectrumState, route: Sequence[str], start: int, width: int
) -> SpectrumAssignment:
    instances = []
    for link_id in route:
        for instance, bitmap in enumerate(state.bitmaps(link_id)):
            if not bitmap[start : start + width].any():
                instances.append(
                    LinkInstance(link_id=link_id, instance=instance)
                )
                break
    if state.grid.kind == GridKind.FIXED:
        return SpectrumAssignment(
            kind=GridKind.FIXED,
            channel_index=start,
            fiber_instances=tuple(instances),
        )
    return SpectrumAssignment(
        kind=GridKind.FLEX,
        slot_range=(start, start + width),
        fiber_instances=tuple(instances),
    )


def _check_request(
    state: SpectrumState, route: Sequence[str], width: int
) -> None:
    if width < 1:
        raise ValueError(f"width must be at least 1, got {width}.")
    if not route:
        raise ValueError("route must not be empty.")
    if state.grid.kind == GridKind.FIXED and width != 1:
        raise ValueError("fixed grid lightpaths occupy exactly 1 channel.")


def assign_first_fit(
    state: SpectrumState, route: Sequence[str], width: int
) -> SpectrumAssignment:
    """Assigns the lowest channel or slot range free on every
    link of a route, and marks it.

    On each link the lowest fiber instance holding the range is
    used.

    Args:
        state (SpectrumState): The ledger (mutated).
        route (Sequence[str]): Link ids of the route.
        width (int): Cells to occupy (1 on a fixed grid).

    Returns:
        SpectrumAssignment: The marked assignment.

    Raises:
        ValueError: If width or route is invalid.
        SpectrumExhaustedError: If no common range exists on the
            current fiber instances.
    """
    _check_request(state, route, width)
    with state.lock:
        starts = numpy.flatnonzero(route_feasible_starts(state, route, width))
        if starts.size == 0:
            raise SpectrumExhaustedError("spectrum exhausted")
        assignment = _build_assignment(state, route, int(starts[0]), width)
        state.mark(assignment)
    return assignment


def assign_exact_fit(
    state: SpectrumState, route: Sequence[str], width: int
) -> SpectrumAssignment:
    """Assigns a range inside the smallest free block that can
    hold it, and marks it.

    Blocks are the runs of cells free (on some fiber instance)
    on every link; ties go to the lowest block. Within a block
    the lowest feasible start is used.

    Args:
        state (SpectrumState): The ledger (mutated).
        route (Sequence[str]): Link ids of the route.
        width (int): Cells to occupy (1 on a fixed grid).

    Returns:
        SpectrumAssignment: The marked assignment.

    Raises:
        ValueError: If width or route is invalid.
        SpectrumExhaustedError: If no common range exists on the
            current fiber instances.
    """
    _check_request(state, route, width)
    with state.lock:
        feasible = route_feasible_starts(state, route, width)
        free = numpy.ones(state.grid.size, dtype=bool)
        for link_id in route:
            link_free = numpy.zeros(state.grid.size, dtype=bool)
            for bitmap in state.bitmaps(link_id):
                link_free |= ~bitmap
            free &= link_free
        best: tuple[int, int] | None = None
        for block_start, length in free_runs(free):
            if length < width:
                continue
            inside = numpy.flatnonzero(
                feasible[block_start : block_start + length - width + 1]
            )
            if inside.size and (best is None or length < best[0]):
                best = (length, block_start + int(inside[0]))
        if best is None:
            raise SpectrumExhaustedError("spectrum exhausted")
        assignment = _build_assignment(state, route, best[1], width)
        state.mark(assignment)
    return assignment


def overbuild(state: SpectrumState, topology: FiberGraph, link_id: str) -> int:
    """Lights one more fiber on a link.

    Args:
        state (SpectrumState): The ledger (mutated).
        topology (FiberGraph): The fiber graph.
        link_id (str): Link to overbuild.

    Returns:
        int: Index of the new fiber instance.

    Raises:
        OverbuildDisabledError: If overbuild is switched off.
        UnknownEntityError: If the link is unknown.
    """
    if not state.enable_overbuild:
        raise OverbuildDisabledError(f"overbuild disabled on {link_id}")
    topology.link(link_id)
    with state.lock:
        bitmaps = state.bitmaps(link_id)
        bitmaps.append(numpy.zeros(state.grid.size, dtype=bool))
        return len(bitmaps) - 1


def assign_spectrum(
    state: SpectrumState,
    topology: FiberGraph,
    route: Sequence[str],
    width: int,
) -> SpectrumAssignment:
    """Assigns spectrum on a fixed route with the state policy,
    overbuilding bottleneck links until the assignment fits.

    Links with no room of their own are overbuilt first; when
    every link has room but no common range exists, the link
    with the fewest feasible starts is overbuilt (ties to the
    first in route order). The route itself never changes.

    Args:
        state (SpectrumState): The ledger (mutated).
        topology (FiberGraph): The fiber graph.
        route (Sequence[str]): Link ids of the route.
        width (int): Cells to occupy.

    Returns:
        SpectrumAssignment: The marked assignment.

    Raises:
        SpectrumExhaustedError: If the route is exhausted and
            overbuild is disabled, or width exceeds the grid.
    """
    assign = (
        assign_exact_fit
        if state.policy == SpectrumPolicy.EXACT_FIT
        else assign_first_fit
    )
    if width > state.grid.size:
        raise SpectrumExhaustedError(
            f"width {width} exceeds the grid of {state.grid.size} cells"
        )
    with state.lock:
        while True:
            try:
                return assign(state, route, width)
            except SpectrumExhaustedError:
                if not state.enable_overbuild:
                    raise
            room = {
                link_id: int(link_feasible_starts(state, link_id, width).sum())
                for link_id in route
            }
            bottlenecks = [link_id for link_id in route if room[link_id] == 0]
            if not bottlenecks:
                bottlenecks = [min(route, key=lambda link_id: room[link_id])]
            for link_id in bottlenecks:
                overbuild(state, topology, link_id)


def fragmentation(state: SpectrumState, link_id: str, instance: int) -> float:
    """Fragmentation of the free spectrum of one fiber.

    Args:
        state (SpectrumState): The ledger.
        link_id (str): The link.
        instance (int): The fiber instance.

    Returns:
        float: 1 - largest free block / total free slots; 0 when
            the fiber is full or its free spectrum is one block.

    Raises:
        ValueError: On a fixed grid.
    """
    if state.grid.kind != GridKind.FLEX:
        raise ValueError("fragmentation is defined on a flex grid only.")
    runs = free_runs(~state.bitmaps(link_id)[instance])
    total = sum(length for _, length in runs)
    if total == 0:
        return 0.0
    return 1.0 - max(length for _, length in runs) / total


def occupancy(state: SpectrumState, link_id: str) -> float:
    """Share of busy cells over all fiber instances of a link."""
    bitmaps = state.bitmaps(link_id)
    return float(sum(int(bitmap.sum()) for bitmap in bitmaps)) / (
        len(bitmaps) * state.grid.size
    )
