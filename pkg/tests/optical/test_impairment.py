"""This file contains tests for the functions in the impairment.py module."""

import math

import numpy
import pytest

from multilayer_planner.graphs.paths import FiberPath, k_shortest_paths
from multilayer_planner.ingest.loaders import topology_from_document
from multilayer_planner.model.types import (
    BindingConstraint,
    MarginStack,
    PathMetrics,
)
from multilayer_planner.optical.impairment import (
    cascade_osnr_db,
    evaluate_mode,
    filter_modes,
    path_metrics,
    span_osnr_db,
)
from tests.conftest import QAM16, QPSK, make_topology


def _uniform_link(span_count, loss_db=16.0):
    """Two-node topology with span_count spans of 80 km."""
    return topology_from_document(
        {
            "nodes": [{"id": "A"}, {"id": "B"}],
            "links": [
                {
                    "id": "AB",
                    "a": "A",
                    "b": "B",
                    "length_km": 80.0 * span_count,
                    "spans": [
                        {"length_km": 80.0, "loss_db": loss_db}
                    ]
                    * span_count,
                }
            ],
        }
    )


ROUTE_AB = FiberPath(links=("AB",), nodes=("A", "B"), weight=0.0)

_MARGIN_FIELDS = (
    "aging_margin_db",
    "span_repair_margin_db",
    "operator_margin_db",
)


def test_span_osnr_db():
    """A 16 dB span has 58 - 16 - 6 = 36 dB OSNR."""
    assert span_osnr_db(16.0) == pytest.approx(36.0)
    assert numpy.allclose(span_osnr_db([16.0, 20.0]), [36.0, 32.0])


def test_path_metrics_five_spans():
    """Five 36 dB spans cascade to about 29.01 dB."""
    metrics = path_metrics(ROUTE_AB, _uniform_link(5))
    assert metrics.osnr_db == pytest.approx(29.01, abs=0.01)
    assert metrics.span_count == 5
    assert metrics.total_length_km == 400.0
    assert metrics.roadm_passthrough_count == 0


def test_path_metrics_single_span():
    """One span keeps its own OSNR."""
    metrics = path_metrics(ROUTE_AB, _uniform_link(1))
    assert metrics.osnr_db == pytest.approx(36.0)


def test_path_metrics_two_span_offset():
    """Doubling identical spans costs 10 log10(2) dB."""
    one = path_metrics(ROUTE_AB, _uniform_link(1)).osnr_db
    two = path_metrics(ROUTE_AB, _uniform_link(2)).osnr_db
    assert one - two == pytest.approx(3.01, abs=0.01)


def test_path_metrics_pass_through(triangle):
    """Interior nodes of a route are pass-through ROADMs."""
    route = k_shortest_paths(triangle, "A", "C", 1)[0]
    metrics = path_metrics(route, triangle)
    assert metrics.roadm_passthrough_count == 1
    assert metrics.span_count == 10
    assert metrics.total_length_km == 800.0
    # Ten 80 km spans of 20 dB loss.
    assert metrics.osnr_db == pytest.approx(32 - 10 * math.log10(10))


def test_evaluate_mode_feasible():
    """29.01 dB covers 12 dB plus 2 dB of margins."""
    metrics = PathMetrics(
        total_length_km=400,
        span_count=5,
        roadm_passthrough_count=0,
        osnr_db=29.01,
    )
    margins = MarginStack(aging_margin_db=1, span_repair_margin_db=1)
    verdict = evaluate_mode(metrics, QPSK, margins)
    assert verdict.feasible
    assert verdict.binding_constraint == BindingConstraint.NONE
    assert verdict.metrics.effective_required_osnr_db == pytest.approx(14.0)


def test_evaluate_mode_reach():
    """Reach is checked first."""
    metrics = PathMetrics(
        total_length_km=2500,
        span_count=32,
        roadm_passthrough_count=0,
        osnr_db=5.0,
    )
    verdict = evaluate_mode(metrics, QPSK, MarginStack())
    assert not verdict.feasible
    assert verdict.binding_constraint == BindingConstraint.REACH


def test_evaluate_mode_osnr():
    """Four pass-throughs add 2 dB to the requirement."""
    metrics = PathMetrics(
        total_length_km=800,
        span_count=10,
        roadm_passthrough_count=4,
        osnr_db=13.0,
    )
    verdict = evaluate_mode(metrics, QPSK, MarginStack())
    assert not verdict.feasible
    assert verdict.binding_constraint == BindingConstraint.OSNR
    assert verdict.metrics.effective_required_osnr_db == pytest.approx(14.0)


def test_filter_modes(catalog):
    """Both modes close on 400 km, only QPSK on 800 km."""
    topology = make_topology(
        ["A", "B", "C", "D"],
        [
            ("AB", "A", "B", 400.0),
            ("BC", "B", "C", 400.0),
            ("CD", "C", "D", 3000.0),
        ],
    )

    def feasible(src, dst):
        route = k_shortest_paths(topology, src, dst, 1)[0]
        modes = filter_modes(route, topology, catalog)
        return [item.mode_id for item in modes]

    assert feasible("A", "B") == [QPSK.id, QAM16.id]
    assert feasible("A", "C") == [QPSK.id]
    assert feasible("C", "D") == []


def test_filter_modes_honours_margins(catalog):
    """Large margins make every mode infeasible."""
    topology = _uniform_link(5)
    strict = catalog.model_copy(
        update={"margins": MarginStack(operator_margin_db=20.0)}
    )
    assert filter_modes(ROUTE_AB, topology, catalog)
    assert filter_modes(ROUTE_AB, topology, strict) == []


def test_cascade_osnr_is_order_independent():
    """Span order does not change the cascade."""
    spans = numpy.array([30.0, 25.0, 33.0])
    assert cascade_osnr_db(spans) == pytest.approx(
        cascade_osnr_db(spans[::-1])
    )


def test_margin_monotonicity():
    """Raising a margin never turns a verdict feasible."""
    rng = numpy.random.default_rng(7)
    for _ in range(1000):
        metrics = PathMetrics(
            total_length_km=float(rng.uniform(50, 2500)),
            span_count=int(rng.integers(1, 30)),
            roadm_passthrough_count=int(rng.integers(0, 8)),
            osnr_db=float(rng.uniform(5, 35)),
        )
        low = rng.uniform(0, 3, size=3)
        high = low + rng.uniform(0, 3, size=3) * (rng.random(3) < 0.5)
        before = evaluate_mode(
            metrics, QPSK, MarginStack(**dict(zip(_MARGIN_FIELDS, low)))
        )
        after = evaluate_mode(
            metrics, QPSK, MarginStack(**dict(zip(_MARGIN_FIELDS, high)))
        )
        assert before.feasible or not after.feasible
