import math

import numpy as np
import pytest

from schwarzian.correlator import (
    CorrelatorSpec,
    QuadratureConfig,
    correlator_circle,
    correlator_circle_direct,
    correlator_interval,
    correlator_interval_with_exp,
    default_k_max,
    exp_moment_interval,
    moment,
    partition_function,
    partition_function_quadrature,
    regularized_circle_correlator,
)
from schwarzian.diagram import Chord, CircleDiagram, IntervalDiagram

# Frozen from an independent scipy dblquad evaluation of the two-face integral.
SINGLE_CHORD_L1_HALF = 18386509243.21924
SINGLE_CHORD_L2_GAP03_S13 = 12983957.404657645
INTERVAL_ONE_CHORD = 0.727855455335804
# Frozen from the tree evaluator at n = 400 (agrees with the Monte Carlo check).
NESTED_INTERVAL_VALUE = 34.5990268129


def circ(chords, sigma=1.0):
    return CorrelatorSpec(CircleDiagram(tuple(chords)), sigma)


@pytest.mark.parametrize("s2", [0.5, 1.0, 2.0, 4.0])
def test_partition_quadrature(s2):
    s = math.sqrt(s2)
    v = partition_function_quadrature(s)
    assert v.estimate == pytest.approx(partition_function(s), rel=1e-12)
    assert v.converged


def test_partition_value_sigma_sq_2():
    assert partition_function(math.sqrt(2.0)) == pytest.approx(math.pi**1.5 * math.exp(math.pi**2), rel=1e-14)


def test_single_chord_against_dblquad():
    assert moment(1, 0.5, 1.0).estimate == pytest.approx(SINGLE_CHORD_L1_HALF, rel=1e-10)
    assert moment(2, 0.3, 1.3).estimate == pytest.approx(SINGLE_CHORD_L2_GAP03_S13, rel=1e-10)


def test_interval_against_dblquad():
    spec = CorrelatorSpec(IntervalDiagram(1.0, 0.4, (Chord(0.2, 0.7),)), 1.0)
    assert correlator_interval(spec).estimate == pytest.approx(INTERVAL_ONE_CHORD, rel=1e-10)


def test_interval_base_case():
    for T, a, s in ((1.0, 0.0, 1.0), (2.0, 0.7, 0.8)):
        v = correlator_interval(CorrelatorSpec(IntervalDiagram(T, a, ()), s)).estimate
        assert v == pytest.approx(math.exp(-a * a / (2 * T * s * s)) / (math.sqrt(2 * math.pi * T) * s), rel=1e-10)


def test_nested_interval_value():
    d = IntervalDiagram(1.0, 0.0, (
        Chord(1 / 16, 15 / 16), Chord(3 / 16, 9 / 16), Chord(10 / 16, 13 / 16), Chord(3 / 16, 6 / 16),
    ))
    assert correlator_interval(CorrelatorSpec(d, 1.0)).estimate == pytest.approx(NESTED_INTERVAL_VALUE, rel=1e-9)


def test_moment_symmetric_in_gap():
    assert moment(1, 0.3, 1.0).estimate == pytest.approx(moment(1, 0.7, 1.0).estimate, rel=1e-12)


def test_rotation_invariance():
    chords = (Chord(0.1, 0.4, 1), Chord(0.5, 0.9, 2))
    base = correlator_circle(circ(chords)).estimate
    for shift in (0.05, 0.33, 0.71):
        rot = CircleDiagram(chords).rotated(shift)
        assert correlator_circle(CorrelatorSpec(rot, 1.0)).estimate == pytest.approx(base, rel=1e-9)


DIRECT_CASES = [
    (),
    (Chord(0.0, 0.5, 1),),
    (Chord(0.2, 0.45, 3),),
    (Chord(0.1, 0.6, 1), Chord(0.2, 0.4, 2)),
    (Chord(0.1, 0.3, 1), Chord(0.5, 0.8, 1)),
    (Chord(0.0, 0.5, 2), Chord(0.5, 0.9, 1)),
]


@pytest.mark.parametrize("chords", DIRECT_CASES)
def test_tree_equals_direct(chords):
    cfg = QuadratureConfig(n_nodes=200)
    a = correlator_circle(circ(chords), cfg).estimate
    b = correlator_circle_direct(circ(chords), cfg).estimate
    assert a == pytest.approx(b, rel=1e-12)


def test_trapezoid_rule_agrees():
    v1 = moment(1, 0.5, 1.0).estimate
    v2 = moment(1, 0.5, 1.0, QuadratureConfig(rule="trapezoid", n_nodes=800)).estimate
    assert v2 == pytest.approx(v1, rel=1e-8)


def test_default_k_max_shape():
    assert default_k_max([0.5, 0.5], 1.0) == pytest.approx(2 * math.pi + 10 / math.sqrt(0.5))
    assert default_k_max([1.0], 10.0) == 10.0


def test_regularized_exact_at_pi():
    for chords in DIRECT_CASES[1:4]:
        spec = circ(chords)
        assert regularized_circle_correlator(spec, math.pi).estimate == pytest.approx(
            correlator_circle(spec).estimate, rel=1e-13)


def test_regularized_error_decreases():
    spec = circ((Chord(0.0, 0.5, 1),))
    exact = correlator_circle(spec).estimate
    errs = [abs(regularized_circle_correlator(spec, math.pi - d).estimate - exact) for d in (0.2, 0.1, 0.05, 0.01)]
    assert all(b < a for a, b in zip(errs, errs[1:]))


def test_regularized_rejects_degenerate_face():
    spec = circ((Chord(0.0, 0.5), Chord(0.5, 0.0 + 0.999999999), Chord(0.0, 0.999999999)))
    with pytest.raises(ValueError):
        regularized_circle_correlator(spec, 3.0)


@pytest.mark.parametrize("alpha", [0.5, 1.3, 2.0])
def test_exp_insertion_matches_closed_form(alpha):
    z = 8.0 * math.sin(alpha / 2) ** 2
    closed = float(exp_moment_interval(z, 0.0, 1.0, 1.0))
    v = correlator_interval_with_exp(CorrelatorSpec(IntervalDiagram(1.0, 0.0, ()), 1.0), alpha).estimate
    assert v == pytest.approx(closed, rel=1e-10)


def test_exp_moment_at_zero_is_mass():
    assert float(exp_moment_interval(0.0, 0.0, 1.0, 1.0)) == pytest.approx(1 / math.sqrt(2 * math.pi), rel=1e-14)


def test_complex_endpoint_analytic():
    # cosine analytic continuation: value at a = i y is real and grows with y
    d = lambda a: CorrelatorSpec(IntervalDiagram(1.0, a, (Chord(0.2, 0.7),)), 1.0)
    v0 = correlator_interval(d(0.0)).estimate
    v1 = correlator_interval(d(0.5j)).estimate
    assert abs(np.imag(v1)) < 1e-12 * abs(v1)
    assert np.real(v1) > v0


def test_complex_endpoint_spanning_chord_unimplemented():
    with pytest.raises(NotImplementedError):
        correlator_interval(CorrelatorSpec(IntervalDiagram(1.0, 0.5j, (Chord(0.0, 1.0),)), 1.0))


def test_interval_reflection_symmetry():
    a = correlator_interval(CorrelatorSpec(IntervalDiagram(1.5, 0.3, (Chord(0.2, 0.9, 2),)), 1.0)).estimate
    b = correlator_interval(CorrelatorSpec(IntervalDiagram(1.5, -0.3, (Chord(0.6, 1.3, 2),)), 1.0)).estimate
    assert a == pytest.approx(b, rel=1e-10)


def test_doubling_cutoff_at_fixed_density():
    base = moment(1, 0.5, 1.0)
    wide = moment(1, 0.5, 1.0, QuadratureConfig(k_max=2 * base.k_max, n_nodes=800))
    assert wide.estimate == pytest.approx(base.estimate, rel=1e-10)
