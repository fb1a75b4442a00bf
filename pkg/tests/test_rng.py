import numpy as np
import pytest

from asymrisk.rng import RandomSource, as_source


def test_same_seed_same_draws():
    a = RandomSource(7).generator(0).standard_normal(16)
    b = RandomSource(7).generator(0).standard_normal(16)
    assert np.array_equal(a, b)


def test_substreams_differ():
    src = RandomSource(7)
    a = src.generator(0).standard_normal(16)
    b = src.generator(1).standard_normal(16)
    assert not np.array_equal(a, b)


def test_streams_differ():
    a = RandomSource(7, stream_id=0).generator(0).standard_normal(16)
    b = RandomSource(7, stream_id=1).generator(0).standard_normal(16)
    assert not np.array_equal(a, b)


def test_child_matches_explicit_stream():
    src = RandomSource(7, stream_id=2)
    child = src.child(5)
    assert child.seed == 7
    assert child.stream_id == 5
    a = child.generator(3).standard_normal(8)
    b = RandomSource(7, stream_id=5).generator(3).standard_normal(8)
    assert np.array_equal(a, b)


def test_generator_is_fresh_each_call():
    src = RandomSource(11)
    a = src.generator(0).standard_normal(4)
    b = src.generator(0).standard_normal(4)
    assert np.array_equal(a, b)


def test_as_source():
    src = RandomSource(3, stream_id=1)
    assert as_source(src) is src
    made = as_source(9)
    assert isinstance(made, RandomSource)
    assert made.seed == 9
    assert made.stream_id == 0


def test_as_source_rejects_nonsense():
    with pytest.raises(ValueError):
        as_source("not a seed")


def test_negative_seed_rejected():
    with pytest.raises(ValueError, match="seed"):
        RandomSource(-1)
