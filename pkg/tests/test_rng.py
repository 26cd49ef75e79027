from __future__ import annotations

import numpy as np
import pytest

from hybridnet.rng import stream_key, substream


def test_same_seed_and_tag_give_identical_streams():
    a = substream(7, "propagation", 3).random(5)
    b = substream(7, "propagation", 3).random(5)
    assert np.array_equal(a, b)


@pytest.mark.parametrize(
    "other",
    [(8, "propagation", 3), (7, "generator", 3), (7, "propagation", 4)],
)
def test_any_change_in_key_changes_stream(other):
    base = substream(7, "propagation", 3).random(5)
    assert not np.array_equal(base, substream(*other).random(5))


def test_stream_key_is_stable():
    assert stream_key("generator") == stream_key("generator")
    assert stream_key("generator", 1)[1:] == (1,)


def test_negative_seed_rejected():
    with pytest.raises(ValueError):
        substream(-1, "generator")
