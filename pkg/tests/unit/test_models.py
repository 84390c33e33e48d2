"""Unit tests for domain models."""

import numpy as np
import pytest

from pragmatic_colors.domain.models import (
    LabelSamples,
    Partition,
    RunManifest,
    Rgb,
    Triple,
    TripleTag,
)


class TestRgb:
    """Tests for the RGB value type."""

    def test_clamped(self):
        """Out-of-range channels are clipped."""
        assert Rgb.clamped([300.0, -4.0, 12.5]) == Rgb(255.0, 0.0, 12.5)

    def test_hex(self):
        assert Rgb(255.0, 128.4, 0.0).to_hex() == "#ff8000"

    def test_non_finite_rejected(self):
        with pytest.raises(ValueError):
            Rgb(float("nan"), 0.0, 0.0)

    def test_as_array(self):
        np.testing.assert_array_equal(Rgb(1.0, 2.0, 3.0).as_array(), [1.0, 2.0, 3.0])


class TestTriple:
    """Tests for dataset triples."""

    def test_defaults_to_test_tag(self):
        assert Triple("green", "dirty", "dirty green").tag is TripleTag.TEST

    def test_pair(self):
        assert Triple("green", "more vibrant", "more vibrant green").pair == ("green", "more vibrant")

    @pytest.mark.parametrize(
        "ref, mod, target",
        [("", "dirty", "dirty green"), ("green", " ", "x"), ("green", "a b c", "a b c green")],
    )
    def test_invalid(self, ref, mod, target):
        """Empty fields and three-token modifiers are rejected."""
        with pytest.raises(ValueError):
            Triple(ref, mod, target)


class TestLabelSamples:
    """Tests for per-label sample storage."""

    def test_shape_checked(self):
        with pytest.raises(ValueError):
            LabelSamples("x", np.zeros((4, 2)))

    def test_tags_must_match(self):
        with pytest.raises(ValueError):
            LabelSamples("x", np.zeros((2, 3)), (Partition.TRAIN,))

    def test_vectors_in(self):
        """Untagged samples return everything for any partition."""
        s = LabelSamples("x", np.arange(6.0).reshape(2, 3))
        assert s.vectors_in(Partition.TEST).shape == (2, 3)
        tagged = LabelSamples("x", s.vectors, (Partition.TEST, Partition.TRAIN))
        np.testing.assert_array_equal(tagged.vectors_in(Partition.TRAIN), [[3.0, 4.0, 5.0]])
        assert len(tagged) == 2


class TestRunManifest:
    def test_to_dict_copies(self):
        manifest = RunManifest(command="eval", config={"epochs": 5}, seeds=[0, 1])
        d = manifest.to_dict()
        d["seeds"].append(2)
        assert manifest.seeds == [0, 1]
        assert d["datasets"] == {} and d["finished_at"] == ""
