from django.test import SimpleTestCase
from rest_framework import serializers

from geometry.coordinates import build_coordinate_map
from geometry.models import SpacetimeKind, make_model
from initial_data.exceptions import SupportOutsideGrid
from initial_data.models import CharacteristicData, MixedSurfaceData
from initial_data.serializers import DataBlockSerializer
from np_constants.closed_forms import time_inverted_I0


def sample_cmap(kind=SpacetimeKind.SCHWARZSCHILD, **kwargs):
    if kind == SpacetimeKind.SCHWARZSCHILD:
        kwargs.setdefault("M", 1.0)
    return build_coordinate_map(make_model(kind, **kwargs))


def sample_bump_block(**kwargs):
    block = {
        "family": "bump",
        "v_center": 40.0,
        "width": 4.0,
        "amplitude": 1.0,
    }
    block.update(kwargs)
    return block


def build(block, cmap, **context):
    serializer = DataBlockSerializer(
        data=block, context={"cmap": cmap, **context}
    )
    serializer.is_valid(raise_exception=True)
    return serializer.save()


class TestDataBlockValidation(SimpleTestCase):
    def test_bump_needs_its_parameters(self):
        serializer = DataBlockSerializer(
            data={"family": "bump", "v_center": 40.0}
        )

        self.assertFalse(serializer.is_valid())
        self.assertIn("width", serializer.errors)
        self.assertIn("amplitude", serializer.errors)

    def test_unknown_family_rejected(self):
        serializer = DataBlockSerializer(data={"family": "wiggle"})

        self.assertFalse(serializer.is_valid())
        self.assertIn("family", serializer.errors)

    def test_nested_errors_keep_their_path(self):
        block = {
            "family": "superpose",
            "first": sample_bump_block(),
            "second": {"family": "bump", "v_center": 60.0},
        }
        serializer = DataBlockSerializer(data=block)

        self.assertFalse(serializer.is_valid())
        self.assertIn("width", serializer.errors["second"])

    def test_mixed_cone_cannot_be_mixed(self):
        inner = {
            "family": "mixed",
            "foliation": "static",
            "spacelike": {"center": 5.0, "width": 1.0, "amplitude": 1.0},
            "cone": sample_bump_block(),
        }
        block = dict(inner, cone=inner)
        serializer = DataBlockSerializer(data=block)

        self.assertFalse(serializer.is_valid())
        self.assertIn("cone", serializer.errors)


class TestDataBlockCreate(SimpleTestCase):
    def setUp(self):
        self.cmap = sample_cmap()

    def test_bump(self):
        data = build(sample_bump_block(ell=1), self.cmap)

        self.assertIsInstance(data, CharacteristicData)
        self.assertEqual(data.ell, 1)
        self.assertAlmostEqual(float(data.phi(40.0)), 1.0)

    def test_tail(self):
        data = build({"family": "tail", "I0": 2.0, "p": [0.5]}, self.cmap)

        self.assertIsNotNone(data.tail)
        self.assertEqual(data.tail.I0_target, 2.0)

    def test_tuned_superposition_cancels_I0_1(self):
        block = {
            "family": "superpose",
            "first": sample_bump_block(v_center=30.0),
            "second": sample_bump_block(v_center=60.0, width=8.0),
            "b": 1.0,
            "tune": "I0_1",
        }
        data = build(block, self.cmap)
        first = build(block["first"], self.cmap)

        scale = abs(time_inverted_I0(first).value)
        self.assertLessEqual(abs(time_inverted_I0(data).value), 1e-10 * scale)

    def test_mixed(self):
        block = {
            "family": "mixed",
            "foliation": "static",
            "spacelike": {"center": 5.0, "width": 1.0, "t_amplitude": 1.0},
            "cone": sample_bump_block(),
        }
        data = build(block, self.cmap)

        self.assertIsInstance(data, MixedSurfaceData)
        self.assertEqual(data.foliation.kind, "static")

    def test_tuning_rejects_a_first_block_without_I0_1(self):
        # compact data in flat space carry I0^(1) = 0 exactly
        block = {
            "family": "superpose",
            "first": sample_bump_block(v_center=30.0),
            "second": sample_bump_block(v_center=60.0, width=8.0),
            "tune": "I0_1",
        }

        with self.assertRaises(serializers.ValidationError) as context:
            build(block, sample_cmap(SpacetimeKind.MINKOWSKI))
        self.assertIn("tune", context.exception.detail)


class TestDataBlockGridEdge(SimpleTestCase):
    def setUp(self):
        self.cmap = sample_cmap()

    def test_data_extend_to_the_grid_edge(self):
        data = build({"family": "tail", "I0": 1.0}, self.cmap, v_max=80.0)

        self.assertEqual(data.v_max, 80.0)

    def test_bump_beyond_the_grid_edge(self):
        with self.assertRaises(SupportOutsideGrid):
            build(sample_bump_block(v_center=78.0), self.cmap, v_max=80.0)

    def test_nested_blocks_see_the_grid_edge(self):
        block = {
            "family": "superpose",
            "first": sample_bump_block(),
            "second": sample_bump_block(v_center=90.0),
        }

        with self.assertRaises(SupportOutsideGrid):
            build(block, self.cmap, v_max=80.0)

    def test_no_edge_without_a_grid(self):
        data = build(sample_bump_block(v_center=500.0), self.cmap)

        self.assertEqual(data.support, (496.0, 504.0))
