import numpy as np
from rest_framework import serializers

from initial_data.families import (
    bump_data,
    make_foliation,
    mixed_data,
    superpose,
    tail_data,
)
from initial_data.models import FoliationKind
from initial_data.profiles import SpacelikeBump
from np_constants.closed_forms import time_inverted_I0, vanishes

FAMILIES = ("bump", "tail", "superpose", "mixed")
TUNES = ("I0_1",)

REQUIRED = {
    "bump": ("v_center", "width", "amplitude"),
    "tail": ("I0",),
    "superpose": ("first", "second"),
    "mixed": ("foliation", "spacelike", "cone"),
}


class SpacelikeBumpSerializer(serializers.Serializer):
    center = serializers.FloatField()
    width = serializers.FloatField(min_value=0)
    amplitude = serializers.FloatField(required=False, default=0.0)
    t_amplitude = serializers.FloatField(required=False, default=0.0)

    def create(self, validated_data):
        return SpacelikeBump(**validated_data)


class DataBlockSerializer(serializers.Serializer):
    """One data block; ``superpose`` and ``mixed`` nest further blocks.

    ``create`` needs the coordinate map in ``context["cmap"]``; a grid
    edge in ``context["v_max"]`` bounds compact supports.
    """

    family = serializers.ChoiceField(choices=FAMILIES)
    ell = serializers.IntegerField(required=False, default=0, min_value=0)
    # bump
    v_center = serializers.FloatField(required=False)
    width = serializers.FloatField(required=False, min_value=0)
    amplitude = serializers.FloatField(required=False)
    # tail
    I0 = serializers.FloatField(required=False)
    p = serializers.ListField(
        child=serializers.FloatField(), required=False, default=list
    )
    beta = serializers.FloatField(required=False, default=1.0, min_value=0)
    phi_vertex = serializers.FloatField(required=False, default=0.0)
    # superpose
    a = serializers.FloatField(required=False, default=1.0)
    b = serializers.FloatField(required=False, default=1.0)
    first = serializers.DictField(required=False)
    second = serializers.DictField(required=False)
    tune = serializers.ChoiceField(
        choices=TUNES, required=False, allow_null=True, default=None
    )
    # mixed
    foliation = serializers.ChoiceField(
        choices=FoliationKind.choices, required=False
    )
    spacelike = SpacelikeBumpSerializer(required=False)
    cone = serializers.DictField(required=False)

    def _nested(self, name, block):
        serializer = DataBlockSerializer(data=block, context=self.context)
        if not serializer.is_valid():
            raise serializers.ValidationError({name: serializer.errors})
        return serializer.validated_data

    def validate(self, attrs):
        family = attrs["family"]
        missing = {
            name: "This field is required."
            for name in REQUIRED[family]
            if attrs.get(name) is None
        }
        if missing:
            raise serializers.ValidationError(missing)
        for name in ("first", "second", "cone"):
            if name in REQUIRED[family]:
                attrs[name] = self._nested(name, attrs[name])
        if family == "mixed" and attrs["cone"]["family"] == "mixed":
            raise serializers.ValidationError(
                {"cone": "The cone part cannot itself be mixed."}
            )
        return attrs

    def create(self, validated_data):
        v_max = self.context.get("v_max", np.inf)
        return build_data(validated_data, self.context["cmap"], v_max)


def _tuned_weight(first, second, b: float) -> float:
    """a with a I0^(1)[first] + b I0^(1)[second] = 0."""
    pivot = time_inverted_I0(first)
    if vanishes(pivot, first.scale):
        raise serializers.ValidationError(
            {"tune": "I0^(1) of the first block vanishes; swap the blocks."}
        )
    return -b * time_inverted_I0(second).value / pivot.value


def build_data(attrs: dict, cmap, v_max: float = np.inf):
    """Data for a validated block; ``v_max`` is the grid's outer column."""
    family = attrs["family"]
    if family == "bump":
        return bump_data(
            cmap,
            attrs["v_center"],
            attrs["width"],
            attrs["amplitude"],
            ell=attrs["ell"],
            v_max=v_max,
        )
    if family == "tail":
        return tail_data(
            cmap,
            attrs["I0"],
            p_coeffs=attrs["p"],
            beta=attrs["beta"],
            ell=attrs["ell"],
            phi_vertex=attrs["phi_vertex"],
            v_max=v_max,
        )
    if family == "superpose":
        first = build_data(attrs["first"], cmap, v_max)
        second = build_data(attrs["second"], cmap, v_max)
        a, b = attrs["a"], attrs["b"]
        if attrs["tune"] == "I0_1":
            a = _tuned_weight(first, second, b)
        return superpose(a, first, b, second)
    return mixed_data(
        make_foliation(attrs["foliation"], cmap),
        SpacelikeBump(**attrs["spacelike"]),
        build_data(attrs["cone"], cmap, v_max),
    )
