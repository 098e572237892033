from rest_framework import serializers

from evolution.exceptions import GridMisaligned
from evolution.models import NullGrid, ObserverCurve, ObserverKind


class GridBlockSerializer(serializers.Serializer):
    h = serializers.FloatField(min_value=0)
    u_max = serializers.FloatField(min_value=0)
    v_max = serializers.FloatField()
    v0 = serializers.FloatField(required=False, allow_null=True, default=None)
    snapshot_stride = serializers.IntegerField(
        required=False, default=0, min_value=0
    )

    def validate_h(self, value):
        if value <= 0:
            raise serializers.ValidationError("The step must be positive.")
        return value

    def create(self, validated_data) -> NullGrid:
        """The grid for data whose cone starts at ``context["v0"]``."""
        attrs = validated_data
        v0 = attrs["v0"]
        if v0 is None:
            v0 = self.context["v0"]
        try:
            return NullGrid(
                h=attrs["h"], u_max=attrs["u_max"], v0=v0, v_max=attrs["v_max"]
            )
        except GridMisaligned as exc:
            raise serializers.ValidationError({"h": str(exc)}) from exc


class ObserverSerializer(serializers.Serializer):
    kind = serializers.ChoiceField(choices=ObserverKind.choices)
    value = serializers.FloatField(
        required=False, allow_null=True, default=None
    )

    def validate(self, attrs):
        try:
            ObserverCurve(**attrs)
        except ValueError as exc:
            raise serializers.ValidationError({"value": str(exc)}) from exc
        return attrs

    def create(self, validated_data):
        return ObserverCurve(**validated_data)
