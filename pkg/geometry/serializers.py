from django.utils.module_loading import import_string
from rest_framework import serializers

from geometry.exceptions import GeometryError
from geometry.models import SpacetimeKind, make_model


class ModelBlockSerializer(serializers.Serializer):
    kind = serializers.ChoiceField(choices=SpacetimeKind.choices)
    M = serializers.FloatField(required=False, default=0.0)
    e = serializers.FloatField(required=False, default=0.0)
    beta = serializers.FloatField(required=False, default=1.0, min_value=0)
    R = serializers.FloatField(required=False, allow_null=True, default=None)
    metric = serializers.CharField(required=False, allow_blank=False)
    metric_params = serializers.DictField(
        child=serializers.FloatField(), required=False, default=dict
    )

    def validate(self, attrs):
        is_custom = attrs["kind"] == SpacetimeKind.CUSTOM
        if is_custom and not attrs.get("metric"):
            raise serializers.ValidationError(
                {"metric": "A dotted path is required for custom models."}
            )
        if not is_custom and attrs.get("metric"):
            raise serializers.ValidationError(
                {"metric": "Only custom models take a metric class."}
            )
        if is_custom:
            try:
                import_string(attrs["metric"])
            except ImportError as exc:
                raise serializers.ValidationError({"metric": str(exc)})
        return attrs

    def create(self, validated_data):
        attrs = validated_data
        custom = None
        if attrs["kind"] == SpacetimeKind.CUSTOM:
            custom = import_string(attrs["metric"])(**attrs["metric_params"])
        try:
            return make_model(
                attrs["kind"],
                M=attrs["M"],
                e=attrs["e"],
                beta=attrs["beta"],
                custom_D=custom,
                R=attrs["R"],
            )
        except GeometryError as exc:
            raise serializers.ValidationError({"kind": str(exc)}) from exc
