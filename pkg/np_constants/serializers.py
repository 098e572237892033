from rest_framework import serializers

from np_constants.models import Estimate, Method, NpEntry, NpReport


def _estimate(attrs):
    return None if attrs is None else Estimate(**attrs)


class EstimateSerializer(serializers.Serializer):
    value = serializers.FloatField()
    error = serializers.FloatField()
    method = serializers.ChoiceField(choices=Method.choices)


class NpEntrySerializer(serializers.Serializer):
    k = serializers.IntegerField(min_value=1)
    value = serializers.FloatField()
    error = serializers.FloatField()
    method = serializers.ChoiceField(choices=Method.choices)
    closed_form = EstimateSerializer(allow_null=True)
    constructed = EstimateSerializer(allow_null=True)
    agreement = serializers.FloatField(allow_null=True)
    expansion = serializers.ListField(child=serializers.FloatField())


class NpReportSerializer(serializers.Serializer):
    """Writes an NpReport and reads one back for the ``tail`` command."""

    schema = serializers.IntegerField()
    I0 = EstimateSerializer()
    C0 = EstimateSerializer(allow_null=True)
    inverted = NpEntrySerializer(many=True)

    def create(self, validated_data):
        entries = [
            NpEntry(
                k=entry["k"],
                value=entry["value"],
                error=entry["error"],
                method=entry["method"],
                closed_form=_estimate(entry["closed_form"]),
                constructed=_estimate(entry["constructed"]),
                agreement=entry["agreement"],
                expansion=tuple(entry["expansion"]),
            )
            for entry in validated_data["inverted"]
        ]
        return NpReport(
            I0=_estimate(validated_data["I0"]),
            C0=_estimate(validated_data["C0"]),
            inverted=entries,
            schema=validated_data["schema"],
        )
