from rest_framework import serializers

from asymptotics.models import Scenario, TailScenario


class ScenarioSerializer(serializers.Serializer):
    kind = serializers.ChoiceField(choices=TailScenario.choices)
    curve = serializers.CharField()
    k = serializers.IntegerField(required=False, default=0, min_value=0)
    order = serializers.IntegerField(
        required=False, allow_null=True, default=None, min_value=1
    )
    window = serializers.ListField(
        child=serializers.FloatField(min_value=0),
        min_length=2,
        max_length=2,
        required=False,
        allow_null=True,
        default=None,
    )

    def validate(self, attrs):
        if attrs["window"] is not None:
            attrs["window"] = tuple(attrs["window"])
        try:
            Scenario(**attrs)
        except ValueError as exc:
            raise serializers.ValidationError(str(exc)) from exc
        return attrs

    def create(self, validated_data):
        return Scenario(**validated_data)


class LocalIndexSerializer(serializers.Serializer):
    tau = serializers.ListField(child=serializers.FloatField())
    p = serializers.ListField(child=serializers.FloatField())
    power_law = serializers.BooleanField()


class TailFitSerializer(serializers.Serializer):
    scenario = serializers.CharField(source="scenario.kind")
    k = serializers.IntegerField(source="scenario.k")
    order = serializers.IntegerField(source="scenario.n")
    curve = serializers.CharField()
    field = serializers.CharField()
    window = serializers.ListField(child=serializers.FloatField())
    local_index = LocalIndexSerializer(source="index", allow_null=True)
    p_inf = serializers.FloatField(allow_null=True)
    p_inf_error = serializers.FloatField(allow_null=True)
    p_theory = serializers.FloatField(allow_null=True)
    amplitude = serializers.FloatField()
    amplitude_error = serializers.FloatField()
    constant_id = serializers.CharField(source="scenario.constant_id")
    constant = serializers.FloatField()
    target = serializers.FloatField()
    deviation = serializers.FloatField()
    passes = serializers.SerializerMethodField()
    notes = serializers.ListField(child=serializers.CharField())

    def get_passes(self, fit) -> bool:
        return fit.passes()
