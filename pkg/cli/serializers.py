import json
from pathlib import Path

from django.conf import settings
from jsonschema import Draft202012Validator
from referencing import Registry, Resource
from rest_framework import serializers

from asymptotics.serializers import ScenarioSerializer
from cli.exceptions import ConfigError
from evolution.models import ObserverCurve
from evolution.serializers import GridBlockSerializer, ObserverSerializer
from geometry.serializers import ModelBlockSerializer
from initial_data.serializers import DataBlockSerializer


class RunConfigSerializer(serializers.Serializer):
    schema = serializers.IntegerField()
    model = ModelBlockSerializer()
    data = DataBlockSerializer()
    grid = GridBlockSerializer(required=False, allow_null=True, default=None)
    observers = ObserverSerializer(many=True, required=False, default=list)
    scenarios = ScenarioSerializer(many=True, required=False, default=list)
    np_order = serializers.IntegerField(required=False, default=1, min_value=0)
    construct = serializers.BooleanField(required=False, default=False)
    convergence_levels = serializers.IntegerField(
        required=False, default=0, min_value=0
    )
    np_drift_tolerance = serializers.FloatField(
        required=False, default=0.01, min_value=0.0
    )
    output = serializers.CharField(
        required=False, allow_null=True, default=None
    )
    threads = serializers.IntegerField(
        required=False, allow_null=True, default=None, min_value=1
    )
    budget_cells = serializers.IntegerField(
        required=False, allow_null=True, default=None, min_value=1
    )

    def validate_schema(self, value):
        expected = settings.LAB["SCHEMA_VERSION"]
        if value != expected:
            raise serializers.ValidationError(
                f"Expected schema version {expected}, got {value}."
            )
        return value

    def validate_convergence_levels(self, value):
        if 0 < value < 3:
            raise serializers.ValidationError(
                "At least 3 levels are needed for a convergence factor."
            )
        return value

    def validate(self, attrs):
        defined = {ObserverCurve(**block).id for block in attrs["observers"]}
        unknown = {
            index: {"curve": [f"No observer '{block['curve']}' is defined."]}
            for index, block in enumerate(attrs["scenarios"])
            if block["curve"] not in defined
        }
        if unknown:
            raise serializers.ValidationError({"scenarios": unknown})
        return attrs


def flatten_errors(errors, prefix: str = "") -> list[str]:
    """DRF error trees as ``path.to.field: message`` lines."""
    if isinstance(errors, dict):
        lines = []
        for key, value in errors.items():
            if key == "non_field_errors":
                path = prefix or "config"
            else:
                path = f"{prefix}.{key}" if prefix else str(key)
            lines.extend(flatten_errors(value, path))
        return lines
    if isinstance(errors, list):
        if all(isinstance(item, str) for item in errors):
            return [f"{prefix}: {item}" for item in errors]
        lines = []
        for index, item in enumerate(errors):
            if item:
                lines.extend(flatten_errors(item, f"{prefix}.{index}"))
        return lines
    return [f"{prefix}: {errors}"]


def load_schema(name: str) -> dict:
    path = Path(settings.LAB["SCHEMA_DIR"]) / f"{name}.schema.json"
    return json.loads(path.read_text(encoding="utf-8"))


def schema_registry() -> Registry:
    """Every shipped schema, so that reports can refer to each other."""
    paths = sorted(Path(settings.LAB["SCHEMA_DIR"]).glob("*.schema.json"))
    return Registry().with_resources(
        (
            path.name,
            Resource.from_contents(
                json.loads(path.read_text(encoding="utf-8"))
            ),
        )
        for path in paths
    )


def schema_errors(payload, name: str) -> list[str]:
    validator = Draft202012Validator(
        load_schema(name), registry=schema_registry()
    )
    errors = sorted(
        validator.iter_errors(payload),
        key=lambda error: [str(p) for p in error.path],
    )
    return [
        f"{'.'.join(str(p) for p in error.path) or 'config'}: {error.message}"
        for error in errors
    ]


def validate_config(payload) -> dict:
    """Validated run configuration, or ConfigError naming every bad path."""
    messages = schema_errors(payload, "runconfig")
    if messages:
        raise ConfigError(messages)
    serializer = RunConfigSerializer(data=payload)
    if not serializer.is_valid():
        raise ConfigError(flatten_errors(serializer.errors))
    return serializer.validated_data


def load_config(path) -> dict:
    try:
        payload = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError([f"config: {exc}"]) from exc
    return validate_config(payload)
