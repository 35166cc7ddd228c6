import math

from django.conf import settings
from rest_framework import serializers

from .losses import LOSS_KINDS
from .models import RunRecord
from .solver import METHODS


class StrictSerializer(serializers.Serializer):
    """
    A plain (non-model) serializer that refuses keys it does not declare, so that a typo
    in a scenario file is an error instead of a silently ignored setting.
    """
    def to_internal_value(self, data):
        if isinstance(data, dict):
            unknown = sorted(set(data) - set(self.fields))
            if unknown:
                raise serializers.ValidationError({key: ["Unknown field."] for key in unknown})
        return super().to_internal_value(data)


class ExtendedRealField(serializers.FloatField):
    """A float that may also be +infinity (written ``inf`` in TOML or as the string "inf")."""
    default_error_messages = {
        'nan': 'NaN is not allowed.',
        'negative_infinity': 'Negative infinity is not allowed.',
    }

    def to_internal_value(self, data):
        if isinstance(data, str) and data.strip().lower() in ('inf', '+inf', 'infinity'):
            return math.inf
        if isinstance(data, float) and math.isinf(data):
            if data < 0:
                self.fail('negative_infinity')
            return data
        value = super().to_internal_value(data)
        if math.isnan(value):
            self.fail('nan')
        return value


class SpaceSerializer(StrictSerializer):
    kind = serializers.ChoiceField(choices=['torus'], default='torus')
    n = serializers.IntegerField(min_value=2)


class MeasuresSerializer(StrictSerializer):
    """Named generators for the clean class measures."""
    kind = serializers.ChoiceField(choices=['halves', 'interleaved', 'uniform', 'custom', 'random'])
    p = serializers.IntegerField(min_value=2, required=False)
    mu1 = serializers.ListField(child=serializers.FloatField(min_value=0), required=False)
    mum1 = serializers.ListField(child=serializers.FloatField(min_value=0), required=False)
    seed = serializers.IntegerField(min_value=0, required=False)

    def validate(self, data):
        kind = data['kind']
        if kind == 'interleaved':
            p = data.get('p')
            if p is None:
                raise serializers.ValidationError({"p": "Interleaved measures need the number of intervals p."})
            if p % 2:
                raise serializers.ValidationError({"p": f"p must be even, got {p}."})
        elif 'p' in data:
            raise serializers.ValidationError({"p": f"p only applies to interleaved measures, not '{kind}'."})
        if kind == 'custom':
            for name in ('mu1', 'mum1'):
                if name not in data:
                    raise serializers.ValidationError({name: "Custom measures need both mu1 and mum1 tables."})
        else:
            for name in ('mu1', 'mum1'):
                if name in data:
                    raise serializers.ValidationError({name: f"{name} only applies to custom measures."})
        if 'seed' in data and kind != 'random':
            raise serializers.ValidationError({"seed": f"seed only applies to random measures, not '{kind}'."})
        return data


class LossesSerializer(StrictSerializer):
    kind = serializers.ChoiceField(choices=sorted(LOSS_KINDS))


class CostSerializer(StrictSerializer):
    """Power cost ``d**r``, indicator cost ``level * 1[d > threshold]`` or explicit tables."""
    kind = serializers.ChoiceField(choices=['power', 'indicator', 'custom'])
    r = serializers.FloatField(required=False)
    threshold = serializers.FloatField(min_value=0, required=False)
    level = ExtendedRealField(min_value=0, required=False)
    c1 = serializers.ListField(child=serializers.ListField(child=ExtendedRealField(min_value=0)), required=False)
    cm1 = serializers.ListField(child=serializers.ListField(child=ExtendedRealField(min_value=0)), required=False)

    KIND_OPTIONS = {'power': {'r'}, 'indicator': {'threshold', 'level'}, 'custom': {'c1', 'cm1'}}

    def validate(self, data):
        kind = data['kind']
        extra = sorted(set(data) - self.KIND_OPTIONS[kind] - {'kind'})
        if extra:
            raise serializers.ValidationError({key: [f"Not used by {kind} costs."] for key in extra})
        if kind == 'power':
            r = data.get('r')
            if r is None or not r > 0:
                raise serializers.ValidationError({"r": "Power costs need a positive exponent r."})
        if kind == 'indicator' and 'threshold' not in data:
            raise serializers.ValidationError({"threshold": "Indicator costs need a threshold."})
        if kind == 'custom':
            for name in ('c1', 'cm1'):
                if name not in data:
                    raise serializers.ValidationError({name: "Custom costs need both c1 and cm1 tables."})
        return data


class SolverOptionsSerializer(StrictSerializer):
    eps = serializers.ListField(child=serializers.FloatField(), allow_empty=False)
    tol_grad = serializers.FloatField(required=False)
    max_iter = serializers.IntegerField(min_value=1, required=False)
    method = serializers.ChoiceField(choices=list(METHODS), required=False)
    sinkhorn_tol = serializers.FloatField(required=False)
    sinkhorn_max_iter = serializers.IntegerField(min_value=1, required=False)
    certify = serializers.BooleanField(required=False, default=True)

    def validate_eps(self, value):
        if any(not (math.isfinite(eps) and eps > 0) for eps in value):
            raise serializers.ValidationError("Every eps must be strictly positive and finite.")
        repeated = sorted({eps for eps in value if value.count(eps) > 1})
        if repeated:
            raise serializers.ValidationError(f"Repeated eps values: {', '.join(map(repr, repeated))}.")
        return value

    def validate(self, data):
        defaults = settings.GAME_SOLVER
        data.setdefault('tol_grad', defaults['TOL_GRAD'])
        data.setdefault('max_iter', defaults['MAX_ITER'])
        data.setdefault('method', defaults['METHOD'])
        data.setdefault('sinkhorn_tol', defaults['SINKHORN_TOL'])
        data.setdefault('sinkhorn_max_iter', defaults['SINKHORN_MAX_ITER'])
        for name in ('tol_grad', 'sinkhorn_tol'):
            if not data[name] > 0:
                raise serializers.ValidationError({name: "Tolerances must be positive."})
        return data


class OutputSerializer(StrictSerializer):
    dir = serializers.CharField(required=False, default=None, allow_null=True)


class ScenarioSerializer(StrictSerializer):
    """Schema of one ``[[scenario]]`` entry of a scenario file (after merging ``[defaults]``)."""
    id = serializers.SlugField(max_length=100)
    space = SpaceSerializer()
    measures = MeasuresSerializer()
    losses = LossesSerializer()
    cost = CostSerializer()
    solver = SolverOptionsSerializer()
    output = OutputSerializer(required=False, default=dict)

    def validate(self, data):
        n = data['space']['n']
        measures = data['measures']
        for name in ('mu1', 'mum1'):
            if name in measures and len(measures[name]) != n:
                raise serializers.ValidationError(
                    {"measures": {name: f"Expected {n} weights, got {len(measures[name])}."}}
                )
        cost = data['cost']
        for name in ('c1', 'cm1'):
            table = cost.get(name)
            if table is not None and (len(table) != n or any(len(row) != n for row in table)):
                raise serializers.ValidationError({"cost": {name: f"Expected a {n}x{n} table."}})
        return data


class RunRecordListSerializer(serializers.ModelSerializer):
    """Summary view of an archived run, without the per-point arrays."""
    class Meta:
        model = RunRecord
        fields = [
            'id', 'scenario_id', 'eps', 'status', 'value_eps', 'dual_eps', 'gap_eps',
            'upper_t0', 'lower_unreg', 'gap_unreg', 'iterations', 'grad_norm',
            'max_abs_h', 'lipschitz', 'wall_time', 'classifier_csv', 'created',
        ]
        read_only_fields = fields


class RunRecordDetailSerializer(serializers.ModelSerializer):
    """Full archived run, including ``h`` and the attack densities at every grid point."""
    class Meta:
        model = RunRecord
        fields = RunRecordListSerializer.Meta.fields + ['z', 'h', 'nu1', 'nu_m1']
        read_only_fields = fields
