from rest_framework import serializers

from base.enums.base import Aggregation, BaseKind, EncoderKind, MaskMode, MotifKind, Task, choices


class StrictSerializer(serializers.Serializer):
    """선언되지 않은 키가 있으면 거부"""

    def to_internal_value(self, data):
        if isinstance(data, dict):
            unknown = sorted(set(data) - set(self.fields))
            if unknown:
                raise serializers.ValidationError({key: ["unknown key"] for key in unknown})
        return super().to_internal_value(data)


class TrainConfigSerializer(StrictSerializer):
    """TrainConfig 필드. 빠진 키는 settings.GREA 기본값을 쓴다."""
    alpha = serializers.FloatField(required=False, min_value=0.0)
    beta = serializers.FloatField(required=False, min_value=0.0)
    gamma = serializers.FloatField(required=False, min_value=0.0, max_value=1.0)
    agg = serializers.ChoiceField(choices=choices(Aggregation), required=False)
    t_sep = serializers.IntegerField(required=False, min_value=1)
    t_pred = serializers.IntegerField(required=False, min_value=1)
    num_rounds = serializers.IntegerField(required=False, min_value=1)
    patience = serializers.IntegerField(required=False, min_value=1)
    learning_rate = serializers.FloatField(required=False, min_value=0.0)
    batch_size = serializers.IntegerField(required=False, min_value=1)
    sep_dim = serializers.IntegerField(required=False, min_value=1)
    pred_dim = serializers.IntegerField(required=False, min_value=1)
    sep_layers = serializers.IntegerField(required=False, min_value=1)
    pred_layers = serializers.IntegerField(required=False, min_value=1)
    encoder = serializers.ChoiceField(choices=choices(EncoderKind), required=False)
    sep_encoder = serializers.ChoiceField(choices=choices(EncoderKind), required=False, allow_null=True)
    task = serializers.ChoiceField(choices=choices(Task), required=False)
    seed = serializers.IntegerField(required=False)
    mask_threshold = serializers.FloatField(required=False, min_value=0.0, max_value=1.0)
    diag_in_rep = serializers.BooleanField(required=False)
    log_target = serializers.BooleanField(required=False)
    mask_mode = serializers.ChoiceField(choices=choices(MaskMode), required=False)


class SyntheticSpecSerializer(StrictSerializer):
    num_graphs = serializers.IntegerField(required=False, min_value=1)
    base_size = serializers.ListField(child=serializers.IntegerField(min_value=3), min_length=2, max_length=2,
                                      required=False)
    base_kinds = serializers.ListField(child=serializers.ChoiceField(choices=choices(BaseKind)), min_length=2,
                                       required=False)
    motif_kinds = serializers.ListField(child=serializers.ChoiceField(choices=choices(MotifKind)), min_length=2,
                                        max_length=2, required=False)
    feature_dim = serializers.IntegerField(required=False, min_value=2)
    spurious_bias = serializers.FloatField(required=False, min_value=0.0, max_value=1.0)
    label_noise = serializers.FloatField(required=False, min_value=0.0, max_value=1.0)
    seed = serializers.IntegerField(required=False)
    split_ratios = serializers.ListField(child=serializers.FloatField(min_value=0.0), min_length=3, max_length=3,
                                         required=False)


class RunConfigSerializer(TrainConfigSerializer):
    """
    실행 설정 파일: TrainConfig 키 + 선택적인 synthetic 스펙과 경로
    {"alpha": 1.0, ..., "synthetic": {...}, "data": "d.jsonl", "out": "ckpt.json"}
    """
    synthetic = SyntheticSpecSerializer(required=False)
    data = serializers.CharField(required=False)
    out = serializers.CharField(required=False)
    split_ratios = serializers.ListField(child=serializers.FloatField(min_value=0.0), min_length=3, max_length=3,
                                         required=False)
