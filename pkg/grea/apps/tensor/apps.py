from django.apps import AppConfig


class TensorConfig(AppConfig):
    name = "apps.tensor"
