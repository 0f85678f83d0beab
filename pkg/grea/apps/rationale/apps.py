from django.apps import AppConfig


class RationaleConfig(AppConfig):
    name = "apps.rationale"
