import os

from hypothesis import HealthCheck, settings

# Reference material, not part of the suite
collect_ignore = ["examples"]

settings.register_profile(
    "qpolar",
    derandomize=True,
    deadline=None,
    max_examples=100,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.register_profile("quick", parent=settings.get_profile("qpolar"), max_examples=20)
settings.load_profile(os.getenv("HYPOTHESIS_PROFILE", "qpolar"))
