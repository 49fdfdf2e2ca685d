from hypothesis import HealthCheck, settings

# JIT warm-up makes first calls slow; wall-clock deadlines would flake.
settings.register_profile(
    "suite",
    deadline=None,
    max_examples=50,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("suite")
