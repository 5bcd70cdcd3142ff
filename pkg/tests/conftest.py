"""
Shared pytest settings.

The toy learnability run takes a few minutes on one core; deselect it with
`pytest -m "not slow"`.
"""


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: trains full toy models (minutes)")
