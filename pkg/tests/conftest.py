import time

SESSION_T0 = time.time()


def pytest_collection_modifyitems(items):
    """Run the acceptance module last so its suite-duration criterion can
    measure (nearly) the whole run."""
    items.sort(key=lambda item: item.fspath.basename == "test_acceptance.py")
