# Intentionally empty - marks services/ as a Python package
