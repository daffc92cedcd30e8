# Intentionally empty - marks tests/ as a Python package
