# Intentionally empty - marks quasipower/ as a Python package
