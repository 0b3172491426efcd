from hypothesis import settings

# the first call into each numba kernel includes compilation time
settings.register_profile("default", deadline=None)
settings.load_profile("default")
