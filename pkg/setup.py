import os

from setuptools import Extension, setup

extensions = []
if os.environ.get("SPANPROF_NO_EXT") != "1":
    try:
        from Cython.Build import cythonize

        extensions = cythonize(
            [
                Extension(
                    "spanprof._record_codec",
                    ["src/spanprof/_record_codec.pyx"],
                )
            ],
            language_level=3,
        )
    except ImportError:
        # Pure-Python fallback is selected at import time; the wheel still works.
        extensions = []

setup(ext_modules=extensions)
