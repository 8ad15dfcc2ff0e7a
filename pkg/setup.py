"""Build script: compiles the optional Cython integration kernel.

The package is fully functional without the extension (a numpy fallback is
selected at import time); any failure here downgrades to a pure-Python build.
"""
from setuptools import setup

ext_modules = []
try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        ["src/stratlab/_kernels/_dp45.pyx"],
        language_level=3,
        compiler_directives={
            "boundscheck": False,
            "wraparound": False,
            "cdivision": True,
        },
    )
except Exception as exc:  # pragma: no cover - degraded build path
    print(f"stratlab: skipping compiled kernel ({exc!r}); "
          "pure-Python backend will be used")

setup(ext_modules=ext_modules)
