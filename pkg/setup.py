"""Build script: compiles the optional Cython kernel module.

The package works without the extension (a pure-Python kernel module with the
same interface is selected at import time), so any failure here degrades to a
source-only install instead of aborting.
"""

from setuptools import setup

ext_modules = []
try:
    import numpy
    from Cython.Build import cythonize
    from setuptools import Extension

    ext_modules = cythonize(
        [
            Extension(
                "khopgame._core",
                ["src/khopgame/_core.pyx"],
                include_dirs=[numpy.get_include()],
                # -ffp-contract=off keeps float accumulation bit-identical to
                # the pure-Python kernels (no fused multiply-add).
                extra_compile_args=["-O3", "-ffp-contract=off"],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
            )
        ],
        language_level=3,
    )
except Exception as exc:  # pragma: no cover - build-environment dependent
    import sys

    print(f"khopgame: skipping compiled kernels ({exc!r})", file=sys.stderr)

setup(ext_modules=ext_modules)
