import numpy
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "icefield._kernels._native",
                ["src/icefield/_kernels/_native.pyx"],
                include_dirs=[numpy.get_include()],
                # -ffp-contract=off: no FMA contraction, so the compiled kernels
                # produce bit-identical floats to the numpy fallback.
                extra_compile_args=["-O3", "-ffp-contract=off"],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
            )
        ],
        language_level=3,
    )
except ImportError:
    # No Cython: install pure-Python; the numpy kernel backend is used instead.
    ext_modules = []

setup(ext_modules=ext_modules)
