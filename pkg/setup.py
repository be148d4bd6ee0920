"""Builds the optional Cython kernels; the package falls back to pure Python without them."""

import numpy as np
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:
    ext_modules = []
else:
    ext_modules = cythonize(
        [
            Extension(
                "memplan._kernels",
                ["src/memplan/_kernels.pyx"],
                include_dirs=[np.get_include()],
                # no fast-math / contraction: results must match the Python kernels bit for bit
                extra_compile_args=["-O2", "-ffp-contract=off"],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
            )
        ],
        compiler_directives={"language_level": "3"},
    )

setup(ext_modules=ext_modules)
