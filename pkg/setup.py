"""Build script for the compiled association kernel.

The extension is optional: when it fails to build (or was never built),
roitel.kernels falls back to the pure NumPy implementation at import time.
"""

import numpy
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize

    HAVE_CYTHON = True
except ImportError:
    HAVE_CYTHON = False

suffix = ".pyx" if HAVE_CYTHON else ".c"
extensions = [
    Extension(
        "roitel._fastassoc",
        ["src/roitel/_fastassoc" + suffix],
        include_dirs=[numpy.get_include()],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
        optional=True,
    )
]
if HAVE_CYTHON:
    extensions = cythonize(extensions, language_level="3")

setup(ext_modules=extensions)
