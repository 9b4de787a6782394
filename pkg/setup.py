"""Builds the optional compiled sampling kernel.

The package is fully functional without it: cmfc.backend falls back to the
NumPy implementation when the extension is absent (or CMFC_PURE_PYTHON=1).
"""
from setuptools import setup, Extension

import numpy as np

ext = Extension(
    "cmfc._kernels",
    ["src/cmfc/_kernels.pyx"],
    include_dirs=[np.get_include()],
    define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
)
ext.optional = True  # build proceeds on compiler failure; runtime falls back

try:
    from Cython.Build import cythonize

    ext_modules = cythonize([ext], language_level=3)
except ImportError:
    ext_modules = []

setup(ext_modules=ext_modules)
