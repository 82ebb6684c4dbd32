"""Builds the optional compiled heat kernel; the package works without it."""

import os

from setuptools import Extension, setup

ext_modules = []
if os.environ.get("HHLAB_PURE_PYTHON") != "1":
    try:
        import numpy
        from Cython.Build import cythonize

        ext_modules = cythonize(
            [Extension("hhlab._heat_core", ["src/hhlab/_heat_core.pyx"],
                       include_dirs=[numpy.get_include()],
                       define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")])],
            compiler_directives={"language_level": 3},
        )
    except ImportError:
        ext_modules = []

setup(ext_modules=ext_modules)
