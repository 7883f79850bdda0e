"""Build script: compiles the optional accelerator extension.

The package is fully functional without the extension; the pure NumPy
kernel module is used as a fallback when compilation is unavailable.
"""
import os

from setuptools import setup

ext_modules = []
if os.environ.get("ELLRANK_SKIP_EXT") != "1" and os.path.exists(
    "src/ellrank/_ckernels.pyx"
):
    try:
        import numpy
        from Cython.Build import cythonize
        from setuptools import Extension

        ext_modules = cythonize(
            [
                Extension(
                    "ellrank._ckernels",
                    sources=["src/ellrank/_ckernels.pyx"],
                    include_dirs=[numpy.get_include()],
                    define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                )
            ],
            language_level=3,
        )
    except ImportError:
        ext_modules = []

setup(ext_modules=ext_modules)
