"""Build script for the optional compiled scoring kernel.

The package works without the extension (a pure-Python kernel is selected at
import time), so a failed compile downgrades to a warning instead of aborting
the install.
"""

from setuptools import Extension, setup

ext_modules = []
try:
    import numpy
    from Cython.Build import cythonize
except ImportError:
    pass
else:
    ext = Extension(
        "lshstream._kernels",
        ["src/lshstream/_kernels.pyx"],
        include_dirs=[numpy.get_include()],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
    )
    ext.optional = True
    ext_modules = cythonize([ext], language_level=3)

setup(ext_modules=ext_modules)
