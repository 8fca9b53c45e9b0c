from setuptools import Extension, setup
from Cython.Build import cythonize
import numpy

ext = Extension(
    "idlhash._kernels",
    ["src/idlhash/_kernels.pyx"],
    include_dirs=[numpy.get_include()],
    define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
)

setup(ext_modules=cythonize(ext, language_level=3))
