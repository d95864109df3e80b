import os

import numpy as np
from Cython.Build import cythonize
from setuptools import Extension, setup

random_lib = os.path.join(os.path.dirname(np.random.__file__), "lib")

extensions = [
    Extension(
        "sojourn._mc_kernel",
        ["src/sojourn/_mc_kernel.pyx"],
        include_dirs=[np.get_include()],
        library_dirs=[random_lib],
        libraries=["npyrandom"],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
        extra_compile_args=["-O2"],
        optional=True,  # the package falls back to the NumPy kernel
    )
]

setup(ext_modules=cythonize(extensions, language_level=3))
