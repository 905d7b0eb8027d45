import os

import numpy as np
from setuptools import Extension, setup

# No -ffast-math: the compiled kernel must agree bit-for-bit with the
# pure-Python fallback.
extensions = [
    Extension(
        "ecoroute._kernels",
        ["src/ecoroute/_kernels.pyx"],
        include_dirs=[np.get_include()],
        extra_compile_args=["-O2", "-fno-fast-math", "-ffp-contract=off"],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
    )
]

if os.environ.get("ECOROUTE_NO_EXT"):
    ext_modules = []
else:
    from Cython.Build import cythonize

    ext_modules = cythonize(extensions, compiler_directives={"language_level": "3"})

setup(ext_modules=ext_modules)
