import os

import numpy as np
from setuptools import Extension, setup

ext_modules = []
if not os.environ.get("CUBICML_NO_EXT"):
    try:
        from Cython.Build import cythonize
    except ImportError:
        cythonize = None
    if cythonize is not None:
        ext_modules = cythonize(
            [
                Extension(
                    "cubicml._kernels",
                    ["src/cubicml/_kernels.pyx"],
                    include_dirs=[np.get_include()],
                    define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                    # no FMA contraction, so the split and optimizer kernels match the NumPy
                    # fallback bit for bit; no errno lets sqrt vectorize
                    extra_compile_args=["-O3", "-ffp-contract=off", "-fno-math-errno"],
                )
            ],
            compiler_directives={"language_level": "3"},
        )

setup(ext_modules=ext_modules)
