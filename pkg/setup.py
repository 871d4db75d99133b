import os

from setuptools import Extension, setup

ext_modules = []
if not os.environ.get("CURVEFIELD_NO_EXT"):
    try:
        import numpy as np
        from Cython.Build import cythonize

        # -ffp-contract=off keeps the compiled kernels bitwise identical to
        # the numpy fallback (no fused multiply-add contraction).
        ext_modules = cythonize(
            [
                Extension(
                    "curvefield._kernels",
                    ["src/curvefield/_kernels.pyx"],
                    include_dirs=[np.get_include()],
                    extra_compile_args=["-O2", "-ffp-contract=off"],
                )
            ],
            language_level=3,
        )
    except ImportError:
        ext_modules = []

setup(ext_modules=ext_modules)
