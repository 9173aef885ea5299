import numpy as np
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "lidarsplat._kernels._native",
                ["src/lidarsplat/_kernels/_native.pyx"],
                include_dirs=[np.get_include()],
                # -ffp-contract=off: the numpy fallback and this extension must
                # produce bit-identical floats, so FMA contraction is disabled.
                extra_compile_args=["-O3", "-ffp-contract=off"],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
            )
        ],
        language_level=3,
    )
except ImportError:
    # Pure-python install still works; the numpy kernel backend is used.
    ext_modules = []

setup(ext_modules=ext_modules)
