import os

from setuptools import Extension, setup

ext_modules = []
if not os.environ.get("TEXTFREQ_SKIP_EXT"):
    try:
        from Cython.Build import cythonize

        ext_modules = cythonize(
            [Extension("textfreq._ckernels", ["src/textfreq/_ckernels.pyx"])],
            language_level=3,
        )
    except ImportError:
        # No Cython available: ship pure Python, the package selects the
        # fallback kernels at import time.
        ext_modules = []

setup(ext_modules=ext_modules)
