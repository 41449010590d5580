import os

from setuptools import Extension, setup

ext_modules = []
if not os.environ.get("MTHD_SKIP_EXT") and os.path.exists("src/mthd/_core.pyx"):
    try:
        from Cython.Build import cythonize

        ext_modules = cythonize(
            [
                Extension(
                    "mthd._core",
                    ["src/mthd/_core.pyx"],
                    extra_compile_args=[
                        "-O3",
                        "-march=native",
                        "-funroll-loops",
                        "-ffast-math",
                    ],
                    extra_link_args=["-lmvec", "-lm"],
                )
            ],
            compiler_directives={"language_level": "3"},
        )
    except ImportError:
        # Pure-Python install still works; the numpy fallback is selected
        # at import time.
        ext_modules = []

setup(ext_modules=ext_modules)
