from setuptools import Extension, setup
from Cython.Build import cythonize

ext_modules = [
    Extension(
        "bttt._kernels._core",
        ["src/bttt/_kernels/_core.pyx"],
        extra_compile_args=["-O3"],
    )
]

setup(ext_modules=cythonize(ext_modules, language_level=3))
