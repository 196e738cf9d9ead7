import numpy
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:
    cythonize = None

extensions = [
    Extension(
        "imcflab._kernels._dijkstra",
        ["src/imcflab/_kernels/_dijkstra.pyx"],
        include_dirs=[numpy.get_include()],
        extra_compile_args=["-O3"],
        optional=True,
    )
]

setup(
    ext_modules=cythonize(extensions, language_level=3) if cythonize else [],
)
