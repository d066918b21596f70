from setuptools import Extension, setup
from Cython.Build import cythonize

extensions = cythonize(
    [Extension("flowcodec._core", ["src/flowcodec/_core.pyx"])],
    compiler_directives={"language_level": "3"},
)

setup(ext_modules=extensions)
