from Cython.Build import cythonize
from setuptools import Extension, setup

extensions = [
    Extension(
        "distress_nonce._ckernel",
        ["src/distress_nonce/_ckernel.pyx"],
        include_dirs=["src/distress_nonce"],
        extra_compile_args=["-O3"],
    )
]

setup(
    ext_modules=cythonize(extensions, compiler_directives={"language_level": "3"}),
)
