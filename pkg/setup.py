"""Build script: compiles the optional Levenshtein extension when Cython and a
C compiler are available, otherwise installs pure-Python only."""

import sys

from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext


class optional_build_ext(build_ext):
    """Skip the extension instead of failing the whole install."""

    def run(self):
        try:
            super().run()
        except Exception as exc:  # compiler missing, etc.
            print(f"warning: skipping C extension build ({exc})", file=sys.stderr)

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:
            print(
                f"warning: could not build {ext.name} ({exc}); "
                "falling back to pure Python",
                file=sys.stderr,
            )


ext_modules = []
try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [Extension("xpathsmith._speedups", ["src/xpathsmith/_speedups.pyx"])],
        compiler_directives={"language_level": "3"},
    )
except ImportError:
    print("warning: Cython not available, installing without the C extension", file=sys.stderr)

setup(ext_modules=ext_modules, cmdclass={"build_ext": optional_build_ext})
