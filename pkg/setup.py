"""Build script for the optional compiled propagation kernel.

The package is fully functional without the extension; the pure-Python
kernel is selected at import time when the compiled one is missing, so
any build failure here downgrades to a warning instead of breaking the
install.
"""

import sys

from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext


class _OptionalBuildExt(build_ext):
    def run(self):
        try:
            super().run()
        except Exception as exc:  # missing compiler, broken toolchain, ...
            self._skip(exc)

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:
            self._skip(exc)

    @staticmethod
    def _skip(exc):
        print(
            "warning: compiled kernel not built (%s); "
            "falling back to the pure-Python kernel" % (exc,),
            file=sys.stderr,
        )


def _extensions():
    try:
        from Cython.Build import cythonize
    except ImportError:
        print("warning: Cython not available; skipping compiled kernel", file=sys.stderr)
        return []
    return cythonize(
        [Extension("flowcheck._kernel_cy", ["src/flowcheck/_kernel_cy.pyx"])],
        compiler_directives={"language_level": "3"},
    )


setup(ext_modules=_extensions(), cmdclass={"build_ext": _OptionalBuildExt})
